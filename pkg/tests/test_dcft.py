import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zcradar.dcft import ChirpSpectrum, dcft, idcft, matched_peak_bin
from zcradar.zcseq import delayed_zc, generate_zc


def direct_dcft(x, beta):
    # explicit kernel sum with float angles
    N = len(x)
    n = np.arange(N)
    k = n[:, None]
    kernel = np.exp(-2j * np.pi * (k * n - beta * n * n / 2.0) / N)
    return kernel @ x / math.sqrt(N)


def random_signal(N, seed=0):
    rng = np.random.default_rng(seed)
    return rng.standard_normal(N) + 1j * rng.standard_normal(N)


def test_beta_zero_is_normalized_dft():
    x = random_signal(64)
    np.testing.assert_allclose(dcft(x, 0).coefficients, np.fft.fft(x) / 8, atol=1e-12)


@pytest.mark.parametrize("N,beta", [(8, 1), (64, 5), (256, 7), (512, 253)])
def test_matches_direct_sum(N, beta):
    x = random_signal(N, beta)
    np.testing.assert_allclose(dcft(x, beta).coefficients, direct_dcft(x, beta),
                               atol=1e-9 * math.sqrt(N))


def test_matched_delayed_sequence_is_impulse():
    N = 2048
    X = dcft(delayed_zc(generate_zc(3, N), 5), 3).coefficients
    mag = np.abs(X)
    assert matched_peak_bin(3, 5, N) == 15
    assert mag[15] == pytest.approx(math.sqrt(N), abs=1e-6)
    assert np.delete(mag, 15).max() <= 1e-6


def test_unmatched_rate_spreads():
    # oracle: direct kernel sum; the maximum is a Gauss sum of magnitude sqrt(2)
    N = 2048
    z = generate_zc(3, N).samples
    expected_max = math.sqrt(2)
    oracle = np.abs(direct_dcft(z, 5)).max()
    assert oracle == pytest.approx(expected_max, abs=1e-6)
    got = np.abs(dcft(z, 5).coefficients).max()
    assert got == pytest.approx(expected_max, abs=1e-9)
    assert 1 < got <= 64


def test_matched_bin_wraps():
    N = 2048
    assert matched_peak_bin(3, 683, N) == 1
    assert matched_peak_bin(7, 0, N) == 0
    X = dcft(delayed_zc(generate_zc(3, N), 683), 3).coefficients
    assert int(np.argmax(np.abs(X))) == 1


def test_roundtrip_small_tolerance():
    x = random_signal(256, 1)
    np.testing.assert_allclose(idcft(dcft(x, 7)), x, atol=1e-10)


def test_inverse_of_impulse_is_unit_chirp():
    N, beta = 64, 5
    X = np.zeros(N, dtype=complex)
    X[0] = 1
    x = idcft(ChirpSpectrum(coefficients=X, chirp_rate=beta, length=N))
    n = np.arange(N)
    np.testing.assert_allclose(x, np.exp(-1j * np.pi * beta * n * n / N) / math.sqrt(N),
                               atol=1e-12)
    assert np.vdot(x, x).real == pytest.approx(1.0)
    # at beta = u the chirp is the seed-u sequence itself
    np.testing.assert_allclose(x * math.sqrt(N), generate_zc(beta, N).samples, atol=1e-12)


def test_zero_spectrum():
    x = idcft(ChirpSpectrum(coefficients=np.zeros(32, complex), chirp_rate=3, length=32))
    assert not np.any(x)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 6), st.data())
def test_unitary_and_linear(p, data):
    N = 8 << p
    beta = data.draw(st.integers(0, N // 2 - 2))
    a = data.draw(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))
    x, y = random_signal(N, 1), random_signal(N, 2)
    X = dcft(x, beta).coefficients
    assert np.vdot(X, X).real == pytest.approx(np.vdot(x, x).real, rel=1e-12)
    np.testing.assert_allclose(dcft(a * x + y, beta).coefficients,
                               a * X + dcft(y, beta).coefficients, atol=1e-9 * (abs(a) + 1) * N)


def test_integer_doppler_shifts_impulse():
    N, u, l = 256, 5, 17
    n = np.arange(N)
    base = delayed_zc(generate_zc(u, N), l)
    for d in (1, -3):
        mag = np.abs(dcft(base * np.exp(2j * np.pi * d * n / N), u).coefficients)
        k = (u * l + d) % N
        assert mag[k] == pytest.approx(math.sqrt(N), abs=1e-9)
        assert np.delete(mag, k).max() < 1e-9


def test_fractional_doppler_peak_decays():
    N, u, l = 2048, 3, 100
    n = np.arange(N)
    base = delayed_zc(generate_zc(u, N), l)
    peaks = []
    for f in (0.0, 0.1, 0.2, 0.3, 0.5):
        mag = np.abs(dcft(base * np.exp(2j * np.pi * f * n / N), u).coefficients)
        peaks.append(mag.max())
        # Dirichlet kernel: |sin(pi f)| / (N sin(pi f / N)) -> sinc(f)
        assert mag[u * l % N] == pytest.approx(math.sqrt(N) * np.sinc(f), rel=1e-3)
    assert all(a > b for a, b in zip(peaks, peaks[1:]))


def test_rows_transformed_independently():
    x = np.stack([random_signal(32, s) for s in range(3)])
    X = dcft(x, 3).coefficients
    for row, xr in zip(X, x):
        np.testing.assert_allclose(row, dcft(xr, 3).coefficients, atol=1e-12)


@pytest.mark.parametrize("beta", [-1, 31, 2.5])
def test_rejects_bad_rate(beta):
    with pytest.raises(ValueError):
        dcft(np.ones(64), beta)


def test_rejects_bad_length():
    with pytest.raises(ValueError):
        dcft(np.ones(48), 1)
