"""Quick invariant checks run by ``zcradar selftest``."""

from math import gcd, sqrt

import numpy as np

from .canceller import cancel_one
from .dcft import dcft, idcft, matched_peak_bin
from .rdmap import range_doppler_map
from .scene import Echo, render_echoes
from .zcseq import delayed_zc, generate_zc, periodic_correlation


def _pacf():
    for N in (8, 64, 256, 2048):
        for u in range(1, N // 2 - 1, 2):
            c = periodic_correlation(generate_zc(u, N).samples, generate_zc(u, N).samples)
            if abs(c[0] - N) > 1e-9 * N or np.abs(c[1:]).max() > 1e-9 * N:
                return False
    return True


def _pccf():
    N = 256
    seqs = {u: generate_zc(u, N).samples for u in range(1, N // 2 - 1, 2)}
    for a in seqs:
        for b in seqs:
            if a != b:
                peak = np.abs(periodic_correlation(seqs[a], seqs[b])).max()
                if abs(peak - sqrt(gcd(N, a - b) * N)) > 1e-6:
                    return False
    return True


def _impulse():
    rng = np.random.default_rng(1)
    N = 2048
    for _ in range(20):
        u = int(rng.choice(np.arange(1, N // 2 - 1, 2)))
        l = int(rng.integers(N))
        mag = np.abs(dcft(delayed_zc(generate_zc(u, N), l), u).coefficients)
        k = matched_peak_bin(u, l, N)
        if abs(mag[k] - sqrt(N)) > 1e-6 or np.delete(mag, k).max() > 1e-6:
            return False
    return True


def _roundtrip():
    rng = np.random.default_rng(2)
    for N in (8, 64, 512):
        x = rng.standard_normal(N) + 1j * rng.standard_normal(N)
        for beta in range(N // 2 - 1):
            X = dcft(x, beta)
            if np.abs(idcft(X) - x).max() > 1e-9 * np.linalg.norm(x):
                return False
            if abs(np.vdot(X.coefficients, X.coefficients).real / np.vdot(x, x).real - 1) > 1e-9:
                return False
    return True


def _rdmap_oracle():
    rng = np.random.default_rng(3)
    N, eta = 64, 4
    s = generate_zc(5, N).samples
    r = rng.standard_normal(eta * N) + 1j * rng.standard_normal(eta * N)
    fast = range_doppler_map(r, s, eta).cells
    n = np.arange(eta * N)
    slow = np.empty_like(fast)
    for l in range(N):
        ref = np.conj(s[(n - l) % N])
        for k in range(eta):
            d = (k + eta // 2) % eta - eta // 2
            slow[l, k] = np.sum(r * ref * np.exp(-2j * np.pi * d * n / (eta * N)))
    return np.abs(fast - slow).max() <= 1e-8 * np.abs(slow).max()


def _cancel():
    N, eta = 2048, 8
    xi = 1.3 / (eta * N)
    e = Echo(0, 0, 321, xi, 0.7 - 0.2j)
    x = render_echoes([e], [generate_zc(3, N).samples], eta)
    out = cancel_one(x, 3, 321, xi, N)
    return np.vdot(out, out).real <= 1e-9 * np.vdot(x, x).real


CHECKS = [
    ("ideal periodic autocorrelation", _pacf),
    ("cross-correlation peak sqrt(gcd(N, a-b) N)", _pccf),
    ("matched DCFT impulse", _impulse),
    ("DCFT round trip and energy", _roundtrip),
    ("range-Doppler map vs direct sum", _rdmap_oracle),
    ("Doppler-compensated cancellation", _cancel),
]


def run_all(verbose=True):
    ok = True
    for name, fn in CHECKS:
        passed = bool(fn())
        ok &= passed
        if verbose:
            print(f"{'PASS' if passed else 'FAIL'}  {name}")
    return ok
