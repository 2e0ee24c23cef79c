"""
N-point discrete chirp-Fourier transform (DCFT) and its inverse.

Both directions carry a 1/sqrt(N) factor, so the transform is unitary for
every chirp rate. The forward transform is the DFT of the de-chirped input
``x[n] * W**(-beta*n**2/2)`` with ``W = exp(-2j*pi/N)``.
"""

from dataclasses import dataclass, field

import numpy as np

from .zcseq import check_length, quadratic_phase


@dataclass(frozen=True)
class ChirpSpectrum:
    coefficients: np.ndarray = field(repr=False, compare=False)
    chirp_rate: int
    length: int


def check_rate(beta, N):
    if int(beta) != beta or not 0 <= beta <= N // 2 - 2:
        raise ValueError(f"chirp rate must be an integer in 0..{N // 2 - 2}, got {beta}")
    return int(beta)


def dechirp(beta, N):
    """``W**(-beta*n**2/2) = exp(+i*pi*beta*n**2/N)`` with exact phase reduction."""
    return quadratic_phase(beta, N, sign=+1)


def dcft(x, beta):
    """
    Forward DCFT of ``x`` at integer chirp rate ``beta``.

    ``x`` may be 2-D; each row is then transformed independently and the
    returned spectrum holds one row of coefficients per input row.
    """
    x = np.asarray(x, dtype=complex)
    N = check_length(x.shape[-1])
    beta = check_rate(beta, N)
    X = np.fft.fft(x * dechirp(beta, N)) / np.sqrt(N)
    return ChirpSpectrum(coefficients=X, chirp_rate=beta, length=N)


def idcft(X):
    """Inverse DCFT; ``idcft(dcft(x, b)) == x`` up to rounding."""
    N = X.length
    coeffs = np.asarray(X.coefficients, dtype=complex)
    return np.fft.ifft(coeffs) * np.sqrt(N) * np.conj(dechirp(X.chirp_rate, N))


def matched_peak_bin(u, l, N):
    """Bin where a seed-``u`` ZC sequence delayed by ``l`` peaks when beta = u."""
    return (int(u) * int(l)) % int(N)
