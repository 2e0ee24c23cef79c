"""
Zadoff-Chu sequence generation and periodic correlation.

Only even, power-of-two lengths are supported. Phases are computed from the
integer exponent ``u * n**2 mod 2N`` so that large lengths do not lose
precision in the angle reduction.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from math import gcd, sqrt

import numpy as np


class InvalidSeedError(ValueError):
    pass


class InvalidLengthError(ValueError):
    pass


def check_length(N):
    """Raise unless N is a power of two no smaller than 8."""
    if int(N) != N or N < 8 or (int(N) & (int(N) - 1)) != 0:
        raise InvalidLengthError(f"length must be a power of 2 >= 8, got {N}")
    return int(N)


def check_seed(u, N):
    """Raise unless u is an odd seed in {1, ..., N/2 - 2}."""
    N = check_length(N)
    if int(u) != u:
        raise InvalidSeedError(f"seed must be an integer, got {u}")
    u = int(u)
    if gcd(u, N) != 1:
        raise InvalidSeedError(f"seed {u} is not relatively prime to {N}")
    if not 1 <= u <= N // 2 - 2:
        raise InvalidSeedError(f"seed {u} outside 1..{N // 2 - 2}")
    return u


@lru_cache(maxsize=256)
def quadratic_phase(rate, N, sign=-1):
    """
    Unit-modulus chirp ``exp(sign * i*pi*rate*n**2/N)`` for n = 0..N-1.

    The exponent is reduced modulo 2N in integer arithmetic before it is
    turned into an angle, so every phase is an exact multiple of pi/N.
    """
    n = np.arange(N, dtype=np.int64)
    k = (int(rate) * ((n * n) % (2 * N))) % (2 * N)
    out = np.exp(sign * 1j * np.pi * k / N)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class ZcSequence:
    seed: int
    length: int
    samples: np.ndarray = field(repr=False, compare=False)

    def samples_at(self, n):
        """Sample value(s) at arbitrary integer index, using period N."""
        return self.samples[np.mod(n, self.length)]

    def __len__(self):
        return self.length


def generate_zc(u, N):
    """
    Seed-``u`` Zadoff-Chu sequence of even length ``N``.

    ``samples[n] = exp(-i*pi*u*n**2/N)``.

    Parameters
    ----------
    u : int
        Odd seed in ``1 .. N/2 - 2``.
    N : int
        Power-of-two length, ``N >= 8``.
    """
    N = check_length(N)
    u = check_seed(u, N)
    samples = quadratic_phase(u, N, sign=-1)
    return ZcSequence(seed=u, length=N, samples=samples)


def delayed_zc(seq, l):
    """Return ``z[n - l]`` for n = 0..N-1 (a cyclic rotation by ``l``)."""
    return np.roll(seq.samples, int(l) % seq.length)


def periodic_correlation(x, y):
    """
    Periodic correlation ``c[l] = sum_n x[n] * conj(y[(n - l) mod N])``.

    Computed as ``ifft(fft(x) * conj(fft(y)))``. Works along the last axis,
    so stacks of sequences can be correlated in one call.
    """
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape[-1] != y.shape[-1]:
        raise ValueError(f"length mismatch: {x.shape[-1]} vs {y.shape[-1]}")
    return np.fft.ifft(np.fft.fft(x) * np.conj(np.fft.fft(y)))


def pccf_peak_bound(N, a, b):
    """Peak periodic cross-correlation magnitude ``sqrt(gcd(N, a-b) * N)``."""
    N = check_length(N)
    check_seed(a, N)
    check_seed(b, N)
    if a == b:
        raise ValueError("identical seeds: use the autocorrelation peak N")
    return sqrt(gcd(N, a - b) * N)


def default_seeds(M, N):
    """The first ``M`` odd integers, ``[1, 3, ..., 2M-1]``."""
    N = check_length(N)
    if M < 1:
        raise ValueError("need at least one transmitter")
    if 2 * M - 1 > N // 2 - 2:
        raise InvalidSeedError(
            f"{M} seeds do not fit: largest would be {2 * M - 1} > {N // 2 - 2}")
    return [2 * i - 1 for i in range(1, M + 1)]
