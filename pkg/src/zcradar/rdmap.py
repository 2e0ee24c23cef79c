"""
Range-Doppler maps over a coherent interval and threshold detection.

``cells[l, d]`` is the correlation of the full ``eta * N``-sample record
against the reference sequence delayed by ``l`` and frequency-shifted by
the Doppler hypothesis ``d / (eta * N)`` cycles/sample. Doppler columns are
stored in FFT order: column ``k`` holds signed bin ``k`` for ``k < eta/2``
and ``k - eta`` otherwise.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import maximum_filter

from .zcseq import ZcSequence

GUARD_DELAY = 2
GUARD_DOPPLER = 1
# Dynamic-range limit of the double-precision FFT path, relative to the map peak.
NUMERICAL_FLOOR = 1e-9


@dataclass
class RangeDopplerMap:
    cells: np.ndarray = field(repr=False)
    tx_index: int
    n: int
    eta: int
    noise_floor: float = 0.0

    @property
    def doppler_bin_width(self):
        return 1.0 / (self.eta * self.n)

    @property
    def magnitude(self):
        return np.abs(self.cells)

    def signed_doppler(self, k):
        return signed_bin(k, self.eta)


@dataclass(frozen=True)
class Detection:
    tx_index: int
    delay_bin: int
    doppler_bin: int
    amplitude_estimate: complex
    peak_magnitude: float


def signed_bin(k, eta):
    """Map an FFT-ordered Doppler column to its signed bin in ``[-eta//2, eta - eta//2)``."""
    return (int(k) + eta // 2) % eta - eta // 2


def _reference(s):
    return s.samples if isinstance(s, ZcSequence) else np.asarray(s, dtype=complex)


def range_doppler_map(r, s, eta, tx_index=0):
    """
    Delay x Doppler correlation map of ``r`` against reference ``s``.

    Parameters
    ----------
    r : array of complex, length ``eta * N``
    s : ZcSequence or array of complex, length N
    eta : int
        Pulses (periods of ``s``) in the coherent interval.

    Returns
    -------
    RangeDopplerMap with an ``N x eta`` cell matrix and its noise floor.

    Notes
    -----
    The sum over ``n = p*N + m`` factors into a slow-time DFT over ``p``,
    a residual intra-period phase ramp ``exp(-2j*pi*d*m/(eta*N))`` and an
    N-point periodic correlation over ``m``. Keeping the ramp makes the fast
    path equal to the direct double sum.
    """
    ref = _reference(s)
    N = ref.size
    r = np.asarray(r, dtype=complex)
    if r.size != eta * N:
        raise ValueError(f"record length {r.size} != eta*N = {eta * N}")
    slow = np.fft.fft(r.reshape(eta, N), axis=0)
    d = np.array([signed_bin(k, eta) for k in range(eta)])
    m = np.arange(N)
    slow *= np.exp(-2j * np.pi * np.outer(d, m) / (eta * N))
    cells = np.fft.ifft(np.fft.fft(slow, axis=1) * np.conj(np.fft.fft(ref)), axis=1).T
    rd = RangeDopplerMap(cells=cells, tx_index=tx_index, n=N, eta=eta)
    rd.noise_floor = estimate_noise_floor(cells)
    return rd


def estimate_noise_floor(cells):
    """
    RMS noise level from the median cell magnitude.

    For complex Gaussian noise the magnitudes are Rayleigh and
    ``median = rms * sqrt(ln 2)``.
    """
    mag = np.abs(cells)
    floor = float(np.median(mag)) / math.sqrt(math.log(2))
    return max(floor, NUMERICAL_FLOOR * float(mag.max(initial=0.0)), np.finfo(float).tiny)


def threshold(rd, pfa):
    """Cell-magnitude threshold giving a per-cell false-alarm probability ``pfa`` in noise."""
    return rd.noise_floor * math.sqrt(-math.log(pfa))


def detect(rd, pfa, floor=0.0):
    """
    Peaks of ``rd`` above the noise threshold, strongest first.

    A cell is a candidate if it exceeds ``threshold(rd, pfa) + floor`` and
    is a maximum of its 3x3 neighbourhood (both axes cyclic). Candidates
    are accepted greedily in descending magnitude; each accepted peak
    suppresses others within +-2 delay bins and +-1 Doppler bin.

    ``floor`` is a deterministic interference level, e.g. cross-correlation
    sidelobes of stronger echoes. It is added to the noise threshold rather
    than compared with it: a cell holding interference of magnitude at most
    ``floor`` plus noise exceeds the sum only if the noise alone exceeds the
    noise threshold, so the per-cell false-alarm rate stays at most ``pfa``.
    """
    if not 0 < pfa < 1:
        raise ValueError(f"pfa must be in (0, 1), got {pfa}")
    mag = rd.magnitude
    T = threshold(rd, pfa) + floor
    peaks = (mag >= maximum_filter(mag, size=3, mode="wrap")) & (mag > T)
    ls, ds = np.nonzero(peaks)
    order = np.argsort(-mag[ls, ds], kind="stable")
    blocked = np.zeros(mag.shape, dtype=bool)
    dl = np.arange(-GUARD_DELAY, GUARD_DELAY + 1)
    dd = np.arange(-GUARD_DOPPLER, GUARD_DOPPLER + 1)
    accepted = []
    for idx in order:
        l, d = int(ls[idx]), int(ds[idx])
        if blocked[l, d]:
            continue
        blocked[np.ix_((l + dl) % rd.n, (d + dd) % rd.eta)] = True
        accepted.append(Detection(
            tx_index=rd.tx_index, delay_bin=l, doppler_bin=d,
            amplitude_estimate=complex(rd.cells[l, d]) / (rd.n * rd.eta),
            peak_magnitude=float(mag[l, d])))
    return accepted


def _geometric_gain(delta, length):
    """``sum_{n < length} exp(2j*pi*delta*n/length)`` for a tone ``delta`` bins off a column."""
    z = np.exp(2j * np.pi * delta / length)
    if abs(z - 1) < 1e-14:
        return complex(length)
    return complex((np.exp(2j * np.pi * delta) - 1) / (z - 1))


def estimate_params(rd, det):
    """
    Delay, Doppler (cycles/sample) and complex amplitude of a detection.

    At the echo's delay every Doppler column holds a geometric sum
    ``alpha * sum_n exp(2j*pi*delta_k*n/L)`` with ``L = eta*N`` and
    ``delta_k`` the echo's offset from column ``k``. Its reciprocal is affine
    in ``exp(2j*pi*delta_k/L)``, so the peak column and its larger neighbour
    fix the offset and amplitude in closed form. The offset is clipped to
    half a bin.
    """
    l, k = det.delay_bin, det.doppler_bin
    L = rd.eta * rd.n
    row = rd.cells[l]
    c = complex(row[k])
    offset = 0.0
    if rd.eta >= 2 and c != 0:
        up, down = row[(k + 1) % rd.eta], row[(k - 1) % rd.eta]
        step, nb = (1, up) if abs(up) >= abs(down) else (-1, down)
        if abs(nb) > 1e-12 * abs(c):
            ratio = (1 / c) / (1 / c - 1 / nb)
            w = 1 / (1 - ratio * (1 - np.exp(-2j * np.pi * step / L)))
            offset = float(np.clip(np.angle(w) * L / (2 * np.pi), -0.5, 0.5))
    xi_hat = (signed_bin(k, rd.eta) + offset) / L
    alpha_hat = c / _geometric_gain(offset, L)
    return l, xi_hat, alpha_hat
