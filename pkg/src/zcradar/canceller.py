"""
Multi-target detectors for a single receiver.

``sc_dcft`` detects echoes transmitter by transmitter and removes each one
by nulling its impulse in the DCFT domain after Doppler de-rotation,
repeating until a full pass finds nothing new. ``sc_time`` follows the
same control flow but subtracts a reconstructed echo in the time domain.
``raw_detect`` is a single pass with no cancellation.

All three share one detection rule: a map is thresholded at the noise
threshold plus a cross-talk floor. The floor bounds the cross-correlation
sidelobes leaking in from the other transmitters' strongest echoes, using
the ZC cross-correlation peak ``sqrt(gcd(N, u_i - u_j) * N)``, so sidelobes
are not reported as targets.
"""

import logging
from dataclasses import dataclass, field
from math import gcd, sqrt

import numpy as np

from .dcft import dcft, idcft, matched_peak_bin, ChirpSpectrum
from .rdmap import NUMERICAL_FLOOR, detect, estimate_params, range_doppler_map
from .scene import ReceivedSignal
from .zcseq import generate_zc

log = logging.getLogger(__name__)

DEFAULT_MAX_PASSES = 8
DEFAULT_CROSSTALK_MARGIN = 2.0
# sc_dcft nulls the matched bins of delays l-1..l+1: the same neighbourhood
# that marks a later detection as a duplicate, so band-limited mainlobe
# spill into l+-1 is removed instead of being left behind unrecorded.
DEFAULT_NULL_WIDTH = 3


@dataclass(frozen=True)
class CancellationRecord:
    tx_index: int
    delay_bin: int
    doppler_bin: int
    doppler_xi: float
    nulled_bin: int
    pass_index: int


@dataclass
class DetectionReport:
    detections: list = field(default_factory=list)
    estimates: list = field(default_factory=list)
    residual: np.ndarray = field(default=None, repr=False)
    records: list = field(default_factory=list)

    def rows(self):
        """One tuple per detection, in the CLI output column order."""
        for (p, det), (_, xi, alpha) in zip(self.detections, self.estimates):
            yield (p, det.tx_index, det.delay_bin, det.doppler_bin, xi,
                   alpha.real, alpha.imag, det.peak_magnitude)


def cancel_one(residual, u, l_hat, xi_hat, n, null_width=1):
    """
    Remove a seed-``u`` echo at delay ``l_hat`` and Doppler ``xi_hat``.

    The record is de-rotated by ``xi_hat``, cut into N-sample periods, and
    each period's DCFT at chirp rate ``u`` has bin ``(u * l_hat) mod N`` set
    to zero before the inverse transform and re-rotation. A ``null_width``
    of ``w`` also zeroes the matched bins of the ``w // 2`` neighbouring
    delays either side, ``(u * (l_hat + j)) mod N``.
    """
    residual = np.asarray(residual, dtype=complex)
    N = int(n)
    eta = residual.size // N
    if eta * N != residual.size:
        raise ValueError("record length is not a multiple of the period")
    rot = _rotation(xi_hat, N, eta)
    spec = dcft(residual.reshape(eta, N) * rot, u)
    coeffs = spec.coefficients.copy()
    half = max(int(null_width), 1) // 2
    coeffs[:, [matched_peak_bin(u, l_hat + j, N) for j in range(-half, half + 1)]] = 0
    out = idcft(ChirpSpectrum(coefficients=coeffs, chirp_rate=u, length=N))
    return (out * np.conj(rot)).reshape(-1)


def _rotation(xi, N, eta):
    """``exp(-2j*pi*xi*n)`` for n = p*N + m, shaped (eta, N)."""
    per_period = np.exp(-2j * np.pi * ((xi * N * np.arange(eta)) % 1.0))
    within = np.exp(-2j * np.pi * xi * np.arange(N))
    return np.outer(per_period, within)


def subtract_echo(residual, s, l_hat, xi_hat, alpha_hat):
    """Time-domain cancellation of ``alpha * s[n - l] * exp(2j*pi*xi*n)``."""
    residual = np.asarray(residual, dtype=complex)
    N = len(s)
    eta = residual.size // N
    replica = np.tile(np.roll(s, int(l_hat) % N), eta)
    return residual - alpha_hat * replica * np.exp(2j * np.pi * xi_hat * np.arange(residual.size))


def crosstalk_floors(maps, seeds, n, margin=DEFAULT_CROSSTALK_MARGIN):
    """
    Per-transmitter threshold floor from the other maps' peaks.

    A seed-``u_j`` echo with correlation peak ``P_j`` in its own map leaks
    at most ``P_j * sqrt(gcd(N, u_i - u_j) * N) / N`` into map ``i``.
    """
    peaks = [float(np.abs(m.cells).max(initial=0.0)) for m in maps]
    floors = []
    for i, ui in enumerate(seeds):
        leak = sum(peaks[j] * sqrt(gcd(n, ui - uj) * n) / n
                   for j, uj in enumerate(seeds) if j != i)
        floors.append(margin * leak)
    return floors


def _mark_known(known, delay, doppler):
    """Flag the +-1 bin neighbourhood of a recorded cell on one transmitter's grid."""
    n, eta = known.shape
    known[np.ix_([(delay + j) % n for j in (-1, 0, 1)],
                 [(doppler + j) % eta for j in (-1, 0, 1)])] = True


def _samples(received):
    if isinstance(received, ReceivedSignal):
        return received.samples
    return np.asarray(received, dtype=complex)


def _references(scenario):
    return [generate_zc(u, scenario.n) for u in scenario.seeds]


def _all_maps(residual, refs, eta):
    return [range_doppler_map(residual, s, eta, tx_index=i) for i, s in enumerate(refs)]


def _peak(maps):
    return max(float(np.abs(m.cells).max(initial=0.0)) for m in maps)


def _successive(received, scenario, pfa, max_passes, cancel, crosstalk_margin):
    if max_passes < 1:
        raise ValueError("max_passes must be >= 1")
    refs = _references(scenario)
    N, eta = scenario.n, scenario.eta
    residual = _samples(received).copy()
    report = DetectionReport()
    known = np.zeros((len(refs), N, eta), dtype=bool)
    # Round-off left by a cancellation scales with the input, not with what remains.
    dust = NUMERICAL_FLOOR * _peak(_all_maps(residual, refs, eta))
    for p in range(max_passes):
        new = 0
        for i, ref in enumerate(refs):
            maps = _all_maps(residual, refs, eta)
            floor = crosstalk_floors(maps, scenario.seeds, N, crosstalk_margin)[i] + dust
            rd = maps[i]
            for det in detect(rd, pfa, floor=floor):
                if known[i, det.delay_bin, det.doppler_bin]:
                    continue
                _mark_known(known[i], det.delay_bin, det.doppler_bin)
                est = estimate_params(rd, det)
                l_hat, xi_hat, alpha_hat = est
                residual = cancel(residual, ref, l_hat, xi_hat, alpha_hat)
                log.debug("pass %d tx %d: cancelled (%d, %d)", p, i, det.delay_bin,
                          det.doppler_bin)
                report.detections.append((p, det))
                report.estimates.append(est)
                report.records.append(CancellationRecord(
                    tx_index=i, delay_bin=det.delay_bin, doppler_bin=det.doppler_bin,
                    doppler_xi=xi_hat, nulled_bin=matched_peak_bin(ref.seed, l_hat, N),
                    pass_index=p))
                new += 1
        if new == 0:
            break
    report.residual = residual
    return report


def sc_dcft(received, scenario, receiver_index=0, pfa=1e-4, max_passes=DEFAULT_MAX_PASSES,
            null_width=DEFAULT_NULL_WIDTH, crosstalk_margin=DEFAULT_CROSSTALK_MARGIN):
    """
    Successive cancellation in the DCFT domain.

    Parameters
    ----------
    received : ReceivedSignal or array of complex, length ``eta * n``
    scenario : Scenario
        Supplies the transmitter seeds, ``n`` and ``eta``.
    receiver_index : int
        Kept for symmetry with the harness; detection uses only ``received``.
    pfa : float
        Per-cell false-alarm probability for the noise threshold.
    max_passes : int
        Cap on outer passes over all transmitters.
    null_width : int
        Delays nulled per cancellation, centred on the detected one. Use 1
        for the matched bin alone.
    """
    N = scenario.n

    def cancel(residual, ref, l_hat, xi_hat, alpha_hat):
        return cancel_one(residual, ref.seed, l_hat, xi_hat, N, null_width)

    return _successive(received, scenario, pfa, max_passes, cancel, crosstalk_margin)


def sc_time(received, scenario, receiver_index=0, pfa=1e-4, max_passes=DEFAULT_MAX_PASSES,
            crosstalk_margin=DEFAULT_CROSSTALK_MARGIN):
    """Successive cancellation by subtracting reconstructed echoes in time."""

    def cancel(residual, ref, l_hat, xi_hat, alpha_hat):
        return subtract_echo(residual, ref.samples, l_hat, xi_hat, alpha_hat)

    return _successive(received, scenario, pfa, max_passes, cancel, crosstalk_margin)


def raw_detect(received, scenario, receiver_index=0, pfa=1e-4,
               crosstalk_margin=DEFAULT_CROSSTALK_MARGIN):
    """One map and one detection pass per transmitter, no cancellation."""
    refs = _references(scenario)
    r = _samples(received)
    maps = _all_maps(r, refs, scenario.eta)
    floors = crosstalk_floors(maps, scenario.seeds, scenario.n, crosstalk_margin)
    report = DetectionReport(residual=r.copy())
    for rd, floor in zip(maps, floors):
        for det in detect(rd, pfa, floor=floor):
            report.detections.append((0, det))
            report.estimates.append(estimate_params(rd, det))
    return report


METHODS = {"raw": raw_detect, "sc_time": sc_time, "sc_dcft": sc_dcft}


def run_method(method, received, scenario, receiver_index=0, pfa=1e-4,
               max_passes=DEFAULT_MAX_PASSES):
    method = method.replace("-", "_")
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {sorted(METHODS)}")
    if method == "raw":
        return raw_detect(received, scenario, receiver_index, pfa)
    return METHODS[method](received, scenario, receiver_index, pfa, max_passes)
