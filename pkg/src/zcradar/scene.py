"""
Multistatic scene description and received-signal synthesis.

A scenario places transmitters, receivers and point targets in 3-D space.
Each (transmitter, target) pair seen by a receiver yields one echo with an
integer sample delay, a normalized Doppler shift in cycles/sample and a
complex amplitude from the bistatic radar equation. The received baseband
signal over ``eta`` CW periods is the sum of the echoes plus white circular
Gaussian noise scaled to a composite SNR.
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .zcseq import check_length, check_seed, generate_zc

SPEED_OF_LIGHT = 299_792_458.0

DEFAULT_CARRIER_HZ = 500e6
DEFAULT_BANDWIDTH_HZ = 20e6
DEFAULT_N = 2048
DEFAULT_ETA = 8
DEFAULT_POWER_W = 500.0


class GeometryError(ValueError):
    pass


@dataclass
class Transmitter:
    position: np.ndarray
    seed: int
    power_w: float = DEFAULT_POWER_W


@dataclass
class Receiver:
    position: np.ndarray


@dataclass
class Target:
    position: np.ndarray
    velocity: np.ndarray
    rcs_m2: float = 1.0


@dataclass
class Scenario:
    transmitters: list
    receivers: list
    targets: list
    carrier_hz: float = DEFAULT_CARRIER_HZ
    bandwidth_hz: float = DEFAULT_BANDWIDTH_HZ
    n: int = DEFAULT_N
    eta: int = DEFAULT_ETA
    band_limit_fraction: float = None

    def __post_init__(self):
        self.n = check_length(self.n)
        if self.eta < 1:
            raise ValueError("eta must be >= 1")
        if not self.transmitters:
            raise ValueError("need at least one transmitter")
        if not self.receivers:
            raise ValueError("need at least one receiver")
        seeds = [check_seed(tx.seed, self.n) for tx in self.transmitters]
        if len(set(seeds)) != len(seeds):
            raise ValueError(f"transmitter seeds must be distinct, got {seeds}")
        for tx in self.transmitters:
            if tx.power_w <= 0:
                raise ValueError("transmit power must be positive")
        for tgt in self.targets:
            if tgt.rcs_m2 <= 0:
                raise ValueError("target RCS must be positive")
        if self.band_limit_fraction is not None:
            _check_fraction(self.band_limit_fraction)

    @property
    def seeds(self):
        return [tx.seed for tx in self.transmitters]

    @property
    def wavelength(self):
        return SPEED_OF_LIGHT / self.carrier_hz

    def waveforms(self):
        """Transmit sequences, band-limited when the scenario asks for it."""
        out = []
        for tx in self.transmitters:
            s = generate_zc(tx.seed, self.n).samples
            if self.band_limit_fraction is not None:
                s = band_limit(s, self.band_limit_fraction)
            out.append(s)
        return out

    @classmethod
    def from_dict(cls, d):
        txs = [Transmitter(position=_vec(t["position"]), seed=int(t["seed"]),
                           power_w=float(t.get("power_w", DEFAULT_POWER_W)))
               for t in d["transmitters"]]
        rxs = [Receiver(position=_vec(r["position"])) for r in d["receivers"]]
        tgts = [Target(position=_vec(t["position"]),
                       velocity=_vec(t.get("velocity", [0.0, 0.0, 0.0])),
                       rcs_m2=float(t.get("rcs_m2", 1.0)))
                for t in d.get("targets", [])]
        return cls(
            transmitters=txs, receivers=rxs, targets=tgts,
            carrier_hz=float(d.get("carrier_hz", DEFAULT_CARRIER_HZ)),
            bandwidth_hz=float(d.get("bandwidth_hz", DEFAULT_BANDWIDTH_HZ)),
            n=int(d.get("n", DEFAULT_N)),
            eta=int(d.get("eta", DEFAULT_ETA)),
            band_limit_fraction=d.get("band_limit_fraction"),
        )

    def to_dict(self):
        d = {
            "carrier_hz": self.carrier_hz,
            "bandwidth_hz": self.bandwidth_hz,
            "n": self.n,
            "eta": self.eta,
            "transmitters": [{"position": tx.position.tolist(), "power_w": tx.power_w,
                              "seed": tx.seed} for tx in self.transmitters],
            "receivers": [{"position": rx.position.tolist()} for rx in self.receivers],
            "targets": [{"position": t.position.tolist(), "velocity": t.velocity.tolist(),
                         "rcs_m2": t.rcs_m2} for t in self.targets],
        }
        if self.band_limit_fraction is not None:
            d["band_limit_fraction"] = self.band_limit_fraction
        return d


def load_scenario(path):
    """Load a scenario JSON file. Bare names like ``case1`` resolve to shipped files."""
    p = Path(path)
    if not p.exists():
        shipped = Path(__file__).parent / "scenarios" / f"{p.stem}.json"
        if p.parent == Path(".") and shipped.exists():
            p = shipped
    with open(p) as fh:
        return Scenario.from_dict(json.load(fh))


def _vec(v):
    a = np.asarray(v, dtype=float)
    if a.shape != (3,) or not np.all(np.isfinite(a)):
        raise GeometryError(f"expected a finite 3-vector, got {v!r}")
    return a


def _ranges(tx_pos, tgt_pos, rx_pos):
    r_t = float(np.linalg.norm(np.subtract(tgt_pos, tx_pos)))
    r_r = float(np.linalg.norm(np.subtract(rx_pos, tgt_pos)))
    if r_t == 0.0 or r_r == 0.0:
        raise GeometryError("target coincides with a transmitter or receiver")
    return r_t, r_r


def bistatic_delay_samples(tx_pos, tgt_pos, rx_pos, fs):
    """Bistatic path length in samples, rounded to the nearest integer (not folded)."""
    if fs <= 0:
        raise ValueError("sample rate must be positive")
    r_t, r_r = _ranges(tx_pos, tgt_pos, rx_pos)
    return int(round((r_t + r_r) / SPEED_OF_LIGHT * fs))


def normalized_doppler(tx_pos, tgt_pos, tgt_vel, rx_pos, carrier_hz, fs):
    """
    Doppler shift in cycles/sample, ``-(d/dt bistatic range) / lambda / fs``.

    Positive when the target closes on the transmitter/receiver pair.
    """
    _ranges(tx_pos, tgt_pos, rx_pos)
    tgt_pos = np.asarray(tgt_pos, dtype=float)
    v = np.asarray(tgt_vel, dtype=float)
    u_t = tgt_pos - tx_pos
    u_r = tgt_pos - rx_pos
    rdot = v @ u_t / np.linalg.norm(u_t) + v @ u_r / np.linalg.norm(u_r)
    wavelength = SPEED_OF_LIGHT / carrier_hz
    return float(-rdot / wavelength / fs)


def reflection_amplitude(tx_pos, tgt_pos, rx_pos, carrier_hz, power_w=DEFAULT_POWER_W, rcs_m2=1.0):
    """
    Complex echo amplitude from the bistatic radar equation with unit gains.

    ``|a|**2 = P * lambda**2 * sigma / ((4 pi)**3 * Rt**2 * Rr**2)`` and the
    phase is the carrier phase accumulated over the path.
    """
    r_t, r_r = _ranges(tx_pos, tgt_pos, rx_pos)
    wavelength = SPEED_OF_LIGHT / carrier_hz
    mag = math.sqrt(power_w * wavelength ** 2 * rcs_m2 / ((4 * math.pi) ** 3 * r_t ** 2 * r_r ** 2))
    phase = math.fmod(-2 * math.pi * (r_t + r_r) / wavelength, 2 * math.pi)
    return mag * complex(math.cos(phase), math.sin(phase))


@dataclass(frozen=True)
class Echo:
    tx_index: int
    target_index: int
    delay_samples: int
    normalized_doppler: float
    amplitude: complex

    def doppler_bin(self, n, eta):
        """Nearest slow-time Doppler bin in ``[0, eta)``."""
        return int(round(self.normalized_doppler * n * eta)) % eta


def scene_echoes(scenario, receiver_index):
    """All (transmitter, target) echoes seen at one receiver."""
    rx = scenario.receivers[receiver_index].position
    fs = scenario.bandwidth_hz
    out = []
    for q, tgt in enumerate(scenario.targets):
        for i, tx in enumerate(scenario.transmitters):
            l = bistatic_delay_samples(tx.position, tgt.position, rx, fs) % scenario.n
            xi = normalized_doppler(tx.position, tgt.position, tgt.velocity, rx,
                                    scenario.carrier_hz, fs)
            if abs(xi) >= 0.5:
                raise GeometryError(f"target {q} Doppler {xi} exceeds half the sample rate")
            a = reflection_amplitude(tx.position, tgt.position, rx, scenario.carrier_hz,
                                     tx.power_w, tgt.rcs_m2)
            out.append(Echo(i, q, l, xi, a))
    return out


@dataclass
class ReceivedSignal:
    samples: np.ndarray = field(repr=False)
    clean: np.ndarray = field(repr=False)
    noise_power: float
    echoes: list = field(default_factory=list, repr=False)


def render_echoes(echoes, waveforms, eta):
    """Noiseless sum of echoes over ``eta`` periods of the transmit waveforms."""
    N = len(waveforms[0])
    n = np.arange(eta * N)
    out = np.zeros(eta * N, dtype=complex)
    for e in echoes:
        s = np.tile(np.roll(waveforms[e.tx_index], e.delay_samples % N), eta)
        out += e.amplitude * s * np.exp(2j * np.pi * e.normalized_doppler * n)
    return out


def synthesize_received(scenario, receiver_index, snr_db=None, rng_seed=None, noise_power=None,
                        echoes=None):
    """
    Received baseband samples at one receiver over ``eta * n`` samples.

    Parameters
    ----------
    scenario : Scenario
    receiver_index : int
    snr_db : float or None
        Composite SNR (total clean power over noise power). ``None`` or
        ``inf`` means noiseless unless ``noise_power`` is given.
    rng_seed : int or None
        Seed for the noise generator.
    noise_power : float, optional
        Absolute noise power; overrides ``snr_db``.
    echoes : list of Echo, optional
        Use these instead of the geometry-derived echoes.
    """
    if echoes is None:
        echoes = scene_echoes(scenario, receiver_index)
    clean = render_echoes(echoes, scenario.waveforms(), scenario.eta)
    if noise_power is None:
        if snr_db is None or (math.isinf(snr_db) and snr_db > 0):
            noise_power = 0.0
        else:
            p_clean = float(np.mean(np.abs(clean) ** 2))
            if p_clean == 0.0:
                raise ValueError("composite SNR undefined for an empty scene; pass noise_power")
            noise_power = p_clean / 10 ** (snr_db / 10)
    noise = complex_noise(clean.size, noise_power, rng_seed)
    return ReceivedSignal(samples=clean + noise, clean=clean, noise_power=noise_power,
                          echoes=list(echoes))


def complex_noise(size, power, rng_seed=None):
    if power == 0:
        return np.zeros(size, dtype=complex)
    rng = np.random.default_rng(rng_seed)
    return np.sqrt(power / 2) * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def _check_fraction(fraction):
    if not 0 < fraction <= 1:
        raise ValueError(f"band-limit fraction must be in (0, 1], got {fraction}")


def band_limit(x, fraction):
    """
    Brick-wall low-pass: keep the ``round(fraction * len(x))`` DFT bins
    nearest DC and zero the rest.
    """
    _check_fraction(fraction)
    x = np.asarray(x, dtype=complex)
    N = x.shape[-1]
    keep = int(round(fraction * N))
    if keep >= N:
        return x.copy()
    # Order bins by |frequency|, positive before negative on ties.
    f = np.fft.fftfreq(N) * N
    order = np.lexsort((-f, np.abs(f)))
    mask = np.zeros(N, dtype=bool)
    mask[order[:keep]] = True
    return np.fft.ifft(np.fft.fft(x) * mask)
