"""
Monte-Carlo detection-rate experiments.

A trial synthesizes one coherent interval at a receiver, runs a detector and
scores every (target, transmitter) echo as hit or missed. A hit needs a
detection on that transmitter within one delay bin and one Doppler bin of
the echo's true cell (both axes cyclic). Sweeps repeat trials over a list of
composite SNRs and reduce hits to rates.
"""

import csv
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .canceller import DEFAULT_MAX_PASSES, run_method
from .scene import scene_echoes, synthesize_received

log = logging.getLogger(__name__)

METHOD_NAMES = ("raw", "sc_time", "sc_dcft")


@dataclass
class TrialResult:
    snr_db: float
    trial_index: int
    method: str
    hits: np.ndarray = field(repr=False)  # (K targets, M transmitters) bool


@dataclass
class DetectionRateTable:
    snr_grid: np.ndarray
    hit_counts: np.ndarray  # (S, K, M) int
    any_counts: np.ndarray  # (S, K) int
    all_counts: np.ndarray  # (S, K) int
    trials: int
    method: str = ""

    @property
    def rates(self):
        return self.hit_counts / self.trials

    @property
    def any_rates(self):
        return self.any_counts / self.trials

    @property
    def all_rates(self):
        return self.all_counts / self.trials


def _cyclic(a, b, period):
    d = abs(int(a) - int(b)) % period
    return min(d, period - d)


def score(report, echoes, n_targets, n_tx, n, eta):
    """Hit matrix of shape (targets, transmitters) for one detection report."""
    hits = np.zeros((n_targets, n_tx), dtype=bool)
    dets = [d for _, d in report.detections]
    for e in echoes:
        d_true = e.doppler_bin(n, eta)
        hits[e.target_index, e.tx_index] = any(
            d.tx_index == e.tx_index
            and _cyclic(d.delay_bin, e.delay_samples, n) <= 1
            and _cyclic(d.doppler_bin, d_true, eta) <= 1
            for d in dets)
    return hits


def run_trial(scenario, receiver_index, snr_db, method, rng_seed, pfa=1e-4,
              max_passes=DEFAULT_MAX_PASSES):
    """One synthesize-detect-score trial. ``snr_db=inf`` gives a noiseless trial."""
    echoes = scene_echoes(scenario, receiver_index)
    rx = synthesize_received(scenario, receiver_index, snr_db, rng_seed, echoes=echoes)
    report = run_method(method, rx, scenario, receiver_index, pfa, max_passes)
    hits = score(report, echoes, len(scenario.targets), len(scenario.transmitters),
                 scenario.n, scenario.eta)
    return TrialResult(snr_db=snr_db, trial_index=rng_seed, method=method.replace("-", "_"),
                       hits=hits)


def worker_count():
    env = os.environ.get("ZCRADAR_THREADS")
    n = os.cpu_count() or 1
    if env:
        n = min(n, max(1, int(env)))
    return n


def _run_block(args):
    scenario, receiver_index, snr_db, method, seeds, pfa, max_passes = args
    K, M = len(scenario.targets), len(scenario.transmitters)
    counts = np.zeros((K, M), dtype=np.int64)
    any_c = np.zeros(K, dtype=np.int64)
    all_c = np.zeros(K, dtype=np.int64)
    for s in seeds:
        h = run_trial(scenario, receiver_index, snr_db, method, s, pfa, max_passes).hits
        counts += h
        any_c += h.any(axis=1)
        all_c += h.all(axis=1)
    return counts, any_c, all_c


def sweep(scenario, receiver_index, snr_list, trials, method, base_seed=0, pfa=1e-4,
          max_passes=DEFAULT_MAX_PASSES, workers=None):
    """
    Detection rates over an SNR grid.

    Trial ``t`` at every SNR uses noise seed ``base_seed + t``. Trials are
    split into seed blocks and run in worker processes; counts are summed,
    so the result does not depend on the worker count.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    snr_grid = np.asarray(list(snr_list), dtype=float)
    K, M = len(scenario.targets), len(scenario.transmitters)
    hit = np.zeros((snr_grid.size, K, M), dtype=np.int64)
    any_c = np.zeros((snr_grid.size, K), dtype=np.int64)
    all_c = np.zeros((snr_grid.size, K), dtype=np.int64)
    workers = worker_count() if workers is None else workers
    seeds = np.arange(base_seed, base_seed + trials)
    blocks = np.array_split(seeds, max(1, min(workers * 4, trials)))
    jobs = [(si, (scenario, receiver_index, float(snr), method, [int(x) for x in b], pfa,
                  max_passes))
            for si, snr in enumerate(snr_grid) for b in blocks if len(b)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_block, [j for _, j in jobs]))
    else:
        results = [_run_block(j) for _, j in jobs]
    for (si, _), (c, a, al) in zip(jobs, results):
        hit[si] += c
        any_c[si] += a
        all_c[si] += al
    log.info("sweep %s: %d SNR points x %d trials", method, snr_grid.size, trials)
    return DetectionRateTable(snr_grid=snr_grid, hit_counts=hit, any_counts=any_c,
                              all_counts=all_c, trials=trials, method=method)


def binomial_sigma(p, trials):
    return math.sqrt(max(p * (1 - p), 0.0) / trials)


def emit_results(table, out_csv, out_plot=None):
    """
    Write ``snr_db,target,tx,rate`` rows; aggregate rows use ``tx`` = any/all.

    Targets and transmitters are 1-based in the file. An optional plot shows
    rate against SNR with one line per target and transmitter.
    """
    with open(out_csv, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["snr_db", "target", "tx", "rate"])
        S = len(table.snr_grid)
        if S:
            K, M = table.hit_counts.shape[1:]
            for si in range(S):
                snr = repr(float(table.snr_grid[si]))
                for q in range(K):
                    for i in range(M):
                        w.writerow([snr, q + 1, i + 1, repr(float(table.rates[si, q, i]))])
                    w.writerow([snr, q + 1, "any", repr(float(table.any_rates[si, q]))])
                    w.writerow([snr, q + 1, "all", repr(float(table.all_rates[si, q]))])
    if out_plot:
        _plot(table, out_plot)


def read_results(path):
    """Parse a CSV written by :func:`emit_results` into ``{(snr, target, tx): rate}``."""
    out = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            tx = row["tx"] if row["tx"] in ("any", "all") else int(row["tx"])
            out[(float(row["snr_db"]), int(row["target"]), tx)] = float(row["rate"])
    return out


def _plot(table, path):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4.5))
    if len(table.snr_grid):
        K, M = table.hit_counts.shape[1:]
        for q in range(K):
            for i in range(M):
                ax.plot(table.snr_grid, table.rates[:, q, i], marker="o", ms=3,
                        label=f"Tgt-{q + 1} / Tx-{i + 1}")
            ax.plot(table.snr_grid, table.any_rates[:, q], ls="--", label=f"Tgt-{q + 1} any")
    ax.set_xlabel("composite SNR (dB)")
    ax.set_ylabel("detection rate")
    ax.set_ylim(-0.02, 1.02)
    ax.grid(True, alpha=0.3)
    ax.set_title(f"{table.method} ({table.trials} trials)")
    ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
