"""Command-line entry point: ``zcradar <subcommand> ...``."""

import argparse
import csv
import logging
import sys

import numpy as np

from . import canceller, harness
from .dcft import ChirpSpectrum, check_rate, dcft, idcft
from .rdmap import range_doppler_map, signed_bin
from .scene import load_scenario, synthesize_received
from .zcseq import check_length, generate_zc

FMT = "%.17g"


def _open_out(path):
    return open(path, "w", newline="") if path and path != "-" else sys.stdout


def _write_complex(path, index_name, values):
    fh = _open_out(path)
    try:
        w = csv.writer(fh)
        w.writerow([index_name, "re", "im"])
        for i, v in enumerate(values):
            w.writerow([i, FMT % v.real, FMT % v.imag])
    finally:
        if fh is not sys.stdout:
            fh.close()


def _read_complex(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if rows and not _is_number(rows[0][0]):
        rows = rows[1:]
    rows.sort(key=lambda r: int(r[0]))
    return np.array([complex(float(r[1]), float(r[2])) for r in rows])


def _is_number(s):
    try:
        float(s)
        return True
    except ValueError:
        return False


def cmd_gen_zc(args):
    seq = generate_zc(args.seed, args.length)
    _write_complex(args.out, "n", seq.samples)


def cmd_dcft(args):
    x = _read_complex(args.inp)
    if args.inverse:
        X = ChirpSpectrum(coefficients=x, chirp_rate=check_rate(args.beta, x.size),
                          length=check_length(x.size))
        _write_complex(args.out, "n", idcft(X))
    else:
        _write_complex(args.out, "k", dcft(x, args.beta).coefficients)


def cmd_rdmap(args):
    sc = load_scenario(args.scenario)
    rx = synthesize_received(sc, args.rx, args.snr_db, args.seed)
    rd = range_doppler_map(rx.samples, generate_zc(sc.seeds[args.tx], sc.n), sc.eta, args.tx)
    mag = rd.magnitude
    if args.out and args.out.lower().endswith(".png"):
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        order = np.argsort([signed_bin(k, sc.eta) for k in range(sc.eta)])
        fig, ax = plt.subplots(figsize=(7, 4))
        im = ax.imshow(20 * np.log10(mag[:, order].T + 1e-300), aspect="auto", origin="lower",
                       extent=[0, sc.n, signed_bin(order[0], sc.eta) - 0.5,
                               signed_bin(order[-1], sc.eta) + 0.5],
                       interpolation="nearest")
        ax.set_xlabel("delay bin")
        ax.set_ylabel("Doppler bin")
        fig.colorbar(im, ax=ax, label="dB")
        fig.tight_layout()
        fig.savefig(args.out)
        plt.close(fig)
        return
    fh = _open_out(args.out)
    try:
        w = csv.writer(fh)
        w.writerow(["delay_bin", "doppler_bin", "magnitude"])
        for l in range(sc.n):
            for d in range(sc.eta):
                w.writerow([l, d, FMT % mag[l, d]])
    finally:
        if fh is not sys.stdout:
            fh.close()


def cmd_detect(args):
    sc = load_scenario(args.scenario)
    rx = synthesize_received(sc, args.rx, args.snr_db, args.seed)
    report = canceller.run_method(args.method, rx, sc, args.rx, args.pfa, args.max_passes)
    fh = _open_out(args.out)
    try:
        w = csv.writer(fh)
        w.writerow(["pass", "tx", "delay_bin", "doppler_bin", "xi_hat", "alpha_re", "alpha_im",
                    "magnitude"])
        for p, tx, l, d, xi, are, aim, mag in report.rows():
            w.writerow([p, tx, l, d, FMT % xi, FMT % are, FMT % aim, FMT % mag])
    finally:
        if fh is not sys.stdout:
            fh.close()


def cmd_sweep(args):
    sc = load_scenario(args.scenario)
    snrs = [float(s) for s in args.snr_db_list.split(",") if s.strip()]
    table = harness.sweep(sc, args.rx, snrs, args.trials, args.method.replace("-", "_"),
                          args.base_seed, args.pfa, args.max_passes)
    harness.emit_results(table, args.out_csv, args.out_plot)


def cmd_selftest(args):
    from .selftest import run_all
    return 0 if run_all() else 1


def _snr(s):
    return float("inf") if s.lower() in ("inf", "none") else float(s)


def build_parser():
    p = argparse.ArgumentParser(prog="zcradar", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-zc", help="write a Zadoff-Chu sequence as n,re,im CSV")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--length", type=int, required=True)
    g.add_argument("--out", default="-")
    g.set_defaults(func=cmd_gen_zc)

    g = sub.add_parser("dcft", help="forward or inverse DCFT of a CSV sequence")
    g.add_argument("--in", dest="inp", required=True)
    g.add_argument("--beta", type=int, required=True)
    g.add_argument("--inverse", action="store_true")
    g.add_argument("--out", default="-")
    g.set_defaults(func=cmd_dcft)

    def scene_args(g):
        g.add_argument("--scenario", required=True, help="JSON path or shipped name (case1..case4, nearfar)")
        g.add_argument("--rx", type=int, default=0)
        g.add_argument("--snr-db", type=_snr, default=20.0)
        g.add_argument("--seed", type=int, default=0)

    g = sub.add_parser("rdmap", help="range-Doppler map of one receiver/transmitter pair")
    scene_args(g)
    g.add_argument("--tx", type=int, default=0)
    g.add_argument("--out", default="-", help="CSV path, or a .png for an image")
    g.set_defaults(func=cmd_rdmap)

    g = sub.add_parser("detect", help="run one detector on one synthesized interval")
    scene_args(g)
    g.add_argument("--method", choices=["raw", "sc-time", "sc-dcft"], default="sc-dcft")
    g.add_argument("--pfa", type=float, default=1e-4)
    g.add_argument("--max-passes", type=int, default=canceller.DEFAULT_MAX_PASSES)
    g.add_argument("--out", default="-")
    g.set_defaults(func=cmd_detect)

    g = sub.add_parser("sweep", help="Monte-Carlo detection rates over composite SNR")
    g.add_argument("--scenario", required=True)
    g.add_argument("--rx", type=int, default=0)
    g.add_argument("--method", choices=["raw", "sc-time", "sc-dcft"], default="sc-dcft")
    g.add_argument("--snr-db-list", required=True, help="comma-separated, e.g. -5,0,5,10")
    g.add_argument("--trials", type=int, default=2000)
    g.add_argument("--pfa", type=float, default=1e-4)
    g.add_argument("--max-passes", type=int, default=canceller.DEFAULT_MAX_PASSES)
    g.add_argument("--base-seed", type=int, default=0)
    g.add_argument("--out-csv", required=True)
    g.add_argument("--out-plot")
    g.set_defaults(func=cmd_sweep)

    g = sub.add_parser("selftest", help="run the built-in invariant checks")
    g.set_defaults(func=cmd_selftest)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        rc = args.func(args)
    except (ValueError, OSError) as exc:
        print(f"zcradar: error: {exc}", file=sys.stderr)
        return 2
    return rc or 0


if __name__ == "__main__":
    sys.exit(main())
