"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data/format error, 3 numeric failure.
Frame numbers on the command line and in CSV output are 1-based.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path

import numpy as np

from . import formats
from .errors import KalmanDenoiseError, NumericError
from .kalman import MEASUREMENT_SOURCES, KalmanConfig, denoise
from .metrics import PSNR_VARIANTS, evaluate, whiteness_check
from .noise import VARIANCE_MODES, estimate_sigma_laplacian, estimate_variance_temporal
from .volume import NoiseSpec, add_awgn, smooth_image, synthetic_sequence

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

TABLE_SIGMAS = (0.03, 0.15, 0.21, 0.25, 0.31)


def estimator_sigmas(n: int = 20) -> np.ndarray:
    """``n`` noise levels with variances evenly spaced over [0.001, 0.1]."""
    return np.sqrt(np.linspace(0.001, 0.1, n))


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _num(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    return "inf" if math.isinf(x) and x > 0 else repr(x)


def _write_csv(path, header, rows) -> None:
    if path is None or str(path) == "-":
        fh = sys.stdout
        close = False
    else:
        fh = open(path, "w", newline="")
        close = True
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([c if isinstance(c, str) else _num(c) for c in row])
    finally:
        if close:
            fh.close()


def _sigma_list(text: str | None, default) -> list[float]:
    if text is None or text == "":
        return [float(s) for s in default]
    try:
        values = [float(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise UsageError(f"bad --sweep list {text!r}") from exc
    if not values or any(not v >= 0 for v in values):
        raise UsageError("--sweep needs non-negative sigma values")
    return values


def _variants(choice: str) -> list[str]:
    return list(PSNR_VARIANTS) if choice == "both" else [choice]


def _load(args, attr="input", fmt_attr="format"):
    path = getattr(args, attr)
    if path is None:
        raise UsageError(f"--{attr} is required")
    return formats.load_volume(path, getattr(args, fmt_attr, None))


def _check_output(args) -> None:
    if args.output is None:
        raise UsageError("--output is required")
    if args.input is not None and Path(args.output).resolve() == Path(args.input).resolve():
        raise UsageError("--output must differ from --input")


def _config(args) -> KalmanConfig:
    if not args.beta > 0:
        raise UsageError("--beta must be > 0")
    return KalmanConfig(beta=args.beta, variance_mode=args.variance_mode, measurement=args.measurement)


# --- commands ---------------------------------------------------------------

def cmd_synth(args) -> int:
    vol = synthetic_sequence(args.height, args.width, args.frames)
    formats.save_volume(vol, args.output, args.output_format)
    return EXIT_OK


def cmd_add_noise(args) -> int:
    _check_output(args)
    if not args.sigma >= 0:
        raise UsageError("--sigma must be >= 0")
    vol = _load(args)
    noisy = add_awgn(vol, NoiseSpec(args.sigma, seed=args.seed), clip=args.clip)
    formats.save_volume(noisy, args.output, args.output_format)
    return EXIT_OK


def cmd_denoise(args) -> int:
    _check_output(args)
    cfg = _config(args)
    vol = _load(args)
    ref = formats.load_volume(args.reference) if args.reference else None
    if ref is not None and ref.shape != vol.shape:
        raise KalmanDenoiseError("reference and input volumes differ in shape")
    out, trace = denoise(vol, cfg, reference=ref)
    if args.clip:
        out = np.clip(out, 0.0, 1.0)
    formats.save_volume(out, args.output, args.output_format)
    if args.trace:
        _write_csv(
            args.trace,
            ["t", "mean_gain", "mean_p", "mse", "psnr_paper", "psnr_standard"],
            ([r.t + 1, r.mean_gain, r.mean_p, r.mse, r.psnr_paper, r.psnr_standard] for r in trace),
        )
    if args.report:
        rows = []
        target = ref if ref is not None else vol
        rep = evaluate(target, out)
        rows.append(["filtered", rep.avg_mse] + [rep.avg_psnr(v) for v in PSNR_VARIANTS])
        if ref is not None:
            rep_noisy = evaluate(ref, vol)
            rows.append(["noisy", rep_noisy.avg_mse] + [rep_noisy.avg_psnr(v) for v in PSNR_VARIANTS])
        _write_csv(args.report, ["signal", "avg_mse", "avg_psnr_paper", "avg_psnr_standard"], rows)
    return EXIT_OK


def cmd_estimate_noise(args) -> int:
    if args.sweep is not None:
        sigmas = _sigma_list(args.sweep, estimator_sigmas())
        base = _load(args)[0] if args.input else smooth_image(512)
        rows, errs = [], []
        for k, s in enumerate(sigmas):
            noisy = add_awgn(base, NoiseSpec(s, seed=args.seed + k))
            est = estimate_sigma_laplacian(noisy)
            errs.append(est - s)
            rows.append([s, est])
        rmse = math.sqrt(float(np.mean(np.square(errs))))
        rows.append(["rmse", rmse])
        _write_csv(args.report, ["sigma", "sigma_hat"], rows)
        return EXIT_OK

    vol = _load(args)
    est = [estimate_sigma_laplacian(f) for f in vol]
    rows = [[t, s] for t, s in enumerate(est, start=1)]
    rows.append(["mean", float(np.mean(est))])
    if args.temporal:
        field = estimate_variance_temporal(vol)
        rows += [["var_min", field.min()], ["var_mean", field.mean()], ["var_max", field.max()]]
    _write_csv(args.report, ["frame", "sigma_hat"], rows)
    return EXIT_OK


def cmd_metrics(args) -> int:
    vol = _load(args)
    if args.reference is None:
        raise UsageError("--reference is required")
    ref = formats.load_volume(args.reference)
    rep = evaluate(ref, vol)
    variants = _variants(args.psnr)
    header = ["frame", "mse"] + [f"psnr_{v.split('-')[0]}" for v in variants] + ["identical"]
    rows = [
        [t + 1, rep.per_frame_mse[t]] + [rep.per_frame_psnr[v][t] for v in variants] + [rep.identical[t]]
        for t in range(len(rep.per_frame_mse))
    ]
    rows.append(["mean", rep.avg_mse] + [rep.avg_psnr(v) for v in variants] + [bool(rep.identical.all())])
    _write_csv(args.report, header, rows)
    return EXIT_OK


def cmd_acf(args) -> int:
    noisy = _load(args)
    if args.filtered is None:
        raise UsageError("--filtered is required")
    filtered = formats.load_volume(args.filtered)
    if filtered.shape != noisy.shape:
        raise KalmanDenoiseError("noisy and filtered volumes differ in shape")
    n = noisy.shape[0]
    frame = args.frame if args.frame is not None else n // 2 + 1
    if not 1 <= frame <= n:
        raise UsageError(f"--frame must be in [1, {n}]")
    res = whiteness_check(noisy[frame - 1] - filtered[frame - 1], threshold=args.threshold)
    if args.output:
        surface = res.acf.centered()
        h, w = surface.shape
        with open(args.output, "w", newline="") as fh:
            fh.write(f"# circular ACF {h}x{w}; zero lag at row {h // 2}, column {w // 2} (0-based)\n")
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow([f"lag{c - w // 2}" for c in range(w)])
            for row in surface:
                wr.writerow([_num(v) for v in row])
    _write_csv(args.report, ["frame", "origin_peak", "ratio", "pass"],
               [[frame, res.origin, res.ratio, res.passed]])
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = _config(args)
    clean = _load(args) if args.input else synthetic_sequence()
    sigmas = _sigma_list(args.sweep, TABLE_SIGMAS)
    variants = ["standard", "paper-literal"] if args.psnr == "both" else [args.psnr]
    header = ["sigma", "psnr_noisy", "psnr_filtered"]
    if len(variants) == 2:
        header += ["psnr_noisy_paper", "psnr_filtered_paper"]
    rows = []
    for k, s in enumerate(sigmas):
        noisy = add_awgn(clean, NoiseSpec(s, seed=args.seed + k), clip=args.clip)
        out, _ = denoise(noisy, cfg)
        rep_n, rep_f = evaluate(clean, noisy), evaluate(clean, out)
        row = [s]
        for v in variants:
            row += [rep_n.avg_psnr(v), rep_f.avg_psnr(v)]
        rows.append(row)
    _write_csv(args.output, header, rows)
    return EXIT_OK


# --- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="kalman-denoise", description="Frame-based Kalman denoising of video volumes.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def io_args(sp, output=True):
        sp.add_argument("--input", help="input volume (PGM directory, .y4m or .kvol)")
        sp.add_argument("--format", choices=formats.FORMATS, help="input format (default: from suffix)")
        if output:
            sp.add_argument("--output", help="output path")
            sp.add_argument("--output-format", choices=formats.FORMATS)

    def filter_args(sp):
        sp.add_argument("--beta", type=float, default=1.0, help="q = beta * r (default 1)")
        sp.add_argument("--variance-mode", choices=VARIANCE_MODES, default="temporal")
        sp.add_argument("--measurement", choices=MEASUREMENT_SOURCES, default="estimate",
                        help="what the t-1 term refers to (default: previous estimate)")

    sp = sub.add_parser("synth", help="write the synthetic moving-square test sequence")
    sp.add_argument("--output", required=True)
    sp.add_argument("--output-format", choices=formats.FORMATS)
    sp.add_argument("--frames", type=int, default=60)
    sp.add_argument("--height", type=int, default=128)
    sp.add_argument("--width", type=int, default=128)
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("add-noise", help="inject seeded additive white Gaussian noise")
    io_args(sp)
    sp.add_argument("--sigma", type=float, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--clip", action="store_true", help="clip the result to [0, 1]")
    sp.set_defaults(func=cmd_add_noise)

    sp = sub.add_parser("denoise", help="run the Kalman filter over a volume")
    io_args(sp)
    filter_args(sp)
    sp.add_argument("--reference", help="clean volume for trace/report metrics")
    sp.add_argument("--clip", action="store_true", help="clip the output to [0, 1]")
    sp.add_argument("--trace", help="per-frame trace CSV")
    sp.add_argument("--report", help="summary metrics CSV")
    sp.set_defaults(func=cmd_denoise)

    sp = sub.add_parser("estimate-noise", help="Laplacian sigma estimates and temporal variance")
    io_args(sp, output=False)
    sp.add_argument("--temporal", action="store_true", help="also summarize the temporal variance field")
    sp.add_argument("--sweep", nargs="?", const="", default=None,
                    help="estimator sweep on a smooth image; optional comma list of sigmas")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--report", help="CSV destination (default stdout)")
    sp.set_defaults(func=cmd_estimate_noise)

    sp = sub.add_parser("metrics", help="per-frame MSE/PSNR between two volumes")
    io_args(sp, output=False)
    sp.add_argument("--reference", help="reference volume")
    sp.add_argument("--psnr", choices=list(PSNR_VARIANTS) + ["both"], default="both")
    sp.add_argument("--report", help="CSV destination (default stdout)")
    sp.set_defaults(func=cmd_metrics)

    sp = sub.add_parser("acf", help="ACF and whiteness of the noisy - filtered residual")
    io_args(sp)
    sp.add_argument("--filtered", help="filtered volume")
    sp.add_argument("--frame", type=int, help="1-based frame number (default: middle)")
    sp.add_argument("--threshold", type=float, default=0.1)
    sp.add_argument("--report", help="CSV destination (default stdout)")
    sp.set_defaults(func=cmd_acf)

    sp = sub.add_parser("bench", help="sigma sweep of noisy/filtered PSNR")
    sp.add_argument("--input", help="clean volume (default: synthetic sequence)")
    sp.add_argument("--format", choices=formats.FORMATS)
    sp.add_argument("--output", help="CSV destination (default stdout)")
    filter_args(sp)
    sp.add_argument("--sweep", help="comma list of sigmas (default 0.03,0.15,0.21,0.25,0.31)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--psnr", choices=list(PSNR_VARIANTS) + ["both"], default="both")
    sp.add_argument("--clip", action="store_true", help="clip noisy volumes to [0, 1]")
    sp.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"kalman-denoise: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericError, FloatingPointError) as exc:
        print(f"kalman-denoise: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (KalmanDenoiseError, OSError, ValueError) as exc:
        print(f"kalman-denoise: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
