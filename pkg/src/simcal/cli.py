"""The `simcal` command line: fit, apply, evaluate, compare, threshold,
density, verify, stability.

All output is file-based under --out-dir (or $SIMCAL_OUT_DIR); nothing is
written on a failing run. Exit codes: 0 success, 1 usage error, 2 data
validation error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import calibrators, density, invariance, metrics, stability, thresholds
from .errors import ValidationError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

DEFAULT_OUT_DIR = "simcal-out"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems must exit 1, not argparse's 2
        raise _UsageError(message)


class OutputStager:
    """Collects outputs and writes them only after the command succeeded."""

    def __init__(self, out_dir):
        self.out_dir = Path(out_dir)
        self._files: list[tuple[str, str]] = []

    def add(self, name: str, text: str) -> None:
        self._files.append((name, text))

    def commit(self) -> list[Path]:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        written: list[Path] = []
        try:
            for name, text in self._files:
                path = self.out_dir / name
                path.write_text(text, encoding="utf-8")
                written.append(path)
        except BaseException:
            for path in written:
                path.unlink(missing_ok=True)
            raise
        return written


def _require_exists(path: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise ValidationError(f"{path}: no such file")
    return p


def _load_model_arg(args) -> calibrators.CalibrationModel | None:
    if getattr(args, "model", None) is None:
        return None
    return calibrators.load_model(_require_exists(args.model))


def _calibrated_pairs(pairs, model):
    m, h = metrics.split_scores(pairs)
    return np.column_stack([calibrators.apply(model, m), h])


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_fit(args, out: OutputStager) -> None:
    pairs = metrics.read_pairs(_require_exists(args.input))
    model = calibrators.fit(pairs, args.method)
    report = metrics.evaluate_all(_calibrated_pairs(pairs, model), args.bins)
    out.add("model.json", calibrators.serialize(model))
    out.add("train_metrics.json", json.dumps(report.to_dict(), indent=2) + "\n")
    print(f"fitted {args.method} on {report.n} pairs: rmse={report.rmse:.4f} ece={report.ece:.4f}")


def _read_scores_flexible(path: Path) -> list[float]:
    """One float per line, or the model_score column of a pairs JSONL."""
    lines = [ln for ln in path.read_text(encoding="utf-8").splitlines() if ln.strip()]
    if not lines:
        return []
    if lines[0].lstrip().startswith("{"):
        return [p.model_score for p in metrics.read_pairs(path)]
    scores = []
    for lineno, ln in enumerate(lines, start=1):
        try:
            scores.append(float(ln))
        except ValueError:
            raise ValidationError(f"{path}:{lineno}: not a number: {ln.strip()!r}") from None
    return scores


def cmd_apply(args, out: OutputStager) -> None:
    model = calibrators.load_model(_require_exists(args.model))
    scores = _read_scores_flexible(_require_exists(args.input))
    if scores:
        calibrated = calibrators.apply(model, np.asarray(scores, dtype=np.float64))
        body = "".join(repr(float(v)) + "\n" for v in calibrated)
    else:
        body = ""
    out.add("calibrated_scores.txt", body)
    print(f"calibrated {len(scores)} scores with {model.method}")


def cmd_evaluate(args, out: OutputStager) -> None:
    pairs = metrics.read_pairs(_require_exists(args.input))
    model = _load_model_arg(args)
    scored = _calibrated_pairs(pairs, model) if model is not None else pairs
    report = metrics.evaluate_all(scored, args.bins)
    doc = report.to_dict() | {"similarity": "raw" if model is None else "calibrated"}
    out.add("metrics.json", json.dumps(doc, indent=2) + "\n")
    out.add("metrics.txt", report.to_text() + "\n")
    print(report.to_text())


def cmd_compare(args, out: OutputStager) -> None:
    pairs = metrics.read_pairs(_require_exists(args.input))
    table = calibrators.compare_methods(pairs, args.bins)
    out.add("comparison.txt", table.to_text())
    out.add("comparison.csv", table.to_csv())
    print(table.to_text(), end="")


def cmd_threshold(args, out: OutputStager) -> None:
    pairs = metrics.read_pairs(_require_exists(args.input))
    model = _load_model_arg(args)
    report = thresholds.threshold_report(pairs, args.alpha, args.cutoff, model)
    out.add("threshold.json", thresholds.dump_report(report))
    print(thresholds.format_report_row(report))


def cmd_density(args, out: OutputStager) -> None:
    pairs = metrics.read_pairs(_require_exists(args.input))
    model = _load_model_arg(args)
    scored = _calibrated_pairs(pairs, model) if model is not None else pairs
    m, h = metrics.split_scores(scored)
    grid = density.default_grid()
    curves = {}
    for name, xs in (("human", h), ("model", m)):
        bw = density.silverman_bandwidth(xs) if xs.size > 1 and np.ptp(xs) > 0 else 0.05
        curves[name] = density.kde_1d(xs, grid, bw)
    if args.tau is not None:
        tau = float(args.tau)
    else:
        try:
            tau = thresholds.hcs_threshold(scored, args.alpha, args.cutoff).value
        except ValueError:  # no high-similarity support; draw no marker
            tau = None
    joint = density.joint_histogram(scored, args.grid, args.grid)
    smoothed = density.gaussian_smooth(joint, density.DEFAULT_SMOOTH_SIGMA)
    for name, curve in curves.items():
        out.add(f"{name}_density.csv", density.curve_to_csv(curve))
    markers = {} if tau is None else {"tau": tau}
    out.add("figure_density.svg", density.curves_svg(curves, markers))
    csvs = density.grid_to_csvs(smoothed)
    out.add("joint_density_matrix.csv", csvs["matrix"])
    out.add("joint_x_edges.csv", csvs["x_edges"])
    out.add("joint_y_edges.csv", csvs["y_edges"])
    out.add("figure_heatmap.svg", density.heatmap_svg(smoothed))
    meta = {
        "n": int(m.size),
        "similarity": "raw" if model is None else "calibrated",
        "tau_marker": tau,
        "grid_bins": args.grid,
        "smooth_sigma": density.DEFAULT_SMOOTH_SIGMA,
        "bandwidths": {k: c.bandwidth for k, c in curves.items()},
    }
    out.add("density_meta.json", json.dumps(meta, indent=2) + "\n")
    marker = "none" if tau is None else f"{tau:.4f}"
    print(f"density export for {m.size} pairs (tau marker {marker})")


def cmd_verify(args, out: OutputStager) -> int:
    model = calibrators.load_model(_require_exists(args.model))
    reports = invariance.run_suite(model, seed=args.seed, trials=args.trials)
    doc = {"seed": args.seed, "trials": args.trials, "checks": {}}
    failed = False
    for name, rep in reports.items():
        status = "PASS" if rep.passed else "FAIL"
        print(f"{status} {name}: {rep.violations} violations over {rep.n_trials} trials")
        doc["checks"][name] = {
            "trials": rep.n_trials,
            "violations": rep.violations,
            "witness": rep.witness,
        }
        failed = failed or not rep.passed
    out.add("verify.json", json.dumps(doc, indent=2) + "\n")
    return EXIT_NUMERIC if failed else EXIT_OK


def cmd_stability(args, out: OutputStager) -> None:
    pairs = stability.load_perturbation_dataset(_require_exists(args.input))
    model = _load_model_arg(args)
    report = stability.evaluate_stability(pairs, model, args.tau)
    out.add("stability.txt", report.to_text())
    out.add("stability.csv", report.to_csv())
    out.add("stability.json", json.dumps(report.to_dict(), indent=2) + "\n")
    print(report.to_text(), end="")


# ---------------------------------------------------------------------------
# parser / dispatch
# ---------------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="simcal", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, model="optional"):
        p.add_argument("--out-dir", default=os.environ.get("SIMCAL_OUT_DIR", DEFAULT_OUT_DIR))
        if model == "required":
            p.add_argument("--model", required=True, help="model JSON file")
        elif model == "optional":
            p.add_argument("--model", help="optional model JSON file")

    p = sub.add_parser("fit", help="fit a calibration model to a pairs file")
    p.add_argument("--input", required=True)
    p.add_argument("--method", required=True, choices=calibrators.METHODS)
    p.add_argument("--bins", type=int, default=metrics.DEFAULT_N_BINS)
    common(p, model=None)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("apply", help="calibrate a scores or pairs file")
    p.add_argument("--input", required=True)
    common(p, model="required")
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("evaluate", help="alignment metrics for a pairs file")
    p.add_argument("--input", required=True)
    p.add_argument("--bins", type=int, default=metrics.DEFAULT_N_BINS)
    common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="method comparison table")
    p.add_argument("--input", required=True)
    p.add_argument("--bins", type=int, default=metrics.DEFAULT_N_BINS)
    common(p, model=None)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("threshold", help="high-confidence similarity threshold")
    p.add_argument("--input", required=True)
    p.add_argument("--alpha", type=float, default=thresholds.DEFAULT_ALPHA)
    p.add_argument("--cutoff", type=float, default=thresholds.DEFAULT_HUMAN_CUTOFF)
    common(p)
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("density", help="KDE curves, joint grid and figures")
    p.add_argument("--input", required=True)
    p.add_argument("--tau", type=float, help="threshold marker (default: computed)")
    p.add_argument("--alpha", type=float, default=thresholds.DEFAULT_ALPHA)
    p.add_argument("--cutoff", type=float, default=thresholds.DEFAULT_HUMAN_CUTOFF)
    p.add_argument("--grid", type=int, default=density.DEFAULT_JOINT_BINS)
    common(p)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("verify", help="randomized order-preservation suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=100_000)
    common(p, model="required")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("stability", help="perturbation stability tables")
    p.add_argument("--input", required=True)
    p.add_argument("--tau", type=float, required=True)
    common(p)
    p.set_defaults(func=cmd_stability)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        out = OutputStager(args.out_dir)
        code = args.func(args, out)
        out.commit()
        return EXIT_OK if code is None else int(code)
    except _UsageError as exc:
        print(f"simcal: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValidationError as exc:
        print(f"simcal: invalid data: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"simcal: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"simcal: i/o error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
