"""Order-preservation checks: the structural safety net of calibration.

A monotone transform may merge ties but can never invert an ordering, so
nearest neighbors stay nearest and no threshold-graph edge disappears at
the mapped threshold. The checkers prove a fitted model behaves that way
at scale, and a deliberately decreasing control shows they really bite.
"""

from pathlib import Path

from simcal.calibrators import CalibrationModel, fit_isotonic
from simcal.invariance import run_suite
from simcal.metrics import read_pairs

pairs = read_pairs(Path(__file__).resolve().parent.parent / "data" / "reference_pairs.jsonl")
model = fit_isotonic(pairs)

print("fitted isotonic model:")
for name, report in run_suite(model, seed=7, trials=100_000).items():
    print(f"  {name:18s} {report.violations} violations over {report.n_trials} trials")

control = CalibrationModel(method="linear", params=(-1.0, 0.5))
print("decreasing control (must fail):")
for name, report in run_suite(control, seed=7, trials=10_000).items():
    status = "caught" if report.violations else "missed"
    print(f"  {name:18s} {report.violations} violations -> {status}")
