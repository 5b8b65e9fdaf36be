"""simcal: calibrate cosine similarity against human similarity judgments.

Submodules
----------
geometry     unit vectors, cosine, the isotropic-sphere baseline
metrics      RMSE / MBE / ECE / Pearson / Spearman over scored pairs
calibrators  fit + apply the seven calibration transforms
thresholds   quantiles and the high-confidence similarity threshold
density      KDE curves, joint histograms, smoothing, plot-data export
invariance   order / nearest-neighbor / threshold-graph checkers
stability    perturbation-pair stability statistics
cli          the `simcal` command-line entry point
"""

from . import calibrators, density, geometry, invariance, metrics, stability, thresholds
from .calibrators import CalibrationModel, apply, compare_methods, fit
from .errors import ValidationError
from .metrics import MetricsReport, ScoredPair, evaluate_all, read_pairs, write_pairs
from .thresholds import hcs_threshold

__version__ = "0.1.0"

__all__ = [
    "CalibrationModel",
    "MetricsReport",
    "ScoredPair",
    "ValidationError",
    "apply",
    "calibrators",
    "cli",
    "compare_methods",
    "density",
    "evaluate_all",
    "fit",
    "geometry",
    "hcs_threshold",
    "invariance",
    "metrics",
    "read_pairs",
    "stability",
    "thresholds",
    "write_pairs",
]
