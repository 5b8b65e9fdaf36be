"""Quantiles and the high-confidence similarity threshold.

The threshold is the lower alpha-quantile (default 5%) of similarity
scores among pairs that humans rated above a cutoff (default 0.9). By
construction, at least a 1 - alpha fraction of those high-similarity
pairs score at or above it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .calibrators import CalibrationModel, apply
from .metrics import split_scores

DEFAULT_ALPHA = 0.05
DEFAULT_HUMAN_CUTOFF = 0.9


@dataclass(frozen=True)
class ThresholdSpec:
    alpha: float
    human_cutoff: float
    value: float
    similarity_label: str  # "raw" | "calibrated"
    n_support: int

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "cutoff": self.human_cutoff,
            "value": self.value,
            "similarity": self.similarity_label,
            "n_support": self.n_support,
        }


def quantile(xs, p: float) -> float:
    """Order-statistic quantile with linear interpolation at rank (n-1)*p."""
    xs = np.asarray(xs, dtype=np.float64)
    if xs.size == 0:
        raise ValueError("quantile of an empty sequence")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    xs = np.sort(xs)
    pos = (xs.size - 1) * p
    lo = int(pos)
    frac = pos - lo
    if frac == 0.0 or lo + 1 >= xs.size:
        return float(xs[lo])
    return float(xs[lo] + frac * (xs[lo + 1] - xs[lo]))


def _support_scores(pairs, human_cutoff: float, model: CalibrationModel | None):
    m, h = split_scores(pairs)
    mask = h > human_cutoff
    if not np.any(mask):
        raise ValueError("no high-similarity pairs")
    scores = m[mask]
    if model is not None:
        scores = apply(model, scores)
    return scores


def hcs_threshold(
    pairs,
    alpha: float = DEFAULT_ALPHA,
    human_cutoff: float = DEFAULT_HUMAN_CUTOFF,
    *,
    model: CalibrationModel | None = None,
) -> ThresholdSpec:
    """Alpha-quantile of scores among pairs with human score > cutoff.

    Membership uses the strict inequality. With ``model`` given, the
    quantile is taken over calibrated scores.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    scores = _support_scores(pairs, human_cutoff, model)
    return ThresholdSpec(
        alpha=alpha,
        human_cutoff=human_cutoff,
        value=quantile(scores, alpha),
        similarity_label="raw" if model is None else "calibrated",
        n_support=int(scores.size),
    )


def calibrated_threshold(model: CalibrationModel, tau_raw: float) -> float:
    """Image of a raw threshold under the calibration transform.

    May differ from the alpha-quantile of calibrated scores when step
    plateaus create ties; callers wanting both should also run
    ``hcs_threshold(..., model=...)``.
    """
    return float(apply(model, tau_raw))


def guarantee_check(
    pairs,
    tau: float,
    human_cutoff: float = DEFAULT_HUMAN_CUTOFF,
    *,
    model: CalibrationModel | None = None,
) -> float:
    """Fraction of the high-human-similarity support scoring >= tau."""
    scores = _support_scores(pairs, human_cutoff, model)
    return float(np.count_nonzero(scores >= tau)) / scores.size


def threshold_report(
    pairs,
    alpha: float = DEFAULT_ALPHA,
    human_cutoff: float = DEFAULT_HUMAN_CUTOFF,
    model: CalibrationModel | None = None,
) -> dict:
    """Raw threshold, its calibrated image and quantile, and coverages."""
    raw = hcs_threshold(pairs, alpha, human_cutoff)
    out = {
        "raw": raw.to_dict() | {"coverage": guarantee_check(pairs, raw.value, human_cutoff)},
    }
    if model is not None:
        mapped = calibrated_threshold(model, raw.value)
        cal_quantile = hcs_threshold(pairs, alpha, human_cutoff, model=model)
        out["calibrated"] = {
            "value": mapped,
            "quantile_of_calibrated": cal_quantile.value,
            "coverage": guarantee_check(pairs, mapped, human_cutoff, model=model),
            "alpha": alpha,
            "cutoff": human_cutoff,
            "n_support": cal_quantile.n_support,
        }
    return out


def format_report_row(report: dict) -> str:
    raw = report["raw"]
    line = (
        f"raw: tau={raw['value']:.4f} alpha={raw['alpha']:g} cutoff={raw['cutoff']:g} "
        f"n_support={raw['n_support']} coverage={raw['coverage']:.4f}"
    )
    if "calibrated" in report:
        cal = report["calibrated"]
        line += (
            f" | calibrated: tau={cal['value']:.4f} "
            f"quantile={cal['quantile_of_calibrated']:.4f} coverage={cal['coverage']:.4f}"
        )
    return line


def dump_report(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"
