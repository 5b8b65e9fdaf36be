"""Model-vs-human similarity alignment metrics.

Five complementary measures over scored sentence pairs: RMSE and signed
mean bias for pointwise deviation, expected calibration error (ECE) for
distribution-level agreement, and Pearson/Spearman correlation for
linear and monotonic alignment.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.stats import rankdata

from .errors import ValidationError

DEFAULT_N_BINS = 10


@dataclass(frozen=True)
class ScoredPair:
    """One sentence pair: model cosine in [-1, 1], human score in [0, 1]."""

    id: str
    model_score: float
    human_score: float

    def __post_init__(self):
        if not -1.0 <= self.model_score <= 1.0 or not math.isfinite(self.model_score):
            raise ValueError(f"model_score {self.model_score!r} outside [-1, 1]")
        if not 0.0 <= self.human_score <= 1.0 or not math.isfinite(self.human_score):
            raise ValueError(f"human_score {self.human_score!r} outside [0, 1]")


class BinStat(NamedTuple):
    """Per-bin ECE detail: interval bounds, population, and the two means."""

    lower: float
    upper: float
    count: int
    acc: float   # mean human score in the bin
    conf: float  # mean (clamped) model score in the bin


@dataclass(frozen=True)
class MetricsReport:
    n: int
    rmse: float
    mbe: float
    ece: float
    pearson: float
    spearman: float
    bins: list[BinStat] = field(repr=False)

    @property
    def n_bins(self) -> int:
        return len(self.bins)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "rmse": self.rmse,
            "mbe": self.mbe,
            "ece": self.ece,
            "pearson": self.pearson,
            "spearman": self.spearman,
            "n_bins": self.n_bins,
            "bins": [b._asdict() for b in self.bins],
        }

    def to_text(self) -> str:
        lines = [
            f"n        {self.n}",
            f"rmse     {self.rmse:.6f}",
            f"mbe      {self.mbe:+.6f}",
            f"ece      {self.ece:.6f}  (bins={self.n_bins})",
            f"pearson  {self.pearson:.6f}",
            f"spearman {self.spearman:.6f}",
        ]
        return "\n".join(lines)


def split_scores(pairs) -> tuple[np.ndarray, np.ndarray]:
    """(model, human) float arrays from ScoredPairs or (model, human) rows."""
    if isinstance(pairs, np.ndarray) and pairs.ndim == 2 and pairs.shape[1] == 2:
        return pairs[:, 0].astype(np.float64), pairs[:, 1].astype(np.float64)
    seq = list(pairs)
    if seq and hasattr(seq[0], "model_score"):
        m = np.array([p.model_score for p in seq], dtype=np.float64)
        h = np.array([p.human_score for p in seq], dtype=np.float64)
        return m, h
    arr = np.asarray(seq, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("pairs must be ScoredPairs or (model, human) rows")
    return arr[:, 0].copy(), arr[:, 1].copy()


def rmse(pairs) -> float:
    """Root mean squared deviation of model from human scores."""
    m, h = split_scores(pairs)
    if m.size == 0:
        raise ValueError("rmse of an empty pair set")
    d = m - h
    return math.sqrt(float(np.mean(d * d)))


def mbe(pairs) -> float:
    """Signed mean of (model - human); positive means overestimation."""
    m, h = split_scores(pairs)
    if m.size == 0:
        raise ValueError("mbe of an empty pair set")
    return float(np.mean(m - h))


def ece(pairs, n_bins: int = DEFAULT_N_BINS) -> tuple[float, list[BinStat]]:
    """Expected calibration error over equal-width bins of [0, 1].

    Model scores are clamped to [0, 1] inside this metric (raw cosine may
    be negative). Bins are left-closed with a right-closed last bin; empty
    bins contribute zero and appear in the detail with count 0.
    """
    m, h = split_scores(pairs)
    n = m.size
    if n == 0:
        raise ValueError("ece of an empty pair set")
    if n_bins < 1:
        raise ValueError(f"n_bins must be >= 1, got {n_bins}")
    clamped = np.clip(m, 0.0, 1.0)
    idx = np.minimum((clamped * n_bins).astype(np.int64), n_bins - 1)
    edges = np.linspace(0.0, 1.0, n_bins + 1)
    bins: list[BinStat] = []
    total = 0.0
    for b in range(n_bins):
        mask = idx == b
        count = int(np.count_nonzero(mask))
        if count:
            acc = float(np.mean(h[mask]))
            conf = float(np.mean(clamped[mask]))
            total += (count / n) * abs(acc - conf)
        else:
            acc = conf = 0.0
        bins.append(BinStat(float(edges[b]), float(edges[b + 1]), count, acc, conf))
    return total, bins


def _pearson_arrays(x: np.ndarray, y: np.ndarray) -> float:
    dx = x - np.mean(x)
    dy = y - np.mean(y)
    sx = math.sqrt(float(np.dot(dx, dx)))
    sy = math.sqrt(float(np.dot(dy, dy)))
    if sx == 0.0 or sy == 0.0:
        raise ValueError("undefined correlation")
    return float(min(1.0, max(-1.0, float(np.dot(dx, dy)) / (sx * sy))))


def pearson(pairs) -> float:
    """Linear correlation of model and human scores (explicit sum form)."""
    m, h = split_scores(pairs)
    if m.size < 2:
        raise ValueError("pearson needs at least 2 pairs")
    return _pearson_arrays(m, h)


def spearman(pairs) -> float:
    """Rank correlation; ties get average (fractional) ranks."""
    m, h = split_scores(pairs)
    if m.size < 2:
        raise ValueError("spearman needs at least 2 pairs")
    rm = rankdata(m, method="average")
    rh = rankdata(h, method="average")
    return _pearson_arrays(rm, rh)


def evaluate_all(pairs, n_bins: int = DEFAULT_N_BINS) -> MetricsReport:
    """All five metrics plus bin detail, identical to the individual calls."""
    m, h = split_scores(pairs)
    stacked = np.column_stack([m, h])
    ece_value, bins = ece(stacked, n_bins)
    return MetricsReport(
        n=int(m.size),
        rmse=rmse(stacked),
        mbe=mbe(stacked),
        ece=ece_value,
        pearson=pearson(stacked),
        spearman=spearman(stacked),
        bins=bins,
    )


# ---------------------------------------------------------------------------
# Pairs interchange file: JSONL, one {id, model_score, human_score} per line.
# ---------------------------------------------------------------------------


def read_pairs(path) -> list[ScoredPair]:
    pairs: list[ScoredPair] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None
            if not isinstance(obj, dict):
                raise ValidationError(f"{path}:{lineno}: expected a JSON object")
            missing = {"id", "model_score", "human_score"} - obj.keys()
            if missing:
                raise ValidationError(f"{path}:{lineno}: missing fields {sorted(missing)}")
            try:
                pair = ScoredPair(
                    id=str(obj["id"]),
                    model_score=float(obj["model_score"]),
                    human_score=float(obj["human_score"]),
                )
            except (TypeError, ValueError) as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from None
            pairs.append(pair)
    if not pairs:
        raise ValidationError(f"{path}: empty pairs file")
    return pairs


def write_pairs(path, pairs: Sequence[ScoredPair]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in pairs:
            fh.write(
                json.dumps(
                    {"id": p.id, "model_score": p.model_score, "human_score": p.human_score}
                )
                + "\n"
            )
