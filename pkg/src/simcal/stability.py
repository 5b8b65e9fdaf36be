"""Local-stability protocol over minimally perturbed sentence pairs.

Each pair carries a perturbation-type label and a raw similarity score
(ingested directly or recomputed from an embedding file). Per type we
report the pair count, mean, population standard deviation, and the
stability rate: the fraction of pairs scoring at or above a threshold.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import geometry
from .calibrators import CalibrationModel, apply
from .errors import ValidationError

CANONICAL_TYPES = (
    "DETERMINER_VARIATION",
    "TENSE_VARIATION",
    "SYNONYM_SUBSTITUTION",
    "LOGICAL_PARAPHRASE",
    "NOMINALIZATION",
    "COREFERENCE_EXPANSION",
    "QUANTIFIER_VARIATION",
)

OVERALL_LABEL = "ALL"


@dataclass(frozen=True)
class PerturbationPair:
    id: str
    type_label: str
    raw_score: float
    text_a: str | None = None
    text_b: str | None = None

    def __post_init__(self):
        if not -1.0 <= self.raw_score <= 1.0 or not math.isfinite(self.raw_score):
            raise ValueError(f"raw_score {self.raw_score!r} outside [-1, 1]")


@dataclass(frozen=True)
class StabilityRow:
    label: str
    n: int
    mean: float
    std: float
    rate: float


@dataclass(frozen=True)
class StabilityReport:
    rows: tuple[StabilityRow, ...]  # per-type rows; overall row last
    threshold_used: float
    similarity_label: str  # "raw" | "calibrated"

    @property
    def overall(self) -> StabilityRow:
        return self.rows[-1]

    def to_text(self) -> str:
        width = max(len(r.label) for r in self.rows) + 2
        head = (
            f"{'type':<{width}}{'n':>6}{'mean':>9}{'std':>9}{'rate':>7}"
            f"   (threshold {self.threshold_used:.4f}, {self.similarity_label})"
        )
        lines = [head]
        for r in self.rows:
            lines.append(f"{r.label:<{width}}{r.n:>6}{r.mean:>9.3f}{r.std:>9.3f}{r.rate:>7.2f}")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        lines = ["type,n,mean,std,rate"]
        for r in self.rows:
            lines.append(f"{r.label},{r.n},{r.mean!r},{r.std!r},{r.rate!r}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold_used,
            "similarity": self.similarity_label,
            "rows": [r.__dict__ for r in self.rows],
        }


def load_perturbation_dataset(path, embeddings=None) -> list[PerturbationPair]:
    """Read the JSONL dataset; validates per line, warns on oddities.

    ``embeddings`` (id -> unit vector) lets records that reference an
    embedding file (emb_ref_a/emb_ref_b) omit raw_score. Unknown type
    labels are kept with a warning; duplicate ids warn and are kept.
    """
    pairs: list[PerturbationPair] = []
    seen_ids: set[str] = set()
    unknown: set[str] = set()
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
            for key in ("id", "type"):
                if key not in obj:
                    raise ValidationError(f"{path}:{lineno}: missing field {key!r}")
            score = obj.get("raw_score")
            if score is None:
                ref_a, ref_b = obj.get("emb_ref_a"), obj.get("emb_ref_b")
                if embeddings is None or ref_a is None or ref_b is None:
                    raise ValidationError(
                        f"{path}:{lineno}: no raw_score and no resolvable embedding refs"
                    )
                try:
                    score = geometry.cosine(embeddings[ref_a], embeddings[ref_b])
                except KeyError as exc:
                    raise ValidationError(
                        f"{path}:{lineno}: embedding id {exc.args[0]!r} not found"
                    ) from None
            pair_id = str(obj["id"])
            label = str(obj["type"])
            if label not in CANONICAL_TYPES:
                unknown.add(label)
            if pair_id in seen_ids:
                warnings.warn(f"{path}:{lineno}: duplicate id {pair_id!r} (kept)", stacklevel=2)
            seen_ids.add(pair_id)
            try:
                pairs.append(
                    PerturbationPair(
                        id=pair_id,
                        type_label=label,
                        raw_score=float(score),
                        text_a=obj.get("text_a"),
                        text_b=obj.get("text_b"),
                    )
                )
            except (TypeError, ValueError) as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from None
    if not pairs:
        raise ValidationError(f"{path}: empty perturbation dataset")
    for label in sorted(unknown):
        warnings.warn(f"{path}: unknown perturbation type {label!r} (kept)", stacklevel=2)
    return pairs


def _group_stats(label: str, scores: list[float], tau: float) -> StabilityRow:
    n = len(scores)
    mean = math.fsum(scores) / n
    var = math.fsum((s - mean) ** 2 for s in scores) / n  # population (n) denominator
    rate = sum(1 for s in scores if s >= tau) / n
    return StabilityRow(label=label, n=n, mean=mean, std=math.sqrt(max(var, 0.0)), rate=rate)


def evaluate_stability(
    pairs, model: CalibrationModel | None = None, tau: float = 0.0
) -> StabilityReport:
    """Per-type and overall stability statistics at threshold ``tau``.

    With ``model`` given, scores are calibrated first (so pass the
    matching calibrated threshold). Empty type groups are omitted.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("no perturbation pairs")
    raw = np.array([p.raw_score for p in pairs], dtype=np.float64)
    scores = apply(model, raw) if model is not None else raw
    by_type: dict[str, list[float]] = {}
    for p, s in zip(pairs, scores):
        by_type.setdefault(p.type_label, []).append(float(s))
    ordered = [t for t in CANONICAL_TYPES if t in by_type]
    ordered += [t for t in by_type if t not in CANONICAL_TYPES]
    rows = [_group_stats(t, by_type[t], tau) for t in ordered]
    rows.append(_group_stats(OVERALL_LABEL, [float(s) for s in scores], tau))
    return StabilityReport(
        rows=tuple(rows),
        threshold_used=float(tau),
        similarity_label="raw" if model is None else "calibrated",
    )


def bundled_fixture_path() -> Path:
    """Path of the packaged 35-pair perturbation fixture."""
    return Path(resources.files("simcal").joinpath("data/perturbations_v1.jsonl"))
