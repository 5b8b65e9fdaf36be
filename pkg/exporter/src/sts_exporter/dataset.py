"""Benchmark rows: (id, sentence pair, human score on the 0-5 scale).

Splits resolve in two ways: a path to a local JSONL file (one object per
line with sentence1, sentence2, score), or a named split of the public
STS benchmark fetched through the `datasets` hub (network required).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

HUB_DATASET = "mteb/stsbenchmark-sts"
KNOWN_SPLITS = ("train", "validation", "test")


@dataclass(frozen=True)
class BenchmarkRow:
    id: str
    sentence1: str
    sentence2: str
    score: float  # 0..5

    def __post_init__(self):
        if not 0.0 <= self.score <= 5.0:
            raise ValueError(f"score {self.score!r} outside [0, 5]")


def _rows_from_jsonl(path: Path) -> list[BenchmarkRow]:
    rows: list[BenchmarkRow] = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                rows.append(
                    BenchmarkRow(
                        id=str(obj.get("id", f"row-{lineno:05d}")),
                        sentence1=str(obj["sentence1"]),
                        sentence2=str(obj["sentence2"]),
                        score=float(obj["score"]),
                    )
                )
            except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
                raise ValueError(f"{path}:{lineno}: bad benchmark row ({exc})") from None
    if not rows:
        raise ValueError(f"{path}: empty benchmark file")
    return rows


def _rows_from_hub(split: str) -> list[BenchmarkRow]:
    try:
        from datasets import load_dataset
    except ImportError as exc:
        raise RuntimeError(
            "the 'datasets' package is not installed; "
            "install the 'data' extra or pass a local JSONL path as the split"
        ) from exc
    data = load_dataset(HUB_DATASET, split=split)
    rows = [
        BenchmarkRow(
            id=f"sts-{split}-{i:05d}",
            sentence1=str(rec["sentence1"]),
            sentence2=str(rec["sentence2"]),
            score=float(rec["score"]),
        )
        for i, rec in enumerate(data)
    ]
    if not rows:
        raise ValueError(f"hub split {split!r} is empty")
    return rows


def load_split(split: str) -> list[BenchmarkRow]:
    path = Path(split)
    if path.is_file():
        return _rows_from_jsonl(path)
    if split not in KNOWN_SPLITS:
        raise ValueError(f"split {split!r} is neither a file nor one of {KNOWN_SPLITS}")
    return _rows_from_hub(split)
