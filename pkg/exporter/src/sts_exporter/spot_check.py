"""Independent recomputation of the five alignment metrics.

Deliberately self-contained (own JSONL parsing, own tie-aware ranking, no
shared code with the consumer of these files) so it can serve as a
second-opinion oracle: run it and the consumer's `evaluate` on the same
pairs file and the numbers must agree.

Conventions matched to the pairs-file contract: ECE uses 10 equal-width
bins on [0, 1] with a right-closed last bin, and model scores are clamped
into [0, 1] inside ECE only.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

N_BINS = 10


def _read_scores(path) -> tuple[list[float], list[float]]:
    model: list[float] = []
    human: list[float] = []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                m = float(obj["model_score"])
                h = float(obj["human_score"])
            except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
                raise ValueError(f"{path}:{lineno}: bad pair line ({exc})") from None
            model.append(m)
            human.append(h)
    if not model:
        raise ValueError(f"{path}: empty pairs file")
    return model, human


def _rank_with_ties(values: list[float]) -> list[float]:
    order = sorted(range(len(values)), key=values.__getitem__)
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        shared = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = shared
        i = j + 1
    return ranks


def _pearson(xs: list[float], ys: list[float]) -> float:
    n = len(xs)
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    sxy = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    sxx = math.fsum((x - mx) ** 2 for x in xs)
    syy = math.fsum((y - my) ** 2 for y in ys)
    if sxx == 0.0 or syy == 0.0:
        raise ValueError("undefined correlation")
    return max(-1.0, min(1.0, sxy / math.sqrt(sxx * syy)))


def compute_metrics(model: list[float], human: list[float]) -> dict:
    n = len(model)
    rmse = math.sqrt(math.fsum((m - h) ** 2 for m, h in zip(model, human)) / n)
    bias = math.fsum(m - h for m, h in zip(model, human)) / n

    clamped = [min(1.0, max(0.0, m)) for m in model]
    bins = [[0, 0.0, 0.0] for _ in range(N_BINS)]
    for c, h in zip(clamped, human):
        idx = min(int(c * N_BINS), N_BINS - 1)
        bins[idx][0] += 1
        bins[idx][1] += h
        bins[idx][2] += c
    ece = 0.0
    for count, h_sum, c_sum in bins:
        if count:
            ece += (count / n) * abs(h_sum / count - c_sum / count)

    return {
        "n": n,
        "rmse": rmse,
        "mbe": bias,
        "ece": ece,
        "pearson": _pearson(model, human),
        "spearman": _pearson(_rank_with_ties(model), _rank_with_ties(human)),
    }


def spot_check(pairs_path) -> dict:
    """Compute and print the five metrics for a pairs file."""
    model, human = _read_scores(pairs_path)
    result = compute_metrics(model, human)
    print(f"spot check on {pairs_path} (n={result['n']})")
    for key in ("rmse", "mbe", "ece", "pearson", "spearman"):
        print(f"  {key:9s} {result[key]: .6f}")
    return result
