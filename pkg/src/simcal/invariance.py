"""Executable order-preservation checks for calibration transforms.

A monotone non-decreasing transform can merge score ties but never invert
an ordering, so for such transforms every checker here must report zero
violations; the checkers exist to catch implementation bugs (and to fail
loudly on deliberately corrupted models).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calibrators import CalibrationModel, apply

#: slack absorbing float rounding without masking logic errors
VIOLATION_TOL = 1e-12


@dataclass(frozen=True)
class InvarianceReport:
    n_trials: int
    violations: int
    witness: tuple | None = None

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def merged_with(self, other: "InvarianceReport") -> "InvarianceReport":
        witnesses = [w for w in (self.witness, other.witness) if w is not None]
        return InvarianceReport(
            n_trials=self.n_trials + other.n_trials,
            violations=self.violations + other.violations,
            witness=min(witnesses) if witnesses else None,
        )


def check_order_preservation(model: CalibrationModel, score_pairs) -> InvarianceReport:
    """For ordered score pairs (a >= b), count cases with g(a) < g(b)."""
    arr = np.asarray(score_pairs, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("score_pairs must be rows of (a, b)")
    a, b = arr[:, 0], arr[:, 1]
    if np.any(a < b):
        raise ValueError("each pair must satisfy a >= b")
    ga = apply(model, a)
    gb = apply(model, b)
    bad = ga < gb - VIOLATION_TOL
    n_bad = int(np.count_nonzero(bad))
    witness = None
    if n_bad:
        i = int(np.flatnonzero(bad)[0])
        witness = (float(a[i]), float(b[i]), float(ga[i]), float(gb[i]))
    return InvarianceReport(n_trials=int(arr.shape[0]), violations=n_bad, witness=witness)


def check_nn_preservation(model: CalibrationModel, candidate_score_sets) -> InvarianceReport:
    """Raw nearest neighbors must stay nearest after calibration.

    Each element of ``candidate_score_sets`` holds one query's candidate
    similarities. Ties may grow (plateaus merge scores) but the raw
    argmax set may never lose a member.
    """
    violations = 0
    witness = None
    n = 0
    for scores in candidate_score_sets:
        scores = np.asarray(scores, dtype=np.float64)
        if scores.size == 0:
            raise ValueError("candidate set must be nonempty")
        n += 1
        raw_arg = np.flatnonzero(scores == scores.max())
        cal = apply(model, scores)
        cal_max = cal.max()
        dropped = raw_arg[cal[raw_arg] < cal_max - VIOLATION_TOL]
        if dropped.size:
            violations += 1
            if witness is None:
                i = int(dropped[0])
                witness = (n - 1, i, float(scores[i]), float(cal[i]), float(cal_max))
    return InvarianceReport(n_trials=n, violations=violations, witness=witness)


def check_threshold_graph(model: CalibrationModel, scores, tau: float) -> InvarianceReport:
    """No edge of the raw threshold graph may vanish at the mapped threshold.

    Edges are unordered pairs (i < j) with score >= tau; after calibration
    the threshold becomes g(tau). ``scores`` must be square and exactly
    symmetric (build it that way).
    """
    s = np.asarray(scores, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ValueError("scores must be a square matrix")
    if not np.array_equal(s, s.T):
        raise ValueError("scores must be symmetric")
    iu = np.triu_indices(s.shape[0], k=1)
    edge_scores = s[iu]
    in_raw = edge_scores >= tau
    cal_tau = apply(model, float(tau))
    cal_scores = apply(model, edge_scores)
    destroyed = in_raw & (cal_scores < cal_tau - VIOLATION_TOL)
    n_bad = int(np.count_nonzero(destroyed))
    witness = None
    if n_bad:
        k = int(np.flatnonzero(destroyed)[0])
        witness = (int(iu[0][k]), int(iu[1][k]), float(edge_scores[k]), float(cal_scores[k]), float(cal_tau))
    return InvarianceReport(n_trials=int(np.count_nonzero(in_raw)), violations=n_bad, witness=witness)


# ---------------------------------------------------------------------------
# Randomized suite (used by the CLI `verify` subcommand)
# ---------------------------------------------------------------------------


def run_suite(model: CalibrationModel, seed: int, trials: int) -> dict[str, InvarianceReport]:
    """Deterministic randomized battery of all three checkers."""
    rng = np.random.Generator(np.random.PCG64(seed))

    raw = rng.uniform(-1.0, 1.0, size=(max(trials, 1), 2))
    ordered = np.column_stack([raw.max(axis=1), raw.min(axis=1)])
    order_rep = check_order_preservation(model, ordered)

    n_sets = max(1, trials // 100)
    sets = [rng.uniform(-1.0, 1.0, size=int(rng.integers(1, 24))) for _ in range(n_sets)]
    nn_rep = check_nn_preservation(model, sets)

    n_graphs = max(1, trials // 1000)
    graph_rep = InvarianceReport(0, 0)
    for _ in range(n_graphs):
        k = int(rng.integers(2, 16))
        half = rng.uniform(-1.0, 1.0, size=(k, k))
        sym = np.triu(half, 1) + np.triu(half, 1).T
        tau = float(rng.uniform(-1.0, 1.0))
        graph_rep = graph_rep.merged_with(check_threshold_graph(model, sym, tau))

    return {"order": order_rep, "nearest_neighbor": nn_rep, "threshold_graph": graph_rep}
