"""Calibration transforms from raw cosine similarity to human-aligned scores.

Seven methods share one model container: an affine map, an isotonic
(pool-adjacent-violators) step function, a logistic curve, polynomials of
degree 2-4, and a Beta-CDF warp. Fitting is deterministic; parametric
nonlinear fits use a coarse grid followed by Levenberg-Marquardt
refinement. All fitted transforms clamp their output to [0, 1].
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import betainc

from .errors import ValidationError
from .metrics import DEFAULT_N_BINS, MetricsReport, evaluate_all, split_scores

MODEL_SCHEMA = "simcal-model v1"

PARAMETRIC_ARITY = {
    "linear": 2,    # a, b for a*x + b
    "sigmoid": 2,   # a, b for 1 / (1 + exp(-a*(x - b)))
    "poly2": 3,     # a0..a2
    "poly3": 4,
    "poly4": 5,
    "beta": 5,      # alpha, beta, input scale, input offset, input epsilon
}

METHODS = ("linear", "isotonic", "sigmoid", "poly2", "poly3", "poly4", "beta")

#: row order of the method comparison table ("original" = untransformed scores)
COMPARISON_ROWS = ("original",) + ("linear", "isotonic", "sigmoid", "beta", "poly2", "poly3", "poly4")


@dataclass(frozen=True)
class CalibrationModel:
    """A fitted score transform; immutable after construction.

    Parametric methods live in ``params``; the isotonic method carries a
    breakpoint table instead (strictly ascending ``breakpoints``,
    non-decreasing ``values``).
    """

    method: str
    params: tuple[float, ...] = ()
    breakpoints: np.ndarray | None = None
    values: np.ndarray | None = None
    clamp_lo: float = 0.0
    clamp_hi: float = 1.0
    train_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        _validate(self)


def _validate(model: CalibrationModel) -> None:
    if model.method == "isotonic":
        bp, vals = model.breakpoints, model.values
        if bp is None or vals is None:
            raise ValueError("isotonic model requires breakpoints and values")
        bp = np.asarray(bp, dtype=np.float64)
        vals = np.asarray(vals, dtype=np.float64)
        if bp.ndim != 1 or bp.shape != vals.shape or bp.size < 1:
            raise ValueError("isotonic table must be two equal-length nonempty vectors")
        if not np.all(np.isfinite(bp)) or not np.all(np.isfinite(vals)):
            raise ValueError("isotonic table contains non-finite entries")
        if bp.size > 1 and not np.all(np.diff(bp) > 0):
            raise ValueError("isotonic breakpoints must be strictly ascending")
        if vals.size > 1 and np.any(np.diff(vals) < 0):
            raise ValueError("isotonic values must be non-decreasing")
    elif model.method in PARAMETRIC_ARITY:
        want = PARAMETRIC_ARITY[model.method]
        if len(model.params) != want:
            raise ValueError(f"{model.method} model needs {want} params, got {len(model.params)}")
        if not all(math.isfinite(p) for p in model.params):
            raise ValueError(f"{model.method} model has non-finite params")
        if model.method == "beta" and (model.params[0] <= 0 or model.params[1] <= 0):
            raise ValueError("beta shapes must be positive")
    else:
        raise ValueError(f"unknown method {model.method!r}")
    if not model.clamp_lo <= model.clamp_hi:
        raise ValueError("clamp_lo must not exceed clamp_hi")


def _digest(m: np.ndarray, h: np.ndarray) -> str:
    payload = np.ascontiguousarray(np.column_stack([m, h]), dtype=np.float64)
    return hashlib.sha256(payload.tobytes()).hexdigest()[:16]


def _base_meta(m: np.ndarray, h: np.ndarray, **extra) -> dict:
    meta = {"n": int(m.size), "digest": _digest(m, h)}
    meta.update(extra)
    return meta


# ---------------------------------------------------------------------------
# Pool-adjacent-violators
# ---------------------------------------------------------------------------


def pava(y, w=None) -> np.ndarray:
    """Weighted least-squares fit of a non-decreasing sequence to ``y``.

    Classic stack form: push each point as a block, merge adjacent blocks
    into their weighted mean while the tail decreases. O(n).
    """
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1 or y.size == 0:
        raise ValueError("pava expects a nonempty 1-d sequence")
    n = y.size
    if w is None:
        w = np.ones(n, dtype=np.float64)
    else:
        w = np.asarray(w, dtype=np.float64)
        if w.shape != y.shape:
            raise ValueError("weights must match y in shape")
        if np.any(w <= 0):
            raise ValueError("weights must be strictly positive")
    val = np.empty(n, dtype=np.float64)
    wt = np.empty(n, dtype=np.float64)
    cnt = np.empty(n, dtype=np.int64)
    top = 0
    for i in range(n):
        val[top] = y[i]
        wt[top] = w[i]
        cnt[top] = 1
        top += 1
        while top > 1 and val[top - 2] > val[top - 1]:
            merged_w = wt[top - 2] + wt[top - 1]
            val[top - 2] = (wt[top - 2] * val[top - 2] + wt[top - 1] * val[top - 1]) / merged_w
            wt[top - 2] = merged_w
            cnt[top - 2] += cnt[top - 1]
            top -= 1
    return np.repeat(val[:top], cnt[:top])


def fit_isotonic(pairs) -> CalibrationModel:
    """Non-decreasing step-function regression of human on model scores.

    Duplicate model scores are merged first (weight = multiplicity,
    value = mean of their human scores); fitted values are clamped to
    [0, 1].
    """
    m, h = split_scores(pairs)
    if m.size < 2:
        raise ValueError("isotonic fit needs at least 2 pairs")
    order = np.argsort(m, kind="stable")
    ms, hs = m[order], h[order]
    bp, inverse, counts = np.unique(ms, return_inverse=True, return_counts=True)
    merged = np.bincount(inverse, weights=hs) / counts
    fitted = pava(merged, counts.astype(np.float64))
    values = np.clip(fitted, 0.0, 1.0)
    n_blocks = 1 + int(np.count_nonzero(np.diff(values))) if values.size else 0
    return CalibrationModel(
        method="isotonic",
        breakpoints=bp,
        values=values,
        train_meta=_base_meta(m, h, n_blocks=n_blocks),
    )


# ---------------------------------------------------------------------------
# Closed-form fits
# ---------------------------------------------------------------------------


def fit_linear(pairs) -> CalibrationModel:
    """Ordinary least squares a*x + b."""
    m, h = split_scores(pairs)
    if m.size < 2:
        raise ValueError("linear fit needs at least 2 pairs")
    dm = m - np.mean(m)
    sxx = float(np.dot(dm, dm))
    if sxx == 0.0:
        raise ValueError("zero model-score variance")
    a = float(np.dot(dm, h - np.mean(h))) / sxx
    b = float(np.mean(h)) - a * float(np.mean(m))
    flags = ["negative_slope"] if a < 0 else []
    return CalibrationModel(
        method="linear", params=(a, b), train_meta=_base_meta(m, h, flags=flags)
    )


def fit_polynomial(pairs, degree: int) -> CalibrationModel:
    """Least-squares polynomial a0 + a1*x + ... of degree 2, 3 or 4."""
    if degree not in (2, 3, 4):
        raise ValueError(f"degree must be 2, 3 or 4, got {degree}")
    m, h = split_scores(pairs)
    if m.size < degree + 1:
        raise ValueError(f"poly{degree} fit needs at least {degree + 1} pairs")
    design = np.vander(m, degree + 1, increasing=True)
    coeffs, _, rank, _ = np.linalg.lstsq(design, h, rcond=None)
    if rank < degree + 1:
        raise ValueError("rank-deficient design")
    return CalibrationModel(
        method=f"poly{degree}", params=tuple(float(c) for c in coeffs),
        train_meta=_base_meta(m, h),
    )


# ---------------------------------------------------------------------------
# Grid + Levenberg-Marquardt fits (sigmoid, beta)
# ---------------------------------------------------------------------------

SIGMOID_GRID_A = (0.1, 50.0, 64)   # geometric
SIGMOID_GRID_B = (-1.0, 1.0, 64)   # linear
BETA_GRID = (0.05, 100.0, 64)      # geometric, both shapes
LM_GTOL = 1e-8


def _stable_sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(np.clip(-z, -709.0, 709.0)))


@dataclass(frozen=True)
class _LMResult:
    p: np.ndarray
    sse: float
    grad_norm: float
    converged: bool
    n_iter: int


def _projected_grad(p, grad, lo, hi):
    """KKT-projected gradient: components pushing past an active bound are
    stationary and do not count against convergence."""
    out = grad.copy()
    out[(p <= lo) & (grad > 0)] = 0.0
    out[(p >= hi) & (grad < 0)] = 0.0
    return out


def _refine_lm(
    res_jac: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]],
    p0: Sequence[float],
    lo: Sequence[float],
    hi: Sequence[float],
    gtol: float = LM_GTOL,
    max_iter: int = 200,
) -> _LMResult:
    """Damped Gauss-Newton on sum-of-squares; deterministic, box-clipped."""
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    p = np.clip(np.asarray(p0, dtype=np.float64), lo, hi)
    r, jac = res_jac(p)
    sse = float(r @ r)
    lam = 1e-3
    n_iter = 0
    grad = 2.0 * (jac.T @ r)
    grad_norm = float(np.linalg.norm(_projected_grad(p, grad, lo, hi)))
    while grad_norm > gtol and n_iter < max_iter:
        hess = jac.T @ jac
        damped = hess + lam * np.diag(np.maximum(np.diag(hess), 1e-12))
        try:
            step = np.linalg.solve(damped, -0.5 * grad)
        except np.linalg.LinAlgError:
            break
        cand = np.clip(p + step, lo, hi)
        r_c, jac_c = res_jac(cand)
        sse_c = float(r_c @ r_c)
        if sse_c < sse:
            p, r, jac, sse = cand, r_c, jac_c, sse_c
            lam = max(lam * 0.3, 1e-12)
            grad = 2.0 * (jac.T @ r)
            grad_norm = float(np.linalg.norm(_projected_grad(p, grad, lo, hi)))
        else:
            lam *= 10.0
            if lam > 1e12:
                break
        n_iter += 1
    return _LMResult(p=p, sse=sse, grad_norm=grad_norm, converged=grad_norm <= gtol, n_iter=n_iter)


def fit_sigmoid(pairs) -> CalibrationModel:
    """Logistic curve 1/(1 + exp(-a*(x - b))), least squares.

    Coarse grid (a geometric in [0.1, 50], b linear in [-1, 1], 64 steps
    each; ties resolve to the smallest a, then smallest b) followed by LM
    refinement to gradient norm <= 1e-8. If refinement fails to converge
    the grid optimum is returned with a ``refinement_not_converged`` flag.
    """
    m, h = split_scores(pairs)
    if m.size < 2:
        raise ValueError("sigmoid fit needs at least 2 pairs")
    grid_a = np.geomspace(*SIGMOID_GRID_A)
    grid_b = np.linspace(*SIGMOID_GRID_B)
    best = (math.inf, 0, 0)
    for ia, a in enumerate(grid_a):
        curves = _stable_sigmoid(a * (m[None, :] - grid_b[:, None]))
        sse_b = np.sum((curves - h[None, :]) ** 2, axis=1)
        ib = int(np.argmin(sse_b))
        if sse_b[ib] < best[0]:
            best = (float(sse_b[ib]), ia, ib)
    sse0, ia, ib = best
    p0 = (float(grid_a[ia]), float(grid_b[ib]))

    def res_jac(p):
        a, b = p
        s = _stable_sigmoid(a * (m - b))
        ds = s * (1.0 - s)
        jac = np.column_stack([ds * (m - b), -a * ds])
        return s - h, jac

    ref = _refine_lm(res_jac, p0, lo=(1e-6, -10.0), hi=(1e6, 10.0))
    if ref.converged and ref.sse <= sse0 + 1e-12:
        params, sse, flags = (float(ref.p[0]), float(ref.p[1])), ref.sse, []
    else:
        params, sse, flags = p0, sse0, ["refinement_not_converged"]
    meta = _base_meta(m, h, sse=sse, grad_norm=ref.grad_norm, flags=flags)
    return CalibrationModel(method="sigmoid", params=params, train_meta=meta)


BETA_INPUT_EPS = 1e-6


def _beta_input(x: np.ndarray, scale: float, offset: float, eps: float) -> np.ndarray:
    return np.clip(scale * x + offset, eps, 1.0 - eps)


def fit_beta(pairs) -> CalibrationModel:
    """Beta-CDF warp of scores mapped onto (0, 1); monotone by construction.

    Same grid-plus-refinement scheme as the sigmoid fit, with both shapes
    geometric in [0.05, 100] and a numerical Jacobian.
    """
    m, h = split_scores(pairs)
    if m.size < 2:
        raise ValueError("beta fit needs at least 2 pairs")
    u = _beta_input(m, 0.5, 0.5, BETA_INPUT_EPS)
    grid = np.geomspace(*BETA_GRID)
    best = (math.inf, 0, 0)
    for ia, a in enumerate(grid):
        curves = betainc(a, grid[:, None], u[None, :])
        sse_b = np.sum((curves - h[None, :]) ** 2, axis=1)
        ib = int(np.argmin(sse_b))
        if sse_b[ib] < best[0]:
            best = (float(sse_b[ib]), ia, ib)
    sse0, ia, ib = best
    p0 = (float(grid[ia]), float(grid[ib]))

    def residual(p):
        return betainc(p[0], p[1], u) - h

    def res_jac(p):
        r = residual(p)
        jac = np.empty((u.size, 2))
        for k in range(2):
            step = 1e-6 * max(1.0, abs(p[k]))
            up = np.array(p, dtype=np.float64)
            dn = np.array(p, dtype=np.float64)
            up[k] += step
            dn[k] = max(dn[k] - step, 1e-12)
            jac[:, k] = (residual(up) - residual(dn)) / (up[k] - dn[k])
        return r, jac

    ref = _refine_lm(res_jac, p0, lo=(1e-4, 1e-4), hi=(1e6, 1e6))
    if ref.converged and ref.sse <= sse0 + 1e-12:
        alpha, beta_shape = float(ref.p[0]), float(ref.p[1])
        sse, flags = ref.sse, []
    else:
        (alpha, beta_shape), sse, flags = p0, sse0, ["refinement_not_converged"]
    meta = _base_meta(m, h, sse=sse, grad_norm=ref.grad_norm, flags=flags)
    return CalibrationModel(
        method="beta",
        params=(alpha, beta_shape, 0.5, 0.5, BETA_INPUT_EPS),
        train_meta=meta,
    )


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def apply(model: CalibrationModel, x):
    """Evaluate a model at ``x`` (scalar or array), clamped to its bounds.

    The isotonic method is a left-anchored step function: the value of
    the greatest breakpoint <= x, the first value below the table, the
    last value above it.
    """
    xs = np.asarray(x, dtype=np.float64)
    scalar = xs.ndim == 0
    xs = np.atleast_1d(xs)
    if model.method == "isotonic":
        idx = np.searchsorted(model.breakpoints, xs, side="right") - 1
        y = np.asarray(model.values, dtype=np.float64)[np.maximum(idx, 0)]
    elif model.method == "linear":
        a, b = model.params
        y = a * xs + b
    elif model.method == "sigmoid":
        a, b = model.params
        y = _stable_sigmoid(a * (xs - b))
    elif model.method.startswith("poly"):
        y = np.zeros_like(xs)
        for c in reversed(model.params):
            y = y * xs + c
    elif model.method == "beta":
        alpha, beta_shape, scale, offset, eps = model.params
        y = betainc(alpha, beta_shape, _beta_input(xs, scale, offset, eps))
    else:  # unreachable: construction validates the method tag
        raise ValueError(f"unknown method {model.method!r}")
    y = np.clip(y, model.clamp_lo, model.clamp_hi)
    return float(y[0]) if scalar else y


def is_monotone(model: CalibrationModel, n_grid: int = 4097) -> bool:
    """Non-decreasing on [-1, 1], checked on a dense grid."""
    ys = apply(model, np.linspace(-1.0, 1.0, n_grid))
    return bool(np.all(np.diff(ys) >= -1e-12))


# ---------------------------------------------------------------------------
# Serialization (JSON, schema "simcal-model v1")
# ---------------------------------------------------------------------------


def serialize(model: CalibrationModel) -> str:
    doc = {
        "schema": MODEL_SCHEMA,
        "method": model.method,
        "params": list(model.params),
        "breakpoints": None if model.breakpoints is None else [float(v) for v in model.breakpoints],
        "values": None if model.values is None else [float(v) for v in model.values],
        "clamp": [model.clamp_lo, model.clamp_hi],
        "train_meta": model.train_meta,
    }
    return json.dumps(doc, indent=2) + "\n"


def deserialize(text: str) -> CalibrationModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"model document is not valid JSON ({exc.msg})") from None
    if not isinstance(doc, dict) or doc.get("schema") != MODEL_SCHEMA:
        raise ValidationError(f"expected schema {MODEL_SCHEMA!r}, got {doc.get('schema')!r}")
    clamp = doc.get("clamp", [0.0, 1.0])
    if not (isinstance(clamp, list) and len(clamp) == 2):
        raise ValidationError("clamp must be a [lo, hi] pair")
    try:
        return CalibrationModel(
            method=doc.get("method", ""),
            params=tuple(float(p) for p in doc.get("params") or ()),
            breakpoints=None if doc.get("breakpoints") is None
            else np.asarray(doc["breakpoints"], dtype=np.float64),
            values=None if doc.get("values") is None
            else np.asarray(doc["values"], dtype=np.float64),
            clamp_lo=float(clamp[0]),
            clamp_hi=float(clamp[1]),
            train_meta=doc.get("train_meta") or {},
        )
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"invalid model document: {exc}") from None


def save_model(model: CalibrationModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize(model))


def load_model(path) -> CalibrationModel:
    with open(path, encoding="utf-8") as fh:
        return deserialize(fh.read())


# ---------------------------------------------------------------------------
# Method comparison
# ---------------------------------------------------------------------------

_FITTERS: dict[str, Callable] = {
    "linear": fit_linear,
    "isotonic": fit_isotonic,
    "sigmoid": fit_sigmoid,
    "beta": fit_beta,
    "poly2": lambda pairs: fit_polynomial(pairs, 2),
    "poly3": lambda pairs: fit_polynomial(pairs, 3),
    "poly4": lambda pairs: fit_polynomial(pairs, 4),
}

_METRIC_COLUMNS = ("rmse", "mbe", "ece", "pearson", "spearman")


def fit(pairs, method: str) -> CalibrationModel:
    """Fit one method by name."""
    try:
        fitter = _FITTERS[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}") from None
    return fitter(pairs)


@dataclass(frozen=True)
class MethodRow:
    method: str
    report: MetricsReport | None
    model: CalibrationModel | None
    error: str | None = None


@dataclass(frozen=True)
class ComparisonTable:
    rows: tuple[MethodRow, ...]
    n_bins: int

    @property
    def baseline(self) -> MetricsReport | None:
        return self.rows[0].report

    def _delta(self, metric: str, row: MethodRow) -> float | None:
        if self.baseline is None or row.report is None:
            return None
        base = getattr(self.baseline, metric)
        if base == 0.0:
            return None
        return 100.0 * (getattr(row.report, metric) - base) / abs(base)

    def to_text(self) -> str:
        header = f"{'method':<10}" + "".join(f"{c:>22}" for c in _METRIC_COLUMNS)
        lines = [header]
        for row in self.rows:
            if row.report is None:
                lines.append(f"{row.method:<10}  failed: {row.error}")
                continue
            cells = []
            for c in _METRIC_COLUMNS:
                value = getattr(row.report, c)
                delta = self._delta(c, row)
                tag = "    --  " if delta is None or row is self.rows[0] else f"{delta:+7.1f}%"
                cells.append(f"{value:12.4f} {tag}")
            lines.append(f"{row.method:<10}" + "".join(f"{c:>22}" for c in cells))
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        cols = ["method"]
        for c in _METRIC_COLUMNS:
            cols += [c, f"{c}_delta_pct"]
        cols.append("error")
        lines = [",".join(cols)]
        for row in self.rows:
            cells = [row.method]
            for c in _METRIC_COLUMNS:
                if row.report is None:
                    cells += ["", ""]
                else:
                    delta = self._delta(c, row)
                    cells += [repr(getattr(row.report, c)), "" if delta is None else repr(delta)]
            cells.append("" if row.error is None else row.error.replace(",", ";"))
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"


def compare_methods(pairs, n_bins: int = DEFAULT_N_BINS) -> ComparisonTable:
    """Fit every method and evaluate each on the training pairs.

    The first row reports the untransformed scores; remaining rows carry
    percentage deltas against it. A failing fit marks its row rather than
    aborting the table.
    """
    m, h = split_scores(pairs)
    if m.size < 5:
        raise ValueError("method comparison needs at least 5 pairs")
    rows: list[MethodRow] = []
    try:
        rows.append(MethodRow("original", evaluate_all(np.column_stack([m, h]), n_bins), None))
    except Exception as exc:
        rows.append(MethodRow("original", None, None, error=str(exc)))
    for method in COMPARISON_ROWS[1:]:
        try:
            model = _FITTERS[method](np.column_stack([m, h]))
            calibrated = apply(model, m)
            report = evaluate_all(np.column_stack([calibrated, h]), n_bins)
            rows.append(MethodRow(method, report, model))
        except Exception as exc:  # keep the table going; the row records why
            rows.append(MethodRow(method, None, None, error=str(exc)))
    return ComparisonTable(rows=tuple(rows), n_bins=n_bins)
