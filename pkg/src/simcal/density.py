"""Density views of score distributions: Gaussian KDE curves for the
marginals and a normalized 2-D histogram (optionally smoothed) for the
joint model-vs-human view, with CSV and SVG export."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .metrics import split_scores

DEFAULT_GRID_POINTS = 512
DEFAULT_JOINT_BINS = 50
DEFAULT_SMOOTH_SIGMA = 1.0

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class DensityCurve:
    grid: np.ndarray
    values: np.ndarray
    bandwidth: float
    n_source: int

    def trapezoid_mass(self) -> float:
        return float(np.trapezoid(self.values, self.grid))


@dataclass(frozen=True)
class DensityGrid2D:
    """Cell densities over [0,1]^2; axis 0 = human bins, axis 1 = model bins."""

    x_edges: np.ndarray
    y_edges: np.ndarray
    densities: np.ndarray
    n_source: int
    smoothed: bool = False
    smooth_sigma: float = 0.0

    def total_mass(self) -> float:
        dx = np.diff(self.x_edges)
        dy = np.diff(self.y_edges)
        return float(np.sum(self.densities * dx[:, None] * dy[None, :]))


def silverman_bandwidth(xs) -> float:
    """h = 1.06 * sample std (n-1 denominator) * n^(-1/5)."""
    xs = np.asarray(xs, dtype=np.float64)
    if xs.size < 2:
        raise ValueError("bandwidth needs at least 2 samples")
    if np.ptp(xs) == 0.0:  # constant data; np.std may round to a nonzero epsilon
        raise ValueError("zero variance: bandwidth undefined")
    return 1.06 * float(np.std(xs, ddof=1)) * xs.size ** (-0.2)


def kde_1d(xs, grid, h: float) -> DensityCurve:
    """Gaussian kernel density estimate evaluated on ``grid``."""
    xs = np.asarray(xs, dtype=np.float64)
    grid = np.asarray(grid, dtype=np.float64)
    if xs.size == 0:
        raise ValueError("kde of an empty sample")
    if h <= 0:
        raise ValueError(f"bandwidth must be positive, got {h}")
    if grid.ndim != 1 or (grid.size > 1 and not np.all(np.diff(grid) > 0)):
        raise ValueError("grid must be 1-d and strictly ascending")
    values = np.empty(grid.size, dtype=np.float64)
    # chunk the grid so the (grid x sample) workspace stays small
    chunk = max(1, int(4_000_000 / max(xs.size, 1)))
    for start in range(0, grid.size, chunk):
        g = grid[start : start + chunk]
        z = (g[:, None] - xs[None, :]) / h
        values[start : start + chunk] = np.exp(-0.5 * z * z).sum(axis=1)
    values /= xs.size * h * _SQRT_2PI
    return DensityCurve(grid=grid, values=values, bandwidth=float(h), n_source=int(xs.size))


def default_grid(n_points: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    return np.linspace(0.0, 1.0, n_points)


def joint_histogram(pairs, n_bins_x: int = DEFAULT_JOINT_BINS, n_bins_y: int = DEFAULT_JOINT_BINS) -> DensityGrid2D:
    """Normalized counts on a regular grid over [0,1]^2.

    x is the human score, y the model score clamped into [0,1];
    densities integrate to exactly 1 over the grid.
    """
    m, h = split_scores(pairs)
    if m.size == 0:
        raise ValueError("histogram of an empty pair set")
    if n_bins_x < 1 or n_bins_y < 1:
        raise ValueError("bin counts must be >= 1")
    x = h
    y = np.clip(m, 0.0, 1.0)
    x_edges = np.linspace(0.0, 1.0, n_bins_x + 1)
    y_edges = np.linspace(0.0, 1.0, n_bins_y + 1)
    counts, _, _ = np.histogram2d(x, y, bins=(x_edges, y_edges))
    dx = 1.0 / n_bins_x
    dy = 1.0 / n_bins_y
    densities = counts / (m.size * dx * dy)
    return DensityGrid2D(x_edges=x_edges, y_edges=y_edges, densities=densities, n_source=int(m.size))


def _conserving_smooth_1d(arr: np.ndarray, sigma: float, axis: int) -> np.ndarray:
    """Truncated-Gaussian convolution along one axis.

    Each source cell's truncated kernel is renormalized before scattering,
    so every cell distributes exactly its own mass and the total is
    conserved to rounding.
    """
    radius = int(math.ceil(3.0 * sigma))
    k = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-0.5 * (k / sigma) ** 2)
    kernel /= kernel.sum()

    moved = np.moveaxis(arr, axis, 0)
    n = moved.shape[0]
    # in-range kernel mass reachable from each source index
    reach = np.convolve(np.ones(n), kernel, mode="same")
    scaled = moved / reach[(slice(None),) + (None,) * (moved.ndim - 1)]
    out = np.empty_like(moved)
    for idx in np.ndindex(moved.shape[1:]):
        col = scaled[(slice(None),) + idx]
        out[(slice(None),) + idx] = np.convolve(col, kernel, mode="same")
    return np.moveaxis(out, 0, axis)


def gaussian_smooth(grid: DensityGrid2D, sigma_cells: float) -> DensityGrid2D:
    """Separable Gaussian blur in cell units; sigma 0 is the identity."""
    if sigma_cells < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma_cells}")
    if sigma_cells == 0.0:
        return replace(grid, smoothed=True, smooth_sigma=0.0)
    densities = _conserving_smooth_1d(grid.densities, sigma_cells, axis=0)
    densities = _conserving_smooth_1d(densities, sigma_cells, axis=1)
    return replace(grid, densities=densities, smoothed=True, smooth_sigma=float(sigma_cells))


# ---------------------------------------------------------------------------
# Export: CSV for data, standalone SVG for desk inspection
# ---------------------------------------------------------------------------


def _csv_lines(header: str, rows) -> str:
    return "\n".join([header] + [",".join(repr(float(v)) for v in row) for row in rows]) + "\n"


def curve_to_csv(curve: DensityCurve) -> str:
    return _csv_lines("x,density", zip(curve.grid, curve.values))


def grid_to_csvs(grid: DensityGrid2D) -> dict[str, str]:
    return {
        "matrix": _csv_lines(
            ",".join(f"y{j}" for j in range(grid.densities.shape[1])), grid.densities
        ),
        "x_edges": _csv_lines("x_edge", ((v,) for v in grid.x_edges)),
        "y_edges": _csv_lines("y_edge", ((v,) for v in grid.y_edges)),
    }


_SVG_W, _SVG_H, _SVG_PAD = 640, 440, 50


def _sx(x: float, lo: float, hi: float) -> float:
    return _SVG_PAD + (x - lo) / (hi - lo) * (_SVG_W - 2 * _SVG_PAD)


def _sy(y: float, lo: float, hi: float) -> float:
    return _SVG_H - _SVG_PAD - (y - lo) / (hi - lo) * (_SVG_H - 2 * _SVG_PAD)


def curves_svg(curves: dict[str, DensityCurve], markers: dict[str, float] | None = None) -> str:
    """Overlaid density curves with optional vertical marker lines."""
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]
    x_lo = min(float(c.grid[0]) for c in curves.values())
    x_hi = max(float(c.grid[-1]) for c in curves.values())
    y_hi = max(1e-12, max(float(np.max(c.values)) for c in curves.values()))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_W}" height="{_SVG_H}" '
        f'viewBox="0 0 {_SVG_W} {_SVG_H}">',
        f'<rect width="{_SVG_W}" height="{_SVG_H}" fill="white"/>',
        f'<line x1="{_SVG_PAD}" y1="{_SVG_H - _SVG_PAD}" x2="{_SVG_W - _SVG_PAD}" '
        f'y2="{_SVG_H - _SVG_PAD}" stroke="black"/>',
        f'<line x1="{_SVG_PAD}" y1="{_SVG_PAD}" x2="{_SVG_PAD}" y2="{_SVG_H - _SVG_PAD}" '
        f'stroke="black"/>',
    ]
    for i, (name, curve) in enumerate(curves.items()):
        pts = " ".join(
            f"{_sx(float(x), x_lo, x_hi):.2f},{_sy(float(v), 0.0, y_hi):.2f}"
            for x, v in zip(curve.grid, curve.values)
        )
        color = colors[i % len(colors)]
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        parts.append(
            f'<text x="{_SVG_PAD + 8}" y="{_SVG_PAD + 16 + 16 * i}" fill="{color}" '
            f'font-size="12">{name}</text>'
        )
    for label, x in (markers or {}).items():
        sx = _sx(x, x_lo, x_hi)
        parts.append(
            f'<line x1="{sx:.2f}" y1="{_SVG_PAD}" x2="{sx:.2f}" y2="{_SVG_H - _SVG_PAD}" '
            f'stroke="green" stroke-width="1.5" stroke-dasharray="5,3"/>'
        )
        parts.append(
            f'<text x="{sx + 4:.2f}" y="{_SVG_PAD + 12}" fill="green" font-size="11">'
            f"{label}={x:.3f}</text>"
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def heatmap_svg(grid: DensityGrid2D) -> str:
    """Joint-density heatmap with the y=x diagonal."""
    dens = grid.densities
    peak = float(np.max(dens)) or 1.0
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_W}" height="{_SVG_H}" '
        f'viewBox="0 0 {_SVG_W} {_SVG_H}">',
        f'<rect width="{_SVG_W}" height="{_SVG_H}" fill="white"/>',
    ]
    for i in range(dens.shape[0]):
        for j in range(dens.shape[1]):
            level = dens[i, j] / peak
            if level <= 0.0:
                continue
            shade = int(255 * (1.0 - 0.92 * level ** 0.5))
            x0 = _sx(float(grid.x_edges[i]), 0.0, 1.0)
            x1 = _sx(float(grid.x_edges[i + 1]), 0.0, 1.0)
            y0 = _sy(float(grid.y_edges[j + 1]), 0.0, 1.0)
            y1 = _sy(float(grid.y_edges[j]), 0.0, 1.0)
            parts.append(
                f'<rect x="{x0:.2f}" y="{y0:.2f}" width="{x1 - x0:.2f}" height="{y1 - y0:.2f}" '
                f'fill="rgb({shade},{shade},255)"/>'
            )
    parts.append(
        f'<line x1="{_sx(0, 0, 1):.2f}" y1="{_sy(0, 0, 1):.2f}" x2="{_sx(1, 0, 1):.2f}" '
        f'y2="{_sy(1, 0, 1):.2f}" stroke="black" stroke-dasharray="4,3"/>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def export_plot_data(
    out_dir,
    curves: dict[str, DensityCurve] | None = None,
    grids: dict[str, DensityGrid2D] | None = None,
    markers: dict[str, float] | None = None,
) -> list[Path]:
    """Write curve/grid CSVs plus SVG renderings; returns written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    def emit(name: str, text: str):
        path = out_dir / name
        path.write_text(text, encoding="utf-8")
        written.append(path)

    for name, curve in (curves or {}).items():
        emit(f"{name}_density.csv", curve_to_csv(curve))
    if curves:
        emit("figure_density.svg", curves_svg(curves, markers))
    for name, grid in (grids or {}).items():
        csvs = grid_to_csvs(grid)
        emit(f"{name}_density_matrix.csv", csvs["matrix"])
        emit(f"{name}_x_edges.csv", csvs["x_edges"])
        emit(f"{name}_y_edges.csv", csvs["y_edges"])
        emit(f"figure_{name}_heatmap.svg", heatmap_svg(grid))
    return written
