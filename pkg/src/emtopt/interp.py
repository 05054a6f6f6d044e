"""Grid interpolation helpers for component maps.

All lookups are exact at grid nodes and refuse to extrapolate: an
out-of-envelope query raises :class:`EnvelopeError` naming the violated
bound rather than silently returning an extrapolated value.
"""
from __future__ import annotations

import numpy as np

from .errors import EnvelopeError


def check_increasing(grid: np.ndarray, name: str) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise ValueError(f"{name} must be a 1-D grid with at least 2 nodes")
    if not np.all(np.diff(grid) > 0):
        raise ValueError(f"{name} must be strictly increasing")
    return grid


def _bracket(grid: np.ndarray, x):
    """Cell index and fractional position of x within a sorted grid.

    Points exactly on the upper edge fall into the last cell so that
    interpolation at the top node stays exact.
    """
    idx = np.searchsorted(grid, x, side="right") - 1
    idx = np.clip(idx, 0, len(grid) - 2)
    frac = (np.asarray(x, dtype=float) - grid[idx]) / (grid[idx + 1] - grid[idx])
    return idx, frac


def interp_curve(x_grid, y_values, x, name="curve abscissa"):
    """1-D linear interpolation with envelope checking."""
    x_grid = np.asarray(x_grid, dtype=float)
    x = float(x)
    if x < x_grid[0] or x > x_grid[-1]:
        raise EnvelopeError(
            f"{name} {x:g} outside range [{x_grid[0]:g}, {x_grid[-1]:g}]"
        )
    return float(np.interp(x, x_grid, y_values))


def interp_curve_clamped(x_grid, y_values, x):
    """1-D linear interpolation, clamped to the end values outside the grid."""
    return float(np.interp(float(x), np.asarray(x_grid, dtype=float), y_values))


def bilinear(x_grid, y_grid, table, x, y, x_name="x", y_name="y"):
    """Bilinear interpolation of ``table[i, j]`` over (x_grid[i], y_grid[j]).

    Raises :class:`EnvelopeError` for queries outside the grid hull.
    """
    x_grid = np.asarray(x_grid, dtype=float)
    y_grid = np.asarray(y_grid, dtype=float)
    x = float(x)
    y = float(y)
    if x < x_grid[0] or x > x_grid[-1]:
        raise EnvelopeError(
            f"{x_name} {x:g} outside grid [{x_grid[0]:g}, {x_grid[-1]:g}]"
        )
    if y < y_grid[0] or y > y_grid[-1]:
        raise EnvelopeError(
            f"{y_name} {y:g} outside grid [{y_grid[0]:g}, {y_grid[-1]:g}]"
        )
    return float(_bilinear_unchecked(x_grid, y_grid, table, x, y))


def bilinear_masked(x_grid, y_grid, table, x, y):
    """Vectorized bilinear lookup returning ``(values, inside_mask)``.

    Outside points are evaluated at the clipped position; callers must
    discard them via the mask.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    inside = (x >= x_grid[0]) & (x <= x_grid[-1]) & (y >= y_grid[0]) & (y <= y_grid[-1])
    xc = np.clip(x, x_grid[0], x_grid[-1])
    yc = np.clip(y, y_grid[0], y_grid[-1])
    return _bilinear_unchecked(x_grid, y_grid, table, xc, yc), inside


def _bilinear_unchecked(x_grid, y_grid, table, x, y):
    table = np.asarray(table, dtype=float)
    i, tx = _bracket(x_grid, x)
    j, ty = _bracket(y_grid, y)
    c00 = table[i, j]
    c10 = table[i + 1, j]
    c01 = table[i, j + 1]
    c11 = table[i + 1, j + 1]
    return (
        c00 * (1.0 - tx) * (1.0 - ty)
        + c10 * tx * (1.0 - ty)
        + c01 * (1.0 - tx) * ty
        + c11 * tx * ty
    )
