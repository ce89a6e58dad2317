"""Piecewise-linear tables of the stack/rectifier closed forms over (I, T).

The (I, T) box is split into rectangles and each rectangle into two triangles
following the union-jack pattern: the diagonal of every rectangle passes
through its corner whose two grid indices are both even.  Inside the optimizer
this lets a single binary choose the triangle once the rectangle is fixed.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import elz_phys as ep
from . import rectifier as rc


class PwlToleranceError(ValueError):
    def __init__(self, surface, err, tol, cell):
        self.surface, self.err, self.tol, self.cell = surface, err, tol, cell
        super().__init__(
            f"surface {surface}: certified error {err:.4g} exceeds {tol:.4g}; "
            f"refine around I-cell {cell[0]}, T-cell {cell[1]}")


def main_diagonal(a: int, b: int) -> bool:
    """True when rectangle (a, b) is split along (a, b)-(a+1, b+1)."""
    return (a - b) % 2 == 0


def interpolate(i_grid, t_grid, values, i, t):
    """Evaluate the triangulated interpolant at points (i, t) (arrays allowed)."""
    i = np.atleast_1d(np.asarray(i, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    a = np.clip(np.searchsorted(i_grid, i, side="right") - 1, 0, len(i_grid) - 2)
    b = np.clip(np.searchsorted(t_grid, t, side="right") - 1, 0, len(t_grid) - 2)
    u = (i - i_grid[a]) / (i_grid[a + 1] - i_grid[a])
    v = (t - t_grid[b]) / (t_grid[b + 1] - t_grid[b])
    f00, f10 = values[a, b], values[a + 1, b]
    f01, f11 = values[a, b + 1], values[a + 1, b + 1]
    main = (a - b) % 2 == 0
    # main diagonal: triangles {00,10,11} (u >= v) and {00,01,11}
    lower = f00 + u * (f10 - f00) + v * (f11 - f10)
    upper = f00 + v * (f01 - f00) + u * (f11 - f01)
    res_main = np.where(u >= v, lower, upper)
    # anti diagonal: triangles {00,10,01} (u + v <= 1) and {10,01,11}
    left = f00 + u * (f10 - f00) + v * (f01 - f00)
    right = f11 + (1 - u) * (f01 - f11) + (1 - v) * (f10 - f11)
    res_anti = np.where(u + v <= 1, left, right)
    out = np.where(main, res_main, res_anti)
    return out


def surface_functions(unit, u_ac_pu: float = 1.0):
    """Closed forms tabulated for the optimizer, keyed by surface name."""
    sp_, rp = unit.stack, unit.rectifier
    u_ac = u_ac_pu * rp.u_ac_nominal
    return {
        "p_stack": lambda i, t: ep.stack_power(sp_, i, t),  # kW
        "p_loss": lambda i, t: rc.rectifier_loss(rp, i) + 0.0 * np.asarray(t, dtype=float),  # kW
        "h2": lambda i, t: ep.hydrogen_flow(sp_, i) + 0.0 * np.asarray(t, dtype=float),  # kg/h
        "q": lambda i, t: rc.reactive_power(rp, sp_, u_ac, i, t),  # MVar
    }


@dataclass
class PwlSurface:
    i_grid: np.ndarray
    t_grid: np.ndarray
    values: dict[str, np.ndarray]
    errors: dict[str, float] = field(default_factory=dict)  # max abs error on the dense grid
    rated: dict[str, float] = field(default_factory=dict)
    worst_cell: dict[str, tuple[int, int]] = field(default_factory=dict)

    def __call__(self, name, i, t):
        return interpolate(self.i_grid, self.t_grid, self.values[name], i, t)

    def relative_errors(self) -> dict[str, float]:
        return {k: self.errors[k] / self.rated[k] for k in self.errors}


def default_grid(unit, n_i: int = 7, n_t: int = 5):
    """Uniform current breakpoints; temperature breakpoints denser at the cold end."""
    s = unit.stack
    i_grid = np.linspace(s.i_min, s.i_max, n_i)
    # uniform in 1/T, where the overvoltage coefficients are polynomial
    inv = np.linspace(1.0 / s.t_min, 1.0 / s.t_max, n_t)
    t_grid = np.sort(1.0 / inv)
    t_grid[0], t_grid[-1] = s.t_min, s.t_max
    return i_grid, t_grid


def certify(i_grid, t_grid, values, fn, refine: int = 10):
    """Max abs interpolation error on a ``refine``-times denser grid, and its cell."""
    di = np.concatenate([np.linspace(i_grid[k], i_grid[k + 1], refine + 1)[:-1]
                         for k in range(len(i_grid) - 1)] + [i_grid[-1:]])
    dt = np.concatenate([np.linspace(t_grid[k], t_grid[k + 1], refine + 1)[:-1]
                         for k in range(len(t_grid) - 1)] + [t_grid[-1:]])
    ii, tt = np.meshgrid(di, dt, indexing="ij")
    exact = fn(ii.ravel(), tt.ravel())
    approx = interpolate(i_grid, t_grid, values, ii.ravel(), tt.ravel())
    err = np.abs(exact - approx)
    k = int(np.argmax(err))
    a = min(int(np.searchsorted(i_grid, ii.ravel()[k], side="right") - 1), len(i_grid) - 2)
    b = min(int(np.searchsorted(t_grid, tt.ravel()[k], side="right") - 1), len(t_grid) - 2)
    return float(err[k]), (a, b)


def build_surfaces(unit, grid_spec=(7, 5), tolerance: float | None = 0.005,
                   u_ac_pu: float = 1.0, fns=None, strict: bool = True) -> PwlSurface:
    """Tabulate the closed forms on an (I, T) grid and certify the error.

    ``grid_spec`` is either ``(n_i, n_t)`` or explicit ``(i_grid, t_grid)``.
    ``tolerance`` is relative to each surface's largest magnitude on the grid;
    with ``strict`` a breach raises :class:`PwlToleranceError`.
    """
    if isinstance(grid_spec[0], (int, np.integer)):
        n_i, n_t = grid_spec
        if n_i < 3 or n_t < 3:
            raise ValueError("need at least 3 breakpoints per axis")
        i_grid, t_grid = default_grid(unit, n_i, n_t)
    else:
        i_grid, t_grid = (np.asarray(g, dtype=float) for g in grid_spec)
        if len(i_grid) < 3 or len(t_grid) < 3:
            raise ValueError("need at least 3 breakpoints per axis")
    fns = fns or surface_functions(unit, u_ac_pu)
    ii, tt = np.meshgrid(i_grid, t_grid, indexing="ij")
    surf = PwlSurface(i_grid, t_grid, {})
    for name, fn in fns.items():
        vals = np.asarray(fn(ii.ravel(), tt.ravel()), dtype=float).reshape(ii.shape)
        surf.values[name] = vals
        err, cell = certify(i_grid, t_grid, vals, fn)
        surf.errors[name] = err
        surf.worst_cell[name] = cell
        surf.rated[name] = float(np.max(np.abs(vals))) or 1.0
        if strict and tolerance is not None and err > tolerance * surf.rated[name]:
            raise PwlToleranceError(name, err, tolerance * surf.rated[name], cell)
    return surf
