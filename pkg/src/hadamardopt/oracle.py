"""Brute-force ground truth on grids.  Nothing here looks at derivative estimates."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import PointOutsideDomain
from .funcspace import ScalarField
from .sphere import sphere_sample

MIN_SLACK = 1e-12


def _radii(radius: float, count: int) -> np.ndarray:
    # log-spaced so that flat behaviour near the center is resolved
    return np.logspace(math.log10(radius * 1e-6), math.log10(radius), int(count))


def ball_grid(x, radius: float, grid_per_axis: int, angles: int = 512) -> np.ndarray:
    """Punctured grid around ``x``: rays in sampled directions times log-spaced radii.

    For d = 1 uniform offsets are added on both sides.  Grids with ``G`` and
    ``2G - 1`` radii (and ``A``, ``2A`` angles in the plane) are nested.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    d = len(x)
    if not radius > 0:
        raise ValueError("radius must be positive")
    R = _radii(radius, grid_per_axis)
    if d == 1:
        lin = np.linspace(radius / grid_per_axis, radius, int(grid_per_axis))
        s = np.concatenate([R, lin])
        return x + np.concatenate([s, -s])[:, None]
    if d == 2:
        theta = 2.0 * math.pi * np.arange(angles) / angles
        V = np.column_stack([np.cos(theta), np.sin(theta)])
    else:
        V = sphere_sample(d, max(angles, 256))
    return (x[None, None, :] + R[None, :, None] * V[:, None, :]).reshape(-1, d)


def _base(field: ScalarField, x: np.ndarray) -> float:
    fx = float(field(x))
    if not math.isfinite(fx):
        raise PointOutsideDomain(f"{field.id}: f(x) = +inf")
    return fx


@dataclass(frozen=True)
class LocalMinReport:
    is_min: bool
    is_strict: bool
    worst_point: tuple
    worst_gap: float
    points_checked: int
    ties_resolved: int = 0

    def to_json(self) -> dict:
        return {"is_min": self.is_min, "is_strict": self.is_strict,
                "worst_point": list(self.worst_point), "worst_gap": self.worst_gap,
                "points_checked": self.points_checked, "ties_resolved": self.ties_resolved}


def _strictly_above(field: ScalarField, x: np.ndarray, Y: np.ndarray) -> bool:
    """Decide f(y) > f(x) in high precision where float64 returns a tie."""
    fx = field.eval_mp(x)
    if fx is None:
        return False
    return all(field.eval_mp(y) > fx for y in Y)


def oracle_local_min(field: ScalarField, x, radius: float = 0.5, grid_per_axis: int = 256,
                     angles: int = 512) -> LocalMinReport:
    """Is f(y) >= f(x) - 1e-12 on every grid point of the punctured ball?

    Strictness additionally asks f(y) > f(x) everywhere; float ties (for
    instance underflow of flat exponentials) are re-evaluated with mpmath.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    fx = _base(field, x)
    Y = ball_grid(x, radius, grid_per_axis, angles)
    gap = field(Y) - fx
    k = int(np.argmin(gap))
    is_min = bool(gap[k] >= -MIN_SLACK)
    ties = gap <= 0
    strict = bool(gap[k] > 0)
    n_ties = 0
    if is_min and not strict:
        n_ties = int(ties.sum())
        strict = bool(np.all(gap[ties] == 0)) and _strictly_above(field, x, Y[ties])
    return LocalMinReport(is_min, strict, tuple(Y[k].tolist()), float(gap[k]), len(Y), n_ties)


@dataclass(frozen=True)
class IsolatedReport:
    c_hat: float
    argmin_point: tuple
    order: int
    points_checked: int

    def to_json(self) -> dict:
        c = self.c_hat if math.isfinite(self.c_hat) else ("+inf" if self.c_hat > 0 else "-inf")
        return {"c_hat": c, "argmin_point": list(self.argmin_point), "order": self.order,
                "points_checked": self.points_checked}


def oracle_isolated_order(field: ScalarField, x, n: int, radius: float = 0.5,
                          grid_per_axis: int = 256, angles: int = 2048) -> IsolatedReport:
    """C = min over the punctured grid ball of (f(y) - f(x)) / |y - x|^n.

    Points with f(y) = +inf give +inf quotients and are never the argmin.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    fx = _base(field, x)
    Y = ball_grid(x, radius, grid_per_axis, angles)
    fy = field(Y)
    dist = np.linalg.norm(Y - x, axis=1)
    with np.errstate(over="ignore"):
        q = np.where(np.isinf(fy), np.inf, (fy - fx) / dist ** n)
    k = int(np.argmin(q))
    return IsolatedReport(float(q[k]), tuple(Y[k].tolist()), int(n), len(Y))


@dataclass(frozen=True)
class GlobalMinReport:
    min_value: float
    argmin: tuple
    points_checked: int

    def to_json(self) -> dict:
        return {"min_value": self.min_value, "argmin": [list(p) for p in self.argmin],
                "points_checked": self.points_checked}


def box_grid(box, grid_per_axis: int) -> np.ndarray:
    box = np.asarray(box, dtype=float).reshape(-1, 2)
    axes = [np.linspace(lo, hi, int(grid_per_axis)) for lo, hi in box]
    return np.array(list(itertools.product(*axes))) if len(axes) > 1 else axes[0][:, None]


def oracle_global_min(field: ScalarField, box, grid_per_axis: int = 201, tol: float = 1e-9) -> GlobalMinReport:
    """Grid minimum over a box and every grid point within ``tol`` of it."""
    G = box_grid(box, grid_per_axis)
    if G.shape[1] != field.dim:
        raise ValueError(f"box has {G.shape[1]} axes, function has {field.dim} variables")
    fy = field(G)
    m = float(fy.min())
    hits = G[fy <= m + tol]
    return GlobalMinReport(m, tuple(tuple(p) for p in hits.tolist()), len(G))
