"""Optimality verdicts built from zero-chain derivative estimates.

Every "for all u" is discharged on a deterministic sphere sample, and every
positivity certificate is double-checked by a local search for small
quotients near the finest shell, so certificates err on the side of
withholding.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._parallel import map_ordered
from .errors import BadOrder, GridTooCoarse
from .funcspace import ScalarField, zero_chain
from .hadamard import hadamard_derivatives, region_infimum
from .limits import DEFAULT_SHELLS, ShellConfig
from .sphere import sphere_sample


class Kind(str, enum.Enum):
    NECESSARY_HOLD = "NecessaryHold"
    NECESSARY_FAIL = "NecessaryFail"
    STRICT_CERTIFIED = "StrictCertified"
    STRICT_UNKNOWN = "StrictUnknown"
    ISOLATED_CERTIFIED = "IsolatedCertified"
    ISOLATED_REFUTED = "IsolatedRefuted"
    INCONCLUSIVE = "Inconclusive"

    def __str__(self):
        return self.value


NEGATIVE_KINDS = frozenset({Kind.NECESSARY_FAIL, Kind.STRICT_UNKNOWN, Kind.ISOLATED_REFUTED,
                            Kind.INCONCLUSIVE})


@dataclass(frozen=True)
class Tolerances:
    membership: float = 1e-6   # margins above -membership count as >= 0
    vanish: float = 1e-5       # |D| <= vanish counts as zero
    margin_min: float = 1e-4   # D >= margin_min counts as positive
    n_max: int = 6


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class Verdict:
    kind: Kind
    order: int
    margin: float
    witness_direction: tuple | None = None
    evidence: dict = field(default_factory=dict)

    @property
    def negative(self) -> bool:
        return self.kind in NEGATIVE_KINDS

    def to_json(self) -> dict:
        def num(v):
            if isinstance(v, float) and not math.isfinite(v):
                return "+inf" if v > 0 else "-inf"
            return v
        return {
            "kind": str(self.kind),
            "order": self.order,
            "margin": num(float(self.margin)),
            "witness_direction": None if self.witness_direction is None else list(self.witness_direction),
            "evidence": {k: num(v) for k, v in sorted(self.evidence.items())},
        }


class _Table:
    """Lazily computed zero-chain estimates D^n(x; 0, ..., 0; u) on a direction sample."""

    def __init__(self, field_: ScalarField, x, cfg: ShellConfig, directions=None):
        self.field = field_
        self.x = np.asarray(x, dtype=float).reshape(-1)
        self.cfg = cfg
        self.U = (sphere_sample(field_.dim, seed=cfg.seed) if directions is None
                  else np.atleast_2d(np.asarray(directions, dtype=float)))
        self._est = {}

    def estimates(self, n: int, rows=None) -> list:
        rows = range(len(self.U)) if rows is None else rows
        todo = [k for k in rows if (n, k) not in self._est]
        if todo:
            got = hadamard_derivatives(self.field, self.x, zero_chain(n), n, self.U[todo], self.cfg)
            for k, e in zip(todo, got):
                self._est[(n, k)] = e
        return [self._est[(n, k)] for k in rows]

    def values(self, n: int, rows=None) -> np.ndarray:
        return np.array([float(e.value) for e in self.estimates(n, rows)])

    def polished(self, n: int, k: int) -> float:
        est = self.estimates(n, [k])[0]
        return region_infimum(self.field, self.x, zero_chain(n), n, self.U[k], est, self.cfg)

    def direction(self, k: int) -> tuple:
        return tuple(float(c) for c in self.U[k])

    def all_stable(self, n: int) -> bool:
        return all(e.stabilized or e.divergent_neg for e in self.estimates(n))


def _necessary_order(tab: _Table, n: int, tol: Tolerances) -> Verdict:
    D = tab.values(n)
    k = int(np.argmin(D))
    margin = float(D[k])
    ev = {"directions": len(D), "stabilized": tab.all_stable(n)}
    if margin >= -tol.membership:
        return Verdict(Kind.NECESSARY_HOLD, n, margin, None, ev)
    return Verdict(Kind.NECESSARY_FAIL, n, margin, tab.direction(k), ev)


def necessary_conditions(field_: ScalarField, x, n_max: int = 4, cfg: ShellConfig = DEFAULT_SHELLS,
                         tol: Tolerances = DEFAULT_TOLERANCES, directions=None, stop_at_fail=False) -> list:
    """Check D^n(x; 0, ..., 0; u) >= 0 on the direction sample for n = 1..n_max."""
    if n_max < 1:
        raise BadOrder("n_max must be positive")
    tab = _Table(field_, x, cfg, directions)
    out = []
    for n in range(1, n_max + 1):
        v = _necessary_order(tab, n, tol)
        out.append(v)
        if stop_at_fail and v.kind is Kind.NECESSARY_FAIL:
            break
    return out


def strict_min_certificate(field_: ScalarField, x, n_max: int | None = None,
                           cfg: ShellConfig = DEFAULT_SHELLS, tol: Tolerances = DEFAULT_TOLERANCES,
                           directions=None) -> Verdict:
    """Certify a strict local minimum direction by direction.

    A direction is settled at the first order whose derivative is positive
    (at least margin_min, also after local search) provided every lower order
    vanished there.  Directions still open after n_max, or with a lower order
    that is neither zero nor positive, leave the verdict StrictUnknown.
    """
    n_max = tol.n_max if n_max is None else n_max
    tab = _Table(field_, x, cfg, directions)
    open_rows = list(range(len(tab.U)))
    settled = {}
    margins = {}
    for n in range(1, n_max + 1):
        if not open_rows:
            break
        D = tab.values(n, open_rows)
        still = []
        for k, d in zip(open_rows, D):
            if d >= tol.margin_min:
                inf = tab.polished(n, k)
                if inf >= tol.margin_min:
                    settled[k] = n
                    margins[k] = min(d, inf)
                    continue
                return Verdict(Kind.STRICT_UNKNOWN, n, float(inf), tab.direction(k),
                               {"reason": "positive estimate undercut by local search", "estimate": float(d)})
            if abs(d) <= tol.vanish:
                still.append(k)
                continue
            return Verdict(Kind.STRICT_UNKNOWN, n, float(d), tab.direction(k),
                           {"reason": "derivative neither zero nor positive"})
        open_rows = still
    if open_rows:
        k = open_rows[0]
        return Verdict(Kind.STRICT_UNKNOWN, n_max, 0.0, tab.direction(k),
                       {"reason": "no positive order up to n_max", "open_directions": len(open_rows)})
    k = min(margins, key=margins.get)
    orders = list(settled.values())
    return Verdict(Kind.STRICT_CERTIFIED, max(orders), float(margins[k]), None,
                   {"directions": len(tab.U), "min_order": min(orders), "max_order": max(orders),
                    "weakest_direction_order": settled[k]})


def isolated_min_check(field_: ScalarField, x, n: int, cfg: ShellConfig = DEFAULT_SHELLS,
                       tol: Tolerances = DEFAULT_TOLERANCES, directions=None) -> Verdict:
    """Isolated minimizer of order n: lower orders nonnegative and D^n bounded away from 0.

    Refuted when a lower order is negative somewhere, or when D^n (or the
    smallest quotient found by local search) drops to ``membership`` or below.
    """
    if n < 1:
        raise BadOrder("order must be positive")
    tab = _Table(field_, x, cfg, directions)
    for k in range(1, n):
        v = _necessary_order(tab, k, tol)
        if v.kind is Kind.NECESSARY_FAIL:
            return Verdict(Kind.ISOLATED_REFUTED, n, v.margin, v.witness_direction,
                           {"failing_order": k})
    D = tab.values(n)
    k = int(np.argmin(D))
    margin = float(D[k])
    ev = {"directions": len(D), "stabilized": tab.all_stable(n)}
    if margin <= tol.membership:
        return Verdict(Kind.ISOLATED_REFUTED, n, margin, tab.direction(k), ev)
    if margin < tol.margin_min:
        return Verdict(Kind.INCONCLUSIVE, n, margin, tab.direction(k), ev)
    polished = map_ordered(lambda j: tab.polished(n, j), range(len(D)))
    j = int(np.argmin(polished))
    ev["polished_min"] = float(polished[j])
    if polished[j] <= tol.membership:
        return Verdict(Kind.ISOLATED_REFUTED, n, float(polished[j]), tab.direction(j), ev)
    if polished[j] < tol.margin_min:
        return Verdict(Kind.INCONCLUSIVE, n, float(polished[j]), tab.direction(j), ev)
    return Verdict(Kind.ISOLATED_CERTIFIED, n, margin, None, ev)


@dataclass(frozen=True)
class StationaryPoint:
    point: tuple
    verdicts: tuple

    def to_json(self) -> dict:
        return {"point": list(self.point), "verdicts": [v.to_json() for v in self.verdicts]}


def stationary_scan(field_: ScalarField, box, grid_per_axis: int, n: int,
                    cfg: ShellConfig = DEFAULT_SHELLS, tol: Tolerances = DEFAULT_TOLERANCES,
                    directions=None) -> list:
    """Grid points of ``box`` where the zero-chain necessary conditions hold through order n.

    Warns with GridTooCoarse when more than a quarter of adjacent grid pairs
    disagree, which means the grid cannot resolve the stationary set.
    """
    from .oracle import box_grid

    if field_.dim > 2:
        raise ValueError("exhaustive scans are limited to one or two variables")
    G = box_grid(box, grid_per_axis)
    if G.shape[1] != field_.dim:
        raise ValueError(f"box has {G.shape[1]} axes, function has {field_.dim} variables")

    def check(p):
        vs = necessary_conditions(field_, p, n, cfg, tol, directions, stop_at_fail=True)
        return vs if all(v.kind is Kind.NECESSARY_HOLD for v in vs) and len(vs) == n else None

    results = map_ordered(check, G)
    ok = np.array([r is not None for r in results]).reshape([grid_per_axis] * field_.dim)
    flips = pairs = 0
    for axis in range(ok.ndim):
        diff = np.diff(ok.astype(int), axis=axis)
        flips += int(np.count_nonzero(diff))
        pairs += diff.size
    if pairs and flips > 0.25 * pairs:
        warnings.warn(f"{field_.id}: {flips} of {pairs} adjacent verdicts flip", GridTooCoarse, stacklevel=2)
    return [StationaryPoint(tuple(p.tolist()), tuple(r)) for p, r in zip(G, results) if r is not None]


@dataclass(frozen=True)
class FnClassReport:
    order: int
    applicable_directions: int
    directions_tested: int
    alpha_hat: float
    counterexample: dict | None

    @property
    def member(self) -> bool:
        return self.counterexample is None

    @property
    def vacuous(self) -> bool:
        return self.applicable_directions == 0

    def to_json(self) -> dict:
        a = self.alpha_hat
        return {"order": self.order, "applicable_directions": self.applicable_directions,
                "directions_tested": self.directions_tested,
                "alpha_hat": a if math.isfinite(a) else ("+inf" if a > 0 else "-inf"),
                "counterexample": self.counterexample, "member": self.member, "vacuous": self.vacuous}


def fn_class_probe(field_: ScalarField, x, n: int, cfg: ShellConfig = DEFAULT_SHELLS,
                   tol: Tolerances = DEFAULT_TOLERANCES, directions=None) -> FnClassReport:
    """Sampled evidence for the growth class at order n.

    Directions where every lower zero-chain derivative vanishes must show
    f(x + t u') >= f(x) + alpha t^n nearby with alpha > 0.  alpha is estimated
    as the smallest quotient (f(x + t u') - f(x)) / t^n found near the finest
    shell; a value at or below ``membership`` is reported as a counterexample.
    With no such direction the class condition holds vacuously.
    """
    if n < 1:
        raise BadOrder("order must be positive")
    tab = _Table(field_, x, cfg, directions)
    rows = list(range(len(tab.U)))
    for i in range(1, n):
        D = tab.values(i, rows)
        rows = [k for k, d in zip(rows, D) if abs(d) <= tol.vanish]
        if not rows:
            break
    if not rows:
        return FnClassReport(n, 0, len(tab.U), math.inf, None)
    scale = math.factorial(n)
    alphas = map_ordered(lambda k: tab.polished(n, k) / scale, rows)
    j = int(np.argmin(alphas))
    alpha = float(alphas[j])
    counter = None
    if alpha <= tol.membership:
        counter = {"direction": list(tab.direction(rows[j])), "alpha": alpha if math.isfinite(alpha) else "-inf"}
    return FnClassReport(n, len(rows), len(tab.U), alpha, counter)
