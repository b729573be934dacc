"""The acceptance battery: ten end-to-end criteria with time budgets.

Shared by the ``suite`` command and the acceptance tests.  Each criterion
returns a :class:`CriterionResult` listing its individual checks and any
estimates that failed to stabilize.
"""
from __future__ import annotations

import itertools
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .classify import Kind, isolated_min_check, stationary_scan
from .config import Settings
from .extreal import NEG_INF, POS_INF, ExtReal, ext_add, ext_min, ext_scale
from .errors import IndeterminateSum
from .funcspace import ScalarField, zero_chain
from .hadamard import (hadamard_derivative, subdiff_interval_1d, taylor_consistency_check)
from .limits import ShellConfig, liminf2
from .oracle import oracle_isolated_order, oracle_local_min
from .report import to_jsonable
from .rivals import dini_derivative, ginchev_derivative, lstability_probe
from .sphere import sphere_sample


@dataclass
class CriterionResult:
    number: int
    title: str
    budget: float
    checks: list = field(default_factory=list)
    unstable: list = field(default_factory=list)
    seconds: float = 0.0
    error: str | None = None

    @property
    def checks_passed(self) -> bool:
        return self.error is None and all(ok for _, ok, _ in self.checks)

    @property
    def passed(self) -> bool:
        return self.checks_passed and self.seconds < self.budget

    def check(self, name: str, ok: bool, detail="") -> bool:
        self.checks.append((name, bool(ok), detail))
        return bool(ok)

    def track(self, label: str, est) -> None:
        if not (est.stabilized or est.divergent_neg):
            self.unstable.append(label)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = ""
        if not self.passed:
            failed = [n for n, ok, _ in self.checks if not ok]
            if self.error:
                extra = f"  error: {self.error}"
            elif failed:
                extra = "  failed: " + ", ".join(failed[:4])
            else:
                extra = "  over time budget"
        return f"criterion {self.number:2d} {status}  {self.title} ({self.seconds:.1f}s / {self.budget:.0f}s){extra}"

    def to_json(self) -> dict:
        return to_jsonable({
            "criterion": self.number,
            "title": self.title,
            "passed": self.passed,
            "seconds": round(self.seconds, 3),
            "budget_seconds": self.budget,
            "checks": [{"name": n, "ok": ok, "detail": d} for n, ok, d in self.checks],
            "unstable": self.unstable,
            "error": self.error,
        })


def _close(value, target, tol) -> bool:
    v = float(value)
    return math.isfinite(v) and abs(v - target) <= tol


def _dirs(field_: ScalarField, settings: Settings, count=None):
    n = count if count is not None else settings.sphere_count
    return sphere_sample(field_.dim, n, seed=settings.shells.seed)


def c1_flat_exponential(settings: Settings, res: CriterionResult) -> None:
    f = settings.corpus.get("neg_flat_exp_1d")
    cfg = settings.shells
    for n in range(1, 6):
        for u in (1.0, -1.0):
            est = hadamard_derivative(f, [0.0], zero_chain(n), n, [u], cfg)
            res.track(f"D^{n}(0;{u:+g})", est)
            res.check(f"D^{n}(0;{u:+g}) = 0", _close(est.value, 0.0, 1e-6), str(est.value))
    for n in range(1, 6):
        iv = subdiff_interval_1d(f, [0.0], zero_chain(n), n, cfg)
        if n % 2:
            ok = iv.is_singleton and abs(float(iv.lo)) <= 1e-6
        else:
            ok = iv.lo == NEG_INF and not iv.lo_closed and iv.hi_closed and abs(float(iv.hi)) <= 1e-6
        res.check(f"subdifferential of order {n}", ok, str(iv))
    rep = oracle_local_min(f, [0.0], radius=0.5, grid_per_axis=1000)
    res.check("oracle: not a local minimum", not rep.is_min, f"worst gap {rep.worst_gap:.3g}")


def c2_frechet_consistency(settings: Settings, res: CriterionResult) -> None:
    for fid, top in (("quad_2d", 2), ("quartic_2d", 4)):
        f = settings.corpus.get(fid)
        U = _dirs(f, settings, 64)
        for x, m in itertools.product(f.points, range(1, top + 1)):
            x = tuple(float(v) for v in x)
            rep = taylor_consistency_check(f, x, m, U, 1e-3, settings.shells)
            if not rep.stabilized:
                res.unstable.append(f"{fid}{x} order {m}")
            res.check(f"{fid} at {x}, order {m}", rep.passed and rep.directions_tested == 64,
                      f"max error {rep.max_error:.3g}")


def c3_isolated_order(settings: Settings, res: CriterionResult) -> None:
    f = settings.corpus.get("pnorm_n4_2d")
    v = isolated_min_check(f, [0.0, 0.0], 4, settings.shells, settings.tolerances, _dirs(f, settings))
    res.check("IsolatedCertified", v.kind is Kind.ISOLATED_CERTIFIED, str(v.kind))
    res.check("sphere-min D^4 within 15% of 12", abs(v.margin - 12.0) <= 0.15 * 12.0, f"{v.margin:.6g}")
    rep = oracle_isolated_order(f, [0.0, 0.0], 4)
    res.check("oracle C within 10% of 0.5", abs(rep.c_hat - 0.5) <= 0.05, f"{rep.c_hat:.6g}")


def c4_flat_2d(settings: Settings, res: CriterionResult) -> None:
    f = settings.corpus.get("flat_exp_2d")
    U = _dirs(f, settings)
    for n in range(2, 7):
        v = isolated_min_check(f, [0.0, 0.0], n, settings.shells, settings.tolerances, U)
        res.check(f"order {n} IsolatedRefuted", v.kind is Kind.ISOLATED_REFUTED, str(v.kind))
    rep = oracle_local_min(f, [0.0, 0.0])
    res.check("oracle: strict local minimum", rep.is_min and rep.is_strict,
              f"is_min={rep.is_min} is_strict={rep.is_strict} ties={rep.ties_resolved}")


def c5_studniarski(settings: Settings, res: CriterionResult) -> None:
    f = settings.corpus.get("studniarski_ext_2d", n=3)
    cfg = settings.shells
    for u in ((1.0, 0.0), (-1.0, 0.0)):
        est = hadamard_derivative(f, [0.0, 0.0], zero_chain(3), 3, u, cfg)
        res.track(f"D^3(0;{u})", est)
        res.check(f"D^3(0;{u}) = 6", _close(est.value, 6.0, 1e-3), str(est.value))
    est = hadamard_derivative(f, [0.0, 0.0], zero_chain(3), 3, (0.0, 1.0), cfg)
    res.check("D^3(0;(0,1)) = +inf", est.value == POS_INF, str(est.value))
    v = isolated_min_check(f, [0.0, 0.0], 3, cfg, settings.tolerances, _dirs(f, settings))
    res.check("IsolatedCertified at order 3", v.kind is Kind.ISOLATED_CERTIFIED, str(v.kind))


def c6_ginchev(settings: Settings, res: CriterionResult) -> None:
    f = settings.corpus.get("quad_2d")
    x, u = np.array([1.0, 0.0]), np.array([1.0, 0.0])
    seq = ginchev_derivative(f, x, u, 2, settings.shells)
    d0, d1, d2 = seq.values
    res.check("D0 = 1", d0 is not None and _close(d0, 1.0, 1e-3), str(d0))
    res.check("D1 = 2", d1 is not None and _close(d1, 2.0, 1e-2), str(d1))
    res.check("D2 divergent to -inf", seq.estimates[2] is not None and seq.estimates[2].divergent_neg, str(d2))
    chain = f.frechet_chain(x, 2)
    est = hadamard_derivative(f, x, chain, 2, u, settings.shells)
    res.track("Hadamard D^2 with gradient chain", est)
    res.check("Hadamard D^2 = 2", _close(est.value, 2.0, 1e-2), str(est.value))


def c7_lstability(settings: Settings, res: CriterionResult) -> None:
    radii = [2.0 ** -k for k in range(2, 9)]
    p = lstability_probe(settings.corpus.get("curve_flat_2d"), [0.0, 0.0], radii, cfg=settings.shells)
    res.check("curve_flat_2d exponent -0.5 +- 0.15", abs(p.fit_exponent + 0.5) <= 0.15, f"{p.fit_exponent:.4f}")
    q = lstability_probe(settings.corpus.get("quad_2d"), [0.0, 0.0], radii, cfg=settings.shells)
    res.check("quad_2d exponent 0 +- 0.05", abs(q.fit_exponent) <= 0.05, f"{q.fit_exponent:.4f}")


def c8_stationary_scan(settings: Settings, res: CriterionResult) -> None:
    f = settings.corpus.get("piecewise_pow_n", n=4)
    cell = 2.0 / 2000
    found = stationary_scan(f, [(-1.0, 1.0)], 2001, 3, settings.shells, settings.tolerances)
    pts = [p.point[0] for p in found]
    res.check("order 3 finds x = 0", len(pts) >= 1 and all(abs(p) <= cell + 1e-12 for p in pts)
              and any(abs(p) <= cell + 1e-12 for p in pts), str(pts))
    found4 = stationary_scan(f, [(-1.0, 1.0)], 2001, 4, settings.shells, settings.tolerances)
    res.check("order 4 finds nothing", not found4, str([p.point for p in found4]))


# -- criterion 9: property battery ------------------------------------------

def _random_ext(rng) -> ExtReal:
    k = rng.integers(0, 10)
    if k == 0:
        return POS_INF
    if k == 1:
        return NEG_INF
    # dyadic rationals keep finite sums exact, so associativity is testable exactly
    return ExtReal.finite(float(rng.integers(-2 ** 20, 2 ** 20)) / 1024.0)


def _ext_laws(rng, res: CriterionResult, trials: int = 2000) -> None:
    bad = []
    for _ in range(trials):
        a, b, c = _random_ext(rng), _random_ext(rng), _random_ext(rng)
        try:
            if ext_add(a, b) != ext_add(b, a):
                bad.append(("commutativity", a, b))
        except IndeterminateSum:
            if not {a, b} == {POS_INF, NEG_INF}:
                bad.append(("spurious indeterminate", a, b))
        try:
            if ext_add(ext_add(a, b), c) != ext_add(a, ext_add(b, c)):
                bad.append(("associativity", a, b, c))
        except IndeterminateSum:
            pass
        if ext_add(a, ExtReal.finite(0.0)) != a:
            bad.append(("identity", a))
        if not (a <= b or b <= a) or ((a <= b and b <= a) and a != b):
            bad.append(("total order", a, b))
        if ext_min(a, b) != ext_min(b, a) or ext_min(a, a) != a or ext_min(a, b) > a:
            bad.append(("min", a, b))
        if a <= b and a.is_finite and b.is_finite and c.is_finite and not ext_add(a, c) <= ext_add(b, c):
            bad.append(("monotone addition", a, b, c))
        s = float(rng.choice([0.5, 2.0, 4.0]))
        if ext_scale(s, a) != (a if not a.is_finite else ExtReal.finite(s * a.value)):
            bad.append(("scaling", a))
    res.check("extended-real algebra laws", not bad, f"{len(bad)} violations" + (f", first {bad[0]}" if bad else ""))


def _suffix_monotone(rng, res: CriterionResult, fixtures: int = 100) -> None:
    cfg = ShellConfig(shells=8, samples_per_shell=32, seed=int(rng.integers(0, 2 ** 31)))
    bad = 0
    for _ in range(fixtures):
        d = int(rng.integers(1, 4))
        u = rng.normal(size=d)
        A = rng.normal(size=(d, d))
        a, b, c, p = rng.normal(), rng.normal(), rng.uniform(0.5, 5.0), rng.uniform(-1.0, 2.0)

        def g(t, U, A=A, a=a, b=b, c=c, p=p, u=u):
            V = U - u
            return a * np.einsum("ij,jk,ik->i", V, A, V) + b * np.sin(c / t) + t ** p

        est = liminf2(g, u, cfg)
        m = np.array(est.shell_minima)
        if not np.all(m[:-1] <= m[1:]):
            bad += 1
    res.check(f"suffix minima nondecreasing on {fixtures} random fixtures", bad == 0, f"{bad} violations")


def _closed_form(settings: Settings):
    for fid in settings.corpus.ids():
        f = settings.corpus.get(fid)
        if f.has_analytic:
            for x in f.points:
                if f.is_smooth_at(np.asarray(x, float)):
                    yield f, np.asarray(x, float)


def _homogeneity(settings: Settings, res: CriterionResult, max_order: int = 3) -> None:
    tol = 10 * settings.shells.plateau_tol
    worst, count = 0.0, 0
    for f, x in _closed_form(settings):
        U = sphere_sample(f.dim, 8 if f.dim > 1 else None, seed=settings.shells.seed)
        for n in range(1, min(max_order, f.analytic_order) + 1):
            chain = f.frechet_chain(x, n)
            for u in U:
                base = float(hadamard_derivative(f, x, chain, n, u, settings.shells).value)
                for tau in (0.5, 2.0):
                    other = float(hadamard_derivative(f, x, chain, n, tau * u, settings.shells).value)
                    count += 1
                    if base == other == math.inf or (math.isinf(base) and other == base):
                        continue
                    worst = max(worst, abs(other - tau ** n * base))
    res.check("degree-n homogeneity (tau = 0.5, 2)", worst <= tol, f"worst {worst:.3g} over {count} pairs")


def _dini_vs_hadamard(settings: Settings, res: CriterionResult) -> None:
    tol = 10 * settings.tolerances.membership
    worst, count = math.inf, 0
    for fid in settings.corpus.ids():
        f = settings.corpus.get(fid)
        U = sphere_sample(f.dim, 16 if f.dim > 1 else None, seed=settings.shells.seed)
        for x in f.points:
            for u in U:
                d = float(dini_derivative(f, x, u, settings.shells).value)
                h = float(hadamard_derivative(f, x, zero_chain(1), 1, u, settings.shells).value)
                count += 1
                gap = d - h if not (d == h) else 0.0
                worst = min(worst, gap)
    res.check("Dini >= Hadamard order 1", worst >= -tol, f"smallest gap {worst:.3g} over {count} pairs")


def _determinism(settings: Settings, res: CriterionResult) -> None:
    def run():
        out = []
        for fid, x, n, u in [("quad_2d", (1.0, 2.0), 1, (0.6, 0.8)),
                             ("pnorm_n4_2d", (0.0, 0.0), 4, (1.0, 0.0)),
                             ("studniarski_ext_2d", (0.0, 0.0), 3, (0.0, 1.0)),
                             ("neg_flat_exp_1d", (0.0,), 2, (1.0,))]:
            f = settings.corpus.get(fid)
            est = hadamard_derivative(f, x, zero_chain(n), n, u, settings.shells)
            out.append({"fn": fid, "value": est.value, "minima": est.shell_minima,
                        "batch": est.batch_minima})
        return json.dumps(to_jsonable(out), sort_keys=True).encode()

    res.check("two runs, identical bytes", run() == run())


def c9_properties(settings: Settings, res: CriterionResult) -> None:
    rng = np.random.default_rng(settings.shells.seed)
    _ext_laws(rng, res)
    _suffix_monotone(rng, res)
    _homogeneity(settings, res)
    _dini_vs_hadamard(settings, res)
    _determinism(settings, res)


def soundness_targets(settings: Settings):
    ids = settings.suite_functions if settings.suite_functions is not None else settings.corpus.ids()
    for fid in ids:
        f = settings.corpus.get(fid)
        for x in f.points:
            yield f, x


def c10_soundness(settings: Settings, res: CriterionResult, max_order: int = 4) -> None:
    violations, certified, refuted_disagree, cases = [], 0, [], 0
    for f, x in soundness_targets(settings):
        U = _dirs(f, settings)
        for n in range(1, max_order + 1):
            cases += 1
            v = isolated_min_check(f, x, n, settings.shells, settings.tolerances, U)
            if v.kind is Kind.ISOLATED_CERTIFIED:
                certified += 1
                rep = oracle_isolated_order(f, x, n)
                if not rep.c_hat > 0:
                    violations.append(f"{f.id}{tuple(x)} n={n} C={rep.c_hat:.3g}")
            elif v.kind is Kind.ISOLATED_REFUTED and math.isfinite(v.margin):
                rep = oracle_isolated_order(f, x, n)
                if rep.c_hat > settings.tolerances.margin_min:
                    refuted_disagree.append(f"{f.id}{tuple(x)} n={n} C={rep.c_hat:.3g}")
    res.check("certified => oracle C > 0", not violations,
              f"{cases} cases, {certified} certified, violations: {violations}")
    res.check("refuted => oracle C <= margin_min", not refuted_disagree, str(refuted_disagree))


CRITERIA = [
    (1, "flat exponential: necessary but not sufficient", 10, c1_flat_exponential),
    (2, "Frechet consistency", 30, c2_frechet_consistency),
    (3, "isolated order-4 characterization", 60, c3_isolated_order),
    (4, "flat 2-D counterexample", 60, c4_flat_2d),
    (5, "extended-valued line example", 30, c5_studniarski),
    (6, "Ginchev divergence", 30, c6_ginchev),
    (7, "l-stability probe", 60, c7_lstability),
    (8, "stationary-point scan", 60, c8_stationary_scan),
    (9, "property battery", 300, c9_properties),
    (10, "soundness sweep", 600, c10_soundness),
]


def run_criterion(number: int, settings: Settings | None = None) -> CriterionResult:
    settings = settings or Settings()
    for num, title, budget, fn in CRITERIA:
        if num == number:
            res = CriterionResult(num, title, float(budget))
            start = time.perf_counter()
            try:
                fn(settings, res)
            finally:
                res.seconds = time.perf_counter() - start
            return res
    raise KeyError(f"no criterion {number}")


def run_battery(settings: Settings | None = None, only=None) -> list:
    numbers = [c[0] for c in CRITERIA] if only is None else list(only)
    return [run_criterion(n, settings) for n in numbers]
