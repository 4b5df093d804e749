"""Most-probable continuous occupancies and zero-output condensation.

Bose-Einstein occupancies ``n_i = g_i / (exp(alpha + beta*eps_i) - 1)`` and
Boltzmann occupancies ``n_i = g_i * exp(-alpha - beta*eps_i)`` are fitted to
the two conservation constraints (agent count ``N`` and total return ``Y``).

The BE solve is nested one-dimensional bracketing: for fixed ``beta`` the
level sum is strictly decreasing in ``alpha`` and is matched to ``N`` by
bisection; the total return of that ``N``-matched vector is strictly
decreasing in ``beta`` and is matched to ``Y`` by a bracketed Illinois
iteration.  The Boltzmann solve reduces to the mean-return equation in
``beta`` alone, with ``alpha`` in closed form.

Exponents are always evaluated relative to a reference level (the lowest for
``beta >= 0``, the highest otherwise) so that the inner unknown is the
positive offset ``delta = alpha + beta*eps_ref``; that keeps every BE
denominator positive by construction and avoids overflow at large ``|beta|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

from .errors import (
    DomainViolation,
    InvalidParameter,
    MarketError,
    NoConvergence,
    NoGroundLevel,
)
from .model import (
    FEASIBILITY_TOL,
    Kind,
    LevelGrid,
    MarketConstraints,
    Mode,
    OccupancyVector,
    to_fraction,
)

_EXP_CUTOFF = 700.0


@dataclass(frozen=True)
class Multipliers:
    alpha: float
    beta: float


@dataclass(frozen=True)
class SolverConfig:
    max_outer: int = 200
    max_inner: int = 200
    alpha_tol: float = 1e-12
    n_tol: float = 1e-8
    y_tol: float = 1e-6
    condensate_threshold: float = 0.10
    raise_on_failure: bool = True

    def __post_init__(self):
        if self.max_outer < 1 or self.max_inner < 1:
            raise InvalidParameter("iteration caps must be positive")
        if not 0.0 <= self.condensate_threshold <= 1.0:
            raise InvalidParameter(
                f"condensate threshold must lie in [0, 1], got {self.condensate_threshold}"
            )


@dataclass(frozen=True)
class EquilibriumSolution:
    multipliers: Multipliers
    occupancies: OccupancyVector
    residual_n: float
    residual_y: float
    iterations: int
    condensate_fraction: float
    converged: bool
    degenerate: bool = False

    @property
    def alpha(self) -> float:
        return self.multipliers.alpha

    @property
    def beta(self) -> float:
        return self.multipliers.beta

    def to_dict(self) -> dict:
        alpha = None if math.isnan(self.alpha) else self.alpha
        return {
            "alpha": alpha,
            "beta": self.beta,
            "occupancies": [float(c) for c in self.occupancies.counts],
            "residual_n": self.residual_n,
            "residual_y": self.residual_y,
            "iterations": self.iterations,
            "condensate_fraction": self.condensate_fraction,
            "converged": self.converged,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EquilibriumSolution":
        alpha = math.nan if d["alpha"] is None else float(d["alpha"])
        beta = float(d["beta"])
        return cls(
            Multipliers(alpha, beta),
            OccupancyVector(tuple(float(c) for c in d["occupancies"]), Mode.CONTINUOUS),
            float(d["residual_n"]),
            float(d["residual_y"]),
            int(d["iterations"]),
            float(d["condensate_fraction"]),
            bool(d["converged"]),
            degenerate=math.isinf(beta),
        )


# ---------------------------------------------------------------------------
# occupancy forms


def _be_term(g: float, x: float) -> float:
    if x > _EXP_CUTOFF:
        return 0.0
    return g / math.expm1(x)


def occupancies_at(grid: LevelGrid, mult: Multipliers, kind) -> OccupancyVector:
    kind = Kind.parse(kind)
    eps = grid.epsilons.tolist()
    out = []
    for e, g in zip(eps, grid.g):
        x = mult.alpha + mult.beta * e
        if kind is Kind.BOSE_EINSTEIN:
            if not x > 0:
                raise DomainViolation(
                    f"alpha + beta*eps = {x:g} <= 0 at eps={e:g}; BE occupancy undefined"
                )
            out.append(_be_term(g, x))
        else:
            out.append(0.0 if -x < -_EXP_CUTOFF else g * math.exp(-x))
    return OccupancyVector(tuple(out), Mode.CONTINUOUS)


def _shifts(eps: list[float], beta: float) -> tuple[float, list[float]]:
    ref = eps[0] if beta >= 0 else eps[-1]
    return ref, [beta * (e - ref) for e in eps]


def _be_level_sum(g, shifts, delta):
    return sum(_be_term(gi, delta + s) for gi, s in zip(g, shifts))


def _be_offset(g, shifts, n, cfg: SolverConfig) -> tuple[float, int]:
    """Positive offset ``delta`` with sum_i g_i/expm1(delta + s_i) == n.

    Bisection on ``log(delta)``.  The bracket comes from bounding the sum
    between the reference-level terms alone and all degeneracies at zero
    shift.
    """
    g_ref = sum(gi for gi, s in zip(g, shifts) if s == 0.0)
    lo = math.log1p(g_ref / n)
    hi = math.log1p(sum(g) / n)
    it = 0
    while hi - lo > min(cfg.alpha_tol, 1e-13 * hi) and it < cfg.max_inner:
        mid = math.sqrt(lo * hi)
        if mid <= lo or mid >= hi:
            break
        if _be_level_sum(g, shifts, mid) > n:
            lo = mid
        else:
            hi = mid
        it += 1
    return math.sqrt(lo * hi), it


def _illinois(f: Callable[[float], float], a, fa, b, fb, ftol, max_iter):
    """Bracketed root of a decreasing function, ``fa > 0 > fb``."""
    side = 0
    x, fx = (a, fa) if abs(fa) < abs(fb) else (b, fb)
    it = 0
    while it < max_iter:
        if abs(fx) <= ftol:
            break
        if abs(b - a) <= 4e-16 * max(1.0, abs(a), abs(b)):
            break
        x = (a * fb - b * fa) / (fb - fa)
        if not (min(a, b) < x < max(a, b)):
            x = 0.5 * (a + b)
        fx = f(x)
        it += 1
        if fx > 0:
            a, fa = x, fx
            if side == 1:
                fb *= 0.5
            side = 1
        elif fx < 0:
            b, fb = x, fx
            if side == -1:
                fa *= 0.5
            side = -1
        else:
            break
    return x, fx, it


def _bracket_beta(f, scale):
    a, b = -1.0 / scale, 1.0 / scale
    fa, fb = f(a), f(b)
    expansions = 0
    while fa <= 0 and expansions < 128:
        if fa == 0:
            return a, fa, a, fa, expansions
        b, fb = a, fa
        a *= 2.0
        fa = f(a)
        expansions += 1
    while fb >= 0 and expansions < 128:
        if fb == 0:
            return b, fb, b, fb, expansions
        a, fa = b, fb
        b *= 2.0
        fb = f(b)
        expansions += 1
    if fa <= 0 or fb >= 0:
        raise NoConvergence("could not bracket beta")
    return a, fa, b, fb, expansions


# ---------------------------------------------------------------------------
# solver


def _condensate(grid: LevelGrid, counts, n: int) -> float:
    if not grid.has_ground or n <= 0:
        return 0.0
    return min(1.0, max(0.0, float(counts[0]) / n))


def _degenerate(grid: LevelGrid, n: int, at_top: bool) -> EquilibriumSolution:
    counts = [0.0] * len(grid)
    counts[-1 if at_top else 0] = float(n)
    beta = -math.inf if at_top else math.inf
    return EquilibriumSolution(
        Multipliers(math.nan, beta),
        OccupancyVector(tuple(counts), Mode.CONTINUOUS),
        0.0,
        0.0,
        0,
        _condensate(grid, counts, n),
        True,
        degenerate=True,
    )


def solve_equilibrium(
    grid: LevelGrid,
    constraints: MarketConstraints,
    cfg: Optional[SolverConfig] = None,
) -> EquilibriumSolution:
    """Fit the occupancy form of ``constraints.kind`` to ``N`` and ``Y``.

    Boundary totals (``Y == N*eps_min`` or ``Y == N*eps_max``) return the
    degenerate all-bottom / all-top occupancy with ``beta = +/-inf`` and an
    undefined (NaN) ``alpha``.
    """
    cfg = cfg or SolverConfig()
    constraints.check(grid)
    n = constraints.n_agents
    y_exact = constraints.total_return
    tol = to_fraction(FEASIBILITY_TOL)
    if n == 0 or y_exact <= n * grid.eps_min + tol:
        return _degenerate(grid, n, at_top=False)
    if y_exact >= n * grid.eps_max - tol:
        return _degenerate(grid, n, at_top=True)

    y = float(y_exact)
    eps = grid.epsilons.tolist()
    g = [float(gi) for gi in grid.g]
    scale = eps[-1] - eps[0]

    if constraints.kind is Kind.BOSE_EINSTEIN:

        def at_beta(beta):
            ref, shifts = _shifts(eps, beta)
            delta, _ = _be_offset(g, shifts, n, cfg)
            counts = [_be_term(gi, delta + s) for gi, s in zip(g, shifts)]
            return delta - beta * ref, counts

    else:

        def at_beta(beta):
            ref, shifts = _shifts(eps, beta)
            w = [0.0 if s > _EXP_CUTOFF else gi * math.exp(-s) for gi, s in zip(g, shifts)]
            z = sum(w)
            alpha = math.log(z) - beta * ref - math.log(n)
            return alpha, [n * wi / z for wi in w]

    def f(beta):
        _, counts = at_beta(beta)
        return sum(c * e for c, e in zip(counts, eps)) - y

    ftol = 1e-12 * max(1.0, y)
    if abs(f(0.0)) <= ftol:
        beta, it, expansions = 0.0, 1, 0
    else:
        a, fa, b, fb, expansions = _bracket_beta(f, scale)
        beta, _, it = _illinois(f, a, fa, b, fb, ftol, cfg.max_outer)
    alpha, counts = at_beta(beta)

    res_n = sum(counts) - n
    res_y = sum(c * e for c, e in zip(counts, eps)) - y
    converged = abs(res_n) <= cfg.n_tol * max(1, n) and abs(res_y) <= cfg.y_tol * max(1.0, y)
    sol = EquilibriumSolution(
        Multipliers(alpha, beta),
        OccupancyVector(tuple(counts), Mode.CONTINUOUS),
        res_n,
        res_y,
        it + expansions,
        _condensate(grid, counts, n),
        converged,
    )
    if not converged and cfg.raise_on_failure:
        raise NoConvergence(
            f"solver stopped after {sol.iterations} iterations with "
            f"residual_n={res_n:.3e}, residual_y={res_y:.3e}",
            solution=sol,
        )
    return sol


# ---------------------------------------------------------------------------
# condensation diagnostics


def excited_capacity(grid: LevelGrid, beta: float) -> float:
    """Largest agent mass the levels above ground hold as alpha -> 0+."""
    if not grid.has_ground:
        raise NoGroundLevel("excited capacity needs a zero-return level")
    if not beta > 0:
        raise InvalidParameter(f"beta must be positive, got {beta}")
    if math.isinf(beta):
        return 0.0
    return sum(_be_term(g, beta * e) for e, g in zip(grid.epsilons.tolist()[1:], grid.g[1:]))


@dataclass(frozen=True)
class CondensationReport:
    condensate_fraction: float
    alpha: float
    beta: float
    excited_capacity: Optional[float]
    threshold: float
    condensed: bool

    def to_dict(self) -> dict:
        return {
            "condensate_fraction": self.condensate_fraction,
            "alpha": None if math.isnan(self.alpha) else self.alpha,
            "beta": self.beta,
            "excited_capacity": self.excited_capacity,
            "threshold": self.threshold,
            "condensed": self.condensed,
        }


def condensation_report(
    sol: EquilibriumSolution, grid: LevelGrid, cfg: Optional[SolverConfig] = None
) -> CondensationReport:
    cfg = cfg or SolverConfig()
    capacity = None
    if grid.has_ground and sol.beta > 0:
        capacity = excited_capacity(grid, sol.beta)
    return CondensationReport(
        sol.condensate_fraction,
        sol.alpha,
        sol.beta,
        capacity,
        cfg.condensate_threshold,
        sol.condensate_fraction > cfg.condensate_threshold,
    )


@dataclass(frozen=True)
class SweepRow:
    n_agents: int
    condensate_fraction: float
    alpha: float
    beta: float
    converged: bool
    occupancies: tuple = field(default=())
    error: Optional[str] = None

    def to_dict(self) -> dict:
        nan_to_none = lambda v: None if isinstance(v, float) and math.isnan(v) else v
        return {
            "n_agents": self.n_agents,
            "condensate_fraction": nan_to_none(self.condensate_fraction),
            "alpha": nan_to_none(self.alpha),
            "beta": nan_to_none(self.beta),
            "converged": self.converged,
            "error": self.error,
        }


def sweep_condensation(
    grid: LevelGrid,
    y_fixed,
    n_range: Iterable[int],
    kind,
    cfg: Optional[SolverConfig] = None,
) -> list[SweepRow]:
    """Solve at fixed total return for each agent count in ``n_range``.

    Rows are independent; a failing row is kept with ``error`` set.
    """
    cfg = cfg or SolverConfig()
    kind = Kind.parse(kind)
    rows = []
    for n in n_range:
        try:
            sol = solve_equilibrium(grid, MarketConstraints(n, y_fixed, kind), cfg)
        except MarketError as exc:
            sol = getattr(exc, "solution", None)
            if sol is None:
                rows.append(SweepRow(n, math.nan, math.nan, math.nan, False, (), str(exc)))
                continue
            rows.append(
                SweepRow(n, sol.condensate_fraction, sol.alpha, sol.beta, False,
                         sol.occupancies.counts, str(exc))
            )
            continue
        rows.append(
            SweepRow(n, sol.condensate_fraction, sol.alpha, sol.beta, sol.converged,
                     sol.occupancies.counts)
        )
    return rows
