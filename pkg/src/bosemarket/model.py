"""Core market types: return-level grids, constraints and occupancy vectors."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from numbers import Number
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    Infeasible,
    InvalidParameter,
    NegativeEpsilon,
    NonMonotoneLevels,
    NonPositiveDegeneracy,
    TooFewLevels,
)

#: absolute tolerance for real-valued feasibility comparisons
FEASIBILITY_TOL = 1e-12


class Kind(enum.Enum):
    """Occupancy statistics of the market."""

    BOSE_EINSTEIN = "be"
    BOLTZMANN = "boltzmann"

    @classmethod
    def parse(cls, value: "Kind | str") -> "Kind":
        if isinstance(value, Kind):
            return value
        key = str(value).strip().lower().replace("_", "-")
        aliases = {
            "be": cls.BOSE_EINSTEIN,
            "bose-einstein": cls.BOSE_EINSTEIN,
            "boseeinstein": cls.BOSE_EINSTEIN,
            "boltzmann": cls.BOLTZMANN,
            "mb": cls.BOLTZMANN,
            "maxwell-boltzmann": cls.BOLTZMANN,
        }
        try:
            return aliases[key]
        except KeyError:
            raise InvalidParameter(
                f"unknown statistics kind {value!r}; use 'be' or 'boltzmann'"
            ) from None


class Mode(enum.Enum):
    INTEGER = "integer"
    CONTINUOUS = "continuous"


def to_fraction(x) -> Fraction:
    """Exact conversion; floats go through their shortest decimal repr."""
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Decimal)):
        return Fraction(x)
    if isinstance(x, float):
        if not np.isfinite(x):
            raise ValueError(f"non-finite value {x!r}")
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, Number):
        return Fraction(repr(float(x)))
    raise TypeError(f"cannot interpret {x!r} as a number")


@dataclass(frozen=True)
class Level:
    epsilon: Fraction
    g: int


@dataclass(frozen=True)
class LevelGrid:
    """Finite ladder of return levels with their degeneracies.

    Build through :func:`validate_grid`; the constructor trusts its input.
    """

    levels: tuple[Level, ...]

    def __len__(self) -> int:
        return len(self.levels)

    @property
    def has_ground(self) -> bool:
        return self.levels[0].epsilon == 0

    @property
    def epsilons(self) -> np.ndarray:
        return np.array([float(lv.epsilon) for lv in self.levels])

    @property
    def degeneracies(self) -> np.ndarray:
        return np.array([lv.g for lv in self.levels], dtype=float)

    @property
    def exact_epsilons(self) -> tuple[Fraction, ...]:
        return tuple(lv.epsilon for lv in self.levels)

    @property
    def g(self) -> tuple[int, ...]:
        return tuple(lv.g for lv in self.levels)

    @property
    def eps_min(self) -> Fraction:
        return self.levels[0].epsilon

    @property
    def eps_max(self) -> Fraction:
        return self.levels[-1].epsilon

    @property
    def is_integer(self) -> bool:
        return all(lv.epsilon.denominator == 1 for lv in self.levels)

    def scaled(self, factor: int) -> "LevelGrid":
        """Same levels with every degeneracy multiplied by ``factor``."""
        return validate_grid([(lv.epsilon, lv.g * factor) for lv in self.levels])

    def as_raw(self) -> list[tuple[Fraction, int]]:
        return [(lv.epsilon, lv.g) for lv in self.levels]


def validate_grid(raw_levels: Iterable) -> LevelGrid:
    """Check raw ``(epsilon, g)`` pairs and return a :class:`LevelGrid`.

    Also accepts :class:`Level` objects or an existing grid, so validating a
    valid grid gives back an equal grid.
    """
    if isinstance(raw_levels, LevelGrid):
        raw_levels = raw_levels.as_raw()
    items = []
    for i, item in enumerate(raw_levels):
        if isinstance(item, Level):
            eps, g = item.epsilon, item.g
        else:
            eps, g = item
        try:
            eps = to_fraction(eps)
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise InvalidParameter(f"level {i}: bad epsilon {eps!r} ({exc})") from None
        if isinstance(g, bool) or not isinstance(g, (int, np.integer)):
            if isinstance(g, float) and g.is_integer():
                g = int(g)
            else:
                raise NonPositiveDegeneracy(f"level {i}: degeneracy must be an integer, got {g!r}")
        g = int(g)
        if eps < 0:
            raise NegativeEpsilon(f"level {i}: epsilon {eps} is negative")
        if g < 1:
            raise NonPositiveDegeneracy(f"level {i}: degeneracy {g} < 1")
        items.append(Level(eps, g))
    if len(items) < 2:
        raise TooFewLevels(f"need at least 2 levels, got {len(items)}")
    for i in range(1, len(items)):
        if items[i].epsilon <= items[i - 1].epsilon:
            raise NonMonotoneLevels(
                f"level {i}: epsilon {items[i].epsilon} does not exceed "
                f"level {i - 1} epsilon {items[i - 1].epsilon}"
            )
    return LevelGrid(tuple(items))


def feasible(grid: LevelGrid, n: int, y) -> bool:
    """True iff ``n`` agents can carry total return ``y`` on ``grid``."""
    try:
        yf = to_fraction(y)
    except (TypeError, ValueError):
        return False
    if n < 0 or yf < 0:
        return False
    tol = Fraction(FEASIBILITY_TOL)
    if n == 0:
        return abs(yf) <= tol
    return n * grid.eps_min - tol <= yf <= n * grid.eps_max + tol


@dataclass(frozen=True)
class MarketConstraints:
    n_agents: int
    total_return: Fraction
    kind: Kind = Kind.BOSE_EINSTEIN

    def __post_init__(self):
        if isinstance(self.n_agents, bool) or int(self.n_agents) != self.n_agents:
            raise InvalidParameter(f"n_agents must be an integer, got {self.n_agents!r}")
        object.__setattr__(self, "n_agents", int(self.n_agents))
        object.__setattr__(self, "total_return", to_fraction(self.total_return))
        object.__setattr__(self, "kind", Kind.parse(self.kind))
        if self.n_agents < 0:
            raise InvalidParameter(f"n_agents must be >= 0, got {self.n_agents}")
        if self.total_return < 0:
            raise InvalidParameter(f"total_return must be >= 0, got {self.total_return}")

    def check(self, grid: LevelGrid) -> None:
        if not feasible(grid, self.n_agents, self.total_return):
            raise Infeasible(
                f"total return {float(self.total_return):g} is not attainable by "
                f"{self.n_agents} agents on levels [{float(grid.eps_min):g}, "
                f"{float(grid.eps_max):g}]"
            )


@dataclass(frozen=True)
class OccupancyVector:
    counts: tuple
    mode: Mode = Mode.INTEGER

    def __post_init__(self):
        object.__setattr__(self, "counts", tuple(self.counts))
        if self.mode is Mode.INTEGER:
            if any(isinstance(c, float) and not c.is_integer() for c in self.counts):
                raise InvalidParameter(f"non-integer count in {self.counts}")
            object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))
        if any(c < 0 for c in self.counts):
            raise InvalidParameter(f"negative count in {self.counts}")

    def __len__(self) -> int:
        return len(self.counts)

    def __iter__(self):
        return iter(self.counts)

    def __getitem__(self, i):
        return self.counts[i]

    def total(self):
        return sum(self.counts)

    def total_return(self, grid: LevelGrid):
        if self.mode is Mode.INTEGER:
            return sum(c * e for c, e in zip(self.counts, grid.exact_epsilons))
        return float(np.dot(self.counts, grid.epsilons))


def check_occupancy(
    vec: OccupancyVector,
    grid: LevelGrid,
    n: int,
    y,
    n_tol: float = 1e-8,
    y_tol: float = 1e-6,
) -> None:
    """Raise :class:`Infeasible` unless ``vec`` conserves ``n`` and ``y``."""
    if len(vec) != len(grid):
        raise InvalidParameter(f"occupancy has {len(vec)} entries for {len(grid)} levels")
    if vec.mode is Mode.INTEGER:
        if vec.total() != n or vec.total_return(grid) != to_fraction(y):
            raise Infeasible(f"integer occupancy {vec.counts} does not conserve N={n}, Y={y}")
        return
    if abs(vec.total() - n) > n_tol * max(1, n):
        raise Infeasible(f"occupancy sum {vec.total()} differs from N={n}")
    if abs(vec.total_return(grid) - float(y)) > y_tol * max(1.0, float(y)):
        raise Infeasible(f"occupancy return {vec.total_return(grid)} differs from Y={y}")


def as_counts(config: "OccupancyVector | Sequence[int]") -> tuple[int, ...]:
    if isinstance(config, OccupancyVector):
        return tuple(int(c) for c in config.counts)
    return tuple(int(c) for c in config)
