"""Exact enumeration of integer occupancy configurations.

Every configuration with ``sum(n) == N`` and ``sum(n * eps) == Y`` is listed
and weighted by its microstate count:

* Bose-Einstein (indistinguishable firms): ``prod C(n_i + g_i - 1, n_i)``
* Boltzmann (distinguishable firms): ``N! * prod g_i**n_i / n_i!``

Weights are exact Python integers; log weights come from ``lgamma``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .errors import Infeasible, InstanceTooLarge, NonIntegerLevels
from .model import Kind, LevelGrid, Mode, OccupancyVector, as_counts, feasible, to_fraction

DEFAULT_MAX_CONFIGS = 10**7


@dataclass(frozen=True)
class WeightedConfig:
    config: OccupancyVector
    log_weight: float
    exact_weight: int


def _integer_instance(grid: LevelGrid, n: int, y) -> tuple[list[int], int]:
    if not grid.is_integer:
        raise NonIntegerLevels("enumeration needs integer-valued return levels")
    yf = to_fraction(y)
    if yf.denominator != 1:
        raise NonIntegerLevels(f"enumeration needs an integer total return, got {y}")
    if not feasible(grid, n, yf):
        raise Infeasible(f"N={n}, Y={y} is infeasible on this grid")
    return [int(e) for e in grid.exact_epsilons], int(yf)


def iter_configs(grid: LevelGrid, n: int, y) -> Iterator[tuple[int, ...]]:
    """Yield feasible integer configurations in lexicographic order."""
    eps, y = _integer_instance(grid, n, y)
    L = len(eps)
    prefix = [0] * L

    def rec(i: int, k: int, rem: int):
        if i == L - 1:
            if k * eps[i] == rem:
                prefix[i] = k
                yield tuple(prefix)
            return
        # remaining levels i+1.. must hold k - t agents carrying rem - t*eps[i]
        lo_e, hi_e = eps[i + 1], eps[-1]
        for t in range(k + 1):
            kk = k - t
            rr = rem - t * eps[i]
            # slack against both bounds grows with t
            if rr > kk * hi_e:
                break
            if rr < kk * lo_e:
                continue
            prefix[i] = t
            yield from rec(i + 1, kk, rr)
        prefix[i] = 0

    yield from rec(0, n, y)


def enumerate_configs(
    grid: LevelGrid, n: int, y, max_configs: int = DEFAULT_MAX_CONFIGS
) -> list[OccupancyVector]:
    out = []
    for counts in iter_configs(grid, n, y):
        if len(out) >= max_configs:
            raise InstanceTooLarge(f"more than {max_configs} configurations; raise the cap")
        out.append(OccupancyVector(counts, Mode.INTEGER))
    return out


def exact_weight(counts, g, kind: Kind) -> int:
    if kind is Kind.BOSE_EINSTEIN:
        return math.prod(math.comb(c + gi - 1, c) for c, gi in zip(counts, g))
    w = math.factorial(sum(counts)) * math.prod(gi**c for c, gi in zip(counts, g))
    return w // math.prod(math.factorial(c) for c in counts)


def log_weight(counts, g, kind: Kind) -> float:
    lg = math.lgamma
    if kind is Kind.BOSE_EINSTEIN:
        return sum(lg(c + gi) - lg(c + 1) - lg(gi) for c, gi in zip(counts, g))
    return lg(sum(counts) + 1) + sum(c * math.log(gi) - lg(c + 1) for c, gi in zip(counts, g))


def multiplicity(config, grid: LevelGrid, kind) -> WeightedConfig:
    kind = Kind.parse(kind)
    counts = as_counts(config)
    return WeightedConfig(
        OccupancyVector(counts, Mode.INTEGER),
        log_weight(counts, grid.g, kind),
        exact_weight(counts, grid.g, kind),
    )


def weighted_configs(
    grid: LevelGrid, n: int, y, kind, max_configs: int = DEFAULT_MAX_CONFIGS
) -> list[WeightedConfig]:
    kind = Kind.parse(kind)
    return [multiplicity(c, grid, kind) for c in enumerate_configs(grid, n, y, max_configs)]


def most_probable(
    grid: LevelGrid, n: int, y, kind, max_configs: int = DEFAULT_MAX_CONFIGS
) -> list[OccupancyVector]:
    """All configurations of maximal exact weight, lexicographic order."""
    wcs = weighted_configs(grid, n, y, kind, max_configs)
    best = max(wc.exact_weight for wc in wcs)
    return [wc.config for wc in wcs if wc.exact_weight == best]


def config_distribution(
    grid: LevelGrid, n: int, y, kind, max_configs: int = DEFAULT_MAX_CONFIGS
) -> dict[tuple[int, ...], Fraction]:
    """Exact normalized multiplicity law over configurations."""
    wcs = weighted_configs(grid, n, y, kind, max_configs)
    total = sum(wc.exact_weight for wc in wcs)
    return {wc.config.counts: Fraction(wc.exact_weight, total) for wc in wcs}


def moment_occupancies(
    grid: LevelGrid, n: int, y, kind, max_configs: int = DEFAULT_MAX_CONFIGS
) -> list[Fraction]:
    """Exact expected occupancy per level under the multiplicity law."""
    wcs = weighted_configs(grid, n, y, kind, max_configs)
    total = sum(wc.exact_weight for wc in wcs)
    sums = [0] * len(grid)
    for wc in wcs:
        for i, c in enumerate(wc.config.counts):
            sums[i] += wc.exact_weight * c
    return [Fraction(s, total) for s in sums]
