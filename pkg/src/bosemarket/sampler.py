"""Metropolis-Hastings over integer occupancy configurations.

The target law is the normalized multiplicity ``W(config)``.  Moves are
compensated pairs: one agent goes ``a -> b`` and another ``c -> d`` with
``eps_a + eps_c == eps_b + eps_d``, so both N and Y are conserved exactly.

A move template is stored as its net change vector together with the number
of ordered ``(a, b, c, d)`` tuples producing it.  Non-trivial templates move
agents out of ``{a, c}`` and into a disjoint ``{b, d}``, so a template is
valid at ``x`` iff ``x + delta >= 0`` and the tuple count of ``delta`` equals
that of ``-delta``.  The proposal is uniform over valid tuples; the MH ratio is
``W(y)/W(x) * M(x)/M(y)`` with ``M`` the number of valid tuples.

Random numbers come from ``numpy.random.Generator(PCG64(seed))``; the stream
is part of the reproducibility contract.  Replica seeds are
``SeedSequence([seed, replica]).generate_state(1)[0]``.
"""

from __future__ import annotations

import bisect
import csv
import math
from collections import Counter
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Iterator, Optional, TextIO

import numpy as np

from .enumeration import log_weight
from .errors import InfeasibleStart, InvalidParameter, NoValidMove, NonIntegerLevels
from .model import Kind, LevelGrid, Mode, OccupancyVector, as_counts, feasible, to_fraction

N_BATCHES = 32
_BLOCK = 4096


@dataclass(frozen=True)
class ChainSummary:
    mean_occupancies: list
    acceptance_rate: float
    steps: int
    burn_in: int
    standard_errors: list
    seed: int

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ChainSummary":
        return cls(
            [float(v) for v in d["mean_occupancies"]],
            float(d["acceptance_rate"]),
            int(d["steps"]),
            int(d["burn_in"]),
            [float(v) for v in d["standard_errors"]],
            int(d["seed"]),
        )


def _int_levels(grid: LevelGrid) -> tuple[int, ...]:
    if not grid.is_integer:
        raise NonIntegerLevels("the sampler needs integer-valued return levels")
    return tuple(int(e) for e in grid.exact_epsilons)


@lru_cache(maxsize=64)
def move_templates(eps: tuple[int, ...]) -> tuple[tuple[tuple[int, ...], ...], tuple[int, ...]]:
    """Distinct net-change vectors of compensated pair moves and their tuple counts."""
    L = len(eps)
    counts: Counter = Counter()
    for a in range(L):
        for c in range(L):
            for b in range(L):
                for d in range(L):
                    if eps[a] + eps[c] != eps[b] + eps[d]:
                        continue
                    delta = [0] * L
                    delta[a] -= 1
                    delta[c] -= 1
                    delta[b] += 1
                    delta[d] += 1
                    if any(delta):
                        counts[tuple(delta)] += 1
    keys = tuple(sorted(counts))
    return keys, tuple(counts[k] for k in keys)


class _MoveTable:
    def __init__(self, eps):
        self.deltas, self.counts = move_templates(eps)
        self._cache: dict = {}

    def valid(self, x: tuple[int, ...]):
        hit = self._cache.get(x)
        if hit is None:
            idx, cum, total = [], [], 0
            for k, delta in enumerate(self.deltas):
                if all(xi + di >= 0 for xi, di in zip(x, delta)):
                    idx.append(k)
                    total += self.counts[k]
                    cum.append(total)
            hit = (idx, cum, total)
            if len(self._cache) < 1_000_000:
                self._cache[x] = hit
        return hit

    def apply(self, x, k):
        return tuple(xi + di for xi, di in zip(x, self.deltas[k]))


def propose_move(config, grid: LevelGrid, rng: np.random.Generator) -> OccupancyVector:
    """Draw one compensated pair move uniformly over valid ordered tuples."""
    x = as_counts(config)
    table = _MoveTable(_int_levels(grid))
    idx, cum, total = table.valid(x)
    if total == 0:
        raise NoValidMove(f"configuration {x} admits no compensated pair move")
    j = bisect.bisect_right(cum, rng.random() * total)
    return OccupancyVector(table.apply(x, idx[min(j, len(idx) - 1)]), Mode.INTEGER)


def initial_config(grid: LevelGrid, n: int, y) -> tuple[int, ...]:
    """Greedy fill: as many agents as possible on the highest level, then downward."""
    eps = _int_levels(grid)
    yf = to_fraction(y)
    if yf.denominator != 1 or not feasible(grid, n, yf):
        raise InfeasibleStart(f"no integer configuration for N={n}, Y={y}")
    y = int(yf)

    @lru_cache(maxsize=None)
    def reachable(top: int, k: int, r: int) -> bool:
        # levels 0..top can hold k agents carrying exactly r
        if top == 0:
            return r == k * eps[0]
        if not (k * eps[0] <= r <= k * eps[top]):
            return False
        return any(reachable(top - 1, k - t, r - t * eps[top]) for t in range(k + 1)
                   if r - t * eps[top] >= 0)

    counts = [0] * len(eps)
    k, r = n, y
    for i in range(len(eps) - 1, 0, -1):
        for t in range(k, -1, -1):
            if r - t * eps[i] >= 0 and reachable(i - 1, k - t, r - t * eps[i]):
                counts[i] = t
                k -= t
                r -= t * eps[i]
                break
        else:
            raise InfeasibleStart(f"no integer configuration for N={n}, Y={y}")
    if r != k * eps[0]:
        raise InfeasibleStart(f"no integer configuration for N={n}, Y={y}")
    counts[0] = k
    reachable.cache_clear()
    return tuple(counts)


def replica_seed(seed: int, replica: int) -> int:
    return int(np.random.SeedSequence([seed, replica]).generate_state(1)[0])


def iter_chain(
    grid: LevelGrid, n: int, y, kind, steps: int, seed: int
) -> Iterator[tuple[tuple[int, ...], bool]]:
    """Yield ``(state, accepted)`` after each of ``steps`` MH steps."""
    kind = Kind.parse(kind)
    if steps < 0:
        raise InvalidParameter(f"steps must be >= 0, got {steps}")
    eps = _int_levels(grid)
    x = initial_config(grid, n, y)
    table = _MoveTable(eps)
    g = grid.g
    logw_cache: dict = {}

    def logw(state):
        v = logw_cache.get(state)
        if v is None:
            v = log_weight(state, g, kind)
            if len(logw_cache) < 1_000_000:
                logw_cache[state] = v
        return v

    rng = np.random.Generator(np.random.PCG64(seed))
    done = 0
    while done < steps:
        block = rng.random((min(_BLOCK, steps - done), 2))
        for u_move, u_acc in block:
            idx, cum, total = table.valid(x)
            if total == 0:
                yield x, False
                continue
            j = bisect.bisect_right(cum, u_move * total)
            x_new = table.apply(x, idx[min(j, len(idx) - 1)])
            total_new = table.valid(x_new)[2]
            log_ratio = logw(x_new) - logw(x) + math.log(total) - math.log(total_new)
            if log_ratio >= 0 or u_acc < math.exp(log_ratio):
                x = x_new
                yield x, True
            else:
                yield x, False
        done += len(block)


def batch_means_se(samples: np.ndarray, n_batches: int = N_BATCHES) -> np.ndarray:
    """Batch-means standard error of the column means."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = samples[:, None]
    size = samples.shape[0] // n_batches
    if size < 1:
        return np.zeros(samples.shape[1])
    batches = samples[: size * n_batches].reshape(n_batches, size, -1).mean(axis=1)
    return np.sqrt(batches.var(axis=0, ddof=1) / n_batches)


def run_chain(
    grid: LevelGrid,
    n: int,
    y,
    kind,
    steps: int,
    burn_in: Optional[int] = None,
    seed: int = 0,
    trace: Optional[TextIO] = None,
) -> ChainSummary:
    """Run one chain and summarise the post-burn-in occupancies.

    ``burn_in`` defaults to ``steps // 10``.  When ``trace`` is given, each
    step is written to it as a CSV row ``step,accepted,n_0,...``.
    """
    if burn_in is None:
        burn_in = steps // 10
    if not (steps > burn_in >= 0):
        raise InvalidParameter(f"need steps > burn_in >= 0, got steps={steps}, burn_in={burn_in}")
    L = len(grid)
    kept = np.empty((steps - burn_in, L), dtype=np.int64)
    accepted = 0
    writer = None
    if trace is not None:
        writer = csv.writer(trace, lineterminator="\n")
        writer.writerow(["step", "accepted"] + [f"n_{i}" for i in range(L)])
    for step, (x, acc) in enumerate(iter_chain(grid, n, y, kind, steps, seed)):
        accepted += acc
        if step >= burn_in:
            kept[step - burn_in] = x
        if writer is not None:
            writer.writerow([step, int(acc), *x])
    # integer column sums keep the conservation laws exact up to one division
    means = [int(s) / kept.shape[0] for s in kept.sum(axis=0)]
    return ChainSummary(
        means,
        accepted / steps,
        steps,
        burn_in,
        batch_means_se(kept).tolist(),
        seed,
    )


def config_frequencies(
    grid: LevelGrid, n: int, y, kind, steps: int, burn_in: Optional[int] = None, seed: int = 0
) -> dict[tuple[int, ...], float]:
    """Empirical post-burn-in configuration law of one chain."""
    if burn_in is None:
        burn_in = steps // 10
    counter: Counter = Counter()
    for step, (x, _) in enumerate(iter_chain(grid, n, y, kind, steps, seed)):
        if step >= burn_in:
            counter[x] += 1
    total = steps - burn_in
    return {k: v / total for k, v in sorted(counter.items())}


def run_replicas(
    grid: LevelGrid, n: int, y, kind, steps: int, replicas: int,
    burn_in: Optional[int] = None, seed: int = 0,
) -> list[ChainSummary]:
    """Independent chains seeded by :func:`replica_seed`, in replica order."""
    return [
        run_chain(grid, n, y, kind, steps, burn_in, replica_seed(seed, r))
        for r in range(replicas)
    ]


def pool_means(summaries: list[ChainSummary]) -> list[float]:
    """Sample-size weighted mean occupancies of several chains."""
    weights = [s.steps - s.burn_in for s in summaries]
    total = sum(weights)
    L = len(summaries[0].mean_occupancies)
    return [
        sum(w * s.mean_occupancies[i] for w, s in zip(weights, summaries)) / total
        for i in range(L)
    ]
