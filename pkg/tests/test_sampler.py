import io

import numpy as np
import pytest

from bosemarket import ChainSummary, propose_move, run_chain, validate_grid
from bosemarket.enumeration import config_distribution, moment_occupancies
from bosemarket.errors import InfeasibleStart, InvalidParameter, NoValidMove
from bosemarket.sampler import (
    batch_means_se,
    config_frequencies,
    initial_config,
    iter_chain,
    move_templates,
    pool_means,
    replica_seed,
    run_replicas,
)


def test_frozen_configuration_has_no_move(grid_g1):
    with pytest.raises(NoValidMove):
        propose_move((2, 0, 0), grid_g1, np.random.default_rng(0))


def test_pair_moves_between_101_and_020(grid_g1):
    rng = np.random.default_rng(0)
    seen = {propose_move((1, 0, 1), grid_g1, rng).counts for _ in range(50)}
    assert seen == {(0, 2, 0)}
    seen = {propose_move((0, 2, 0), grid_g1, rng).counts for _ in range(50)}
    assert seen == {(1, 0, 1)}


def test_templates_conserve_both_constraints():
    eps = (0, 1, 3, 4, 6)
    deltas, counts = move_templates(eps)
    lookup = dict(zip(deltas, counts))
    for delta, c in lookup.items():
        assert sum(delta) == 0
        assert sum(d * e for d, e in zip(delta, eps)) == 0
        assert lookup[tuple(-d for d in delta)] == c


def test_moves_preserve_constraints_along_chain():
    grid = validate_grid([(0, 1), (1, 2), (3, 2), (4, 1)])
    n, y = 9, 14
    for x, _ in iter_chain(grid, n, y, "be", 3000, seed=5):
        assert sum(x) == n
        assert sum(c * e for c, e in zip(x, (0, 1, 3, 4))) == y
        assert min(x) >= 0


def test_initial_config_greedy(grid_g1):
    assert initial_config(grid_g1, 3, 3) == (1, 1, 1)
    assert initial_config(grid_g1, 3, 4) == (1, 0, 2)
    assert initial_config(grid_g1, 2, 2) == (1, 0, 1)
    gappy = validate_grid([(0, 1), (3, 1), (5, 1)])
    # 2 agents, Y=6: 5 alone cannot be completed by a 3 or 0, so 3+3
    assert initial_config(gappy, 2, 6) == (0, 2, 0)
    with pytest.raises(InfeasibleStart):
        initial_config(gappy, 2, 4)


def test_single_config_chain(grid01):
    for kind in ("be", "boltzmann"):
        for seed in (0, 1, 99):
            s = run_chain(grid01, 3, 1, kind, 500, seed=seed)
            assert s.mean_occupancies == [2.0, 1.0]
            assert s.acceptance_rate == 0.0


@pytest.mark.parametrize("kind", ["be", "boltzmann"])
def test_tiny_instance_mean_within_three_se(grid_g2, kind):
    exact = float(moment_occupancies(grid_g2, 2, 2, kind)[1])
    s = run_chain(grid_g2, 2, 2, kind, 100_000, seed=11)
    assert abs(s.mean_occupancies[1] - exact) <= 3 * s.standard_errors[1]


@pytest.mark.parametrize("kind", ["be", "boltzmann"])
def test_detailed_balance_on_larger_instance(kind):
    grid = validate_grid([(0, 2), (1, 1), (2, 3), (3, 1)])
    n, y = 5, 7
    exact = {k: float(v) for k, v in config_distribution(grid, n, y, kind).items()}
    emp = config_frequencies(grid, n, y, kind, 120_000, seed=3)
    tv = 0.5 * sum(abs(emp.get(k, 0.0) - p) for k, p in exact.items())
    assert set(emp) <= set(exact)
    assert tv <= 0.05


def test_seed_determinism(grid_g2):
    a = run_chain(grid_g2, 12, 6, "be", 5000, seed=42)
    b = run_chain(grid_g2, 12, 6, "be", 5000, seed=42)
    c = run_chain(grid_g2, 12, 6, "be", 5000, seed=43)
    assert a == b
    assert a != c


def test_summary_conservation(grid_g2):
    s = run_chain(grid_g2, 12, 6, "boltzmann", 4000, seed=1)
    assert abs(sum(s.mean_occupancies) - 12) <= 1e-9
    assert abs(sum(m * e for m, e in zip(s.mean_occupancies, (0, 1, 2))) - 6) <= 1e-9
    assert s.burn_in == 400
    assert 0 <= s.acceptance_rate <= 1


def test_summary_round_trip(grid_g2):
    s = run_chain(grid_g2, 6, 6, "be", 2000, seed=2)
    assert ChainSummary.from_dict(s.to_dict()) == s
    assert list(s.to_dict()) == ["mean_occupancies", "acceptance_rate", "steps", "burn_in",
                                 "standard_errors", "seed"]


def test_trace_rows(grid_g2):
    buf = io.StringIO()
    run_chain(grid_g2, 2, 2, "be", 50, burn_in=5, seed=0, trace=buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "step,accepted,n_0,n_1,n_2"
    assert len(lines) == 51


def test_bad_chain_lengths(grid_g2):
    with pytest.raises(InvalidParameter):
        run_chain(grid_g2, 2, 2, "be", 10, burn_in=10)
    with pytest.raises(InvalidParameter):
        run_chain(grid_g2, 2, 2, "be", 10, burn_in=-1)


def test_batch_means_on_iid_samples():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(64_000, 1))
    se = batch_means_se(x)[0]
    assert se == pytest.approx(1 / np.sqrt(64_000), rel=0.35)


def test_replicas_independent_and_ordered(grid_g2):
    seeds = [replica_seed(7, r) for r in range(4)]
    assert len(set(seeds)) == 4
    assert seeds == [replica_seed(7, r) for r in range(4)]
    reps = run_replicas(grid_g2, 6, 6, "be", 3000, replicas=3, seed=7)
    assert [r.seed for r in reps] == seeds[:3]
    pooled = pool_means(reps)
    assert pooled == pytest.approx(pool_means(list(reversed(reps))), abs=1e-12)
    assert sum(pooled) == pytest.approx(6, abs=1e-9)
