"""Statistical-equilibrium market model with crisis early-warning indicators."""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    Kind,
    LevelGrid,
    MarketConstraints,
    Mode,
    OccupancyVector,
    feasible,
    validate_grid,
)
from .equilibrium import (  # noqa: E402
    EquilibriumSolution,
    Multipliers,
    SolverConfig,
    condensation_report,
    excited_capacity,
    occupancies_at,
    solve_equilibrium,
    sweep_condensation,
)
from .enumeration import (  # noqa: E402
    enumerate_configs,
    moment_occupancies,
    most_probable,
    multiplicity,
)
from .sampler import ChainSummary, propose_move, run_chain  # noqa: E402
from .indicators import (  # noqa: E402
    CrisisAssessment,
    InvestorPanel,
    ProductionSeries,
    assess_crisis,
    marginal_labor_return,
    omega,
)
