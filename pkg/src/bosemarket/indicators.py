"""Crisis early-warning indicators.

* :func:`omega` - resolving index of investment, ``sum(H_j) / (m * H)``.
  It falls toward zero as investors stop telling stocks apart.
* :func:`marginal_labor_return` - slope of output on labor from a trailing
  window of first differences; near zero signals full employment.
* :func:`assess_crisis` - alert only when both signals fire together.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import (
    BoundsViolation,
    DegenerateDesign,
    EmptyPanel,
    InsufficientData,
    InvalidParameter,
    InvalidThreshold,
)

DEFAULT_WINDOW = 8
DEFAULT_TAU_OMEGA = 0.05
DEFAULT_TAU_RETURN = 0.01
#: smallest singular value ratio accepted for the difference design
DESIGN_RCOND = 1e-10


@dataclass(frozen=True)
class InvestorPanel:
    total_stocks: int
    identified: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "identified", tuple(self.identified))
        if isinstance(self.total_stocks, bool) or int(self.total_stocks) != self.total_stocks:
            raise BoundsViolation(f"total stocks must be an integer, got {self.total_stocks!r}")
        if self.total_stocks < 1:
            raise BoundsViolation(f"total stocks must be >= 1, got {self.total_stocks}")
        if not self.identified:
            raise EmptyPanel("panel has no investors")
        for j, h in enumerate(self.identified):
            if isinstance(h, bool) or int(h) != h:
                raise BoundsViolation(f"investor {j}: identified count {h!r} is not an integer")
            if not 0 <= h <= self.total_stocks:
                raise BoundsViolation(
                    f"investor {j}: identified count {h} outside [0, {self.total_stocks}]"
                )

    @property
    def n_investors(self) -> int:
        return len(self.identified)


def omega_exact(panel: InvestorPanel) -> Fraction:
    return Fraction(sum(panel.identified), panel.n_investors * panel.total_stocks)


def omega(panel: InvestorPanel) -> float:
    return float(omega_exact(panel))


@dataclass(frozen=True)
class ProductionSeries:
    """Rows of ``(t, labor, capital, output)`` with strictly increasing ``t``."""

    rows: tuple[tuple[float, float, float, float], ...]

    def __post_init__(self):
        rows = tuple(tuple(float(v) for v in r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        for i, r in enumerate(rows):
            if len(r) != 4 or not all(np.isfinite(r)):
                raise InvalidParameter(f"row {i}: need four finite values, got {r}")
            t, labor, capital, output = r
            if labor <= 0 or capital <= 0:
                raise BoundsViolation(f"row {i}: labor and capital must be positive")
            if output < 0:
                raise BoundsViolation(f"row {i}: output must be non-negative")
            if i and t <= rows[i - 1][0]:
                raise InvalidParameter(f"row {i}: t={t:g} does not increase")

    @classmethod
    def from_arrays(cls, t, labor, capital, output) -> "ProductionSeries":
        return cls(tuple(zip(t, labor, capital, output)))

    def __len__(self) -> int:
        return len(self.rows)


def marginal_returns(series: ProductionSeries, window: int = DEFAULT_WINDOW) -> tuple[float, float]:
    """Labor and capital slopes of output over the trailing ``window`` differences.

    Regresses ``dY`` on ``(dL, dK)`` without intercept.  Raises
    :class:`DegenerateDesign` instead of returning an estimate when the two
    regressors are collinear or vanish.
    """
    if window < 3:
        raise InsufficientData(f"window must be >= 3, got {window}")
    if len(series) < window + 1:
        raise InsufficientData(f"need {window + 1} rows for window {window}, got {len(series)}")
    data = np.array(series.rows[-(window + 1):])
    diffs = np.diff(data[:, 1:], axis=0)
    X, dy = diffs[:, :2], diffs[:, 2]
    sv = np.linalg.svd(X, compute_uv=False)
    if sv[0] == 0 or sv[-1] <= DESIGN_RCOND * sv[0]:
        raise DegenerateDesign(
            "labor and capital changes are collinear or zero over the window; "
            "no marginal return can be identified"
        )
    coef, *_ = np.linalg.lstsq(X, dy, rcond=None)
    return float(coef[0]), float(coef[1])


def marginal_labor_return(series: ProductionSeries, window: int = DEFAULT_WINDOW) -> float:
    return marginal_returns(series, window)[0]


@dataclass(frozen=True)
class CrisisAssessment:
    omega: float
    marginal_return: float
    tau_omega: float
    tau_return: float
    competition_flag: bool
    employment_flag: bool
    alert: bool

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "CrisisAssessment":
        return cls(**d)


def assess_crisis(
    omega_value: float,
    marginal_return: float,
    tau_omega: float = DEFAULT_TAU_OMEGA,
    tau_return: float = DEFAULT_TAU_RETURN,
) -> CrisisAssessment:
    for name, tau in (("tau_omega", tau_omega), ("tau_return", tau_return)):
        if not (np.isfinite(tau) and tau > 0):
            raise InvalidThreshold(f"{name} must be a positive number, got {tau}")
    if not 0.0 <= omega_value <= 1.0:
        raise BoundsViolation(f"omega must lie in [0, 1], got {omega_value}")
    if not np.isfinite(marginal_return):
        raise BoundsViolation(f"marginal return must be finite, got {marginal_return}")
    competition = omega_value < tau_omega
    employment = abs(marginal_return) < tau_return
    return CrisisAssessment(
        float(omega_value),
        float(marginal_return),
        float(tau_omega),
        float(tau_return),
        competition,
        employment,
        competition and employment,
    )


def panel_from_counts(counts: Sequence[int], total_stocks: int) -> InvestorPanel:
    return InvestorPanel(int(total_stocks), tuple(counts))
