"""
Optimal nonlinear wage tax and prize schedules
Marginal formulas for wages, innovations, mineral discoveries and unregulated
natural monopolies, integrated into total schedules with a cost-reimbursement floor
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from models.distributions import (
    DistributionModel,
    ElasticityProfile,
    WelfareWeightProfile,
    avg_weight_above,
    local_pareto_parameter,
)
from utils.exceptions import (
    AssetaxError,
    DomainError,
    RegimeError,
    ScheduleEvaluationError,
    TailTruncationError,
)
from utils.logger import setup_logger
from utils.numerics import refined_trapezoid

logger = setup_logger(__name__)

# quadrature noise allowed on G-bar before a point counts as out of regime
REGIME_TOL = 1e-9
DEFAULT_FLOOR_MULTIPLIER = 3.0


class ScheduleKind(str, Enum):
    WAGE_TAX = "wage_tax"
    INNOVATION_PRIZE = "innovation_prize"
    MINERAL_PRIZE = "mineral_prize"
    MONOPOLY_PRIZE = "monopoly_prize"

    @property
    def is_prize(self) -> bool:
        return self is not ScheduleKind.WAGE_TAX


@dataclass(frozen=True)
class ScheduleParams:
    kind: ScheduleKind
    distribution: DistributionModel
    weights: WelfareWeightProfile
    elasticity: ElasticityProfile
    floor_multiplier: float = DEFAULT_FLOOR_MULTIPLIER
    creation_cost: float = 0.0

    def __post_init__(self):
        if self.floor_multiplier < 0:
            raise DomainError(f"floor multiplier must be nonnegative, got {self.floor_multiplier}")
        if self.creation_cost < 0:
            raise DomainError(f"creation cost must be nonnegative, got {self.creation_cost}")

    @property
    def junction(self) -> float:
        """Floor-to-formula crossover; wage schedules start at zero."""
        if not self.kind.is_prize:
            return 0.0
        return self.floor_multiplier * self.creation_cost


@dataclass(frozen=True)
class MarginalRate:
    value: float
    gbar: float
    alpha: float
    elasticity: float
    in_regime: bool = True

    def __float__(self) -> float:
        return self.value


def _in_regime(gbar: float) -> bool:
    return gbar <= 1.0 + REGIME_TOL


def wage_tax_rate(gbar: float, alpha: float, e: float) -> float:
    """T' = (1 - G) / (1 - G + alpha e)."""
    numerator = 1.0 - gbar
    denominator = numerator + alpha * e
    if not denominator > 0:
        raise RegimeError(f"wage tax denominator {denominator:.3e} <= 0 (G={gbar}, alpha={alpha}, e={e})")
    return numerator / denominator


def innovation_prize_rate(gbar: float, alpha: float, e: float, gstar: float) -> float:
    """P'_N = alpha e G* / (1 - G + alpha e G*)."""
    numerator = alpha * e * gstar
    denominator = 1.0 - gbar + numerator
    if not denominator > 0:
        raise RegimeError(f"innovation prize denominator {denominator:.3e} <= 0 (G={gbar}, alpha*e*G*={numerator})")
    return numerator / denominator


def discovery_prize_rate(gbar: float, alpha: float, e: float) -> float:
    """
    P' = alpha e / (1 - G + alpha e). Shared by mineral discoveries and
    unregulated natural monopolies: their benefit is public revenue, so no G*.
    """
    numerator = alpha * e
    denominator = 1.0 - gbar + numerator
    if not denominator > 0:
        raise RegimeError(f"discovery prize denominator {denominator:.3e} <= 0 (G={gbar}, alpha*e={numerator})")
    return numerator / denominator


def _schedule_inputs(params: ScheduleParams, x: float) -> Tuple[float, float, float]:
    lower, _ = params.distribution.support()
    point = max(x, lower)
    gbar = avg_weight_above(params.weights, params.distribution, point)
    alpha = local_pareto_parameter(params.distribution, point)
    e = params.elasticity.e_fn(point)
    return gbar, alpha, e


def _marginal(params: ScheduleParams, x: float, formula: Callable[[float, float, float], float]) -> MarginalRate:
    gbar, alpha, e = _schedule_inputs(params, x)
    value = formula(gbar, alpha, e)
    rate = MarginalRate(value=value, gbar=gbar, alpha=alpha, elasticity=e, in_regime=_in_regime(gbar))
    if not rate.in_regime:
        logger.warning(f"{params.kind.value} out of regime at x={x}: G-bar={gbar:.6f} > 1, marginal={value:.6f}")
    return rate


def marginal_wage_tax(params: ScheduleParams, z: float) -> MarginalRate:
    return _marginal(params, z, wage_tax_rate)


def marginal_innovation_prize(params: ScheduleParams, s: float) -> MarginalRate:
    gstar = params.weights.benefit_weight_Gstar
    return _marginal(params, s, lambda g, a, e: innovation_prize_rate(g, a, e, gstar))


def marginal_mineral_prize(params: ScheduleParams, u: float) -> MarginalRate:
    return _marginal(params, u, discovery_prize_rate)


def marginal_monopoly_prize(params: ScheduleParams, v: float) -> MarginalRate:
    return _marginal(params, v, discovery_prize_rate)


MARGINAL_FORMULAS: Dict[ScheduleKind, Callable[[ScheduleParams, float], MarginalRate]] = {
    ScheduleKind.WAGE_TAX: marginal_wage_tax,
    ScheduleKind.INNOVATION_PRIZE: marginal_innovation_prize,
    ScheduleKind.MINERAL_PRIZE: marginal_mineral_prize,
    ScheduleKind.MONOPOLY_PRIZE: marginal_monopoly_prize,
}


def marginal_rate(params: ScheduleParams, x: float) -> MarginalRate:
    return MARGINAL_FORMULAS[params.kind](params, x)


@dataclass(frozen=True, eq=False)
class IntegratedSchedule:
    """
    Tabulated total schedule. Prize kinds pay x up to the junction and
    junction + integral of P' beyond it; wage kinds integrate T' from zero.
    Between grid nodes the marginal is linear and the total its integral.
    """
    kind: ScheduleKind
    grid: np.ndarray
    totals: np.ndarray
    marginals: np.ndarray
    regime_flags: np.ndarray
    junction: float
    junction_marginal: float
    converged: bool = True
    _knots: Tuple[np.ndarray, np.ndarray, np.ndarray] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        for name in ("grid", "totals", "marginals", "regime_flags"):
            getattr(self, name).setflags(write=False)
        above = self.grid > self.junction
        base = self.junction if self.kind.is_prize else 0.0
        knot_x = np.concatenate(([self.junction], self.grid[above]))
        knot_total = np.concatenate(([base], self.totals[above]))
        knot_marginal = np.concatenate(([self.junction_marginal], self.marginals[above]))
        object.__setattr__(self, "_knots", (knot_x, knot_total, knot_marginal))

    @property
    def has_floor(self) -> bool:
        return self.kind.is_prize and self.junction > 0

    def _locate(self, s: np.ndarray):
        knot_x, knot_total, knot_marginal = self._knots
        idx = np.clip(np.searchsorted(knot_x, s, side="right") - 1, 0, len(knot_x) - 1)
        nxt = np.minimum(idx + 1, len(knot_x) - 1)
        span = knot_x[nxt] - knot_x[idx]
        slope = np.where(span > 0, (knot_marginal[nxt] - knot_marginal[idx]) / np.where(span > 0, span, 1.0), 0.0)
        dx = s - knot_x[idx]
        return idx, slope, dx

    def _totals(self, s_arr: np.ndarray) -> np.ndarray:
        _, knot_total, knot_marginal = self._knots
        idx, slope, dx = self._locate(s_arr)
        formula = knot_total[idx] + knot_marginal[idx] * dx + 0.5 * slope * dx * dx
        if self.has_floor:
            formula = np.where(s_arr <= self.junction, s_arr, formula)
        return formula

    def _marginals(self, s_arr: np.ndarray) -> np.ndarray:
        _, _, knot_marginal = self._knots
        idx, slope, dx = self._locate(s_arr)
        formula = knot_marginal[idx] + slope * dx
        if self.has_floor:
            formula = np.where(s_arr < self.junction, 1.0, formula)
        return formula

    def total_at(self, s):
        """Total tax (wage) or prize at s; accepts scalars or arrays."""
        return _unwrap(self._totals(np.asarray(s, dtype=float)))

    def marginal_at(self, s):
        return _unwrap(self._marginals(np.asarray(s, dtype=float)))

    def reward_at(self, s):
        """What the earner keeps: the prize, or pay net of the wage tax."""
        s_arr = np.asarray(s, dtype=float)
        if self.kind.is_prize:
            return _unwrap(self._totals(s_arr))
        return _unwrap(s_arr - self._totals(s_arr))

    def reward_marginal_at(self, s):
        s_arr = np.asarray(s, dtype=float)
        if self.kind.is_prize:
            return _unwrap(self._marginals(s_arr))
        return _unwrap(1.0 - self._marginals(s_arr))

    @property
    def upper(self) -> float:
        return float(self.grid[-1])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "x": self.grid,
            "marginal": self.marginals,
            "total": self.totals,
            "regime_flag": np.where(self.regime_flags, "ok", "out_of_regime"),
        })


def _unwrap(values: np.ndarray):
    return float(values) if np.ndim(values) == 0 else values


def _validate_grid(grid: Sequence[float]) -> np.ndarray:
    points = np.asarray(grid, dtype=float)
    if points.ndim != 1 or points.size == 0:
        raise DomainError("schedule grid must be a nonempty 1-D sequence")
    if not np.all(np.isfinite(points)) or points[0] < 0:
        raise DomainError("schedule grid must be finite and nonnegative")
    if np.any(np.diff(points) <= 0):
        raise DomainError("schedule grid must be strictly increasing")
    return points


def _integrate(
    kind: ScheduleKind,
    points: np.ndarray,
    junction: float,
    evaluate: Callable[[float], MarginalRate],
) -> IntegratedSchedule:
    cache: Dict[float, MarginalRate] = {}

    def rate_at(x: float) -> MarginalRate:
        if x not in cache:
            try:
                cache[x] = evaluate(x)
            except AssetaxError as e:
                if isinstance(e, ScheduleEvaluationError):
                    raise
                raise ScheduleEvaluationError(x, e) from e
        return cache[x]

    def value_at(x: float) -> float:
        return rate_at(x).value

    base = junction if kind.is_prize else 0.0
    # a grid entirely inside the floor never reaches the formula region
    if points[-1] >= junction:
        junction_marginal = rate_at(junction).value
    else:
        junction_marginal = 1.0

    totals = np.empty_like(points)
    marginals = np.empty_like(points)
    flags = np.ones(points.shape, dtype=bool)
    converged = True
    prev_x, prev_total = junction, base

    for i, x in enumerate(points):
        x = float(x)
        if kind.is_prize and x < junction:
            totals[i], marginals[i] = x, 1.0
            continue
        rate = rate_at(x)
        segment, ok = refined_trapezoid(value_at, prev_x, x, f_lower=value_at(prev_x), f_upper=rate.value)
        converged &= ok
        prev_x, prev_total = x, prev_total + segment
        totals[i], marginals[i], flags[i] = prev_total, rate.value, rate.in_regime

    if not converged:
        logger.warning(f"{kind.value} schedule: trapezoid refinement hit its limit before the Richardson check passed")

    return IntegratedSchedule(
        kind=kind,
        grid=points,
        totals=totals,
        marginals=marginals,
        regime_flags=flags,
        junction=junction,
        junction_marginal=junction_marginal,
        converged=converged,
    )


def integrate_schedule(params: ScheduleParams, grid: Sequence[float]) -> IntegratedSchedule:
    """
    Integrate the marginal formula for params.kind over grid. Below the
    distribution's support the marginal is held at its value at the support floor.
    """
    points = _validate_grid(grid)
    _, upper = params.distribution.support()
    if points[-1] > upper:
        raise TailTruncationError(f"grid end {points[-1]} lies beyond the truncated tail at {upper}")

    logger.debug(f"Integrating {params.kind.value} schedule over {points.size} points (junction={params.junction})")
    return _integrate(params.kind, points, params.junction, lambda x: marginal_rate(params, x))


def tabulate_schedule(
    kind: ScheduleKind,
    grid: Sequence[float],
    marginal_fn: Callable[[float], float],
    junction: float = 0.0,
) -> IntegratedSchedule:
    """Schedule from an explicit marginal function, e.g. a linear prize."""
    points = _validate_grid(grid)
    if junction < 0:
        raise DomainError(f"junction must be nonnegative, got {junction}")

    def evaluate(x: float) -> MarginalRate:
        return MarginalRate(value=float(marginal_fn(x)), gbar=float("nan"), alpha=float("nan"), elasticity=float("nan"))

    return _integrate(kind, points, junction, evaluate)


def prize_amount(params: ScheduleParams, value: float, creation_cost: Optional[float] = None) -> float:
    """Total prize for a single created asset of the given value."""
    if not params.kind.is_prize:
        raise DomainError(f"{params.kind.value} is not a prize schedule")
    if value < 0:
        raise DomainError(f"asset value must be nonnegative, got {value}")
    if creation_cost is not None:
        params = replace(params, creation_cost=creation_cost)
    if value <= params.junction:
        return float(value)
    return float(integrate_schedule(params, [value]).totals[0])
