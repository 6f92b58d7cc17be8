"""
Steady-state agent responses to prize and wage schedules

An agent with quasilinear utility c + a(k) - h2(s) jumps to the steady state where
h2'(s) equals the marginal reward, a'(k) = delta - r, and consumption exhausts the budget.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from models.schedules import IntegratedSchedule, ScheduleKind
from utils.config import get_settings
from utils.exceptions import ConfigurationError, DomainError, GridBoundaryError
from utils.logger import setup_logger
from utils.numerics import adaptive_quad, bracketed_root, expand_bracket, scan_sign_changes

logger = setup_logger(__name__)

SCAN_POINTS = 512


class WealthUtilityFamily(str, Enum):
    LOG = "log"
    CRRA = "crra"


@dataclass(frozen=True)
class WealthUtility:
    """a(k) = beta ln k, or beta k^(1-sigma) / (1-sigma)."""
    family: WealthUtilityFamily = WealthUtilityFamily.LOG
    beta: float = 1.0
    sigma: float = 2.0

    def __post_init__(self):
        if not self.beta > 0:
            raise DomainError(f"wealth utility scale must be positive, got {self.beta}")
        if self.family is WealthUtilityFamily.CRRA and (not self.sigma > 0 or self.sigma == 1.0):
            raise DomainError(f"CRRA curvature must be positive and not 1, got {self.sigma}")

    def value(self, k):
        k = np.asarray(k, dtype=float)
        if self.family is WealthUtilityFamily.LOG:
            return self.beta * np.log(k)
        return self.beta * k ** (1.0 - self.sigma) / (1.0 - self.sigma)

    def derivative(self, k):
        k = np.asarray(k, dtype=float)
        if self.family is WealthUtilityFamily.LOG:
            return self.beta / k
        return self.beta * k ** (-self.sigma)

    def closed_form_wealth(self, marginal: float) -> float:
        """k with a'(k) = marginal."""
        if self.family is WealthUtilityFamily.LOG:
            return self.beta / marginal
        return (self.beta / marginal) ** (1.0 / self.sigma)


@dataclass(frozen=True)
class Disutility:
    """h2(s) = s^(1+1/e) / (psi (1 + 1/e)); supply elasticity e, scale psi."""
    elasticity: float = 1.0
    psi: float = 1.0

    def __post_init__(self):
        if not self.elasticity > 0:
            raise DomainError(f"supply elasticity must be positive, got {self.elasticity}")
        if not self.psi > 0:
            raise DomainError(f"disutility scale must be positive, got {self.psi}")

    @property
    def _power(self) -> float:
        return 1.0 + 1.0 / self.elasticity

    def value(self, s):
        s = np.asarray(s, dtype=float)
        return s ** self._power / (self.psi * self._power)

    def derivative(self, s):
        s = np.asarray(s, dtype=float)
        return s ** (1.0 / self.elasticity) / self.psi

    def closed_form_supply(self, marginal: float) -> float:
        """s with h2'(s) = marginal, for marginal >= 0."""
        return (self.psi * max(marginal, 0.0)) ** self.elasticity


@dataclass(frozen=True)
class AgentProfile:
    """
    One earner with exactly one earnings channel (the schedule kind it answers to).
    """
    delta: float
    wealth_utility: WealthUtility
    disutility: Disutility
    k_init: float = 0.0
    n: float = 0.0
    r: float = 0.04
    channel: ScheduleKind = ScheduleKind.INNOVATION_PRIZE
    name: str = "agent"

    def __post_init__(self):
        if not self.r > 0:
            raise DomainError(f"rate of return must be positive, got {self.r}")
        if self.n < 0:
            raise DomainError(f"privilege income must be nonnegative, got {self.n}")
        if self.k_init < 0:
            raise DomainError(f"initial wealth must be nonnegative, got {self.k_init}")


@dataclass(frozen=True)
class SteadyState:
    c: float
    k: float
    s: float
    flow_utility: float
    pv_utility: float
    foc_residual: float = 0.0
    boundary: Optional[str] = None
    kink: bool = False


@dataclass(frozen=True)
class BestResponse:
    s: float
    k: float
    flow_utility: float


def _check_channel(agent: AgentProfile, schedule: IntegratedSchedule) -> None:
    if schedule.kind is not agent.channel:
        raise ConfigurationError(
            f"agent {agent.name!r} earns through {agent.channel.value}, not {schedule.kind.value}"
        )


def solve_wealth(agent: AgentProfile) -> float:
    """Root of a'(k) = delta - r."""
    gap = agent.delta - agent.r
    if not gap > 0:
        raise DomainError(f"delta={agent.delta} <= r={agent.r}: no interior wealth solution")

    def residual(k: float) -> float:
        return float(agent.wealth_utility.derivative(k)) - gap

    lo, hi = expand_bracket(residual, start=1.0)
    return bracketed_root(residual, lo, hi)


def _supply_candidates(agent: AgentProfile, schedule: IntegratedSchedule) -> Tuple[List[float], Optional[str]]:
    upper = schedule.upper

    def residual(s: float) -> float:
        return float(schedule.reward_marginal_at(s)) - float(agent.disutility.derivative(s))

    candidates = [bracketed_root(residual, a, b) for a, b in scan_sign_changes(residual, 0.0, upper, SCAN_POINTS)]
    boundary = None
    if residual(upper) > 0:
        candidates.append(upper)
        if len(candidates) == 1:
            boundary = "upper"
    if residual(0.0) < 0:
        candidates.append(0.0)
        if len(candidates) == 1:
            boundary = "lower"
    return candidates, boundary


def solve_steady_state(agent: AgentProfile, schedule: IntegratedSchedule) -> SteadyState:
    """
    Steady state from the first-order conditions: lambda = 1, h2'(s) = reward'(s),
    a'(k) = delta - r, c = n + r k + reward(s).
    """
    _check_channel(agent, schedule)
    k = solve_wealth(agent)

    candidates, boundary = _supply_candidates(agent, schedule)

    def objective(s: float) -> float:
        return float(schedule.reward_at(s)) - float(agent.disutility.value(s))

    s = max(candidates, key=objective)
    if boundary is not None and s in (0.0, schedule.upper):
        logger.warning(f"Agent {agent.name}: h2' never crosses the reward marginal; boundary solution s={s} ({boundary})")
    else:
        boundary = None

    residual = float(schedule.reward_marginal_at(s)) - float(agent.disutility.derivative(s))
    kink = (
        schedule.has_floor
        and math.isclose(s, schedule.junction, rel_tol=1e-9, abs_tol=1e-12)
        and abs(residual) > get_settings().root_tol
    )

    reward = float(schedule.reward_at(s))
    c = agent.n + agent.r * k + reward
    flow = c + float(agent.wealth_utility.value(k)) - float(agent.disutility.value(s))
    pv = flow + agent.delta * (k - agent.k_init)
    return SteadyState(c=c, k=k, s=s, flow_utility=flow, pv_utility=pv, foc_residual=residual, boundary=boundary, kink=kink)


def present_value_utility(agent: AgentProfile, ss: SteadyState) -> float:
    """Flow utility of the steady state plus delta (k - k_init)."""
    return ss.flow_utility + agent.delta * (ss.k - agent.k_init)


def present_value_by_quadrature(agent: AgentProfile, ss: SteadyState) -> float:
    """
    delta * integral of the constant steady-state flow discounted at delta,
    plus the wealth adjustment term; integrated to where e^{-delta t} < 1e-16.
    """
    horizon = -math.log(1e-16) / agent.delta
    integral = adaptive_quad(lambda t: ss.flow_utility * math.exp(-agent.delta * t), 0.0, horizon)
    return agent.delta * integral + agent.delta * (ss.k - agent.k_init)


def brute_force_best_response(
    agent: AgentProfile,
    schedule: IntegratedSchedule,
    s_grid: Sequence[float],
    k_grid: Sequence[float],
) -> BestResponse:
    """
    Grid search over (s, k) maximizing steady-state flow utility net of the
    carrying cost delta * k of holding wealth; returns the flow utility at the argmax.
    """
    _check_channel(agent, schedule)
    s_vals = np.asarray(s_grid, dtype=float)
    k_vals = np.asarray(k_grid, dtype=float)
    S, K = np.meshgrid(s_vals, k_vals, indexing="ij")

    consumption = agent.n + agent.r * K + schedule.reward_at(S)
    flow = consumption + agent.wealth_utility.value(K) - agent.disutility.value(S)
    objective = flow - agent.delta * K

    i, j = np.unravel_index(int(np.argmax(objective)), objective.shape)
    # s = 0 is a genuine corner of the choice set, every other edge is the grid's
    on_s_edge = i == len(s_vals) - 1 or (i == 0 and s_vals[0] > 0)
    on_k_edge = j in (0, len(k_vals) - 1)
    if on_s_edge or on_k_edge:
        raise GridBoundaryError(
            f"argmax at grid edge (s={s_vals[i]}, k={k_vals[j]}) for agent {agent.name!r}; widen the grid"
        )
    return BestResponse(s=float(s_vals[i]), k=float(k_vals[j]), flow_utility=float(flow[i, j]))
