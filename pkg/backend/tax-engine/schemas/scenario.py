"""
Scenario file schemas for the ASSETAX tax engine

Unknown keys are rejected everywhere; cross-references between sections are
by name and are resolved in services.scenario_service.
"""

from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing import Annotated, Dict, List, Literal, Optional, Union

from models.policy import AssetCategory
from models.schedules import ScheduleKind


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ParetoSpec(StrictModel):
    kind: Literal["pareto"]
    scale: float = Field(..., gt=0, description="Lower bound x_m")
    shape: float = Field(..., gt=0, description="Tail exponent a")
    support_floor: float = Field(default=0.0, ge=0)


class LogNormalSpec(StrictModel):
    kind: Literal["lognormal"]
    mu: float
    sigma: float = Field(..., gt=0)
    support_floor: float = Field(default=0.0, ge=0)


class EmpiricalSpec(StrictModel):
    kind: Literal["empirical"]
    edges: List[float] = Field(..., min_length=2, description="Bin edges, strictly increasing")
    masses: List[float] = Field(..., min_length=1, description="Probability mass per bin")
    support_floor: float = Field(default=0.0, ge=0)


DistributionSpec = Annotated[Union[ParetoSpec, LogNormalSpec, EmpiricalSpec], Field(discriminator="kind")]


class WeightSpec(StrictModel):
    distribution: str = Field(..., description="Distribution the weights are normalized under")
    family: Literal["constant", "power", "step"] = "constant"
    nu: float = Field(default=0.0, ge=0)
    threshold: Optional[float] = None
    below: float = Field(default=1.0, ge=0)
    above: float = Field(default=0.0, ge=0)
    gstar: float = Field(default=1.0, ge=0, description="Weight of the recipients of innovation benefits")


class ElasticitySpec(StrictModel):
    values: List[float] = Field(..., min_length=1)
    breakpoints: List[float] = Field(default_factory=list)


class GridSpec(StrictModel):
    start: float = Field(..., ge=0)
    stop: float
    points: int = Field(..., ge=1)

    @model_validator(mode="after")
    def _ordered(self):
        if self.points > 1 and not self.stop > self.start:
            raise ValueError("grid stop must exceed start")
        return self


class ScheduleSpec(StrictModel):
    kind: ScheduleKind
    distribution: str
    weights: str
    elasticity: str
    floor_multiplier: float = Field(default=3.0, ge=0)
    creation_cost: float = Field(default=0.0, ge=0)
    grid: Optional[GridSpec] = None


class WealthUtilitySpec(StrictModel):
    family: Literal["log", "crra"] = "log"
    beta: float = Field(default=1.0, gt=0)
    sigma: float = Field(default=2.0, gt=0)


class DisutilitySpec(StrictModel):
    elasticity: float = Field(default=1.0, gt=0)
    psi: float = Field(default=1.0, gt=0)


class AgentSpec(StrictModel):
    name: str
    schedule: str = Field(..., description="Schedule the agent earns through")
    delta: float = Field(..., gt=0)
    r: float = Field(default=0.04, gt=0)
    n: float = Field(default=0.0, ge=0)
    k_init: float = Field(default=0.0, ge=0)
    wealth_utility: WealthUtilitySpec = Field(default_factory=WealthUtilitySpec)
    disutility: DisutilitySpec = Field(default_factory=DisutilitySpec)


class WorkSpec(StrictModel):
    kind: str
    quantity: float = Field(..., ge=0)


class AssetSpec(StrictModel):
    id: str
    category: AssetCategory
    income_flow: float = Field(default=0.0, ge=0)
    market_value: float = Field(default=0.0, ge=0)
    takeover_bid: Optional[float] = Field(default=None, ge=0)
    pv_net_investment: Optional[float] = Field(default=None, ge=0)
    creation_cost: Optional[float] = Field(default=None, ge=0)
    work: Optional[WorkSpec] = None
    mortgage_value: float = Field(default=0.0, ge=0)
    publicly_traded: bool = True
    access_price: Optional[float] = Field(default=None, ge=0)
    depletion_periods: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _one_cost_source(self):
        if self.creation_cost is not None and self.work is not None:
            raise ValueError("give either creation_cost or work, not both")
        return self


class LevySpec(StrictModel):
    rate: float = Field(..., ge=0, le=1)
    justification: str


class CostConventionsSpec(StrictModel):
    prospector_day: float = Field(default=500.0, gt=0)
    prose_word: float = Field(default=1.0, gt=0)
    children_prose_word: float = Field(default=2.0, gt=0)
    poetry_word: float = Field(default=5.0, gt=0)
    music_beat: float = Field(default=1.0, gt=0)
    art_sq_inch: float = Field(default=1.0, gt=0)


class PolicySpec(StrictModel):
    land_tax_rate: float = Field(default=0.05, ge=0)
    discount_rate: float = Field(default=0.005, gt=0)
    floor_multiplier: float = Field(default=3.0, ge=0)
    assessor_award_rate: float = Field(default=0.01, ge=0, lt=1)
    mineral_auction_share: float = Field(default=0.5, ge=0, le=1)
    periods_per_year: int = Field(default=12, ge=1)
    one_time_capital_levy: Optional[LevySpec] = None
    cost_conventions: CostConventionsSpec = Field(default_factory=CostConventionsSpec)
    prize_schedules: Dict[ScheduleKind, str] = Field(
        default_factory=dict, description="Schedule used for each prize kind when several are declared"
    )
    welfare_weights: Optional[Dict[AssetCategory, float]] = None


class ScenarioDocument(StrictModel):
    name: str = "scenario"
    distributions: Dict[str, DistributionSpec] = Field(default_factory=dict)
    weights: Dict[str, WeightSpec] = Field(default_factory=dict)
    elasticities: Dict[str, ElasticitySpec] = Field(default_factory=dict)
    schedules: Dict[str, ScheduleSpec] = Field(default_factory=dict)
    agents: List[AgentSpec] = Field(default_factory=list)
    assets: List[AssetSpec] = Field(default_factory=list)
    policy: PolicySpec = Field(default_factory=PolicySpec)
