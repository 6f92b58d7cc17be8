"""
Six-category asset policy engine
Classifies assets, applies the tax / prize / abolish / exempt treatment for each
category and aggregates treatments into revenue reports
"""

from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from typing import Callable, Dict, List, Mapping, Optional, Tuple

from models.schedules import ScheduleKind, ScheduleParams, prize_amount
from models.valuation import (
    MortgagedAsset,
    abandonment_risk,
    asset_value_rate,
    captured_share,
    level_payment,
    split_tax_bill,
)
from schemas.responses import CategoryTotals, RevenueReport
from utils.exceptions import ConfigurationError, DomainError
from utils.logger import setup_logger

logger = setup_logger(__name__)


class AssetCategory(str, Enum):
    LAND_OR_USEFUL_PRIVILEGE = "land_or_useful_privilege"
    USELESS_PRIVILEGE = "useless_privilege"
    CAPITAL = "capital"
    INTELLECTUAL_PROPERTY = "intellectual_property"
    MINERAL_DEPOSIT = "mineral_deposit"
    UNREGULATED_NATURAL_MONOPOLY = "unregulated_natural_monopoly"


class Treatment(str, Enum):
    TAX = "tax"
    ABOLISH = "abolish"
    EXEMPT = "exempt"
    PRIZE = "prize"
    PRIZE_AND_TAX = "prize_and_tax"


@dataclass(frozen=True)
class AssetCharacteristics:
    """Sources of value and whether restricted access is efficient."""
    rent: bool
    effort: bool
    discovery: bool
    restricted_access_efficient: bool


ASSET_CHARACTERISTICS: Dict[AssetCategory, AssetCharacteristics] = {
    AssetCategory.LAND_OR_USEFUL_PRIVILEGE: AssetCharacteristics(True, False, False, True),
    AssetCategory.USELESS_PRIVILEGE: AssetCharacteristics(True, False, False, False),
    AssetCategory.CAPITAL: AssetCharacteristics(True, True, False, True),
    AssetCategory.INTELLECTUAL_PROPERTY: AssetCharacteristics(False, True, True, False),
    AssetCategory.MINERAL_DEPOSIT: AssetCharacteristics(True, True, True, True),
    AssetCategory.UNREGULATED_NATURAL_MONOPOLY: AssetCharacteristics(True, True, True, True),
}

TREATMENTS: Dict[AssetCategory, Treatment] = {
    AssetCategory.LAND_OR_USEFUL_PRIVILEGE: Treatment.TAX,
    AssetCategory.USELESS_PRIVILEGE: Treatment.ABOLISH,
    AssetCategory.CAPITAL: Treatment.EXEMPT,
    AssetCategory.INTELLECTUAL_PROPERTY: Treatment.PRIZE,
    AssetCategory.MINERAL_DEPOSIT: Treatment.PRIZE_AND_TAX,
    AssetCategory.UNREGULATED_NATURAL_MONOPOLY: Treatment.PRIZE_AND_TAX,
}

PRIZE_SCHEDULES: Dict[AssetCategory, ScheduleKind] = {
    AssetCategory.INTELLECTUAL_PROPERTY: ScheduleKind.INNOVATION_PRIZE,
    AssetCategory.MINERAL_DEPOSIT: ScheduleKind.MINERAL_PRIZE,
    AssetCategory.UNREGULATED_NATURAL_MONOPOLY: ScheduleKind.MONOPOLY_PRIZE,
}

REVENUE_CHANNELS = ("property_tax", "auction", "severance", "one_time_levy")


@dataclass(frozen=True)
class TreatmentFlags:
    taxed: bool
    prized: bool
    eliminated: bool


def treatment_flags(category: AssetCategory) -> TreatmentFlags:
    treatment = TREATMENTS[category]
    return TreatmentFlags(
        taxed=treatment in (Treatment.TAX, Treatment.PRIZE_AND_TAX),
        prized=treatment in (Treatment.PRIZE, Treatment.PRIZE_AND_TAX),
        # intellectual property is replaced by prizes: the exclusive right goes away
        eliminated=treatment is Treatment.ABOLISH or category is AssetCategory.INTELLECTUAL_PROPERTY,
    )


@dataclass(frozen=True)
class AssetRecord:
    asset_id: str
    category: AssetCategory
    income_flow: float = 0.0
    market_value: float = 0.0
    takeover_bid: Optional[float] = None
    pv_net_investment: Optional[float] = None
    creation_cost: Optional[float] = None
    mortgage_value: float = 0.0
    publicly_traded: bool = True
    access_price: Optional[float] = None
    depletion_periods: Optional[int] = None

    def __post_init__(self):
        for name in ("income_flow", "market_value", "takeover_bid", "pv_net_investment",
                     "creation_cost", "mortgage_value", "access_price"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise DomainError(f"asset {self.asset_id}: {name} must be nonnegative, got {value}")

        is_monopoly = self.category is AssetCategory.UNREGULATED_NATURAL_MONOPOLY
        has_monopoly_fields = self.takeover_bid is not None or self.pv_net_investment is not None
        if is_monopoly and (self.takeover_bid is None or self.pv_net_investment is None):
            raise ConfigurationError(f"asset {self.asset_id}: monopolies need takeover_bid and pv_net_investment")
        if not is_monopoly and has_monopoly_fields:
            raise ConfigurationError(f"asset {self.asset_id}: takeover_bid/pv_net_investment apply to monopolies only")
        if self.creation_cost is not None and self.category not in PRIZE_SCHEDULES:
            raise ConfigurationError(f"asset {self.asset_id}: creation_cost applies to prize categories only")
        if self.access_price is not None and self.category is not AssetCategory.USELESS_PRIVILEGE:
            raise ConfigurationError(f"asset {self.asset_id}: access_price applies to useless privileges only")
        if self.depletion_periods is not None:
            if self.category is not AssetCategory.MINERAL_DEPOSIT:
                raise ConfigurationError(f"asset {self.asset_id}: depletion_periods applies to mineral deposits only")
            if self.depletion_periods < 1:
                raise DomainError(f"asset {self.asset_id}: depletion_periods must be at least 1")


@dataclass(frozen=True)
class OneTimeCapitalLevy:
    rate: float
    justification: str

    def __post_init__(self):
        if not 0 <= self.rate <= 1:
            raise DomainError(f"one-time levy rate must lie in [0, 1], got {self.rate}")


@dataclass(frozen=True)
class PolicyConfig:
    land_tax_rate: float = 0.05  # per month
    discount_rate: float = 0.005  # per month
    floor_multiplier: float = 3.0
    assessor_award_rate: float = 0.01
    one_time_capital_levy: Optional[OneTimeCapitalLevy] = None
    mineral_auction_share: float = 0.5
    periods_per_year: int = 12

    def __post_init__(self):
        if self.land_tax_rate < 0:
            raise DomainError(f"land tax rate must be nonnegative, got {self.land_tax_rate}")
        if not self.discount_rate > 0:
            raise DomainError(f"discount rate must be positive, got {self.discount_rate}")
        if self.floor_multiplier < 0:
            raise DomainError(f"floor multiplier must be nonnegative, got {self.floor_multiplier}")
        if not 0 <= self.assessor_award_rate < 1:
            raise DomainError(f"assessor award rate must lie in [0, 1), got {self.assessor_award_rate}")
        if not 0 <= self.mineral_auction_share <= 1:
            raise DomainError(f"mineral auction share must lie in [0, 1], got {self.mineral_auction_share}")


@dataclass(frozen=True)
class CostConventions:
    prospector_day: float = 500.0
    prose_word: float = 1.0
    children_prose_word: float = 2.0
    poetry_word: float = 5.0
    music_beat: float = 1.0
    art_sq_inch: float = 1.0

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not value > 0:
                raise DomainError(f"cost convention {name} must be positive, got {value}")


class WorkKind(str, Enum):
    PROSPECTING = "prospecting"
    PROSE = "prose"
    CHILDREN_PROSE = "children_prose"
    POETRY = "poetry"
    MUSIC = "music"
    VISUAL_ART = "visual_art"


WORK_UNIT_COSTS: Dict[WorkKind, str] = {
    WorkKind.PROSPECTING: "prospector_day",
    WorkKind.PROSE: "prose_word",
    WorkKind.CHILDREN_PROSE: "children_prose_word",
    WorkKind.POETRY: "poetry_word",
    WorkKind.MUSIC: "music_beat",
    WorkKind.VISUAL_ART: "art_sq_inch",
}


@dataclass(frozen=True)
class WorkItem:
    kind: str
    quantity: float


def creation_cost(work: WorkItem, conventions: CostConventions) -> float:
    """Conventional cost of a creative or prospecting effort."""
    try:
        kind = WorkKind(work.kind)
    except ValueError:
        raise DomainError(f"unknown work kind {work.kind!r}; expected one of {[k.value for k in WorkKind]}")
    if work.quantity < 0:
        raise DomainError(f"work quantity must be nonnegative, got {work.quantity}")
    return getattr(conventions, WORK_UNIT_COSTS[kind]) * work.quantity


def monopoly_excess_value(market_value: float, takeover_bid: float, pv_net_investment: float) -> float:
    """Value above the present value of net investment, clamped at zero."""
    if min(market_value, takeover_bid, pv_net_investment) < 0:
        raise DomainError("monopoly valuation inputs must be nonnegative")
    return max(max(market_value, takeover_bid) - pv_net_investment, 0.0)


def assessor_award(taxes_collected: float, config: PolicyConfig) -> float:
    """Award to the highest bidder in a competitive assessment."""
    if taxes_collected < 0:
        raise DomainError(f"taxes collected must be nonnegative, got {taxes_collected}")
    return config.assessor_award_rate * taxes_collected


@dataclass(frozen=True)
class TreatmentResult:
    asset_id: str
    category: AssetCategory
    treatment: Treatment
    recurring_tax_flow: float = 0.0
    prize_paid: float = 0.0
    residual_private_value: float = 0.0
    abolished: bool = False
    right_extinguished: bool = False
    revenue_channels: Dict[str, float] = field(default_factory=lambda: {c: 0.0 for c in REVENUE_CHANNELS})
    capture_share: Optional[float] = None
    owner_tax: float = 0.0
    mortgagee_tax: float = 0.0
    assessor_award: float = 0.0
    abandonment_risk: bool = False
    access_price: Optional[float] = None
    prize_per_period: Optional[float] = None
    severance_per_period: Optional[float] = None

    def to_dict(self) -> Dict[str, object]:
        data = asdict(self)
        data["category"] = self.category.value
        data["treatment"] = self.treatment.value
        return data


def _channels(**amounts: float) -> Dict[str, float]:
    channels = {c: 0.0 for c in REVENUE_CHANNELS}
    channels.update(amounts)
    return channels


def _split(tax: float, value: float, mortgage: float) -> Tuple[float, float]:
    if value <= 0:
        return tax, 0.0
    return split_tax_bill(MortgagedAsset(asset_value=value, mortgage_value=mortgage, tax_bill=tax))


def _prize(asset: AssetRecord, value: float, config: PolicyConfig, schedules: Mapping[ScheduleKind, ScheduleParams]) -> float:
    kind = PRIZE_SCHEDULES[asset.category]
    params = schedules.get(kind)
    if params is None:
        raise ConfigurationError(f"asset {asset.asset_id}: no {kind.value} schedule supplied")
    if asset.creation_cost is None:
        raise ConfigurationError(f"asset {asset.asset_id}: prize categories need a creation_cost")
    params = replace(params, floor_multiplier=config.floor_multiplier)
    return prize_amount(params, value, asset.creation_cost)


def _treat_land(asset, config, schedules) -> TreatmentResult:
    t, rho = config.land_tax_rate, config.discount_rate
    # a land record without a rent figure states its untaxed value instead
    rent = asset.income_flow if asset.income_flow > 0 else asset.market_value * rho
    value = asset_value_rate(rent, t, rho)
    tax = t * value
    owner_tax, mortgagee_tax = _split(tax, value, asset.mortgage_value)
    return TreatmentResult(
        asset_id=asset.asset_id,
        category=asset.category,
        treatment=Treatment.TAX,
        recurring_tax_flow=tax,
        residual_private_value=value,
        revenue_channels=_channels(property_tax=tax),
        capture_share=captured_share(t, rho),
        owner_tax=owner_tax,
        mortgagee_tax=mortgagee_tax,
        abandonment_risk=abandonment_risk(rent, tax, value, asset.mortgage_value),
    )


def _treat_useless(asset, config, schedules) -> TreatmentResult:
    return TreatmentResult(
        asset_id=asset.asset_id,
        category=asset.category,
        treatment=Treatment.ABOLISH,
        abolished=True,
        right_extinguished=True,
        access_price=asset.access_price,
    )


def _treat_capital(asset, config, schedules) -> TreatmentResult:
    levy = config.one_time_capital_levy
    amount = levy.rate * asset.market_value if levy is not None else 0.0
    return TreatmentResult(
        asset_id=asset.asset_id,
        category=asset.category,
        treatment=Treatment.EXEMPT,
        residual_private_value=asset.market_value - amount,
        revenue_channels=_channels(one_time_levy=amount),
    )


def _treat_intellectual_property(asset, config, schedules) -> TreatmentResult:
    prize = _prize(asset, asset.market_value, config, schedules)
    return TreatmentResult(
        asset_id=asset.asset_id,
        category=asset.category,
        treatment=Treatment.PRIZE,
        prize_paid=prize,
        right_extinguished=True,
    )


def _treat_mineral(asset, config, schedules) -> TreatmentResult:
    prize = _prize(asset, asset.market_value, config, schedules)
    remaining = max(asset.market_value - prize, 0.0)
    auction = config.mineral_auction_share * remaining
    severance = remaining - auction

    prize_per_period = severance_per_period = None
    if asset.depletion_periods is not None:
        prize_per_period = level_payment(prize, asset.depletion_periods, config.discount_rate)
        severance_per_period = level_payment(severance, asset.depletion_periods, config.discount_rate)

    return TreatmentResult(
        asset_id=asset.asset_id,
        category=asset.category,
        treatment=Treatment.PRIZE_AND_TAX,
        prize_paid=prize,
        revenue_channels=_channels(auction=auction, severance=severance),
        prize_per_period=prize_per_period,
        severance_per_period=severance_per_period,
    )


def _treat_monopoly(asset, config, schedules) -> TreatmentResult:
    excess = monopoly_excess_value(asset.market_value, asset.takeover_bid, asset.pv_net_investment)
    prize = _prize(asset, excess, config, schedules) if excess > 0 else 0.0
    tax = config.land_tax_rate * excess
    owner_tax, mortgagee_tax = _split(tax, max(asset.market_value, asset.takeover_bid), asset.mortgage_value)
    # publicly traded companies are valued by the market, not by assessment bids
    award = 0.0 if asset.publicly_traded else assessor_award(tax, config)
    return TreatmentResult(
        asset_id=asset.asset_id,
        category=asset.category,
        treatment=Treatment.PRIZE_AND_TAX,
        recurring_tax_flow=tax,
        prize_paid=prize,
        residual_private_value=max(asset.market_value, asset.takeover_bid),
        revenue_channels=_channels(property_tax=tax),
        capture_share=captured_share(config.land_tax_rate, config.discount_rate),
        owner_tax=owner_tax,
        mortgagee_tax=mortgagee_tax,
        assessor_award=award,
    )


_HANDLERS: Dict[AssetCategory, Callable[..., TreatmentResult]] = {
    AssetCategory.LAND_OR_USEFUL_PRIVILEGE: _treat_land,
    AssetCategory.USELESS_PRIVILEGE: _treat_useless,
    AssetCategory.CAPITAL: _treat_capital,
    AssetCategory.INTELLECTUAL_PROPERTY: _treat_intellectual_property,
    AssetCategory.MINERAL_DEPOSIT: _treat_mineral,
    AssetCategory.UNREGULATED_NATURAL_MONOPOLY: _treat_monopoly,
}
assert set(_HANDLERS) == set(AssetCategory) == set(TREATMENTS) == set(ASSET_CHARACTERISTICS)


def apply_policy(
    asset: AssetRecord,
    config: PolicyConfig,
    schedules: Optional[Mapping[ScheduleKind, ScheduleParams]] = None,
) -> TreatmentResult:
    """Apply the category's treatment to one asset."""
    result = _HANDLERS[asset.category](asset, config, schedules or {})
    logger.debug(f"{asset.asset_id}: {result.treatment.value} tax={result.recurring_tax_flow:.6g} prize={result.prize_paid:.6g}")
    return result


@dataclass(frozen=True)
class PolicyScenario:
    assets: Tuple[AssetRecord, ...]
    config: PolicyConfig = field(default_factory=PolicyConfig)
    schedules: Mapping[ScheduleKind, ScheduleParams] = field(default_factory=dict)
    welfare_weights: Optional[Mapping[AssetCategory, float]] = None


def _totals(results: List[TreatmentResult]) -> CategoryTotals:
    channels = {c: sum(r.revenue_channels[c] for r in results) for c in REVENUE_CHANNELS}
    recurring = sum(r.recurring_tax_flow for r in results)
    prizes = sum(r.prize_paid for r in results)
    awards = sum(r.assessor_award for r in results)
    one_time = channels["auction"] + channels["severance"] + channels["one_time_levy"]
    return CategoryTotals(
        asset_count=len(results),
        recurring_tax=recurring,
        prizes_paid=prizes,
        assessor_awards=awards,
        revenue_channels=channels,
        net_recurring_revenue=recurring - awards,
        net_one_time_revenue=one_time - prizes,
    )


def revenue_report(scenario: PolicyScenario) -> RevenueReport:
    """Treat every asset (stable order by asset id) and aggregate by category."""
    ordered = sorted(scenario.assets, key=lambda a: a.asset_id)
    results = [apply_policy(asset, scenario.config, scenario.schedules) for asset in ordered]

    by_category: Dict[str, CategoryTotals] = {}
    for category in AssetCategory:
        members = [r for r in results if r.category is category]
        if members:
            by_category[category.value] = _totals(members)

    welfare = None
    if scenario.welfare_weights is not None:
        welfare = {}
        for r in results:
            w = scenario.welfare_weights.get(r.category, 1.0)
            transfer = r.prize_paid - r.recurring_tax_flow - r.revenue_channels["one_time_levy"]
            welfare[r.category.value] = welfare.get(r.category.value, 0.0) + w * transfer

    return RevenueReport(
        assets=[r.to_dict() for r in results],
        by_category=by_category,
        totals=_totals(results),
        abolished=[r.asset_id for r in results if r.abolished],
        welfare_weighted_transfers=welfare,
    )
