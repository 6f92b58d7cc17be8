"""
Scenario Service
Loads scenario files, validates them strictly and resolves them into model objects
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import yaml
from pydantic import ValidationError

from models.agents import AgentProfile, Disutility, WealthUtility, WealthUtilityFamily
from models.distributions import (
    DistributionModel,
    ElasticityProfile,
    LogNormal,
    Pareto,
    PiecewiseEmpirical,
    WeightFamily,
    WelfareWeightProfile,
)
from models.policy import (
    PRIZE_SCHEDULES,
    AssetCategory,
    AssetRecord,
    CostConventions,
    OneTimeCapitalLevy,
    PolicyConfig,
    PolicyScenario,
    WorkItem,
    creation_cost,
)
from models.schedules import ScheduleKind, ScheduleParams, marginal_rate
from schemas.scenario import AssetSpec, GridSpec, ScenarioDocument
from utils.exceptions import AssetaxError, ScenarioError, ScenarioIssue
from utils.logger import setup_logger

logger = setup_logger(__name__)

Loc = Tuple[Union[str, int], ...]

DEFAULT_GRID_POINTS = 101
# default grids stop where one creator in a million lies above
DEFAULT_GRID_TAIL = 1e-6
REGIME_SAMPLE_POINTS = 11


@dataclass(frozen=True)
class Scenario:
    """A validated scenario with every cross-reference resolved."""
    name: str
    distributions: Dict[str, DistributionModel]
    weights: Dict[str, WelfareWeightProfile]
    elasticities: Dict[str, ElasticityProfile]
    schedules: Dict[str, ScheduleParams]
    grids: Dict[str, Tuple[float, ...]]
    agents: Tuple[AgentProfile, ...]
    agent_schedules: Dict[str, str]
    assets: Tuple[AssetRecord, ...]
    policy: PolicyConfig
    conventions: CostConventions
    prize_schedules: Dict[ScheduleKind, str]
    welfare_weights: Optional[Dict[AssetCategory, float]]
    document: ScenarioDocument
    warnings: Tuple[ScenarioIssue, ...] = ()
    source: str = field(default="<string>", compare=False)

    def schedule_grid(self, name: str) -> np.ndarray:
        return np.asarray(self.grids[name], dtype=float)

    def policy_scenario(self, config: Optional[PolicyConfig] = None) -> PolicyScenario:
        return PolicyScenario(
            assets=self.assets,
            config=config or self.policy,
            schedules={kind: self.schedules[name] for kind, name in self.prize_schedules.items()},
            welfare_weights=self.welfare_weights,
        )


def _line_index(node: yaml.Node, path: Loc = ()) -> Dict[Loc, int]:
    index = {path: node.start_mark.line + 1}
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            child = path + (key_node.value,)
            index.update(_line_index(value_node, child))
            index[child] = key_node.start_mark.line + 1
    elif isinstance(node, yaml.SequenceNode):
        for i, item in enumerate(node.value):
            index.update(_line_index(item, path + (i,)))
    return index


def _line_for(lines: Dict[Loc, int], loc: Sequence[Union[str, int]]) -> Optional[int]:
    loc = tuple(loc)
    for k in range(len(loc), -1, -1):
        if loc[:k] in lines:
            return lines[loc[:k]]
    return None


def _locus(loc: Sequence[Union[str, int]]) -> str:
    return ".".join(str(part) for part in loc) or "<root>"


def load_document(text: str, source: str = "<string>") -> Tuple[ScenarioDocument, Dict[Loc, int]]:
    """Parse YAML text into a strict ScenarioDocument plus a key-path -> line index."""
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        problem = getattr(e, "problem", None) or str(e)
        raise ScenarioError([ScenarioIssue(source, f"invalid YAML: {problem}", mark.line + 1 if mark else None)])

    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ScenarioError([ScenarioIssue(source, "top level must be a mapping of sections", 1)])
    lines = _line_index(node) if node is not None else {}

    try:
        document = ScenarioDocument.model_validate(data)
    except ValidationError as e:
        raise ScenarioError([
            ScenarioIssue(_locus(err["loc"]), err["msg"], _line_for(lines, err["loc"]))
            for err in e.errors()
        ])
    return document, lines


class _Resolver:
    """Builds model objects from a document, collecting every issue on the way."""

    def __init__(self, document: ScenarioDocument, lines: Dict[Loc, int]):
        self.document = document
        self.lines = lines
        self.issues: List[ScenarioIssue] = []

    def issue(self, loc: Loc, message: str) -> None:
        self.issues.append(ScenarioIssue(_locus(loc), message, _line_for(self.lines, loc)))

    def attempt(self, loc: Loc, build: Callable[[], Any]) -> Any:
        try:
            return build()
        except (AssetaxError, ValueError) as e:
            self.issue(loc, str(e))
            return None

    def ref(self, loc: Loc, name: str, built: Dict[str, Any], declared: Dict[str, Any], what: str) -> Any:
        if name not in declared:
            self.issue(loc, f"unknown {what} {name!r}")
            return None
        # declared but failed to build: already reported
        return built.get(name)

    def distributions(self) -> Dict[str, DistributionModel]:
        built = {}
        for name, entry in self.document.distributions.items():
            loc = ("distributions", name)
            if entry.kind == "pareto":
                model = self.attempt(loc, lambda: Pareto(entry.scale, entry.shape, entry.support_floor))
            elif entry.kind == "lognormal":
                model = self.attempt(loc, lambda: LogNormal(entry.mu, entry.sigma, entry.support_floor))
            else:
                model = self.attempt(
                    loc, lambda: PiecewiseEmpirical(tuple(entry.edges), tuple(entry.masses), entry.support_floor)
                )
            if model is not None:
                built[name] = model
        return built

    def weights(self, distributions: Dict[str, DistributionModel]) -> Dict[str, WelfareWeightProfile]:
        built = {}
        for name, entry in self.document.weights.items():
            loc = ("weights", name)
            model = self.ref(loc + ("distribution",), entry.distribution, distributions,
                             self.document.distributions, "distribution")
            if model is None:
                continue
            profile = self.attempt(loc, lambda: WelfareWeightProfile(
                model=model,
                family=WeightFamily(entry.family),
                nu=entry.nu,
                threshold=entry.threshold,
                below=entry.below,
                above=entry.above,
                benefit_weight_Gstar=entry.gstar,
            ))
            if profile is not None:
                built[name] = profile
        return built

    def elasticities(self) -> Dict[str, ElasticityProfile]:
        built = {}
        for name, entry in self.document.elasticities.items():
            profile = self.attempt(
                ("elasticities", name), lambda: ElasticityProfile(tuple(entry.values), tuple(entry.breakpoints))
            )
            if profile is not None:
                built[name] = profile
        return built

    def schedules(self, distributions, weights, elasticities) -> Tuple[Dict[str, ScheduleParams], Dict[str, Tuple[float, ...]]]:
        built, grids = {}, {}
        doc = self.document
        for name, entry in doc.schedules.items():
            loc = ("schedules", name)
            model = self.ref(loc + ("distribution",), entry.distribution, distributions, doc.distributions, "distribution")
            profile = self.ref(loc + ("weights",), entry.weights, weights, doc.weights, "weight profile")
            elasticity = self.ref(loc + ("elasticity",), entry.elasticity, elasticities, doc.elasticities, "elasticity profile")
            weight_spec = doc.weights.get(entry.weights)
            if weight_spec is not None and weight_spec.distribution != entry.distribution:
                self.issue(
                    loc + ("weights",),
                    f"weight profile {entry.weights!r} is normalized under {weight_spec.distribution!r}, "
                    f"not the schedule's distribution {entry.distribution!r}",
                )
                continue
            if model is None or profile is None or elasticity is None:
                continue
            params = self.attempt(loc, lambda: ScheduleParams(
                kind=entry.kind,
                distribution=model,
                weights=profile,
                elasticity=elasticity,
                floor_multiplier=entry.floor_multiplier,
                creation_cost=entry.creation_cost,
            ))
            if params is None:
                continue
            built[name] = params
            grids[name] = tuple(float(x) for x in
                                (grid_points(entry.grid) if entry.grid is not None else default_grid(params)))
        return built, grids

    def agents(self, schedules: Dict[str, ScheduleParams]) -> Tuple[Tuple[AgentProfile, ...], Dict[str, str]]:
        built, links = [], {}
        for i, entry in enumerate(self.document.agents):
            loc = ("agents", i)
            if entry.name in links:
                self.issue(loc + ("name",), f"duplicate agent name {entry.name!r}")
                continue
            params = self.ref(loc + ("schedule",), entry.schedule, schedules, self.document.schedules, "schedule")
            if params is None:
                continue
            agent = self.attempt(loc, lambda: AgentProfile(
                delta=entry.delta,
                wealth_utility=WealthUtility(
                    WealthUtilityFamily(entry.wealth_utility.family), entry.wealth_utility.beta, entry.wealth_utility.sigma
                ),
                disutility=Disutility(entry.disutility.elasticity, entry.disutility.psi),
                k_init=entry.k_init,
                n=entry.n,
                r=entry.r,
                channel=params.kind,
                name=entry.name,
            ))
            if agent is not None:
                built.append(agent)
                links[entry.name] = entry.schedule
        return tuple(built), links

    def conventions(self) -> Optional[CostConventions]:
        entry = self.document.policy.cost_conventions
        return self.attempt(("policy", "cost_conventions"), lambda: CostConventions(**entry.model_dump()))

    def policy(self) -> Optional[PolicyConfig]:
        entry = self.document.policy
        levy = None
        if entry.one_time_capital_levy is not None:
            levy = OneTimeCapitalLevy(entry.one_time_capital_levy.rate, entry.one_time_capital_levy.justification)
        return self.attempt(("policy",), lambda: PolicyConfig(
            land_tax_rate=entry.land_tax_rate,
            discount_rate=entry.discount_rate,
            floor_multiplier=entry.floor_multiplier,
            assessor_award_rate=entry.assessor_award_rate,
            one_time_capital_levy=levy,
            mineral_auction_share=entry.mineral_auction_share,
            periods_per_year=entry.periods_per_year,
        ))

    def _asset(self, entry: AssetSpec, conventions: Optional[CostConventions], loc: Loc) -> Optional[AssetRecord]:
        cost = entry.creation_cost
        if entry.work is not None:
            if conventions is None:
                return None
            cost = self.attempt(loc + ("work",), lambda: creation_cost(WorkItem(entry.work.kind, entry.work.quantity), conventions))
            if cost is None:
                return None
        return self.attempt(loc, lambda: AssetRecord(
            asset_id=entry.id,
            category=entry.category,
            income_flow=entry.income_flow,
            market_value=entry.market_value,
            takeover_bid=entry.takeover_bid,
            pv_net_investment=entry.pv_net_investment,
            creation_cost=cost,
            mortgage_value=entry.mortgage_value,
            publicly_traded=entry.publicly_traded,
            access_price=entry.access_price,
            depletion_periods=entry.depletion_periods,
        ))

    def assets(self, conventions: Optional[CostConventions]) -> Tuple[AssetRecord, ...]:
        built, seen = [], set()
        for i, entry in enumerate(self.document.assets):
            loc = ("assets", i)
            if entry.id in seen:
                self.issue(loc + ("id",), f"duplicate asset id {entry.id!r}")
                continue
            seen.add(entry.id)
            asset = self._asset(entry, conventions, loc)
            if asset is None:
                continue
            if asset.category in PRIZE_SCHEDULES and asset.creation_cost is None:
                self.issue(loc, f"asset {asset.asset_id}: prize categories need a creation_cost or work entry")
                continue
            built.append(asset)
        return tuple(built)

    def prize_schedules(self, schedules: Dict[str, ScheduleParams], assets: Tuple[AssetRecord, ...]) -> Dict[ScheduleKind, str]:
        chosen = {}
        doc = self.document
        for kind, name in doc.policy.prize_schedules.items():
            loc = ("policy", "prize_schedules", kind.value)
            if not kind.is_prize:
                self.issue(loc, f"{kind.value} is not a prize schedule")
            elif self.ref(loc, name, schedules, doc.schedules, "schedule") is not None:
                if schedules[name].kind is not kind:
                    self.issue(loc, f"schedule {name!r} is a {schedules[name].kind.value} schedule")
                else:
                    chosen[kind] = name

        needed = {PRIZE_SCHEDULES[a.category] for a in assets if a.category in PRIZE_SCHEDULES}
        for kind in sorted(needed - set(chosen), key=lambda k: k.value):
            if kind in doc.policy.prize_schedules:
                continue
            candidates = [name for name, entry in doc.schedules.items() if entry.kind is kind]
            if len(candidates) == 1 and candidates[0] in schedules:
                chosen[kind] = candidates[0]
            elif not candidates:
                self.issue(("assets",), f"assets need a {kind.value} schedule but none is declared")
            elif len(candidates) > 1:
                self.issue(("policy", "prize_schedules"), f"several {kind.value} schedules; name one under policy.prize_schedules")
        return chosen

    def welfare_weights(self) -> Optional[Dict[AssetCategory, float]]:
        weights = self.document.policy.welfare_weights
        if weights is None:
            return None
        for category, w in weights.items():
            if w < 0:
                self.issue(("policy", "welfare_weights", category.value), "welfare weights must be nonnegative")
        return dict(weights)


def grid_points(entry: GridSpec) -> np.ndarray:
    return np.linspace(entry.start, entry.stop, entry.points)


def default_grid(params: ScheduleParams) -> np.ndarray:
    stop = params.distribution.isf(DEFAULT_GRID_TAIL)
    return np.linspace(0.0, max(stop, params.junction), DEFAULT_GRID_POINTS)


def regime_warnings(name: str, params: ScheduleParams, grid: Sequence[float]) -> List[ScenarioIssue]:
    """Sample the marginal formula on the grid and report points where G-bar exceeds one."""
    points = np.asarray(grid, dtype=float)
    picks = np.unique(np.linspace(0, len(points) - 1, min(len(points), REGIME_SAMPLE_POINTS)).astype(int))
    warnings = []
    for x in points[picks]:
        x = float(x)
        if params.kind.is_prize and x < params.junction:
            continue
        try:
            rate = marginal_rate(params, x)
        except AssetaxError as e:
            warnings.append(ScenarioIssue(f"schedules.{name}", f"x={x:.6g}: {e}"))
            continue
        if not rate.in_regime:
            warnings.append(ScenarioIssue(
                f"schedules.{name}", f"x={x:.6g}: average weight above is {rate.gbar:.6g} > 1 (out of regime)"
            ))
    return warnings


def resolve_document(document: ScenarioDocument, lines: Optional[Dict[Loc, int]] = None, source: str = "<string>") -> Scenario:
    resolver = _Resolver(document, lines or {})
    distributions = resolver.distributions()
    weights = resolver.weights(distributions)
    elasticities = resolver.elasticities()
    schedules, grids = resolver.schedules(distributions, weights, elasticities)
    agents, agent_schedules = resolver.agents(schedules)
    conventions = resolver.conventions()
    policy = resolver.policy()
    assets = resolver.assets(conventions)
    prize_schedules = resolver.prize_schedules(schedules, assets)
    welfare_weights = resolver.welfare_weights()

    if resolver.issues:
        logger.error(f"❌ Scenario {source} has {len(resolver.issues)} error(s)")
        raise ScenarioError(resolver.issues)

    warnings = []
    for name, params in schedules.items():
        warnings.extend(regime_warnings(name, params, grids[name]))
    for w in warnings:
        logger.warning(f"{source}: {w}")

    return Scenario(
        name=document.name,
        distributions=distributions,
        weights=weights,
        elasticities=elasticities,
        schedules=schedules,
        grids=grids,
        agents=agents,
        agent_schedules=agent_schedules,
        assets=assets,
        policy=policy,
        conventions=conventions,
        prize_schedules=prize_schedules,
        welfare_weights=welfare_weights,
        document=document,
        warnings=tuple(warnings),
        source=source,
    )


def parse_scenario_text(text: str, source: str = "<string>") -> Scenario:
    document, lines = load_document(text, source)
    return resolve_document(document, lines, source)


def parse_scenario(path: Union[str, Path]) -> Scenario:
    """Read, validate and resolve a scenario file; raises ScenarioError listing every problem."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioError([ScenarioIssue(str(path), f"cannot read scenario: {e}")])
    scenario = parse_scenario_text(text, source=str(path))
    logger.info(
        f"Loaded scenario {scenario.name!r}: {len(scenario.schedules)} schedules, "
        f"{len(scenario.agents)} agents, {len(scenario.assets)} assets"
    )
    return scenario


def dump_document(document: ScenarioDocument) -> str:
    """Serialize a document back to scenario YAML; parsing the result gives the same document."""
    return yaml.safe_dump(document.model_dump(mode="json"), sort_keys=False, allow_unicode=True)
