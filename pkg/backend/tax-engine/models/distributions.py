"""
Distributions of labor income and created-asset values
Local Pareto parameters, welfare-weight profiles and averaged weights above a threshold
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

import numpy as np
from scipy import special, stats

from utils.config import get_settings
from utils.exceptions import DomainError, TailTruncationError
from utils.numerics import adaptive_quad
from utils.logger import setup_logger

logger = setup_logger(__name__)


class DistributionKind(str, Enum):
    PARETO = "pareto"
    LOGNORMAL = "lognormal"
    EMPIRICAL = "empirical"


class DistributionModel:
    """
    Base class for the value distributions the schedule formulas read.
    Subclasses implement cdf/sf/pdf/isf on the natural support.
    """

    kind: DistributionKind
    support_floor: float = 0.0

    def cdf(self, x: float) -> float:
        raise NotImplementedError

    def sf(self, x: float) -> float:
        return 1.0 - self.cdf(x)

    def pdf(self, x: float) -> float:
        raise NotImplementedError

    def isf(self, q: float) -> float:
        raise NotImplementedError

    def natural_lower(self) -> float:
        raise NotImplementedError

    def support(self) -> Tuple[float, float]:
        """Evaluation bounds: [lower, point where 1 - cdf reaches the tail cut]."""
        tail = get_settings().tail_prob
        lower = max(self.support_floor, self.natural_lower())
        return lower, self.isf(tail)


@dataclass(frozen=True)
class Pareto(DistributionModel):
    scale: float
    shape: float
    support_floor: float = 0.0
    kind: DistributionKind = field(default=DistributionKind.PARETO, init=False)

    def __post_init__(self):
        if not self.scale > 0:
            raise DomainError(f"Pareto scale must be positive, got {self.scale}")
        if not self.shape > 0:
            raise DomainError(f"Pareto shape must be positive, got {self.shape}")

    def cdf(self, x: float) -> float:
        if x <= self.scale:
            return 0.0
        return -math.expm1(-self.shape * math.log(x / self.scale))

    def sf(self, x: float) -> float:
        if x <= self.scale:
            return 1.0
        return (self.scale / x) ** self.shape

    def pdf(self, x: float) -> float:
        if x < self.scale:
            return 0.0
        return self.shape * self.scale ** self.shape / x ** (self.shape + 1.0)

    def isf(self, q: float) -> float:
        if q <= 0.0:
            return math.inf
        return self.scale * q ** (-1.0 / self.shape)

    def natural_lower(self) -> float:
        return self.scale


@dataclass(frozen=True)
class LogNormal(DistributionModel):
    mu: float
    sigma: float
    support_floor: float = 0.0
    kind: DistributionKind = field(default=DistributionKind.LOGNORMAL, init=False)

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError(f"LogNormal sigma must be positive, got {self.sigma}")

    def _z(self, x: float) -> float:
        return (math.log(x) - self.mu) / self.sigma

    def cdf(self, x: float) -> float:
        if x <= 0.0:
            return 0.0
        return float(special.ndtr(self._z(x)))

    def sf(self, x: float) -> float:
        if x <= 0.0:
            return 1.0
        return float(special.ndtr(-self._z(x)))

    def pdf(self, x: float) -> float:
        if x <= 0.0:
            return 0.0
        z = self._z(x)
        return math.exp(-0.5 * z * z) / (x * self.sigma * math.sqrt(2.0 * math.pi))

    def isf(self, q: float) -> float:
        if q <= 0.0:
            return math.inf
        if q >= 1.0:
            return 0.0
        return math.exp(self.mu - self.sigma * float(special.ndtri(q)))

    def natural_lower(self) -> float:
        # zero has no mass but the local Pareto parameter degenerates there
        return self.isf(1.0 - get_settings().tail_prob)


@dataclass(frozen=True)
class PiecewiseEmpirical(DistributionModel):
    """
    Histogram distribution: masses[k] spread uniformly over [edges[k], edges[k+1]].
    """
    edges: Tuple[float, ...]
    masses: Tuple[float, ...]
    support_floor: float = 0.0
    kind: DistributionKind = field(default=DistributionKind.EMPIRICAL, init=False)
    _rv: object = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        masses = np.asarray(self.masses, dtype=float)
        if edges.ndim != 1 or len(edges) < 2:
            raise DomainError("empirical distribution needs at least two edges")
        if len(masses) != len(edges) - 1:
            raise DomainError(f"expected {len(edges) - 1} masses for {len(edges)} edges, got {len(masses)}")
        if np.any(np.diff(edges) <= 0) or edges[0] < 0:
            raise DomainError("empirical edges must be nonnegative and strictly increasing")
        if np.any(masses < 0) or masses.sum() <= 0:
            raise DomainError("empirical masses must be nonnegative with positive total")
        object.__setattr__(self, "_rv", stats.rv_histogram((masses, edges), density=False))

    def cdf(self, x: float) -> float:
        return float(self._rv.cdf(x))

    def sf(self, x: float) -> float:
        return float(self._rv.sf(x))

    def pdf(self, x: float) -> float:
        return float(self._rv.pdf(x))

    def isf(self, q: float) -> float:
        if q <= 0.0:
            return float(self.edges[-1])
        return float(self._rv.isf(q))

    def natural_lower(self) -> float:
        return float(self.edges[0])


def cdf(model: DistributionModel, x: float) -> float:
    """Cumulative probability at x."""
    if x < 0:
        raise DomainError(f"x must be nonnegative, got {x}")
    if math.isinf(x):
        return 1.0
    return min(1.0, max(0.0, model.cdf(x)))


def _tail_mass(model: DistributionModel, x: float) -> float:
    tail = model.sf(x)
    if tail < get_settings().tail_prob:
        raise TailTruncationError(f"1 - cdf({x}) = {tail:.3e} is below the tail cut")
    return tail


def local_pareto_parameter(model: DistributionModel, x: float) -> float:
    """
    alpha(x) = x * density(x) / (1 - cdf(x)); constant for a Pareto distribution.
    """
    tail = _tail_mass(model, x)
    return x * model.pdf(x) / tail


class WeightFamily(str, Enum):
    CONSTANT = "constant"
    POWER = "power"
    STEP = "step"


@dataclass(frozen=True)
class WelfareWeightProfile:
    """
    Social marginal welfare weights g(x), rescaled so that their population mean
    under `model` is 1, plus G* for the recipients of innovation benefits.
    """
    model: DistributionModel
    family: WeightFamily = WeightFamily.CONSTANT
    nu: float = 0.0
    threshold: Optional[float] = None
    below: float = 1.0
    above: float = 0.0
    benefit_weight_Gstar: float = 1.0
    normalizer: float = field(default=1.0, init=False)

    def __post_init__(self):
        if self.benefit_weight_Gstar < 0 or not math.isfinite(self.benefit_weight_Gstar):
            raise DomainError(f"G* must be finite and nonnegative, got {self.benefit_weight_Gstar}")
        if self.family is WeightFamily.POWER and self.nu < 0:
            raise DomainError(f"power weight exponent must be nonnegative, got {self.nu}")
        if self.family is WeightFamily.STEP:
            if self.threshold is None:
                raise DomainError("step weights need a threshold")
            if self.below < 0 or self.above < 0:
                raise DomainError("step weights must be nonnegative")
        object.__setattr__(self, "normalizer", self._normalize())

    def raw(self, x: float) -> float:
        if self.family is WeightFamily.CONSTANT:
            return 1.0
        if self.family is WeightFamily.POWER:
            return x ** (-self.nu) if x > 0 else math.inf
        return self.below if x < self.threshold else self.above

    def weight(self, x: float) -> float:
        return self.normalizer * self.raw(x)

    def _normalize(self) -> float:
        if self.family is WeightFamily.CONSTANT:
            return 1.0
        lower, _ = self.model.support()
        mean = _mean_above(self.raw, self.model, lower, self.threshold)
        if not mean > 0:
            raise DomainError(f"weight profile has zero mass under {self.model}")
        return 1.0 / mean


@dataclass(frozen=True)
class ElasticityProfile:
    """
    Elasticity e(x), constant or a step function: values[k] applies from
    breakpoints[k-1] (inclusive) up to breakpoints[k].
    """
    values: Tuple[float, ...] = (0.25,)
    breakpoints: Tuple[float, ...] = ()

    def __post_init__(self):
        if len(self.values) != len(self.breakpoints) + 1:
            raise DomainError("elasticity profile needs one more value than breakpoints")
        if any(v < 0 for v in self.values):
            raise DomainError("elasticities must be nonnegative")
        if any(nxt <= prev for prev, nxt in zip(self.breakpoints, self.breakpoints[1:])):
            raise DomainError("elasticity breakpoints must be strictly increasing")

    @classmethod
    def constant(cls, e: float) -> "ElasticityProfile":
        return cls(values=(e,))

    def e_fn(self, x: float) -> float:
        index = int(np.searchsorted(np.asarray(self.breakpoints, dtype=float), x, side="right"))
        return self.values[index]


def _mean_above(
    fn,
    model: DistributionModel,
    x: float,
    kink: Optional[float] = None,
    dollar_weighted: bool = False,
) -> float:
    """
    E[fn(X) | X > x] (or the X-weighted version), integrated in tail-probability
    space: with X = isf(v * sf(x)), v runs over [tail cut / sf(x), 1].
    """
    tail = _tail_mass(model, x)
    cut = get_settings().tail_prob / tail
    breaks = [model.sf(kink) / tail] if kink is not None and kink > x else None

    if dollar_weighted:
        numerator = adaptive_quad(lambda v: fn(model.isf(v * tail)) * model.isf(v * tail), cut, 1.0, breaks)
        denominator = adaptive_quad(lambda v: model.isf(v * tail), cut, 1.0, breaks)
        return numerator / denominator
    return adaptive_quad(lambda v: fn(model.isf(v * tail)), cut, 1.0, breaks) / (1.0 - cut)


def avg_weight_above(
    profile: WelfareWeightProfile,
    model: DistributionModel,
    x: float,
    weighting: str = "person",
) -> float:
    """
    Average normalized welfare weight of persons above x. `weighting="dollar"`
    weights each person by x instead of counting heads.
    """
    if weighting not in ("person", "dollar"):
        raise DomainError(f"unknown weighting {weighting!r}")
    lower, _ = model.support()
    point = max(x, lower)
    if profile.family is WeightFamily.CONSTANT:
        _tail_mass(model, point)
        return 1.0
    return profile.normalizer * _mean_above(
        profile.raw, model, point, profile.threshold, dollar_weighted=(weighting == "dollar")
    )
