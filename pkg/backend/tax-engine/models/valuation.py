"""
Asset valuation under recurring value taxes
Perpetuity values, captured shares, rate inversion and mortgage splitting of tax bills
"""

import math
from dataclasses import dataclass
from decimal import Decimal
from typing import Tuple

from utils.exceptions import DomainError
from utils.numerics import adaptive_quad

# e^{-rho*H} below this bounds the truncated tail of the valuation integral
QUADRATURE_TAIL = 1e-10


@dataclass(frozen=True)
class ValuationInput:
    """
    Constant-flow asset: income y and either a flat tax flow T or a value tax rate t,
    both per payment period, discounted at rho per period.
    """
    income_flow_y: float
    tax_flow_T: float = 0.0
    tax_rate_t: float = 0.0
    discount_rate_rho: float = 0.005
    periods_per_year: int = 12

    def __post_init__(self):
        if not self.discount_rate_rho > 0:
            raise DomainError(f"discount rate must be positive, got {self.discount_rate_rho}")
        if self.tax_rate_t < 0:
            raise DomainError(f"tax rate must be nonnegative, got {self.tax_rate_t}")
        if self.income_flow_y < 0:
            raise DomainError(f"income flow must be nonnegative, got {self.income_flow_y}")
        if self.periods_per_year < 1:
            raise DomainError(f"periods_per_year must be at least 1, got {self.periods_per_year}")

    def value_with_flat_tax(self) -> float:
        return asset_value_flows(self.income_flow_y, self.tax_flow_T, self.discount_rate_rho)

    def value_with_rate_tax(self) -> float:
        return asset_value_rate(self.income_flow_y, self.tax_rate_t, self.discount_rate_rho)

    def captured_share(self) -> float:
        return captured_share(self.tax_rate_t, self.discount_rate_rho)

    def annual_tax_rate(self) -> float:
        return annualize(self.tax_rate_t, self.periods_per_year)


@dataclass(frozen=True)
class MortgagedAsset:
    asset_value: float
    mortgage_value: float
    tax_bill: float

    def __post_init__(self):
        if not self.asset_value > 0:
            raise DomainError(f"asset value must be positive, got {self.asset_value}")
        if self.mortgage_value < 0:
            raise DomainError(f"mortgage value must be nonnegative, got {self.mortgage_value}")
        if self.tax_bill < 0:
            raise DomainError(f"tax bill must be nonnegative, got {self.tax_bill}")


def _require_positive_rho(rho: float) -> None:
    if not rho > 0:
        raise DomainError(f"discount rate must be positive, got {rho}")


def asset_value_flows(y: float, T: float, rho: float) -> float:
    """
    Present value of a constant after-tax flow y - T discounted at rho.
    Negative when T > y; abandonment is the policy layer's concern.
    """
    _require_positive_rho(rho)
    return (y - T) / rho


def asset_value_rate(y: float, t: float, rho: float) -> float:
    """
    Value of an asset taxed at t of its value per period: y / (t + rho).
    """
    _require_positive_rho(rho)
    if t < 0:
        raise DomainError(f"tax rate must be nonnegative, got {t}")
    return y / (t + rho)


def asset_value_by_quadrature(y: float, T: float, rho: float) -> float:
    """
    Integrate (y - T) e^{-rho tau} numerically up to the horizon where the
    remaining tail is below QUADRATURE_TAIL of the flow.
    """
    _require_positive_rho(rho)
    horizon = -math.log(QUADRATURE_TAIL) / rho
    flow = y - T
    return adaptive_quad(lambda tau: flow * math.exp(-rho * tau), 0.0, horizon)


def captured_share(t: float, rho: float) -> float:
    """
    Fraction of the untaxed value y/rho taken by a value tax at rate t.
    t and rho must be quoted per the same payment period; this cannot be checked.
    """
    _require_positive_rho(rho)
    if t < 0:
        raise DomainError(f"tax rate must be nonnegative, got {t}")
    return t / (t + rho)


def captured_share_at_frequency(annual_t: float, annual_rho: float, periods: int) -> float:
    """Capture share when annual t and rho are paid in `periods` equal instalments."""
    if periods < 1:
        raise DomainError(f"periods must be at least 1, got {periods}")
    return captured_share(annual_t / periods, annual_rho / periods)


def required_rate(target_share: float, rho: float) -> float:
    """Per-period value tax rate that captures target_share of untaxed value."""
    _require_positive_rho(rho)
    if not 0 <= target_share < 1:
        raise DomainError(
            f"target share must lie in [0, 1); 100% is unreachable at a finite rate, got {target_share}"
        )
    return rho * target_share / (1.0 - target_share)


def annualize(per_period_rate: float, periods_per_year: int) -> float:
    """
    Simple (non-compounded) scaling of a per-period rate. The rate is scaled as
    quoted, so 0.15 over 12 periods is 1.8 rather than 1.7999999999999998.
    """
    if periods_per_year < 1:
        raise DomainError(f"periods_per_year must be at least 1, got {periods_per_year}")
    return float(Decimal(repr(per_period_rate)) * periods_per_year)


def split_tax_bill(asset: MortgagedAsset) -> Tuple[float, float]:
    """
    Split a tax bill between owner and mortgagee in proportion to the
    mortgagee's share of the asset. Returns (owner_portion, mortgagor_portion).
    """
    covered = min(asset.mortgage_value, asset.asset_value)
    if covered == asset.asset_value:
        mortgagor_portion = asset.tax_bill
    else:
        mortgagor_portion = min(asset.tax_bill, asset.tax_bill * covered / asset.asset_value)
    owner_portion = asset.tax_bill - mortgagor_portion
    return owner_portion, mortgagor_portion


def level_payment(present_value: float, n_periods: int, rho: float) -> float:
    """
    Level payment per period over n_periods with the given present value at rho.
    """
    _require_positive_rho(rho)
    if n_periods < 1:
        raise DomainError(f"n_periods must be at least 1, got {n_periods}")
    return present_value * rho / (1.0 - (1.0 + rho) ** (-n_periods))


def abandonment_risk(
    income_flow: float,
    tax_flow: float,
    asset_value: float,
    mortgage_value: float = 0.0,
    mortgagee_taxed: bool = True,
) -> bool:
    """
    True when the owner gains by walking away: the tax bill exceeds the rent,
    or (if the mortgagee bears no share of the bill) post-tax value has fallen
    below the mortgage.
    """
    if tax_flow > income_flow:
        return True
    if not mortgagee_taxed and mortgage_value > asset_value:
        return True
    return False
