"""
Response schemas for the ASSETAX tax engine
"""

from pydantic import BaseModel, ConfigDict, Field
from typing import Optional, Dict, Any, List


class CategoryTotals(BaseModel):
    model_config = ConfigDict(extra="forbid")

    asset_count: int = 0
    recurring_tax: float = 0.0
    prizes_paid: float = 0.0
    assessor_awards: float = 0.0
    revenue_channels: Dict[str, float] = Field(default_factory=dict)
    net_recurring_revenue: float = Field(default=0.0, description="Recurring tax net of assessor awards, per period")
    net_one_time_revenue: float = Field(default=0.0, description="Auction, severance and levy proceeds net of prizes")


class RevenueReport(BaseModel):
    model_config = ConfigDict(extra="forbid")

    assets: List[Dict[str, Any]] = Field(default_factory=list)
    by_category: Dict[str, CategoryTotals] = Field(default_factory=dict)
    totals: CategoryTotals = Field(default_factory=CategoryTotals)
    abolished: List[str] = Field(default_factory=list)
    welfare_weighted_transfers: Optional[Dict[str, float]] = None


class SteadyStateRow(BaseModel):
    model_config = ConfigDict(extra="forbid")

    agent: str
    schedule: str
    c: float
    k: float
    s: float
    flow_utility: float
    pv_utility: float
    foc_residual: float
    boundary: Optional[str] = None
    kink: bool = False


class CheckResult(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    passed: bool
    expected: Optional[str] = None
    observed: Optional[str] = None
    detail: Optional[str] = None


class VerificationReport(BaseModel):
    model_config = ConfigDict(extra="forbid")

    checks: List[CheckResult] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)
