"""
Tests for asset valuation under recurring value taxes
"""

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from models.valuation import (
    MortgagedAsset,
    ValuationInput,
    abandonment_risk,
    annualize,
    asset_value_by_quadrature,
    asset_value_flows,
    asset_value_rate,
    captured_share,
    captured_share_at_frequency,
    level_payment,
    required_rate,
    split_tax_bill,
)
from utils.exceptions import DomainError

rates = st.floats(min_value=0.0, max_value=100.0, allow_nan=False)
discounts = st.floats(min_value=1e-3, max_value=1.0, allow_nan=False)
incomes = st.floats(min_value=0.0, max_value=1e6, allow_nan=False)


class TestAssetValue:

    def test_untaxed_perpetuity(self):
        assert asset_value_flows(100, 0, 0.05) == pytest.approx(2000)

    def test_tax_equal_to_income_leaves_nothing(self):
        assert asset_value_flows(100, 100, 0.05) == 0

    def test_partial_tax(self):
        assert asset_value_flows(100, 40, 0.05) == pytest.approx(1200)
        assert asset_value_by_quadrature(100, 40, 0.05) == pytest.approx(1200, rel=1e-6)

    def test_tax_above_income_gives_negative_value(self):
        assert asset_value_flows(100, 150, 0.05) == pytest.approx(-1000)

    def test_rate_form(self):
        assert asset_value_rate(100, 0, 0.05) == pytest.approx(2000)
        assert asset_value_rate(100, 0.10, 0.05) == pytest.approx(666.6666666666666)
        assert asset_value_rate(1, 0.15, 0.005) == pytest.approx(1 / 0.155)

    @pytest.mark.parametrize("fn", [asset_value_flows, asset_value_rate])
    @pytest.mark.parametrize("rho", [0.0, -0.01])
    def test_nonpositive_discount_rejected(self, fn, rho):
        with pytest.raises(DomainError):
            fn(100, 0, rho)

    def test_negative_rate_rejected(self):
        with pytest.raises(DomainError):
            asset_value_rate(100, -0.01, 0.05)

    def test_randomized_fixed_point_and_quadrature(self):
        rng = np.random.default_rng(20240601)
        for y, t, rho in zip(rng.uniform(0, 1000, 1000), rng.uniform(0, 1, 1000), rng.uniform(1e-3, 0.2, 1000)):
            v = asset_value_rate(y, t, rho)
            assert asset_value_flows(y, t * v, rho) == pytest.approx(v, rel=1e-10, abs=1e-12)
            assert asset_value_by_quadrature(y, t * v, rho) == pytest.approx(v, rel=1e-6, abs=1e-7)

    @given(incomes, rates, discounts)
    @settings(max_examples=300, deadline=None)
    def test_rate_form_is_fixed_point_of_flow_form(self, y, t, rho):
        v = asset_value_rate(y, t, rho)
        assert asset_value_flows(y, t * v, rho) == pytest.approx(v, rel=1e-10, abs=1e-9)


class TestCapturedShare:

    def test_fifteen_percent_per_month(self):
        assert abs(captured_share(0.15, 0.005) - 30 / 31) <= 1e-12

    def test_five_percent_per_month(self):
        assert abs(captured_share(0.05, 0.005) - 10 / 11) <= 1e-12

    def test_no_tax_captures_nothing(self):
        assert captured_share(0, 0.005) == 0

    def test_untaxed_minus_taxed_value_over_untaxed_value(self):
        y = 1.0
        untaxed, taxed = asset_value_rate(y, 0, 0.005), asset_value_rate(y, 0.15, 0.005)
        assert (untaxed - taxed) / untaxed == pytest.approx(30 / 31, abs=1e-12)

    @given(rates, rates, discounts)
    @settings(max_examples=200, deadline=None)
    def test_increasing_in_rate_and_bounded(self, t1, t2, rho):
        assume(t2 > t1 * 1.001 + 1e-6)
        low, high = captured_share(t1, rho), captured_share(t2, rho)
        assert 0 <= low < high < 1

    @given(rates, discounts, discounts)
    @settings(max_examples=200, deadline=None)
    def test_decreasing_in_discount(self, t, rho1, rho2):
        assume(t > 1e-6 and rho2 > rho1 * 1.001)
        assert captured_share(t, rho2) < captured_share(t, rho1)

    @given(rates, discounts, st.integers(min_value=1, max_value=365))
    @settings(max_examples=200, deadline=None)
    def test_payment_frequency_leaves_share_unchanged(self, t, rho, n):
        assert captured_share_at_frequency(t, rho, n) == pytest.approx(captured_share(t, rho), abs=1e-12)

    def test_frequency_needs_a_period(self):
        with pytest.raises(DomainError):
            captured_share_at_frequency(0.6, 0.06, 0)


class TestRequiredRate:

    def test_inverse_of_fifteen_percent(self):
        assert required_rate(30 / 31, 0.005) == pytest.approx(0.15, abs=1e-12)

    def test_zero_share(self):
        assert required_rate(0, 0.01) == 0

    def test_half_share(self):
        t = required_rate(0.5, 0.02)
        assert t == pytest.approx(0.02)
        assert captured_share(t, 0.02) == pytest.approx(0.5, abs=1e-12)

    @pytest.mark.parametrize("share", [1.0, 1.5, -0.1])
    def test_unreachable_share_rejected(self, share):
        with pytest.raises(DomainError):
            required_rate(share, 0.005)

    @given(rates, discounts)
    @settings(max_examples=300, deadline=None)
    def test_inverts_captured_share(self, t, rho):
        assert required_rate(captured_share(t, rho), rho) == pytest.approx(t, rel=1e-9, abs=1e-12)


class TestAnnualize:

    def test_monthly_to_annual(self):
        assert annualize(0.15, 12) == 1.80

    def test_single_period(self):
        assert annualize(0.02, 1) == 0.02

    def test_per_century(self):
        assert annualize(0.02, 100) == 2.00

    def test_needs_a_period(self):
        with pytest.raises(DomainError):
            annualize(0.15, 0)


class TestSplitTaxBill:

    @pytest.mark.parametrize("value, mortgage, bill, expected", [
        (100, 0, 10, (10, 0)),
        (100, 100, 10, (0, 10)),
        (200, 50, 8, (6, 2)),
        (100, 150, 10, (0, 10)),
    ])
    def test_examples(self, value, mortgage, bill, expected):
        owner, mortgagor = split_tax_bill(MortgagedAsset(value, mortgage, bill))
        assert owner == pytest.approx(expected[0])
        assert mortgagor == pytest.approx(expected[1])

    def test_zero_value_rejected(self):
        with pytest.raises(DomainError):
            MortgagedAsset(asset_value=0, mortgage_value=10, tax_bill=1)

    @given(
        st.floats(min_value=1e-3, max_value=1e9),
        st.floats(min_value=0.0, max_value=2e9),
        st.floats(min_value=0.0, max_value=1e7),
    )
    @settings(max_examples=300, deadline=None)
    def test_portions_nonnegative_and_sum_to_bill(self, value, mortgage, bill):
        owner, mortgagor = split_tax_bill(MortgagedAsset(value, mortgage, bill))
        assert owner >= 0 and mortgagor >= 0
        assert abs(owner + mortgagor - bill) <= 2 * math.ulp(bill)


class TestValuationInput:

    def test_methods(self):
        asset = ValuationInput(income_flow_y=110, tax_rate_t=0.05, discount_rate_rho=0.005)
        assert asset.value_with_rate_tax() == pytest.approx(2000)
        assert asset.captured_share() == pytest.approx(10 / 11, abs=1e-12)
        assert asset.annual_tax_rate() == 0.6

    def test_flat_tax(self):
        asset = ValuationInput(income_flow_y=100, tax_flow_T=40, discount_rate_rho=0.05)
        assert asset.value_with_flat_tax() == pytest.approx(1200)

    @pytest.mark.parametrize("kwargs", [
        {"discount_rate_rho": 0.0},
        {"tax_rate_t": -0.1},
        {"income_flow_y": -1.0},
        {"periods_per_year": 0},
    ])
    def test_invariants(self, kwargs):
        args = {"income_flow_y": 100.0, **kwargs}
        with pytest.raises(DomainError):
            ValuationInput(**args)


class TestRecurringPayments:

    def test_single_period_payment_grows_by_interest(self):
        assert level_payment(1000, 1, 0.01) == pytest.approx(1010)

    def test_payments_discount_back_to_present_value(self):
        payment = level_payment(5000, 120, 0.005)
        pv = sum(payment / 1.005 ** k for k in range(1, 121))
        assert pv == pytest.approx(5000, rel=1e-12)

    def test_needs_a_period(self):
        with pytest.raises(DomainError):
            level_payment(1000, 0, 0.01)


class TestAbandonment:

    def test_tax_above_rent(self):
        assert abandonment_risk(income_flow=100, tax_flow=120, asset_value=500)

    def test_sustainable_tax(self):
        assert not abandonment_risk(income_flow=110, tax_flow=100, asset_value=2000, mortgage_value=1500)

    def test_underwater_mortgage_only_matters_when_mortgagee_untaxed(self):
        assert not abandonment_risk(110, 100, 2000, mortgage_value=3000, mortgagee_taxed=True)
        assert abandonment_risk(110, 100, 2000, mortgage_value=3000, mortgagee_taxed=False)
