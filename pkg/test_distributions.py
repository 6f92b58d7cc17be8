"""
Tests for value distributions, local Pareto parameters and welfare weights
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from models.distributions import (
    ElasticityProfile,
    LogNormal,
    Pareto,
    PiecewiseEmpirical,
    WeightFamily,
    WelfareWeightProfile,
    avg_weight_above,
    cdf,
    local_pareto_parameter,
)
from utils.exceptions import DomainError, TailTruncationError


@pytest.fixture
def pareto():
    return Pareto(scale=1.0, shape=2.0)


class TestParetoAndCdf:

    def test_cdf_values(self, pareto):
        assert cdf(pareto, 0.5) == 0.0
        assert cdf(pareto, 2.0) == pytest.approx(0.75)
        assert cdf(pareto, math.inf) == 1.0

    def test_negative_x_rejected(self, pareto):
        with pytest.raises(DomainError):
            cdf(pareto, -1.0)

    @pytest.mark.parametrize("kwargs", [{"scale": 0.0, "shape": 2.0}, {"scale": 1.0, "shape": -1.0}])
    def test_invalid_parameters(self, kwargs):
        with pytest.raises(DomainError):
            Pareto(**kwargs)

    def test_support_ends_at_tail_cut(self, pareto):
        lower, upper = pareto.support()
        assert lower == 1.0
        assert upper == pytest.approx(1e6)

    @given(
        st.floats(min_value=0.1, max_value=100.0),
        st.floats(min_value=0.2, max_value=5.0),
        st.floats(min_value=1.0, max_value=10.0),
    )
    @settings(max_examples=200, deadline=None)
    def test_local_parameter_is_constant(self, scale, shape, ratio):
        model = Pareto(scale=scale, shape=shape)
        assert local_pareto_parameter(model, scale * ratio) == pytest.approx(shape, rel=1e-12)

    def test_beyond_tail_cut_raises(self, pareto):
        with pytest.raises(TailTruncationError):
            local_pareto_parameter(pareto, 1e7)


class TestOtherDistributions:

    def test_lognormal_local_parameter_increases(self):
        model = LogNormal(mu=3.0, sigma=0.6)
        alphas = [local_pareto_parameter(model, x) for x in (5.0, 20.0, 50.0, 150.0)]
        assert all(b > a for a, b in zip(alphas, alphas[1:]))

    def test_lognormal_support_floor(self):
        lower, _ = LogNormal(mu=3.0, sigma=0.6, support_floor=2.0).support()
        assert lower == 2.0

    def test_lognormal_needs_positive_sigma(self):
        with pytest.raises(DomainError):
            LogNormal(mu=0.0, sigma=0.0)

    def test_empirical_histogram(self):
        model = PiecewiseEmpirical(edges=(0.0, 1.0, 2.0), masses=(1.0, 1.0))
        assert cdf(model, 1.0) == pytest.approx(0.5)
        assert cdf(model, 1.5) == pytest.approx(0.75)
        assert local_pareto_parameter(model, 1.5) == pytest.approx(3.0)

    @pytest.mark.parametrize("edges, masses", [
        ((0.0,), ()),
        ((0.0, 1.0), (1.0, 1.0)),
        ((0.0, 2.0, 1.0), (1.0, 1.0)),
        ((0.0, 1.0), (0.0,)),
    ])
    def test_empirical_validation(self, edges, masses):
        with pytest.raises(DomainError):
            PiecewiseEmpirical(edges=edges, masses=masses)


class TestWelfareWeights:

    def test_constant_weights_average_one(self, pareto):
        profile = WelfareWeightProfile(model=pareto)
        for x in (0.0, 1.0, 7.5, 1000.0):
            assert avg_weight_above(profile, pareto, x) == 1.0

    def test_power_weights_closed_form(self, pareto):
        profile = WelfareWeightProfile(model=pareto, family=WeightFamily.POWER, nu=0.5)
        assert profile.normalizer == pytest.approx(1.25, rel=1e-9)
        for x in (1.0, 4.0, 100.0):
            assert avg_weight_above(profile, pareto, x) == pytest.approx(x ** -0.5, rel=1e-6)

    def test_power_weights_are_normalized(self, pareto):
        profile = WelfareWeightProfile(model=pareto, family=WeightFamily.POWER, nu=0.5)
        assert avg_weight_above(profile, pareto, 0.0) == pytest.approx(1.0, rel=1e-9)

    def test_average_above_lower_bound_is_one_on_floored_lognormal(self):
        model = LogNormal(mu=3.0, sigma=0.6, support_floor=2.0)
        profile = WelfareWeightProfile(model=model, family=WeightFamily.POWER, nu=1.0)
        assert avg_weight_above(profile, model, 2.0) == pytest.approx(1.0, abs=1e-12)

    def test_average_is_nonincreasing_for_decreasing_weights(self):
        model = LogNormal(mu=3.0, sigma=0.6, support_floor=2.0)
        profile = WelfareWeightProfile(model=model, family=WeightFamily.POWER, nu=1.0)
        values = [avg_weight_above(profile, model, x) for x in np.linspace(2.0, 150.0, 12)]
        assert all(b <= a + 1e-9 for a, b in zip(values, values[1:]))

    def test_step_weights(self, pareto):
        profile = WelfareWeightProfile(
            model=pareto, family=WeightFamily.STEP, threshold=5.0, below=1.0, above=0.0
        )
        assert profile.normalizer == pytest.approx(1 / 0.96, rel=1e-9)
        assert avg_weight_above(profile, pareto, 2.0) == pytest.approx(0.84 / 0.96, rel=1e-6)
        assert avg_weight_above(profile, pareto, 6.0) == 0.0

    def test_step_weights_concentrated_above_exceed_one(self, pareto):
        profile = WelfareWeightProfile(
            model=pareto, family=WeightFamily.STEP, threshold=5.0, below=0.0, above=1.0
        )
        assert avg_weight_above(profile, pareto, 10.0) == pytest.approx(25.0, rel=1e-6)

    def test_dollar_weighting(self, pareto):
        profile = WelfareWeightProfile(model=pareto, family=WeightFamily.POWER, nu=0.5)
        value = avg_weight_above(profile, pareto, 4.0, weighting="dollar")
        assert value == pytest.approx(5 / 6 * 4.0 ** -0.5, rel=1e-4)

    def test_unknown_weighting(self, pareto):
        profile = WelfareWeightProfile(model=pareto)
        with pytest.raises(DomainError):
            avg_weight_above(profile, pareto, 2.0, weighting="household")

    @pytest.mark.parametrize("kwargs", [
        {"family": WeightFamily.POWER, "nu": -0.5},
        {"family": WeightFamily.STEP},
        {"family": WeightFamily.STEP, "threshold": 2.0, "below": -1.0},
        {"benefit_weight_Gstar": -1.0},
        {"benefit_weight_Gstar": math.inf},
    ])
    def test_invalid_profiles(self, pareto, kwargs):
        with pytest.raises(DomainError):
            WelfareWeightProfile(model=pareto, **kwargs)

    def test_zero_mass_profile(self, pareto):
        with pytest.raises(DomainError):
            WelfareWeightProfile(model=pareto, family=WeightFamily.STEP, threshold=2.0, below=0.0, above=0.0)


class TestElasticity:

    def test_constant(self):
        assert ElasticityProfile.constant(0.4).e_fn(123.0) == 0.4

    def test_step_breakpoint_belongs_to_upper_piece(self):
        profile = ElasticityProfile(values=(0.25, 0.5), breakpoints=(10.0,))
        assert profile.e_fn(9.99) == 0.25
        assert profile.e_fn(10.0) == 0.5

    @pytest.mark.parametrize("values, breakpoints", [
        ((0.25,), (1.0,)),
        ((-0.1,), ()),
        ((0.1, 0.2, 0.3), (5.0, 1.0)),
    ])
    def test_invalid(self, values, breakpoints):
        with pytest.raises(DomainError):
            ElasticityProfile(values=values, breakpoints=breakpoints)


@pytest.mark.parametrize("shape", [1.1, 1.5, 2.0, 3.0])
def test_pareto_constancy_on_grid(shape):
    model = Pareto(scale=2.0, shape=shape)
    for x in np.linspace(2.0, 200.0, 100):
        assert abs(local_pareto_parameter(model, float(x)) - shape) <= 1e-9


def density_pieces(model):
    """Intervals covering the evaluation support, split where quad needs help."""
    lower, upper = model.support()
    if isinstance(model, PiecewiseEmpirical):
        nodes = np.asarray(model.edges, dtype=float)
    else:
        nodes = np.geomspace(lower, upper, 40)
    return list(zip(nodes[:-1], nodes[1:]))


@pytest.mark.parametrize("model", [
    Pareto(scale=1.0, shape=2.0),
    LogNormal(mu=3.0, sigma=0.6),
    PiecewiseEmpirical(edges=(0.0, 1.0, 2.0, 4.0), masses=(1.0, 2.0, 1.0)),
], ids=["pareto", "lognormal", "empirical"])
class TestDensity:

    def test_density_agrees_with_cdf(self, model):
        for a, b in density_pieces(model):
            mass, _ = integrate.quad(model.pdf, a, b, epsabs=1e-13, epsrel=1e-12, limit=200)
            assert mass == pytest.approx(cdf(model, b) - cdf(model, a), abs=1e-9)

    def test_density_mass_is_one(self, model):
        total = sum(
            integrate.quad(model.pdf, a, b, epsabs=1e-13, epsrel=1e-12, limit=200)[0]
            for a, b in density_pieces(model)
        )
        assert total == pytest.approx(1.0, abs=1e-6)
