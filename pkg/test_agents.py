"""
Tests for agent steady states under prize and wage schedules
"""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from models.agents import (
    AgentProfile,
    Disutility,
    SteadyState,
    WealthUtility,
    WealthUtilityFamily,
    brute_force_best_response,
    present_value_by_quadrature,
    present_value_utility,
    solve_steady_state,
    solve_wealth,
)
from models.schedules import ScheduleKind, tabulate_schedule
from services.verification_service import linear_prize_agent
from utils.exceptions import ConfigurationError, DomainError, GridBoundaryError


def make_agent(**kwargs):
    defaults = dict(
        delta=0.06,
        wealth_utility=WealthUtility(),
        disutility=Disutility(elasticity=1.0, psi=1.0),
        r=0.04,
        channel=ScheduleKind.INNOVATION_PRIZE,
    )
    defaults.update(kwargs)
    return AgentProfile(**defaults)


class TestWealth:

    def test_log_utility(self):
        assert solve_wealth(make_agent()) == pytest.approx(50.0, rel=1e-9)

    def test_crra_utility(self):
        utility = WealthUtility(family=WealthUtilityFamily.CRRA, beta=1.0, sigma=2.0)
        agent = make_agent(delta=0.07, wealth_utility=utility)
        assert solve_wealth(agent) == pytest.approx(utility.closed_form_wealth(0.03), rel=1e-9)

    def test_patient_agent_has_no_interior_wealth(self):
        with pytest.raises(DomainError):
            solve_wealth(make_agent(delta=0.04))

    @pytest.mark.parametrize("kwargs", [{"r": 0.0}, {"n": -1.0}, {"k_init": -1.0}])
    def test_invalid_profiles(self, kwargs):
        with pytest.raises(DomainError):
            make_agent(**kwargs)

    @pytest.mark.parametrize("kwargs", [
        {"beta": 0.0},
        {"family": WealthUtilityFamily.CRRA, "sigma": 1.0},
    ])
    def test_invalid_wealth_utility(self, kwargs):
        with pytest.raises(DomainError):
            WealthUtility(**kwargs)


class TestSteadyState:

    def test_linear_prize_closed_form(self):
        rng = np.random.default_rng(20240601)
        for i in range(20):
            agent, schedule, s_star, k_star = linear_prize_agent(rng, i)
            ss = solve_steady_state(agent, schedule)
            assert ss.s == pytest.approx(s_star, abs=1e-8)
            assert ss.k == pytest.approx(k_star, abs=1e-8)
            assert abs(ss.foc_residual) <= 1e-8
            assert ss.boundary is None
            assert not ss.kink

    def test_budget_identity(self):
        agent, schedule, _, _ = linear_prize_agent(np.random.default_rng(3))
        ss = solve_steady_state(agent, schedule)
        assert ss.c == agent.n + agent.r * ss.k + schedule.reward_at(ss.s)

    def test_wage_earner_keeps_net_pay(self):
        agent = make_agent(channel=ScheduleKind.WAGE_TAX, disutility=Disutility(elasticity=1.0, psi=10.0))
        schedule = tabulate_schedule(ScheduleKind.WAGE_TAX, np.linspace(0.0, 20.0, 41), lambda z: 0.3)
        ss = solve_steady_state(agent, schedule)
        assert ss.s == pytest.approx(7.0, rel=1e-9)

    def test_kink_at_floor(self):
        agent = make_agent(disutility=Disutility(elasticity=1.0, psi=5.0))
        schedule = tabulate_schedule(
            ScheduleKind.INNOVATION_PRIZE, np.linspace(0.0, 10.0, 101), lambda x: 0.2, junction=3.0
        )
        ss = solve_steady_state(agent, schedule)
        assert ss.s == pytest.approx(3.0, abs=1e-9)
        assert ss.kink

    def test_boundary_solution(self):
        agent = make_agent(disutility=Disutility(elasticity=1.0, psi=100.0))
        schedule = tabulate_schedule(ScheduleKind.INNOVATION_PRIZE, np.linspace(0.0, 10.0, 11), lambda x: 1.0)
        ss = solve_steady_state(agent, schedule)
        assert ss.s == 10.0
        assert ss.boundary == "upper"

    @given(st.integers(min_value=0, max_value=2**32 - 1), st.floats(min_value=1.0, max_value=1.5))
    @settings(max_examples=25, deadline=None)
    def test_richer_prize_raises_effort_not_wealth(self, seed, scale):
        agent, schedule, _, _ = linear_prize_agent(np.random.default_rng(seed))
        p = float(schedule.marginal_at(0.0))
        richer = tabulate_schedule(ScheduleKind.INNOVATION_PRIZE, schedule.grid, lambda x: p * scale)
        base, boosted = solve_steady_state(agent, schedule), solve_steady_state(agent, richer)
        assert boosted.s >= base.s - 1e-9
        assert boosted.k == base.k

    def test_channel_mismatch(self):
        schedule = tabulate_schedule(ScheduleKind.WAGE_TAX, np.linspace(0.0, 10.0, 11), lambda z: 0.3)
        with pytest.raises(ConfigurationError):
            solve_steady_state(make_agent(), schedule)


class TestPresentValue:

    def test_unit_flow_forever_is_worth_one(self):
        agent = make_agent(delta=0.05)
        ss = SteadyState(c=1.0, k=0.0, s=0.0, flow_utility=1.0, pv_utility=1.0)
        assert present_value_by_quadrature(agent, ss) == pytest.approx(1.0, abs=1e-8)

    def test_closed_form_matches_quadrature(self):
        agent, schedule, _, _ = linear_prize_agent(np.random.default_rng(5))
        ss = solve_steady_state(agent, schedule)
        assert present_value_utility(agent, ss) == ss.pv_utility
        assert present_value_by_quadrature(agent, ss) == pytest.approx(ss.pv_utility, rel=1e-9, abs=1e-8)

    def test_initial_wealth_enters_through_jump(self):
        agent, schedule, _, _ = linear_prize_agent(np.random.default_rng(5))
        ss = solve_steady_state(agent, schedule)
        richer = AgentProfile(
            delta=agent.delta,
            wealth_utility=agent.wealth_utility,
            disutility=agent.disutility,
            k_init=agent.k_init + 10.0,
            n=agent.n,
            r=agent.r,
        )
        assert present_value_utility(richer, ss) == pytest.approx(ss.pv_utility - 10.0 * agent.delta)


class TestGridSearchOracle:

    def test_first_order_solver_agrees_with_grid_search(self):
        rng = np.random.default_rng(20240601)
        for i in range(100):
            agent, schedule, s_star, k_star = linear_prize_agent(rng, i)
            ss = solve_steady_state(agent, schedule)
            s_grid = np.linspace(0.0, 2.0 * s_star, 400)
            k_grid = np.linspace(0.5 * k_star, 1.5 * k_star, 400)
            best = brute_force_best_response(agent, schedule, s_grid, k_grid)
            assert abs(best.s - ss.s) <= s_grid[1] - s_grid[0]
            assert abs(best.k - ss.k) <= k_grid[1] - k_grid[0]

    def test_zero_prize_means_no_effort(self):
        agent = make_agent()
        schedule = tabulate_schedule(ScheduleKind.INNOVATION_PRIZE, np.linspace(0.0, 10.0, 11), lambda x: 0.0)
        k_star = solve_wealth(agent)
        k_grid = np.linspace(0.5 * k_star, 1.5 * k_star, 400)
        best = brute_force_best_response(agent, schedule, np.linspace(0.0, 5.0, 400), k_grid)
        assert best.s == 0.0
        assert abs(best.k - k_star) <= k_grid[1] - k_grid[0]
        assert solve_steady_state(agent, schedule).s == 0.0

    def test_argmax_on_grid_edge(self):
        agent, schedule, s_star, k_star = linear_prize_agent(np.random.default_rng(11))
        s_grid = np.linspace(0.0, 2.0 * s_star, 50)
        k_grid = np.linspace(0.1 * k_star, 0.5 * k_star, 50)
        with pytest.raises(GridBoundaryError):
            brute_force_best_response(agent, schedule, s_grid, k_grid)
