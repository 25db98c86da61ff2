import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stochuc.system import (CommitmentSchedule, emissions, fuel_cost, uc_cost,
                            validate_config, validate_scenarios)

from conftest import make_battery, make_carbon, make_config, make_scenarios, make_unit


class TestFuelCost:
    def test_zero_curve(self):
        u = make_unit(fuel_const=0, fuel_lin=0, fuel_quad=0)
        assert fuel_cost(u, 50.0, 700.0) == 0.0

    def test_direct_evaluation(self):
        u = make_unit(fuel_const=100, fuel_lin=2, fuel_quad=0.01)
        assert fuel_cost(u, 50.0, 1.0) == pytest.approx(225.0)

    def test_constant_term_only(self):
        u = make_unit(fuel_const=100, fuel_lin=2, fuel_quad=0.01)
        assert fuel_cost(u, 0.0, 1.0) == pytest.approx(100.0)

    def test_negative_power_rejected(self):
        with pytest.raises(ValueError):
            fuel_cost(make_unit(), -1.0, 700.0)

    @given(p1=st.floats(0, 500), p2=st.floats(0, 500), alpha=st.floats(0, 1),
           quad=st.floats(0, 1e-3))
    @settings(max_examples=60, deadline=None)
    def test_convex_in_power(self, p1, p2, alpha, quad):
        u = make_unit(fuel_const=3.0, fuel_lin=0.3, fuel_quad=quad)
        mid = alpha * p1 + (1 - alpha) * p2
        blend = alpha * fuel_cost(u, p1, 700.0) + (1 - alpha) * fuel_cost(u, p2, 700.0)
        assert fuel_cost(u, mid, 700.0) <= blend + 1e-6 * (1 + abs(blend))


class TestEmissions:
    def test_zero_curve(self):
        u = make_unit(emis_const=0, emis_lin=0, emis_quad=0)
        assert emissions(u, 100.0) == 0.0

    def test_direct_evaluation(self):
        u = make_unit(emis_const=10, emis_lin=0.9, emis_quad=0.0001)
        assert emissions(u, 100.0) == pytest.approx(101.0)

    def test_constant_term_only(self):
        u = make_unit(emis_const=10, emis_lin=0.9, emis_quad=0.0001)
        assert emissions(u, 0.0) == pytest.approx(10.0)

    def test_negative_power_rejected(self):
        with pytest.raises(ValueError):
            emissions(make_unit(), -0.5)

    @given(p1=st.floats(0, 500), p2=st.floats(0, 500), alpha=st.floats(0, 1),
           quad=st.floats(0, 1e-3))
    @settings(max_examples=60, deadline=None)
    def test_convex_in_power(self, p1, p2, alpha, quad):
        u = make_unit(emis_const=2.0, emis_lin=0.95, emis_quad=quad)
        mid = alpha * p1 + (1 - alpha) * p2
        blend = alpha * emissions(u, p1) + (1 - alpha) * emissions(u, p2)
        assert emissions(u, mid) <= blend + 1e-6 * (1 + abs(blend))


class TestUcCost:
    def test_all_off_no_transitions(self):
        sched = CommitmentSchedule(on=np.zeros((1, 4)), initial_state=np.zeros(1))
        assert uc_cost(sched, [make_unit()]) == 0.0

    def test_one_startup_one_shutdown(self):
        u = make_unit(startup_cost=1000, shutdown_cost=500)
        sched = CommitmentSchedule(on=np.array([[0, 1, 1, 0.0]]),
                                   initial_state=np.zeros(1))
        assert uc_cost(sched, [u]) == pytest.approx(1500.0)

    def test_always_on_no_transitions(self):
        sched = CommitmentSchedule(on=np.ones((1, 4)), initial_state=np.ones(1))
        assert uc_cost(sched, [make_unit()]) == 0.0

    def test_initial_state_startup_counted(self):
        u = make_unit(startup_cost=777, shutdown_cost=0)
        sched = CommitmentSchedule(on=np.ones((1, 2)), initial_state=np.zeros(1))
        assert uc_cost(sched, [u]) == pytest.approx(777.0)

    def test_non_binary_rejected(self):
        sched = CommitmentSchedule(on=np.array([[0.5, 1.0]]),
                                   initial_state=np.zeros(1))
        with pytest.raises(ValueError):
            uc_cost(sched, [make_unit()])

    def test_dimension_mismatch_rejected(self):
        sched = CommitmentSchedule(on=np.ones((2, 3)), initial_state=np.ones(2))
        with pytest.raises(ValueError):
            uc_cost(sched, [make_unit()])

    @given(st.lists(st.integers(0, 1), min_size=1, max_size=12))
    @settings(max_examples=60, deadline=None)
    def test_invariant_under_appending_unchanged_period(self, pattern):
        u = make_unit(startup_cost=123, shutdown_cost=45)
        on = np.array([pattern], dtype=float)
        sched = CommitmentSchedule(on=on, initial_state=np.zeros(1))
        extended = CommitmentSchedule(
            on=np.hstack([on, on[:, -1:]]), initial_state=np.zeros(1))
        assert uc_cost(sched, [u]) == uc_cost(extended, [u])


class TestValidateConfig:
    def test_well_formed(self):
        config = make_config(units=(make_unit(), make_unit(name="T2")))
        assert validate_config(config).ok

    def test_inverted_soc_bounds(self):
        config = make_config(battery=make_battery(soc_min=0.9, soc_max=0.3,
                                                  initial_energy=50.0))
        report = validate_config(config)
        assert not report.ok
        assert any(v.path == "battery.soc_min" for v in report.violations)

    def test_load_horizon_mismatch(self):
        config = make_config(load=np.ones(23), horizon=24)
        report = validate_config(config)
        assert [v.path for v in report.violations] == ["horizon"]

    # one mutation per invariant: exactly that violation must be reported
    MUTATIONS = [
        ("units[0].p_min", lambda c: _mutate_unit(c, p_min=-1.0)),
        ("units[0].p_min", lambda c: _mutate_unit(c, p_min=500.0)),  # > p_max
        ("units[0].ramp_up", lambda c: _mutate_unit(c, ramp_up=0.0)),
        ("units[0].ramp_down", lambda c: _mutate_unit(c, ramp_down=-3.0)),
        ("units[0].fuel_quad", lambda c: _mutate_unit(c, fuel_quad=-1e-6)),
        ("units[0].emis_quad", lambda c: _mutate_unit(c, emis_quad=-1e-6)),
        ("units[0].min_up", lambda c: _mutate_unit(c, min_up=0)),
        ("units[0].min_down", lambda c: _mutate_unit(c, min_down=0)),
        ("units[0].startup_cost", lambda c: _mutate_unit(c, startup_cost=-1.0)),
        ("units[0].shutdown_cost", lambda c: _mutate_unit(c, shutdown_cost=-5.0)),
        ("battery.soc_min", lambda c: _mutate_batt(c, soc_min=-0.1, initial_energy=50.0)),
        ("battery.capacity_mwh", lambda c: _mutate_batt(c, capacity_mwh=0.0)),
        ("battery.charge_limit", lambda c: _mutate_batt(c, charge_limit=-1.0)),
        ("battery.release_limit", lambda c: _mutate_batt(c, release_limit=-1.0)),
        ("battery.eta_charge", lambda c: _mutate_batt(c, eta_charge=1.2)),
        ("battery.eta_release", lambda c: _mutate_batt(c, eta_release=0.0)),
        ("battery.initial_energy", lambda c: _mutate_batt(c, initial_energy=95.0)),
        ("carbon.price", lambda c: _mutate_carbon(c, price=-1.0)),
        ("carbon.allocation_coeff", lambda c: _mutate_carbon(c, allocation_coeff=-0.1)),
        ("carbon.eta_correction", lambda c: _mutate_carbon(c, eta_correction=0.0)),
        ("dt", lambda c: dataclasses.replace(c, dt=0.0)),
        ("load", lambda c: dataclasses.replace(c, load=np.array([-1.0, 70.0]))),
    ]

    @pytest.mark.parametrize("path,mutate", MUTATIONS,
                             ids=[f"{p}-{i}" for i, (p, _) in enumerate(MUTATIONS)])
    def test_single_broken_invariant_reported(self, path, mutate):
        config = mutate(make_config())
        report = validate_config(config)
        assert not report.ok
        assert {v.path for v in report.violations} == {path}


def _mutate_unit(config, **kw):
    unit = dataclasses.replace(config.units[0], **kw)
    return dataclasses.replace(config, units=(unit,) + config.units[1:])


def _mutate_batt(config, **kw):
    return dataclasses.replace(config, battery=dataclasses.replace(config.battery, **kw))


def _mutate_carbon(config, **kw):
    return dataclasses.replace(config, carbon=dataclasses.replace(config.carbon, **kw))


class TestValidateScenarios:
    def test_good_set(self):
        ss = make_scenarios(4, ((0.6, 10, 5, 2), (0.4, 3, 1, 2)))
        assert validate_scenarios(ss, 4).ok

    def test_probability_sum_violation(self):
        ss = make_scenarios(4, ((0.6, 10, 5, 2), (0.5, 3, 1, 2)))
        report = validate_scenarios(ss, 4)
        assert any("sum to 1" in v.message for v in report.violations)

    def test_length_mismatch(self):
        ss = make_scenarios(4)
        report = validate_scenarios(ss, 5)
        assert not report.ok

    def test_negative_entries(self):
        ss = make_scenarios(3)
        bad = dataclasses.replace(ss.scenarios[0],
                                  wind_cap=np.array([1.0, -2.0, 0.0]))
        from stochuc.system import ScenarioSet
        report = validate_scenarios(ScenarioSet(scenarios=(bad,)), 3)
        assert any("entries >= 0" in v.message for v in report.violations)


class TestCommitmentSchedule:
    def test_transition_count_includes_initial(self):
        sched = CommitmentSchedule(on=np.array([[1, 1, 0, 1.0]]),
                                   initial_state=np.zeros(1))
        # off->on, on->off, off->on
        assert sched.transition_count() == 3
