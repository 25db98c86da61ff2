import json
from pathlib import Path

import numpy as np
import pytest

from stochuc import datafiles
from stochuc.system import (BatteryParams, CarbonMarketParams, Scenario,
                            ScenarioSet, SystemConfig, ThermalUnit)

REPO = Path(__file__).resolve().parent.parent
DATA = REPO / "data"


@pytest.fixture(scope="session")
def desk_paths():
    return {
        "config": DATA / "desk" / "config.json",
        "series": DATA / "desk" / "series.csv",
        "scenarios": DATA / "desk" / "scenarios.json",
        "wind": DATA / "desk" / "wind.csv",
        "solar": DATA / "desk" / "solar.csv",
    }


@pytest.fixture(scope="session")
def mini_paths():
    return {
        "config": DATA / "mini" / "config.json",
        "series": DATA / "mini" / "series.csv",
        "scenarios": DATA / "mini" / "scenarios.json",
        "wind": DATA / "mini" / "wind.csv",
        "solar": DATA / "mini" / "solar.csv",
    }


@pytest.fixture(scope="session")
def desk_instance(desk_paths):
    config, hydro, extras = datafiles.read_config(desk_paths["config"],
                                                  desk_paths["series"])
    scenarios = datafiles.read_scenarios(desk_paths["scenarios"],
                                         hydro_fallback=hydro)
    return config, scenarios, extras


@pytest.fixture(scope="session")
def mini_instance(mini_paths):
    config, hydro, extras = datafiles.read_config(mini_paths["config"],
                                                  mini_paths["series"])
    scenarios = datafiles.read_scenarios(mini_paths["scenarios"],
                                         hydro_fallback=hydro)
    return config, scenarios, extras


def make_unit(**kw) -> ThermalUnit:
    base = dict(name="T", fuel_const=5.0, fuel_lin=0.3, fuel_quad=4e-5,
                emis_const=2.0, emis_lin=0.95, emis_quad=1e-5,
                p_min=40.0, p_max=120.0, ramp_up=60.0, ramp_down=60.0,
                startup_cost=2000.0, shutdown_cost=1000.0, min_up=1, min_down=1)
    base.update(kw)
    return ThermalUnit(**base)


def make_battery(**kw) -> BatteryParams:
    base = dict(capacity_mwh=100.0, charge_limit=80.0, release_limit=80.0,
                eta_charge=0.95, eta_release=1 / 0.95, soc_min=0.3,
                soc_max=0.9, initial_energy=None)
    base.update(kw)
    return BatteryParams(**base)


def make_carbon(**kw) -> CarbonMarketParams:
    base = dict(price=100.0, eta_correction=1.0, allocation_coeff=0.9419)
    base.update(kw)
    return CarbonMarketParams(**base)


def make_config(units=None, load=(70.0, 70.0), battery=None, carbon=None,
                coal_price=700.0, dt=1.0, horizon=None) -> SystemConfig:
    units = tuple(units) if units is not None else (make_unit(),)
    load = np.asarray(load, dtype=float)
    return SystemConfig(units=units, battery=battery or make_battery(),
                        carbon=carbon or make_carbon(), coal_price=coal_price,
                        load=load,
                        horizon=horizon if horizon is not None else load.shape[0],
                        dt=dt)


def make_scenarios(horizon, specs=((1.0, 20.0, 5.0, 5.0),)) -> ScenarioSet:
    """specs: (probability, wind level, solar level, hydro level) per scenario."""
    out = []
    for prob, w, s, h in specs:
        out.append(Scenario(probability=prob,
                            wind_cap=np.full(horizon, float(w)),
                            solar_cap=np.full(horizon, float(s)),
                            hydro_cap=np.full(horizon, float(h))))
    return ScenarioSet(scenarios=tuple(out))


def random_two_stage(rng) -> tuple:
    """Small random two-stage instance with at most 12 binaries.

    Sizes are drawn from (units <= 2, periods <= 3, scenarios <= 2); loads are
    seeded near feasible levels but not guaranteed feasible.
    """
    n_units = int(rng.integers(1, 3))
    horizon = int(rng.integers(2, 4))
    n_scen = int(rng.integers(1, 3))
    while n_units * horizon + n_scen * horizon > 12:
        n_scen = 1
        if n_units * horizon + n_scen * horizon > 12:
            n_units = 1
    units = []
    for i in range(n_units):
        p_max = float(rng.uniform(60, 150))
        p_min = float(rng.uniform(0.2, 0.5)) * p_max
        units.append(make_unit(
            name=f"G{i}", p_min=p_min, p_max=p_max,
            fuel_const=float(rng.uniform(0, 8)),
            fuel_lin=float(rng.uniform(0.25, 0.35)),
            fuel_quad=float(rng.uniform(0, 1e-4)),
            emis_const=float(rng.uniform(0, 3)),
            emis_lin=float(rng.uniform(0.9, 1.1)),
            emis_quad=float(rng.uniform(0, 5e-5)),
            ramp_up=float(rng.uniform(0.3, 1.0)) * p_max,
            ramp_down=float(rng.uniform(0.3, 1.0)) * p_max,
            startup_cost=float(rng.uniform(0, 4000)),
            shutdown_cost=float(rng.uniform(0, 2000)),
            min_up=int(rng.integers(1, 3)), min_down=int(rng.integers(1, 3))))
    cap = sum(u.p_max for u in units)
    load = rng.uniform(0.2, 0.95, horizon) * cap
    battery = make_battery(capacity_mwh=float(rng.uniform(20, 60)),
                           charge_limit=float(rng.uniform(5, 20)),
                           release_limit=float(rng.uniform(5, 20)))
    carbon = make_carbon(price=float(rng.uniform(0, 200)))
    config = make_config(units=units, load=load, battery=battery, carbon=carbon)
    specs = []
    probs = rng.dirichlet(np.ones(n_scen))
    for k in range(n_scen):
        specs.append((float(probs[k]), float(rng.uniform(0, 0.4) * cap),
                      float(rng.uniform(0, 0.2) * cap),
                      float(rng.uniform(0, 0.1) * cap)))
    # per-period variation
    scenarios = []
    for prob, w, s, h in specs:
        scenarios.append(Scenario(
            probability=prob,
            wind_cap=np.abs(rng.normal(w, 0.2 * w + 1, horizon)),
            solar_cap=np.abs(rng.normal(s, 0.2 * s + 1, horizon)),
            hydro_cap=np.abs(rng.normal(h, 0.1 * h + 1, horizon))))
    return config, ScenarioSet(scenarios=tuple(scenarios))
