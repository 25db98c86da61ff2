"""One surgical violation per constraint family, for the mutation tests.

Each case builds a small single-unit, single-scenario instance, a feasible
hand-made solution, and a mutated twin that violates exactly one family:
every other effect of the change is compensated (balance re-closed through
the battery or a renewable with slack, stored energy kept consistent, cost
breakdowns recomputed).
"""

import dataclasses

import numpy as np

from stochuc.system import (CommitmentSchedule, DispatchSolution,
                            ScenarioDispatch, emissions, fuel_cost, uc_cost)

from conftest import make_battery, make_config, make_scenarios, make_unit

T = 4


def _solution(config, scenarios, on_row, p, wind, solar, hydro, charge,
              release, energy, uc_override=None):
    schedule = CommitmentSchedule(on=np.array([on_row], dtype=float),
                                  initial_state=np.array([1.0]))
    p = np.asarray(p, dtype=float)
    fuel = 0.0
    emitted = 0.0
    for t in range(T):
        if on_row[t] > 0.5:
            fuel += fuel_cost(config.units[0], p[t], config.coal_price)
            emitted += emissions(config.units[0], p[t])
    alloc = config.carbon.eta_correction * config.carbon.allocation_coeff
    carbon = config.carbon.price * (emitted - alloc * float(p.sum()))
    block = ScenarioDispatch(
        p_thermal=p[None, :], p_wind=wind, p_solar=solar, p_hydro=hydro,
        p_charge=charge, p_release=release, energy=energy,
        fuel_cost=fuel, carbon_cost=carbon)
    uc = uc_cost(schedule, config.units) if uc_override is None else uc_override
    return schedule, DispatchSolution(per_scenario=(block,), uc_cost=uc)


def _case(load, unit_kw=None, battery_kw=None, wind_cap=100.0):
    unit_args = dict(p_min=40, p_max=200, ramp_up=160, ramp_down=160,
                     startup_cost=1000, shutdown_cost=500, min_up=2, min_down=2)
    unit_args.update(unit_kw or {})
    unit = make_unit(**unit_args)
    battery_args = dict(capacity_mwh=300, charge_limit=80, release_limit=80,
                        soc_min=0.3, soc_max=0.9, initial_energy=100.0)
    battery_args.update(battery_kw or {})
    battery = make_battery(**battery_args)
    config = make_config(units=(unit,), load=load, battery=battery)
    scenarios = make_scenarios(T, ((1.0, wind_cap, 50.0, 30.0),))
    return config, scenarios


def _flat(value):
    return np.full(T, float(value))


def base_case():
    """Feasible reference: unit on throughout, no battery flows."""
    config, scenarios = _case(load=_flat(70))
    sched, sol = _solution(config, scenarios, (1, 1, 1, 1),
                           p=_flat(55), wind=_flat(10), solar=_flat(3),
                           hydro=_flat(2), charge=_flat(0), release=_flat(0),
                           energy=_flat(100))
    return config, scenarios, sched, sol


def mutate_min_down():
    config, scenarios = _case(load=_flat(70))
    # off for a single period with min_down = 2
    sched, sol = _solution(config, scenarios, (1, 0, 1, 1),
                           p=[55, 0, 55, 55], wind=[10, 65, 10, 10],
                           solar=_flat(3), hydro=_flat(2), charge=_flat(0),
                           release=_flat(0), energy=_flat(100))
    return config, scenarios, sched, sol


def mutate_min_up():
    config, scenarios = _case(load=_flat(70), unit_kw={"min_down": 1})
    # on for a single period with min_up = 2
    sched, sol = _solution(config, scenarios, (0, 1, 0, 0),
                           p=[0, 55, 0, 0], wind=[65, 10, 65, 65],
                           solar=_flat(3), hydro=_flat(2), charge=_flat(0),
                           release=_flat(0), energy=_flat(100))
    return config, scenarios, sched, sol


def mutate_uc_cost():
    config, scenarios, sched, sol = base_case()
    sol = dataclasses.replace(sol, uc_cost=sol.uc_cost + 1234.0)
    return config, scenarios, sched, sol


def mutate_balance():
    config, scenarios, sched, sol = base_case()
    block = sol.per_scenario[0]
    wind = block.p_wind.copy()
    wind[1] += 1.0
    block = dataclasses.replace(block, p_wind=wind)
    return config, scenarios, sched, dataclasses.replace(sol, per_scenario=(block,))


def mutate_gen_bounds():
    config, scenarios = _case(load=[70, 140, 70, 70])
    p = [55, 205, 55, 55]  # above p_max = 200 at t=1
    charge = [0, 80, 0, 0]
    energy = [100, 176, 176, 176]
    sched, sol = _solution(config, scenarios, (1, 1, 1, 1), p=p,
                           wind=_flat(10), solar=_flat(3), hydro=_flat(2),
                           charge=charge, release=_flat(0), energy=energy)
    return config, scenarios, sched, sol


def mutate_ramp_up():
    config, scenarios = _case(load=_flat(70), unit_kw={"ramp_up": 30.0})
    p = [55, 95, 55, 55]  # rise of 40 against a 30 MW/h limit
    charge = [0, 40, 0, 0]
    energy = [100, 138, 138, 138]
    sched, sol = _solution(config, scenarios, (1, 1, 1, 1), p=p,
                           wind=_flat(10), solar=_flat(3), hydro=_flat(2),
                           charge=charge, release=_flat(0), energy=energy)
    return config, scenarios, sched, sol


def mutate_ramp_down():
    config, scenarios = _case(load=_flat(70), unit_kw={"ramp_down": 30.0})
    p = [55, 95, 55, 55]  # drop of 40 at t=2 against a 30 MW/h limit
    charge = [0, 40, 0, 0]
    energy = [100, 138, 138, 138]
    sched, sol = _solution(config, scenarios, (1, 1, 1, 1), p=p,
                           wind=_flat(10), solar=_flat(3), hydro=_flat(2),
                           charge=charge, release=_flat(0), energy=energy)
    return config, scenarios, sched, sol


def mutate_wind_cap():
    config, scenarios = _case(load=[70, 110, 70, 70])
    wind = [10, 105, 10, 10]  # above the 100 MW availability
    charge = [0, 55, 0, 0]
    energy = [100, 152.25, 152.25, 152.25]
    sched, sol = _solution(config, scenarios, (1, 1, 1, 1), p=_flat(55),
                           wind=wind, solar=_flat(3), hydro=_flat(2),
                           charge=charge, release=_flat(0), energy=energy)
    return config, scenarios, sched, sol


def mutate_solar_cap():
    config, scenarios, _, _ = base_case()
    solar = [3, 55, 3, 3]  # above the 50 MW availability
    charge = [0, 52, 0, 0]
    energy = [100, 149.4, 149.4, 149.4]
    sched, sol = _solution(config, scenarios, (1, 1, 1, 1), p=_flat(55),
                           wind=_flat(10), solar=solar, hydro=_flat(2),
                           charge=charge, release=_flat(0), energy=energy)
    return config, scenarios, sched, sol


def mutate_hydro_cap():
    config, scenarios, _, _ = base_case()
    hydro = [2, 35, 2, 2]  # above the 30 MW availability
    charge = [0, 33, 0, 0]
    energy = [100, 131.35, 131.35, 131.35]
    sched, sol = _solution(config, scenarios, (1, 1, 1, 1), p=_flat(55),
                           wind=_flat(10), solar=_flat(3), hydro=hydro,
                           charge=charge, release=_flat(0), energy=energy)
    return config, scenarios, sched, sol


def mutate_charge_limit():
    config, scenarios, _, _ = base_case()
    charge = [0, 85, 0, 0]  # above the 80 MW limit
    wind = [10, 95, 10, 10]
    energy = [100, 180.75, 180.75, 180.75]
    sched, sol = _solution(config, scenarios, (1, 1, 1, 1), p=_flat(55),
                           wind=wind, solar=_flat(3), hydro=_flat(2),
                           charge=charge, release=_flat(0), energy=energy)
    return config, scenarios, sched, sol


def mutate_release_limit():
    config, scenarios = _case(load=[70, 150, 70, 70],
                              battery_kw={"initial_energy": 250.0})
    release = [0, 85, 0, 0]  # above the 80 MW limit
    wind = [10, 5, 10, 10]
    energy = [250, 169.25, 169.25, 169.25]
    sched, sol = _solution(config, scenarios, (1, 1, 1, 1), p=_flat(55),
                           wind=wind, solar=_flat(3), hydro=_flat(2),
                           charge=_flat(0), release=release, energy=energy)
    return config, scenarios, sched, sol


def mutate_complementarity():
    config, scenarios, _, _ = base_case()
    # equal charge and release: net balance and stored energy are unchanged
    # (charging at 0.95 stores exactly what a 1/0.95 release drains)
    sched, sol = _solution(config, scenarios, (1, 1, 1, 1), p=_flat(55),
                           wind=_flat(10), solar=_flat(3), hydro=_flat(2),
                           charge=[0, 5, 0, 0], release=[0, 5, 0, 0],
                           energy=_flat(100))
    return config, scenarios, sched, sol


def mutate_energy_update():
    config, scenarios, sched, sol = base_case()
    block = sol.per_scenario[0]
    energy = block.energy.copy()
    energy[1] += 3.0
    block = dataclasses.replace(block, energy=energy)
    return config, scenarios, sched, dataclasses.replace(sol, per_scenario=(block,))


def mutate_soc_bounds():
    config, scenarios = _case(load=_flat(70),
                              battery_kw={"capacity_mwh": 100.0,
                                          "initial_energy": 30.0})
    # overfill the 90 MWh band; the recursion itself stays consistent
    charge = [70, 0, 0, 0]
    wind = [80, 10, 10, 10]
    energy = [96.5, 96.5, 96.5, 96.5]
    sched, sol = _solution(config, scenarios, (1, 1, 1, 1), p=_flat(55),
                           wind=wind, solar=_flat(3), hydro=_flat(2),
                           charge=charge, release=_flat(0), energy=energy)
    return config, scenarios, sched, sol


FAMILY_CASES = {
    "min_down": mutate_min_down,
    "min_up": mutate_min_up,
    "uc_cost": mutate_uc_cost,
    "balance": mutate_balance,
    "gen_bounds": mutate_gen_bounds,
    "ramp_up": mutate_ramp_up,
    "ramp_down": mutate_ramp_down,
    "wind_cap": mutate_wind_cap,
    "solar_cap": mutate_solar_cap,
    "hydro_cap": mutate_hydro_cap,
    "charge_limit": mutate_charge_limit,
    "release_limit": mutate_release_limit,
    "complementarity": mutate_complementarity,
    "energy_update": mutate_energy_update,
    "soc_bounds": mutate_soc_bounds,
}
