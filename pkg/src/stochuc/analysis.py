"""Study harnesses: cost reports, carbon accounting, the stochastic-versus-
deterministic comparison, and carbon-price sweeps.

The deterministic benchmark replaces the scenario set by its probability-
weighted mean day, fixes the resulting first-stage schedule, and re-solves
every true scenario's second stage against it (with a priced load-shedding
slack so infeasible recourse is costed rather than fatal).  The value of the
stochastic solution is the cost difference between that evaluation and the
two-stage optimum.
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import formulation, milp
from .system import (CarbonMarketParams, CommitmentSchedule, DispatchSolution,
                     Scenario, ScenarioDispatch, ScenarioSet, SystemConfig,
                     emissions, uc_cost)

DEFAULT_SHED_PENALTY = 1e5  # money per MWh of unserved (or dumped) energy


@dataclass(frozen=True)
class ScenarioCost:
    probability: float
    fuel: float
    carbon: float
    penalty: float = 0.0
    infeasible_without_slack: bool = False


@dataclass(frozen=True)
class CostReport:
    total: float
    uc_cost: float
    expected_fuel: float
    expected_carbon: float
    per_scenario: tuple[ScenarioCost, ...]
    start_stop_cycles: int
    expected_penalty: float = 0.0
    flagged_scenarios: tuple[int, ...] = ()
    model_objective: float = float("nan")  # linearized objective, when solved


@dataclass(frozen=True)
class SweepRow:
    carbon_price: float
    total: float  # linearized model objective recomputed from the solution
    expected_emissions: float  # tCO2, exact quadratic recomputation
    expected_allowance: float  # tCO2 of free allocation
    status: str
    exact_total: float = float("nan")  # exact-quadratic cost recomputation


@dataclass(frozen=True)
class SolveOutcome:
    result: milp.MILPResult
    schedule: CommitmentSchedule | None
    dispatch: DispatchSolution | None
    report: CostReport | None
    feasibility: formulation.FeasibilityReport | None
    index: formulation.VariableIndex


def carbon_cost(dispatch: ScenarioDispatch, schedule: CommitmentSchedule,
                units, carbon: CarbonMarketParams) -> float:
    """Net emission bill: price times (committed emissions minus allowance).

    May be negative when the free allocation exceeds actual emissions.
    """
    total_emis = 0.0
    total_gen = 0.0
    for i, unit in enumerate(units):
        on = schedule.on[i]
        p = dispatch.p_thermal[i]
        for t in range(p.shape[0]):
            if on[t] > 0.5:
                total_emis += emissions(unit, p[t])
            total_gen += p[t]
    allowance = carbon.eta_correction * carbon.allocation_coeff * total_gen
    return carbon.price * (total_emis - allowance)


def scenario_emissions(dispatch: ScenarioDispatch, schedule: CommitmentSchedule,
                       units) -> tuple[float, float]:
    """(total tCO2 emitted, total MWh generated) for one scenario block."""
    total_emis = 0.0
    total_gen = 0.0
    for i, unit in enumerate(units):
        on = schedule.on[i]
        p = dispatch.p_thermal[i]
        for t in range(p.shape[0]):
            if on[t] > 0.5:
                total_emis += emissions(unit, p[t])
            total_gen += p[t]
    return total_emis, total_gen


def expected_cost(costs, probabilities) -> float:
    """Probability-weighted cost; rejects weights that do not sum to one."""
    probs = np.asarray(probabilities, dtype=np.float64)
    vals = np.asarray(costs, dtype=np.float64)
    if probs.shape != vals.shape:
        raise ValueError(f"shape mismatch: {probs.shape} vs {vals.shape}")
    total = float(probs.sum())
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"probabilities must sum to 1 within 1e-9, got {total!r}")
    return float(probs @ vals)


def build_cost_report(schedule: CommitmentSchedule, solution: DispatchSolution,
                      scenarios: ScenarioSet, model_objective: float = float("nan"),
                      shed_penalty: float | None = None) -> CostReport:
    probs = scenarios.probabilities
    rows = []
    flagged = []
    for w, block in enumerate(solution.per_scenario):
        penalty = 0.0
        infeasible = False
        if shed_penalty is not None and block.shed is not None:
            slack = float(np.sum(block.shed) + np.sum(block.spill))
            penalty = shed_penalty * slack
            infeasible = slack > 1e-6
            if infeasible:
                flagged.append(w)
        rows.append(ScenarioCost(probability=float(probs[w]),
                                 fuel=block.fuel_cost, carbon=block.carbon_cost,
                                 penalty=penalty,
                                 infeasible_without_slack=infeasible))
    exp_fuel = expected_cost([r.fuel for r in rows], probs)
    exp_carbon = expected_cost([r.carbon for r in rows], probs)
    exp_penalty = expected_cost([r.penalty for r in rows], probs)
    total = solution.uc_cost + exp_fuel + exp_carbon + exp_penalty
    return CostReport(total=total, uc_cost=solution.uc_cost,
                      expected_fuel=exp_fuel, expected_carbon=exp_carbon,
                      per_scenario=tuple(rows),
                      start_stop_cycles=schedule.transition_count(),
                      expected_penalty=exp_penalty,
                      flagged_scenarios=tuple(flagged),
                      model_objective=model_objective)


def solve_two_stage(config: SystemConfig, scenarios: ScenarioSet,
                    options: milp.SolveOptions = milp.SolveOptions(),
                    segments: int = 8, initial_state=None,
                    fixed_commitment: CommitmentSchedule | None = None,
                    shed_penalty: float | None = None) -> SolveOutcome:
    """Build, solve, extract, and cost one two-stage instance.

    Branching is prioritized onto the first-stage commitment binaries: the
    battery-mode indicators carry no cost, so resolving them never moves the
    relaxation bound.
    """
    model, index = formulation.build_model(
        config, scenarios, segments=segments, initial_state=initial_state,
        fixed_commitment=fixed_commitment, shed_penalty=shed_penalty)
    priority = np.ones(model.num_variables, dtype=np.int64)
    for key, pos in index.by_key.items():
        if key[0] == "u":
            priority[pos] = 0
    options = dataclasses.replace(options, branch_priority=priority)
    result = milp.solve_milp(model, options)
    if result.x is None:
        return SolveOutcome(result=result, schedule=None, dispatch=None,
                            report=None, feasibility=None, index=index)
    schedule, dispatch = formulation.extract_solution(result.x, index, config,
                                                      scenarios)
    feas = formulation.check_feasibility(schedule, dispatch, config, scenarios,
                                         tol=1e-6)
    report = build_cost_report(schedule, dispatch, scenarios,
                               model_objective=result.objective,
                               shed_penalty=shed_penalty)
    return SolveOutcome(result=result, schedule=schedule, dispatch=dispatch,
                        report=report, feasibility=feas, index=index)


def mean_scenario(scenarios: ScenarioSet) -> ScenarioSet:
    """Probability-weighted mean wind/solar/hydro day with probability one."""
    probs = scenarios.probabilities
    wind = sum(p * s.wind_cap for p, s in zip(probs, scenarios))
    solar = sum(p * s.solar_cap for p, s in zip(probs, scenarios))
    hydro = sum(p * s.hydro_cap for p, s in zip(probs, scenarios))
    return ScenarioSet(scenarios=(Scenario(probability=1.0, wind_cap=wind,
                                           solar_cap=solar, hydro_cap=hydro),))


@dataclass(frozen=True)
class ComparisonResult:
    stochastic: CostReport
    deterministic: CostReport
    vss: float
    stochastic_outcome: SolveOutcome
    deterministic_schedule: CommitmentSchedule


def evaluate_fixed_schedule(schedule: CommitmentSchedule, config: SystemConfig,
                            scenarios: ScenarioSet,
                            options: milp.SolveOptions = milp.SolveOptions(),
                            segments: int = 8,
                            shed_penalty: float = DEFAULT_SHED_PENALTY,
                            threads: int = 1) -> CostReport:
    """Cost a fixed first-stage schedule fairly under every true scenario.

    Each scenario's second stage is re-solved on its own (probability one)
    with the commitment pinned; unserved or surplus energy is priced at the
    shedding penalty and flagged.
    """
    solver_options = dataclasses.replace(options, threads=1)

    def solve_one(scen: Scenario) -> tuple[ScenarioDispatch, bool]:
        one = ScenarioSet(scenarios=(dataclasses.replace(scen, probability=1.0),))
        outcome = solve_two_stage(config, one, solver_options, segments=segments,
                                  fixed_commitment=schedule,
                                  shed_penalty=shed_penalty)
        if outcome.dispatch is None:
            raise RuntimeError(
                f"fixed-schedule recourse unsolvable: {outcome.result.status}")
        return outcome.dispatch.per_scenario[0], bool(
            outcome.report.flagged_scenarios)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            solved = list(pool.map(solve_one, scenarios.scenarios))
    else:
        solved = [solve_one(s) for s in scenarios.scenarios]
    blocks = tuple(block for block, _ in solved)
    solution = DispatchSolution(per_scenario=blocks,
                                uc_cost=uc_cost(schedule, config.units))
    return build_cost_report(schedule, solution, scenarios,
                             shed_penalty=shed_penalty)


def compare_deterministic(config: SystemConfig, scenarios: ScenarioSet,
                          options: milp.SolveOptions = milp.SolveOptions(),
                          segments: int = 8, initial_state=None,
                          shed_penalty: float = DEFAULT_SHED_PENALTY,
                          threads: int = 1) -> ComparisonResult:
    """Stochastic optimum versus the mean-day deterministic plan.

    The deterministic plan's schedule is fixed and every true scenario's
    second stage re-solved, so both totals price the same uncertainty; vss is
    their difference and is nonnegative up to solver and linearization
    tolerance.
    """
    stochastic = solve_two_stage(config, scenarios, options, segments=segments,
                                 initial_state=initial_state)
    if stochastic.report is None:
        raise RuntimeError(f"stochastic solve failed: {stochastic.result.status}")
    det_outcome = solve_two_stage(config, mean_scenario(scenarios), options,
                                  segments=segments,
                                  initial_state=initial_state)
    if det_outcome.schedule is None:
        raise RuntimeError(f"deterministic solve failed: {det_outcome.result.status}")
    det_report = evaluate_fixed_schedule(det_outcome.schedule, config, scenarios,
                                         options, segments=segments,
                                         shed_penalty=shed_penalty,
                                         threads=threads)
    vss = det_report.total - stochastic.report.total
    return ComparisonResult(stochastic=stochastic.report,
                            deterministic=det_report, vss=vss,
                            stochastic_outcome=stochastic,
                            deterministic_schedule=det_outcome.schedule)


def carbon_price_sweep(config: SystemConfig, scenarios: ScenarioSet, prices,
                       options: milp.SolveOptions = milp.SolveOptions(),
                       segments: int = 8, initial_state=None,
                       threads: int = 1) -> list[SweepRow]:
    """Re-solve the full two-stage problem at each carbon price.

    Rows come back ordered by price; a failed solve yields a row with its
    status and NaN figures instead of aborting the sweep.
    """
    prices = [float(p) for p in prices]
    if any(p < 0 for p in prices):
        raise ValueError("carbon prices must be nonnegative")
    solver_options = dataclasses.replace(options, threads=1 if threads > 1
                                         else options.threads)

    def solve_one(price: float) -> SweepRow:
        cfg = dataclasses.replace(
            config, carbon=dataclasses.replace(config.carbon, price=price))
        try:
            outcome = solve_two_stage(cfg, scenarios, solver_options,
                                      segments=segments,
                                      initial_state=initial_state)
        except Exception as exc:  # record, keep sweeping
            return SweepRow(price, float("nan"), float("nan"), float("nan"),
                            f"error: {exc}")
        if outcome.dispatch is None:
            return SweepRow(price, float("nan"), float("nan"), float("nan"),
                            outcome.result.status)
        probs = scenarios.probabilities
        emis = np.empty(len(scenarios))
        gen = np.empty(len(scenarios))
        for w, block in enumerate(outcome.dispatch.per_scenario):
            emis[w], gen[w] = scenario_emissions(block, outcome.schedule,
                                                 cfg.units)
        expected_emis = float(probs @ emis)
        allowance = cfg.carbon.eta_correction * cfg.carbon.allocation_coeff \
            * float(probs @ gen)
        pw_total = formulation.piecewise_objective(
            outcome.schedule, outcome.dispatch, cfg, scenarios, segments)
        return SweepRow(carbon_price=price, total=pw_total,
                        expected_emissions=expected_emis,
                        expected_allowance=allowance,
                        status=outcome.result.status,
                        exact_total=outcome.report.total)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(solve_one, prices))
    else:
        rows = [solve_one(p) for p in prices]
    return sorted(rows, key=lambda r: r.carbon_price)
