"""Two-stage stochastic unit-commitment MILP assembly and solution mapping.

First stage: binary on/off per unit-hour with minimum up/down windows and
start/stop cost epigraph variables.  Second stage, per weighted scenario:
piecewise-linearized fuel and emission costs, power balance, generation
bounds, startup-aware ramping, renewable caps (as variable bounds, since they
involve no other variable), and the battery model with a binary charge-mode
indicator forbidding simultaneous charge and release.

Quadratic cost terms are represented by convex-combination weights over
uniform breakpoints of the squared-output curve; minimization presses the
weights onto adjacent breakpoints, so the modelled cost is the chordal
over-estimate of the true quadratic with per-term error at most
``quad * width**2 / 4``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import BINARY, EQ, GE, LE, MILPModel, ModelBuilder
from .system import (CommitmentSchedule, DispatchSolution, Scenario,
                     ScenarioDispatch, ScenarioSet, SystemConfig, ThermalUnit,
                     emissions, fuel_cost, uc_cost, validate_config,
                     validate_scenarios)

# Constraint families evaluated by check_feasibility, in report order.
FAMILIES = (
    "min_down",          # minimum continuous off-time windows
    "min_up",            # minimum continuous on-time windows
    "uc_cost",           # reported start/stop cost matches the schedule
    "balance",           # supply equals load every period
    "gen_bounds",        # committed output within [p_min, p_max], zero when off
    "ramp_up",           # startup-aware upward ramp limit
    "ramp_down",         # shutdown-aware downward ramp limit
    "wind_cap",
    "solar_cap",
    "hydro_cap",
    "charge_limit",
    "release_limit",
    "complementarity",   # no simultaneous charge and release
    "energy_update",     # battery energy recursion
    "soc_bounds",        # stored energy within the safe band
)


@dataclass(frozen=True)
class PiecewiseCurve:
    """Chordal interpolant of a convex quadratic over uniform breakpoints."""

    x: np.ndarray  # strictly increasing breakpoints, endpoints = domain
    y: np.ndarray  # source quadratic evaluated at the breakpoints
    coeffs: tuple[float, float, float]  # (const, lin, quad)

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=np.float64))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=np.float64))

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.x[0]), float(self.x[-1])

    @property
    def segment_width(self) -> float:
        return float(self.x[1] - self.x[0]) if self.x.size > 1 else 0.0

    def error_bound(self) -> float:
        """Maximum chord-over-quadratic gap: quad * width^2 / 4."""
        return self.coeffs[2] * self.segment_width ** 2 / 4.0

    def value_at(self, v) -> np.ndarray | float:
        return np.interp(v, self.x, self.y)

    def exact_at(self, v):
        c0, c1, c2 = self.coeffs
        return c0 + c1 * np.asarray(v) + c2 * np.asarray(v) ** 2


def linearize_quadratic(coeffs: tuple[float, float, float],
                        domain: tuple[float, float],
                        segments: int) -> PiecewiseCurve:
    """Uniform-breakpoint chordal approximation of a convex quadratic."""
    const, lin, quad = (float(c) for c in coeffs)
    x_min, x_max = (float(v) for v in domain)
    if quad < 0:
        raise ValueError(f"quadratic coefficient must be nonnegative, got {quad}")
    if segments < 1:
        raise ValueError(f"segments must be >= 1, got {segments}")
    if x_min > x_max:
        raise ValueError(f"empty domain [{x_min}, {x_max}]")
    x = np.linspace(x_min, x_max, segments + 1)
    y = const + lin * x + quad * x ** 2
    return PiecewiseCurve(x=x, y=y, coeffs=(const, lin, quad))


@dataclass(frozen=True)
class BuildInfo:
    segments: int
    initial_state: np.ndarray  # (N,) of {0, 1}
    initial_power: np.ndarray  # (N,) MW output attributed to t = -1
    breakpoints: tuple[np.ndarray, ...]  # per-unit grid for the squared-output curve
    shed_penalty: float | None


@dataclass(frozen=True)
class VariableIndex:
    """Bijection between semantic keys and model column positions.

    Keys: ``("u"|"cu"|"cd", i, t)``, ``("pg", w, i, t)``,
    ``("w", w, i, t, s)``, ``("wind"|"solar"|"hydro"|"charge"|"release"|
    "energy"|"ych"|"shed"|"spill", w, t)``.
    """

    by_key: dict
    info: BuildInfo
    keys: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "keys", tuple(self.by_key))

    def __getitem__(self, key) -> int:
        return self.by_key[key]

    def __contains__(self, key) -> bool:
        return key in self.by_key

    def __len__(self) -> int:
        return len(self.by_key)


def _check_preconditions(config: SystemConfig, scenarios: ScenarioSet,
                         segments: int) -> None:
    report = validate_config(config)
    if not report.ok:
        raise ValueError(f"invalid system config:\n{report}")
    sreport = validate_scenarios(scenarios, config.horizon)
    if not sreport.ok:
        raise ValueError(f"invalid scenario set:\n{sreport}")
    if scenarios.horizon != config.horizon:
        raise ValueError(f"scenario horizon {scenarios.horizon} "
                         f"!= config horizon {config.horizon}")
    if segments < 1:
        raise ValueError(f"segments must be >= 1, got {segments}")


def build_model(config: SystemConfig, scenarios: ScenarioSet, segments: int = 8,
                initial_state=None, fixed_commitment: CommitmentSchedule | None = None,
                shed_penalty: float | None = None,
                split_windows: bool = True) -> tuple[MILPModel, VariableIndex]:
    """Assemble the deterministic-equivalent MILP.

    ``initial_state`` is the pre-horizon on/off vector (default all off).
    ``fixed_commitment`` pins every u variable to a given schedule (used when
    re-costing a first-stage plan under fresh scenarios); ``shed_penalty``
    adds per-period slack generation/dump at that price so such re-solves
    stay feasible.

    ``split_windows`` writes each minimum up/down window as one row per
    member period instead of one aggregated sum row.  Both forms admit
    exactly the same on/off schedules; the split form has a strictly tighter
    relaxation, which branch and bound needs to close gaps in sensible time.
    """
    _check_preconditions(config, scenarios, segments)
    units = config.units
    n_units = len(units)
    horizon = config.horizon
    dt = config.dt
    if fixed_commitment is not None:
        initial_state = fixed_commitment.initial_state
    init = (np.zeros(n_units) if initial_state is None
            else np.asarray(initial_state, dtype=np.float64))
    if init.shape != (n_units,):
        raise ValueError(f"initial_state must have shape ({n_units},)")
    init_power = init * np.array([u.p_min for u in units])
    carbon = config.carbon
    alloc = carbon.eta_correction * carbon.allocation_coeff
    probs = scenarios.probabilities

    b = ModelBuilder()
    idx: dict = {}

    def var(key, name, **kw) -> int:
        pos = b.add_variable(name, **kw)
        idx[key] = pos
        return pos

    for i, u in enumerate(units):
        for t in range(horizon):
            var(("u", i, t), f"u[{i},{t}]", kind=BINARY)
    for i, u in enumerate(units):
        for t in range(horizon):
            var(("cu", i, t), f"cu[{i},{t}]")
            var(("cd", i, t), f"cd[{i},{t}]")
    curves = tuple(np.linspace(0.0, u.p_max, segments + 1) for u in units)
    for w, scen in enumerate(scenarios):
        for i, u in enumerate(units):
            for t in range(horizon):
                var(("pg", w, i, t), f"pg[{w},{i},{t}]", ub=u.p_max)
                for s in range(segments + 1):
                    var(("w", w, i, t, s), f"pw[{w},{i},{t},{s}]", ub=1.0)
        for t in range(horizon):
            var(("wind", w, t), f"wind[{w},{t}]", ub=float(scen.wind_cap[t]))
            var(("solar", w, t), f"solar[{w},{t}]", ub=float(scen.solar_cap[t]))
            var(("hydro", w, t), f"hydro[{w},{t}]", ub=float(scen.hydro_cap[t]))
            var(("charge", w, t), f"ch[{w},{t}]", ub=config.battery.charge_limit)
            var(("release", w, t), f"re[{w},{t}]", ub=config.battery.release_limit)
            var(("energy", w, t), f"e[{w},{t}]",
                lb=config.battery.energy_min, ub=config.battery.energy_max)
            var(("ych", w, t), f"ych[{w},{t}]", kind=BINARY)
            if shed_penalty is not None:
                var(("shed", w, t), f"shed[{w},{t}]")
                var(("spill", w, t), f"spill[{w},{t}]")

    if fixed_commitment is not None:
        on = fixed_commitment.on
        if on.shape != (n_units, horizon):
            raise ValueError(f"fixed commitment shape {on.shape} != "
                             f"({n_units}, {horizon})")
        for i in range(n_units):
            for t in range(horizon):
                b.set_bounds(idx[("u", i, t)], on[i, t], on[i, t])

    # ----- first stage: min up/down windows and start/stop cost epigraphs
    for i, u in enumerate(units):
        for t in range(horizon):
            u_t = idx[("u", i, t)]
            prev = idx[("u", i, t - 1)] if t else None
            window_dn = range(t, min(t + u.min_down, horizon))
            window_up = range(t, min(t + u.min_up, horizon))
            if split_windows:
                # per-period form: a stop at t keeps each later window member
                # off (k = t itself is trivially satisfied, so skipped)
                for k in window_dn:
                    if k == t:
                        continue
                    coeffs = [(idx[("u", i, k)], -1.0), (u_t, 1.0)]
                    rhs = -1.0
                    if prev is not None:
                        coeffs.append((prev, -1.0))
                    else:
                        rhs += init[i]
                    b.add_constraint(_merge(coeffs), GE, rhs,
                                     f"mindown[{i},{t},{k}]")
                for k in window_up:
                    if k == t:
                        continue
                    coeffs = [(idx[("u", i, k)], 1.0), (u_t, -1.0)]
                    rhs = 0.0
                    if prev is not None:
                        coeffs.append((prev, 1.0))
                    else:
                        rhs -= init[i]
                    b.add_constraint(_merge(coeffs), GE, rhs,
                                     f"minup[{i},{t},{k}]")
            else:
                length = float(len(window_dn))
                coeffs = [(idx[("u", i, k)], -1.0) for k in window_dn]
                coeffs.append((u_t, length))
                rhs = -length
                if prev is not None:
                    coeffs.append((prev, -length))
                else:
                    rhs += length * init[i]
                b.add_constraint(_merge(coeffs), GE, rhs, f"mindown[{i},{t}]")

                length = float(len(window_up))
                coeffs = [(idx[("u", i, k)], 1.0) for k in window_up]
                coeffs.append((u_t, -length))
                rhs = 0.0
                if prev is not None:
                    coeffs.append((prev, length))
                else:
                    rhs -= length * init[i]
                b.add_constraint(_merge(coeffs), GE, rhs, f"minup[{i},{t}]")

            coeffs = [(idx[("cu", i, t)], 1.0), (u_t, -u.startup_cost)]
            rhs = 0.0
            if prev is not None:
                coeffs.append((prev, u.startup_cost))
            else:
                rhs -= u.startup_cost * init[i]
            b.add_constraint(coeffs, GE, rhs, f"custart[{i},{t}]")

            coeffs = [(idx[("cd", i, t)], 1.0), (u_t, u.shutdown_cost)]
            rhs = u.shutdown_cost * init[i] if prev is None else 0.0
            if prev is not None:
                coeffs.append((prev, -u.shutdown_cost))
            b.add_constraint(coeffs, GE, rhs, f"cdstop[{i},{t}]")
            b.add_objective_term(idx[("cu", i, t)], 1.0)
            b.add_objective_term(idx[("cd", i, t)], 1.0)

    # ----- second stage, per scenario
    for w, scen in enumerate(scenarios):
        pi = float(probs[w])
        for i, u in enumerate(units):
            quad_price = config.coal_price * u.fuel_quad + carbon.price * u.emis_quad
            lin_price = (config.coal_price * u.fuel_lin
                         + carbon.price * (u.emis_lin - alloc))
            const_price = config.coal_price * u.fuel_const + carbon.price * u.emis_const
            grid = curves[i]
            for t in range(horizon):
                p = idx[("pg", w, i, t)]
                u_t = idx[("u", i, t)]
                b.add_objective_term(p, pi * lin_price)
                b.add_objective_term(u_t, pi * const_price)
                weights = [idx[("w", w, i, t, s)] for s in range(segments + 1)]
                b.add_constraint([(wv, 1.0) for wv in weights], EQ, 1.0,
                                 f"pwsum[{w},{i},{t}]")
                link = [(wv, float(grid[s])) for s, wv in enumerate(weights)]
                link.append((p, -1.0))
                b.add_constraint(link, EQ, 0.0, f"pwlink[{w},{i},{t}]")
                for s, wv in enumerate(weights):
                    b.add_objective_term(wv, pi * quad_price * float(grid[s]) ** 2)
                b.add_constraint([(p, 1.0), (u_t, -u.p_max)], LE, 0.0,
                                 f"genhi[{w},{i},{t}]")
                b.add_constraint([(p, -1.0), (u_t, u.p_min)], LE, 0.0,
                                 f"genlo[{w},{i},{t}]")
                s_up = s_dn = u.startup_ramp
                if t:
                    p_prev = idx[("pg", w, i, t - 1)]
                    u_prev = idx[("u", i, t - 1)]
                    b.add_constraint([(p, 1.0), (p_prev, -1.0),
                                      (u_prev, -(u.ramp_up - s_up))],
                                     LE, s_up, f"rampup[{w},{i},{t}]")
                    b.add_constraint([(p_prev, 1.0), (p, -1.0),
                                      (u_t, -(u.ramp_down - s_dn))],
                                     LE, s_dn, f"rampdn[{w},{i},{t}]")
                else:
                    rhs_up = s_up + init_power[i] + (u.ramp_up - s_up) * init[i]
                    b.add_constraint([(p, 1.0)], LE, rhs_up, f"rampup[{w},{i},{t}]")
                    b.add_constraint([(p, -1.0), (u_t, -(u.ramp_down - s_dn))],
                                     LE, s_dn - init_power[i],
                                     f"rampdn[{w},{i},{t}]")
        batt = config.battery
        for t in range(horizon):
            terms = [(idx[("pg", w, i, t)], 1.0) for i in range(n_units)]
            terms += [(idx[("wind", w, t)], 1.0), (idx[("solar", w, t)], 1.0),
                      (idx[("hydro", w, t)], 1.0), (idx[("release", w, t)], 1.0),
                      (idx[("charge", w, t)], -1.0)]
            if shed_penalty is not None:
                terms += [(idx[("shed", w, t)], 1.0), (idx[("spill", w, t)], -1.0)]
                b.add_objective_term(idx[("shed", w, t)], pi * shed_penalty)
                b.add_objective_term(idx[("spill", w, t)], pi * shed_penalty)
            b.add_constraint(terms, EQ, float(config.load[t]), f"bal[{w},{t}]")
            y = idx[("ych", w, t)]
            b.add_constraint([(idx[("charge", w, t)], 1.0),
                              (y, -batt.charge_limit)], LE, 0.0,
                             f"chmode[{w},{t}]")
            b.add_constraint([(idx[("release", w, t)], 1.0),
                              (y, batt.release_limit)], LE, batt.release_limit,
                             f"remode[{w},{t}]")
            terms = [(idx[("energy", w, t)], 1.0),
                     (idx[("charge", w, t)], -batt.eta_charge * dt),
                     (idx[("release", w, t)], dt / batt.eta_release)]
            if t:
                terms.append((idx[("energy", w, t - 1)], -1.0))
                b.add_constraint(terms, EQ, 0.0, f"energy[{w},{t}]")
            else:
                b.add_constraint(terms, EQ, batt.start_energy, f"energy[{w},{t}]")

    info = BuildInfo(segments=segments, initial_state=init,
                     initial_power=init_power, breakpoints=curves,
                     shed_penalty=shed_penalty)
    return b.build(), VariableIndex(by_key=idx, info=info)


def _merge(coeffs):
    """Sum duplicate variable entries (windows overlap their trigger column)."""
    acc: dict[int, float] = {}
    for j, v in coeffs:
        acc[j] = acc.get(j, 0.0) + v
    return list(acc.items())


# ---------------------------------------------------------------------------
# solution extraction


def _rounded_binary(value: float, what: str) -> float:
    r = round(value)
    if abs(value - r) > 1e-6 or r not in (0, 1):
        raise ValueError(f"{what} = {value!r} is not within 1e-6 of binary")
    return float(r)


def _clean_power(arr: np.ndarray) -> np.ndarray:
    """Zero out solver noise below the feasibility tolerance, keep real negatives."""
    out = np.asarray(arr, dtype=np.float64).copy()
    mask = (out < 0) & (out > -1e-7)
    out[mask] = 0.0
    return out


def extract_solution(values: np.ndarray, index: VariableIndex,
                     config: SystemConfig, scenarios: ScenarioSet
                     ) -> tuple[CommitmentSchedule, DispatchSolution]:
    """Map solver variable values back to domain objects.

    Cost breakdowns are recomputed from the domain formulas on the extracted
    values; no objective value is read back from the solver.  Extraction does
    not validate feasibility (that is check_feasibility's job).
    """
    values = np.asarray(values, dtype=np.float64)
    if values.shape[0] < len(index):
        raise ValueError(f"assignment covers {values.shape[0]} of {len(index)} variables")
    n_units = config.num_units
    horizon = config.horizon
    on = np.empty((n_units, horizon))
    for i in range(n_units):
        for t in range(horizon):
            on[i, t] = _rounded_binary(values[index[("u", i, t)]], f"u[{i},{t}]")
    schedule = CommitmentSchedule(on=on, initial_state=index.info.initial_state)
    carbon = config.carbon
    alloc = carbon.eta_correction * carbon.allocation_coeff
    blocks = []
    for w, _scen in enumerate(scenarios):
        p_th = np.empty((n_units, horizon))
        for i in range(n_units):
            for t in range(horizon):
                p_th[i, t] = values[index[("pg", w, i, t)]]
        p_th = _clean_power(p_th)
        series = {}
        for name in ("wind", "solar", "hydro", "charge", "release", "energy"):
            series[name] = _clean_power(
                np.array([values[index[(name, w, t)]] for t in range(horizon)]))
        for t in range(horizon):
            _rounded_binary(values[index[("ych", w, t)]], f"ych[{w},{t}]")
        shed = spill = None
        if ("shed", w, 0) in index:
            shed = _clean_power(
                np.array([values[index[("shed", w, t)]] for t in range(horizon)]))
            spill = _clean_power(
                np.array([values[index[("spill", w, t)]] for t in range(horizon)]))
        fuel = 0.0
        emitted = 0.0
        generated = 0.0
        for i, u in enumerate(config.units):
            for t in range(horizon):
                if on[i, t] > 0.5:
                    fuel += fuel_cost(u, p_th[i, t], config.coal_price)
                    emitted += emissions(u, p_th[i, t])
                generated += p_th[i, t]
        carbon_money = carbon.price * (emitted - alloc * generated)
        blocks.append(ScenarioDispatch(
            p_thermal=p_th, p_wind=series["wind"], p_solar=series["solar"],
            p_hydro=series["hydro"], p_charge=series["charge"],
            p_release=series["release"], energy=series["energy"],
            fuel_cost=fuel, carbon_cost=carbon_money, shed=shed, spill=spill))
    return schedule, DispatchSolution(per_scenario=tuple(blocks),
                                      uc_cost=uc_cost(schedule, config.units))


def piecewise_objective(schedule: CommitmentSchedule, solution: DispatchSolution,
                        config: SystemConfig, scenarios: ScenarioSet,
                        segments: int, shed_penalty: float | None = None) -> float:
    """Re-evaluate the linearized model objective from domain values.

    Matches the MILP objective at any optimal solution: the convexity of the
    squared-output curve forces the convex-combination weights onto adjacent
    breakpoints whenever their cost coefficient is positive.
    """
    carbon = config.carbon
    alloc = carbon.eta_correction * carbon.allocation_coeff
    total = uc_cost(schedule, config.units)
    sq_curves = [linearize_quadratic((0.0, 0.0, 1.0), (0.0, u.p_max), segments)
                 for u in config.units]
    for scen, block in zip(scenarios, solution.per_scenario):
        pi = scen.probability
        for i, u in enumerate(config.units):
            on_row = schedule.on[i]
            p_row = block.p_thermal[i]
            sq = sq_curves[i].value_at(p_row)
            fuel = config.coal_price * (u.fuel_const * on_row + u.fuel_lin * p_row
                                        + u.fuel_quad * sq)
            emis = (u.emis_const * on_row + u.emis_lin * p_row + u.emis_quad * sq)
            total += pi * float(np.sum(fuel + carbon.price * (emis - alloc * p_row)))
        if shed_penalty is not None and block.shed is not None:
            total += pi * shed_penalty * float(np.sum(block.shed + block.spill))
    return float(total)


# ---------------------------------------------------------------------------
# feasibility checking


@dataclass(frozen=True)
class FeasibilityViolation:
    family: str
    indices: tuple
    residual: float
    message: str


@dataclass(frozen=True)
class FeasibilityReport:
    violations: tuple[FeasibilityViolation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def families(self) -> set:
        return {v.family for v in self.violations}

    def __str__(self) -> str:
        if self.ok:
            return "feasible"
        return "\n".join(f"{v.family}{list(v.indices)}: residual {v.residual:.6g} "
                         f"({v.message})" for v in self.violations)


def check_feasibility(schedule: CommitmentSchedule, solution: DispatchSolution,
                      config: SystemConfig, scenarios: ScenarioSet,
                      tol: float = 1e-6) -> FeasibilityReport:
    """Evaluate every constraint family on domain values.

    A residual passes when it is at most ``tol * max(1, |rhs|)`` for its row.
    Violation entries name the family, the (scenario, unit, period) indices
    that apply, and the residual.
    """
    out: list[FeasibilityViolation] = []

    def fail(family, indices, residual, message):
        out.append(FeasibilityViolation(family, tuple(indices), float(residual), message))

    units = config.units
    horizon = config.horizon
    full = schedule.with_previous()  # (N, T+1)
    for i, u in enumerate(units):
        for t in range(horizon):
            delta = full[i, t + 1] - full[i, t]
            if delta < -0.5:  # shutdown at t
                window = range(t, min(t + u.min_down, horizon))
                need = len(window)
                have = sum(1.0 - schedule.on[i, k] for k in window)
                if have < need - tol * max(1.0, need):
                    fail("min_down", (i, t), need - have,
                         f"unit must stay off {u.min_down} h after stopping")
            if delta > 0.5:  # startup at t
                window = range(t, min(t + u.min_up, horizon))
                need = len(window)
                have = sum(schedule.on[i, k] for k in window)
                if have < need - tol * max(1.0, need):
                    fail("min_up", (i, t), need - have,
                         f"unit must stay on {u.min_up} h after starting")
    reported = solution.uc_cost
    recomputed = uc_cost(schedule, units)
    if abs(reported - recomputed) > tol * max(1.0, abs(recomputed)):
        fail("uc_cost", (), abs(reported - recomputed),
             f"reported start/stop cost {reported} != recomputed {recomputed}")

    for w, (scen, block) in enumerate(zip(scenarios, solution.per_scenario)):
        supply = (block.p_thermal.sum(axis=0) + block.p_wind + block.p_solar
                  + block.p_hydro + block.p_release - block.p_charge)
        if block.shed is not None:
            supply = supply + block.shed - block.spill
        for t in range(horizon):
            resid = abs(supply[t] - config.load[t])
            if resid > tol * max(1.0, abs(config.load[t])):
                fail("balance", (w, t), resid,
                     f"supply {supply[t]:.6g} != load {config.load[t]:.6g}")
        for i, u in enumerate(units):
            for t in range(horizon):
                on = schedule.on[i, t]
                p = block.p_thermal[i, t]
                hi = u.p_max * on
                lo = u.p_min * on
                scale = max(1.0, u.p_max)
                if p > hi + tol * scale or p < lo - tol * scale:
                    fail("gen_bounds", (w, i, t), max(p - hi, lo - p),
                         f"output {p:.6g} outside [{lo:.6g}, {hi:.6g}]")
                prev_p = block.p_thermal[i, t - 1] if t else index_initial_power(u, full[i, 0])
                prev_u = full[i, t]
                s_lim = u.startup_ramp
                up_cap = prev_u * (u.ramp_up - s_lim) + s_lim
                resid = (p - prev_p) - up_cap
                if resid > tol * max(1.0, abs(up_cap)):
                    fail("ramp_up", (w, i, t), resid,
                         f"rise {p - prev_p:.6g} exceeds {up_cap:.6g}")
                dn_cap = on * (u.ramp_down - s_lim) + s_lim
                resid = (prev_p - p) - dn_cap
                if resid > tol * max(1.0, abs(dn_cap)):
                    fail("ramp_down", (w, i, t), resid,
                         f"drop {prev_p - p:.6g} exceeds {dn_cap:.6g}")
        caps = (("wind_cap", block.p_wind, scen.wind_cap),
                ("solar_cap", block.p_solar, scen.solar_cap),
                ("hydro_cap", block.p_hydro, scen.hydro_cap),
                ("charge_limit", block.p_charge,
                 np.full(horizon, config.battery.charge_limit)),
                ("release_limit", block.p_release,
                 np.full(horizon, config.battery.release_limit)))
        for family, val, cap in caps:
            for t in range(horizon):
                scale = max(1.0, abs(cap[t]))
                if val[t] > cap[t] + tol * scale or val[t] < -tol * scale:
                    fail(family, (w, t), max(val[t] - cap[t], -val[t]),
                         f"value {val[t]:.6g} outside [0, {cap[t]:.6g}]")
        both = np.minimum(block.p_charge, block.p_release)
        for t in range(horizon):
            lim = max(1.0, config.battery.charge_limit, config.battery.release_limit)
            if both[t] > tol * lim:
                fail("complementarity", (w, t), both[t],
                     f"charging {block.p_charge[t]:.6g} MW while releasing "
                     f"{block.p_release[t]:.6g} MW")
        batt = config.battery
        prev_e = batt.start_energy
        for t in range(horizon):
            expect = (prev_e + batt.eta_charge * config.dt * block.p_charge[t]
                      - config.dt * block.p_release[t] / batt.eta_release)
            resid = abs(block.energy[t] - expect)
            if resid > tol * max(1.0, abs(expect)):
                fail("energy_update", (w, t), resid,
                     f"stored energy {block.energy[t]:.6g} != recursion {expect:.6g}")
            scale = max(1.0, batt.energy_max)
            if block.energy[t] < batt.energy_min - tol * scale or \
                    block.energy[t] > batt.energy_max + tol * scale:
                fail("soc_bounds", (w, t),
                     max(batt.energy_min - block.energy[t],
                         block.energy[t] - batt.energy_max),
                     f"stored energy {block.energy[t]:.6g} outside "
                     f"[{batt.energy_min:.6g}, {batt.energy_max:.6g}]")
            prev_e = block.energy[t]
    return FeasibilityReport(tuple(out))


def index_initial_power(unit: ThermalUnit, initial_on: float) -> float:
    """Pre-horizon output attributed to a unit: p_min when initially on."""
    return unit.p_min * initial_on
