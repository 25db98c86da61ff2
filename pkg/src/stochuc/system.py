"""Domain types for the combined coal/wind/solar/hydro/battery system.

All types are frozen dataclasses with read-only arrays: safe to share across
threads.  Construction performs only shape coercion; invariant checking is
the job of :func:`validate_config`, which reports violations instead of
raising, so that a single pass can list everything wrong with an input file.

Units of measure: power in MW (period averages), energy in MWh, fuel in tce
(tonnes of coal equivalent), emissions in tCO2, money in currency units of
the price inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _vector(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-d series, got shape {arr.shape}")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


def _matrix(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-d array, got shape {arr.shape}")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ThermalUnit:
    """One coal-fired unit: fuel curve, emission curve, and cycling limits.

    Fuel consumption at output p is ``fuel_const + fuel_lin*p + fuel_quad*p**2``
    (tce per hour); emissions follow the same quadratic shape in tCO2.
    """

    name: str
    fuel_const: float  # tce
    fuel_lin: float  # tce/MWh
    fuel_quad: float  # tce/MWh^2
    emis_const: float  # tCO2
    emis_lin: float  # tCO2/MWh
    emis_quad: float  # tCO2/MWh^2
    p_min: float  # MW
    p_max: float  # MW
    ramp_up: float  # MW/h
    ramp_down: float  # MW/h
    startup_cost: float
    shutdown_cost: float
    min_up: int  # h
    min_down: int  # h

    @property
    def startup_ramp(self) -> float:
        """Output headroom allowed in the hour a unit starts or stops."""
        return 0.5 * (self.p_min + self.p_max)


@dataclass(frozen=True)
class BatteryParams:
    capacity_mwh: float
    charge_limit: float  # MW
    release_limit: float  # MW
    eta_charge: float
    eta_release: float
    soc_min: float
    soc_max: float
    initial_energy: float | None = None  # MWh; defaults to soc_min * capacity

    @property
    def start_energy(self) -> float:
        if self.initial_energy is None:
            return self.soc_min * self.capacity_mwh
        return self.initial_energy

    @property
    def energy_min(self) -> float:
        return self.soc_min * self.capacity_mwh

    @property
    def energy_max(self) -> float:
        return self.soc_max * self.capacity_mwh


@dataclass(frozen=True)
class CarbonMarketParams:
    price: float  # money per tCO2
    eta_correction: float
    allocation_coeff: float  # tCO2 per MWh of generation


@dataclass(frozen=True)
class SystemConfig:
    units: tuple[ThermalUnit, ...]
    battery: BatteryParams
    carbon: CarbonMarketParams
    coal_price: float  # money per tce
    load: np.ndarray  # MW per period
    horizon: int
    dt: float = 1.0  # hours per period

    def __post_init__(self):
        object.__setattr__(self, "units", tuple(self.units))
        object.__setattr__(self, "load", _vector(self.load))

    @property
    def num_units(self) -> int:
        return len(self.units)


@dataclass(frozen=True)
class Scenario:
    """One weighted renewable-availability outcome over the horizon."""

    probability: float
    wind_cap: np.ndarray
    solar_cap: np.ndarray
    hydro_cap: np.ndarray

    def __post_init__(self):
        for name in ("wind_cap", "solar_cap", "hydro_cap"):
            object.__setattr__(self, name, _vector(getattr(self, name)))


@dataclass(frozen=True)
class ScenarioSet:
    scenarios: tuple[Scenario, ...]

    def __post_init__(self):
        object.__setattr__(self, "scenarios", tuple(self.scenarios))

    def __len__(self) -> int:
        return len(self.scenarios)

    def __iter__(self):
        return iter(self.scenarios)

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([s.probability for s in self.scenarios])

    @property
    def horizon(self) -> int:
        return self.scenarios[0].wind_cap.shape[0] if self.scenarios else 0


@dataclass(frozen=True)
class CommitmentSchedule:
    """First-stage on/off matrix, units x periods, with the pre-horizon state."""

    on: np.ndarray  # (N, T) of {0, 1}
    initial_state: np.ndarray  # (N,) of {0, 1}

    def __post_init__(self):
        on = np.asarray(self.on, dtype=np.float64).copy()
        init = np.asarray(self.initial_state, dtype=np.float64).copy()
        on.setflags(write=False)
        init.setflags(write=False)
        object.__setattr__(self, "on", on)
        object.__setattr__(self, "initial_state", init)

    def with_previous(self) -> np.ndarray:
        """on-matrix prefixed with the initial state column: (N, T+1)."""
        return np.hstack([self.initial_state[:, None], self.on])

    def transition_count(self) -> int:
        diff = np.diff(self.with_previous(), axis=1)
        return int(np.abs(diff).round().sum())


@dataclass(frozen=True)
class ScenarioDispatch:
    """Second-stage decisions and recomputed costs for one scenario."""

    p_thermal: np.ndarray  # (N, T) MW
    p_wind: np.ndarray  # (T,) MW
    p_solar: np.ndarray
    p_hydro: np.ndarray
    p_charge: np.ndarray
    p_release: np.ndarray
    energy: np.ndarray  # (T,) MWh, end-of-period stored energy
    fuel_cost: float = 0.0
    carbon_cost: float = 0.0
    shed: np.ndarray | None = None  # (T,) MW of unserved load, if modelled
    spill: np.ndarray | None = None  # (T,) MW of forced dump, if modelled

    def __post_init__(self):
        object.__setattr__(self, "p_thermal", _matrix(self.p_thermal))
        for name in ("p_wind", "p_solar", "p_hydro", "p_charge", "p_release", "energy"):
            object.__setattr__(self, name, _vector(getattr(self, name)))
        for name in ("shed", "spill"):
            if getattr(self, name) is not None:
                object.__setattr__(self, name, _vector(getattr(self, name)))


@dataclass(frozen=True)
class DispatchSolution:
    """Per-scenario dispatch blocks plus the shared first-stage cost."""

    per_scenario: tuple[ScenarioDispatch, ...]
    uc_cost: float

    def __post_init__(self):
        object.__setattr__(self, "per_scenario", tuple(self.per_scenario))

    def expected_fuel(self, probabilities) -> float:
        return float(sum(p * d.fuel_cost for p, d in zip(probabilities, self.per_scenario)))

    def expected_carbon(self, probabilities) -> float:
        return float(sum(p * d.carbon_cost for p, d in zip(probabilities, self.per_scenario)))


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    path: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return "\n".join(f"{v.path}: {v.message}" for v in self.violations)


class _Collector:
    def __init__(self):
        self.items: list[Violation] = []

    def check(self, condition: bool, path: str, message: str) -> None:
        if not condition:
            self.items.append(Violation(path, message))

    def report(self) -> ValidationReport:
        return ValidationReport(tuple(self.items))


def validate_config(config: SystemConfig) -> ValidationReport:
    """Check every type invariant; the report lists one entry per violation."""
    out = _Collector()
    for i, u in enumerate(config.units):
        p = f"units[{i}]"
        out.check(0 <= u.p_min <= u.p_max, f"{p}.p_min", "requires 0 <= p_min <= p_max")
        out.check(u.ramp_up > 0, f"{p}.ramp_up", "requires ramp_up > 0")
        out.check(u.ramp_down > 0, f"{p}.ramp_down", "requires ramp_down > 0")
        out.check(u.fuel_quad >= 0, f"{p}.fuel_quad",
                  "requires fuel_quad >= 0 (convex fuel curve)")
        out.check(u.emis_quad >= 0, f"{p}.emis_quad",
                  "requires emis_quad >= 0 (convex emission curve)")
        out.check(u.min_up >= 1, f"{p}.min_up", "requires min_up >= 1")
        out.check(u.min_down >= 1, f"{p}.min_down", "requires min_down >= 1")
        out.check(u.startup_cost >= 0, f"{p}.startup_cost", "requires startup_cost >= 0")
        out.check(u.shutdown_cost >= 0, f"{p}.shutdown_cost", "requires shutdown_cost >= 0")
    b = config.battery
    out.check(0 <= b.soc_min < b.soc_max <= 1, "battery.soc_min",
              "requires 0 <= soc_min < soc_max <= 1")
    out.check(b.capacity_mwh > 0, "battery.capacity_mwh", "requires capacity > 0")
    out.check(b.charge_limit >= 0, "battery.charge_limit", "requires charge_limit >= 0")
    out.check(b.release_limit >= 0, "battery.release_limit", "requires release_limit >= 0")
    out.check(0 < b.eta_charge <= 1, "battery.eta_charge", "requires eta_charge in (0, 1]")
    out.check(b.eta_release > 0, "battery.eta_release", "requires eta_release > 0")
    if b.capacity_mwh > 0 and b.soc_min < b.soc_max:
        out.check(b.energy_min <= b.start_energy <= b.energy_max,
                  "battery.initial_energy",
                  "requires soc_min*capacity <= initial_energy <= soc_max*capacity")
    c = config.carbon
    out.check(c.price >= 0, "carbon.price", "requires price >= 0")
    out.check(c.allocation_coeff >= 0, "carbon.allocation_coeff",
              "requires allocation_coeff >= 0")
    out.check(c.eta_correction > 0, "carbon.eta_correction",
              "requires eta_correction > 0")
    out.check(config.horizon == config.load.shape[0], "horizon",
              f"horizon = length(load): {config.horizon} != {config.load.shape[0]}")
    out.check(config.dt > 0, "dt", "requires dt > 0")
    out.check(bool(np.all(config.load >= 0)), "load", "requires load[t] >= 0 for all t")
    return out.report()


def validate_scenarios(scenarios: ScenarioSet, horizon: int) -> ValidationReport:
    """Scenario-set invariants: lengths, signs, probabilities summing to one."""
    out = _Collector()
    out.check(len(scenarios) > 0, "scenarios", "requires a nonempty scenario set")
    for w, s in enumerate(scenarios):
        p = f"scenarios[{w}]"
        out.check(0 <= s.probability <= 1, f"{p}.probability",
                  "requires probability in [0, 1]")
        for name in ("wind_cap", "solar_cap", "hydro_cap"):
            series = getattr(s, name)
            out.check(series.shape[0] == horizon, f"{p}.{name}",
                      f"requires length {horizon}, got {series.shape[0]}")
            out.check(bool(np.all(series >= 0)), f"{p}.{name}",
                      "requires entries >= 0")
    if len(scenarios):
        total = float(scenarios.probabilities.sum())
        out.check(abs(total - 1.0) <= 1e-9, "scenarios",
                  f"probabilities must sum to 1 within 1e-9, got {total!r}")
    return out.report()


# ---------------------------------------------------------------------------
# direct cost/emission evaluation


def fuel_cost(unit: ThermalUnit, power: float, coal_price: float) -> float:
    """Fuel bill for one unit-hour at the given output: price times the curve."""
    if power < 0:
        raise ValueError(f"power must be nonnegative, got {power}")
    burn = unit.fuel_const + unit.fuel_lin * power + unit.fuel_quad * power ** 2
    return coal_price * burn


def emissions(unit: ThermalUnit, power: float) -> float:
    """CO2 emitted by one unit-hour at the given output."""
    if power < 0:
        raise ValueError(f"power must be nonnegative, got {power}")
    return unit.emis_const + unit.emis_lin * power + unit.emis_quad * power ** 2


def uc_cost(schedule: CommitmentSchedule, units) -> float:
    """Total start-up plus shut-down cost of a commitment schedule."""
    units = tuple(units)
    on = schedule.on
    if on.shape[0] != len(units):
        raise ValueError(f"schedule has {on.shape[0]} unit rows for {len(units)} units")
    full = schedule.with_previous()
    if not np.all(np.isin(full, (0.0, 1.0))):
        raise ValueError("commitment entries must be binary")
    diff = np.diff(full, axis=1)
    starts = np.maximum(diff, 0.0).sum(axis=1)
    stops = np.maximum(-diff, 0.0).sum(axis=1)
    total = 0.0
    for i, unit in enumerate(units):
        total += unit.startup_cost * starts[i] + unit.shutdown_cost * stops[i]
    return float(total)
