"""Generate the shipped desk-scale study inputs (6 units, 24 h, 48 days).

The fleet is synthetic: the study's published system totals (3070 MW coal,
1250 MW wind, 300 MW solar, 100 MW hydro, 600 MWh battery at 80 MW) are kept,
and unit-level cost/emission coefficients are chosen to be plausible for
coal units of each size.  Every unit's marginal emission rate exceeds the
free-allocation benchmark, so the net carbon bill is always positive, and
two units are cheap on fuel but dirty, so the merit order reshuffles as the
carbon price rises.

Wind days fall into three regimes (33 strong / 7 medium / 8 weak nights) and
solar days into three (31 sunny / 15 cloudy / 2 overcast), so k = 3 recovers
the regime shares 0.6875/0.1458/0.1667 and 0.6458/0.3125/0.0417.

Run from the repository root: python3 scripts/make_desk_data.py
"""

import json
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
DESK = ROOT / "data" / "desk"
MINI = ROOT / "data" / "mini"

LOAD = np.array([
    2050, 2010, 1990, 1980, 2000, 2080, 2260, 2520, 2780, 2900, 2910, 2900,
    2820, 2760, 2720, 2760, 2840, 2940, 3000, 3020, 2940, 2720, 2460, 2240,
], dtype=float)

UNITS = [
    # name, pmax, pmin, ramp, fuel b, fuel c, fuel a, emis k, emis j, emis l,
    # start cost, stop cost, min_up, min_down
    ("U1", 820, 370, 300, 0.288, 2.2e-5, 0.75, 0.953, 0.7e-5, 0.33, 26000, 13000, 6, 6),
    ("U2", 780, 350, 290, 0.294, 2.5e-5, 0.70, 0.962, 0.8e-5, 0.30, 24000, 12000, 6, 6),
    ("U3", 600, 240, 240, 0.274, 3.0e-5, 0.58, 1.085, 0.9e-5, 0.25, 15000, 7500, 4, 4),
    ("U4", 400, 150, 190, 0.312, 3.8e-5, 0.45, 0.992, 1.1e-5, 0.20, 2000, 1000, 3, 3),
    ("U5", 250, 95, 140, 0.2835, 4.6e-5, 0.33, 1.055, 1.3e-5, 0.14, 5500, 2700, 2, 2),
    ("U6", 220, 80, 130, 0.340, 5.2e-5, 0.30, 1.032, 1.5e-5, 0.13, 4500, 2200, 2, 2),
]


def hydro_curve() -> np.ndarray:
    t = np.arange(24)
    curve = 78.0 + 12.0 * np.sin(np.pi * (t - 5) / 14.0)
    return np.clip(curve, 65.0, 95.0)


def wind_shape() -> np.ndarray:
    t = np.arange(24)
    return 0.55 + 0.45 * np.cos(2 * np.pi * (t - 2) / 24.0)


def solar_shape() -> np.ndarray:
    t = np.arange(24)
    s = np.clip(np.sin(np.pi * (t - 6) / 13.0), 0.0, None)
    return s ** 1.3


def make_wind(rng: np.random.Generator) -> np.ndarray:
    shape = wind_shape()
    days = []
    for amplitude, count in ((700.0, 33), (540.0, 7), (130.0, 8)):
        for _ in range(count):
            level = amplitude * rng.uniform(0.94, 1.06)
            noise = rng.uniform(0.96, 1.04, size=24)
            days.append(np.clip(level * shape * noise, 0.0, 1250.0))
    return np.round(np.asarray(days), 3)


def make_solar(rng: np.random.Generator) -> np.ndarray:
    shape = solar_shape()
    days = []
    for peak, count in ((272.0, 31), (150.0, 15), (36.0, 2)):
        for _ in range(count):
            level = peak * rng.uniform(0.92, 1.08)
            noise = rng.uniform(0.95, 1.05, size=24)
            days.append(np.clip(level * shape * noise, 0.0, 300.0))
    return np.round(np.asarray(days), 3)


def unit_doc(row) -> dict:
    (name, pmax, pmin, ramp, b, c, a, k, j, l, start, stop, up, down) = row
    return {
        "name": name, "p_min": float(pmin), "p_max": float(pmax),
        "ramp_up": float(ramp), "ramp_down": float(ramp),
        "fuel_const": a, "fuel_lin": b, "fuel_quad": c,
        "emis_const": l, "emis_lin": k, "emis_quad": j,
        "startup_cost": float(start), "shutdown_cost": float(stop),
        "min_up": up, "min_down": down,
    }


def write_series(path: Path, load: np.ndarray, hydro: np.ndarray) -> None:
    lines = ["load,hydro"]
    for lo, hy in zip(load, hydro):
        lines.append(f"{lo:.6g},{hy:.6g}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_curves(path: Path, curves: np.ndarray) -> None:
    header = ",".join(f"h{t}" for t in range(curves.shape[1]))
    lines = [header]
    for row in curves:
        lines.append(",".join(f"{v:.6g}" for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def desk_config() -> dict:
    return {
        "format_version": 1,
        "description": "Synthetic 6-unit coal fleet (3070 MW) with wind, solar, "
                       "hydro, and a 600 MWh battery; coefficients documented in "
                       "data/desk/README.md",
        "coal_price": 700.0,
        "dt": 1.0,
        "carbon": {"price": 100.0, "eta_correction": 1.0,
                   "allocation_coeff": 0.9419},
        "battery": {"capacity_mwh": 600.0, "charge_limit": 80.0,
                    "release_limit": 80.0, "eta_charge": 0.95,
                    "eta_release": 1.0526315789473684,
                    "soc_min": 0.3, "soc_max": 0.9, "initial_energy": None},
        "units": [unit_doc(r) for r in UNITS],
        "initial_state": [1, 1, 0, 0, 0, 0],
        "segments": 4,
    }


def mini_config() -> dict:
    return {
        "format_version": 1,
        "description": "Two-unit smoke-test system for fast CLI runs",
        "coal_price": 700.0,
        "dt": 1.0,
        "carbon": {"price": 100.0, "eta_correction": 1.0,
                   "allocation_coeff": 0.9419},
        "battery": {"capacity_mwh": 40.0, "charge_limit": 10.0,
                    "release_limit": 10.0, "eta_charge": 0.95,
                    "eta_release": 1.0526315789473684,
                    "soc_min": 0.3, "soc_max": 0.9, "initial_energy": None},
        "units": [
            {"name": "A", "p_min": 40.0, "p_max": 120.0, "ramp_up": 60.0,
             "ramp_down": 60.0, "fuel_const": 6.0, "fuel_lin": 0.29,
             "fuel_quad": 8e-5, "emis_const": 3.0, "emis_lin": 0.97,
             "emis_quad": 3e-5, "startup_cost": 4000.0,
             "shutdown_cost": 2000.0, "min_up": 2, "min_down": 2},
            {"name": "B", "p_min": 25.0, "p_max": 90.0, "ramp_up": 50.0,
             "ramp_down": 50.0, "fuel_const": 4.0, "fuel_lin": 0.315,
             "fuel_quad": 1.1e-4, "emis_const": 2.0, "emis_lin": 1.03,
             "emis_quad": 4e-5, "startup_cost": 2500.0,
             "shutdown_cost": 1200.0, "min_up": 1, "min_down": 1},
        ],
        "initial_state": [1, 0],
        "segments": 4,
    }


def main() -> None:
    DESK.mkdir(parents=True, exist_ok=True)
    MINI.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(20240901)
    (DESK / "config.json").write_text(
        json.dumps(desk_config(), indent=1, sort_keys=True) + "\n", encoding="utf-8")
    write_series(DESK / "series.csv", LOAD, hydro_curve())
    write_curves(DESK / "wind.csv", make_wind(rng))
    write_curves(DESK / "solar.csv", make_solar(rng))

    (MINI / "config.json").write_text(
        json.dumps(mini_config(), indent=1, sort_keys=True) + "\n", encoding="utf-8")
    mini_load = np.array([110.0, 120.0, 150.0, 170.0, 160.0, 130.0])
    mini_hydro = np.array([10.0, 10.0, 12.0, 12.0, 11.0, 10.0])
    write_series(MINI / "series.csv", mini_load, mini_hydro)
    rng2 = np.random.default_rng(7)
    shape = np.array([0.9, 1.0, 0.8, 0.6, 0.7, 0.85])
    wind_days = np.round(np.vstack([
        40.0 * shape * rng2.uniform(0.9, 1.1, 6) for _ in range(6)
    ] + [12.0 * shape * rng2.uniform(0.9, 1.1, 6) for _ in range(4)]), 3)
    solar_days = np.round(np.vstack([
        np.array([0, 5, 25, 35, 20, 2]) * rng2.uniform(0.9, 1.1, 6)
        for _ in range(7)
    ] + [np.array([0, 2, 8, 12, 7, 1]) * rng2.uniform(0.9, 1.1, 6)
         for _ in range(3)]), 3)
    write_curves(MINI / "wind.csv", wind_days)
    write_curves(MINI / "solar.csv", solar_days)
    print(f"wrote {DESK} and {MINI}")


if __name__ == "__main__":
    main()
