"""File formats: config documents, period/curve CSVs, scenario sets, run
outputs, and reproducibility manifests.

Every format is versioned with a ``format_version`` header field and every
writer has a matching reader, so outputs round-trip losslessly.  CSV numbers
are fixed at six significant digits to keep diffs stable.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .analysis import ComparisonResult, CostReport, SweepRow
from .system import (BatteryParams, CarbonMarketParams, CommitmentSchedule,
                     DispatchSolution, Scenario, ScenarioSet, SystemConfig,
                     ThermalUnit)

FORMAT_VERSION = 1


class ParseError(Exception):
    """Input file problem, annotated with file and (for CSVs) row context."""

    def __init__(self, path, message: str, row: int | None = None):
        self.path = str(path)
        self.row = row
        where = f"{self.path}, row {row}" if row is not None else self.path
        super().__init__(f"{where}: {message}")


def _fmt(value: float) -> str:
    return f"{value:.6g}"


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


# ---------------------------------------------------------------------------
# system config + period series


_UNIT_FIELDS = ("name", "fuel_const", "fuel_lin", "fuel_quad", "emis_const",
                "emis_lin", "emis_quad", "p_min", "p_max", "ramp_up",
                "ramp_down", "startup_cost", "shutdown_cost", "min_up",
                "min_down")


def read_config(config_path, series_path) -> tuple[SystemConfig, np.ndarray, dict]:
    """Build a SystemConfig from the key/value document plus the period CSV.

    Returns (config, hydro capacity curve, extras) where extras carries
    optional fields such as the initial commitment state and default solver
    settings embedded in the document.
    """
    try:
        with open(config_path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ParseError(config_path, f"cannot read: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(config_path, f"not valid JSON: {exc}") from exc
    if doc.get("format_version") != FORMAT_VERSION:
        raise ParseError(config_path,
                         f"unsupported format_version {doc.get('format_version')!r}")
    series = read_series(series_path)
    if "load" not in series:
        raise ParseError(series_path, "missing required column 'load'")
    load = series["load"]
    hydro = series.get("hydro", np.zeros_like(load))
    try:
        units = tuple(
            ThermalUnit(**{k: (str(u[k]) if k == "name" else
                               int(u[k]) if k in ("min_up", "min_down") else
                               float(u[k])) for k in _UNIT_FIELDS})
            for u in doc["units"])
        battery_doc = dict(doc["battery"])
        if battery_doc.get("initial_energy") is not None:
            battery_doc["initial_energy"] = float(battery_doc["initial_energy"])
        battery = BatteryParams(
            capacity_mwh=float(battery_doc["capacity_mwh"]),
            charge_limit=float(battery_doc["charge_limit"]),
            release_limit=float(battery_doc["release_limit"]),
            eta_charge=float(battery_doc["eta_charge"]),
            eta_release=float(battery_doc["eta_release"]),
            soc_min=float(battery_doc["soc_min"]),
            soc_max=float(battery_doc["soc_max"]),
            initial_energy=battery_doc.get("initial_energy"))
        carbon = CarbonMarketParams(
            price=float(doc["carbon"]["price"]),
            eta_correction=float(doc["carbon"]["eta_correction"]),
            allocation_coeff=float(doc["carbon"]["allocation_coeff"]))
        config = SystemConfig(units=units, battery=battery, carbon=carbon,
                              coal_price=float(doc["coal_price"]), load=load,
                              horizon=load.shape[0],
                              dt=float(doc.get("dt", 1.0)))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(config_path, f"bad field: {exc}") from exc
    extras = {"initial_state": doc.get("initial_state"),
              "segments": doc.get("segments"),
              "shed_penalty": doc.get("shed_penalty")}
    return config, hydro, extras


def read_series(path) -> dict[str, np.ndarray]:
    """Column-per-signal CSV with a header row and one row per period."""
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise ParseError(path, f"cannot read: {exc.strerror}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(path, "empty file") from None
        columns: list[list[float]] = [[] for _ in header]
        for rownum, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ParseError(path, f"expected {len(header)} columns, "
                                       f"got {len(row)}", row=rownum)
            for j, cell in enumerate(row):
                try:
                    columns[j].append(float(cell))
                except ValueError:
                    raise ParseError(path, f"column {header[j]!r}: "
                                           f"not a number: {cell!r}",
                                     row=rownum) from None
    return {name.strip(): np.asarray(col)
            for name, col in zip(header, columns)}


def read_curves(path) -> np.ndarray:
    """Daily-curve CSV: a header row, then one row per day, one column per period."""
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise ParseError(path, f"cannot read: {exc.strerror}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(path, "empty file") from None
        periods = len(header)
        days = []
        for rownum, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != periods:
                raise ParseError(path, f"expected {periods} columns, "
                                       f"got {len(row)}", row=rownum)
            try:
                days.append([float(c) for c in row])
            except ValueError as exc:
                raise ParseError(path, f"not a number: {exc}", row=rownum) from None
    if not days:
        raise ParseError(path, "no data rows")
    return np.asarray(days)


def write_curves(path, curves: np.ndarray) -> None:
    curves = np.asarray(curves)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"h{t}" for t in range(curves.shape[1])])
        for row in curves:
            writer.writerow([_fmt(v) for v in row])


# ---------------------------------------------------------------------------
# scenario sets


def write_scenarios(path, scenarios: ScenarioSet, meta: dict | None = None) -> None:
    doc = {
        "format_version": FORMAT_VERSION,
        "periods": scenarios.horizon,
        "scenarios": [
            {"probability": s.probability,
             "wind": [float(v) for v in s.wind_cap],
             "solar": [float(v) for v in s.solar_cap],
             "hydro": [float(v) for v in s.hydro_cap]}
            for s in scenarios],
    }
    if meta:
        doc["meta"] = meta
    _write_json(path, doc)


def read_scenarios(path, hydro_fallback: np.ndarray | None = None) -> ScenarioSet:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ParseError(path, f"cannot read: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(path, f"not valid JSON: {exc}") from exc
    if doc.get("format_version") != FORMAT_VERSION:
        raise ParseError(path, f"unsupported format_version "
                               f"{doc.get('format_version')!r}")
    out = []
    for k, s in enumerate(doc.get("scenarios", [])):
        try:
            hydro = s.get("hydro")
            if hydro is None:
                if hydro_fallback is None:
                    raise ParseError(path, f"scenario {k} has no hydro curve and "
                                           "no fallback series was provided")
                hydro = hydro_fallback
            out.append(Scenario(probability=float(s["probability"]),
                                wind_cap=s["wind"], solar_cap=s["solar"],
                                hydro_cap=hydro))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(path, f"scenario {k}: bad field: {exc}") from exc
    if not out:
        raise ParseError(path, "no scenarios")
    return ScenarioSet(scenarios=tuple(out))


# ---------------------------------------------------------------------------
# run outputs


def write_commitment(path, schedule: CommitmentSchedule, unit_names) -> None:
    """0/1 matrix, one row per unit, one column per hour."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        horizon = schedule.on.shape[1]
        writer.writerow(["unit", "initial"] + [f"h{t}" for t in range(horizon)])
        for i, name in enumerate(unit_names):
            writer.writerow([name, int(schedule.initial_state[i])]
                            + [int(v) for v in schedule.on[i]])


def read_commitment(path) -> tuple[CommitmentSchedule, tuple[str, ...]]:
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise ParseError(path, f"cannot read: {exc.strerror}") from exc
    with fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError(path, "empty file")
    names, initial, on = [], [], []
    for rownum, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        try:
            names.append(row[0])
            initial.append(int(row[1]))
            on.append([int(v) for v in row[2:]])
        except (IndexError, ValueError) as exc:
            raise ParseError(path, f"bad row: {exc}", row=rownum) from None
    return (CommitmentSchedule(on=np.asarray(on, dtype=float),
                               initial_state=np.asarray(initial, dtype=float)),
            tuple(names))


def write_dispatch(path, solution: DispatchSolution, unit_names) -> None:
    """Per-scenario, per-period dispatch of every source (plot-ready)."""
    blocks = solution.per_scenario
    horizon = blocks[0].p_wind.shape[0] if blocks else 0
    has_shed = any(b.shed is not None for b in blocks)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        header = ["scenario", "period"] + [f"p_{n}" for n in unit_names] + \
            ["wind", "solar", "hydro", "charge", "release", "energy"]
        if has_shed:
            header += ["shed", "spill"]
        writer.writerow(header)
        for w, b in enumerate(blocks):
            for t in range(horizon):
                row = [w, t] + [_fmt(b.p_thermal[i, t]) for i in range(len(unit_names))]
                row += [_fmt(b.p_wind[t]), _fmt(b.p_solar[t]), _fmt(b.p_hydro[t]),
                        _fmt(b.p_charge[t]), _fmt(b.p_release[t]), _fmt(b.energy[t])]
                if has_shed:
                    row += [_fmt(b.shed[t] if b.shed is not None else 0.0),
                            _fmt(b.spill[t] if b.spill is not None else 0.0)]
                writer.writerow(row)


def read_dispatch(path) -> dict:
    """Parse a dispatch CSV back into arrays keyed by column name."""
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise ParseError(path, f"cannot read: {exc.strerror}") from exc
    with fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    if not rows:
        raise ParseError(path, "no data rows")
    out: dict[str, list] = {k: [] for k in rows[0]}
    for rownum, row in enumerate(rows, start=2):
        for k, v in row.items():
            try:
                out[k].append(float(v))
            except (TypeError, ValueError):
                raise ParseError(path, f"column {k!r}: not a number: {v!r}",
                                 row=rownum) from None
    return {k: np.asarray(v) for k, v in out.items()}


def cost_report_doc(report: CostReport) -> dict:
    doc = asdict(report)
    doc["per_scenario"] = [asdict(r) for r in report.per_scenario]
    return doc


def write_report(path, report: CostReport, solver: dict,
                 feasibility_ok: bool, extras: dict | None = None) -> None:
    doc = {"format_version": FORMAT_VERSION,
           "cost": cost_report_doc(report),
           "solver": solver,
           "feasibility_ok": feasibility_ok}
    if extras:
        doc.update(extras)
    _write_json(path, doc)


def read_report(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format_version") != FORMAT_VERSION:
        raise ParseError(path, f"unsupported format_version "
                               f"{doc.get('format_version')!r}")
    return doc


def write_sweep(path, rows: list[SweepRow]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["carbon_price", "total_cost", "expected_emissions",
                         "expected_allowance", "status"])
        for r in rows:
            writer.writerow([_fmt(r.carbon_price), _fmt(r.total),
                             _fmt(r.expected_emissions),
                             _fmt(r.expected_allowance), r.status])


def read_sweep(path) -> list[SweepRow]:
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise ParseError(path, f"cannot read: {exc.strerror}") from exc
    with fh:
        rows = list(csv.DictReader(fh))
    out = []
    for rownum, row in enumerate(rows, start=2):
        try:
            out.append(SweepRow(carbon_price=float(row["carbon_price"]),
                                total=float(row["total_cost"]),
                                expected_emissions=float(row["expected_emissions"]),
                                expected_allowance=float(row["expected_allowance"]),
                                status=row["status"]))
        except (KeyError, ValueError) as exc:
            raise ParseError(path, f"bad row: {exc}", row=rownum) from None
    return out


def write_comparison(path, comparison: ComparisonResult) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "total_cost", "uc_cost", "start_stop_cycles",
                         "expected_penalty", "flagged_scenarios"])
        for name, rep in (("stochastic", comparison.stochastic),
                          ("deterministic", comparison.deterministic)):
            writer.writerow([name, _fmt(rep.total), _fmt(rep.uc_cost),
                             rep.start_stop_cycles, _fmt(rep.expected_penalty),
                             ";".join(str(w) for w in rep.flagged_scenarios)])
        writer.writerow(["vss", _fmt(comparison.vss), "", "", "", ""])


def read_comparison(path) -> dict:
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise ParseError(path, f"cannot read: {exc.strerror}") from exc
    with fh:
        rows = list(csv.reader(fh))
    out = {}
    for row in rows[1:]:
        if not row:
            continue
        if row[0] == "vss":
            out["vss"] = float(row[1])
        else:
            out[row[0]] = {"total_cost": float(row[1]), "uc_cost": float(row[2]),
                           "start_stop_cycles": int(row[3]),
                           "expected_penalty": float(row[4]),
                           "flagged_scenarios": [int(v) for v in row[5].split(";") if v]}
    return out


# ---------------------------------------------------------------------------
# run manifests


def write_manifest(path, command: str, seed: int | None, options: dict,
                   inputs: list, outputs: list, wall_time_s: float,
                   tool_version: str) -> None:
    doc = {"format_version": FORMAT_VERSION,
           "command": command,
           "tool_version": tool_version,
           "seed": seed,
           "options": options,
           "inputs": {str(p): sha256_file(p) for p in inputs},
           "outputs": {str(p): sha256_file(p) for p in outputs},
           "wall_time_s": round(float(wall_time_s), 3)}
    _write_json(path, doc)


def read_manifest(path, verify: bool = True) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format_version") != FORMAT_VERSION:
        raise ParseError(path, f"unsupported format_version "
                               f"{doc.get('format_version')!r}")
    if verify:
        for section in ("inputs", "outputs"):
            for p, digest in doc.get(section, {}).items():
                actual = sha256_file(p)
                if actual != digest:
                    raise ParseError(path, f"digest mismatch for {p}: manifest "
                                           f"{digest[:12]}.., file {actual[:12]}..")
    return doc


def _write_json(path, doc) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")
