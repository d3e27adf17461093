"""Scenario documents (JSON) and measurement trace files (CSV)."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, Dict, List, Union

from .errors import ValidationError
from .fitting import TraceSample
from .model import (
    AffineMap,
    CpuPowerParams,
    ExecTimeParams,
    FrequencyWindow,
    Scenario,
    StaticPower,
    TableMap,
)

SECTIONS = {
    "voltage_map": None,
    "cpu": ("xi", "gamma"),
    "time": ("cc_b", "f_k", "beta"),
    "power": ("p_drop", "p_back"),
    "window": ("f_min", "f_max"),
}

TRACE_COLUMNS = ("freq_ghz", "value")
TRACE_OPTIONAL = ("voltage_v",)

PathLike = Union[str, Path]


def _number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{where}: expected a number (got {value!r})")
    if not math.isfinite(value):
        raise ValidationError(f"{where}: must be finite")
    return float(value)


def _section(doc, name, keys):
    if name not in doc:
        raise ValidationError(f"{name}: missing section")
    sec = doc[name]
    if not isinstance(sec, dict):
        raise ValidationError(f"{name}: expected an object")
    unknown = sorted(set(sec) - set(keys))
    if unknown:
        raise ValidationError(f"{name}.{unknown[0]}: unknown key")
    missing = [k for k in keys if k not in sec]
    if missing:
        raise ValidationError(f"{name}.{missing[0]}: missing key")
    return {k: _number(sec[k], f"{name}.{k}") for k in keys}


def _voltage_map(doc):
    if "voltage_map" not in doc:
        raise ValidationError("voltage_map: missing section")
    vm = doc["voltage_map"]
    if not isinstance(vm, dict) or len(vm) != 1:
        raise ValidationError("voltage_map: expected exactly one of 'affine' or 'table'")
    (kind, body), = vm.items()
    if kind == "affine":
        vals = _section({"voltage_map.affine": body}, "voltage_map.affine", ("m1", "m2"))
        return AffineMap(vals["m1"], vals["m2"])
    if kind == "table":
        if not isinstance(body, list):
            raise ValidationError("voltage_map.table: expected a list of [f, v] rows")
        rows = []
        for i, row in enumerate(body):
            if not isinstance(row, list) or len(row) != 2:
                raise ValidationError(f"voltage_map.table[{i}]: expected [f, v]")
            rows.append((_number(row[0], f"voltage_map.table[{i}]"),
                         _number(row[1], f"voltage_map.table[{i}]")))
        return TableMap(tuple(rows))
    raise ValidationError(f"voltage_map.{kind}: unknown key")


def scenario_from_dict(doc: Dict[str, Any]) -> Scenario:
    if not isinstance(doc, dict):
        raise ValidationError("scenario: expected an object at top level")
    unknown = sorted(set(doc) - set(SECTIONS))
    if unknown:
        raise ValidationError(f"{unknown[0]}: unknown key")
    vmap = _voltage_map(doc)
    cpu = _section(doc, "cpu", SECTIONS["cpu"])
    time = _section(doc, "time", SECTIONS["time"])
    power = _section(doc, "power", SECTIONS["power"])
    window = _section(doc, "window", SECTIONS["window"])
    return Scenario(
        vmap=vmap,
        cpu=CpuPowerParams(**cpu),
        time=ExecTimeParams(**time),
        static_power=StaticPower(**power),
        window=FrequencyWindow(**window),
    )


def scenario_to_dict(s: Scenario) -> Dict[str, Any]:
    if isinstance(s.vmap, AffineMap):
        vm = {"affine": {"m1": s.vmap.m1, "m2": s.vmap.m2}}
    else:
        vm = {"table": [[f, v] for f, v in s.vmap.rows]}
    return {
        "voltage_map": vm,
        "cpu": {"xi": s.cpu.xi, "gamma": s.cpu.gamma},
        "time": {"cc_b": s.time.cc_b, "f_k": s.time.f_k, "beta": s.time.beta},
        "power": {"p_drop": s.static_power.p_drop, "p_back": s.static_power.p_back},
        "window": {"f_min": s.window.f_min, "f_max": s.window.f_max},
    }


def load_scenario(path: PathLike) -> Scenario:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not a valid scenario document ({exc})") from exc
    return scenario_from_dict(doc)


def save_scenario(s: Scenario, path: PathLike) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(s), indent=2) + "\n", encoding="utf-8")


def _cell(text, line, column):
    try:
        value = float(text)
    except ValueError:
        raise ValidationError(f"line {line}: column {column}: not a number ({text!r})") from None
    if not math.isfinite(value) or value <= 0:
        raise ValidationError(f"line {line}: column {column}: must be a finite positive number (got {text})")
    return value


def load_traces(path: PathLike) -> List[TraceSample]:
    """Read a ``freq_ghz,value[,voltage_v]`` CSV trace file."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValidationError(f"missing column {TRACE_COLUMNS[0]}")
        header = [h.strip() for h in header]
        for col in TRACE_COLUMNS:
            if col not in header:
                raise ValidationError(f"missing column {col}")
        unknown = [h for h in header if h not in TRACE_COLUMNS + TRACE_OPTIONAL]
        if unknown:
            raise ValidationError(f"unknown column {unknown[0]}")
        idx = {h: i for i, h in enumerate(header)}
        samples = []
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ValidationError(f"line {line}: expected {len(header)} fields, got {len(row)}")
            f = _cell(row[idx["freq_ghz"]].strip(), line, "freq_ghz")
            value = _cell(row[idx["value"]].strip(), line, "value")
            voltage = None
            if "voltage_v" in idx:
                voltage = _cell(row[idx["voltage_v"]].strip(), line, "voltage_v")
            samples.append(TraceSample(f, value, voltage))
    return samples


def save_traces(samples, path: PathLike) -> None:
    with_voltage = any(s.voltage is not None for s in samples)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS + (TRACE_OPTIONAL if with_voltage else ()))
        for s in samples:
            row = [repr(float(s.f)), repr(float(s.value))]
            if with_voltage:
                row.append(repr(float(s.voltage)))
            w.writerow(row)
