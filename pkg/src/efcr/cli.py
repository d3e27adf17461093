"""Command-line interface.

Exit status: 0 on success, 2 on invalid input or usage, 1 on runtime errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Dict, List, Optional, Sequence


from . import __version__
from .errors import ModelError, ValidationError
from .files import load_scenario, load_traces
from .fitting import fit_cpu_power, fit_exec_time, fit_voltage_map
from .model import energy_curve
from .sensitivity import SweepSpec, axis_values, sweep
from .solver import find_fopt_cubic, find_fopt_numeric, fit_quad_approx
from .strategy import classify, strategy_cost

SIG_DIGITS = 9


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, f".{SIG_DIGITS}g")


def _json_value(x):
    if x is None or isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return None
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(format(x, f".{SIG_DIGITS}g"))


def emit_table(columns: Sequence[str], rows: List[Sequence], fmt_name: str, out) -> None:
    if fmt_name == "json":
        json.dump([{c: _json_value(v) for c, v in zip(columns, row)} for row in rows], out, indent=2)
        out.write("\n")
    elif fmt_name == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    else:
        cells = [list(columns)] + [[fmt(v) for v in row] for row in rows]
        widths = [max(len(r[i]) for r in cells) for i in range(len(columns))]
        for r in cells:
            out.write("  ".join(c.rjust(w) for c, w in zip(r, widths)).rstrip() + "\n")


def emit_record(record: Dict[str, object], fmt_name: str, out) -> None:
    if fmt_name == "json":
        json.dump({k: _json_value(v) for k, v in record.items()}, out, indent=2)
        out.write("\n")
    elif fmt_name == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(list(record))
        w.writerow([fmt(v) for v in record.values()])
    else:
        width = max(len(k) for k in record)
        for k, v in record.items():
            out.write(f"{k.ljust(width)}  {fmt(v)}\n")


def parse_range(text: str):
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected START:STOP:STEP, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"non-numeric range {text!r}") from None
    if not step > 0 or stop < start:
        raise argparse.ArgumentTypeError(f"range needs STEP > 0 and STOP >= START ({text!r})")
    return start, stop, step


def parse_bool(text: str) -> bool:
    low = text.lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected true or false, got {text!r}")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_energy_curve(args, out):
    s = load_scenario(args.scenario)
    curve = energy_curve(s, axis_values(args.grid), include_back=args.include_back)
    emit_table(curve.COLUMNS, list(curve.rows()), args.format, out)


def cmd_fopt(args, out):
    s = load_scenario(args.scenario)
    if args.method == "closed-form":
        quad = fit_quad_approx(s)
        res = find_fopt_cubic(quad, s.time, s.static_power.p_drop, s.static_power.p_back,
                              include_back=args.include_back)
    else:
        res = find_fopt_numeric(s, clamp=not args.no_clamp, include_back=args.include_back)
    emit_record(
        {"f_opt_ghz": res.f_opt, "clamped": res.status.value, "method": res.method.value,
         "e_min": res.e_min},
        args.format, out,
    )


def cmd_sweep(args, out):
    s = load_scenario(args.scenario)
    if (args.param2 is None) != (args.range2 is None):
        raise ValidationError("--param2 and --range2 must be given together")
    spec = SweepSpec(args.param, args.range, args.param2, args.range2, clamp=args.clamp)
    grid = sweep(s, spec, include_back=args.include_back)
    rows = [(v1, v2, f, st, r) for v1, v2, f, st, r in grid.rows()]
    emit_table(("param1", "param2", "f_opt_ghz", "clamped", "ratio"), rows, args.format, out)


def _fit_record(report, extra=None):
    rec = dict(report.params)
    if extra:
        rec.update(extra)
    for name, se in report.std_errors.items():
        rec[f"{name}_stderr"] = se
    p5, p50, p95 = report.percentiles
    rec.update(n_samples=report.n_samples, rel_err_p5=p5, rel_err_p50=p50, rel_err_p95=p95,
               rms_residual=report.rms)
    return rec


def cmd_fit_time(args, out):
    _, report = fit_exec_time(load_traces(args.input))
    emit_record(_fit_record(report), args.format, out)


def cmd_fit_power(args, out):
    vmap = load_scenario(args.scenario).vmap if args.scenario else None
    _, _, report = fit_cpu_power(load_traces(args.input), vmap=vmap)
    emit_record(_fit_record(report), args.format, out)


def cmd_fit_vmap(args, out):
    samples = load_traces(args.input)
    _, report = fit_voltage_map([(t.f, t.value) for t in samples])
    emit_record(_fit_record(report), args.format, out)


def cmd_recommend(args, out):
    s = load_scenario(args.scenario)
    regime = classify(s, include_back=args.include_back)
    cost = strategy_cost(s, include_back=args.include_back)
    rec = {"regime": regime.kind.value, "action": regime.action.value, "f_opt_ghz": regime.f_opt,
           "best": cost.best.value}
    for action in cost.energy:
        key = action.value
        rec[f"f_{key}_ghz"] = cost.frequency[action]
        rec[f"e_{key}_j"] = cost.energy[action]
        rec[f"saving_vs_{key}_pct"] = cost.savings_pct[action]
    emit_record(rec, args.format, out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="efcr", description="Energy/frequency convexity toolkit"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "csv", "json"), default="text")
    common.add_argument("--include-back", type=parse_bool, default=True, metavar="{true,false}",
                        help="count background power in the optimized energy (default true)")

    def add(name, func, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(func=func)
        return p

    p = add("energy-curve", cmd_energy_curve, "tabulate power, time and energy over a grid")
    p.add_argument("--scenario", required=True)
    p.add_argument("--grid", type=parse_range, required=True, metavar="S:E:STEP")

    p = add("fopt", cmd_fopt, "energy-optimal frequency")
    p.add_argument("--scenario", required=True)
    p.add_argument("--no-clamp", action="store_true", help="search beyond the exploitable window")
    p.add_argument("--method", choices=("numeric", "closed-form"), default="numeric")

    p = add("sweep", cmd_sweep, "f_opt over a 1-D or 2-D parameter grid")
    p.add_argument("--scenario", required=True)
    p.add_argument("--param", required=True)
    p.add_argument("--range", type=parse_range, required=True, metavar="S:E:STEP")
    p.add_argument("--param2")
    p.add_argument("--range2", type=parse_range, metavar="S:E:STEP")
    clamp = p.add_mutually_exclusive_group()
    clamp.add_argument("--clamp", action="store_true", help="restrict to the exploitable window")
    clamp.add_argument("--no-clamp", dest="clamp", action="store_false", help="(default)")

    p = add("fit-time", cmd_fit_time, "fit cc_b, f_k, beta to an execution-time trace")
    p.add_argument("--input", required=True)

    p = add("fit-power", cmd_fit_power, "fit xi, gamma, P_static to a power trace")
    p.add_argument("--input", required=True)
    p.add_argument("--scenario", help="voltage map for samples without voltage_v")

    p = add("fit-vmap", cmd_fit_vmap, "fit V = m1 f + m2 to frequency/voltage pairs")
    p.add_argument("--input", required=True)

    p = add("recommend", cmd_recommend, "classify the regime and compare strategies")
    p.add_argument("--scenario", required=True)
    return parser


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out if out is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    buf = io.StringIO()
    try:
        args.func(args, buf)
    except ValidationError as exc:
        print(f"efcr: error: {exc}", file=sys.stderr)
        return 2
    except (ModelError, OSError) as exc:
        print(f"efcr: error: {exc}", file=sys.stderr)
        return 1
    out.write(buf.getvalue())
    return 0


if __name__ == "__main__":
    sys.exit(main())
