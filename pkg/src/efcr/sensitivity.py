"""Parameter sweeps of the optimal frequency."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import brentq

from .errors import ModelError, ValidationError
from .model import AffineMap, Scenario, cpu_power
from .solver import find_fopt_numeric

PARAMETERS = ("f_k", "beta", "xi", "gamma", "p_back", "p_drop", "m1", "m2", "cc_b")

Range = Tuple[float, float, float]


def axis_values(rng: Range) -> np.ndarray:
    """Inclusive ``start:stop:step`` axis."""
    start, stop, step = rng
    if not step > 0:
        raise ValidationError(f"range step must be > 0 (got {step})")
    if stop < start:
        raise ValidationError(f"range stop {stop} is below start {start}")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(n), 12)


def with_param(s: Scenario, name: str, value: float) -> Scenario:
    """Copy of ``s`` with one named parameter replaced (revalidated)."""
    value = float(value)
    if name in ("f_k", "beta", "cc_b"):
        return dataclasses.replace(s, time=dataclasses.replace(s.time, **{name: value}))
    if name in ("xi", "gamma"):
        return dataclasses.replace(s, cpu=dataclasses.replace(s.cpu, **{name: value}))
    if name in ("p_back", "p_drop"):
        return dataclasses.replace(
            s, static_power=dataclasses.replace(s.static_power, **{name: value})
        )
    if name in ("m1", "m2"):
        if not isinstance(s.vmap, AffineMap):
            raise ValidationError(f"{name} can only be swept on an affine voltage map")
        return dataclasses.replace(s, vmap=dataclasses.replace(s.vmap, **{name: value}))
    raise ValidationError(f"unknown sweep parameter {name!r} (expected one of {PARAMETERS})")


@dataclass(frozen=True)
class SweepSpec:
    param: str
    range: Range
    param2: Optional[str] = None
    range2: Optional[Range] = None
    clamp: bool = False

    def __post_init__(self):
        for name in (self.param, self.param2):
            if name is not None and name not in PARAMETERS:
                raise ValidationError(f"unknown sweep parameter {name!r}")
        if (self.param2 is None) != (self.range2 is None):
            raise ValidationError("param2 and range2 must be given together")
        if self.param2 == self.param:
            raise ValidationError("param2 must differ from param")
        axis_values(self.range)
        if self.range2 is not None:
            axis_values(self.range2)


@dataclass
class SweepGrid:
    param: str
    axis: np.ndarray
    param2: Optional[str]
    axis2: Optional[np.ndarray]
    f_opt: np.ndarray      # shape (len(axis), len(axis2) or 1), NaN marks a gap
    status: np.ndarray     # FoptStatus or None for gaps
    e_min: np.ndarray
    ratio: np.ndarray      # P_cpu(f_opt) / P_back

    @property
    def shape(self):
        return self.f_opt.shape

    @property
    def gaps(self) -> np.ndarray:
        return np.isnan(self.f_opt)

    def rows(self) -> Iterator[tuple]:
        """Long-format rows ``(value1, value2, f_opt, status, ratio)``."""
        axis2 = self.axis2 if self.axis2 is not None else [None]
        for i, v1 in enumerate(self.axis):
            for j, v2 in enumerate(axis2):
                st = self.status[i, j]
                yield (
                    float(v1),
                    None if v2 is None else float(v2),
                    float(self.f_opt[i, j]),
                    "gap" if st is None else st.value,
                    float(self.ratio[i, j]),
                )


def _ratio(s: Scenario, f: float) -> float:
    p_back = s.static_power.p_back
    try:
        p = cpu_power(s.cpu, s.vmap, f)
    except ModelError:
        return float("nan")
    return float("inf") if p_back == 0 else p / p_back


def sweep(base: Scenario, spec: SweepSpec, include_back: bool = True) -> SweepGrid:
    """Solve for the optimal frequency at every grid point.

    Points whose parameters violate a scenario invariant are recorded as gaps
    (NaN) rather than raised.
    """
    axis = axis_values(spec.range)
    axis2 = axis_values(spec.range2) if spec.range2 is not None else None
    n2 = 1 if axis2 is None else len(axis2)
    if len(axis) == 0 or n2 == 0:
        raise ValidationError("empty sweep grid")
    shape = (len(axis), n2)
    f_opt = np.full(shape, np.nan)
    e_min = np.full(shape, np.nan)
    ratio = np.full(shape, np.nan)
    status = np.full(shape, None, dtype=object)
    for i, v1 in enumerate(axis):
        for j in range(n2):
            try:
                sc = with_param(base, spec.param, v1)
                if axis2 is not None:
                    sc = with_param(sc, spec.param2, axis2[j])
                res = find_fopt_numeric(sc, clamp=spec.clamp, include_back=include_back)
            except ModelError:
                continue
            f_opt[i, j] = res.f_opt
            e_min[i, j] = res.e_min
            status[i, j] = res.status
            ratio[i, j] = _ratio(sc, res.f_opt)
    return SweepGrid(spec.param, axis, spec.param2, axis2, f_opt, status, e_min, ratio)


@dataclass(frozen=True)
class SpreadReport:
    axis_name: str          # the axis the spread is taken across
    other_name: Optional[str]
    other_values: np.ndarray
    spreads: np.ndarray     # GHz, one per point of the other axis
    mean_spread: float


def spread_report(grid: SweepGrid, axis: Union[int, str] = 1) -> SpreadReport:
    """``max - min`` of f_opt across one axis, per point of the other axis."""
    if isinstance(axis, str):
        if axis == grid.param:
            axis = 0
        elif axis == grid.param2:
            axis = 1
        else:
            raise ValidationError(f"grid has no axis {axis!r}")
    if axis not in (0, 1):
        raise ValidationError("axis must be 0 or 1")
    if grid.f_opt.shape[axis] < 2:
        raise ValidationError("spread needs at least 2 values on the chosen axis")
    data = grid.f_opt if axis == 1 else grid.f_opt.T
    if np.any(np.all(np.isnan(data), axis=1)):
        raise ValidationError("spread undefined: a row consists only of gaps")
    spreads = np.nanmax(data, axis=1) - np.nanmin(data, axis=1)
    names = (grid.param, grid.param2)
    other_values = grid.axis if axis == 1 else grid.axis2
    return SpreadReport(
        axis_name=names[axis],
        other_name=names[1 - axis],
        other_values=np.asarray(other_values if other_values is not None else [np.nan]),
        spreads=spreads,
        mean_spread=float(np.mean(spreads)),
    )


@dataclass(frozen=True)
class PowerRatioCurve:
    p_back: np.ndarray
    f_opt: np.ndarray
    p_cpu: np.ndarray
    ratio: np.ndarray   # P_cpu(f_opt) / P_back, inf where P_back == 0


def power_ratio_at_fopt(base: Scenario, p_back_values: Sequence[float]) -> PowerRatioCurve:
    values = np.asarray(p_back_values, dtype=float)
    if values.size == 0 or np.any(values < 0):
        raise ValidationError("p_back values must be a non-empty set of values >= 0")
    f_opt = np.empty_like(values)
    p_cpu = np.empty_like(values)
    ratio = np.empty_like(values)
    for i, pb in enumerate(values):
        sc = with_param(base, "p_back", pb)
        f = find_fopt_numeric(sc, clamp=False).f_opt
        f_opt[i] = f
        p_cpu[i] = cpu_power(sc.cpu, sc.vmap, f)
        ratio[i] = np.inf if pb == 0 else p_cpu[i] / pb
    return PowerRatioCurve(values, f_opt, p_cpu, ratio)


def find_crossing(base: Scenario, param: str, target: float, lo: float, hi: float, xtol: float = 1e-9) -> float:
    """Parameter value where the unclamped optimum equals ``target`` GHz.

    The optimum must be monotone in ``param`` on ``[lo, hi]`` and bracket the
    target.
    """
    def gap(v):
        return find_fopt_numeric(with_param(base, param, v), clamp=False).f_opt - target

    g_lo, g_hi = gap(lo), gap(hi)
    if g_lo * g_hi > 0:
        raise ValidationError(
            f"f_opt does not cross {target} GHz for {param} in [{lo}, {hi}]"
        )
    return float(brentq(gap, lo, hi, xtol=xtol))
