"""System energy model: power, execution time, energy and its derivatives.

Canonical units: frequency in GHz, voltage in V, power in W, work ``cc_b`` in
giga-cycles and slack ``beta`` in ns per cycle.  With those units execution
time comes out in seconds and energy in joules.  Normalized energy is in
joules per giga-cycle.

Every evaluation function accepts a scalar or a numpy array of frequencies and
returns the same shape (a Python float for scalar input).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple, Union

import numpy as np

from .errors import (
    ModelViolationError,
    OutOfRangeError,
    SingularityError,
    UndefinedTimeError,
    UnsupportedMapError,
    ValidationError,
)

ArrayLike = Union[float, np.ndarray]


def _as_array(f):
    arr = np.asarray(f, dtype=float)
    return arr, arr.ndim == 0


def _out(arr, scalar):
    return float(arr) if scalar else arr


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AffineMap:
    """Voltage as an affine function of frequency, ``V = m1*f + m2``."""

    m1: float
    m2: float

    def __post_init__(self):
        if not self.m1 > 0:
            raise ValidationError(f"voltage_map.m1: must be > 0 (got {self.m1})")
        if not self.m2 > 0:
            raise ValidationError(f"voltage_map.m2: must be > 0 (got {self.m2})")

    def voltage(self, f: ArrayLike) -> ArrayLike:
        arr, scalar = _as_array(f)
        return _out(self.m1 * arr + self.m2, scalar)


@dataclass(frozen=True)
class TableMap:
    """Discrete DVFS operating points, linearly interpolated between nodes."""

    rows: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        rows = tuple((float(f), float(v)) for f, v in self.rows)
        object.__setattr__(self, "rows", rows)
        if len(rows) < 2:
            raise ValidationError("voltage_map.table: needs at least 2 rows")
        freqs = [r[0] for r in rows]
        volts = [r[1] for r in rows]
        if any(f <= 0 for f in freqs) or any(v <= 0 for v in volts):
            raise ValidationError("voltage_map.table: frequencies and voltages must be > 0")
        if any(b <= a for a, b in zip(freqs, freqs[1:])):
            raise ValidationError("voltage_map.table: frequencies must be strictly increasing")
        if any(b < a for a, b in zip(volts, volts[1:])):
            raise ValidationError("voltage_map.table: voltages must be non-decreasing")

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([r[0] for r in self.rows])

    @property
    def voltages(self) -> np.ndarray:
        return np.array([r[1] for r in self.rows])

    @property
    def span(self) -> Tuple[float, float]:
        return self.rows[0][0], self.rows[-1][0]

    def voltage(self, f: ArrayLike) -> ArrayLike:
        arr, scalar = _as_array(f)
        lo, hi = self.span
        # tolerate round-off at the end nodes
        eps = 1e-12 * max(1.0, hi)
        if np.any(arr < lo - eps) or np.any(arr > hi + eps):
            raise OutOfRangeError(
                f"frequency outside voltage table range [{lo}, {hi}] GHz"
            )
        return _out(np.interp(arr, self.frequencies, self.voltages), scalar)


VoltageFreqMap = Union[AffineMap, TableMap]


@dataclass(frozen=True)
class CpuPowerParams:
    xi: float
    gamma: float

    def __post_init__(self):
        if not self.xi > 0:
            raise ValidationError(f"cpu.xi: must be > 0 (got {self.xi})")
        if not self.gamma >= 0:
            raise ValidationError(f"cpu.gamma: must be >= 0 (got {self.gamma})")


@dataclass(frozen=True)
class QuarticCoeffs:
    """Coefficients of ``P_cpu(f) = a f^4 + b f^3 + c f^2 + d f``."""

    a: float
    b: float
    c: float
    d: float

    def __call__(self, f: ArrayLike) -> ArrayLike:
        arr, scalar = _as_array(f)
        return _out(((self.a * arr + self.b) * arr + self.c) * arr * arr + self.d * arr, scalar)

    def derivative(self, f: ArrayLike) -> ArrayLike:
        arr, scalar = _as_array(f)
        return _out(((4 * self.a * arr + 3 * self.b) * arr + 2 * self.c) * arr + self.d, scalar)

    def second_derivative(self, f: ArrayLike) -> ArrayLike:
        arr, scalar = _as_array(f)
        return _out((12 * self.a * arr + 6 * self.b) * arr + 2 * self.c, scalar)


@dataclass(frozen=True)
class ExecTimeParams:
    cc_b: float
    f_k: float
    beta: float

    def __post_init__(self):
        if not self.cc_b > 0:
            raise ValidationError(f"time.cc_b: must be > 0 (got {self.cc_b})")
        if not self.f_k >= 0:
            raise ValidationError(f"time.f_k: must be >= 0 (got {self.f_k})")
        if not np.isfinite(self.beta):
            raise ValidationError("time.beta: must be finite")

    def per_cycle(self, f: ArrayLike) -> ArrayLike:
        """Seconds per giga-cycle of user work, ``1/(f - f_k) + beta``."""
        arr, scalar = _as_array(f)
        if np.any(arr <= self.f_k):
            raise UndefinedTimeError(
                f"execution time undefined for f <= f_k = {self.f_k} GHz"
            )
        t = 1.0 / (arr - self.f_k) + self.beta
        if np.any(t <= 0):
            raise ModelViolationError(
                "per-cycle time 1/(f - f_k) + beta is not positive "
                f"(beta = {self.beta})"
            )
        return _out(t, scalar)

    def positive_time_limit(self) -> float:
        """Largest frequency with positive per-cycle time (inf when beta >= 0)."""
        if self.beta >= 0:
            return float("inf")
        return self.f_k - 1.0 / self.beta


@dataclass(frozen=True)
class StaticPower:
    p_drop: float = 0.0
    p_back: float = 0.0

    def __post_init__(self):
        if not self.p_drop >= 0:
            raise ValidationError(f"power.p_drop: must be >= 0 (got {self.p_drop})")
        if not self.p_back >= 0:
            raise ValidationError(f"power.p_back: must be >= 0 (got {self.p_back})")

    def total(self, include_back: bool = True) -> float:
        return self.p_drop + (self.p_back if include_back else 0.0)


@dataclass(frozen=True)
class FrequencyWindow:
    f_min: float
    f_max: float

    def __post_init__(self):
        if not self.f_min > 0:
            raise ValidationError(f"window.f_min: must be > 0 (got {self.f_min})")
        if not self.f_max > self.f_min:
            raise ValidationError(
                f"window.f_max: must be > f_min (got {self.f_max} <= {self.f_min})"
            )


@dataclass(frozen=True)
class Scenario:
    vmap: VoltageFreqMap
    cpu: CpuPowerParams
    time: ExecTimeParams
    static_power: StaticPower
    window: FrequencyWindow

    def __post_init__(self):
        w, t = self.window, self.time
        if not t.f_k < w.f_max:
            raise ValidationError(
                f"time.f_k: exploitable window empty (f_k = {t.f_k} >= f_max = {w.f_max})"
            )
        # per-cycle time is decreasing in f, so f_max is the binding point
        if 1.0 / (w.f_max - t.f_k) + t.beta <= 0:
            raise ValidationError(
                "time.beta: per-cycle time must be positive over the exploitable window "
                f"(1/(f_max - f_k) + beta = {1.0 / (w.f_max - t.f_k) + t.beta:.6g})"
            )
        if isinstance(self.vmap, TableMap):
            lo, hi = self.vmap.span
            if lo > w.f_min or hi < w.f_max:
                raise ValidationError(
                    "voltage_map.table: table must cover the frequency window "
                    f"[{w.f_min}, {w.f_max}] (covers [{lo}, {hi}])"
                )

    @property
    def exploitable(self) -> Tuple[float, float]:
        """Exploitable window ``[max(f_min, f_k), f_max]``.

        When ``f_k >= f_min`` the lower end is the pole itself and is open.
        """
        return max(self.window.f_min, self.time.f_k), self.window.f_max

    @property
    def lower_is_open(self) -> bool:
        return self.time.f_k >= self.window.f_min

    def quartic(self) -> QuarticCoeffs:
        return quartic_coeffs(self.cpu, self.vmap)


@dataclass(frozen=True)
class QuantaSequence:
    """Piecewise-constant execution: one (scenario, frequency) per time quantum."""

    quanta: Tuple[Tuple[Scenario, float], ...]

    def __post_init__(self):
        quanta = tuple((s, float(f)) for s, f in self.quanta)
        object.__setattr__(self, "quanta", quanta)
        if not quanta:
            raise ValidationError("quanta: sequence is empty")
        for i, (s, f) in enumerate(quanta):
            lo, hi = s.exploitable
            below = f <= lo if s.lower_is_open else f < lo
            if below or f > hi:
                raise ValidationError(
                    f"quanta[{i}]: frequency {f} GHz outside exploitable window [{lo}, {hi}]"
                )

    def __len__(self):
        return len(self.quanta)


@dataclass(frozen=True)
class EnergyCurve:
    f: np.ndarray
    p_cpu: np.ndarray
    p_sys: np.ndarray
    dt: np.ndarray
    e_sys: np.ndarray
    e_norm: np.ndarray

    COLUMNS = ("f_ghz", "p_cpu_w", "p_sys_w", "dt_s", "e_sys_j", "e_norm")

    def __post_init__(self):
        if np.any(np.diff(self.f) <= 0):
            raise ValidationError("energy curve: frequencies must be strictly increasing")
        if np.any(self.dt <= 0):
            raise ValidationError("energy curve: execution times must be positive")

    def __len__(self):
        return len(self.f)

    def rows(self):
        yield from zip(self.f, self.p_cpu, self.p_sys, self.dt, self.e_sys, self.e_norm)

    def argmin(self, column: str = "e_sys") -> float:
        return float(self.f[int(np.argmin(getattr(self, column)))])


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def voltage_at(vmap: VoltageFreqMap, f: ArrayLike) -> ArrayLike:
    arr, _ = _as_array(f)
    if np.any(arr <= 0):
        raise ValidationError("frequency must be > 0")
    return vmap.voltage(f)


def cpu_power(cpu: CpuPowerParams, vmap: VoltageFreqMap, f: ArrayLike) -> ArrayLike:
    """Dynamic plus leakage power ``(1 + gamma V) xi f V^2``."""
    v = voltage_at(vmap, f)
    return (1.0 + cpu.gamma * v) * cpu.xi * f * v * v


def quartic_coeffs(cpu: CpuPowerParams, vmap: VoltageFreqMap) -> QuarticCoeffs:
    if not isinstance(vmap, AffineMap):
        raise UnsupportedMapError("quartic power form exists only for affine voltage maps")
    xi, g, m1, m2 = cpu.xi, cpu.gamma, vmap.m1, vmap.m2
    return QuarticCoeffs(
        a=g * xi * m1 ** 3,
        b=m1 ** 2 * xi * (1 + 3 * g * m2),
        c=m1 * m2 * xi * (3 * g * m2 + 2),
        d=m2 ** 2 * xi * (g * m2 + 1),
    )


def exec_time(time: ExecTimeParams, f: ArrayLike) -> ArrayLike:
    return time.cc_b * time.per_cycle(f)


def system_power(s: Scenario, f: ArrayLike) -> ArrayLike:
    return cpu_power(s.cpu, s.vmap, f) + s.static_power.total(include_back=True)


def system_energy(s: Scenario, f: ArrayLike) -> ArrayLike:
    return system_power(s, f) * exec_time(s.time, f)


def normalized_energy(s: Scenario, f: ArrayLike, include_back: bool = True) -> ArrayLike:
    """Energy per giga-cycle of user work.

    ``include_back=False`` drops the background power term (energy minus
    ``P_back * dt``, divided by ``cc_b``).  The default keeps it, which is the
    objective the solvers minimize.
    """
    p = cpu_power(s.cpu, s.vmap, f) + s.static_power.total(include_back)
    return p * s.time.per_cycle(f)


def energy_split(s: Scenario, f: ArrayLike, include_back: bool = True):
    """Split normalized energy into its polynomial and pole parts ``(A, B)``."""
    q = quartic_coeffs(s.cpu, s.vmap)
    s.time.per_cycle(f)  # domain check
    poly = q(f) + s.static_power.total(include_back)
    return poly * s.time.beta, poly / (np.asarray(f, dtype=float) - s.time.f_k)


def energy_derivatives(s: Scenario, f: ArrayLike, include_back: bool = True):
    """First and second derivative of normalized energy w.r.t. frequency."""
    q = quartic_coeffs(s.cpu, s.vmap)
    arr, scalar = _as_array(f)
    fk, beta = s.time.f_k, s.time.beta
    if np.any(arr == fk):
        raise SingularityError(f"derivatives are singular at f = f_k = {fk} GHz")
    if np.any(arr < fk):
        raise UndefinedTimeError(f"execution time undefined for f < f_k = {fk} GHz")
    a, b, c, d = q.a, q.b, q.c, q.d
    P = s.static_power.total(include_back)
    x = arr
    u = x - fk
    d1_a = (((4 * a * x + 3 * b) * x + 2 * c) * x + d) * beta
    d1_b = (
        3 * a * x ** 4 + (2 * b - 4 * a * fk) * x ** 3 + (c - 3 * b * fk) * x ** 2
        - 2 * c * fk * x - P - d * fk
    ) / u ** 2
    d2_a = ((12 * a * x + 6 * b) * x + 2 * c) * beta
    d2_b = (
        6 * a * x ** 4 + (2 * b - 16 * a * fk) * x ** 3
        + (12 * a * fk ** 2 - 6 * b * fk) * x ** 2
        + 6 * b * fk ** 2 * x + 2 * (P + c * fk ** 2 + d * fk)
    ) / u ** 3
    return _out(d1_a + d1_b, scalar), _out(d2_a + d2_b, scalar)


def sequence_energy(quanta: Union[QuantaSequence, Iterable[Tuple[Scenario, float]]]):
    """Total energy and total time of a sequence of time quanta."""
    if not isinstance(quanta, QuantaSequence):
        quanta = QuantaSequence(tuple(quanta))
    energy = 0.0
    total_time = 0.0
    for i, (s, f) in enumerate(quanta.quanta):
        try:
            energy += system_energy(s, f)
            total_time += exec_time(s.time, f)
        except (UndefinedTimeError, ModelViolationError, OutOfRangeError) as exc:
            raise ValidationError(f"quanta[{i}]: {exc}") from exc
    return energy, total_time


def energy_curve(s: Scenario, freqs: Sequence[float], include_back: bool = True) -> EnergyCurve:
    f = np.asarray(freqs, dtype=float)
    p_cpu = cpu_power(s.cpu, s.vmap, f)
    p_sys = p_cpu + s.static_power.total(True)
    dt = exec_time(s.time, f)
    return EnergyCurve(
        f=f,
        p_cpu=p_cpu,
        p_sys=p_sys,
        dt=dt,
        e_sys=p_sys * dt,
        e_norm=normalized_energy(s, f, include_back),
    )


# ---------------------------------------------------------------------------
# Reference parameter sets
# ---------------------------------------------------------------------------

XI_MIN = 0.155
XI_MAX = 0.181

# Gold-Rader on a Cortex-A9, keyed by log2(input size).  ``p_sys`` is the
# fitted static system power; cc_b is in the table's native work unit.
TABLE1 = {
    6: dict(cc_b=1.943, f_k=0.134, beta=-0.166, xi=0.101, gamma=5.578, p_sys=0.480),
    8: dict(cc_b=8.596, f_k=0.129, beta=-0.167, xi=0.108, gamma=5.127, p_sys=0.480),
    10: dict(cc_b=31.1, f_k=0.137, beta=-0.152, xi=0.134, gamma=4.030, p_sys=0.477),
    12: dict(cc_b=144.359, f_k=0.13, beta=-0.202, xi=0.137, gamma=4.36, p_sys=0.469),
    14: dict(cc_b=670.8, f_k=0.13, beta=-0.183, xi=0.44, gamma=1.035, p_sys=0.394),
    16: dict(cc_b=2918.837, f_k=0.129, beta=-0.182, xi=0.011, gamma=65.985, p_sys=0.407),
}


def reference_scenario(
    xi: float = XI_MAX,
    f_k: float = 0.13,
    p_back: float = 0.5,
    beta: float = 0.0,
    p_drop: float = 0.0,
    cc_b: float = 1.0,
    gamma: float = 3.137,
    m1: float = 0.330,
    m2: float = 0.808,
    f_min: float = 0.2,
    f_max: float = 1.6,
) -> Scenario:
    """Cortex-A9 reference use case used throughout the sensitivity study."""
    return Scenario(
        vmap=AffineMap(m1, m2),
        cpu=CpuPowerParams(xi, gamma),
        time=ExecTimeParams(cc_b, f_k, beta),
        static_power=StaticPower(p_drop, p_back),
        window=FrequencyWindow(f_min, f_max),
    )


def table1_scenario(n: int) -> Scenario:
    """Scenario from a fitted bit-reversal benchmark row, static power counted as background."""
    row = TABLE1[n]
    return reference_scenario(
        xi=row["xi"],
        gamma=row["gamma"],
        f_k=row["f_k"],
        beta=row["beta"],
        cc_b=row["cc_b"],
        p_back=row["p_sys"],
    )
