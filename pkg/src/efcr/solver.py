"""Energy-optimal frequency: numeric search and closed-form solutions."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .cubic import cubic_roots
from .errors import ApproximationError, NoInteriorOptimumError, ValidationError
from .model import (
    AffineMap,
    ExecTimeParams,
    FrequencyWindow,
    QuarticCoeffs,
    Scenario,
    TableMap,
    energy_derivatives,
    normalized_energy,
    quartic_coeffs,
)

TOL_GHZ = 1e-6
SCAN_POINTS = 512
UNCLAMPED_CAP_GHZ = 64.0
QUAD_FIT_POINTS = 101
POLE_OFFSET = 1e-9

PHI = (math.sqrt(5.0) - 1.0) / 2.0


class FoptStatus(str, enum.Enum):
    INTERIOR = "interior"
    AT_LOWER_BOUND = "at_lower_bound"
    AT_UPPER_BOUND = "at_upper_bound"
    UNCLAMPED = "unclamped"


class Method(str, enum.Enum):
    NUMERIC = "numeric"
    CUBIC = "cubic"
    BETA_ZERO = "beta_zero"
    FK_ZERO = "fk_zero"


@dataclass(frozen=True)
class FoptResult:
    f_opt: float
    status: FoptStatus
    e_min: float
    method: Method


@dataclass(frozen=True)
class QuadApprox:
    """Quadratic stand-in ``k f^2 + l f + m`` for the quartic CPU power."""

    k: float
    l: float
    m: float

    def __post_init__(self):
        if not self.k > 0:
            raise ApproximationError(f"quadratic approximation needs k > 0 (got {self.k})")

    def __call__(self, f):
        f = np.asarray(f, dtype=float)
        out = (self.k * f + self.l) * f + self.m
        return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# 1-D minimization
# ---------------------------------------------------------------------------

def golden_section(fn: Callable[[float], float], lo: float, hi: float, tol: float = TOL_GHZ):
    """Shrink ``[lo, hi]`` around a minimum of a unimodal ``fn`` to width ``tol``."""
    x1 = hi - PHI * (hi - lo)
    x2 = lo + PHI * (hi - lo)
    f1, f2 = fn(x1), fn(x2)
    while hi - lo > tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - PHI * (hi - lo)
            f1 = fn(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + PHI * (hi - lo)
            f2 = fn(x2)
    return (x1, f1) if f1 <= f2 else (x2, f2)


def minimize_on_interval(
    fn: Callable,
    lo: float,
    hi: float,
    tol: float = TOL_GHZ,
    n_scan: int = SCAN_POINTS,
    derivs: Optional[Callable] = None,
):
    """Minimize ``fn`` on ``[lo, hi]``: coarse scan, golden-section, Newton polish.

    ``fn`` must accept numpy arrays.  ``derivs(x)`` returning ``(d1, d2)``
    enables the Newton polish that drives the gradient to round-off level.
    Returns ``(x, fn(x))``.
    """
    grid = np.linspace(lo, hi, n_scan)
    values = fn(grid)
    i = int(np.nanargmin(values))
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, n_scan - 1)]
    x, fx = golden_section(lambda t: float(fn(t)), a, b, tol)
    if derivs is not None:
        for _ in range(30):
            d1, d2 = derivs(x)
            if not d2 > 0:
                break
            x_new = x - d1 / d2
            if not a <= x_new <= b:
                break
            f_new = float(fn(x_new))
            if f_new > fx * (1 + 1e-13) + 1e-300:
                break
            done = abs(x_new - x) <= 1e-15 * max(1.0, abs(x))
            x, fx = x_new, f_new
            if done:
                break
    # the optimum may sit on an end of the interval
    for edge, fe in ((lo, float(values[0])), (hi, float(values[-1]))):
        if fe < fx:
            x, fx = edge, fe
    return x, fx


# ---------------------------------------------------------------------------
# Full-model numeric solver
# ---------------------------------------------------------------------------

def search_domain(s: Scenario, clamp: bool):
    """Frequency interval searched by :func:`find_fopt_numeric`."""
    fk = s.time.f_k
    if clamp:
        lo, hi = s.exploitable
        if s.lower_is_open:
            lo = fk + POLE_OFFSET * max(1.0, fk) + 1e-9 * (hi - fk)
        return lo, hi
    lo = fk + POLE_OFFSET * max(1.0, fk)
    hi = UNCLAMPED_CAP_GHZ
    limit = s.time.positive_time_limit()
    if math.isfinite(limit):
        hi = min(hi, limit - 1e-9 * max(1.0, limit))
    if isinstance(s.vmap, TableMap):
        t_lo, t_hi = s.vmap.span
        lo, hi = max(lo, t_lo), min(hi, t_hi)
    if not hi > lo:
        raise ValidationError("empty search domain for f_opt")
    return lo, hi


def _first_local_min_bracket(fn, lo, hi, n=4 * SCAN_POINTS):
    """Bracket around the first interior local minimum of a scan, else ``(lo, hi)``."""
    grid = np.linspace(lo, hi, n)
    v = fn(grid)
    inner = np.flatnonzero((v[1:-1] <= v[:-2]) & (v[1:-1] < v[2:])) + 1
    if inner.size == 0:
        return lo, hi
    i = int(inner[0])
    return float(grid[i - 1]), float(grid[i + 1])


def find_fopt_numeric(
    s: Scenario, clamp: bool = True, include_back: bool = True, tol: float = TOL_GHZ
) -> FoptResult:
    """Minimize normalized energy over frequency.

    With ``clamp`` the search covers the exploitable window and the status
    tells whether the optimum is interior or pinned to a bound.  Without it the
    search runs from just above ``f_k`` to 64 GHz so exterior optima show up.
    With ``beta < 0`` the unclamped energy falls to zero at the positive-time
    limit; the first local minimum is returned instead when one exists.
    """
    lo, hi = search_domain(s, clamp)
    if not hi > lo:
        raise ValidationError("exploitable window is empty")

    def fn(f):
        return normalized_energy(s, f, include_back)

    if not clamp and s.time.beta < 0:
        lo, hi = _first_local_min_bracket(fn, lo, hi)

    derivs = None
    if isinstance(s.vmap, AffineMap):
        def derivs(f):
            return energy_derivatives(s, f, include_back)

    x, fx = minimize_on_interval(fn, lo, hi, tol=tol, derivs=derivs)
    if not clamp:
        status = FoptStatus.UNCLAMPED
    elif x <= lo + tol and (derivs is None or derivs(lo)[0] >= 0 or x == lo):
        status = FoptStatus.AT_LOWER_BOUND
        x, fx = lo, float(fn(lo))
    elif x >= hi - tol and (derivs is None or derivs(hi)[0] <= 0 or x == hi):
        status = FoptStatus.AT_UPPER_BOUND
        x, fx = hi, float(fn(hi))
    else:
        status = FoptStatus.INTERIOR
    return FoptResult(f_opt=float(x), status=status, e_min=float(fx), method=Method.NUMERIC)


# ---------------------------------------------------------------------------
# Quadratic approximation and closed forms
# ---------------------------------------------------------------------------

def quad_from_quartic(q: QuarticCoeffs, window: FrequencyWindow, n: int = QUAD_FIT_POINTS) -> QuadApprox:
    f = np.linspace(window.f_min, window.f_max, n)
    y = q(f)
    # relative residuals: power spans a decade over the window
    w = 1.0 / y
    design = np.column_stack([f * f, f, np.ones_like(f)]) * w[:, None]
    (k, l, m), *_ = np.linalg.lstsq(design, y * w, rcond=None)
    return QuadApprox(float(k), float(l), float(m))


def fit_quad_approx(s: Scenario, n: int = QUAD_FIT_POINTS) -> QuadApprox:
    """Relative least-squares quadratic fit of the CPU power over the default window."""
    return quad_from_quartic(quartic_coeffs(s.cpu, s.vmap), s.window, n)


def quad_max_relative_error(q: QuarticCoeffs, quad: QuadApprox, window: FrequencyWindow, n: int = 1001) -> float:
    f = np.linspace(window.f_min, window.f_max, n)
    exact = q(f)
    return float(np.max(np.abs(quad(f) - exact) / np.abs(exact)))


def approx_energy(quad: QuadApprox, time: ExecTimeParams, p_static: float, f):
    """Normalized energy with the quadratic power stand-in."""
    return (quad(f) + p_static) * time.per_cycle(f)


def approx_derivatives(quad: QuadApprox, time: ExecTimeParams, p_static: float, f):
    f = np.asarray(f, dtype=float)
    k, l, m = quad.k, quad.l, quad.m
    fk, beta = time.f_k, time.beta
    u = f - fk
    d1 = beta * (2 * k * f + l) - (fk * (2 * k * f + l) - k * f * f + m + p_static) / u ** 2
    d2 = 2 * k * beta + 2 * (fk * fk * k + fk * l + m + p_static) / u ** 3
    if d1.ndim == 0:
        return float(d1), float(d2)
    return d1, d2


def stationarity_cubic(quad: QuadApprox, time: ExecTimeParams, p_static: float):
    """Coefficients ``(c3, c2, c1, c0)`` whose roots are the stationary points."""
    k, l, m = quad.k, quad.l, quad.m
    fk, beta = time.f_k, time.beta
    c3 = 2 * k * beta
    c2 = k + beta * (l - 4 * fk * k)
    # two printed f-terms merged: 2 fk beta (fk k - l) f - 2 fk k f
    c1 = 2 * fk * beta * (fk * k - l) - 2 * fk * k
    c0 = -(m + p_static + fk * l * (1 - beta * fk))
    return c3, c2, c1, c0


def fopt_beta_zero(quad: QuadApprox, f_k: float, p_static: float) -> float:
    """Stationary point of ``(k f^2 + l f + m + P)/(f - f_k)``."""
    k = quad.k
    radicand = k * k * f_k * f_k + k * (quad.m + p_static + f_k * quad.l)
    if radicand < 0:
        raise NoInteriorOptimumError("negative radicand: no interior optimum")
    return f_k + math.sqrt(radicand) / k


def fopt_fk_zero(quad: QuadApprox, p_static: float) -> float:
    ratio = (quad.m + p_static) / quad.k
    if not ratio > 0:
        raise NoInteriorOptimumError("m + P must be positive for an interior optimum")
    return math.sqrt(ratio)


def find_fopt_cubic(
    quad: QuadApprox, time: ExecTimeParams, p_drop: float, p_back: float, include_back: bool = True
) -> FoptResult:
    """Optimal frequency of the quadratic-power objective in closed form."""
    P = p_drop + (p_back if include_back else 0.0)
    fk, beta = time.f_k, time.beta

    def result(f, method):
        return FoptResult(f_opt=f, status=FoptStatus.UNCLAMPED,
                          e_min=float(approx_energy(quad, time, P, f)), method=method)

    if beta < 0:
        lo = fk + POLE_OFFSET * max(1.0, fk)
        limit = time.positive_time_limit()
        hi = min(UNCLAMPED_CAP_GHZ, limit - 1e-9 * max(1.0, limit))
        x, _ = minimize_on_interval(
            lambda f: approx_energy(quad, time, P, f), lo, hi,
            derivs=lambda f: approx_derivatives(quad, time, P, f),
        )
        return result(float(x), Method.NUMERIC)
    if beta == 0:
        if fk == 0:
            return result(fopt_fk_zero(quad, P), Method.FK_ZERO)
        f = fopt_beta_zero(quad, fk, P)
        if not approx_derivatives(quad, time, P, f)[1] >= 0:
            raise NoInteriorOptimumError("stationary point is not a minimum")
        return result(f, Method.BETA_ZERO)

    candidates = []
    for r in cubic_roots(*stationarity_cubic(quad, time, P)):
        if r <= fk:
            continue
        if approx_derivatives(quad, time, P, r)[1] < 0:
            continue
        candidates.append((float(approx_energy(quad, time, P, r)), r))
    if not candidates:
        raise NoInteriorOptimumError("no admissible real root above f_k")
    return result(min(candidates)[1], Method.CUBIC)


# ---------------------------------------------------------------------------
# Convexity diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConvexityReport:
    min_second_derivative: float
    nonpositive_points: int
    chord_tests: int
    chord_violations: int
    # only for f_k ~ 0: the closed-form second-order condition for that case
    fk_zero_condition_min: Optional[float] = None
    fk_zero_coeffs_nonnegative: Optional[bool] = None
    fk_zero_identity_error: Optional[float] = None

    @property
    def convex(self) -> bool:
        return self.nonpositive_points == 0 and self.chord_violations == 0


def _grid(lo, hi, open_lower, n):
    g = np.linspace(lo, hi, n)
    if open_lower:
        g[0] = lo + (hi - lo) / (2.0 * n)
    return g


def _chord_violations(fn, lo, hi, n, seed):
    rng = np.random.default_rng(seed)
    f1 = rng.uniform(lo, hi, n)
    f2 = rng.uniform(lo, hi, n)
    t = rng.uniform(0.0, 1.0, n)
    keep = (f1 != f2) & (t > 0)
    f1, f2, t = f1[keep], f2[keep], t[keep]
    lhs = fn(t * f1 + (1 - t) * f2)
    rhs = t * fn(f1) + (1 - t) * fn(f2)
    return int(np.count_nonzero(lhs - rhs > 1e-12 * np.abs(rhs)))


def _fd_second(fn, g):
    h = 1e-4 * max(1.0, float(np.max(np.abs(g))))
    return (fn(g + h) - 2 * fn(g) + fn(g - h)) / (h * h)


def check_convexity(
    s: Scenario, n_grid: int = 1024, n_chords: int = 1000, include_back: bool = True, seed: int = 0
) -> ConvexityReport:
    """Sample the second derivative and run random chord tests on the window."""
    lo, hi = s.exploitable
    open_lower = s.lower_is_open
    g = _grid(lo, hi, open_lower, n_grid)

    def fn(f):
        return normalized_energy(s, f, include_back)

    if isinstance(s.vmap, AffineMap):
        d2 = energy_derivatives(s, g, include_back)[1]
    else:
        # keep the stencil inside the tabulated domain
        inner = g[(g - 1e-4 > max(lo, s.time.f_k)) & (g + 1e-4 < hi)]
        d2 = _fd_second(fn, inner)
    chord_lo = g[0]
    violations = _chord_violations(fn, chord_lo, hi, n_chords, seed)

    cond_min = coeffs_ok = ident = None
    if isinstance(s.vmap, AffineMap) and s.time.f_k <= 1e-9:
        q = quartic_coeffs(s.cpu, s.vmap)
        a, b, c, d = q.a, q.b, q.c, q.d
        beta = s.time.beta
        P = s.static_power.total(include_back)
        cond = 12 * a * beta * g ** 2 + 6 * (a + b * beta) * g + 2 * (b + c * beta) + 2 * P / g ** 3
        cond_min = float(np.min(cond))
        coeffs_ok = all(x >= 0 for x in (a, b, c, d, beta, P))
        if s.time.f_k == 0:
            ident = float(np.max(np.abs(cond - d2) / np.abs(d2)))
    return ConvexityReport(
        min_second_derivative=float(np.min(d2)),
        nonpositive_points=int(np.count_nonzero(d2 <= 0)),
        chord_tests=n_chords,
        chord_violations=violations,
        fk_zero_condition_min=cond_min,
        fk_zero_coeffs_nonnegative=coeffs_ok,
        fk_zero_identity_error=ident,
    )


def check_convexity_approx(
    quad: QuadApprox,
    time: ExecTimeParams,
    p_static: float,
    window: FrequencyWindow,
    n_grid: int = 1024,
    n_chords: int = 1000,
    seed: int = 0,
) -> ConvexityReport:
    """Same diagnostics for the quadratic-power objective."""
    lo, hi = max(window.f_min, time.f_k), window.f_max
    g = _grid(lo, hi, time.f_k >= window.f_min, n_grid)
    d2 = approx_derivatives(quad, time, p_static, g)[1]
    violations = _chord_violations(
        lambda f: approx_energy(quad, time, p_static, f), g[0], hi, n_chords, seed
    )
    return ConvexityReport(
        min_second_derivative=float(np.min(d2)),
        nonpositive_points=int(np.count_nonzero(d2 <= 0)),
        chord_tests=n_chords,
        chord_violations=violations,
    )


def snap_to_dvfs(s: Scenario, f_opt: float, nodes: Sequence[float], include_back: bool = True) -> float:
    """Map a continuous optimum onto the better of its two neighbouring DVFS nodes."""
    lo, hi = s.exploitable
    valid = sorted(
        f for f in nodes
        if (f > lo if s.lower_is_open else f >= lo) and f <= hi
    )
    if not valid:
        raise ValidationError("no DVFS node inside the exploitable window")
    below = [f for f in valid if f <= f_opt]
    above = [f for f in valid if f >= f_opt]
    neighbours = ([below[-1]] if below else []) + ([above[0]] if above else [])
    return min(neighbours, key=lambda f: normalized_energy(s, f, include_back))
