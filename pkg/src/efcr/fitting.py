"""Estimate model parameters from measured traces.

All estimators are deterministic: linear least squares, with a bounded 1-D
search for the single nonlinear parameter ``f_k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import FitError, ValidationError
from .model import AffineMap, CpuPowerParams, ExecTimeParams, FrequencyWindow, VoltageFreqMap
from .solver import minimize_on_interval

FK_SEARCH_FRACTION = 0.95


@dataclass(frozen=True)
class TraceSample:
    f: float
    value: float
    voltage: Optional[float] = None

    def __post_init__(self):
        if not self.f > 0:
            raise ValidationError(f"trace sample: frequency must be > 0 (got {self.f})")
        if not self.value > 0:
            raise ValidationError(f"trace sample: value must be > 0 (got {self.value})")
        if self.voltage is not None and not self.voltage > 0:
            raise ValidationError(f"trace sample: voltage must be > 0 (got {self.voltage})")


@dataclass
class FitReport:
    params: Dict[str, float]
    residuals: np.ndarray
    relative_errors: np.ndarray
    std_errors: Dict[str, float] = field(default_factory=dict)

    @property
    def n_samples(self) -> int:
        return len(self.residuals)

    @property
    def percentiles(self) -> Tuple[float, float, float]:
        """5th, 50th and 95th percentile of the relative errors."""
        p5, p50, p95 = np.percentile(self.relative_errors, [5, 50, 95])
        return float(p5), float(p50), float(p95)

    @property
    def rms(self) -> float:
        return float(np.sqrt(np.mean(self.residuals ** 2)))


def _report(params, observed, predicted, std_errors=None):
    resid = observed - predicted
    return FitReport(
        params=dict(params),
        residuals=resid,
        relative_errors=np.abs(resid) / np.abs(observed),
        std_errors=dict(std_errors or {}),
    )


def _check_spread(freqs, min_samples, min_distinct):
    if len(freqs) < min_samples:
        raise FitError(f"need at least {min_samples} samples (got {len(freqs)})")
    if len(np.unique(freqs)) < min_distinct:
        raise FitError(f"need at least {min_distinct} distinct frequencies")


def _check_window(freqs, window):
    if window is None:
        return
    if np.any(freqs < window.f_min) or np.any(freqs > window.f_max):
        raise ValidationError(
            f"trace frequencies must lie in the window [{window.f_min}, {window.f_max}]"
        )


def fit_voltage_map(points: Iterable[Union[Tuple[float, float], TraceSample]]):
    """Ordinary least-squares line ``V = m1 f + m2``.

    Returns ``(AffineMap, FitReport)``.  The report carries standard errors of
    both coefficients.
    """
    pts = [(p.f, p.value) if isinstance(p, TraceSample) else tuple(p) for p in points]
    f = np.array([p[0] for p in pts], dtype=float)
    v = np.array([p[1] for p in pts], dtype=float)
    if len(np.unique(f)) < 2:
        raise FitError("rank-deficient input: need at least 2 distinct frequencies")
    design = np.column_stack([f, np.ones_like(f)])
    coef, *_ = np.linalg.lstsq(design, v, rcond=None)
    m1, m2 = float(coef[0]), float(coef[1])
    estimate = {"m1": m1, "m2": m2}
    if m1 <= 0 or m2 <= 0:
        raise FitError(f"voltage fit gave non-positive coefficients {estimate}", estimate)
    predicted = design @ coef
    dof = len(f) - 2
    std = {}
    if dof > 0:
        sigma2 = float(np.sum((v - predicted) ** 2)) / dof
        cov = sigma2 * np.linalg.inv(design.T @ design)
        std = {"m1": float(np.sqrt(cov[0, 0])), "m2": float(np.sqrt(cov[1, 1]))}
    return AffineMap(m1, m2), _report(estimate, v, predicted, std)


def fit_cpu_power(
    samples: Sequence[TraceSample],
    window: Optional[FrequencyWindow] = None,
    vmap: Optional[VoltageFreqMap] = None,
):
    """Fit ``P = P_static + xi f V^2 + xi gamma f V^3`` to power samples.

    Voltages come from the samples, or from ``vmap`` for samples without one.
    A negative leakage coefficient is clamped to ``gamma = 0`` and the
    remaining two parameters are refit.  Returns
    ``(CpuPowerParams, p_static, FitReport)``.
    """
    f = np.array([s.f for s in samples], dtype=float)
    p = np.array([s.value for s in samples], dtype=float)
    _check_spread(f, 4, 3)
    _check_window(f, window)
    volts = []
    for s in samples:
        if s.voltage is not None:
            volts.append(s.voltage)
        elif vmap is not None:
            volts.append(vmap.voltage(s.f))
        else:
            raise FitError(f"sample at {s.f} GHz has no voltage and no voltage map was given")
    v = np.array(volts, dtype=float)

    dyn = f * v ** 2
    leak = f * v ** 3
    design = np.column_stack([np.ones_like(f), dyn, leak])
    if np.linalg.matrix_rank(design) < 3:
        raise FitError("rank-deficient power design matrix")
    (p_static, theta1, theta2), *_ = np.linalg.lstsq(design, p, rcond=None)
    if theta2 < 0:
        design = design[:, :2]
        (p_static, theta1), *_ = np.linalg.lstsq(design, p, rcond=None)
        theta2 = 0.0
    if theta1 <= 0:
        raise FitError(f"power fit gave xi = {theta1:.6g} <= 0", {"xi": float(theta1)})
    xi = float(theta1)
    gamma = float(theta2) / xi
    predicted = p_static + xi * dyn + xi * gamma * leak
    params = {"xi": xi, "gamma": gamma, "p_static": float(p_static)}
    return CpuPowerParams(xi, gamma), float(p_static), _report(params, p, predicted)


def _time_linear_fit(f, t, f_k):
    # relative residuals: divide every row by the observation
    x = 1.0 / (f - f_k)
    design = np.column_stack([x, np.ones_like(x)]) / t[:, None]
    coef, *_ = np.linalg.lstsq(design, np.ones_like(t), rcond=None)
    rss = float(np.sum((design @ coef - 1.0) ** 2))
    return coef, rss


def fit_exec_time(samples: Sequence[TraceSample], window: Optional[FrequencyWindow] = None):
    """Fit ``dt = cc_b (1/(f - f_k) + beta)`` to execution-time samples.

    For a fixed ``f_k`` the model is linear in ``(cc_b, cc_b*beta)``; ``f_k``
    itself is found by a bounded search over ``[0, 0.95 min f]``.  Relative
    residuals are minimized.  Returns ``(ExecTimeParams, FitReport)``.
    """
    f = np.array([s.f for s in samples], dtype=float)
    t = np.array([s.value for s in samples], dtype=float)
    _check_spread(f, 4, 3)
    _check_window(f, window)
    if np.min(f) <= 0:
        raise FitError("frequencies must be positive")

    hi = FK_SEARCH_FRACTION * float(np.min(f))

    def rss(fk):
        fk = np.atleast_1d(fk)
        out = np.array([_time_linear_fit(f, t, x)[1] for x in fk])
        return out if out.size > 1 else out[0]

    f_k, _ = minimize_on_interval(rss, 0.0, hi, tol=1e-12, n_scan=128)
    (cc_b, slack), _ = _time_linear_fit(f, t, f_k)
    if not cc_b > 0:
        raise FitError(f"degenerate time fit: cc_b = {cc_b:.6g} <= 0", {"cc_b": float(cc_b)})
    beta = float(slack / cc_b)
    params = ExecTimeParams(float(cc_b), float(f_k), beta)
    predicted = cc_b * (1.0 / (f - f_k) + beta)
    report = _report({"cc_b": float(cc_b), "f_k": float(f_k), "beta": beta}, t, predicted)
    return params, report
