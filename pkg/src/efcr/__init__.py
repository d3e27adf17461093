"""Energy/frequency convexity toolkit: model, solvers, fitting and sweeps."""

__version__ = "0.1.0"

from .errors import (
    ApproximationError,
    FitError,
    ModelError,
    ModelViolationError,
    NoInteriorOptimumError,
    OutOfRangeError,
    SingularityError,
    UndefinedTimeError,
    UnsupportedMapError,
    ValidationError,
)
from .model import (
    TABLE1,
    AffineMap,
    CpuPowerParams,
    EnergyCurve,
    ExecTimeParams,
    FrequencyWindow,
    QuantaSequence,
    QuarticCoeffs,
    Scenario,
    StaticPower,
    TableMap,
    cpu_power,
    energy_curve,
    energy_derivatives,
    energy_split,
    exec_time,
    normalized_energy,
    quartic_coeffs,
    reference_scenario,
    sequence_energy,
    system_energy,
    table1_scenario,
    voltage_at,
)
from .solver import (
    FoptResult,
    FoptStatus,
    Method,
    QuadApprox,
    check_convexity,
    find_fopt_cubic,
    find_fopt_numeric,
    fit_quad_approx,
    fopt_beta_zero,
    snap_to_dvfs,
)
from .fitting import FitReport, TraceSample, fit_cpu_power, fit_exec_time, fit_voltage_map
from .sensitivity import SweepGrid, SweepSpec, power_ratio_at_fopt, spread_report, sweep
from .strategy import Action, Regime, RegimeKind, classify, strategy_cost
from .files import load_scenario, load_traces, save_scenario
