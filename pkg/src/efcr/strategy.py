"""Regime classification and DVFS strategy energy comparison."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Dict

from .model import Scenario, system_energy
from .solver import TOL_GHZ, FoptStatus, find_fopt_numeric


class RegimeKind(str, enum.Enum):
    BELOW_WINDOW = "below_window"
    EXPLOITABLE = "exploitable"
    ABOVE_WINDOW = "above_window"


class Action(str, enum.Enum):
    RUN_AT_MIN = "run_at_min"
    CHASE_FOPT = "chase_fopt"
    RACE_TO_HALT = "race_to_halt"


ACTIONS = {
    RegimeKind.BELOW_WINDOW: Action.RUN_AT_MIN,
    RegimeKind.EXPLOITABLE: Action.CHASE_FOPT,
    RegimeKind.ABOVE_WINDOW: Action.RACE_TO_HALT,
}


@dataclass(frozen=True)
class Regime:
    kind: RegimeKind
    action: Action
    f_opt: float   # unclamped


def classify(s: Scenario, include_back: bool = True) -> Regime:
    f = find_fopt_numeric(s, clamp=False, include_back=include_back).f_opt
    lo, hi = s.exploitable
    if f < lo - TOL_GHZ:
        kind = RegimeKind.BELOW_WINDOW
    elif f > hi + TOL_GHZ:
        kind = RegimeKind.ABOVE_WINDOW
    else:
        kind = RegimeKind.EXPLOITABLE
    return Regime(kind, ACTIONS[kind], f)


@dataclass(frozen=True)
class StrategyCost:
    energy: Dict[Action, float]     # joules of the busy phase
    frequency: Dict[Action, float]  # GHz each strategy runs at
    best: Action
    savings_pct: Dict[Action, float]  # saving of ``best`` relative to each option


def strategy_cost(s: Scenario, include_back: bool = True) -> StrategyCost:
    """Busy-phase energy at the window floor, the clamped optimum and f_max.

    Race-to-halt is scored by its busy phase only: after halting only
    background power remains, which is the same for every strategy.
    When ``f_k >= f_min`` the floor is the pole and its energy is infinite.
    """
    lo, hi = s.exploitable
    opt = find_fopt_numeric(s, clamp=True, include_back=include_back)
    freq = {Action.RUN_AT_MIN: lo, Action.CHASE_FOPT: opt.f_opt, Action.RACE_TO_HALT: hi}
    energy = {
        Action.RUN_AT_MIN: float("inf") if s.lower_is_open else float(system_energy(s, lo)),
        Action.CHASE_FOPT: float(system_energy(s, opt.f_opt)),
        Action.RACE_TO_HALT: float(system_energy(s, hi)),
    }
    if opt.status is FoptStatus.AT_LOWER_BOUND:
        best = Action.RUN_AT_MIN
    elif opt.status is FoptStatus.AT_UPPER_BOUND:
        best = Action.RACE_TO_HALT
    else:
        best = min(energy, key=energy.get)
    e_best = energy[best]
    savings = {
        a: (100.0 * (e - e_best) / e if e != float("inf") else 100.0)
        for a, e in energy.items()
    }
    return StrategyCost(energy, freq, best, savings)
