"""Decay-rate fits and Gronwall bound checks on energy traces."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientSamplesError, InvalidParameterError
from .wavesim import EnergyTrace

# samples at or below this energy are left out of log fits
ENERGY_FLOOR = 1e-30
MIN_FIT_SAMPLES = 10
DEFAULT_FIT_T_LO = 1.0


class Verdict(str, enum.Enum):
    DECAY_CERTIFIED = "decay_certified"
    BOUND_VIOLATED = "bound_violated"
    GROWTH_DETECTED = "growth_detected"


@dataclass(frozen=True)
class DecayReport:
    alpha_star: float
    fitted_slope: float | None
    fitted_rate: float | None
    bound_satisfied: bool
    max_bound_ratio: float
    fit_window: tuple[float, float]
    verdict: Verdict
    tol: float

    def to_dict(self) -> dict:
        return {
            "alpha_star": self.alpha_star,
            "fitted_slope": self.fitted_slope,
            "fitted_rate": self.fitted_rate,
            "bound_satisfied": self.bound_satisfied,
            "max_bound_ratio": self.max_bound_ratio if math.isfinite(self.max_bound_ratio) else None,
            "fit_window": list(self.fit_window),
            "verdict": self.verdict.value,
            "tolerance": self.tol,
        }


def _window(trace: EnergyTrace, window: tuple[float, float] | None) -> tuple[float, float]:
    if window is None:
        t_end = float(trace.t[-1])
        return (DEFAULT_FIT_T_LO if DEFAULT_FIT_T_LO < t_end else 0.0, t_end)
    lo, hi = window
    if hi <= lo:
        raise InvalidParameterError(f"empty fit window {window!r}")
    return (float(lo), float(hi))


def fit_log_slope(trace: EnergyTrace, window: tuple[float, float] | None = None) -> float:
    """Least-squares slope of log E_total against t inside the window."""
    lo, hi = _window(trace, window)
    t = np.asarray(trace.t)
    e = np.asarray(trace.energy_total)
    keep = (t >= lo) & (t <= hi) & (e > ENERGY_FLOOR)
    if int(keep.sum()) < MIN_FIT_SAMPLES:
        raise InsufficientSamplesError(
            f"{int(keep.sum())} usable samples in [{lo}, {hi}], need {MIN_FIT_SAMPLES}"
        )
    slope, _ = np.polyfit(t[keep], np.log(e[keep]), 1)
    return float(slope)


def fit_decay_rate(trace: EnergyTrace, window: tuple[float, float] | None = None) -> float:
    """Rate ρ = -slope/2, on the same scale as α* (E ~ exp(-2ρt))."""
    return -0.5 * fit_log_slope(trace, window)


def bound_ratios(trace: EnergyTrace, alpha_star: float) -> np.ndarray:
    """E(t) / (E(0) exp(-2 α* t)) per sample; 0/0 counts as 0."""
    t = np.asarray(trace.t)
    e = np.asarray(trace.energy_total)
    e0 = e[0]
    if e0 > 0:
        return e / (e0 * np.exp(-2.0 * alpha_star * t))
    return np.where(e > 0, np.inf, 0.0)


def check_bound(trace: EnergyTrace, alpha_star: float, tol: float = 0.02,
                window: tuple[float, float] | None = None) -> DecayReport:
    """Compare a trace with E(0) exp(-2 α* t) (1 + tol) and classify it.

    A slope is fitted when the window holds enough samples; otherwise the
    fitted fields are None.
    """
    if len(trace) == 0:
        raise InvalidParameterError("empty energy trace")
    if alpha_star < 0 or tol < 0:
        raise InvalidParameterError("alpha_star and tol must be nonnegative")
    if trace.t[0] != 0.0:
        raise InvalidParameterError("trace must start at t = 0")

    ratio = float(np.max(bound_ratios(trace, alpha_star)))
    satisfied = ratio <= 1.0 + tol
    if satisfied:
        verdict = Verdict.DECAY_CERTIFIED
    elif trace.energy_total[-1] > trace.energy_total[0]:
        verdict = Verdict.GROWTH_DETECTED
    else:
        verdict = Verdict.BOUND_VIOLATED

    win = _window(trace, window)
    try:
        slope = fit_log_slope(trace, win)
    except InsufficientSamplesError:
        slope = None
    return DecayReport(
        alpha_star=float(alpha_star),
        fitted_slope=slope,
        fitted_rate=None if slope is None else -0.5 * slope,
        bound_satisfied=satisfied,
        max_bound_ratio=ratio,
        fit_window=win,
        verdict=verdict,
        tol=float(tol),
    )
