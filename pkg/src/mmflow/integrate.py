"""Dormand-Prince 5(4) integrator with an energy-monotonicity guard.

Small dense systems only: the state is a 1-D numpy array (real or complex)
and every step costs six right-hand-side evaluations (first-same-as-last).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import StepUnderflow

MIN_STEP = 1e-14

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


@dataclass
class StepStats:
    accepted: int = 0
    rejected_error: int = 0
    rejected_energy: int = 0
    max_energy_increase: float = -np.inf


def dormand_prince(
    rhs: Callable[[np.ndarray], np.ndarray],
    y0: np.ndarray,
    t_end: float,
    *,
    h0: float,
    h_max: float,
    tol: float,
    energy: Callable[[np.ndarray], float] | None = None,
    energy_slack: float = 0.0,
    stop: Callable[[np.ndarray, np.ndarray], bool] | None = None,
    on_accept: Callable[[float, np.ndarray, float, float, np.ndarray], None] | None = None,
    post_step: Callable[[np.ndarray], np.ndarray] | None = None,
) -> tuple[float, np.ndarray, StepStats, bool]:
    """Integrate the autonomous system ``y' = rhs(y)`` from ``t = 0``.

    A step is accepted when the embedded error estimate is at most
    ``tol * (1 + |y|)`` componentwise and, if ``energy`` is given, the energy
    does not rise by more than ``energy_slack``.  Rejected steps are halved.

    ``stop(y, f)`` is consulted after every accepted step with the derivative
    at the new point.  ``on_accept(t, y, energy, h, f)`` sees each accepted
    state.  ``post_step`` may project an accepted state back onto an invariant
    manifold; it must commute with the flow.

    Returns ``(t, y, stats, stopped)``.
    """
    stats = StepStats()
    y = np.array(y0, copy=True)
    t = 0.0
    f = rhs(y)
    e = energy(y) if energy is not None else 0.0
    if on_accept is not None:
        on_accept(t, y, e, 0.0, f)
    if stop is not None and stop(y, f):
        return t, y, stats, True
    h = min(h0, h_max, t_end)
    while t < t_end:
        # absorb a rounding-sized remainder into this step
        last = t_end - (t + h) <= 1e-9 * h
        if last:
            h = t_end - t
        k = [f]
        for s in range(1, 7):
            acc = y + h * sum(a * kk for a, kk in zip(_A[s], k) if a != 0.0)
            k.append(rhs(acc))
        y_new = acc
        f_new = k[6]
        err_vec = h * sum(c * kk for c, kk in zip(_E, k) if c != 0.0)
        scale = tol * (1.0 + np.maximum(np.abs(y), np.abs(y_new)))
        err = float(np.max(np.abs(err_vec) / scale)) if y.size else 0.0
        if not np.isfinite(err) or err > 1.0:
            stats.rejected_error += 1
            h *= 0.5
            if h < MIN_STEP:
                raise StepUnderflow(f"step size fell below {MIN_STEP} at t={t}")
            continue
        if post_step is not None:
            y_new = post_step(y_new)
            f_new = rhs(y_new)
        e_new = energy(y_new) if energy is not None else 0.0
        if energy is not None and e_new > e + energy_slack:
            stats.rejected_energy += 1
            h *= 0.5
            if h < MIN_STEP:
                raise StepUnderflow(f"step size fell below {MIN_STEP} at t={t}")
            continue
        stats.accepted += 1
        stats.max_energy_increase = max(stats.max_energy_increase, e_new - e)
        t = t_end if last else t + h
        y, f, e = y_new, f_new, e_new
        if on_accept is not None:
            on_accept(t, y, e, h, f)
        if stop is not None and stop(y, f):
            return t, y, stats, True
        grow = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
        h = min(h * grow, h_max)
    return t, y, stats, False
