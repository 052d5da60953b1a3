"""Embedded Cash-Karp 4(5) Runge-Kutta step with adaptive stepsize.

The fifth-order solution is propagated (local extrapolation) and the
difference to the embedded fourth-order solution is the error estimate.
The step controller is memoryless, so the current stepsize is the complete
controller state; this keeps interrupted and resumed runs identical.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

C = (0.0, 1 / 5, 3 / 10, 3 / 5, 1.0, 7 / 8)
A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (3 / 10, -9 / 10, 6 / 5),
    (-11 / 54, 5 / 2, -70 / 27, 35 / 27),
    (1631 / 55296, 175 / 512, 575 / 13824, 44275 / 110592, 253 / 4096),
)
B5 = (37 / 378, 0.0, 250 / 621, 125 / 594, 0.0, 512 / 1771)
B4 = (2825 / 27648, 0.0, 18575 / 48384, 13525 / 55296, 277 / 14336, 1 / 4)
E = tuple(b5 - b4 for b5, b4 in zip(B5, B4))

SAFETY = 0.9
MAX_GROWTH = 5.0
MAX_SHRINK = 0.1


class StepperStalled(RuntimeError):
    pass


def _trial(derivative, y, t, dt):
    k = []
    for i in range(6):
        if i == 0:
            yi = y
        else:
            yi = y.copy()
            for a, kj in zip(A[i], k):
                if a:
                    yi += (a * dt) * kj
        k.append(derivative(t + C[i] * dt, yi))
    y5 = y.copy()
    err = np.zeros_like(y)
    for b, e, ki in zip(B5, E, k):
        if b:
            y5 += (b * dt) * ki
        if e:
            err += (e * dt) * ki
    return y5, err


def error_ratio(y, y_new, err, eps, eps_abs) -> float:
    scale = eps * max(np.max(np.abs(y)), np.max(np.abs(y_new))) + eps_abs
    e = float(np.max(np.abs(err)))
    if scale == 0.0:
        return 0.0 if e == 0.0 else np.inf
    return e / scale


def ode_step(derivative: Callable[[float, np.ndarray], np.ndarray], y: np.ndarray, t: float,
             proposed_dt: float, eps: float, eps_abs: float = 0.0, min_dt: float = 1e-12):
    """Take one accepted adaptive step.

    Returns ``(y_new, t_new, dt_used, dt_next)``.  The step is retried with a
    smaller stepsize until the estimated local error is within
    ``eps * max|y| + eps_abs``; ``dt_used <= proposed_dt`` always.
    """
    if proposed_dt <= 0:
        raise ValueError(f"proposed stepsize must be positive, got {proposed_dt}")
    dt = proposed_dt
    while True:
        y_new, err = _trial(derivative, y, t, dt)
        ratio = error_ratio(y, y_new, err, eps, eps_abs)
        if ratio <= 1.0:
            if ratio == 0.0:
                growth = MAX_GROWTH
            else:
                growth = min(MAX_GROWTH, SAFETY * ratio ** -0.2)
            return y_new, t + dt, dt, dt * growth
        if not np.isfinite(ratio):
            shrink = MAX_SHRINK
        else:
            shrink = max(MAX_SHRINK, SAFETY * ratio ** -0.25)
        dt *= shrink
        if dt < min_dt:
            raise StepperStalled(f"stepper stalled: stepsize {dt:.3e} below {min_dt:.3e} at t={t}")


def integrate(derivative, y0, t0: float, t1: float, eps: float, eps_abs: float = 0.0,
              dt0: float | None = None):
    """Integrate from ``t0`` to ``t1`` landing exactly on ``t1``; returns ``(y, steps)``."""
    y = np.array(y0, dtype=np.result_type(y0, float))
    t = t0
    dt = dt0 if dt0 is not None else (t1 - t0) / 100 or 1.0
    steps = 0
    while t < t1:
        remaining = t1 - t
        landing = dt >= remaining
        y, t, used, dt = ode_step(derivative, y, t, min(dt, remaining), eps, eps_abs,
                                  1e-12 * max(abs(t1 - t0), 1.0))
        if landing and used == remaining:
            t = t1
        steps += 1
    return y, steps
