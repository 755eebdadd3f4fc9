"""Explicit Runge-Kutta steppers used for every mode integration.

Two methods are available:

* ``"dopri5"``: the Dormand-Prince embedded 5(4) pair with first-same-as-last
  stage reuse and an elementary step controller on the max-norm of the
  scaled local error.
* ``"rk4"``: classical fixed-step fourth order, step size ``max_step``.

Both land steps exactly on the requested output times, so no interpolation
happens between step points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DivergenceError, DomainError, StiffnessError

__all__ = ["IntegratorConfig", "integrate"]

# Dormand & Prince (1980), RK5(4)7M
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = _A[6]
# difference between the 5th order and embedded 4th order weights
_E = (
    71 / 57600,
    0.0,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


@dataclass(frozen=True)
class IntegratorConfig:
    """Step control settings.

    ``max_step=None`` lets the caller substitute a problem-dependent ceiling
    (the mode integrators use ``0.1 / omega(t0)``).
    """

    method: str = "dopri5"
    rtol: float = 1e-10
    atol: float = 1e-10
    max_step: Optional[float] = None
    initial_step: Optional[float] = None
    max_steps: int = 10_000_000

    def __post_init__(self):
        if self.method not in ("dopri5", "rk4"):
            raise DomainError(f"unknown integration method {self.method!r}")
        if not (self.rtol > 0 and self.atol > 0):
            raise DomainError("tolerances must be positive")
        for name in ("max_step", "initial_step"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise DomainError(f"{name} must be positive")

    def replace(self, **changes) -> "IntegratorConfig":
        return replace(self, **changes)


def _check_finite(y, t, label):
    if not np.all(np.isfinite(y)):
        raise DivergenceError(f"non-finite state at t={t!r}" + (f" for {label}" if label else ""))


def integrate(
    fun: Callable[[float, np.ndarray], Sequence[float]],
    t0: float,
    y0: Sequence[float],
    t_out: Sequence[float],
    config: IntegratorConfig = IntegratorConfig(),
    label: str = "",
):
    """Integrate ``y' = fun(t, y)`` from ``t0`` and sample at ``t_out``.

    Parameters
    ----------
    fun : callable
        Right-hand side, returning a sequence of floats.
    t0 : float
    y0 : sequence of float
    t_out : sequence of float
        Non-decreasing output times, all ``>= t0``.
    config : IntegratorConfig
    label : str
        Included in error messages (e.g. the mode being integrated).

    Returns
    -------
    ts : ndarray
        Copy of ``t_out``.
    ys : ndarray, shape (len(t_out), len(y0))
    n_steps : int
        Number of accepted steps.
    """
    t_out = [float(t) for t in t_out]
    if any(b < a for a, b in zip(t_out, t_out[1:])) or (t_out and t_out[0] < t0):
        raise DomainError("output times must be non-decreasing and not before t0")
    y = np.array(y0, dtype=float)
    _check_finite(y, t0, label)
    if config.method == "rk4":
        ys, n = _rk4(fun, t0, y, t_out, config, label)
    else:
        ys, n = _dopri5(fun, t0, y, t_out, config, label)
    return np.array(t_out), np.array(ys).reshape(len(t_out), y.size), n


def _rk4(fun, t, y, t_out, cfg, label):
    if cfg.max_step is None:
        raise DomainError("rk4 needs max_step as its fixed step size")
    h_fix = cfg.max_step
    ys = []
    n = 0
    for target in t_out:
        while t < target:
            # final sub-step is shortened to land on the output time
            h = h_fix if t + h_fix < target else target - t
            k1 = np.asarray(fun(t, y))
            k2 = np.asarray(fun(t + h / 2, y + (h / 2) * k1))
            k3 = np.asarray(fun(t + h / 2, y + (h / 2) * k2))
            k4 = np.asarray(fun(t + h, y + h * k3))
            y = y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
            t = t + h if t + h < target else target
            n += 1
            _check_finite(y, t, label)
            if n > cfg.max_steps:
                raise StiffnessError(f"step budget exhausted at t={t!r}" + _for(label))
        ys.append(y.copy())
    return ys, n


def _for(label):
    return f" for {label}" if label else ""


def _error_norm(err, y, y_new, cfg):
    # max norm: every component, including the phase, meets the tolerance
    scale = cfg.atol + cfg.rtol * np.maximum(np.abs(y), np.abs(y_new))
    return float(np.max(np.abs(err) / scale))


def _initial_step(fun, t, y, f0, cfg, span):
    if cfg.initial_step is not None:
        return cfg.initial_step
    scale = cfg.atol + cfg.rtol * np.abs(y)
    d0 = math.sqrt(float(np.mean((y / scale) ** 2)))
    d1 = math.sqrt(float(np.mean((f0 / scale) ** 2)))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)
    f1 = np.asarray(fun(t + h0, y + h0 * f0))
    d2 = math.sqrt(float(np.mean(((f1 - f0) / scale) ** 2))) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1)


def _dopri5(fun, t, y, t_out, cfg, label):
    ys = []
    if not t_out:
        return ys, 0
    span = t_out[-1] - t
    max_step = cfg.max_step if cfg.max_step is not None else max(span, 1e-300)
    f = np.asarray(fun(t, y), dtype=float)
    h = min(_initial_step(fun, t, y, f, cfg, max(span, 1e-300)), max_step)
    n = 0
    n_tries = 0
    for target in t_out:
        while t < target:
            n_tries += 1
            if n_tries > cfg.max_steps:
                raise StiffnessError(f"step budget exhausted at t={t!r}" + _for(label))
            h = min(h, max_step)
            landing = t + h >= target
            step = target - t if landing else h
            if step <= 16 * np.finfo(float).eps * max(abs(t), 1.0):
                if landing:
                    # output time within round-off of t
                    t = target
                    break
                raise StiffnessError(f"step size underflow (h={step:.3e}) at t={t!r}" + _for(label))

            k = [f]
            for i in range(1, 7):
                a = _A[i]
                dy = a[0] * k[0]
                for j in range(1, i):
                    if a[j] != 0.0:
                        dy = dy + a[j] * k[j]
                y_stage = y + step * dy
                k.append(np.asarray(fun(t + _C[i] * step, y_stage), dtype=float))
            # the last stage sits at the 5th order solution (first-same-as-last)
            y_new = y_stage
            f_new = k[6]
            err = step * (
                _E[0] * k[0] + _E[2] * k[2] + _E[3] * k[3] + _E[4] * k[4] + _E[5] * k[5] + _E[6] * k[6]
            )
            en = _error_norm(err, y, y_new, cfg)
            if not math.isfinite(en):
                _check_finite(y_new, t + step, label)
                en = 1e10
            if en <= 1.0:
                t = target if landing else t + step
                y = y_new
                f = f_new
                n += 1
                _check_finite(y, t, label)
                factor = _MAX_FACTOR if en == 0.0 else min(_MAX_FACTOR, _SAFETY * en ** -0.2)
                # a step shortened only to hit an output time does not shrink h
                h = max(h, step * factor) if (landing and step < h) else step * factor
            else:
                h = step * max(_MIN_FACTOR, _SAFETY * en ** -0.2)
        ys.append(y.copy())
    return ys, n
