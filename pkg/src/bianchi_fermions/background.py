"""Scale-factor models for the Bianchi type-I metric.

The line element is ``ds^2 = dt^2 - sum_i A_i(t)^2 (dx^i)^2``.  Every model
exposes ``scale_factors(t) -> (A, Adot)`` as plain float triples (the hot path
used inside the mode integrators) and an explicit validity interval; asking
for a time outside that interval is an error, never an extrapolation.

The mean scale factor is the geometric mean ``a = (A1 A2 A3)**(1/3)`` and the
anisotropy factors are ``alpha_i = A_i / a``, so that ``alpha1 alpha2 alpha3 = 1``
and the isotropic limit gives ``A_i = a``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Tuple, Union

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import DomainError, EvaluationError

Triple = Tuple[float, float, float]

__all__ = [
    "BackgroundState",
    "Static",
    "PowerLaw",
    "Exponential",
    "Isotropic",
    "Tabulated",
    "BackgroundModel",
    "Diagnostics",
    "evaluate_background",
    "validate_model",
    "hermite_slopes",
]


def _triple(values, name) -> Triple:
    values = tuple(float(v) for v in values)
    if len(values) != 3:
        raise DomainError(f"{name} must have exactly 3 components, got {len(values)}")
    return values


class _Model:
    """Shared behaviour: interval checks and the public ``evaluate`` wrapper."""

    t_min: float
    t_max: float

    @property
    def interval(self) -> Tuple[float, float]:
        return (self.t_min, self.t_max)

    def contains(self, t: float) -> bool:
        return self.t_min <= t <= self.t_max

    def _check(self, t: float) -> None:
        if not (self.t_min <= t <= self.t_max):
            raise DomainError(
                f"t={t!r} outside validity interval [{self.t_min}, {self.t_max}] "
                f"of {type(self).__name__}"
            )

    def scale_factors(self, t: float) -> Tuple[Triple, Triple]:
        raise NotImplementedError


@dataclass(frozen=True)
class Static(_Model):
    """Constant scale factors; the coupling to the field vanishes identically."""

    A: Triple
    t_min: float = -math.inf
    t_max: float = math.inf

    def __post_init__(self):
        object.__setattr__(self, "A", _triple(self.A, "A"))

    def scale_factors(self, t):
        self._check(t)
        return self.A, (0.0, 0.0, 0.0)


@dataclass(frozen=True)
class PowerLaw(_Model):
    """``A_i(t) = a0_i (t / t_ref)**p_i`` for ``t > 0``.

    The Kasner vacuum solution is the special case
    ``sum(p) == sum(p**2) == 1``.
    """

    a0: Triple
    p: Triple
    t_ref: float = 1.0
    t_min: float = 0.0
    t_max: float = math.inf

    def __post_init__(self):
        object.__setattr__(self, "a0", _triple(self.a0, "a0"))
        object.__setattr__(self, "p", _triple(self.p, "p"))
        if not self.t_ref > 0:
            raise DomainError("PowerLaw t_ref must be positive")
        if self.t_min < 0:
            raise DomainError("PowerLaw validity interval must lie in t > 0")

    def scale_factors(self, t):
        self._check(t)
        if t <= 0.0:
            raise DomainError("PowerLaw is only defined for t > 0")
        x = t / self.t_ref
        A = tuple(a * x**p for a, p in zip(self.a0, self.p))
        Adot = tuple(p * a / t for a, p in zip(A, self.p))
        return A, Adot


def _exp(x):
    # overflow becomes inf and is reported by BackgroundState
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


@dataclass(frozen=True)
class Exponential(_Model):
    """``A_i(t) = a0_i exp(rate_i (t - t_ref))``; constant expansion rates."""

    a0: Triple
    rates: Triple
    t_ref: float = 0.0
    t_min: float = -math.inf
    t_max: float = math.inf

    def __post_init__(self):
        object.__setattr__(self, "a0", _triple(self.a0, "a0"))
        object.__setattr__(self, "rates", _triple(self.rates, "rates"))

    def scale_factors(self, t):
        self._check(t)
        dt = t - self.t_ref
        A = tuple(a * _exp(h * dt) for a, h in zip(self.a0, self.rates))
        Adot = tuple(h * a for a, h in zip(A, self.rates))
        return A, Adot


@dataclass(frozen=True)
class Isotropic(_Model):
    """Applies the first axis of an inner model to all three axes."""

    inner: "BackgroundModel"

    @property
    def t_min(self):
        return self.inner.t_min

    @property
    def t_max(self):
        return self.inner.t_max

    def scale_factors(self, t):
        A, Adot = self.inner.scale_factors(t)
        return (A[0],) * 3, (Adot[0],) * 3


def hermite_slopes(times: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Finite-difference node slopes for cubic Hermite interpolation.

    Interior nodes use the three-point non-uniform central difference;
    the endpoints use the second-order one-sided three-point formula.
    ``values`` may carry trailing axes (one column per scale factor).
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    n = t.shape[0]
    if n < 3:
        raise DomainError("need at least 3 nodes for finite-difference slopes")
    h = np.diff(t)
    dy = np.diff(y, axis=0) / h.reshape((-1,) + (1,) * (y.ndim - 1))
    slopes = np.empty_like(y)
    # interior: weighted average of adjacent secants (exact for quadratics)
    hl = h[:-1].reshape((-1,) + (1,) * (y.ndim - 1))
    hr = h[1:].reshape((-1,) + (1,) * (y.ndim - 1))
    slopes[1:-1] = (hr * dy[:-1] + hl * dy[1:]) / (hl + hr)
    h0, h1 = h[0], h[1]
    slopes[0] = ((2 * h0 + h1) * dy[0] - h0 * dy[1]) / (h0 + h1)
    hn, hm = h[-1], h[-2]
    slopes[-1] = ((2 * hn + hm) * dy[-1] - hn * dy[-2]) / (hn + hm)
    return slopes


@dataclass(frozen=True)
class Tabulated(_Model):
    """Scale factors sampled on a strictly increasing time grid.

    Values between nodes come from a C1 cubic Hermite interpolant whose node
    slopes are finite differences of the samples (see :func:`hermite_slopes`).

    Parameters
    ----------
    times : array_like, shape (N,)
    samples : array_like, shape (3, N)
        ``samples[i, j] = A_i(times[j])``.
    """

    times: np.ndarray
    samples: np.ndarray
    _spline: CubicHermiteSpline = field(init=False, repr=False, compare=False)
    _dspline: object = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        samples = np.asarray(self.samples, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "samples", samples)
        if times.ndim != 1 or samples.shape != (3, times.shape[0]):
            raise DomainError("Tabulated needs times (N,) and samples (3, N)")
        if times.shape[0] < 4:
            raise DomainError("Tabulated needs at least 4 nodes")
        if not np.all(np.diff(times) > 0):
            raise DomainError("times not strictly increasing")
        if not np.all(samples > 0):
            raise DomainError("non-positive scale factor in Tabulated samples")
        y = samples.T
        spline = CubicHermiteSpline(times, y, hermite_slopes(times, y), axis=0)
        object.__setattr__(self, "_spline", spline)
        object.__setattr__(self, "_dspline", spline.derivative())

    @property
    def t_min(self):
        return float(self.times[0])

    @property
    def t_max(self):
        return float(self.times[-1])

    def scale_factors(self, t):
        self._check(t)
        A = self._spline(t)
        Adot = self._dspline(t)
        return (float(A[0]), float(A[1]), float(A[2])), (
            float(Adot[0]),
            float(Adot[1]),
            float(Adot[2]),
        )


BackgroundModel = Union[Static, PowerLaw, Exponential, Isotropic, Tabulated]


@dataclass(frozen=True, slots=True)
class BackgroundState:
    """Scale factors and their rates at one time."""

    t: float
    A: Triple
    Adot: Triple
    H: Triple
    a: float
    alpha: Triple

    @classmethod
    def from_scale_factors(cls, t: float, A: Sequence[float], Adot: Sequence[float]):
        if not all(math.isfinite(x) for x in (*A, *Adot)):
            raise EvaluationError(f"non-finite scale factors at t={t!r}")
        if min(A) <= 0.0:
            raise DomainError(f"non-positive scale factor {tuple(A)} at t={t!r}")
        A = tuple(float(x) for x in A)
        Adot = tuple(float(x) for x in Adot)
        H = tuple(d / x for d, x in zip(Adot, A))
        a = (A[0] * A[1] * A[2]) ** (1.0 / 3.0)
        alpha = tuple(x / a for x in A)
        return cls(t=float(t), A=A, Adot=Adot, H=H, a=a, alpha=alpha)


def evaluate_background(model: BackgroundModel, t: float) -> BackgroundState:
    """Evaluate ``model`` at time ``t``.

    Raises
    ------
    DomainError
        ``t`` lies outside the model's validity interval.
    EvaluationError
        The model produced a non-finite value.
    """
    A, Adot = model.scale_factors(float(t))
    return BackgroundState.from_scale_factors(t, A, Adot)


@dataclass
class Diagnostics:
    violations: list = field(default_factory=list)
    flags: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def _is_vacuum_kasner(p, tol=1e-12) -> bool:
    return abs(sum(p) - 1.0) <= tol and abs(sum(x * x for x in p) - 1.0) <= tol


def validate_model(model, interval=None) -> Diagnostics:
    """Collect problems with ``model`` over ``interval`` without raising.

    Violations are hard errors (non-positive scale factor, non-monotone time
    nodes, interval outside the validity range); flags are informational,
    e.g. ``"vacuum Kasner"``.
    """
    diag = Diagnostics()
    if isinstance(model, Isotropic):
        inner = validate_model(model.inner, interval)
        diag.violations.extend(inner.violations)
        diag.flags.append("isotropic")
        return diag

    if isinstance(model, Static):
        if min(model.A) <= 0:
            diag.violations.append("non-positive scale factor")
        if len(set(model.A)) == 1:
            diag.flags.append("isotropic")
    elif isinstance(model, (PowerLaw, Exponential)):
        if min(model.a0) <= 0:
            diag.violations.append("non-positive scale factor")
        if isinstance(model, PowerLaw):
            if _is_vacuum_kasner(model.p):
                diag.flags.append("vacuum Kasner")
            if interval is not None and interval[0] <= 0:
                diag.violations.append("power law evaluated at t <= 0")
    elif isinstance(model, Tabulated):
        # Tabulated refuses bad data at construction; this branch only sees
        # duck-typed raw tables (see ``validate_table``).
        pass

    if interval is not None:
        t0, t1 = interval
        if not (t0 < t1):
            diag.violations.append("interval not increasing")
        if t0 < model.t_min or t1 > model.t_max:
            diag.violations.append("interval outside model validity")
    return diag


def validate_table(times, samples, interval=None) -> Diagnostics:
    """Diagnostics for raw tabulated data before a :class:`Tabulated` is built."""
    diag = Diagnostics()
    times = np.asarray(times, dtype=float)
    samples = np.asarray(samples, dtype=float)
    if times.ndim != 1 or samples.shape != (3, times.shape[0]):
        diag.violations.append("table shape mismatch")
        return diag
    if times.shape[0] < 4:
        diag.violations.append("fewer than 4 time nodes")
    if not np.all(np.diff(times) > 0):
        diag.violations.append("times not strictly increasing")
    if not np.all(samples > 0):
        diag.violations.append("non-positive scale factor")
    if interval is not None and times.size:
        if interval[0] < times[0] or interval[1] > times[-1]:
            diag.violations.append("interval outside model validity")
    return diag
