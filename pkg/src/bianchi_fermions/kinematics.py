"""Per-mode kinematics and the Bogoliubov coupling coefficients.

Physical momenta redshift axis by axis, ``q_i = k_i / A_i``, so the direction
of a mode's momentum rotates in an anisotropic background.  All time
derivatives are closed forms in the Hubble rates ``H_i = Adot_i / A_i``:

    qdot_i   = -H_i q_i
    qnormdot = -(sum_i H_i q_i**2) / q
    omegadot = q qnormdot / omega
    Phidot   = q1 q2 (H1 - H2) / qperp**2          (0 when qperp == 0)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

from .background import BackgroundState
from .errors import DomainError, EvaluationError

__all__ = [
    "ModeIndex",
    "KinematicState",
    "CouplingCoefficients",
    "CouplingStrategy",
    "LITERAL_OMEGA_DOT",
    "PhaseAccumulator",
    "physical_momentum",
    "kinematic_state",
    "kinematics_from_rates",
    "coupling_coefficients",
    "literal_omega_dot",
    "projected_paper_basis",
    "adapted_basis",
    "polar_rate",
    "accumulate_phase",
    "spherical_wavevector",
]


@dataclass(frozen=True, slots=True)
class ModeIndex:
    """Comoving wave vector and helicity label of one field mode."""

    k: Tuple[float, float, float]
    r: int

    def __post_init__(self):
        k = tuple(float(x) for x in self.k)
        object.__setattr__(self, "k", k)
        if len(k) != 3:
            raise DomainError("k must have 3 components")
        if self.r not in (1, -1):
            raise DomainError(f"helicity must be +1 or -1, got {self.r!r}")
        if k[0] == 0.0 and k[1] == 0.0 and k[2] == 0.0:
            raise DomainError("|k| must be positive")


def spherical_wavevector(k, theta, phi):
    """Cartesian comoving wave vector from (|k|, polar angle, azimuth)."""
    st = math.sin(theta)
    return (k * st * math.cos(phi), k * st * math.sin(phi), k * math.cos(theta))


@dataclass(frozen=True, slots=True)
class KinematicState:
    q: Tuple[float, float, float]
    qnorm: float
    qperp: float
    q3: float
    omega: float
    Phi: float
    qdot: Tuple[float, float, float]
    qnormdot: float
    q3dot: float
    omegadot: float
    Phidot: float
    # Hubble rates are kept so the coupling can use cancellation-free forms.
    H: Tuple[float, float, float]


@dataclass(frozen=True, slots=True)
class CouplingCoefficients:
    w: float
    w_perp: float
    w3: float


def physical_momentum(bg: BackgroundState, k) -> Tuple[float, float, float]:
    A = bg.A
    return (k[0] / A[0], k[1] / A[1], k[2] / A[2])


def kinematic_state(bg: BackgroundState, mode: ModeIndex, m: float) -> KinematicState:
    """Momentum, frequency, azimuth and their time derivatives for one mode."""
    return kinematics_from_rates(mode.k, bg.A, bg.H, m)


def kinematics_from_rates(k, A, H, m: float) -> KinematicState:
    """:func:`kinematic_state` from raw scale factors and Hubble rates.

    The mode integrators call this at every stage, skipping the construction
    of a full :class:`BackgroundState`.
    """
    q1, q2, q3 = k[0] / A[0], k[1] / A[1], k[2] / A[2]
    H1, H2, H3 = H
    qperp2 = q1 * q1 + q2 * q2
    q2sum = qperp2 + q3 * q3
    if q2sum == 0.0:
        raise DomainError("physical momentum vanishes")
    qn = math.sqrt(q2sum)
    qperp = math.sqrt(qperp2)
    omega = math.sqrt(q2sum + m * m)
    qdot = (-H1 * q1, -H2 * q2, -H3 * q3)
    qnormdot = -(H1 * q1 * q1 + H2 * q2 * q2 + H3 * q3 * q3) / qn
    omegadot = qn * qnormdot / omega
    Phidot = q1 * q2 * (H1 - H2) / qperp2 if qperp2 > 0.0 else 0.0
    return KinematicState(
        q=(q1, q2, q3),
        qnorm=qn,
        qperp=qperp,
        q3=q3,
        omega=omega,
        Phi=math.atan2(q2, q1),
        qdot=qdot,
        qnormdot=qnormdot,
        q3dot=qdot[2],
        omegadot=omegadot,
        Phidot=Phidot,
        H=(H1, H2, H3),
    )


def polar_rate(ks: KinematicState) -> float:
    """``(q3 qdot - q3dot q) / (q qperp)``, the rotation rate of the polar angle.

    Evaluated as ``q3 [(H3-H1) q1^2 + (H3-H2) q2^2] / (q^2 qperp)`` so that it
    is exactly zero for isotropic expansion; defined as 0 on the q3 axis.
    """
    if ks.qperp == 0.0:
        return 0.0
    q1, q2, q3 = ks.q
    H1, H2, H3 = ks.H
    return q3 * ((H3 - H1) * q1 * q1 + (H3 - H2) * q2 * q2) / (ks.qnorm**2 * ks.qperp)


def literal_omega_dot(ks: KinematicState, m: float, r: int) -> CouplingCoefficients:
    """Coupling coefficients as printed, reading the self-referential
    ``w-dot`` in the mass term as ``omega-dot``."""
    q, w, Phd = ks.qnorm, ks.omega, ks.Phidot
    w2 = w * w
    m2 = m * m
    split = (q * q - m2) / w2
    # (q3 qdot - q3dot q) / (omega qperp) without the 0/0 on the q3 axis
    first = q * polar_rate(ks) / w
    cw = first * split + 2.0 * m2 * ks.omegadot / (w2 * w)
    cperp = r * ks.qperp / w * Phd
    c3 = r * ks.q3 / w * Phd * split + 2.0 * r * m2 * ks.qperp * Phd / (w2 * w)
    return CouplingCoefficients(cw, cperp, c3)


def projected_paper_basis(ks: KinematicState, m: float, r: int) -> CouplingCoefficients:
    """Exact in-subspace couplings of the massive spinor basis.

    Identical to :func:`literal_omega_dot` for ``w`` and ``w_perp``; the
    diagonal ``w3`` carries ``q3/q`` where the printed formula has
    ``q3/omega``.
    """
    lit = literal_omega_dot(ks, m, r)
    q, w, Phd = ks.qnorm, ks.omega, ks.Phidot
    w2 = w * w
    c3 = r * Phd * (ks.q3 / q * (q * q - m * m) / w2 + 2.0 * m * m * ks.qperp / (w2 * w))
    return CouplingCoefficients(lit.w, lit.w_perp, c3)


def adapted_basis(ks: KinematicState, m: float, r: int) -> CouplingCoefficients:
    """Couplings of the rotation-adapted spinor basis.

    In this basis the two-state reduction of the Dirac equation is exact
    whenever the azimuth of the physical momentum is constant.
    """
    w = ks.omega
    th = polar_rate(ks)
    return CouplingCoefficients(m * ks.qnormdot / (w * w), -ks.qnorm * th / w, -m * th / w)


CouplingCallback = Callable[[KinematicState, float, int], CouplingCoefficients]


@dataclass(frozen=True)
class CouplingStrategy:
    """Selects how (w, w_perp, w3) are computed from the kinematics.

    ``CouplingStrategy()`` is the default reading of the printed formulas;
    ``CouplingStrategy.user(fn)`` wraps any callable
    ``fn(ks, m, r) -> CouplingCoefficients`` (or a 3-tuple).  Callables must be
    module-level functions when runs are distributed over processes.
    """

    callback: Optional[CouplingCallback] = None
    name: str = "literal"

    @classmethod
    def user(cls, fn: CouplingCallback, name: Optional[str] = None):
        return cls(callback=fn, name=name or getattr(fn, "__name__", "user"))

    @property
    def is_default(self) -> bool:
        return self.callback is None


LITERAL_OMEGA_DOT = CouplingStrategy()

NAMED_STRATEGIES = {
    "literal": LITERAL_OMEGA_DOT,
    "projected": CouplingStrategy.user(projected_paper_basis, "projected"),
    "adapted": CouplingStrategy.user(adapted_basis, "adapted"),
}


def coupling_coefficients(
    ks: KinematicState, m: float, r: int, strategy: CouplingStrategy = LITERAL_OMEGA_DOT
) -> CouplingCoefficients:
    if strategy.callback is None:
        return literal_omega_dot(ks, m, r)
    c = strategy.callback(ks, m, r)
    if not isinstance(c, CouplingCoefficients):
        c = CouplingCoefficients(*(float(x) for x in c))
    if not (math.isfinite(c.w) and math.isfinite(c.w_perp) and math.isfinite(c.w3)):
        raise EvaluationError(f"coupling strategy {strategy.name!r} returned {c}")
    return c


@dataclass(frozen=True, slots=True)
class PhaseAccumulator:
    """Running WKB phase ``Theta(t) = integral of omega dt`` from ``t0``."""

    t_last: float
    Theta: float = 0.0


def accumulate_phase(acc: PhaseAccumulator, omega, t: float, config=None) -> PhaseAccumulator:
    """Advance the phase to ``t`` by integrating ``omega(t)``.

    Uses the same stepper as the mode integrators (see
    :mod:`bianchi_fermions.integrators`), with the phase as the only state
    component.
    """
    from .integrators import IntegratorConfig, integrate

    if t < acc.t_last:
        raise DomainError(f"cannot accumulate phase backwards: t={t} < t_last={acc.t_last}")
    if t == acc.t_last:
        return acc
    cfg = config or IntegratorConfig()
    if cfg.max_step is None:
        cfg = cfg.replace(max_step=0.1 / max(abs(omega(acc.t_last)), 1e-300))
    _, ys, _ = integrate(lambda s, y: [omega(s)], acc.t_last, [acc.Theta], [t], cfg)
    return PhaseAccumulator(t_last=t, Theta=ys[-1][0])
