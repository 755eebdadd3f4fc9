"""Single-mode time evolution in three interchangeable formulations.

``"suv"``
    Real system for ``S = |beta|^2`` and the two quadratures ``U, V`` of the
    pair correlation; the production path.
``"complex"``
    The Bogoliubov amplitudes ``(conj(alpha), beta)`` directly.
``integrate_dirac_oracle``
    The first-order Dirac system for ``(f, phi)`` itself, projected on the
    instantaneous spinor basis at each output time.  It shares no coupling
    formula with the other two and serves as their independent check.

All three start from the adiabatic vacuum ``alpha = 1, beta = 0`` at ``t0``
and carry the WKB phase ``Theta = integral of omega dt`` as an extra state
component, so ``exp(+-2 i Theta)`` is evaluated consistently at every stage.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .background import BackgroundState
from .errors import DomainError
from .integrators import IntegratorConfig, integrate
from .kinematics import (
    LITERAL_OMEGA_DOT,
    CouplingCoefficients,
    CouplingStrategy,
    ModeIndex,
    coupling_coefficients,
    kinematics_from_rates,
)
from .spinor_basis import (
    adapted_mode_vectors,
    chiral_spinors,
    massive_spinors,
    mode_vectors,
    project,
    reconstruct,
)

__all__ = [
    "BogoliubovState",
    "SUVState",
    "DiracModeState",
    "Trajectory",
    "rhs_complex",
    "rhs_suv",
    "suv_from_bogoliubov",
    "integrate_mode",
    "integrate_dirac_oracle",
    "mode_label",
]

FORMULATIONS = ("suv", "complex")


@dataclass(frozen=True, slots=True)
class BogoliubovState:
    alpha: complex
    beta: complex
    Theta: float = 0.0


@dataclass(frozen=True, slots=True)
class SUVState:
    S: float
    U: float
    V: float
    Theta: float = 0.0

    @property
    def constraint_residual(self) -> float:
        return abs(self.U * self.U + self.V * self.V - 4.0 * self.S * (1.0 - self.S))


@dataclass(frozen=True)
class DiracModeState:
    f: np.ndarray
    phi: np.ndarray

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.f, self.f).real + np.vdot(self.phi, self.phi).real)


@dataclass
class Trajectory:
    """Output-time samples of one mode.

    ``alpha``/``beta`` are filled by the complex formulation and the Dirac
    oracle; ``leakage`` (``1 - |alpha|^2 - |beta|^2``) and ``norm_drift`` only
    by the oracle.
    """

    t: np.ndarray
    S: np.ndarray
    U: np.ndarray
    V: np.ndarray
    Theta: np.ndarray
    residual: float
    n_steps: int = 0
    alpha: Optional[np.ndarray] = None
    beta: Optional[np.ndarray] = None
    leakage: Optional[np.ndarray] = None
    norm_drift: float = 0.0

    def states(self):
        return [SUVState(*v) for v in zip(self.S, self.U, self.V, self.Theta)]


def rhs_complex(state: BogoliubovState, c: CouplingCoefficients, K0: float):
    """Time derivatives ``(d conj(alpha)/dt, d beta/dt, d Theta/dt)``."""
    a = state.alpha.conjugate()
    b = state.beta
    em2 = cmath.exp(-2.0j * state.Theta)
    da = (0.5 * c.w + 0.5j * c.w_perp) * b * em2 - 0.5j * c.w3 * a
    db = (-0.5 * c.w + 0.5j * c.w_perp) * a * em2.conjugate() + 0.5j * c.w3 * b
    return da, db, K0


def rhs_suv(state: SUVState, c: CouplingCoefficients, K0: float):
    """Time derivatives ``(dS, dU, dV, dTheta)``."""
    S, U, V = state.S, state.U, state.V
    rot = 2.0 * K0 - c.w3
    one = 1.0 - 2.0 * S
    return (
        0.5 * c.w * U - 0.5 * c.w_perp * V,
        c.w * one + rot * V,
        -c.w_perp * one - rot * U,
        K0,
    )


def suv_from_bogoliubov(alpha: complex, beta: complex, Theta: float) -> SUVState:
    """``S = |beta|^2`` and ``U + iV = -2 alpha beta exp(-2 i Theta)``."""
    z = alpha * beta * cmath.exp(-2.0j * Theta)
    return SUVState(abs(beta) ** 2, -2.0 * z.real, -2.0 * z.imag, Theta)


def mode_label(mode: ModeIndex) -> str:
    k = mode.k
    return f"mode k=({k[0]:.17g}, {k[1]:.17g}, {k[2]:.17g}) r={mode.r:+d}"


def _mode_kinematics(model, mode, m):
    k = mode.k

    def at(t):
        A, Adot = model.scale_factors(t)
        if not (A[0] > 0.0 and A[1] > 0.0 and A[2] > 0.0):
            # also catches nan; the full check lives in BackgroundState
            BackgroundState.from_scale_factors(t, A, Adot)
        return kinematics_from_rates(k, A, (Adot[0] / A[0], Adot[1] / A[1], Adot[2] / A[2]), m)

    return at


def _resolve_config(config, model, mode, m, t0):
    config = config or IntegratorConfig()
    if config.max_step is None:
        omega0 = _mode_kinematics(model, mode, m)(t0).omega
        config = config.replace(max_step=0.1 / omega0)
    return config


def _check_interval(model, t0, times):
    if not len(times):
        raise DomainError("no output times requested")
    if not (model.contains(t0) and model.contains(times[-1])):
        raise DomainError(
            f"integration interval [{t0}, {times[-1]}] outside background validity {model.interval}"
        )


def integrate_mode(
    mode: ModeIndex,
    model,
    m: float,
    t0: float,
    times: Sequence[float],
    config: Optional[IntegratorConfig] = None,
    strategy: CouplingStrategy = LITERAL_OMEGA_DOT,
    formulation: str = "suv",
) -> Trajectory:
    """Evolve one mode from the vacuum at ``t0`` and sample it at ``times``.

    Raises
    ------
    StiffnessError
        Step size underflow; the message names the mode.
    DivergenceError
        The state became non-finite.
    """
    if formulation not in FORMULATIONS:
        raise DomainError(f"unknown formulation {formulation!r}")
    times = [float(t) for t in times]
    _check_interval(model, t0, times)
    config = _resolve_config(config, model, mode, m, t0)
    kin = _mode_kinematics(model, mode, m)
    r = mode.r
    label = mode_label(mode)

    if formulation == "suv":

        def fun(t, y):
            ks = kin(t)
            c = coupling_coefficients(ks, m, r, strategy)
            return rhs_suv(SUVState(y[0], y[1], y[2], y[3]), c, ks.omega)

        ts, ys, n = integrate(fun, t0, (0.0, 0.0, 0.0, 0.0), times, config, label)
        S, U, V, Th = ys.T
        res = np.abs(U * U + V * V - 4.0 * S * (1.0 - S))
        return Trajectory(ts, S, U, V, Th, float(res.max()), n)

    # complex: y = (Re conj(alpha), Im conj(alpha), Re beta, Im beta, Theta)
    def fun(t, y):
        ks = kin(t)
        c = coupling_coefficients(ks, m, r, strategy)
        state = BogoliubovState(complex(y[0], -y[1]), complex(y[2], y[3]), y[4])
        da, db, dth = rhs_complex(state, c, ks.omega)
        return (da.real, da.imag, db.real, db.imag, dth)

    ts, ys, n = integrate(fun, t0, (1.0, 0.0, 0.0, 0.0, 0.0), times, config, label)
    alpha = ys[:, 0] - 1j * ys[:, 1]
    beta = ys[:, 2] + 1j * ys[:, 3]
    suv = [suv_from_bogoliubov(a, b, th) for a, b, th in zip(alpha, beta, ys[:, 4])]
    S = np.array([s.S for s in suv])
    U = np.array([s.U for s in suv])
    V = np.array([s.V for s in suv])
    res = np.abs(U * U + V * V - 4.0 * S * (1.0 - S))
    return Trajectory(ts, S, U, V, ys[:, 4].copy(), float(res.max()), n, alpha=alpha, beta=beta)


def _basis_vectors(ks, m, r, basis):
    cb = chiral_spinors(ks.qnorm, ks.q3, ks.Phi, r)
    if basis == "paper":
        return mode_vectors(massive_spinors(cb, ks.qnorm, m, ks.omega), ks.omega, m)
    if basis == "adapted":
        return adapted_mode_vectors(cb, ks.omega, m)
    raise DomainError(f"unknown spinor basis {basis!r}")


def integrate_dirac_oracle(
    mode: ModeIndex,
    model,
    m: float,
    t0: float,
    times: Sequence[float],
    config: Optional[IntegratorConfig] = None,
    basis: str = "paper",
) -> Trajectory:
    """Integrate the Dirac system for ``(f, phi)`` and project at ``times``.

    ``df/dt = -i (m f + r q.sigma phi)``, ``dphi/dt = -i (-m phi + r q.sigma f)``
    with the physical momentum ``q(t)``.  The mode starts as the
    negative-frequency basis vector at ``t0``; at each output time the
    instantaneous basis is rebuilt and ``(alpha, beta)`` are read off.

    ``basis="adapted"`` projects on :func:`adapted_mode_vectors` instead of
    the massive spinor basis.
    """
    times = [float(t) for t in times]
    _check_interval(model, t0, times)
    config = _resolve_config(config, model, mode, m, t0)
    k1, k2, k3 = mode.k
    r = mode.r
    label = mode_label(mode)
    kin = _mode_kinematics(model, mode, m)

    def fun(t, y):
        A, _ = model.scale_factors(t)
        q1, q2, q3 = r * k1 / A[0], r * k2 / A[1], r * k3 / A[2]
        f1 = complex(y[0], y[1])
        f2 = complex(y[2], y[3])
        g1 = complex(y[4], y[5])
        g2 = complex(y[6], y[7])
        # (q.sigma) v = (q3 v1 + (q1 - i q2) v2, (q1 + i q2) v1 - q3 v2)
        qm = complex(q1, -q2)
        qp = complex(q1, q2)
        sg1 = q3 * g1 + qm * g2
        sg2 = qp * g1 - q3 * g2
        sf1 = q3 * f1 + qm * f2
        sf2 = qp * f1 - q3 * f2
        df1 = -1j * (m * f1 + sg1)
        df2 = -1j * (m * f2 + sg2)
        dg1 = -1j * (-m * g1 + sf1)
        dg2 = -1j * (-m * g2 + sf2)
        omega = math.sqrt((k1 / A[0]) ** 2 + (k2 / A[1]) ** 2 + (k3 / A[2]) ** 2 + m * m)
        return (
            df1.real, df1.imag, df2.real, df2.imag,
            dg1.real, dg1.imag, dg2.real, dg2.imag,
            omega,
        )

    ua, ub = _basis_vectors(kin(t0), m, r, basis)
    X0 = reconstruct(ua, ub, 1.0, 0.0, 0.0)
    y0 = np.empty(9)
    y0[0:8:2] = X0.real
    y0[1:8:2] = X0.imag
    y0[8] = 0.0
    ts, ys, n = integrate(fun, t0, y0, times, config, label)

    alpha = np.empty(len(ts), dtype=complex)
    beta = np.empty(len(ts), dtype=complex)
    S, U, V, leak = (np.empty(len(ts)) for _ in range(4))
    drift = 0.0
    for j, (t, y) in enumerate(zip(ts, ys)):
        X = y[0:8:2] + 1j * y[1:8:2]
        drift = max(drift, abs(float(np.vdot(X, X).real) - 1.0))
        ua, ub = _basis_vectors(kin(t), m, r, basis)
        a, b = project(ua, ub, X, y[8])
        alpha[j], beta[j] = a, b
        s = suv_from_bogoliubov(a, b, y[8])
        S[j], U[j], V[j] = s.S, s.U, s.V
        leak[j] = 1.0 - abs(a) ** 2 - abs(b) ** 2
    res = np.abs(U * U + V * V - 4.0 * S * (1.0 - S))
    return Trajectory(
        ts, S, U, V, ys[:, 8].copy(), float(res.max()), n,
        alpha=alpha, beta=beta, leakage=leak, norm_drift=drift,
    )
