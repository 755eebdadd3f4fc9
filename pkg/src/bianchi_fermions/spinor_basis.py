"""Two-component spinor bases for a single field mode.

Chiral spinors ``R1, R2`` are the eigenstates of ``r (q . sigma)`` with
eigenvalues ``-q`` and ``+q``; the massive spinors mix them with weights
``q/omega`` and ``m/omega``:

    P1 = (q R1 + m R2) / omega        P3 = (m R1 + q R2) / omega
    P2 = (q R2 - m R1) / omega        P4 = (q R1 - m R2) / omega

so that ``P_i^+ P_i = 2`` and ``P1^+ P3 = -P2^+ P4 = 4 m q / omega^2``.

A mode ``X = (f, phi)`` of the Dirac system is expanded on the two
instantaneous energy eigenvectors

    u_a = (sqrt(omega-m) P1, sqrt(omega+m) P4) / (2 sqrt(omega))   energy -omega
    u_b = (sqrt(omega+m) P3, sqrt(omega-m) P2) / (2 sqrt(omega))   energy +omega

as ``X = conj(alpha) e+ u_a + beta e- u_b`` with ``e+- = exp(+-i Theta)``.
Both vectors have unit norm and are orthogonal, so the expansion and the
projection back to ``(alpha, beta)`` are exact inverses and
``f^+ f + phi^+ phi = |alpha|^2 + |beta|^2``.

See ``docs/physics_notes.md`` for why these differ from a literal reading of
the charge-conjugation construction.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "ChiralBasis",
    "MassiveBasis",
    "sigma2_conjugate",
    "chiral_spinors",
    "massive_spinors",
    "mode_vectors",
    "adapted_mode_vectors",
    "reconstruct",
    "project",
    "reconstruct_mode",
    "project_bogoliubov",
]

_SIGMA2 = np.array([[0.0, -1.0j], [1.0j, 0.0]])


def sigma2_conjugate(v: np.ndarray) -> np.ndarray:
    """``-i sigma_2 conj(v)`` as a literal 2x2 matrix product."""
    return (-1.0j * _SIGMA2) @ np.conj(v)


@dataclass(frozen=True)
class ChiralBasis:
    R1: np.ndarray
    R2: np.ndarray


@dataclass(frozen=True)
class MassiveBasis:
    P1: np.ndarray
    P2: np.ndarray
    P3: np.ndarray
    P4: np.ndarray


def chiral_spinors(q: float, q3: float, Phi: float, r: int) -> ChiralBasis:
    if not q > 0:
        raise DomainError("chiral spinors need q > 0")
    if abs(q3) > q:
        raise DomainError(f"|q3|={abs(q3)!r} exceeds q={q!r}")
    # clamp absorbs 1-ulp negatives on the q3 axis
    lo = math.sqrt(max((q - r * q3) / q, 0.0))
    hi = math.sqrt(max((q + r * q3) / q, 0.0))
    em = cmath.exp(-0.5j * Phi)
    ep = cmath.exp(0.5j * Phi)
    R1 = np.array([lo * em, -r * hi * ep])
    R2 = np.array([r * hi * em, lo * ep])
    return ChiralBasis(R1, R2)


def massive_spinors(cb: ChiralBasis, q: float, m: float, omega: float) -> MassiveBasis:
    if abs(omega * omega - (q * q + m * m)) > 1e-12 * max(omega * omega, 1e-300):
        raise DomainError(f"omega={omega!r} inconsistent with q={q!r}, m={m!r}")
    R1, R2 = cb.R1, cb.R2
    cq = q / omega
    cm = m / omega
    return MassiveBasis(
        P1=cq * R1 + cm * R2,
        P2=cq * R2 - cm * R1,
        P3=cm * R1 + cq * R2,
        P4=cq * R1 - cm * R2,
    )


def _weights(omega, m):
    if omega < m:
        raise DomainError("omega must not be below the mass")
    norm = 0.5 / math.sqrt(omega)
    return norm * math.sqrt(max(omega - m, 0.0)), norm * math.sqrt(omega + m)


def mode_vectors(mb: MassiveBasis, omega: float, m: float):
    """Negative- and positive-frequency 4-vectors ``(u_a, u_b)`` of the basis."""
    lo, hi = _weights(omega, m)
    ua = np.concatenate([lo * mb.P1, hi * mb.P4])
    ub = np.concatenate([hi * mb.P3, lo * mb.P2])
    return ua, ub


def adapted_mode_vectors(cb: ChiralBasis, omega: float, m: float):
    """Energy eigenvectors adapted to the rotation of the momentum.

    Built from ``(R1 -+ i R2)/sqrt(2)``; they are eigenvectors of
    ``tau_3 (n . sigma)`` with ``n`` normal to the plane spanned by the
    momentum and the third axis, which is conserved while the azimuth of the
    momentum stays fixed.
    """
    lo, hi = _weights(omega, m)
    s = 1.0 / math.sqrt(2.0)
    A = s * (cb.R1 - 1.0j * cb.R2)
    B = s * (cb.R1 + 1.0j * cb.R2)
    return np.concatenate([lo * A, hi * B]), np.concatenate([hi * A, -lo * B])


def reconstruct(ua, ub, alpha: complex, beta: complex, Theta: float) -> np.ndarray:
    """``conj(alpha) e+ u_a + beta e- u_b`` as a 4-vector ``(f, phi)``."""
    ep = cmath.exp(1.0j * Theta)
    return np.conj(alpha) * ep * ua + beta * np.conj(ep) * ub


def project(ua, ub, X: np.ndarray, Theta: float):
    """Inverse of :func:`reconstruct`; returns ``(alpha, beta)``."""
    ep = cmath.exp(1.0j * Theta)
    alpha_conj = np.conj(ep) * np.vdot(ua, X)
    beta = ep * np.vdot(ub, X)
    return complex(np.conj(alpha_conj)), complex(beta)


def reconstruct_mode(mb: MassiveBasis, alpha, beta, Theta, omega, m):
    """Mode spinors ``(f, phi)`` from Bogoliubov amplitudes."""
    ua, ub = mode_vectors(mb, omega, m)
    X = reconstruct(ua, ub, alpha, beta, Theta)
    return X[:2], X[2:]


def project_bogoliubov(mb: MassiveBasis, f, phi, Theta, omega, m):
    """Bogoliubov amplitudes ``(alpha, beta)`` of the mode ``(f, phi)``."""
    ua, ub = mode_vectors(mb, omega, m)
    return project(ua, ub, np.concatenate([f, phi]), Theta)
