"""Energy-momentum tensor and number density by momentum-space quadrature.

Each mixed component is

    T^mu_nu = 1 / ((2 pi)^3 a^4) * sum_r  integral d^3k  integrand_mu_nu

with per-mode integrands built from the kernels X, Y, Z of ``(S, U, V)``.
No renormalization is attempted: the integrals are cut off at
``[k_min, k_max]`` and reported as they are, so they depend on the cutoff.

The grid uses Gauss-Legendre nodes in ``ln k`` and ``cos(theta)`` and
uniform, half-offset azimuth nodes.  An even number of polar nodes keeps
``q3 != 0`` and the half offset keeps ``q1, q2 != 0``, which excludes the
poles of Y (at ``q3 = 0``) and Z (at ``qperp = 0``).

Reductions run in a fixed order (helicity, then k, theta, phi index) through
``math.fsum``, so results do not depend on how the per-mode work was
scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Dict, Mapping, Sequence

import numpy as np

from .background import BackgroundState
from .errors import DomainError, InputError
from .kinematics import KinematicState, ModeIndex, kinematic_state

__all__ = [
    "KernelValues",
    "MomentumGrid",
    "StressTensor",
    "kernels",
    "stress_integrand",
    "integrate_stress",
    "perp_trace_integral",
    "number_density",
    "HELICITIES",
]

HELICITIES = (1, -1)
COMPONENTS = ("T00", "T11", "T22", "T33", "T12", "T13", "T23")


@dataclass(frozen=True, slots=True)
class KernelValues:
    X: float
    Y: float
    Z: float


def kernels(suv, ks: KinematicState, m: float) -> KernelValues:
    if ks.qperp == 0.0 or ks.q3 == 0.0:
        raise DomainError("kernels are singular at qperp = 0 or q3 = 0")
    w = ks.omega
    w2 = w * w
    split = (ks.qnorm**2 - m * m) / w2
    common = suv.S / w + m * m * suv.U / (w2 * w)
    X = common + 0.5 * ks.q3 * suv.U / (w * ks.qperp) * split
    Y = common - 0.5 * ks.qperp * suv.U / (w * ks.q3) * split
    Z = -0.5 * suv.V / ks.qperp
    return KernelValues(X, Y, Z)


def stress_integrand(suv, ks: KinematicState, m: float, t23_z_sign: float = -1.0):
    """The seven per-mode integrands ``(T00, T11, T22, T33, T12, T13, T23)``.

    ``T12`` carries ``qperp**3`` and ``T23`` the term ``-Z cos(Phi)``, both as
    printed; ``t23_z_sign=+1`` selects the alternative ``+Z cos(Phi)``.
    """
    kv = kernels(suv, ks, m)
    X, Y, Z = kv.X, kv.Y, kv.Z
    qp, q3 = ks.qperp, ks.q3
    c1, s1 = math.cos(ks.Phi), math.sin(ks.Phi)
    c2, s2 = math.cos(2.0 * ks.Phi), math.sin(2.0 * ks.Phi)
    qp2 = qp * qp
    return (
        ks.omega * suv.S,
        qp2 * (X + X * c2 - Z * s2),
        qp2 * (X - X * c2 + Z * s2),
        q3 * q3 * Y,
        qp2 * qp * X * s2,
        qp * q3 * ((X + Y) * c1 - Z * s1),
        qp * q3 * ((X + Y) * s1 + t23_z_sign * Z * c1),
    )


@dataclass(frozen=True)
class MomentumGrid:
    """Quadrature nodes over comoving momentum space.

    Node ``i`` has magnitude ``k[i]``, polar cosine ``costheta[i]``, azimuth
    ``phi[i]`` and weight ``weight[i]``, which includes the ``k^3`` Jacobian of
    ``d^3k = k^3 d(ln k) d(cos theta) d(phi)``.  Nodes are ordered k-major,
    then theta, then phi.
    """

    k_min: float
    k_max: float
    n_k: int
    n_theta: int
    n_phi: int

    def __post_init__(self):
        if not self.k_min > 0:
            raise DomainError("k_min must be positive")
        if not self.k_max > self.k_min:
            raise DomainError("k_max must exceed k_min")
        if min(self.n_k, self.n_theta, self.n_phi) < 2:
            raise DomainError("every grid dimension needs at least 2 nodes")
        if self.n_theta % 2:
            raise DomainError("n_theta must be even")
        lk, wk = np.polynomial.legendre.leggauss(self.n_k)
        lo, hi = math.log(self.k_min), math.log(self.k_max)
        lnk = 0.5 * (hi - lo) * lk + 0.5 * (hi + lo)
        wlnk = 0.5 * (hi - lo) * wk
        ct, wct = np.polynomial.legendre.leggauss(self.n_theta)
        phi = (np.arange(self.n_phi) + 0.5) * (2.0 * math.pi / self.n_phi)
        wphi = 2.0 * math.pi / self.n_phi
        K, CT, PH = np.meshgrid(np.exp(lnk), ct, phi, indexing="ij")
        W = np.einsum("i,j->ij", wlnk * np.exp(3.0 * lnk), wct)[:, :, None] * wphi
        W = np.broadcast_to(W, K.shape)
        object.__setattr__(self, "k", K.ravel().copy())
        object.__setattr__(self, "costheta", CT.ravel().copy())
        object.__setattr__(self, "phi", PH.ravel().copy())
        object.__setattr__(self, "weight", W.ravel().copy())

    @property
    def size(self) -> int:
        return self.k.size

    def wavevector(self, i: int):
        k, ct, ph = float(self.k[i]), float(self.costheta[i]), float(self.phi[i])
        st = math.sqrt(max(1.0 - ct * ct, 0.0))
        return (k * st * math.cos(ph), k * st * math.sin(ph), k * ct)

    def modes(self):
        """All ``(node, r)`` mode indices, helicity-major."""
        return [(i, r) for r in HELICITIES for i in range(self.size)]


@dataclass(frozen=True)
class StressTensor:
    """Mixed components ``T^mu_nu`` and the number density at one time.

    ``T^0_i`` vanish identically and are not stored.
    """

    T00: float
    T11: float
    T22: float
    T33: float
    T12: float
    T13: float
    T23: float
    n: float

    def as_tuple(self):
        return tuple(getattr(self, f.name) for f in fields(self))


def _states_for(states: Mapping, r: int, size: int):
    try:
        seq = states[r]
    except (KeyError, IndexError):
        raise InputError(f"no mode states for helicity r={r:+d}") from None
    if len(seq) != size:
        raise InputError(f"expected {size} mode states for r={r:+d}, got {len(seq)}")
    for i, s in enumerate(seq):
        if s is None:
            raise InputError(f"missing state for node {i}, r={r:+d}")
    return seq


def _node_kinematics(grid, bg, m, r, i):
    return kinematic_state(bg, ModeIndex(grid.wavevector(i), r), m)


def integrate_stress(
    grid: MomentumGrid,
    states: Mapping[int, Sequence],
    bg: BackgroundState,
    m: float,
    t23_z_sign: float = -1.0,
) -> StressTensor:
    """Assemble ``T^mu_nu`` and ``n`` at one time.

    Parameters
    ----------
    states : mapping
        ``states[r][i]`` is the SUV state (anything with ``S, U, V``) of grid
        node ``i`` and helicity ``r``, for both ``r = +1`` and ``r = -1``.
    """
    terms = [[] for _ in COMPONENTS]
    n_terms = []
    for r in HELICITIES:
        seq = _states_for(states, r, grid.size)
        for i in range(grid.size):
            ks = _node_kinematics(grid, bg, m, r, i)
            wgt = float(grid.weight[i])
            for bucket, val in zip(terms, stress_integrand(seq[i], ks, m, t23_z_sign)):
                bucket.append(wgt * val)
            n_terms.append(wgt * seq[i].S)
    pref = 1.0 / ((2.0 * math.pi) ** 3 * bg.a**4)
    comps = [pref * math.fsum(b) for b in terms]
    n = math.fsum(n_terms) / ((2.0 * math.pi) ** 3 * bg.a**3)
    return StressTensor(*comps, n=n)


def perp_trace_integral(grid, states, bg, m) -> float:
    """``1/((2pi)^3 a^4) sum_r integral 2 qperp^2 X``; equals ``T11 + T22``."""
    terms = []
    for r in HELICITIES:
        seq = _states_for(states, r, grid.size)
        for i in range(grid.size):
            ks = _node_kinematics(grid, bg, m, r, i)
            X = kernels(seq[i], ks, m).X
            terms.append(float(grid.weight[i]) * 2.0 * ks.qperp**2 * X)
    return math.fsum(terms) / ((2.0 * math.pi) ** 3 * bg.a**4)


def number_density(grid: MomentumGrid, S: Mapping[int, Sequence[float]], bg: BackgroundState) -> float:
    """``n = (2pi)^-3 a^-3 sum_r integral d^3k S``.

    ``S[r][i]`` is the occupation of node ``i`` with helicity ``r``.
    """
    terms = []
    for r in HELICITIES:
        seq = _states_for(S, r, grid.size)
        terms.extend(float(grid.weight[i]) * float(seq[i]) for i in range(grid.size))
    return math.fsum(terms) / ((2.0 * math.pi) ** 3 * bg.a**3)
