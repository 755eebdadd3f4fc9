import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bianchi_fermions.background import (
    BackgroundState,
    Isotropic,
    PowerLaw,
    Static,
    evaluate_background,
)
from bianchi_fermions.errors import DomainError, EvaluationError
from bianchi_fermions.kinematics import (
    CouplingCoefficients,
    CouplingStrategy,
    ModeIndex,
    PhaseAccumulator,
    accumulate_phase,
    adapted_basis,
    coupling_coefficients,
    kinematic_state,
    literal_omega_dot,
    physical_momentum,
    polar_rate,
    projected_paper_basis,
    spherical_wavevector,
)


def _bg(A, Adot=(0, 0, 0), t=0.0):
    return BackgroundState.from_scale_factors(t, A, Adot)


def test_physical_momentum_examples():
    assert physical_momentum(_bg((1, 1, 1)), (3, 4, 0)) == (3.0, 4.0, 0.0)
    assert physical_momentum(_bg((2, 1, 1)), (2, 0, 0)) == (1.0, 0.0, 0.0)
    k = spherical_wavevector(1.0, math.pi / 2, 0.0)
    q = physical_momentum(_bg((1, 1, 1)), k)
    assert q == pytest.approx((1.0, 0.0, 0.0), abs=1e-16)


def test_mode_index_validation():
    with pytest.raises(DomainError):
        ModeIndex((0, 0, 0), 1)
    with pytest.raises(DomainError):
        ModeIndex((1, 0, 0), 0)


def test_static_derivatives_vanish():
    ks = kinematic_state(_bg((1, 2, 3)), ModeIndex((1, 2, 3), 1), 1.0)
    assert ks.qdot == (0.0, 0.0, 0.0) or all(x == 0 for x in ks.qdot)
    assert ks.qnormdot == ks.omegadot == ks.Phidot == 0.0


def test_isotropic_derivatives():
    H = 0.7
    ks = kinematic_state(_bg((2, 2, 2), (2 * H,) * 3), ModeIndex((1, -2, 0.5), 1), 0.3)
    assert ks.qnormdot == pytest.approx(-H * ks.qnorm, rel=1e-14)
    assert ks.Phidot == 0.0
    assert polar_rate(ks) == 0.0


def _kasner_q(t, k):
    A = (t ** (2 / 3), t ** (2 / 3), t ** (-1 / 3))
    return [k[i] / A[i] for i in range(3)]


def test_kasner_derivatives_match_finite_differences(kasner):
    k, m, t, h = (1.0, 1.0, 1.0), 1.0, 1.0, 1e-6
    ks = kinematic_state(evaluate_background(kasner, t), ModeIndex(k, 1), m)

    def scalars(t):
        q = _kasner_q(t, k)
        qn = math.sqrt(sum(x * x for x in q))
        return q, qn, math.sqrt(qn * qn + m * m), math.atan2(q[1], q[0])

    qp, qnp, wp, Php = scalars(t + h)
    qm, qnm, wm, Phm = scalars(t - h)
    for i in range(3):
        assert ks.qdot[i] == pytest.approx((qp[i] - qm[i]) / (2 * h), rel=1e-6)
    assert ks.qnormdot == pytest.approx((qnp - qnm) / (2 * h), rel=1e-6)
    assert ks.omegadot == pytest.approx((wp - wm) / (2 * h), rel=1e-6)
    # Phi is constant for this Kasner (p1 = p2); use an anisotropic transverse pair
    model = PowerLaw((1, 1, 1), (0.2, 0.7, 0.1))
    ks2 = kinematic_state(evaluate_background(model, t), ModeIndex((1.0, 2.0, 0.5), 1), m)

    def phi(t):
        A, _ = model.scale_factors(t)
        return math.atan2(2.0 / A[1], 1.0 / A[0])

    assert ks2.Phidot == pytest.approx((phi(t + h) - phi(t - h)) / (2 * h), rel=1e-6)


def test_zero_momentum_is_domain_error():
    with pytest.raises(DomainError):
        ModeIndex((0.0, 0.0, 0.0), 1)


def test_isotropic_couplings():
    H = 0.4
    bg = _bg((1.5,) * 3, (1.5 * H,) * 3)
    for m in (0.0, 1.3):
        ks = kinematic_state(bg, ModeIndex((0.3, -0.2, 0.9), -1), m)
        c = coupling_coefficients(ks, m, -1)
        assert c.w == pytest.approx(2 * m * m * ks.omegadot / ks.omega**3, abs=1e-16)
        assert c.w_perp == 0.0 and c.w3 == 0.0
        if m == 0.0:
            assert c.w == 0.0


def _fd_couplings(model, k, m, r, t, h=1e-6):
    """Eq.-level coupling evaluation with every derivative by central differences."""

    def state(t):
        A, _ = model.scale_factors(t)
        q = [k[i] / A[i] for i in range(3)]
        qn = math.sqrt(sum(x * x for x in q))
        return q, qn, math.sqrt(qn * qn + m * m), math.atan2(q[1], q[0])

    (q, qn, w, Ph) = state(t)
    qp_, qnp, wp, Php = state(t + h)
    qm_, qnm, wm, Phm = state(t - h)
    qnd = (qnp - qnm) / (2 * h)
    q3d = (qp_[2] - qm_[2]) / (2 * h)
    wd = (wp - wm) / (2 * h)
    Phd = (Php - Phm) / (2 * h)
    qperp = math.hypot(q[0], q[1])
    split = (qn * qn - m * m) / w**2
    cw = (q[2] * qnd - q3d * qn) / (w * qperp) * split + 2 * m * m * wd / w**3
    cperp = r * qperp / w * Phd
    c3 = r * q[2] / w * Phd * split + 2 * r * m * m * qperp * Phd / w**3
    return cw, cperp, c3


def test_kasner_coupling_matches_finite_difference_evaluation(kasner):
    k, m, r, t = (1.0, 0.0, 1.0), 1.0, 1, 1.0
    ks = kinematic_state(evaluate_background(kasner, t), ModeIndex(k, r), m)
    c = coupling_coefficients(ks, m, r)
    fw, fp, f3 = _fd_couplings(kasner, k, m, r, t)
    assert c.w == pytest.approx(fw, rel=1e-6)
    assert c.w_perp == pytest.approx(fp, abs=1e-9)
    assert c.w3 == pytest.approx(f3, abs=1e-9)


def test_general_coupling_matches_finite_difference_evaluation():
    model = PowerLaw((1, 1, 1), (0.2, 0.7, 0.1))
    k, m, t = (1.0, 2.0, 0.5), 0.8, 1.7
    for r in (1, -1):
        ks = kinematic_state(evaluate_background(model, t), ModeIndex(k, r), m)
        c = coupling_coefficients(ks, m, r)
        for got, want in zip((c.w, c.w_perp, c.w3), _fd_couplings(model, k, m, r, t)):
            assert got == pytest.approx(want, rel=1e-6)


def test_regularized_polar_factor_matches_literal(kasner, rng):
    model = PowerLaw((1, 1, 1), (0.2, 0.7, 0.1))
    for _ in range(200):
        k = rng.normal(size=3)
        t = rng.uniform(0.5, 3.0)
        ks = kinematic_state(evaluate_background(model, t), ModeIndex(k, 1), 1.0)
        if ks.qperp / ks.qnorm <= 1e-3:
            continue
        literal = (ks.q3 * ks.qnormdot - ks.q3dot * ks.qnorm) / ks.qperp
        assert ks.qnorm * polar_rate(ks) == pytest.approx(literal, rel=1e-10, abs=1e-14 * ks.qnorm)


def test_on_axis_polar_rate_is_zero(kasner):
    ks = kinematic_state(evaluate_background(kasner, 2.0), ModeIndex((0, 0, 1.5), 1), 1.0)
    assert ks.qperp == 0.0 and polar_rate(ks) == 0.0
    c = coupling_coefficients(ks, 1.0, 1)
    assert math.isfinite(c.w)


@settings(max_examples=200, deadline=None)
@given(
    k=st.tuples(*[st.floats(-5, 5)] * 3).filter(lambda k: sum(x * x for x in k) > 1e-4),
    m=st.floats(0, 3),
    t=st.floats(0.2, 10),
    r=st.sampled_from([1, -1]),
)
def test_kinematic_invariants(k, m, t, r):
    model = PowerLaw((1, 1, 1), (0.2, 0.7, 0.1))
    ks = kinematic_state(evaluate_background(model, t), ModeIndex(k, r), m)
    assert ks.omega**2 == pytest.approx(ks.qnorm**2 + m * m, rel=1e-14)
    assert ks.qperp**2 == pytest.approx(ks.q[0] ** 2 + ks.q[1] ** 2, rel=1e-14, abs=1e-300)
    assert ks.Phi == math.atan2(ks.q[1], ks.q[0])
    assert ks.omega * ks.omegadot == pytest.approx(ks.qnorm * ks.qnormdot, rel=1e-12, abs=1e-300)
    assert ks.omega >= m and ks.omega >= ks.qnorm
    if m > 0 and ks.qnorm > 0:
        assert ks.omega > ks.qnorm or m < 1e-8 * ks.qnorm
    c = coupling_coefficients(ks, m, r)
    cm = coupling_coefficients(kinematic_state(evaluate_background(model, t), ModeIndex(k, -r), m), m, -r)
    assert cm.w == c.w
    assert cm.w_perp == -c.w_perp and cm.w3 == -c.w3


def test_couplings_vanish_linearly_in_static_limit():
    k, m, t = (1.0, 2.0, 0.5), 0.8, 1.0
    prev = None
    for eps in (1e-2, 1e-3, 1e-4):
        model = PowerLaw((1, 1, 1), (0.2 * eps, 0.7 * eps, 0.1 * eps))
        ks = kinematic_state(evaluate_background(model, t), ModeIndex(k, 1), m)
        c = coupling_coefficients(ks, m, 1)
        mag = np.array([c.w, c.w_perp, c.w3])
        if prev is not None:
            assert np.allclose(prev / mag, 10.0, rtol=1e-2)
        prev = mag


def test_strategies_share_in_plane_couplings(kasner):
    ks = kinematic_state(evaluate_background(PowerLaw((1, 1, 1), (0.2, 0.7, 0.1)), 1.3),
                         ModeIndex((1.0, 2.0, 0.5), 1), 0.8)
    lit = literal_omega_dot(ks, 0.8, 1)
    proj = projected_paper_basis(ks, 0.8, 1)
    assert (proj.w, proj.w_perp) == (lit.w, lit.w_perp)
    assert proj.w3 != lit.w3
    ad = adapted_basis(ks, 0.8, 1)
    assert ad.w == pytest.approx(0.8 * ks.qnormdot / ks.omega**2)


def test_user_strategy_and_tuple_results(kasner):
    ks = kinematic_state(evaluate_background(kasner, 1.0), ModeIndex((1, 0, 1), 1), 1.0)
    s = CouplingStrategy.user(lambda ks, m, r: (1.0, 2.0, 3.0), "const")
    assert coupling_coefficients(ks, 1.0, 1, s) == CouplingCoefficients(1.0, 2.0, 3.0)
    bad = CouplingStrategy.user(lambda ks, m, r: (math.nan, 0.0, 0.0), "bad")
    with pytest.raises(EvaluationError):
        coupling_coefficients(ks, 1.0, 1, bad)


def test_phase_examples(kasner):
    acc = accumulate_phase(PhaseAccumulator(1.0), lambda t: 2.0, 4.0)
    assert acc.Theta == pytest.approx(6.0, abs=1e-12)
    acc = accumulate_phase(PhaseAccumulator(0.0), lambda t: t, 2.0)
    assert acc.Theta == pytest.approx(2.0, abs=1e-12)
    with pytest.raises(DomainError):
        accumulate_phase(acc, lambda t: t, 1.0)


def test_phase_matches_trapezoid_oracle(kasner):
    mode = ModeIndex((1.0, 0.0, 1.0), 1)

    def omega(t):
        return kinematic_state(evaluate_background(kasner, t), mode, 1.0).omega

    acc = accumulate_phase(PhaseAccumulator(1.0), omega, 2.0)
    ts = np.linspace(1.0, 2.0, 1_000_001)
    A1 = ts ** (2 / 3)
    A3 = ts ** (-1 / 3)
    w = np.sqrt((1.0 / A1) ** 2 + (1.0 / A3) ** 2 + 1.0)
    oracle = float(np.sum(0.5 * (w[1:] + w[:-1]) * np.diff(ts)))
    assert acc.Theta == pytest.approx(oracle, abs=1e-8)
    # strictly increasing while omega > 0
    mid = accumulate_phase(PhaseAccumulator(1.0), omega, 1.5)
    assert 0.0 < mid.Theta < acc.Theta
