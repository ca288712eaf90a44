import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from krein_qm import core, oscillation as osc
from krein_qm.oscillation import SterileParams, TwoStateParams

from oracles import sterile_rates, two_state_rates


# -- two-state oscillation ----------------------------------------------------


def test_p_plus_examples():
    assert osc.p_plus(TwoStateParams(0.0), 1.3) == 0.0
    assert osc.p_plus(TwoStateParams(0.5), 0.0) == 0.0
    assert osc.p_plus(TwoStateParams(0.5), math.pi) == pytest.approx(osc.p_plus_max(0.5), rel=1e-14)
    assert osc.p_plus_max(0.5) == pytest.approx(math.tanh(1) ** 2 / (1 + math.tanh(1) ** 2))
    for th in (0.1, 1.0, 5.0):
        assert osc.p_plus_max(th) < 0.5


def test_p_plus_matches_coth_form():
    th, x = 0.7, np.linspace(0.1, 6, 17)
    coth2 = 1 / math.tanh(2 * th) ** 2
    expected = np.sin(x / 2) ** 2 / (coth2 - np.cos(x))
    np.testing.assert_allclose(osc.p_plus(TwoStateParams(th), x), expected, rtol=1e-13)


@settings(max_examples=60, deadline=None)
@given(
    theta=st.floats(0.0, 3.0),
    e_plus=st.floats(-3.0, 3.0),
    e_minus=st.floats(-3.0, 3.0),
    t=st.floats(0.0, 20.0),
)
def test_evolution_matches_closed_form(theta, e_plus, e_minus, t):
    params = TwoStateParams(theta, e_plus, e_minus)
    pp, pm = osc.evolve_oracle(params, t)
    assert pp + pm == pytest.approx(1.0, abs=1e-12)
    assert pp == pytest.approx(osc.p_plus(params, t), abs=1e-10)
    assert pm >= 0.5 - 1e-12


@pytest.mark.parametrize("theta", [0.0, 0.2, 0.9, 2.0])
def test_closed_form_matches_expm_oracle(theta):
    params = TwoStateParams(theta, 1.7, -0.4)
    for t in np.linspace(0, 9, 13):
        ref_p, ref_m = two_state_rates(theta, 1.7, -0.4, t)
        assert osc.p_plus(params, t) == pytest.approx(ref_p, abs=1e-12)
        assert osc.p_minus(params, t) == pytest.approx(ref_m, abs=1e-12)


def test_two_state_system_shape():
    H, A, psi0 = osc.two_state_system(TwoStateParams(0.4, 2.0, 0.5))
    assert core.is_self_adjoint(H) and core.is_self_adjoint(A)
    assert core.inner_product(A.metric, psi0, psi0).real == pytest.approx(-1.0)


# -- time averages ---------------------------------------------------------------


@pytest.mark.parametrize("theta", [0.1, 0.5, 1.0, 2.0])
def test_time_average_closed_form(theta):
    avg = osc.time_average_p_plus(theta)
    assert avg.numerical == pytest.approx(0.5 * (1 - math.cosh(4 * theta) ** -0.5), abs=1e-6)
    assert avg.matches()["closed_form"]
    assert not avg.matches()["literal"]


def test_time_average_values():
    avg = osc.time_average_p_plus(0.5)
    assert avg.closed_form == pytest.approx(0.24222, abs=1e-5)
    assert avg.literal > 1
    assert osc.time_average_p_plus(5.0).numerical == pytest.approx(0.5, abs=1e-4)
    assert osc.time_average_p_plus(0.0).numerical == 0.0


# -- three active plus one sterile ----------------------------------------------------


def test_s_factor():
    assert osc.s_factor(1.0, 1.0) == pytest.approx(math.sin(1.267) ** 2, rel=1e-14)
    assert osc.s_factor(1.0, 1.0) == pytest.approx(0.910512, abs=1e-6)
    assert osc.s_factor(0.0, 5.0) == 0.0
    np.testing.assert_allclose(osc.s_factor(np.array([0.0, 1.0]), 1.0), [0.0, math.sin(1.267) ** 2])
    with pytest.raises(ValueError):
        osc.s_factor(-1.0, 1.0)
    with pytest.raises(ValueError):
        osc.s_factor(1.0, -1.0)


def test_prob_3m1_examples():
    zero = SterileParams()
    for S in (0.0, 0.3, 1.0):
        assert osc.prob_3m1(("mu", "mu"), S, zero) == pytest.approx(1.0)
        assert osc.prob_3m1(("mu", "e"), S, zero) == 0.0
    p = SterileParams(0.1, 0.2, 0.0)
    assert osc.prob_3m1(("mu", "e"), 0.0, p) == 0.0
    assert osc.prob_3m1(("mu", "mu"), 0.0, p) == pytest.approx(1.0)


def test_prob_3m1_asymmetric_channels():
    p = SterileParams(0.1, 0.4, 0.2)
    assert osc.prob_3m1(("mu", "e"), 0.5, p) != pytest.approx(osc.prob_3m1(("e", "mu"), 0.5, p), rel=1e-6)


def test_prob_3m1_errors():
    p = SterileParams(0.1, 0.2, 0.3)
    with pytest.raises(ValueError):
        osc.prob_3m1(("mu", "e"), 1.5, p)
    with pytest.raises(ValueError):
        osc.prob_3m1(("mu", "e"), -0.1, p)
    with pytest.raises(ValueError):
        osc.prob_3m1(("mu", "x"), 0.5, p)
    with pytest.raises(ValueError):
        p.angle("s")


@settings(max_examples=60, deadline=None)
@given(
    angles=st.tuples(st.floats(0, 1.5), st.floats(0, 1.5), st.floats(0, 1.5)),
    dm2=st.floats(0.0, 50.0),
    loe=st.floats(0.0, 5.0),
)
def test_prob_3m1_matches_explicit_evolution(angles, dm2, loe):
    params = SterileParams(*angles, dm2=dm2, L_over_E=loe)
    phase = 2 * osc.OSCILLATION_PHASE_CONSTANT * dm2 * loe
    S = params.S
    assert S == pytest.approx(math.sin(phase / 2) ** 2, abs=1e-12)
    for i, src in enumerate(osc.FLAVOURS):
        rates = sterile_rates(np.sinh(angles), i, phase)
        row = [osc.prob_3m1((src, dst), S, params) for dst in osc.FLAVOURS]
        np.testing.assert_allclose(row, rates[:3], rtol=1e-9, atol=1e-12)
        assert sum(row) <= 1 + 1e-12


def test_prob_3p1_examples():
    p = SterileParams(0.1, 0.2, 0.0)
    ue, um = math.sin(0.1) ** 2, math.sin(0.2) ** 2
    assert osc.prob_3p1(("mu", "e"), 0.4, p) == pytest.approx(4 * ue * um * 0.4)
    assert osc.prob_3p1(("mu", "mu"), 0.4, p) == pytest.approx(1 - 4 * um * (1 - um) * 0.4)
    assert osc.prob_3p1(("e", "tau"), 1.0, p) == 0.0


def test_active_sterile_probability():
    theta = np.array([0.0, 0.2, 1.0])
    dm2 = np.full(3, 2.0)
    S = osc.s_factor(2.0, 0.7)
    np.testing.assert_allclose(osc.active_sterile_probability("3p1", dm2, theta, 0.7), np.sin(2 * theta) ** 2 * S)
    got = osc.active_sterile_probability("3m1", dm2, theta, 0.7)
    t = 2 * osc.OSCILLATION_PHASE_CONSTANT * 2.0 * 0.7
    expected = [osc.p_plus(TwoStateParams(th), t) for th in theta]
    np.testing.assert_allclose(got, expected, atol=1e-14)
    with pytest.raises(ValueError):
        osc.active_sterile_probability("2p2", dm2, theta, 0.7)


# -- contours ------------------------------------------------------------------------


DM2 = np.logspace(-2, 2, 120)
THETA = np.logspace(-3, 0, 120)


def test_contour_unreachable_level_is_empty():
    for c in osc.contour_scan("as", [2.0], DM2, THETA):
        assert len(c) == 0


def test_contour_single_theta_is_empty():
    for c in osc.contour_scan("as", [0.1], DM2, [0.0]):
        assert len(c) == 0


def test_contour_cells_bracket_level():
    for c in osc.contour_scan("as", [0.1], DM2, THETA):
        assert len(c) > 0
        i, j = c.indices.T
        P = osc.active_sterile_probability(c.model, *np.meshgrid(DM2, THETA, indexing="ij"), 1.0)
        corners = np.stack([P[i, j], P[i + 1, j], P[i, j + 1], P[i + 1, j + 1]])
        assert np.all(corners.max(axis=0) >= 0.1) and np.all(corners.min(axis=0) < 0.1)


def test_contour_3m1_reaches_lower_dm2_at_large_theta():
    big = THETA[THETA > 0.6]
    by_model = {c.model: c for c in osc.contour_scan("as", [0.1], DM2, big)}
    assert by_model["3m1"].cells[:, 0].min() < by_model["3p1"].cells[:, 0].min()


def test_contour_flavour_channel():
    out = osc.contour_scan(("mu", "e"), [0.01], DM2, THETA, models=("3m1",))
    assert len(out) == 1 and len(out[0]) > 0
    dis = osc.contour_scan(("mu", "mu"), [0.01], DM2, THETA, models=("3p1",))
    assert len(dis[0]) > 0


def test_contour_grid_errors():
    with pytest.raises(ValueError):
        osc.contour_scan("as", [0.1], [], THETA)
    with pytest.raises(ValueError):
        osc.contour_scan("as", [0.1], DM2, THETA[::-1])
    with pytest.raises(ValueError):
        osc.contour_scan("as", [0.1], [1.0, 1.0, 2.0], THETA)
