import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from krein_qm import core, repeated as rep
from krein_qm.core import IndefiniteMetric, KreinOperator, NullNormError

from oracles import (
    averaged_operator,
    compositions_colex,
    kron_power,
    multinomial_coefficient,
    symmetric_projection,
)

P03 = np.array([math.sqrt(0.3), math.sqrt(0.7)])


# -- compositions and expansion ---------------------------------------------


@pytest.mark.parametrize("n,N", [(1, 2), (4, 2), (3, 3), (5, 3), (2, 4)])
def test_compositions_match_oracle_order(n, N):
    comps = rep.compositions(n, N)
    assert [tuple(r) for r in comps] == compositions_colex(n, N)
    assert len(comps) == rep.n_compositions(n, N) == math.comb(n + N - 1, N - 1)
    assert np.all(comps.sum(axis=1) == n)


def test_compositions_two_states_start_at_n0():
    np.testing.assert_array_equal(rep.compositions(3, 2), [[3, 0], [2, 1], [1, 2], [0, 3]])


def test_expand_n2():
    c1, c2 = 0.6 - 0.2j, 1.1 + 0.5j
    exp = rep.expand([c1, c2], 2)
    np.testing.assert_allclose(exp.coefficients(), [c1**2, math.sqrt(2) * c1 * c2, c2**2])
    np.testing.assert_allclose(rep.expand([1, 2], 2).coefficients(), [1, 2 * math.sqrt(2), 4])


def test_expand_basis_state():
    exp = rep.expand([1, 0], 7)
    coef = exp.coefficients()
    assert coef[0] == pytest.approx(1.0)
    assert np.count_nonzero(coef) == 1
    assert exp.coefficient((7, 0)) == pytest.approx(1.0)


def test_expand_peak():
    assert rep.expand(P03, 100).peak() == (30, 70)


def test_expand_large_n_no_overflow():
    exp = rep.expand(P03, 2000)
    assert np.all(np.isfinite(exp.log_magnitude))
    assert exp.peak()[0] == math.floor(2001 * 0.3)


def test_expand_errors():
    with pytest.raises(ValueError):
        rep.expand(P03, 0)
    with pytest.raises(ValueError):
        rep.expand([1.0], 3)
    with pytest.raises(ValueError):
        rep.expand([1, 1, 1, 1], 200, max_terms=1000)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 8), N=st.integers(2, 3), seed=st.integers(0, 2**32 - 1))
def test_expand_matches_kronecker_power(n, N, seed):
    if N**n > 4096:
        return
    rng = np.random.default_rng(seed)
    c = rng.normal(size=N) + 1j * rng.normal(size=N)
    comps, proj = symmetric_projection(kron_power(c, n), n, N)
    exp = rep.expand(c, n)
    np.testing.assert_allclose(exp.coefficients(), proj, rtol=1e-12, atol=1e-12 * np.abs(proj).max())
    np.testing.assert_allclose(
        exp.coefficients(), [multinomial_coefficient(c, k) for k in comps], rtol=1e-12, atol=1e-14
    )


def test_expand_term_count():
    for n, N in [(10, 2), (6, 3), (4, 4)]:
        assert len(rep.expand(np.ones(N), n)) == math.comb(n + N - 1, N - 1)


# -- rate operator ------------------------------------------------------------


def test_rate_apply_examples():
    exp = rep.expand([1, 0], 5)
    np.testing.assert_allclose(rep.rate_apply(exp, 0).coefficients(), exp.coefficients())
    c1, c2 = 0.8, 0.3 + 0.1j
    got = rep.rate_apply(rep.expand([c1, c2], 2), 0).coefficients()
    np.testing.assert_allclose(got, [c1**2, math.sqrt(2) * c1 * c2 * 0.5, 0.0])
    with pytest.raises(IndexError):
        rep.rate_apply(exp, 2)


def test_rate_factors_sum_to_one():
    exp = rep.expand([0.3, 0.5, 0.8], 6)
    total = sum(rep.rate_apply(exp, i).coefficients() for i in range(3))
    np.testing.assert_allclose(total, exp.coefficients())


@pytest.mark.parametrize("n", [1, 3, 6])
def test_rate_apply_matches_explicit_projector(n):
    c = np.array([0.4 + 0.3j, -0.9])
    for i in range(2):
        proj = np.zeros((2, 2))
        proj[i, i] = 1
        _, expected = symmetric_projection(averaged_operator(proj, n) @ kron_power(c, n), n, 2)
        np.testing.assert_allclose(rep.rate_apply(rep.expand(c, n), i).coefficients(), expected, atol=1e-12)


# -- averages ------------------------------------------------------------------


def test_average_check_examples():
    A = KreinOperator(np.diag([0.0, 1.0]), IndefiniteMetric.identity(2))
    lhs, rhs = rep.average_check(A, P03, 50)
    assert lhs == pytest.approx(0.7, abs=1e-10) and rhs == pytest.approx(0.7, abs=1e-12)
    B = KreinOperator(np.diag([1.0, 0.0]), IndefiniteMetric.from_signs([1, -1]))
    lhs, rhs = rep.average_check(B, [math.sqrt(3), math.sqrt(2)], 10)
    assert lhs == pytest.approx(3.0, abs=1e-10) and rhs == pytest.approx(3.0, abs=1e-12)
    lhs, rhs = rep.average_check(B, [0.3, 0.9], 1)
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_average_check_null_state():
    B = KreinOperator(np.diag([1.0, 0.0]), IndefiniteMetric.from_signs([1, -1]))
    with pytest.raises(NullNormError):
        rep.average_check(B, [1.0, 1.0], 4)


def test_average_check_reflection_metric():
    rng = np.random.default_rng(8)
    metric = IndefiniteMetric.reflection(2)
    A = core.random_self_adjoint(metric, rng)
    psi = np.array([1.0 + 0.2j, 0.4 - 0.1j])
    lhs, rhs = rep.average_check(A, psi, 12)
    assert abs(lhs - rhs) < 1e-10


@settings(max_examples=25, deadline=None)
@given(n=st.integers(1, 8), indefinite=st.booleans(), seed=st.integers(0, 2**32 - 1))
def test_average_and_norm_match_brute_force(n, indefinite, seed):
    rng = np.random.default_rng(seed)
    signs = np.array([1, -1] if indefinite else [1, 1])
    metric = IndefiniteMetric.from_signs(signs)
    A = core.random_self_adjoint(metric, rng)
    c = rng.normal(size=2) + 1j * rng.normal(size=2)
    norm1 = float(np.sum(signs * np.abs(c) ** 2))
    if abs(norm1) < 0.1 * np.sum(np.abs(c) ** 2):
        return
    psi_n = kron_power(c, n)
    eta_n = np.diag(kron_power(signs, n))
    norm_n = np.vdot(psi_n, eta_n @ psi_n).real
    assert norm_n == pytest.approx(norm1**n, rel=1e-10)
    expected = np.vdot(psi_n, eta_n @ (averaged_operator(A.matrix, n) @ psi_n)) / norm_n
    lhs, rhs = rep.average_check(A, c, n)
    # brute-force sums cancel by up to (sum |c|^2 / |norm|)^n
    cond = (np.sum(np.abs(c) ** 2) / abs(norm1)) ** n * np.linalg.norm(A.matrix, 2)
    assert abs(lhs - expected) <= 1e-14 * cond + 1e-12 * abs(expected)
    assert abs(lhs - rhs) <= 1e-14 * cond + 1e-10 * abs(rhs)


def test_repeated_operator_guard():
    with pytest.raises(ValueError):
        rep.repeated_operator(np.eye(2), 13)


# -- convergence diagnostics -----------------------------------------------------


def test_coefficient_convergence_basis_state():
    for n in (1, 10, 100):
        assert rep.coefficient_convergence([1, 0], 0, n).projective_residual == 0.0


def test_coefficient_convergence_born_rule():
    small = rep.coefficient_convergence(P03, 0, 25)
    big = rep.coefficient_convergence(P03, 0, 400)
    assert big.projective_residual < small.projective_residual
    assert big.projective_residual < 0.15
    assert small.peak_location == (7, 18) and big.peak_location == (120, 280)
    assert big.probability == pytest.approx(0.3)


@pytest.mark.parametrize("p", [0.2, 0.3, 0.5])
@pytest.mark.parametrize("n", [10, 40, 160])
def test_residual_decreases_on_quadrupling(p, n):
    c = [math.sqrt(p), math.sqrt(1 - p)]
    assert rep.coefficient_convergence(c, 0, 4 * n).projective_residual < rep.coefficient_convergence(c, 0, n).projective_residual


def test_coefficient_convergence_is_norm_sign_blind():
    # same moduli as sqrt(3)|+> + sqrt(2)|->: p = 0.6 regardless of the metric
    c = [math.sqrt(3), math.sqrt(2)]
    r = [rep.coefficient_convergence(c, 0, n).projective_residual for n in (25, 100, 400)]
    assert r[0] > r[1] > r[2]
    assert rep.coefficient_convergence(c, 0, 400).probability == pytest.approx(0.6)


def test_bell_curves_normalisation():
    comps, state, projected = rep.bell_curves(P03, 0, 40)
    assert projected.max() == pytest.approx(1.0)
    assert comps.shape == (41, 2)
    ratio = np.divide(projected, state, out=np.zeros_like(state), where=state > 0)
    np.testing.assert_allclose(ratio, comps[:, 0] / 40 / 0.3, rtol=1e-12)


# -- norm moments ------------------------------------------------------------------


def test_norm_moment_examples():
    assert rep.norm_moment([1, -1], [math.sqrt(3), math.sqrt(2)], 0, 1, 7) == pytest.approx(3.0, abs=1e-12)
    for n in (1, 5, 50):
        assert rep.norm_moment([1, 1], P03, 0, 1, n) == pytest.approx(0.3, abs=1e-12)
    assert rep.norm_moment([1, 1], P03, 0, 2, 1000) == pytest.approx(0.09 + 0.21 / 1000, abs=1e-12)


def test_norm_moment_converges_to_weight_power():
    c = [math.sqrt(3), math.sqrt(2)]
    vals = [rep.norm_moment([1, -1], c, 0, 2, n) for n in (10, 100, 1000)]
    errs = [abs(v - 9.0) for v in vals]
    assert errs[0] > errs[1] > errs[2]


def test_norm_moment_null_state():
    with pytest.raises(NullNormError):
        rep.norm_moment([1, -1], [1, 1], 0, 1, 5)


@settings(max_examples=20, deadline=None)
@given(phase=st.floats(-math.pi, math.pi), n=st.integers(1, 60))
def test_norm_moment_phase_invariant(phase, n):
    c = P03 * np.array([1.0, np.exp(1j * phase)])
    assert rep.norm_moment([1, 1], c, 0, 2, n) == pytest.approx(rep.norm_moment([1, 1], P03, 0, 2, n), rel=1e-12)


# -- gaussian summary and products ----------------------------------------------------


def test_gaussian_summary():
    g = rep.gaussian_summary(P03, 1000)
    np.testing.assert_allclose(g.mu, [300, 700])
    assert g.sigma2[0, 0] == pytest.approx(210)
    np.testing.assert_allclose(g.empirical_mu, g.mu, rtol=1e-10)
    np.testing.assert_allclose(g.empirical_sigma2, g.sigma2, rtol=0.05)
    assert np.all(rep.gaussian_summary([1, 0], 50).sigma2 == 0)


def test_product_operator_moment():
    assert rep.product_operator_moment([1, 1], P03, 30) == pytest.approx((1.0, 0.0))
    half = [math.sqrt(0.5), math.sqrt(0.5)]
    for n in (2, 10, 20):
        mean, var = rep.product_operator_moment([1, -1], half, n)
        assert abs(mean) < 1e-12 and var == pytest.approx(1.0)
    c = [math.sqrt(0.9), math.sqrt(0.1)]
    for n in (5, 10, 20):
        assert rep.product_operator_moment([1, -1], c, n)[0] == pytest.approx(0.8**n, rel=1e-10)


def test_product_operator_moment_brute_force():
    c = np.array([math.sqrt(0.7), math.sqrt(0.3)])
    a = np.array([1.0, -1.0])
    n = 6
    w = np.abs(kron_power(c, n)) ** 2
    vals = kron_power(a, n).real
    mean, var = rep.product_operator_moment(a, c, n)
    assert mean == pytest.approx(w @ vals)
    assert var == pytest.approx(w @ vals**2 - (w @ vals) ** 2)


def test_commutator_scaling():
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    y = np.array([[0, -1j], [1j, 0]])
    assert rep.commutator_scaling_check(x, y, 2) < 1e-12
    assert rep.commutator_scaling_check(np.diag([1.0, 2.0]), np.diag([3.0, -1.0]), 3) < 1e-12
    rng = np.random.default_rng(9)
    metric = IndefiniteMetric.from_signs([1, -1])
    A, B = core.random_self_adjoint(metric, rng), core.random_self_adjoint(metric, rng)
    assert rep.commutator_scaling_check(A, B, 3) < 1e-12
    with pytest.raises(ValueError):
        rep.commutator_scaling_check(x, y, 13)
