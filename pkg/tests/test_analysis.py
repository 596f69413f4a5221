import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nngp_kl.analysis import (
    error_matrix,
    exact_difference,
    leading_term,
    second_order_remainder,
    shrinkage_intermediates,
    shrinkage_report,
    spectral_identity_check,
)
from nngp_kl.covariance import KernelSpec, ThreePointCorr, cov_matrix, three_point_corr_matrix, uniform_locations
from nngp_kl.numerics import inverse, sym_eig
from nngp_kl.vecchia import (
    NeighborDag,
    Ordering,
    build_neighbor_dag,
    build_ordering,
    precision_from_factor,
    vecchia_factor,
)

from conftest import random_spd


def problem(n=40, m=3, seed=0, family="exponential", phi=0.3):
    locs = uniform_locations(n, seed)
    locs = locs.take(build_ordering(locs).perm)
    return cov_matrix(KernelSpec(family, 1.0, phi), locs), build_neighbor_dag(locs, Ordering.identity(n), m)


def test_error_matrix_examples():
    c = random_spd(6, 0)
    assert np.max(np.abs(error_matrix(c, NeighborDag.saturated(6)))) < 1e-9
    np.testing.assert_array_equal(error_matrix(np.eye(4), NeighborDag.empty(4)), np.zeros((4, 4)))
    r = three_point_corr_matrix(ThreePointCorr(0.5, 0.25, 0.5))
    assert np.max(np.abs(error_matrix(r, NeighborDag.chain(3)))) < 1e-10


def test_error_matrix_symmetric():
    c, dag = problem()
    e = error_matrix(c, dag)
    assert np.array_equal(e, e.T)


def test_leading_term_examples():
    c, dag = problem(20, 2)
    e = error_matrix(c, dag)
    pt = precision_from_factor(vecchia_factor(c, dag))
    np.testing.assert_array_equal(leading_term(pt, 0.0, e), e)
    np.testing.assert_array_equal(leading_term(pt, 0.7, np.zeros((20, 20))), np.zeros((20, 20)))
    np.testing.assert_allclose(leading_term(np.eye(3), 1.0, np.eye(3)), 0.25 * np.eye(3), atol=1e-16)


def test_leading_term_against_explicit_product():
    c, dag = problem(25, 3, seed=2)
    pt = precision_from_factor(vecchia_factor(c, dag))
    e = error_matrix(c, dag)
    s = np.linalg.inv(np.eye(25) + 0.3 * pt)
    b = leading_term(pt, 0.3, e)
    assert np.linalg.norm(b - s @ e @ s) / np.linalg.norm(b) < 1e-9


def test_leading_term_unsimplified_form():
    # the form before simplification: (I - Pt M*^-1) E (I - M*^-1 Pt)
    c, dag = problem(15, 2, seed=3)
    tau2 = 0.5
    it = shrinkage_intermediates(c, tau2, dag)
    pt = it.c_tilde_prec
    w = np.eye(15) - pt @ np.linalg.inv(it.m_star)
    b_raw = w @ it.e @ w.T
    assert np.linalg.norm(b_raw - it.b) / np.linalg.norm(it.b) < 1e-8


def test_spectral_identity_examples():
    assert spectral_identity_check(np.eye(3), 1.0) < 1e-12
    assert spectral_identity_check(np.diag([1.0, 2.0]), 0.5) < 1e-12
    assert spectral_identity_check(random_spd(10, 4), 0.3) < 1e-9
    with pytest.raises(ValueError):
        spectral_identity_check(np.eye(2), 0.0)


def test_spectral_identity_diagonal_scalar_form():
    # per eigenvalue q: 1 - q / (q + 1/t) == 1 / (1 + t q)
    q, t = np.array([1.0, 2.0]), 0.5
    lhs = 1 - q / (q + 1 / t)
    np.testing.assert_allclose(lhs, 1 / (1 + t * q), rtol=1e-15)


def test_exact_difference_examples():
    c = random_spd(6, 1)
    assert np.max(np.abs(exact_difference(c, 0.4, NeighborDag.saturated(6)))) < 1e-9
    c, dag = problem(20, 2)
    np.testing.assert_allclose(exact_difference(c, 0.0, dag), error_matrix(c, dag), atol=1e-10 * np.abs(error_matrix(c, dag)).max())


def test_remainder_closed_form_matches_subtraction():
    for seed, m, tau2 in [(0, 1, 0.1), (1, 3, 1.0), (2, 5, 10.0)]:
        c, dag = problem(30, m, seed)
        it = shrinkage_intermediates(c, tau2, dag)
        naive = it.delta - it.b
        exact = second_order_remainder(c, it.c_tilde_prec, tau2, it.e)
        assert np.linalg.norm(naive - exact) <= 1e-8 * np.linalg.norm(exact) + 1e-12


def test_remainder_is_second_order_in_scaled_error():
    # Pt = P - s E0: remainder scales like s^2 as s -> 0
    c = random_spd(6, 9)
    p = inverse(c)
    e0 = random_spd(6, 10) * 1e-2
    rems = []
    for s in (1e-1, 1e-2, 1e-3):
        pt = p - s * e0
        rems.append(np.linalg.norm(second_order_remainder(c, pt, 0.5, s * e0)))
    assert rems[0] / rems[1] == pytest.approx(100, rel=0.05)
    assert rems[1] / rems[2] == pytest.approx(100, rel=0.05)


def test_report_tau_zero():
    c, dag = problem(30, 2)
    rep = shrinkage_report(c, 0.0, dag)
    assert rep.ratio_shrink == 1.0
    assert rep.norm_remainder == 0.0
    assert rep.bound_holds


def test_report_saturated():
    c = random_spd(8, 2)
    rep = shrinkage_report(c, 0.5, NeighborDag.saturated(8))
    assert rep.norm_e < 1e-9 and rep.norm_b < 1e-9 and rep.norm_delta < 1e-9
    assert rep.bound_holds


def test_report_exact_zero_error():
    rep = shrinkage_report(np.eye(4), 0.5, NeighborDag.empty(4))
    assert rep.norm_e == 0.0 and rep.bound_holds
    assert np.isnan(rep.ratio_shrink)


# regression anchor: 50 uniform points (seed 0), exponential sigma2=1 phi=0.3, m=3, delta2=0.5
ANCHOR_RATIO_SHRINK = 0.19322552337751603


def test_report_regression_anchor():
    c, dag = problem(50, 3, seed=0)
    rep = shrinkage_report(c, 0.5, dag)
    assert rep.ratio_shrink < 1
    assert rep.ratio_shrink == pytest.approx(ANCHOR_RATIO_SHRINK, rel=1e-9)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(3, 30), m=st.integers(1, 4), seed=st.integers(0, 1000), tau2=st.floats(1e-3, 20))
def test_bound_and_strictness(n, m, seed, tau2):
    c, dag = problem(n, m, seed)
    rep = shrinkage_report(c, tau2, dag)
    assert rep.bound_holds
    assert rep.norm_b <= rep.norm_e * (1 + 1e-12)
    if rep.norm_e > 1e-8:
        assert rep.ratio_shrink < 1 - 1e-10


def test_shrinkage_monotone_in_noise():
    for seed in range(5):
        c, dag = problem(30, 2, seed)
        ratios = [shrinkage_report(c, t, dag).ratio_shrink for t in (0, 0.01, 0.1, 0.5, 1, 5, 20)]
        assert all(b <= a * (1 + 1e-12) for a, b in zip(ratios, ratios[1:])), ratios


def test_bound_via_eigendecomposition():
    # B = P^T S_d P E P^T S_d P with S_d diagonal in (0, 1]
    c, dag = problem(20, 2, seed=4)
    tau2 = 0.8
    it = shrinkage_intermediates(c, tau2, dag)
    eig = sym_eig(np.eye(20) + tau2 * it.c_tilde_prec)
    p = eig.vectors
    inner = p @ it.e @ p.T
    sd = 1 / eig.values
    b_rot = sd[:, None] * inner * sd[None, :]
    assert np.linalg.norm(b_rot) == pytest.approx(np.linalg.norm(it.b), rel=1e-9)
    assert np.linalg.norm(inner) == pytest.approx(np.linalg.norm(it.e), rel=1e-10)
    assert np.all(sd <= 1)


def test_determinant_shrinks():
    checked = 0
    for seed in range(6):
        c, dag = problem(12, 2, seed)
        rep = shrinkage_report(c, 0.5, dag)
        if rep.logabsdet_e > np.log(1e-300):
            assert rep.logabsdet_b <= rep.logabsdet_e
            checked += 1
    assert checked > 0


def test_k_error_reported_not_asserted():
    c, dag = problem(30, 3)
    rep = shrinkage_report(c, 0.5, dag)
    assert np.isfinite(rep.norm_k_error) and rep.norm_k_error > 0
    assert np.isfinite(rep.norm2_e) and rep.norm2_b <= rep.norm2_e * (1 + 1e-12)
