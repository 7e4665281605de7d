import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kirillov_lab import coefficients as C, geometry as G, moment as M, specfun
from kirillov_lab.specfun import PoleError, WeightFunction

PRINCIPAL = C.SpectralData("unitary-principal", 0.5j)
W = WeightFunction(2.0)


def one_term():
    return C.synthetic_table({1: 1.0}, PRINCIPAL, N_max=10)


def two_term(a=1.3, b=-0.7 + 0.2j):
    return C.synthetic_table({1: a, 2: b}, PRINCIPAL, N_max=2)


@pytest.fixture(scope="module")
def tau():
    return C.tau_table(1000)


# Dirichlet series -----------------------------------------------------------

def test_l_series_examples(tau):
    assert M.l_series(one_term(), 2.0) == 1
    div = C.divisor_table(0.5j, 100_000)
    target = specfun.riemann_zeta(3 - 0.5j) * specfun.riemann_zeta(3 + 0.5j)
    assert abs(M.l_series(div, 3.0) - target) < 1e-8
    big = C.tau_table(20_000)
    assert abs(M.l_series(big, 3.0, 10_000) - M.l_series(big, 3.0, 20_000)) < 1e-10
    with pytest.raises(ValueError, match="absolute convergence"):
        M.l_series(tau, 1.0)


def test_l_series_tail_bound_honest():
    div = C.divisor_table(0, 20_000)
    val, tail = M.l_series(div, 2.0, 2000, with_error=True)
    assert abs(val - M.l_series(div, 2.0, 20_000)) <= tail


# Moment identity --------------------------------------------------------------

def test_moment_task_validation(tau):
    with pytest.raises(ValueError, match="absolute convergence"):
        M.MomentTask(tau, 0.9, 0.9)
    with pytest.raises(ValueError):
        M.MomentTask(tau, 1.3, 1.3, shifts=(0,))


def test_one_term_moment():
    task = M.MomentTask(one_term(), 1.3, 1.3, W)
    assert abs(M.moment_integral(task).value - specfun.ghat(W, 0)) < 1e-12
    assert abs(M.diagonal_term(one_term(), 1.3, 1.3, W) - specfun.ghat(W, 0)) < 1e-14
    assert M.offdiagonal_sum(one_term(), 1.3, 1.3, W) == 0


@pytest.mark.parametrize("sel", ["tau", "divisor"])
def test_moment_identity(sel, tau):
    tab = tau if sel == "tau" else C.divisor_table(0, 1000)
    rep = M.moment_identity(M.MomentTask(tab, 1.3, 1.3, W, N=1000))
    assert rep.status == "pass"
    assert rep.comparisons[0].rel_diff < 1e-10
    assert abs(rep.leg("integral").value.imag) < 1e-12 * abs(rep.leg("integral").value)


def test_moment_identity_off_line(tau):
    rep = M.moment_identity(M.MomentTask(tau, 1.4 + 0.3j, 1.3 - 0.5j, W, N=600))
    assert rep.comparisons[0].rel_diff < 1e-10


def test_diagonal_brute_force():
    div = C.divisor_table(0.5j, 500)
    n = np.arange(1, 501)
    brute = specfun.ghat(W, 0) * np.sum(np.abs(div.lam[1:]) ** 2 * n**-3.0)
    assert abs(M.diagonal_term(div, 1.5, 1.5, W) - brute) < 1e-12 * abs(brute)
    assert M.diagonal_term(div, 1.5, 1.5, WeightFunction(4.0)) == pytest.approx(2 * M.diagonal_term(div, 1.5, 1.5, W))


def test_offdiagonal_m_tail(tau):
    val, bound = M.offdiagonal_sum(tau, 1.3, 1.3, W, M_max=20, with_error=True)
    full = M.offdiagonal_sum(tau, 1.3, 1.3, W, M_max=40)
    assert abs(full - val) <= bound


def test_homogeneity_c2(tau):
    base = M.moment_identity(M.MomentTask(tau.truncated(400), 1.3, 1.3, W))
    scaled = M.moment_identity(M.MomentTask(tau.truncated(400).scaled(2.0), 1.3, 1.3, W))
    for lg in base.legs:
        assert abs(scaled.leg(lg.name).value - 4 * lg.value) <= 1e-12 * abs(4 * lg.value)
    s1 = M.shifted_convolution_alpha(tau, 1, 3, 6)
    assert abs(M.shifted_convolution_alpha(tau.scaled(2.0), 1, 3, 6) - 4 * s1) < 1e-12 * abs(s1)
    st1 = M.strip_integral(1, 3, tau.truncated(200), 6).value
    assert abs(M.strip_integral(1, 3, tau.truncated(200).scaled(2.0), 6).value - 4 * st1) < 1e-10 * abs(st1)


# Shifted convolutions ---------------------------------------------------------

def test_shifted_convolution_examples():
    assert M.shifted_convolution(one_term(), 1, 4.0) == 0
    div = C.divisor_table(0, 200_000)
    a, b = M.shifted_convolution(div, 1, 4.0, 100_000), M.shifted_convolution(div, 1, 4.0, 200_000)
    assert abs(a - b) < 1e-8
    assert M.shifted_convolution(div, 3, 4.0, 1000) == M.shifted_convolution_alpha(div, 3, 4.0, 0.5, 1000)
    vals = [M.shifted_convolution_alpha(div, 1, xi, 4.0, 1000).real for xi in (2.5, 3.0, 4.0)]
    assert vals[0] > vals[1] > vals[2] > 0
    with pytest.raises(ValueError):
        M.shifted_convolution(div, 1, 1.5)


def test_shifted_convolution_tail_honest():
    div = C.divisor_table(0, 20_000)
    val, tail = M.shifted_convolution_alpha(div, 1, 3.0, 4.0, 2000, with_error=True)
    assert abs(val - M.shifted_convolution_alpha(div, 1, 3.0, 4.0, 20_000)) <= tail


# Strip integral ---------------------------------------------------------------

def test_strip_one_term_vanishes():
    # no pair at distance 1 inside the support {1}; compare with the m = 0 size
    scale = math.gamma(9.0) / (4 * math.pi) ** 9 / math.pi
    assert abs(M.strip_integral(1, 3.0, one_term(), 4.0).value) < 1e-15 * scale


def test_strip_two_term_closed_form():
    a, b = 1.3, -0.7 + 0.2j
    xi, alpha = 3.0, 4.0
    e = xi + 2 * alpha - 1
    closed = a * np.conj(b) * 2 ** (alpha - 0.5) * math.gamma(e) / (8 * math.pi) ** e / math.pi
    got = M.strip_integral(1, xi, two_term(a, b), alpha).value
    assert abs(got - closed) < 1e-6 * abs(closed)
    conv = M.shifted_convolution_alpha(two_term(a, b), 1, xi, alpha)
    assert abs(M.unfolding_constant(xi, alpha) * got - conv) < 1e-10 * abs(conv)


def test_strip_matches_shifted_convolution_divisor():
    div = C.divisor_table(0.5j, 2000)
    lhs = M.shifted_convolution_alpha(div, 1, 3.0, 4.0)
    rhs = M.unfolding_constant(3.0, 4.0) * M.strip_integral(1, 3.0, div, 4.0).value
    assert abs(lhs - rhs) < 1e-3 * abs(lhs)


# Poincare series --------------------------------------------------------------

def test_bump():
    b = M.BumpSpec(0.2)
    assert b.integral() == pytest.approx(1.0, abs=1e-14)
    assert b(0.3) == 0 and b(math.pi) == pytest.approx(b.peak)
    with pytest.raises(ValueError):
        M.BumpSpec(2.0)


def test_poincare_identity_dominates_for_m0():
    # for m >= 1 the identity term carries e^{-2 pi m y} and is swamped by
    # the y^{-xi} decay of the other cosets; the statement is for m = 0
    b = M.BumpSpec(0.2)
    g = G.GroupPoint(0.1, 20.0, 0.0)
    assert abs(M.poincare_series(0, 3.0, b, g) / (20.0**3 * b(0.0)) - 1) < 1e-10


def test_poincare_periodic_within_bound():
    b = M.BumpSpec(0.2)
    v1, e1 = M.poincare_series(1, 3.0, b, G.GroupPoint(0.1, 0.9, 0.3), with_error=True)
    v2, e2 = M.poincare_series(1, 3.0, b, G.GroupPoint(1.1, 0.9, 0.3), with_error=True)
    assert abs(v1 - v2) <= e1 + e2


def _non_identity_cosets(m, xi, b, g, c_max=20, d_max=200):
    total = 0j
    for gam in G.coset_reps(c_max, d_max)[1:]:
        q = G.act(gam, g)
        total += q.y**xi * np.exp(2j * math.pi * m * q.z) * b(q.theta)
    return total


def test_poincare_bump_support():
    b = M.BumpSpec(0.2)
    g_in, g_out = G.GroupPoint(0.1, 3.0, 0.0), G.GroupPoint(0.1, 3.0, 1.2)
    ident = 3.0**3 * np.exp(2j * math.pi * g_in.z) * b(0.0)
    full = M.poincare_series(1, 3.0, b, g_in)
    rest_in = _non_identity_cosets(1, 3.0, b, g_in)
    assert abs(full - (ident + rest_in)) < 1e-12 * abs(full)
    # theta outside the support: the identity term is gone
    assert abs(M.poincare_series(1, 3.0, b, g_out) - _non_identity_cosets(1, 3.0, b, g_out)) < 1e-14


def test_poincare_needs_convergence():
    with pytest.raises(ValueError):
        M.poincare_series(1, 1.0, M.BumpSpec(0.2), G.GroupPoint(0, 1))


# Fundamental-domain quadrature ----------------------------------------------

def test_constant_field_diagnostic():
    # with Phi = 1 the unfolded strip integral vanishes for m >= 1
    res = M.inner_product_fundamental(1, 3.0, M.BumpSpec(0.2), M.ConstantField())
    scale = math.gamma(2.0) / (2 * math.pi) ** 2
    assert abs(res.value) < 1e-3 * scale


def test_conjugation_diagnostic():
    b = M.BumpSpec(0.3)
    grid = M.FundamentalGrid(16, 24, 6, 6, 8)
    field = M.HolomorphicField(C.tau_table(60))
    c = M.inner_product_fundamental(1, np.conj(3.0 + 0.5j), b, field, grid, estimate_error=False).value
    d = M.inner_product_fundamental(1, 3.0 + 0.5j, b, field, grid, estimate_error=False).value
    assert abs(np.conj(d) - c) <= 1e-6 * abs(c)


# Selberg-type inner product -------------------------------------------------

def test_selberg_routes(tau):
    s = M.selberg_inner_product(tau, 1, 4.0)
    q = M.selberg_inner_product_quadrature(tau, 1, 4.0).value
    assert abs(s - q) < 1e-4 * abs(s)
    one = C.synthetic_table({1: 1.0}, C.SpectralData.discrete(6), N_max=5)
    assert M.selberg_inner_product(one, 1, 4.0) == 0
    vals = [abs(M.selberg_inner_product(tau, 1, xi)) for xi in (4.0, 8.0, 16.0)]
    assert vals[0] > vals[1] > vals[2]
    with pytest.raises(ValueError):
        M.selberg_inner_product(C.divisor_table(0, 10), 1, 4.0)


# xi transform -----------------------------------------------------------------

def test_pole_audit():
    assert M.pole_audit(1.6, 1.6, 4, 8, 2.5) == []
    assert any("too high" in p for p in M.pole_audit(1.6, 1.6, 4, 3, 2.5))
    assert any("u + v" in p for p in M.pole_audit(1.6, 1.6, 4, 8, 3.3))
    assert any("floor" in p for p in M.pole_audit(1.6, 1.6, 4, 8, 1.9))


def test_xi_transform_rejects_bad_contour():
    with pytest.raises(PoleError):
        M.xi_transform(C.divisor_table(0.5j, 100), 1, 1.6, 1.6, 4.0, W, c=3.0)


def test_xi_reference_stable():
    div = C.divisor_table(0.5j, 200_000)
    a = M.offdiagonal_inner(div, 1, 1.6, 1.6, W, 100_000)
    b = M.offdiagonal_inner(div, 1, 1.6, 1.6, W, 200_000)
    assert abs(a - b) < 1e-8 * abs(b)


def test_xi_transform_measured_factor():
    div = C.divisor_table(0.5j, 500)
    res = M.xi_transform(div, 1, 1.6, 1.6, 4.0, W, N=500)
    assert abs(2j * math.pi * res.ratio - 1) < 1e-5
    assert res.error < 1e-3 * abs(res.value)


@settings(max_examples=25, deadline=None)
@given(st.floats(1.25, 2.5), st.floats(1.25, 2.5), st.floats(1.0, 4.0))
def test_moment_identity_property(u, v, T):
    tab = C.divisor_table(0, 150)
    rep = M.moment_identity(M.MomentTask(tab, u, v, WeightFunction(T)))
    assert rep.comparisons[0].rel_diff < 1e-9
