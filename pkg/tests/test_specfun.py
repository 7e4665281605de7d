import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kirillov_lab import specfun as S


def test_gamma_examples():
    assert S.gamma_complex(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-13)
    assert S.gamma_complex(5) == pytest.approx(24, rel=1e-13)
    s = 0.7 + 3j
    assert abs(S.gamma_complex(s + 1) / (s * S.gamma_complex(s)) - 1) < 1e-12


@pytest.mark.parametrize("s", [0.3 + 0.2j, -2.5 + 7j, 4 - 30j, 1.5 + 45j])
def test_gamma_against_mpmath(s):
    assert abs(S.gamma_complex(s) / complex(mp.gamma(s)) - 1) < 1e-12


def test_gamma_outside_box_warns():
    with pytest.warns(S.QuadratureWarning):
        S.gamma_complex(1 + 60j)


def test_rgamma_zero_at_poles():
    assert S.rgamma(-3) == 0
    assert abs(S.rgamma(2.5) * S.gamma_complex(2.5) - 1) < 1e-13


def test_bessel_half_order():
    assert S.bessel_k(0.5, 1.0) == pytest.approx(math.sqrt(math.pi / 2) * math.exp(-1), rel=1e-13)


def test_bessel_large_x_asymptotic():
    x = 40.0
    ratio = S.bessel_k(0.3j, x) / (math.sqrt(math.pi / (2 * x)) * math.exp(-x))
    assert abs(ratio - 1) < 1e-2


def test_bessel_two_routes_agree():
    assert abs(S.bessel_k(1j, 1.0) - S.bessel_k_series(1j, 1.0)) < 1e-10


@pytest.mark.parametrize("nu", [0.3j, 1j, 13.78j, 0.25, 2.5])
@pytest.mark.parametrize("x", [0.05, 1.0, 7.5, 30.0])
def test_bessel_against_mpmath(nu, x):
    ref = complex(mp.besselk(nu, x))
    assert abs(S.bessel_k(nu, x) - ref) <= 1e-11 * abs(ref) + 1e-300


def test_bessel_ode():
    nu, h = 0.7j, 1e-4
    for x in np.linspace(0.3, 6, 20):
        k0, kp, km = (S.bessel_k(nu, x + d) for d in (0.0, h, -h))
        d2, d1 = (kp - 2 * k0 + km) / h**2, (kp - km) / (2 * h)
        assert abs(x * x * d2 + x * d1 - (x * x + nu * nu) * k0) < 1e-6


def test_zeta_examples():
    assert abs(S.riemann_zeta(2) - math.pi**2 / 6) < 1e-12
    assert abs(S.riemann_zeta(4) - math.pi**4 / 90) < 1e-12
    assert abs(S.riemann_zeta(0.5 + 14j) - complex(mp.zeta(0.5 + 14j))) < 1e-10
    with pytest.raises(S.PoleError):
        S.riemann_zeta(1)


def test_zeta_divisor_partial_sums():
    N = 20000
    d = np.zeros(N + 1)
    for k in range(1, N + 1):
        d[k::k] += 1
    n = np.arange(1, N + 1)
    partial = np.sum(d[1:] / n**3.0)
    assert abs(partial - S.riemann_zeta(3) ** 2) < 1e-6


def test_zeta_functional_equation():
    assert abs(S.zeta_functional(-1) + 1 / 12) < 1e-12


def test_integrate_examples():
    assert S.integrate(lambda u: np.exp(-u), 0, np.inf).value == pytest.approx(1, rel=1e-12)
    assert S.integrate(lambda u: u**3 * np.exp(-u), 0, np.inf).value == pytest.approx(6, rel=1e-12)
    assert S.integrate(lambda u: u**-0.5, 0, 1).value == pytest.approx(2, rel=1e-10)


def test_integrate_linear():
    f, g = (lambda u: np.exp(-u) * np.cos(u)), (lambda u: u * np.exp(-2 * u))
    a, b = 2.0 - 1j, 0.5
    lhs = S.integrate(lambda u: a * f(u) + b * g(u), 0, np.inf).value
    rhs = a * S.integrate(f, 0, np.inf).value + b * S.integrate(g, 0, np.inf).value
    assert abs(lhs - rhs) < 1e-10


def test_quadrature_spec_validation():
    with pytest.raises(ValueError):
        S.QuadratureSpec(rel_tol=0)
    with pytest.raises(ValueError):
        S.QuadratureSpec(scheme="simpson")


def _jacquet_oracle(p, nu, delta, u):
    """Direct oscillatory quadrature of the defining integral in mpmath."""
    nu = mp.mpc(nu)

    def f(x):
        theta = mp.atan2(u, -x)
        return mp.exp(-2j * mp.pi * delta * x) * (u / (u * u + x * x)) ** (nu + 0.5) * mp.exp(2j * p * theta)

    w = 2 * mp.pi
    return complex(mp.quadosc(f, [0, mp.inf], omega=w) + mp.quadosc(lambda x: f(-x), [0, mp.inf], omega=w))


@pytest.mark.parametrize("p,delta", [(2, 1), (2, -1), (-3, 1)])
def test_jacquet_against_mpmath(p, delta):
    with mp.workdps(20):
        ref = _jacquet_oracle(p, 0.5j, delta, 1.0)
    assert abs(S.jacquet_numeric(p, 0.5j, delta, 1.0) - ref) < 1e-10 * abs(ref)


def test_jacquet_real_line_route():
    a = S.jacquet_numeric(1, 1j, 1, 0.8)
    b = S.jacquet_numeric(1, 1j, 1, 0.8, method="real-line")
    assert abs(a - b) < 1e-9 * abs(a)


def test_jacquet_p0_constant_ratio():
    u = np.array([0.5, 1.0, 2.0])
    ratio = S.jacquet_numeric(0, 0.5j, 1, u) / (np.sqrt(u) * S.bessel_k(0.5j, 2 * math.pi * u))
    assert np.ptp(np.abs(ratio)) / abs(ratio[0]) < 1e-6
    assert abs(ratio[0] - S.jacquet_constant(0.5j)) < 1e-8 * abs(ratio[0])


def test_jacquet_closed_form_grid():
    for nu in (0.3j, 0.5j, 1j):
        u = np.array([0.25, 0.5, 1, 2, 4])
        assert np.max(np.abs(S.jacquet_numeric(0, nu, 1, u) / S.jacquet_k0_closed(nu, u) - 1)) < 1e-6


def test_jacquet_uniform_bound_shape():
    p, nu = 3, 1j
    for u in (1.0, 5.0, 10.0):
        bound = (abs(p) + abs(nu) + 1) * u**-0.5 * math.exp(-u / (abs(nu) + abs(p) + 1))
        assert abs(S.jacquet_numeric(p, nu, 1, u)) <= 10 * bound


def test_jacquet_conjugate_symmetry():
    a, b = S.jacquet_numeric(0, 0.5j, 1, 1.0), S.jacquet_numeric(0, 0.5j, -1, 1.0)
    assert abs(a - b) < 1e-10 * abs(a)


def test_jacquet_decay():
    r = abs(S.jacquet_k0_closed(0.5j, 3.0) / S.jacquet_k0_closed(0.5j, 2.0))
    assert r == pytest.approx(math.exp(-2 * math.pi), rel=0.15)


def test_jacquet_rejects_delta():
    with pytest.raises(ValueError):
        S.jacquet_numeric(0, 0.5j, 0, 1.0)


def test_ghat():
    w = S.WeightFunction(2.0)
    assert S.ghat(w, 0) == pytest.approx(2 * math.sqrt(math.pi))
    assert S.ghat(w, 1.3) == S.ghat(w, -1.3)
    num = S.integrate(lambda t: 2 * w(t) * np.cos(t), 0, np.inf).value
    assert abs(num - S.ghat(w, 1.0)) < 1e-10
    with pytest.raises(ValueError):
        S.WeightFunction(-1)


@settings(max_examples=100, deadline=None)
@given(st.floats(-6, 6), st.floats(-6, 6))
def test_gamma_identities_property(a, b):
    s = complex(a, b)
    if min(abs(s - k) for k in range(-8, 9)) < 1e-3:
        return
    g = S.gamma_complex(s)
    assert abs(S.gamma_complex(s + 1) / (s * g) - 1) < 1e-12
    assert abs(g * S.gamma_complex(1 - s) * np.sin(math.pi * s) / math.pi - 1) < 1e-12
