import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kirillov_lab import coefficients as C, geometry as G, specfun


@pytest.fixture(scope="module")
def maass():
    return C.ingest_maass(C.bundled_maass_path())


def test_tau_examples():
    t = C.tau_values(12)
    assert t[1] == 1 and t[2] == -24 and t[3] == 252 and t[12] == -370944
    assert t[6] == t[2] * t[3]


def test_tau_fast_matches_naive():
    assert C.tau_values(300) == C.tau_values_naive(300)


def test_tau_deligne_bound():
    t = C.tau_table(500)
    n = np.arange(1, 501)
    d = np.array([sum(1 for k in range(1, m + 1) if m % k == 0) for m in n])
    assert np.all(np.abs(t.lam[1:]) <= d)


def test_divisor_examples():
    assert C.divisor_table(0, 10)[6] == 4
    assert C.divisor_table(0.5j, 10)[1] == 1


def test_divisor_dirichlet_series():
    nu, N = 0.5j, 100_000
    tab = C.divisor_table(nu, N)
    n = np.arange(1, N + 1, dtype=float)
    partial = np.sum(tab.lam[1:] * n**-3.0)
    target = specfun.riemann_zeta(3 - nu) * specfun.riemann_zeta(3 + nu)
    assert abs(partial - target) < 1e-8


def test_hecke_exact():
    assert C.hecke_residual(C.tau_table(1000), 1000) == (0.0, None)
    assert C.hecke_residual(C.divisor_table(0.5j, 1000), 1000)[0] < 1e-12


def test_table_validation():
    sd = C.SpectralData("unitary-principal", 2j)
    with pytest.raises(ValueError):
        C.CoefficientTable(sd, np.array([0.0, 2.0]), 1, "bad")
    with pytest.raises(ValueError):
        C.SpectralData("unitary-principal", 0.3)
    with pytest.raises(ValueError):
        C.SpectralData("holomorphic-discrete", 1.0, weight_ell=6)
    tab = C.tau_table(10)
    assert tab.lam.flags.writeable is False


def _write(tmp_path, lam, R=0.5, name="d.txt"):
    path = tmp_path / name
    C.write_maass_dataset(C.MaassDatasetRecord(R, "even", lam, 1e-14, "synthetic"), path)
    return path


def test_ingest_synthetic_divisor_file(tmp_path):
    tab = C.divisor_table(0.5j, 60)
    path = _write(tmp_path, {n: float(tab.lam[n]) for n in range(1, 61)})
    got = C.ingest_maass(path)
    assert got.meta["validated"] and got.meta["hecke_residual"] < 1e-13
    assert np.allclose(got.lam, tab.lam.real, atol=0, rtol=0)


def test_ingest_flags_perturbed_file(tmp_path):
    tab = C.divisor_table(0.5j, 60)
    lam = {n: float(tab.lam[n]) for n in range(1, 61)}
    lam[4] += 1e-3
    path = _write(tmp_path, lam)
    with pytest.warns(UserWarning, match="unvalidated"):
        got = C.ingest_maass(path)
    assert not got.meta["validated"]
    resid, where = got.meta["hecke_first"]
    assert where == (2, 2) and resid == pytest.approx(1e-3, rel=1e-6)
    assert got.meta["hecke_residual"] >= resid


def test_ingest_rejects_malformed(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("#R 1\n#parity even\n#precision 1e-9\n1 1.0\n", encoding="utf-8")
    with pytest.raises(ValueError, match="origin"):
        C.ingest_maass(p)
    p.write_text("#R 1\n#parity even\n#precision 1e-9\n#origin x\n1 1.0\n3 0.5\n", encoding="utf-8")
    with pytest.raises(ValueError, match="gaps"):
        C.ingest_maass(p)
    p.write_text("#R 1\n#parity even\n#precision 1e-9\n#origin x\n1 1.0 2\n", encoding="utf-8")
    with pytest.raises(ValueError):
        C.ingest_maass(p)


def test_bundled_dataset(maass):
    assert maass.meta["validated"]
    assert maass.meta["R"] == pytest.approx(13.7797513519, abs=1e-8)
    pts = [G.GroupPoint(0.1, 0.8), G.GroupPoint(0.3, 1.2), G.GroupPoint(-0.2, 1.5)]
    assert C.automorphy_residual(maass, pts, G.WEYL) < 1e-4


def test_phi0_periodic_and_real(maass):
    a = C.eval_phi0(maass, G.GroupPoint(0.23, 0.9))
    b = C.eval_phi0(maass, G.GroupPoint(1.23, 0.9))
    assert abs(a - b) < 1e-12 * abs(a)
    # real up to the global constant c_nu
    v = C.eval_phi0(maass, G.GroupPoint(0.0, 0.9)) / specfun.jacquet_constant(maass.spectral.nu)
    assert abs(v.imag) < 1e-14 * abs(v)


def test_phi0_automorphy_at_weyl_image(maass):
    p = G.GroupPoint(0.0, 1.2)
    assert abs(C.eval_phi0(maass, p) - C.eval_phi0(maass, G.act(G.WEYL, p))) < 1e-4


def test_phi0_below_floor_rejected(maass):
    with pytest.raises(ValueError, match="floor"):
        C.eval_phi0(maass, G.GroupPoint(0.0, 0.01))


def test_automorphy_trend_in_N(maass):
    pts = [G.GroupPoint(0.1, 0.8), G.GroupPoint(0.3, 1.2)]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        r = [C.automorphy_residual(maass, pts, G.WEYL, N) for N in (4, 8, 16)]
    assert r[0] > r[1] > r[2]


def test_automorphy_perturbation_detected(maass):
    lam = maass.lam.copy()
    lam[4] += 1e-3
    bad = C.CoefficientTable(maass.spectral, lam, maass.N_max, "perturbed")
    pts = [G.GroupPoint(0.1, 0.8), G.GroupPoint(0.3, 1.2)]
    assert C.automorphy_residual(bad, pts, G.WEYL) > 1e3 * C.automorphy_residual(maass, pts, G.WEYL)


def test_automorphy_translation_exact(maass):
    assert C.automorphy_residual(maass, [G.GroupPoint(0.2, 0.7)], G.n_mat(1.0)) < 1e-12


def test_holomorphic_theta_and_period():
    t = C.tau_table(60)
    p = G.GroupPoint(0.1, 0.8, 0.2)
    v = C.eval_holomorphic(t, p)
    rot = C.eval_holomorphic(t, G.GroupPoint(0.1, 0.8, 0.2 + math.pi / 2))
    assert abs(rot - v) < 1e-12 * abs(v)
    assert abs(C.eval_holomorphic(t, G.GroupPoint(1.1, 0.8, 0.2)) - v) < 1e-12 * abs(v)


def test_holomorphic_matches_delta_product():
    t = C.tau_table(60)
    z = 0.1 + 0.8j
    q = np.exp(2j * math.pi * z)
    delta = q * np.prod([(1 - q**n) ** 24 for n in range(1, 200)])
    ref = C.holomorphic_constant(6) * z.imag**6 * delta
    assert abs(C.eval_holomorphic(t, G.GroupPoint(z.real, z.imag)) - ref) < 1e-10 * abs(ref)


def test_tau_automorphy():
    t = C.tau_table(100)
    pts = [G.GroupPoint(x, y) for x, y in [(0.1, 0.8), (0.3, 1.2), (-0.2, 1.5)]]
    assert C.automorphy_residual(t, pts, G.WEYL) < 1e-8


def test_phi_p_routes(maass):
    tab = C.divisor_table(0.5j, 200)
    g = G.GroupPoint(0.3, 1.1, 0)
    a, b = C.eval_phi_p(tab, 0, g), C.eval_phi0(tab, g)
    assert abs(a - b) < 1e-6 * abs(b)
    g1, g2 = G.GroupPoint(0.3, 1.1, 0.0), G.GroupPoint(0.3, 1.1, 0.4)
    v1, v2 = C.eval_phi_p(tab, 2, g1), C.eval_phi_p(tab, 2, g2)
    assert abs(v2 - np.exp(2j * 2 * 0.4) * v1) < 1e-10 * abs(v1)


def test_phi_p_decay():
    tab = C.divisor_table(0.5j, 200)
    r = abs(C.eval_phi_p(tab, 1, G.GroupPoint(0.0, 3.0)) / C.eval_phi_p(tab, 1, G.GroupPoint(0.0, 2.0)))
    # first-term envelope u^p e^{-2 pi u} of the weight-2p vector
    assert r == pytest.approx(1.5 * math.exp(-2 * math.pi), rel=0.1)


def test_eisenstein_automorphy():
    tab = C.divisor_table(0.5j, 200)
    pts = [G.GroupPoint(0.1, 0.8), G.GroupPoint(0.3, 1.2)]
    assert C.automorphy_residual(tab, pts, G.WEYL) < 1e-8


def test_casimir_single_term():
    sd = C.SpectralData("unitary-principal", 0.5j)
    one = C.synthetic_table({1: 1.0}, sd, N_max=8)
    p = G.GroupPoint(0.1, 1.0, 0.0)
    r1, r2 = C.casimir_residual(one, p, 2e-3), C.casimir_residual(one, p, 1e-3)
    assert math.log2(r1 / r2) == pytest.approx(2.0, abs=0.1)
    shifted = C.casimir_residual(one, G.GroupPoint(1.1, 1.0, 0.0), 1e-3)
    assert shifted == pytest.approx(r2, rel=1e-3)


def test_casimir_maass(maass):
    p = G.GroupPoint(0.1, 1.3, 0.0)
    r = [C.casimir_residual(maass, p, h) for h in (2e-3, 1e-3)]
    assert math.log2(r[0] / r[1]) > 1.8
    scale = abs((maass.spectral.nu**2 - 0.25) * C.eval_phi0(maass, p))
    assert r[1] / scale < 1e-5


@settings(max_examples=30, deadline=None)
@given(st.floats(0.5, 3.0), st.floats(-2, 2), st.floats(0.6, 2.0))
def test_evaluators_homogeneous(c, x, y):
    g = G.GroupPoint(x, y)
    tau = C.tau_table(60)
    div = C.divisor_table(0.5j, 60)
    assert abs(C.eval_holomorphic(tau.scaled(c), g) - c * C.eval_holomorphic(tau, g)) <= 1e-12 * (
        1 + abs(c * C.eval_holomorphic(tau, g)))
    assert abs(C.eval_phi0(div.scaled(c), g) - c * C.eval_phi0(div, g)) <= 1e-12 * (
        1 + abs(c * C.eval_phi0(div, g)))
