"""Kirillov model of the unitary principal series and the vector Phi(., alpha).

The Kirillov map sends phi in the model space to the function
Kphi(u) = A^{sgn u} phi(a[|u|]) on the nonzero reals.  The vector whose
Kirillov image is u^alpha exp(-2 pi u) on u > 0 and zero on u < 0 has
K-type coefficients a_p in closed form; feeding it through the expansion
of an automorphic form gives Phi(g, alpha), whose Fourier expansion is
y^alpha sum lambda(n) n^{alpha-1/2} e(nz).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import zeta as hurwitz_zeta

from . import specfun
from .coefficients import CoefficientTable, TruncationWarning, Y_FLOOR
from .specfun import PoleError, QuadratureSpec, QuadratureWarning


def _is_pole(z: complex) -> bool:
    r = round(z.real)
    return r <= 0 and abs(z - r) < 1e-12


def ap_closed(nu: complex, alpha: complex, p: int) -> complex:
    """a_p = (-1)^p 2^{-2a} pi^{-nu-a-1/2} G(a+nu+1/2) G(a-nu+1/2) / (G(1/2-nu+p) G(a+1-p)).

    Poles of the denominator give a_p = 0; poles of the numerator raise.
    """
    nu, alpha = complex(nu), complex(alpha)
    try:
        num = specfun.loggamma(alpha + nu + 0.5) + specfun.loggamma(alpha - nu + 0.5)
    except PoleError:
        raise PoleError(f"Gamma(alpha +- nu + 1/2) has a pole at alpha={alpha}, nu={nu}") from None
    if _is_pole(0.5 - nu + p) or _is_pole(alpha + 1 - p):
        return 0j
    # everything in log space: 1/Gamma(alpha + 1 - p) alone overflows for large p
    den = -specfun.loggamma(0.5 - nu + p) - specfun.loggamma(alpha + 1 - p)
    pref = -2 * alpha * math.log(2) - (nu + alpha + 0.5) * math.log(math.pi)
    return complex((-1.0) ** p * np.exp(num + pref + den))


def ap_closed_array(nu: complex, alpha: complex, P: int) -> np.ndarray:
    """a_p for p = -P..P."""
    return np.array([ap_closed(nu, alpha, p) for p in range(-P, P + 1)])


def _log_trapezoid(f, s_min: float, s_max: float, rel_tol: float, max_levels: int,
                   h0: float = 0.5, noise: float = 1e-13):
    """Trapezoid rule in s with nested halving; f takes an array of s.

    Stops when the change is below rel_tol |total| or below ``noise``
    times the integral of |f| (the floor set by cancellation).
    """
    n0 = int(math.ceil((s_max - s_min) / h0))
    h = (s_max - s_min) / n0
    s = s_min + h * np.arange(n0 + 1)
    vals = f(s)
    total = h * (vals.sum() - 0.5 * (vals[0] + vals[-1]))
    mag = h * np.abs(vals).sum()
    err = math.inf
    for _ in range(max_levels):
        mid = s[:-1] + 0.5 * h
        fm = f(mid)
        refined = 0.5 * total + 0.5 * h * fm.sum()
        mag = 0.5 * mag + 0.5 * h * np.abs(fm).sum()
        err = abs(refined - total)
        total, h = refined, 0.5 * h
        s = np.sort(np.concatenate([s, mid]))
        if err <= max(rel_tol * abs(total), noise * mag):
            return total, err, True
    return total, err, False


def ap_numeric(nu: complex, alpha: complex, p: int, spec: QuadratureSpec = QuadratureSpec()):
    """a_p = (1/pi) int_0^inf u^{alpha-1} e^{-2 pi u} conj(A^+ phi_p(a[u])) du.

    Independent of ``ap_closed``: the Jacquet values come from contour
    quadrature.  The u-integral is a trapezoid rule in log u, which
    converges geometrically for this analytic, doubly decaying integrand.
    """
    nu, alpha = complex(nu), complex(alpha)
    if alpha.real < 1:
        raise ValueError("ap_numeric needs Re alpha >= 1")
    def f(s):
        u = np.exp(s)
        with warnings.catch_warnings():
            # far-tail nodes underflow; the outer halving test decides
            warnings.simplefilter("ignore", QuadratureWarning)
            jac = specfun.jacquet_numeric(p, nu, 1, u, spec)
        return np.exp(alpha * s - 2 * math.pi * u) * np.conj(jac)

    # integrand ~ u^{alpha + 1/2} at 0 and ~ u^{alpha + |p|} e^{-4 pi u}
    # at infinity; widen both ends until they are negligible
    s_min = -38.0 / (alpha.real + 0.5)
    s_max = math.log((40.0 + 3 * alpha.real + 3 * abs(p)) / (4 * math.pi))
    probe = np.linspace(s_min, s_max, 64)
    peak = np.abs(f(probe)).max()
    while abs(f(np.array([s_max]))[0]) > 1e-18 * peak:
        s_max += 0.25
    while abs(f(np.array([s_min]))[0]) > 1e-18 * peak:
        s_min -= 1.0

    # the Jacquet values carry ~1e-11 relative noise, so the halving test
    # cannot go much below 1e-9
    total, err, ok = _log_trapezoid(f, s_min, s_max, max(spec.rel_tol, 1e-9), min(spec.max_subdivisions, 7))
    if not ok:
        warnings.warn(f"ap_numeric did not converge at p={p}", QuadratureWarning, stacklevel=2)
    return complex(total / math.pi)


def fit_decay_exponent(nu: complex, alpha: complex, p_lo: int = 4, p_hi: int = 16, values=None) -> dict:
    """Fitted decay exponent of |a_p| on each side of p = 0.

    Fits log|a_p| = c - kappa log w + c2 / w^2 with w = |p| -+ (Re a + 1/2)/2,
    the abscissa that absorbs the first-order term of the Gamma-ratio
    asymptotics.  Positive p not exceeding Re alpha are still in the
    transition region and zero values (integer alpha) carry no
    information; both are skipped.  Returns {+1: kappa, -1: kappa} for the
    sides with at least four usable points, reported as -kappa.
    """
    a = complex(alpha).real
    out = {}
    for sign in (1, -1):
        ps = np.arange(p_lo, p_hi + 1)
        if values is None:
            mags = np.array([abs(ap_closed(nu, alpha, sign * int(p))) for p in ps])
        else:
            mags = np.array([abs(values[sign * int(p)]) for p in ps])
        keep = mags > 0
        if sign == 1:
            keep &= ps > a
        if keep.sum() < 4:
            continue
        w = ps[keep] - sign * (a + 0.5) / 2
        A = np.stack([np.ones_like(w), -np.log(w), 1 / w**2], axis=1)
        coef = np.linalg.lstsq(A, np.log(mags[keep]), rcond=None)[0]
        out[sign] = -float(coef[1])
    return out


@dataclass(frozen=True)
class KirillovVector:
    nu: complex
    alpha: complex
    coefficients: np.ndarray  # a_p at index p + P
    P: int
    tail_bound: float         # bound on sum_{|p| > P} |a_p|
    C: float
    tail_sq: float = 0.0      # bound on sum_{|p| > P} |a_p|^2
    P_ext: int = 0            # the tails are summed exactly up to |p| = P_ext

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=complex)
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    def a(self, p: int) -> complex:
        return complex(self.coefficients[p + self.P]) if abs(p) <= self.P else 0j

    @property
    def ps(self) -> np.ndarray:
        return np.arange(-self.P, self.P + 1)


def _tail_bounds(nu: complex, alpha: complex, P: int):
    """(sum |a_p|, sum |a_p|^2) over |p| > P, and the cut P_ext.

    The coefficients are summed exactly for P < |p| <= P_ext, with P_ext
    well past |nu| where the Gamma ratio has reached its power law; beyond
    P_ext the envelope C |p|^{-kappa} of the last quartile is used, doubled
    because |a_p| |p|^kappa still creeps up towards its limit on one side.
    """
    kappa = complex(alpha).real + 0.5
    P_ext = max(4 * P, P + int(8 * abs(nu)) + 64)
    ps = np.array([p for p in range(-P_ext, P_ext + 1) if abs(p) > P])
    mags = np.array([abs(ap_closed(nu, alpha, int(p))) for p in ps])
    last = np.abs(ps) > P_ext - max(1, P_ext // 4)
    C_ext = float((mags * (np.abs(ps) + 1.0) ** kappa)[last].max())
    l1 = float(mags.sum()) + 2 * 2 * C_ext * float(hurwitz_zeta(kappa, P_ext + 2))
    l2 = float((mags**2).sum()) + 2 * (2 * C_ext) ** 2 * float(hurwitz_zeta(2 * kappa, P_ext + 2))
    return l1, l2, P_ext


def build_kirillov_vector(nu: complex, alpha: complex, P: int, spec: QuadratureSpec | None = None) -> KirillovVector:
    """phi = sum_{|p| <= P} a_p phi_p with the envelope constant and tail bounds."""
    nu, alpha = complex(nu), complex(alpha)
    if alpha.real < 1 or P < 1:
        raise ValueError("need Re alpha >= 1 and P >= 1")
    coeffs = ap_closed_array(nu, alpha, P)
    kappa = alpha.real + 0.5
    ps = np.arange(-P, P + 1)
    C = float((np.abs(coeffs) * (np.abs(ps) + 1.0) ** kappa).max())
    l1, l2, P_ext = _tail_bounds(nu, alpha, P)
    return KirillovVector(nu, alpha, coeffs, P, l1, C, l2, P_ext)


def parseval_target(alpha: float) -> float:
    """||u^alpha e^{-2 pi u}||^2 in L^2(R^x, pi^{-1} d^x u) = Gamma(2a) / (pi (4 pi)^{2a})."""
    a = float(alpha)
    return math.exp(math.lgamma(2 * a) - 2 * a * math.log(4 * math.pi)) / math.pi


def parseval_tail_bound(v: KirillovVector) -> float:
    """Bound on sum_{|p| > P} |a_p|^2."""
    return v.tail_sq


def kirillov_apply(v: KirillovVector, u, spec: QuadratureSpec = QuadratureSpec()):
    """Kphi(u) = sum_p a_p A^{sgn u} phi_p(a[|u|]) for u != 0 (scalar or array)."""
    u_arr = np.atleast_1d(np.asarray(u, dtype=float))
    if np.any(u_arr == 0):
        raise ValueError("the Kirillov image is defined on u != 0")
    out = np.zeros(u_arr.shape, dtype=complex)
    for delta in (1, -1):
        sel = np.sign(u_arr) == delta
        if not sel.any():
            continue
        absu = np.abs(u_arr[sel])
        acc = np.zeros(absu.shape, dtype=complex)
        for p in v.ps:
            a = v.a(int(p))
            if a != 0:
                acc += a * specfun.jacquet_numeric(int(p), v.nu, delta, absu, spec)
        out[sel] = acc
    return complex(out[0]) if np.ndim(u) == 0 else out


def kirillov_target(alpha: complex, u):
    """u^alpha e^{-2 pi u} on u > 0 and 0 on u < 0."""
    u = np.asarray(u, dtype=float)
    pos = np.where(u > 0, u, 1.0)
    return np.where(u > 0, np.exp(complex(alpha) * np.log(pos) - 2 * math.pi * pos), 0.0)


def _phi_N(y: float, alpha: complex, N: int | None, N_max: int, tol: float = 1e-14) -> int:
    if y < Y_FLOOR:
        raise ValueError(f"y = {y} below the evaluator floor {Y_FLOOR}")
    if N is not None:
        return min(N, N_max)
    a = complex(alpha).real
    # (ny)^a e^{-2 pi n y} relative to its peak (a/2 pi)^a e^{-a}; the
    # coefficients grow at most like n^{1/2}
    peak = (a / (2 * math.pi)) ** a * math.exp(-a)
    n = 1
    while n < N_max:
        u = n * y
        if u > a / (2 * math.pi) and math.sqrt(n) * u**a * math.exp(-2 * math.pi * u) < tol * peak:
            break
        n += 1
    if n >= N_max and N_max * y < 8:
        warnings.warn(f"table too short for y = {y}", TruncationWarning, stacklevel=3)
    return min(n, N_max)


def phi_capital_series(table: CoefficientTable, v: KirillovVector, x: float, y: float,
                       N: int | None = None, spec: QuadratureSpec = QuadratureSpec()) -> complex:
    """Phi(n[x]a[y]) = sum_{n >= 1} lambda(n) / sqrt(n) e(nx) Kphi(ny).

    Negative n drop out because Kphi vanishes on u < 0 by construction.
    """
    N = _phi_N(y, v.alpha, N, table.N_max)
    n = np.arange(1, N + 1)
    k = kirillov_apply(v, n * y, spec)
    return complex(np.sum(table.lam[1:N + 1] / np.sqrt(n) * np.exp(2j * math.pi * n * x) * k))


def phi_capital_closed(table: CoefficientTable, alpha: complex, x: float, y: float,
                       N: int | None = None) -> complex:
    """y^alpha sum_{n >= 1} lambda(n) n^{alpha - 1/2} e(n(x + iy))."""
    N = _phi_N(y, alpha, N, table.N_max)
    n = np.arange(1, N + 1)
    alpha = complex(alpha)
    terms = table.lam[1:N + 1] * np.exp((alpha - 0.5) * np.log(n) + 2j * math.pi * n * complex(x, y))
    return complex(np.exp(alpha * math.log(y)) * terms.sum())


def smallest_passing_alpha(table: CoefficientTable, nu: complex, alphas, P: int = 24,
                           points=((0.0, 1.0),), tol: float = 1e-3):
    """First alpha in ``alphas`` at which series and closed forms agree to tol."""
    for a in alphas:
        v = build_kirillov_vector(nu, a, P)
        worst = 0.0
        for x, y in points:
            s = phi_capital_series(table, v, x, y)
            c = phi_capital_closed(table, a, x, y)
            worst = max(worst, abs(s - c) / abs(c))
        if worst <= tol:
            return a, worst
    return None, None
