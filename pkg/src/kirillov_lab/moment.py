"""Mean values: Dirichlet series, moment integrals, shifted convolutions and unfolding.

Everything here lives in the region of absolute convergence.  The moment
identity is checked on the length-N Dirichlet polynomial of a table, for
which integral = diagonal + off-diagonal + mirror holds exactly; the
length is recorded in every report together with the series tail.

The unfolding machinery compares three evaluations of one number:

(i)   the shifted convolution sum with weight (1 + m/n)^{-(alpha - 1/2)},
(ii)  the strip integral of y^{xi-2} e(mz) |Phi|^2 from the closed
      Fourier expansion of Phi,
(iii) the inner product of a Poincare series with |Phi|^2 over the
      fundamental domain, extrapolated to a point-mass bump.
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as _cheb
from numpy.polynomial.legendre import leggauss

from . import geometry, specfun
from .coefficients import CoefficientTable, eisenstein_constant_coeffs, holomorphic_constant
from .geometry import GroupPoint
from .kirillov import KirillovVector, build_kirillov_vector
from .report import VerificationReport
from .specfun import IntegrationResult, PoleError, QuadratureSpec, WeightFunction

SERIES_FLOOR = 1.2        # Re s for l_series and for u, v in moment tasks
CONVOLUTION_FLOOR = 2.0   # Re s for shifted convolutions (strict)
EULER_GAMMA = 0.5772156649015329


# --------------------------------------------------------------------------
# Coefficient envelopes
# --------------------------------------------------------------------------

def _divisor_counts(N: int) -> np.ndarray:
    d = np.zeros(N + 1)
    for a in range(1, N + 1):
        d[a::a] += 1
    return d


def _envelope_scale(table: CoefficientTable) -> float:
    """s with |lambda(n)| <= s d(n) on the table (>= 1 by convention)."""
    n = table.N_max
    d = _divisor_counts(n)
    return max(1.0, float(np.max(np.abs(table.lam[1:]) / d[1:])))


def _log_power_tail(N: float, sigma: float, power: int) -> float:
    """int_N^inf (log x + 2 gamma)^power x^{-sigma} dx."""
    if sigma <= 1:
        return math.inf
    w0 = math.log(max(N, 1.0))
    s = sigma - 1
    x, w = leggauss(60)
    span = 60.0 / s
    ww = w0 + 0.5 * span * (x + 1)
    return float(0.5 * span * np.sum(w * (ww + 2 * EULER_GAMMA) ** power * np.exp(-s * ww)))


def _n_range(table: CoefficientTable, N: int | None) -> int:
    return table.N_max if N is None else min(int(N), table.N_max)


# --------------------------------------------------------------------------
# Dirichlet series
# --------------------------------------------------------------------------

def l_series(table: CoefficientTable, s: complex, N: int | None = None, with_error: bool = False):
    """sum_{n <= N} lambda(n) n^{-s} with the divisor-envelope tail bound."""
    s = complex(s)
    if s.real < SERIES_FLOOR:
        raise ValueError(f"l_series needs Re s >= {SERIES_FLOOR} (absolute convergence), got {s}")
    N = _n_range(table, N)
    n = np.arange(1, N + 1, dtype=float)
    val = complex(np.sum(table.lam[1:N + 1] * np.exp(-s * np.log(n))))
    if not with_error:
        return val
    tail = _envelope_scale(table) * _log_power_tail(N, s.real, 1)
    return val, tail


@dataclass(frozen=True)
class MomentTask:
    table: CoefficientTable
    u: complex
    v: complex
    weight: WeightFunction = WeightFunction()
    N: int | None = None
    t_range: float | None = None
    shifts: tuple = ()

    def __post_init__(self):
        u, v = complex(self.u), complex(self.v)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        if min(u.real, v.real) < SERIES_FLOOR:
            raise ValueError(f"moment tasks need Re u, Re v >= {SERIES_FLOOR} "
                             f"(absolute convergence with margin), got u={u}, v={v}")
        if (u + v).real <= 2:
            raise ValueError("moment tasks need Re(u + v) > 2")
        if any(int(m) < 1 for m in self.shifts):
            raise ValueError("shifts must be integers >= 1")

    @property
    def length(self) -> int:
        return _n_range(self.table, self.N)

    @property
    def t_max(self) -> float:
        # g(t) = exp(-(t/T)^2) < 1.2e-17 beyond T sqrt(39)
        return self.t_range if self.t_range is not None else self.weight.T * math.sqrt(39.0)


def _dirichlet_poly(table: CoefficientTable, s: complex, t: np.ndarray, N: int) -> np.ndarray:
    """L_N(s + i t) on an array of t."""
    n = np.arange(1, N + 1, dtype=float)
    logn = np.log(n)
    coef = table.lam[1:N + 1] * np.exp(-s * logn)
    out = np.empty(t.shape, dtype=complex)
    for i in range(0, t.size, 256):
        tt = t[i:i + 256]
        out[i:i + 256] = np.exp(-1j * np.outer(tt, logn)) @ coef
    return out


def moment_integral(task: MomentTask, nodes: int = 256, max_doublings: int = 6) -> IntegrationResult:
    """int L_N(u + it) conj(L_N(conj(v) + it)) g(t) dt over |t| <= t_range.

    Gauss-Legendre on [-t_range, t_range], doubled until stable; the
    Gaussian tail outside the range is added to the error.
    """
    N, R, w = task.length, task.t_max, task.weight
    vbar = task.v.conjugate()
    prev = None
    for _ in range(max_doublings):
        x, wt = leggauss(nodes)
        t = R * x
        f = _dirichlet_poly(task.table, task.u, t, N) * np.conj(_dirichlet_poly(task.table, vbar, t, N)) * w(t)
        cur = complex(R * np.sum(wt * f))
        if prev is not None and abs(cur - prev) <= 1e-13 * max(abs(cur), 1e-300):
            break
        prev, nodes = cur, 2 * nodes
    else:
        warnings.warn("moment_integral did not stabilise", specfun.QuadratureWarning, stacklevel=2)
    quad_err = abs(cur - prev) if prev is not None else math.inf
    lam_abs = np.abs(task.table.lam[1:N + 1])
    n = np.arange(1, N + 1, dtype=float)
    bound = np.sum(lam_abs * n ** -task.u.real) * np.sum(lam_abs * n ** -task.v.real)
    tail = bound * w.T * math.sqrt(math.pi) * math.erfc(R / w.T)
    return IntegrationResult(cur, quad_err + tail, quad_err <= 1e-10 * abs(cur) + 1e-300)


def diagonal_term(table: CoefficientTable, u: complex, v: complex, weight: WeightFunction,
                  N: int | None = None) -> complex:
    """ghat(0) sum_n |lambda(n)|^2 n^{-u-v}."""
    N = _n_range(table, N)
    n = np.arange(1, N + 1, dtype=float)
    lam = table.lam[1:N + 1]
    return complex(specfun.ghat(weight, 0.0) * np.sum(lam * np.conj(lam) * np.exp(-(complex(u) + complex(v)) * np.log(n))))


def offdiagonal_sum(table: CoefficientTable, u: complex, v: complex, weight: WeightFunction,
                    M_max: int | None = None, N: int | None = None, with_error: bool = False):
    """sum_{m <= M_max} sum_{n + m <= N} lambda(n) conj(lambda(n+m)) n^{-u} (n+m)^{-v} ghat(log(1 + m/n)).

    The bound for m > M_max uses ghat(log(1 + r)) <= ghat(r / (1 + r)).
    """
    N = _n_range(table, N)
    M_max = N - 1 if M_max is None else min(int(M_max), N - 1)
    u, v = complex(u), complex(v)
    lam = table.lam
    n_all = np.arange(1, N + 1, dtype=float)
    a = lam[1:N + 1] * np.exp(-u * np.log(n_all))
    b = np.conj(lam[1:N + 1]) * np.exp(-v * np.log(n_all))
    total = 0j
    for m in range(1, M_max + 1):
        n = n_all[:N - m]
        total += np.sum(a[:N - m] * b[m:] * specfun.ghat(weight, np.log1p(m / n)))
    if not with_error:
        return complex(total)
    bound = 0.0
    aa, bb = np.abs(a), np.abs(b)
    for m in range(M_max + 1, N):
        n = n_all[:N - m]
        bound += float(np.sum(aa[:N - m] * bb[m:] * specfun.ghat(weight, m / (n + m))))
    return complex(total), bound


def mirror_term(table: CoefficientTable, u: complex, v: complex, weight: WeightFunction,
                M_max: int | None = None, N: int | None = None) -> complex:
    """The reflected half n > k of the double sum: conj(offdiag(conj v, conj u))."""
    return offdiagonal_sum(table, complex(v).conjugate(), complex(u).conjugate(), weight,
                           M_max, N).conjugate()


def offdiagonal_inner(table: CoefficientTable, m: int, u: complex, v: complex,
                      weight: WeightFunction, N: int | None = None) -> complex:
    """The m-th inner sum sum_{n + m <= N} lambda(n) conj(lambda(n+m)) n^{-u} (n+m)^{-v} ghat(log(1 + m/n))."""
    N = _n_range(table, N)
    n = np.arange(1, N - m + 1, dtype=float)
    lam = table.lam
    terms = (lam[1:N - m + 1] * np.conj(lam[1 + m:N + 1]) * np.exp(-complex(u) * np.log(n) - complex(v) * np.log(n + m))
             * specfun.ghat(weight, np.log1p(m / n)))
    return complex(np.sum(terms))


def moment_identity(task: MomentTask, tol: float = 1e-4) -> VerificationReport:
    """integral = diagonal + off-diagonal + mirror on the length-N polynomial."""
    t0 = time.perf_counter()
    tab, N = task.table, task.length
    rep = VerificationReport("moment-identity")
    integral = moment_integral(task)
    diag = diagonal_term(tab, task.u, task.v, task.weight, N)
    off, off_tail = offdiagonal_sum(tab, task.u, task.v, task.weight, None, N, with_error=True)
    mir = mirror_term(tab, task.u, task.v, task.weight, None, N)
    rep.add_leg("integral", integral.value, integral.error)
    rep.add_leg("diagonal", diag)
    rep.add_leg("offdiagonal", off, off_tail)
    rep.add_leg("mirror", mir)
    rep.add_leg("decomposition", diag + off + mir, off_tail)
    rep.compare("integral", "decomposition", tol)
    _, ltail = l_series(tab, task.u, N, with_error=True)
    rep.truncation.update(table=tab.source, N=N, t_range=task.t_max, T=task.weight.T,
                          u=task.u, v=task.v, series_tail_bound=ltail)
    rep.notes.append("identity for the length-N Dirichlet polynomial; series_tail_bound bounds "
                     "the distance of L_N(u) from L(u)")
    rep.wall_time = time.perf_counter() - t0
    return rep


# --------------------------------------------------------------------------
# Shifted convolutions
# --------------------------------------------------------------------------

def _convolution_tail(table: CoefficientTable, N: int, m: int, sigma: float) -> float:
    # |lambda(n) lambda(n+m)| <= s^2 d(n) d(n+m); Cauchy-Schwarz and
    # sum d(n)^2 n^{-sigma} <= int (log x + 2 gamma)^3 x^{-sigma} dx
    s = _envelope_scale(table)
    return s * s * _log_power_tail(N - m, sigma, 3)


def shifted_convolution_alpha(table: CoefficientTable, m: int, xi: complex, alpha: complex,
                              N: int | None = None, with_error: bool = False):
    """sum_{n + m <= N} lambda(n) conj(lambda(n+m)) (n+m)^{-xi} (1 + m/n)^{-(alpha - 1/2)}."""
    xi, alpha = complex(xi), complex(alpha)
    if xi.real <= CONVOLUTION_FLOOR:
        raise ValueError(f"shifted convolutions need Re xi > {CONVOLUTION_FLOOR}, got {xi}")
    m = int(m)
    if m < 1:
        raise ValueError("shift m must be >= 1")
    N = _n_range(table, N)
    if N <= m:
        return (0j, 0.0) if with_error else 0j
    n = np.arange(1, N - m + 1, dtype=float)
    lam = table.lam
    terms = (lam[1:N - m + 1] * np.conj(lam[1 + m:N + 1])
             * np.exp(-xi * np.log(n + m) - (alpha - 0.5) * np.log1p(m / n)))
    val = complex(np.sum(terms))
    if not with_error:
        return val
    return val, _convolution_tail(table, N, m, xi.real)


def shifted_convolution(table: CoefficientTable, m: int, s: complex, N: int | None = None,
                        with_error: bool = False):
    """sum_{n + m <= N} lambda(n) conj(lambda(n+m)) (n+m)^{-s}."""
    return shifted_convolution_alpha(table, m, s, 0.5, N, with_error)


def unfolding_constant(xi: complex, alpha: complex) -> complex:
    """pi (4 pi)^{xi + 2 alpha - 1} / Gamma(xi + 2 alpha - 1)."""
    e = complex(xi) + 2 * complex(alpha) - 1
    return complex(math.pi * np.exp(e * math.log(4 * math.pi) - specfun.loggamma(e)))


# --------------------------------------------------------------------------
# Bump and Poincare series
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BumpSpec:
    """tau(theta) = B(theta / delta) / delta, B(t) = (315/256)(1 - t^2)^4 on [-1, 1], period pi."""
    delta: float

    def __post_init__(self):
        if not 0 < self.delta < math.pi / 2:
            raise ValueError("bump width must lie in (0, pi/2)")

    def __call__(self, theta):
        th = np.mod(np.asarray(theta, dtype=float) + math.pi / 2, math.pi) - math.pi / 2
        t = th / self.delta
        return np.where(np.abs(t) < 1, (315 / 256) * (1 - t * t) ** 4 / self.delta, 0.0)

    @property
    def peak(self) -> float:
        return 315 / 256 / self.delta

    def fourier(self, k):
        """int tau(theta) e^{2 i k theta} d theta = int B(t) e^{2 i k delta t} dt."""
        x, w = leggauss(48)
        k = np.atleast_1d(np.asarray(k, dtype=float))
        prof = (315 / 256) * (1 - x * x) ** 4 * w
        return np.exp(2j * self.delta * np.outer(k, x)) @ prof

    def integral(self) -> float:
        return float(self.fourier(0)[0].real)


def poincare_series(m: int, xi: complex, bump: BumpSpec, g: GroupPoint, c_max: int = 20,
                    d_max: int = 200, with_error: bool = False):
    """P h(g) = sum over Gamma_inf \\ Gamma of h(gamma g), h = y^xi e(m z) tau(theta).

    The coset sum runs over the box 1 <= c <= c_max, |d| <= d_max plus the
    identity; the tail is the Eisenstein majorant of the omitted cosets.
    """
    xi = complex(xi)
    if xi.real <= 1:
        raise ValueError("the Poincare series needs Re xi > 1")
    rows = geometry.coset_bottom_rows(c_max, d_max)
    a, b, c, d = (rows[:, i] for i in range(4))
    z = g.z
    j = c * z + d
    w = (a * z + b) / j
    th = g.theta - np.angle(j)
    vals = np.exp(xi * np.log(w.imag) + 2j * math.pi * m * w) * bump(th)
    val = complex(np.sum(vals))
    if not with_error:
        return val
    sig, y = xi.real, g.y
    beta = math.sqrt(math.pi) * math.exp(math.lgamma(sig - 0.5) - math.lgamma(sig))
    tail_c = y**sig * beta * y ** (1 - 2 * sig) * c_max ** (2 - 2 * sig) / (2 * sig - 2)
    gap = max(d_max - c_max * abs(g.x), 1.0)
    tail_d = c_max * 2 * y**sig * gap ** (1 - 2 * sig) / (2 * sig - 1)
    return val, bump.peak * (tail_c + tail_d)


# --------------------------------------------------------------------------
# Fields Phi given by K-type components
# --------------------------------------------------------------------------

class PhiField:
    """Phi(n[x] a[y] k[theta]) = sum_p F_p(x, y) e^{2 i p theta}."""
    ps: np.ndarray

    def components(self, x, y) -> np.ndarray:
        raise NotImplementedError

    def constant_components(self, y) -> np.ndarray | None:
        """Components of the constant term (None for cusp forms)."""
        return None

    def value(self, x, y, theta=0.0):
        comp = self.components(np.atleast_1d(x), np.atleast_1d(y))
        e = np.exp(2j * np.multiply.outer(self.ps, np.atleast_1d(theta)))
        out = np.sum(comp * e, axis=0)
        return complex(out[0]) if np.ndim(x) == 0 else out


class ConstantField(PhiField):
    """Phi = 1; a diagnostic for the unfolding quadrature."""
    ps = np.array([0])

    def components(self, x, y):
        return np.ones((1,) + np.shape(x), dtype=complex)

    def constant_components(self, y):
        return np.ones((1,) + np.shape(y), dtype=complex)


class HolomorphicField(PhiField):
    """y^l sum lambda(n) n^{l-1/2} e(nz) e^{2 i l theta}: the discrete-series vector with the
    constant of the unit-norm normalisation dropped, i.e. Phi(., alpha) at alpha = l."""

    def __init__(self, table: CoefficientTable, N: int | None = None):
        if table.spectral.series != "holomorphic-discrete":
            raise ValueError("HolomorphicField needs a discrete-series table")
        self.table = table
        self.ell = table.spectral.weight_ell
        self.ps = np.array([self.ell])
        self.N = _n_range(table, N)

    def components(self, x, y):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        n_need = min(self.N, int(math.ceil(14.0 / max(float(np.min(y)), 1e-3))) + 1)
        n = np.arange(1, n_need + 1, dtype=float)
        coef = self.table.lam[1:n_need + 1] * n ** (self.ell - 0.5)
        z = (x + 1j * y)[..., None]
        s = np.sum(coef * np.exp(2j * math.pi * n * z), axis=-1)
        return (y**self.ell * s)[None]


class _JacquetInterp:
    """Piecewise Chebyshev interpolant of A^delta phi_p(a[u]) in log u.

    The e^{-2 pi u} u^{1/2-nu} envelope is removed first; the remaining
    factor can still vary like u^{|p|}, hence the panels.
    """

    def __init__(self, p, nu, delta, u_lo, u_hi, degree=28, panels=10, spec=None):
        self.nu = complex(nu)
        self.edges = np.linspace(math.log(u_lo), math.log(u_hi), panels + 1)

        def g(s):
            u = np.exp(s)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", specfun.QuadratureWarning)
                a = specfun.jacquet_numeric(p, self.nu, delta, u, spec or QuadratureSpec())
            return a * np.exp(2 * math.pi * u + (self.nu - 0.5) * s)

        x = np.cos(math.pi * (np.arange(degree + 1) + 0.5) / (degree + 1))
        lo, hi = self.edges[:-1, None], self.edges[1:, None]
        nodes = lo + 0.5 * (hi - lo) * (x[None, :] + 1)
        vals = g(nodes.ravel()).reshape(nodes.shape)
        self.coef = np.array([_cheb.chebfit(x, row, degree) for row in vals])

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        s = np.log(u)
        k = np.clip(np.searchsorted(self.edges, s) - 1, 0, len(self.coef) - 1)
        lo, hi = self.edges[k], self.edges[k + 1]
        x = (2 * s - lo - hi) / (hi - lo)
        out = np.empty(u.shape, dtype=complex)
        for j in np.unique(k):
            sel = k == j
            out[sel] = _cheb.chebval(x[sel], self.coef[j])
        return out * np.exp(-2 * math.pi * u - (self.nu - 0.5) * s)


class KirillovField(PhiField):
    """Phi = sum_p a_p phi_p on a principal-series table.

    F_p(x, y) = a_p [const_p(y) + sum_{n>=1} lambda(n)/sqrt(n) (e(nx) A^+ phi_p(a[ny])
    + eps e(-nx) A^- phi_p(a[ny]))], with the constant term present only for
    divisor tables.  Jacquet values come from Chebyshev interpolants on
    u in [u_lo, u_hi].
    """

    def __init__(self, table: CoefficientTable, vector: KirillovVector, u_lo: float = 0.8,
                 spec: QuadratureSpec | None = None):
        sd = table.spectral
        if sd.series not in ("unitary-principal", "eisenstein-analogue"):
            raise ValueError("KirillovField needs a principal-series table")
        self.table, self.vector = table, vector
        self.nu, self.sign = sd.nu, sd.sign
        keep = [int(p) for p in vector.ps if vector.a(int(p)) != 0]
        self.ps = np.array(keep)
        self.coef = np.array([vector.a(p) for p in keep])
        self.u_lo = u_lo
        self.u_hi = (4 * max(abs(p) for p in keep) + 80) / (4 * math.pi)
        self.interp = {(p, d): _JacquetInterp(p, self.nu, d, u_lo, self.u_hi + 1.0, spec=spec)
                       for p in keep for d in (1, -1)}
        self.eisenstein = sd.series == "eisenstein-analogue"
        if self.eisenstein:
            ab = [eisenstein_constant_coeffs(self.nu, p) for p in keep]
            self.const_A = np.array([x[0] for x in ab])
            self.const_B = np.array([x[1] for x in ab])

    def constant_components(self, y):
        if not self.eisenstein:
            return None
        y = np.asarray(y, dtype=float)
        up = np.exp((0.5 + self.nu) * np.log(y))
        dn = np.exp((0.5 - self.nu) * np.log(y))
        return self.coef[:, None] * (np.multiply.outer(self.const_A, up) + np.multiply.outer(self.const_B, dn))

    def components(self, x, y):
        x, y = np.asarray(x, dtype=float).ravel(), np.asarray(y, dtype=float).ravel()
        if np.min(y) < self.u_lo:
            raise ValueError(f"KirillovField was built for y >= {self.u_lo}")
        n_max = min(self.table.N_max, int(math.ceil(self.u_hi / np.min(y))))
        out = np.zeros((len(self.ps), x.size), dtype=complex)
        lam = self.table.lam
        for n in range(1, n_max + 1):
            u = n * y
            live = u <= self.u_hi
            if not live.any():
                break
            e = np.exp(2j * math.pi * n * x[live])
            w = lam[n] / math.sqrt(n)
            for i, p in enumerate(self.ps):
                out[i, live] += w * (e * self.interp[(p, 1)](u[live])
                                     + self.sign * np.conj(e) * self.interp[(p, -1)](u[live]))
        out *= self.coef[:, None]
        if self.eisenstein:
            out += self.constant_components(y)
        return out


def _ktype_products(comp: np.ndarray, ps: np.ndarray):
    """C_k = sum_q F_{q+k} conj(F_q) for k = -K..K (K = max p - min p)."""
    p0 = int(ps.min())
    K = int(ps.max()) - p0
    dense = np.zeros((K + 1,) + comp.shape[1:], dtype=complex)
    dense[ps - p0] = comp
    C = np.zeros((2 * K + 1,) + comp.shape[1:], dtype=complex)
    for k in range(-K, K + 1):
        if k >= 0:
            C[k + K] = np.sum(dense[k:] * np.conj(dense[:K + 1 - k]), axis=0)
        else:
            C[k + K] = np.sum(dense[:K + 1 + k] * np.conj(dense[-k:]), axis=0)
    return C, K


def _theta_average(C: np.ndarray, K: int, that: np.ndarray, beta) -> np.ndarray:
    """(1/pi) sum_k C_k that_k e^{2 i k beta} by Horner in e^{2 i beta}.

    C has shape (2K+1, *pts); beta has shape pts or (*pts, extra).
    """
    beta = np.asarray(beta, dtype=float)
    w = C * that.reshape((-1,) + (1,) * (C.ndim - 1))
    w = w.reshape(w.shape + (1,) * (beta.ndim - (C.ndim - 1)))
    if K == 0:
        return np.broadcast_to(w[0], beta.shape) / math.pi
    zeta = np.exp(2j * beta)
    acc = np.broadcast_to(w[-1], beta.shape).astype(complex)
    for j in range(2 * K - 1, -1, -1):
        acc = acc * zeta + w[j]
    return acc * np.exp(-2j * K * beta) / math.pi


# --------------------------------------------------------------------------
# Inner product over the fundamental domain
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FundamentalGrid:
    n_x: int = 32
    n_y: int = 48
    y_cut: float = 6.0
    c_max: int = 16
    d_factor: float = 10.0   # |cx + d| <= d_factor * c * y
    tail_nodes: int = 24


def _ramanujan_sum(c: int, m: int) -> int:
    total = 0
    g = math.gcd(c, m)
    for d in range(1, g + 1):
        if g % d == 0:
            total += _mobius(c // d) * d
    return total


def _mobius(n: int) -> int:
    res, k = 1, 2
    while k * k <= n:
        if n % k == 0:
            n //= k
            if n % k == 0:
                return 0
            res = -res
        k += 1
    return -res if n > 1 else res


def _bulk(m, xi, bump, field, grid):
    xg, xw = leggauss(grid.n_x)
    yg, yw = leggauss(grid.n_y)
    X, Y, W = [], [], []
    for x0, wx in zip(0.5 * xg, 0.5 * xw):
        lo = math.sqrt(1 - x0 * x0)
        half = 0.5 * (grid.y_cut - lo)
        X.append(np.full(grid.n_y, x0))
        Y.append(lo + half * (yg + 1))
        W.append(wx * half * yw)
    X, Y, W = np.concatenate(X), np.concatenate(Y), np.concatenate(W)
    W = W / Y**2
    comp = field.components(X, Y)
    C, K = _ktype_products(comp, field.ps)
    that = bump.fourier(np.arange(-K, K + 1))
    z = X + 1j * Y

    # identity coset
    g0 = _theta_average(C, K, that, np.zeros(X.shape))
    total = np.sum(W * np.exp(xi * np.log(Y) + 2j * math.pi * m * z) * g0)

    order = np.argsort(Y)
    for c in range(1, grid.c_max + 1):
        inv = np.array([pow(r, -1, c) if math.gcd(r, c) == 1 else 0 for r in range(c)]) if c > 1 else np.zeros(1, int)
        for chunk in np.array_split(order, max(1, len(order) // 96)):
            xs, ys = X[chunk], Y[chunk]
            reach = grid.d_factor * c * ys.max()
            d = np.arange(math.floor(-c * xs.max() - reach), math.ceil(-c * xs.min() + reach) + 1)
            d = d[np.gcd(d, c) == 1]
            a = inv[np.mod(d, c)]
            zz = z[chunk][:, None]
            j = c * zz + d[None, :]
            keep = np.abs(j.real) <= grid.d_factor * c * ys[:, None]
            gz = a[None, :] / c - 1 / (c * j)
            h = np.exp(xi * np.log(gz.imag) + 2j * math.pi * m * gz)
            G = _theta_average(C[:, chunk], K, that, np.angle(j))
            total += np.sum(W[chunk][:, None] * np.where(keep, h * G, 0))
    return complex(total)


def _cusp_tail(m, xi, bump, field, grid):
    """Non-identity cosets on y > y_cut, where Phi is its constant term."""
    r, rw = leggauss(grid.tail_nodes)
    r, rw = 0.5 * (r + 1), 0.5 * rw           # r = y_cut / y in (0, 1)
    ph, pw = leggauss(2 * grid.tail_nodes)
    ph, pw = 0.5 * math.pi * ph, 0.5 * math.pi * pw   # s = tan(phi)
    y = grid.y_cut / r
    comp = field.constant_components(y)
    if comp is None:
        return 0j
    C, K = _ktype_products(comp, field.ps)
    that = bump.fourier(np.arange(-K, K + 1))
    beta = np.broadcast_to(0.5 * math.pi - ph, (y.size, ph.size))
    G = _theta_average(C, K, that, beta)                # (ny, nphi)
    cosph = np.cos(ph)
    inv_w = cosph * (np.sin(ph) - 1j * cosph)           # 1 / (s + i)
    total = 0j
    for c in range(1, grid.c_max + 1):
        rs = _ramanujan_sum(c, m)
        if rs == 0:
            continue
        e = np.exp(-2j * math.pi * m / (c * c) * np.outer(1 / y, inv_w))
        inner = (e * G * cosph ** (2 * xi - 2)) @ pw
        total += rs * c ** (-2 * xi) * np.sum(rw * grid.y_cut ** (-xi) * r ** (xi - 1) * inner)
    return complex(total)


def inner_product_fundamental(m: int, xi: complex, bump: BumpSpec, field: PhiField,
                              grid: FundamentalGrid = FundamentalGrid(), estimate_error: bool = True):
    """<P h, |Phi|^2> over Gamma \\ G with measure dx dy / y^2 dtheta / pi.

    The theta integral is done exactly through the K-type expansion; F is
    covered by Gauss-Legendre in x and in y up to y_cut, and the cusp above
    y_cut by the unfolded constant-term integral.  The error is the change
    against a coarser grid plus the coset truncation estimate.
    """
    xi = complex(xi)
    if xi.real <= 1:
        raise ValueError("inner_product_fundamental needs Re xi > 1")
    val = _bulk(m, xi, bump, field, grid) + _cusp_tail(m, xi, bump, field, grid)
    err = 0.0
    if estimate_error:
        coarse = FundamentalGrid(grid.n_x - 8, grid.n_y - 12, grid.y_cut, max(grid.c_max // 2, 1),
                                 grid.d_factor * 0.75, grid.tail_nodes)
        other = _bulk(m, xi, bump, field, coarse) + _cusp_tail(m, xi, bump, field, coarse)
        err = abs(val - other)
    return IntegrationResult(val, err, True)


# --------------------------------------------------------------------------
# Strip integrals
# --------------------------------------------------------------------------

def _strip_integrand(table: CoefficientTable, m: int, xi: complex, alpha: complex, N: int):
    M = 1 << int(math.ceil(math.log2(N + m + 1)))
    n = np.arange(1, N + 1, dtype=float)
    base = table.lam[1:N + 1] * np.exp((complex(alpha) - 0.5) * np.log(n))
    phase = np.exp(2j * math.pi * m * np.arange(M) / M)

    def f(y):
        y = np.atleast_1d(y)
        out = np.zeros(y.shape, dtype=complex)
        for i in range(0, y.size, 64):
            yy = y[i:i + 64]
            c = np.zeros((yy.size, M), dtype=complex)
            c[:, 1:N + 1] = base * np.exp(-2 * math.pi * np.outer(yy, n))
            phi = np.fft.ifft(c, axis=1) * M                   # Phi / y^alpha on the x grid
            xint = np.mean(np.abs(phi) ** 2 * phase, axis=1)   # periodic trapezoid
            out[i:i + 64] = (np.exp((xi - 2 + 2 * complex(alpha).real) * np.log(yy) - 2 * math.pi * m * yy)
                             * xint / math.pi)
        return out

    return f


def strip_integral(m: int, xi: complex, table: CoefficientTable, alpha: complex,
                   N: int | None = None, spec: QuadratureSpec = QuadratureSpec()) -> IntegrationResult:
    """(1/pi) int_0^inf int_0^1 y^{xi-2} e(m(x + iy)) |Phi(n[x] a[y], alpha)|^2 dx dy.

    Phi is the closed expansion y^alpha sum_{n <= N} lambda(n) n^{alpha-1/2} e(nz),
    real alpha.  The x-integral is a periodic trapezoid on M >= N + m + 1
    points (exact for this trigonometric polynomial), the y-integral is
    double exponential on (0, inf).
    """
    xi = complex(xi)
    if xi.real <= 1:
        raise ValueError("strip_integral needs Re xi > 1")
    if abs(complex(alpha).imag) > 0:
        raise ValueError("strip_integral needs real alpha")
    N = _n_range(table, N)
    f = _strip_integrand(table, int(m), xi, alpha, N)
    return specfun.integrate(f, 0.0, math.inf, spec)


def eisenstein_cross_term(table: CoefficientTable, vector: KirillovVector, m: int, xi: complex) -> complex:
    """Strip contribution of constant term times the m-th Fourier term.

    (1/pi) conj(lambda(m)) m^{alpha-1/2} sum_pm A_pm Gamma(xi + alpha - 1/2 +- nu) / (4 pi m)^{xi + alpha - 1/2 +- nu}
    with A_+ = zeta(1 + 2 nu) sum a_p, A_- = sum a_p zeta(2 nu) J_p.
    """
    nu, alpha, xi = vector.nu, vector.alpha, complex(xi)
    A_plus = A_minus = 0j
    for p in vector.ps:
        a = vector.a(int(p))
        if a == 0:
            continue
        A, B = eisenstein_constant_coeffs(nu, int(p))
        A_plus += a * A
        A_minus += a * B
    total = 0j
    for amp, s in ((A_plus, nu), (A_minus, -nu)):
        e = xi + alpha - 0.5 + s
        total += amp * np.exp(specfun.loggamma(e) - e * math.log(4 * math.pi * m))
    lam_m = table.lam[m]
    return complex(np.conj(lam_m) * np.exp((alpha - 0.5) * math.log(m)) * total / math.pi)


def _richardson(deltas, values):
    """Value at delta = 0 of the polynomial in delta^2 through the data."""
    h = np.asarray(deltas, dtype=float) ** 2
    vals = np.asarray(values, dtype=complex)
    total = 0j
    for i in range(len(h)):
        wgt = 1.0
        for j in range(len(h)):
            if j != i:
                wgt *= h[j] / (h[j] - h[i])
        total += wgt * vals[i]
    return complex(total)


def unfolding_check(table: CoefficientTable, m: int = 1, xi: complex = 3.0, alpha: float = 4.0,
                    deltas=(0.4, 0.2, 0.1), P: int = 24, N_strip: int = 2000,
                    grid: FundamentalGrid = FundamentalGrid(), tol_expansion: float = 1e-3,
                    tol_unfolding: float = 1e-2) -> VerificationReport:
    """Compare (i) the weighted shifted convolution, (ii) the strip integral and
    (iii) the fundamental-domain inner product, each times the unfolding constant.

    For a discrete-series table Phi is the weight-2l vector itself and alpha
    is replaced by l.  For a divisor table the constant term of Phi adds a
    cross term to the strip integral, reported as its own leg.
    """
    t0 = time.perf_counter()
    xi = complex(xi)
    if xi.real <= CONVOLUTION_FLOOR:
        raise ValueError(f"unfolding_check needs Re xi > {CONVOLUTION_FLOOR}")
    rep = VerificationReport("unfolding")
    series = table.spectral.series
    if series == "holomorphic-discrete":
        alpha_eff = float(table.spectral.weight_ell)
        field = HolomorphicField(table)
        vector = None
        rep.notes.append(f"discrete series: Phi is the weight-{2 * int(alpha_eff)} vector, alpha = l = {alpha_eff:g}")
    else:
        if float(alpha) < 3:
            raise ValueError("unfolding_check needs real alpha >= 3")
        alpha_eff = float(alpha)
        vector = build_kirillov_vector(table.spectral.nu, alpha_eff, P)
        field = KirillovField(table, vector)
    Cst = unfolding_constant(xi, alpha_eff)

    s1, t1 = shifted_convolution_alpha(table, m, xi, alpha_eff, with_error=True)
    rep.add_leg("(i) shifted convolution", s1, t1)
    N_strip = min(N_strip, table.N_max)
    st = strip_integral(m, xi, table, alpha_eff, N_strip)
    _, tail_strip = shifted_convolution_alpha(table, m, xi, alpha_eff, N_strip, with_error=True)
    rep.add_leg("(ii) strip integral", Cst * st.value, abs(Cst) * st.error + tail_strip)
    rep.compare("(i) shifted convolution", "(ii) strip integral", tol_expansion)

    ref_name = "(ii) strip integral"
    if series == "eisenstein-analogue":
        X = Cst * eisenstein_cross_term(table, vector, m, xi)
        rep.add_leg("constant-term cross term", X)
        lg = rep.leg("(ii) strip integral")
        rep.add_leg("(ii) strip + cross term", lg.value + X, lg.error_budget)
        ref_name = "(ii) strip + cross term"

    vals, errs = [], []
    for d in deltas:
        res = inner_product_fundamental(m, xi, BumpSpec(d), field, grid)
        vals.append(Cst * res.value)
        errs.append(abs(Cst) * res.error)
    extrap = _richardson(deltas, vals)
    extrap2 = _richardson(deltas[1:], vals[1:]) if len(deltas) > 2 else vals[-1]
    budget = abs(extrap - extrap2) + max(errs)
    rep.add_leg("(iii) fundamental domain", extrap, budget,
                inconclusive=budget > tol_unfolding * abs(extrap))
    rep.compare(ref_name, "(iii) fundamental domain", tol_unfolding)
    rep.truncation.update(table=table.source, m=m, xi=xi, alpha=alpha_eff, P=P if vector else None,
                          N_strip=N_strip, N_table=table.N_max, deltas=list(deltas),
                          inner_by_delta=[complex(v) for v in vals],
                          grid=[grid.n_x, grid.n_y, grid.y_cut, grid.c_max, grid.d_factor])
    rep.notes.append("delta -> 0 by polynomial extrapolation in delta^2 (even bump)")
    rep.wall_time = time.perf_counter() - t0
    return rep


# --------------------------------------------------------------------------
# Selberg-type inner product (discrete series)
# --------------------------------------------------------------------------

def selberg_inner_product(table: CoefficientTable, m: int, xi: complex, N: int | None = None) -> complex:
    """<P_m(.; xi), |psi|^2> on Gamma \\ G / K by unfolding, in sum form.

    const^2 sum lambda(n) conj(lambda(n+m)) (n(n+m))^{l-1/2} Gamma(xi+2l-1) / (4 pi (n+m))^{xi+2l-1}.
    """
    if table.spectral.series != "holomorphic-discrete":
        raise ValueError("selberg_inner_product needs a discrete-series table")
    ell = table.spectral.weight_ell
    xi = complex(xi)
    N = _n_range(table, N)
    if N <= m:
        return 0j
    n = np.arange(1, N - m + 1, dtype=float)
    lam = table.lam
    e = xi + 2 * ell - 1
    terms = (lam[1:N - m + 1] * np.conj(lam[1 + m:N + 1])
             * np.exp((ell - 0.5) * np.log(n * (n + m)) + specfun.loggamma(e) - e * np.log(4 * math.pi * (n + m))))
    return complex(holomorphic_constant(ell) ** 2 * np.sum(terms))


def selberg_inner_product_quadrature(table: CoefficientTable, m: int, xi: complex,
                                     N: int | None = None) -> IntegrationResult:
    """The same quantity as the 2D quadrature int int y^xi e(mz) |psi|^2 dx dy / y^2."""
    if table.spectral.series != "holomorphic-discrete":
        raise ValueError("selberg_inner_product_quadrature needs a discrete-series table")
    ell = table.spectral.weight_ell
    res = strip_integral(m, xi, table, ell, _n_range(table, N))
    k = math.pi * holomorphic_constant(ell) ** 2
    return IntegrationResult(k * res.value, k * res.error, res.converged)


# --------------------------------------------------------------------------
# The xi-multiplier transform
# --------------------------------------------------------------------------

@dataclass
class XiTransformResult:
    value: complex
    reference: complex
    ratio: complex
    error: float
    poles: list = field(default_factory=list)
    N: int = 0
    meta: dict = field(default_factory=dict)


def pole_audit(u: complex, v: complex, alpha: complex, c: float, sigma: float, margin: float = 0.25):
    """Gamma poles within ``margin`` of the xi-line Re xi = sigma or the t-line Im t = -c.

    Also enforces the placement conditions: every pole of Gamma(u + v - xi)
    to the right of the xi-line, and Re(3/2 - u - alpha) + c > 1 so that the
    t-line lies below every pole of Gamma(3/2 - u - alpha + it).
    """
    u, v, alpha = complex(u), complex(v), complex(alpha)
    near = []
    # Gamma(u + v - xi): xi = u + v + k
    for k in range(0, 64):
        pole = u + v + k
        dist = abs(pole.real - sigma)
        if dist < margin:
            near.append(("Gamma(u+v-xi)", complex(pole), dist))
    # Gamma(3/2 - u - alpha + it): t = i (3/2 - u - alpha + k)
    for k in range(0, 64):
        pole = 1j * (1.5 - u - alpha + k)
        dist = abs(pole.imag + c)
        if dist < margin:
            near.append(("Gamma(3/2-u-alpha+it)", complex(pole), dist))
    problems = [f"{name} pole at {p} within {d:.3g} of its contour" for name, p, d in near]
    if sigma >= (u + v).real:
        problems.append(f"xi-line Re xi = {sigma} not left of the pole at xi = u + v")
    if sigma <= CONVOLUTION_FLOOR:
        problems.append(f"xi-line Re xi = {sigma} not above the convergence floor {CONVOLUTION_FLOOR}")
    if (1.5 - u - alpha).real + c <= 1:
        problems.append(f"t-line Im t = -{c} too high: need c > Re(u + alpha) - 1/2")
    return problems


def xi_transform(table: CoefficientTable, m: int, u: complex, v: complex, alpha: complex,
                 weight: WeightFunction, c: float = 8.0, sigma: float = 2.5, N: int = 2000,
                 eta_max: float = 1000.0, h_eta: float = 0.1, h_t: float = 0.05) -> XiTransformResult:
    """(1/2 pi i) int_{Re xi = sigma} S(xi) m^{xi-u-v} Gamma(u+v-xi) G(xi) dxi with
    G(xi) = (1/2 pi i) int_{Im t = -c} Gamma(3/2-u-alpha+it) / Gamma(v+3/2-alpha-xi+it) g(t) dt
    and S the weighted shifted convolution; compared with the inner sum of the
    off-diagonal term at the same length N.

    Both integrals are trapezoid rules.  The t-integrand is entire and
    Gaussian on its line; the xi-integrand decays only like
    exp(-(T log|Im xi|)^2 / 4) |Im xi|^k, so the xi-line is cut at
    |Im xi| = eta_max (default 1000) and the contribution of the outer half
    of the range is reported as the cut-off error.
    """
    u, v, alpha = complex(u), complex(v), complex(alpha)
    problems = pole_audit(u, v, alpha, c, sigma)
    if problems:
        raise PoleError("rejected contour configuration: " + "; ".join(problems))
    N = min(N, table.N_max)
    eta = np.arange(-eta_max, eta_max + 0.5 * h_eta, h_eta)
    xi = sigma + 1j * eta

    # S(xi) on the line
    n = np.arange(1, N - m + 1, dtype=float)
    lam = table.lam
    base = lam[1:N - m + 1] * np.conj(lam[1 + m:N + 1]) * np.exp(-(alpha - 0.5) * np.log1p(m / n))
    logs = np.log(n + m)
    S = np.empty(xi.shape, dtype=complex)
    for i in range(0, xi.size, 256):
        S[i:i + 256] = np.exp(-np.outer(xi[i:i + 256], logs)) @ base

    # Gamma(u + v - xi) G(xi) on the line, t = s - i c; the two Gamma factors
    # over- and underflow separately at large |Im xi|, so they are combined
    # in the exponent
    s_max = math.sqrt(4 * weight.T**2 * (c * c / weight.T**2 + 40)) / 2 + 1
    s = np.arange(-s_max, s_max + 0.5 * h_t, h_t)
    t = s - 1j * c
    gt = np.exp(-(t / weight.T) ** 2)
    num = specfun.loggamma(1.5 - u - alpha + 1j * t)
    outer = specfun.loggamma(u + v - xi)
    G = np.empty(xi.shape, dtype=complex)
    for i in range(0, xi.size, 64):
        den = specfun.loggamma((v + 1.5 - alpha - xi[i:i + 64])[:, None] + 1j * t[None, :])
        expo = outer[i:i + 64, None] + num[None, :] - den
        G[i:i + 64] = (np.exp(expo) * gt[None, :]).sum(axis=1) * h_t / (2j * math.pi)

    integrand = S * np.exp((xi - u - v) * math.log(m)) * G
    # dxi = i d eta
    value = complex(np.sum(integrand) * h_eta * 1j / (2j * math.pi))
    # the integrand decays like exp(-(T log|eta|)^2 / 4) |eta|^k; the outer
    # half of the range bounds what lies beyond it
    outer_half = np.abs(eta) > 0.5 * eta_max
    tail = float(abs(np.sum(integrand[outer_half])) * h_eta / (2 * math.pi))
    ref = offdiagonal_inner(table, m, u, v, weight, N)
    return XiTransformResult(value, ref, value / ref, tail, problems, N,
                             dict(c=c, sigma=sigma, eta_max=eta_max, h_eta=h_eta, h_t=h_t))
