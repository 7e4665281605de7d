"""Hecke-normalised coefficient tables and the automorphic expansions built on them.

Three families are supported:

* holomorphic discrete series of weight 12, from the exact Ramanujan tau
  values of Delta(z) = q prod (1 - q^n)^24;
* the Eisenstein analogue, lambda_nu(n) = sum_{ad=n} (a/d)^nu;
* unitary principal series, from ingested Maass-form data.

The unit-norm constants of the representation are never computed; every
evaluator uses rho(n) = lambda(n), so all quantities are defined up to one
global factor per table and every degree-2 identity is unaffected.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import geometry, specfun
from .geometry import GroupPoint, UnimodularMatrix

SERIES = ("unitary-principal", "holomorphic-discrete", "eisenstein-analogue")
HECKE_GATE = 1e-6
Y_FLOOR = 0.05
TAIL_TOL = 1e-13


class TruncationWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SpectralData:
    series: str
    nu: complex
    weight_ell: int | None = None
    parity: str | None = None

    def __post_init__(self):
        if self.series not in SERIES:
            raise ValueError(f"unknown series {self.series!r}")
        object.__setattr__(self, "nu", complex(self.nu))
        if self.series == "unitary-principal" and abs(self.nu.real) > 1e-14:
            raise ValueError("unitary principal series needs Re nu = 0")
        if self.series == "holomorphic-discrete":
            if self.weight_ell is None or self.weight_ell < 1:
                raise ValueError("discrete series needs weight_ell >= 1")
            if abs(self.nu - (self.weight_ell - 0.5)) > 1e-14:
                raise ValueError("discrete series needs nu = weight_ell - 1/2")
        if self.parity not in (None, "even", "odd"):
            raise ValueError(f"parity must be even or odd, got {self.parity!r}")

    @classmethod
    def discrete(cls, ell: int) -> "SpectralData":
        return cls("holomorphic-discrete", ell - 0.5, weight_ell=ell)

    @property
    def sign(self) -> int:
        """rho(-n) = sign * rho(n)."""
        return -1 if self.parity == "odd" else 1


@dataclass(frozen=True)
class CoefficientTable:
    """lambda(n) for 1 <= n <= N_max, stored at index n of ``lam``."""
    spectral: SpectralData
    lam: np.ndarray
    N_max: int
    source: str
    exact: tuple | None = None
    meta: dict = field(default_factory=dict)
    normalized: bool = True

    def __post_init__(self):
        lam = np.array(self.lam)
        if lam.shape != (self.N_max + 1,):
            raise ValueError("lam must have length N_max + 1 (index 0 unused)")
        if self.normalized and lam[1] != 1:
            raise ValueError(f"lambda(1) must be 1, got {lam[1]!r}")
        lam[0] = 0
        lam.setflags(write=False)
        object.__setattr__(self, "lam", lam)

    def __getitem__(self, n: int):
        return self.lam[n]

    def scaled(self, c: float) -> "CoefficientTable":
        """The table c * lambda, used to check degree-2 homogeneity."""
        return CoefficientTable(self.spectral, c * self.lam, self.N_max,
                                f"{self.source} (scaled by {c})", None, dict(self.meta), normalized=False)

    def truncated(self, N: int) -> "CoefficientTable":
        ex = self.exact[:N + 1] if self.exact is not None else None
        return CoefficientTable(self.spectral, self.lam[:N + 1], N, self.source, ex,
                                dict(self.meta), self.normalized)


def synthetic_table(values: dict[int, complex] | Sequence, spectral: SpectralData,
                    N_max: int | None = None) -> CoefficientTable:
    """A table with arbitrary values, exempt from the lambda(1) = 1 rule."""
    if not isinstance(values, dict):
        values = {i + 1: v for i, v in enumerate(values)}
    N = N_max or max(values)
    lam = np.zeros(N + 1, dtype=complex if any(isinstance(v, complex) for v in values.values()) else float)
    for n, v in values.items():
        lam[n] = v
    return CoefficientTable(spectral, lam, N, "synthetic", normalized=False)


# --------------------------------------------------------------------------
# Ramanujan tau
# --------------------------------------------------------------------------

_TAU_PRIMES = (1125899906842597, 1125899906842589, 1125899906842573)  # < 2^50


def _jacobi_cube(N: int) -> dict[int, int]:
    # prod (1 - q^n)^3 = sum_k (-1)^k (2k+1) q^{k(k+1)/2}
    out, k = {}, 0
    while k * (k + 1) // 2 <= N:
        out[k * (k + 1) // 2] = (-1) ** k * (2 * k + 1)
        k += 1
    return out


def _eta24_mod(N: int, prime: int) -> np.ndarray:
    sparse = _jacobi_cube(N)
    acc = np.zeros(N + 1, dtype=np.int64)
    for e, c in sparse.items():
        acc[e] = c % prime
    for _ in range(7):
        new = np.zeros_like(acc)
        for e, c in sparse.items():
            # |c| < 2^10 and entries < 2^50, so the product stays inside int64
            new[e:] = (new[e:] + c * acc[:N + 1 - e]) % prime
        acc = new
    return acc


def tau_values(N: int) -> list[int]:
    """Exact tau(0..N) (tau(0) = 0) by multi-modular sparse products and CRT."""
    if not 1 <= N <= 10**5:
        raise ValueError("tau_values needs 1 <= N <= 10^5")
    residues = [_eta24_mod(N - 1, p) for p in _TAU_PRIMES]
    modulus = math.prod(_TAU_PRIMES)
    # Deligne with d(n) <= 2 sqrt(n): |tau(n)| <= 2 n^6; the symmetric lift
    # is unambiguous while twice that stays below the modulus.
    bound = 4 * N**6
    if bound >= modulus:
        raise OverflowError("CRT modulus too small for the requested N")
    parts = []
    for p in _TAU_PRIMES:
        m = modulus // p
        parts.append((m, pow(m, -1, p)))
    tau = [0]
    half = modulus // 2
    for k in range(N):
        r = 0
        for (m, inv), res, p in zip(parts, residues, _TAU_PRIMES):
            r += int(res[k]) * inv % p * m
        r %= modulus
        tau.append(r - modulus if r > half else r)
    return tau


def tau_values_naive(N: int) -> list[int]:
    """Exact tau(0..N) by direct Python-int power-series products (small N)."""
    series = [0] * N
    series[0] = 1
    for n in range(1, N):
        for _ in range(24):
            for k in range(N - 1, n - 1, -1):
                series[k] -= series[k - n]
    return [0] + series


def tau_table(N: int) -> CoefficientTable:
    tau = tau_values(N)
    n = np.arange(N + 1, dtype=float)
    with np.errstate(divide="ignore"):
        lam = np.array([float(t) for t in tau]) / np.where(n > 0, n, 1.0) ** 5.5
    return CoefficientTable(SpectralData.discrete(6), lam, N, "tau power series", tuple(tau))


# --------------------------------------------------------------------------
# Divisor table
# --------------------------------------------------------------------------

def divisor_table(nu: complex, N: int) -> CoefficientTable:
    """lambda_nu(n) = sum_{ad=n} (a/d)^nu, by a sieve over a."""
    nu = complex(nu)
    lam = np.zeros(N + 1, dtype=complex)
    logs = np.log(np.arange(1, N + 1, dtype=float))
    for a in range(1, N + 1):
        k = N // a
        lam[a::a][:k] += np.exp(nu * (logs[a - 1] - logs[:k]))
    if abs(nu.real) < 1e-15 or abs(nu.imag) < 1e-15:
        # pairing a <-> d makes the sum real on both axes
        lam = lam.real.copy()
    spectral = SpectralData("eisenstein-analogue", nu)
    return CoefficientTable(spectral, lam, N, "divisor")


# --------------------------------------------------------------------------
# Hecke relations
# --------------------------------------------------------------------------

def _hecke_pairs(N: int):
    for m in range(2, N + 1):
        for n in range(m, N // m + 1):
            yield m, n


def hecke_residual(table: CoefficientTable, limit: int | None = None):
    """max |lambda(m)lambda(n) - sum_{d | (m,n)} lambda(mn/d^2)| over mn <= limit.

    Returns ``(residual, (m, n))``.  Tables carrying exact integer values
    (tau) are checked in integer arithmetic on tau itself, where the
    relation reads tau(m)tau(n) = sum d^11 tau(mn/d^2).
    """
    N = min(limit or table.N_max, table.N_max)
    worst, where = 0.0, None
    if table.exact is not None:
        t = table.exact
        for m, n in _hecke_pairs(N):
            g = math.gcd(m, n)
            rhs = sum(d**11 * t[m * n // (d * d)] for d in range(1, g + 1) if g % d == 0)
            diff = abs(t[m] * t[n] - rhs)
            if diff > worst:
                worst, where = float(diff), (m, n)
        return worst, where
    lam = table.lam
    for m, n in _hecke_pairs(N):
        g = math.gcd(m, n)
        rhs = sum(lam[m * n // (d * d)] for d in range(1, g + 1) if g % d == 0)
        diff = abs(lam[m] * lam[n] - rhs)
        if diff > worst:
            worst, where = float(diff), (m, n)
    return worst, where


def hecke_first_violation(table: CoefficientTable, gate: float = HECKE_GATE, limit: int | None = None):
    """The violated relation with smallest mn (then smallest m), or None.

    Returns ``(residual, (m, n))``.  A single bad coefficient lambda(k)
    spoils every relation it enters; the first one in mn order usually
    names it, while the maximal residual can sit further out.
    """
    N = min(limit or table.N_max, table.N_max)
    lam = table.lam
    for m, n in sorted(_hecke_pairs(N), key=lambda mn: (mn[0] * mn[1], mn[0])):
        g = math.gcd(m, n)
        rhs = sum(lam[m * n // (d * d)] for d in range(1, g + 1) if g % d == 0)
        diff = float(abs(lam[m] * lam[n] - rhs))
        if diff > gate:
            return diff, (m, n)
    return None


# --------------------------------------------------------------------------
# Maass data files
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MaassDatasetRecord:
    R: float
    parity: str
    lam: dict[int, float]
    precision: float
    origin: str

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError("R must be positive")
        if not self.precision > 0:
            raise ValueError("claimed precision must be positive")
        if self.parity not in ("even", "odd"):
            raise ValueError("parity must be even or odd")


def write_maass_dataset(rec: MaassDatasetRecord, path) -> None:
    lines = [f"#R {float(rec.R)!r}", f"#parity {rec.parity}", f"#precision {float(rec.precision)!r}",
             f"#origin {rec.origin}"]
    lines += [f"{n} {rec.lam[n]!r}" for n in sorted(rec.lam)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_maass_dataset(path) -> MaassDatasetRecord:
    header, lam = {}, {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].partition(" ")
            header[key.strip()] = value.strip()
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected 'n lambda(n)', got {raw!r}")
        try:
            lam[int(parts[0])] = float(parts[1])
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
    missing = {"R", "parity", "precision", "origin"} - header.keys()
    if missing:
        raise ValueError(f"{path}: missing header keys {sorted(missing)}")
    return MaassDatasetRecord(float(header["R"]), header["parity"], lam,
                              float(header["precision"]), header["origin"])


def ingest_maass(path) -> CoefficientTable:
    """Load a Maass dataset and record its Hecke residual.

    Tables whose residual exceeds 1e-6 are kept but marked unvalidated.
    """
    rec = read_maass_dataset(path)
    lam_map = dict(rec.lam)
    lam_map.setdefault(1, 1.0)
    N = max(lam_map)
    if sorted(lam_map) != list(range(1, N + 1)):
        raise ValueError(f"{path}: coefficients must cover 1..N without gaps")
    lam = np.array([0.0] + [lam_map[n] for n in range(1, N + 1)])
    spectral = SpectralData("unitary-principal", 1j * rec.R, parity=rec.parity)
    table = CoefficientTable(spectral, lam, N, f"ingested: {Path(path).name}, {rec.origin}")
    resid, where = hecke_residual(table)
    table.meta.update(hecke_residual=resid, hecke_worst=where, precision=rec.precision,
                      validated=resid <= HECKE_GATE, R=rec.R)
    if resid > HECKE_GATE:
        first = hecke_first_violation(table)
        table.meta.update(hecke_first=first)
        warnings.warn(f"{path}: Hecke residual {first[0]:.3g} at (m,n)={first[1]} (first violated "
                      f"relation; max {resid:.3g} at {where}); table unvalidated", stacklevel=2)
    return table


def bundled_maass_path() -> Path:
    """The even Maass form dataset shipped with the package (R = 13.7797...)."""
    return Path(__file__).resolve().parent / "data" / "maass_even_r13.779.txt"


def is_validated(table: CoefficientTable) -> bool:
    return bool(table.meta.get("validated", table.source in ("tau power series", "divisor")))


# --------------------------------------------------------------------------
# Expansion evaluators
# --------------------------------------------------------------------------

def _choose_N(table: CoefficientTable, y: float, N: int | None, tail_fn: Callable[[int], float]):
    if y < Y_FLOOR:
        raise ValueError(f"y = {y} below the evaluator floor {Y_FLOOR}")
    if N is None:
        N = 1
        while N < table.N_max and tail_fn(N) > TAIL_TOL:
            N = min(table.N_max, 2 * N)
        if tail_fn(N) > TAIL_TOL:
            warnings.warn(f"table too short at y = {y}: tail {tail_fn(N):.2e}", TruncationWarning,
                          stacklevel=3)
    N = min(N, table.N_max)
    return N, tail_fn(N)


def _bessel_tail(c_abs: float, y: float):
    # |lambda(n)| <= 2 sqrt(n) and |K_{ir}(x)| <= K_0(x)
    def tail(N):
        x = 2 * math.pi * (N + 1) * y
        if x > 700:
            return 0.0
        k0 = float(specfun.bessel_k(0.0, x).real)
        return 2 * c_abs * math.sqrt(y) * 2 * math.sqrt(N + 1) * k0 / (1 - math.exp(-2 * math.pi * y))
    return tail


def _n_terms(table, N):
    n = np.arange(1, N + 1)
    return n, table.lam[1:N + 1]


def eval_phi0(table: CoefficientTable, p: GroupPoint, N: int | None = None, with_error: bool = False):
    """phi_0(g) = c_nu sqrt(y) sum_{n != 0} lambda(|n|) e(nx) K_nu(2 pi |n| y)."""
    sd = table.spectral
    if sd.series not in ("unitary-principal", "eisenstein-analogue"):
        raise ValueError("eval_phi0 needs a principal-series table")
    c = specfun.jacquet_constant(sd.nu)
    N, tail = _choose_N(table, p.y, N, _bessel_tail(abs(c), p.y))
    n, lam = _n_terms(table, N)
    k = specfun.bessel_k(sd.nu, 2 * math.pi * n * p.y)
    ang = 2 * math.pi * n * p.x
    wave = 2 * np.cos(ang) if sd.sign == 1 else 2j * np.sin(ang)
    val = complex(c * math.sqrt(p.y) * np.sum(lam * k * wave))
    return (val, tail) if with_error else val


def holomorphic_constant(ell: int) -> float:
    """(-1)^l 2^{2l} pi^{l+1/2} / sqrt(Gamma(2l))."""
    return (-1) ** ell * math.exp(2 * ell * math.log(2) + (ell + 0.5) * math.log(math.pi)
                                  - 0.5 * math.lgamma(2 * ell))


def eval_holomorphic(table: CoefficientTable, p: GroupPoint, N: int | None = None,
                     with_error: bool = False):
    """phi_l(g) = const e^{2 i l theta} y^l sum_n lambda(n) n^{l-1/2} e(n z)."""
    sd = table.spectral
    if sd.series != "holomorphic-discrete":
        raise ValueError("eval_holomorphic needs a discrete-series table")
    ell = sd.weight_ell
    const = holomorphic_constant(ell)

    def tail(N):
        # |lambda(n)| <= d(n) <= 2 sqrt(n)
        r = math.exp(-2 * math.pi * p.y)
        return abs(const) * p.y**ell * 2 * (N + 1) ** ell * r ** (N + 1) / (1 - r)

    N, t = _choose_N(table, p.y, N, tail)
    n, lam = _n_terms(table, N)
    s = np.sum(lam * n ** (ell - 0.5) * np.exp(2j * math.pi * n * p.z))
    val = complex(const * np.exp(2j * ell * p.theta) * p.y**ell * s)
    return (val, t) if with_error else val


def jacquet_grid(p_weight: int, nu: complex, u, spec=None):
    """(A^+ phi_p(a[u]), A^- phi_p(a[u])) on an array of u."""
    spec = spec or specfun.QuadratureSpec()
    plus = specfun.jacquet_numeric(p_weight, nu, 1, u, spec)
    minus = specfun.jacquet_numeric(p_weight, nu, -1, u, spec)
    return np.atleast_1d(plus), np.atleast_1d(minus)


def eval_phi_p(table: CoefficientTable, p_weight: int, g: GroupPoint, N: int | None = None,
               spec=None, with_error: bool = False):
    """phi_p(g) = sum_{n != 0} lambda(|n|) / sqrt|n| A^{sgn n} phi_p(a[|n|] g)."""
    sd = table.spectral
    if sd.series not in ("unitary-principal", "eisenstein-analogue"):
        raise ValueError("eval_phi_p needs a principal-series table")
    c = specfun.jacquet_constant(sd.nu)
    # the K-type vectors share the e^{-2 pi u} envelope of p = 0 up to a
    # polynomial factor; the envelope of phi_0 is used for N
    N, tail = _choose_N(table, g.y, N, _bessel_tail(abs(c) * (1 + abs(p_weight)) ** 2, g.y))
    n, lam = _n_terms(table, N)
    plus, minus = jacquet_grid(p_weight, sd.nu, n * g.y, spec)
    e = np.exp(2j * math.pi * n * g.x)
    s = np.sum(lam / np.sqrt(n) * (e * plus + sd.sign * np.conj(e) * minus))
    val = complex(s * np.exp(2j * p_weight * g.theta))
    return (val, tail) if with_error else val


# --------------------------------------------------------------------------
# Eisenstein vectors
# --------------------------------------------------------------------------

def eisenstein_intertwining(nu: complex, p: int) -> complex:
    """J_p(nu): coefficient of y^{1/2 - nu} in the constant term of the standard section.

    J_p = (-1)^p 2 pi Gamma(2 nu) / (2^{2 nu} Gamma(nu + p + 1/2) Gamma(nu - p + 1/2)).
    """
    nu = complex(nu)
    return complex((-1) ** p * 2 * math.pi * specfun.gamma_complex(2 * nu) * 2 ** (-2 * nu)
                   * specfun.rgamma(nu + p + 0.5) * specfun.rgamma(nu - p + 0.5))


def eisenstein_constant_coeffs(nu: complex, p: int) -> tuple[complex, complex]:
    """(A, B) with constant term A y^{1/2+nu} + B y^{1/2-nu} of the K-type p vector.

    The vector is normalised so that its non-constant Fourier coefficients
    are exactly those of the divisor table.
    """
    nu = complex(nu)
    return (specfun.riemann_zeta(1 + 2 * nu),
            specfun.zeta_functional(2 * nu) * eisenstein_intertwining(nu, p))


def eval_eisenstein(table: CoefficientTable, p_weight: int, g: GroupPoint, N: int | None = None,
                    spec=None):
    """Weight-2p Eisenstein vector: constant term plus the divisor-table series."""
    if table.spectral.series != "eisenstein-analogue":
        raise ValueError("eval_eisenstein needs a divisor table")
    nu = table.spectral.nu
    A, B = eisenstein_constant_coeffs(nu, p_weight)
    const = (A * g.y ** (0.5 + nu) + B * g.y ** (0.5 - nu)) * np.exp(2j * p_weight * g.theta)
    if p_weight == 0:
        rest = eval_phi0(table, g, N)
    else:
        rest = eval_phi_p(table, p_weight, g, N, spec)
    return complex(const + rest)


# --------------------------------------------------------------------------
# Internal oracles
# --------------------------------------------------------------------------

def default_evaluator(table: CoefficientTable) -> Callable[[GroupPoint], complex]:
    series = table.spectral.series
    if series == "unitary-principal":
        return lambda g: eval_phi0(table, g)
    if series == "holomorphic-discrete":
        return lambda g: eval_holomorphic(table, g)
    return lambda g: eval_eisenstein(table, 0, g)


def automorphy_residual(table: CoefficientTable, points: Sequence[GroupPoint],
                        gamma: UnimodularMatrix, N: int | None = None) -> float:
    """max over points of |f(gamma g) - f(g)|."""
    series = table.spectral.series
    if series == "unitary-principal":
        f = lambda g: eval_phi0(table, g, N)  # noqa: E731
    elif series == "holomorphic-discrete":
        f = lambda g: eval_holomorphic(table, g, N)  # noqa: E731
    else:
        f = lambda g: eval_eisenstein(table, 0, g, N)  # noqa: E731
    return max(abs(f(geometry.act(gamma, g)) - f(g)) for g in points)


def casimir_residual(table: CoefficientTable, p: GroupPoint, h: float = 1e-3,
                     N: int | None = None) -> float:
    """|Omega phi_0 - (nu^2 - 1/4) phi_0| with Omega by central differences."""
    if table.spectral.series != "unitary-principal":
        raise ValueError("casimir_residual needs a unitary-principal table")
    nu = table.spectral.nu
    if N is None:
        N, _ = _choose_N(table, p.y - 2 * h, None,
                         _bessel_tail(abs(specfun.jacquet_constant(nu)), p.y - 2 * h))
    f = lambda g: eval_phi0(table, g, N)  # noqa: E731
    return abs(geometry.casimir_fd(f, p, h) - (nu * nu - 0.25) * f(p))
