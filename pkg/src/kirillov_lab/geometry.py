"""Coordinates on G = PSL(2, R) and the action of the modular group.

Every point is stored in Iwasawa form g = n[x] a[y] k[theta] with

    n[x] = [[1, x], [0, 1]],  a[y] = diag(sqrt(y), 1/sqrt(y)),
    k[theta] = [[cos, sin], [-sin, cos]].

``iwasawa`` and ``from_coords`` are exact inverses of one another; every
other sign question in the package (for instance the rotation picked up by
k under the action of a modular matrix) is settled by going through them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

DET_TOL = 1e-9


@dataclass(frozen=True)
class GroupPoint:
    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self):
        if not self.y > 0:
            raise ValueError(f"y must be positive, got {self.y!r}")
        object.__setattr__(self, "theta", float(self.theta) % math.pi)

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)


@dataclass(frozen=True)
class UnimodularMatrix:
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if abs(det - 1.0) > DET_TOL:
            raise ValueError(f"determinant {det!r} is not 1")

    @classmethod
    def from_array(cls, m) -> "UnimodularMatrix":
        m = np.asarray(m, dtype=float)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=float)

    def __matmul__(self, other: "UnimodularMatrix") -> "UnimodularMatrix":
        return UnimodularMatrix.from_array(self.as_array() @ other.as_array())

    def inverse(self) -> "UnimodularMatrix":
        return UnimodularMatrix(self.d, -self.b, -self.c, self.a)

    def normalized(self) -> "UnimodularMatrix":
        """Representative of +-M whose bottom row starts with a nonnegative entry."""
        lead = self.c if self.c != 0 else self.d
        if lead < 0:
            return UnimodularMatrix(-self.a, -self.b, -self.c, -self.d)
        return self

    def projectively_close(self, other: "UnimodularMatrix", tol: float = 1e-10) -> bool:
        return projective_distance(self, other) <= tol

    def mobius(self, z: complex) -> complex:
        return (self.a * z + self.b) / (self.c * z + self.d)


def projective_distance(m1: UnimodularMatrix, m2: UnimodularMatrix) -> float:
    """Max entrywise distance between M1 and the closer of +-M2."""
    a1, a2 = m1.as_array(), m2.as_array()
    return float(min(np.abs(a1 - a2).max(), np.abs(a1 + a2).max()))


IDENTITY = UnimodularMatrix(1.0, 0.0, 0.0, 1.0)
WEYL = UnimodularMatrix(0.0, 1.0, -1.0, 0.0)


def n_mat(x: float) -> UnimodularMatrix:
    return UnimodularMatrix(1.0, x, 0.0, 1.0)


def a_mat(y: float) -> UnimodularMatrix:
    s = math.sqrt(y)
    return UnimodularMatrix(s, 0.0, 0.0, 1.0 / s)


def k_mat(theta: float) -> UnimodularMatrix:
    c, s = math.cos(theta), math.sin(theta)
    return UnimodularMatrix(c, s, -s, c)


def iwasawa(m: UnimodularMatrix) -> GroupPoint:
    """Iwasawa coordinates (x, y, theta) of a unimodular matrix.

    With M = [[a, b], [c, d]] one has c = -sin(theta)/sqrt(y) and
    d = cos(theta)/sqrt(y), so y = 1/(c^2 + d^2) and x = Re(M i).
    """
    det = m.a * m.d - m.b * m.c
    if abs(det - 1.0) > DET_TOL:
        raise ValueError(f"non-unimodular input, det = {det!r}")
    r2 = m.c * m.c + m.d * m.d
    y = 1.0 / r2
    x = (m.a * m.c + m.b * m.d) / r2
    theta = math.atan2(-m.c, m.d)
    return GroupPoint(x, y, theta)


def from_coords(p: GroupPoint) -> UnimodularMatrix:
    s = math.sqrt(p.y)
    c, sn = math.cos(p.theta), math.sin(p.theta)
    return UnimodularMatrix(s * c - p.x * sn / s, s * sn + p.x * c / s, -sn / s, c / s)


def multiply(p: GroupPoint, q: GroupPoint) -> GroupPoint:
    return iwasawa(from_coords(p) @ from_coords(q))


def act(gamma: UnimodularMatrix, p: GroupPoint) -> GroupPoint:
    """Left action gamma . g."""
    return iwasawa(gamma @ from_coords(p))


def act_arrays(gamma: UnimodularMatrix, x, y, theta=0.0):
    """Vectorised left action on arrays of Iwasawa coordinates.

    Uses the same convention as ``iwasawa``: the new theta is
    theta - arg(c z + d), reduced mod pi.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = x + 1j * y
    j = gamma.c * z + gamma.d
    w = (gamma.a * z + gamma.b) / j
    th = np.mod(np.asarray(theta, dtype=float) - np.angle(j), math.pi)
    return w.real, w.imag, th


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    if b == 0:
        return (a, 1, 0) if a >= 0 else (-a, -1, 0)
    g, s, t = _ext_gcd(b, a % b)
    return g, t, s - (a // b) * t


def coset_reps(c_max: int, d_max: int) -> list[UnimodularMatrix]:
    """Representatives of Gamma_inf \\ Gamma in a rectangular (c, d) box.

    The identity comes first, followed by one matrix with bottom row (c, d)
    for each coprime pair with 1 <= c <= c_max and |d| <= d_max.
    """
    reps = [IDENTITY]
    for c in range(1, c_max + 1):
        for d in range(-d_max, d_max + 1):
            if math.gcd(c, d) != 1:
                continue
            # a d - b c = 1  <=>  d a + c (-b) = 1
            _, s, t = _ext_gcd(d, c)
            reps.append(UnimodularMatrix(float(s), float(-t), float(c), float(d)))
    return reps


def coset_bottom_rows(c_max: int, d_max: int) -> np.ndarray:
    """Integer array of shape (K, 4) with rows (a, b, c, d) for ``coset_reps``."""
    return np.array([[r.a, r.b, r.c, r.d] for r in coset_reps(c_max, d_max)])


def reduce_to_fundamental_domain(p: GroupPoint, max_iter: int = 10_000):
    """Move g into the standard fundamental domain.

    Returns ``(reduced_point, gamma)`` with ``act(gamma, p) == reduced_point``;
    the reduced point satisfies |x| <= 1/2 and x^2 + y^2 >= 1.
    """
    gamma = IDENTITY
    m = from_coords(p)
    for _ in range(max_iter):
        q = iwasawa(m)
        shift = math.floor(q.x + 0.5)
        if shift != 0:
            t = n_mat(-float(shift))
            gamma = t @ gamma
            m = t @ m
            q = iwasawa(m)
        if q.x * q.x + q.y * q.y < 1.0 - 1e-12:
            m = WEYL @ m
            gamma = WEYL @ gamma
            continue
        return q, gamma.normalized()
    raise RuntimeError("reduction did not terminate")


def casimir_fd(f: Callable[[GroupPoint], complex], p: GroupPoint, h: float = 1e-3) -> complex:
    """Central-difference approximation of y^2 (f_xx + f_yy) - y f_x_theta."""
    x, y, th = p.x, p.y, p.theta

    def F(dx=0.0, dy=0.0, dt=0.0):
        return f(GroupPoint(x + dx, y + dy, th + dt))

    f0 = F()
    fxx = (F(dx=h) - 2 * f0 + F(dx=-h)) / h**2
    fyy = (F(dy=h) - 2 * f0 + F(dy=-h)) / h**2
    fxt = (F(h, 0, h) - F(h, 0, -h) - F(-h, 0, h) + F(-h, 0, -h)) / (4 * h * h)
    return y * y * (fxx + fyy) - y * fxt
