"""Generate the bundled even Maass cusp form dataset by Hejhal's method.

This is an offline tool, not part of the library: it solves the collocation
system for the Fourier coefficients of the first even Maass cusp form for
SL(2, Z) and writes them in the dataset format read by
``kirillov_lab.coefficients.ingest_maass``.  Every coefficient n <= N is
solved for independently, so the Hecke relations checked at ingestion are
a genuine test of the data.

    python3 tools/make_maass_dataset.py [--out PATH] [--refine]
"""
from __future__ import annotations

import argparse
import math
import warnings
from pathlib import Path

import numpy as np

from kirillov_lab import geometry, specfun
from kirillov_lab.coefficients import MaassDatasetRecord, write_maass_dataset

# first even eigenvalue 1/4 + R^2 (literature value, reproduced by --refine)
R_FIRST_EVEN = 13.779751351890738


def _k(R: float, x: np.ndarray) -> np.ndarray:
    # K_{iR}(x) exp(pi R / 2), real and O(1) in the oscillatory range
    return (specfun.bessel_k(1j * R, x) * math.exp(math.pi * R / 2)).real


def solve(R: float, M0: int, Y: float, Q: int | None = None) -> np.ndarray:
    """Coefficients c_1..c_M0 (c_1 = 1) of an even form with parameter R."""
    Q = Q or M0 + 20
    xm = (np.arange(1, Q + 1) - 0.5) / (2 * Q)  # half of a symmetric grid
    ystar = np.empty(Q)
    xstar = np.empty(Q)
    for i, x in enumerate(xm):
        pt, _ = geometry.reduce_to_fundamental_domain(geometry.GroupPoint(x, Y))
        xstar[i], ystar[i] = pt.x, pt.y
    ell = np.arange(1, M0 + 1)
    # W[m, l] = sqrt(y*) K(2 pi l y*) cos(2 pi l x*)
    W = np.empty((Q, M0))
    for i in range(Q):
        W[i] = math.sqrt(ystar[i]) * _k(R, 2 * math.pi * ell * ystar[i]) * np.cos(2 * math.pi * ell * xstar[i])
    C = np.cos(2 * math.pi * np.outer(ell, xm))  # [n, m]
    V = (2.0 / Q) * C @ W
    V -= np.diag(math.sqrt(Y) * _k(R, 2 * math.pi * ell * Y))
    # fix c_1 = 1 and drop the n = 1 equation
    A = V[1:, 1:]
    b = -V[1:, 0]
    c = np.linalg.solve(A, b)
    return np.concatenate([[1.0], c])


def residual(R: float, M0: int, Y1: float, Y2: float) -> float:
    """Mismatch of c_2 between two heights; vanishes at an eigenvalue."""
    return solve(R, M0, Y1)[1] - solve(R, M0, Y2)[1]


def refine(R: float, M0: int, Y1: float, Y2: float, steps: int = 8) -> float:
    r0, r1 = R - 1e-7, R + 1e-7
    f0, f1 = residual(r0, M0, Y1, Y2), residual(r1, M0, Y1, Y2)
    for _ in range(steps):
        if f1 == f0:
            break
        r0, r1, f0 = r1, r1 - f1 * (r1 - r0) / (f1 - f0), f1
        f1 = residual(r1, M0, Y1, Y2)
        if abs(r1 - r0) < 1e-15:
            break
    return float(r1)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    here = Path(__file__).resolve().parents[1]
    ap.add_argument("--out", default=here / "src/kirillov_lab/data/maass_even_r13.779.txt")
    ap.add_argument("--R", type=float, default=R_FIRST_EVEN)
    ap.add_argument("--M0", type=int, default=190)
    ap.add_argument("--N", type=int, default=80, help="number of coefficients written")
    ap.add_argument("--refine", action="store_true")
    args = ap.parse_args(argv)
    # large l y* terms underflow harmlessly to zero
    warnings.simplefilter("ignore", specfun.UnderflowWarning)

    Y1, Y2 = 0.045, 0.041
    R = refine(args.R, args.M0, Y1, Y2) if args.refine else args.R
    c1, c2 = solve(R, args.M0, Y1), solve(R, args.M0, Y2)
    N = args.N
    spread = float(np.max(np.abs(c1[:N] - c2[:N])))
    print(f"R = {R!r}; max |c(Y1) - c(Y2)| over n <= {N}: {spread:.2e}")
    rec = MaassDatasetRecord(
        R=R, parity="even", lam={n: float(c1[n - 1]) for n in range(1, N + 1)},
        precision=max(spread, 1e-14),
        origin=f"Hejhal collocation, M0={args.M0}, Y={Y1}, double precision")
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    write_maass_dataset(rec, args.out)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
