"""The vector whose Kirillov image is u^alpha e^{-2 pi u}.

Run: python3 demos/01_kirillov_vector.py
"""
import math

import numpy as np

from kirillov_lab import kirillov as K

nu, alpha, P = 0.5j, 4.0, 24

# K-type coefficients in closed form, and one cross-check by quadrature
v = K.build_kirillov_vector(nu, alpha, P)
for p in (-3, 0, 3):
    print(f"a_{p:+d}: closed {v.a(p):.6e}   numeric {K.ap_numeric(nu, alpha, p):.6e}")

# |a_p| decays like |p|^{-alpha - 1/2}; alpha = 4 is an integer so a_p = 0 for p > 4
print("fitted decay exponents:", K.fit_decay_exponent(nu, alpha), "expected", -alpha - 0.5)

# unitarity: sum |a_p|^2 equals the norm of u^alpha e^{-2 pi u}
total = float(np.sum(np.abs(v.coefficients) ** 2))
print(f"Parseval: {total:.12e} vs {K.parseval_target(alpha):.12e}, tail bound {K.parseval_tail_bound(v):.1e}")

# the image itself, on both sides of the origin
for u in (-1.0, 0.25, 1.0, 4.0):
    got = K.kirillov_apply(v, u)
    want = complex(K.kirillov_target(alpha, u))
    print(f"K phi({u:+.2f}) = {got:.6e}   target {want:.6e}")

# larger alpha buys a smoother vector and a smaller tail at the same P
for a in (3.0, 6.0):
    w = K.build_kirillov_vector(nu, a, P)
    print(f"alpha={a}: tail bound relative to envelope {w.tail_bound / w.C:.2e}")
print("peak of the target at u = alpha / 2 pi =", alpha / (2 * math.pi))
