"""How many K-types the Maass form at R = 13.78 needs.

The series sum_p a_p phi_p only settles into its |p|^{-alpha-1/2} decay once
|p| is well beyond |nu|, so P = 24 is not enough at R = 13.78; the divisor
table with nu = 0.5i passes at rounding level with the same P.

Run: python3 demos/04_maass_truncation.py
"""
from kirillov_lab import coefficients, kirillov as K
from kirillov_lab.suites import make_table

alpha = 4.0
points = [(0.0, 0.5), (0.0, 1.0), (0.3, 0.5), (0.3, 2.0)]
maass = make_table("maass", 0)
divisor = coefficients.divisor_table(0.5j, 4000)
print("dataset:", maass.source, "R =", maass.meta["R"], "Hecke residual", f"{maass.meta['hecke_residual']:.1e}")

for name, tab in (("divisor nu=0.5i", divisor), ("Maass R=13.78", maass)):
    for P in (24, 32, 48, 64):
        v = K.build_kirillov_vector(tab.spectral.nu, alpha, P)
        worst = max(abs(K.phi_capital_series(tab, v, x, y) - K.phi_capital_closed(tab, alpha, x, y))
                    / abs(K.phi_capital_closed(tab, alpha, x, y)) for x, y in points)
        print(f"{name:16s} P={P:2d}  worst relative gap {worst:.2e}  tail bound {v.tail_bound:.1e}")
        if name.startswith("divisor"):
            break
