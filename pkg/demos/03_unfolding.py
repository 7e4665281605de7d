"""Shifted convolution sum against the unfolded strip integral of |Phi|^2.

The full three-leg check (with the fundamental-domain quadrature and
Richardson extrapolation in the bump width) is `kirillov-lab verify unfolding`;
this demo shows the two fast legs and the constant that links them.

Run: python3 demos/03_unfolding.py
"""
from kirillov_lab import coefficients, moment

m, xi, alpha = 1, 3.0, 4.0
table = coefficients.divisor_table(0.5j, 4000)

direct = moment.shifted_convolution_alpha(table, m, xi, alpha)
strip = moment.strip_integral(m, xi, table.truncated(2000), alpha)
const = moment.unfolding_constant(xi, alpha)
print(f"shifted convolution     {direct.real:.12e}")
print(f"constant x strip        {(const * strip.value).real:.12e}   (quadrature error {abs(const) * strip.error:.1e})")
print(f"relative gap            {abs(direct - const * strip.value) / abs(direct):.1e}")

# a two-term table makes the strip integral a single Gamma integral
two = coefficients.synthetic_table({1: 1.0, 2: 0.5}, table.spectral, N_max=2)
print("two-term table:", moment.shifted_convolution_alpha(two, 1, xi, alpha),
      const * moment.strip_integral(1, xi, two, alpha).value)

# the Selberg-type version for the weight-12 form: sum form vs quadrature
tau = coefficients.tau_table(200)
print("Selberg-type inner product:", moment.selberg_inner_product(tau, 1, 4.0),
      moment.selberg_inner_product_quadrature(tau, 1, 4.0).value)
