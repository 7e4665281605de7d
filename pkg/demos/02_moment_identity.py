"""The weighted mean square of L on Re s = 1.3 and its diagonal/off-diagonal split.

Run: python3 demos/02_moment_identity.py
"""
from kirillov_lab import coefficients, moment
from kirillov_lab.specfun import WeightFunction

w = WeightFunction(2.0)
for name, table in (("tau", coefficients.tau_table(1000)), ("zeta^4", coefficients.divisor_table(0, 1000))):
    task = moment.MomentTask(table, 1.3, 1.3, w, N=1000)
    rep = moment.moment_identity(task)
    legs = {lg.name: lg.value for lg in rep.legs}
    print(f"{name}:")
    for key in ("integral", "diagonal", "offdiagonal", "mirror", "decomposition"):
        print(f"  {key:14s} {legs[key].real:+.12e}")
    print(f"  relative gap   {rep.comparisons[0].rel_diff:.1e}")
    print(f"  |L_N(1.3) - L(1.3)| <= {rep.truncation['series_tail_bound']:.2e} (series tail, not part of the identity)")

# scaling every lambda by c scales every leg by |c|^2, so the normalisation of the table is irrelevant
tab = coefficients.tau_table(300)
a = moment.moment_integral(moment.MomentTask(tab, 1.3, 1.3, w)).value
b = moment.moment_integral(moment.MomentTask(tab.scaled(2.0), 1.3, 1.3, w)).value
print("scaling check b / a =", (b / a).real)
