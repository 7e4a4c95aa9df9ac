"""
Hermite coefficients of the excursion indicator
===============================================

G(w) = 1{F_{1,2}(w) > a} as a function of three standard normals. Its
expansion starts at order 2, and the order-2 coefficients have a closed
form.
"""

# %%
from sojourn import (c4, closed_form_cv_f_indicator, expansion_report, f_cdf, f_indicator,
                     parseval_check)

a = 1.0
G = f_indicator(a, 1, 3)
report = expansion_report(G, 3, 4, n_samples=400_000, seed=1,
                          closed_form=lambda v: closed_form_cv_f_indicator(v, a, 1, 3)
                          if sum(v) == 2 else None)
print(report.to_text())

# %%
# c4 for (a, n, m) = (1, 1, 3) is 1 / (3 sqrt 3).
print("c4 = %.8f" % c4(a, 1, 3))

# %%
# Partial sums of C_v^2 / v! creep towards E G^2 = 1 - H(a) slowly: an
# indicator has a heavy Hermite tail.
for k, cum in report.parseval_partial:
    print("kappa <= %d: %.5f" % (k, cum))
print("E G^2 = %.5f, gap at kappa 4: %.4f" % (1 - f_cdf(a, 1, 3), parseval_check(report)))
