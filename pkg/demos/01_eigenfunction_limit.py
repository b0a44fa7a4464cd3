"""Fixed-sigma continuation toward the principal eigenfunction.

Solves -u'' = sigma (u^q - u) on (-1, 1) for a decreasing schedule of
exponents q at sigma = 1.  As q -> 1 the normalized solutions approach
the first Dirichlet eigenfunction and sup(u)^(q-1) approaches
1 + lambda_1 / sigma, so both error columns should shrink down the table
(the limit error behaves like 0.67 (q - 1) on this interval).
"""

import math

import numpy as np

from concavelab import continuation_branch, interval, make_grid, principal_eigenpair

grid = make_grid(interval(1.0), 401)
pair = principal_eigenpair(grid, 1e-12)
sigma = 1.0
target = 1.0 + pair.lambda1 / sigma
print(f"lambda_1 = {pair.lambda1:.8f}  (pi^2/4 = {math.pi ** 2 / 4:.8f})")
print(f"limit of sup(u)^(q-1):  1 + lambda_1/sigma = {target:.6f}\n")

branch = continuation_branch(
    grid, sigma_rule="fixed", sigma=sigma, qs=[1.5, 1.25, 1.1, 1.05, 1.02]
)

print(f"{'q':>6} {'sup u':>12} {'sup^(q-1)':>11} {'limit err':>10} {'|u/sup - phi1|':>15}")
for entry in branch.entries:
    res = entry.result
    pow_val = res.sup_norm ** (entry.q - 1.0)
    dist = float(np.max(np.abs(res.field.values / res.sup_norm - pair.phi1.values)))
    print(
        f"{entry.q:>6.2f} {res.sup_norm:>12.5g} {pow_val:>11.6f} "
        f"{abs(pow_val - target):>10.6f} {dist:>15.6f}"
    )
