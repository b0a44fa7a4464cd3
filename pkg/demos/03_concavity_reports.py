"""Concavity verdicts for solved fields on the unit square.

The logarithmic solution is strongly log-concave (negative-definite
Hessian of log u on the check set) and the power solution of
-Delta u = u^2 - u has strongly convex u^(-1/2).  A power sweep on the
logarithmic field shows which alpha-concavity exponents survive at this
domain size.
"""

from concavelab import (
    alpha_sweep,
    box,
    check_transform_concavity,
    initial_guess,
    lane_emden,
    log_schrodinger,
    make_grid,
    newton_solve,
    quasiconcavity_check,
)
from concavelab.reactions import log_transform, power

grid = make_grid(box(1.0, 1.0), 81)

log_sol = newton_solve(grid, log_schrodinger(), initial_guess(grid, log_schrodinger()), 1e-10)
print(f"log equation: sup u = {log_sol.sup_norm:.4f}, {log_sol.newton_iters} Newton steps")
rep = check_transform_concavity(log_sol.field, log_transform())
print(f"  log u     : {rep.verdict} (extreme eigenvalue {rep.extreme_eigenvalue:.4f}, "
      f"{rep.check_set_size} check nodes)")

power_sol = newton_solve(grid, lane_emden(2.0, 1.0), initial_guess(grid, lane_emden(2.0, 1.0)), 1e-10)
rep2 = check_transform_concavity(power_sol.field, power(-0.5))
print(f"power equation (q=2, sigma=1): sup u = {power_sol.sup_norm:.4f}")
print(f"  u^(-1/2)  : {rep2.verdict} (extreme eigenvalue {rep2.extreme_eigenvalue:.4f})")

sweep = alpha_sweep(log_sol.field, [0.1, 0.2, 0.3, 0.4, 0.5])
print("\npower-concavity sweep on the logarithmic field:")
for a, verdict in zip(sweep.alphas, sweep.verdicts):
    print(f"  alpha = {a:.2f}: {verdict}")
print(f"largest passing exponent: {sweep.largest_passing}")

qc = quasiconcavity_check(
    log_sol.field,
    [0.25 * log_sol.sup_norm, 0.5 * log_sol.sup_norm, 0.75 * log_sol.sup_norm],
    sample_pairs=300,
    seed=2024,
)
print(f"\nseeded midpoint quasi-concavity test: {'pass' if qc.passed else 'fail'}")
