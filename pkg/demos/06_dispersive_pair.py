"""The two negative-sign problems and their convex transformations.

-Delta u = sigma (u - u^q) and -Delta u = -u log u^2 have unique
positive solutions with sup norm below 1, and the transformations
atanh(sqrt(1 - 2 u^(q-1)/(q+1))) and sqrt(1 - log u^2) of the solutions
are strictly convex.  The polynomial problem needs sigma above the
principal eigenvalue (about 4.93 on this square) for a positive solution
to exist at all; below it Newton collapses to zero, which the solver
reports explicitly.
"""

from concavelab import (
    box,
    check_transform_concavity,
    initial_guess,
    make_grid,
    newton_solve,
    principal_eigenpair,
)
from concavelab.reactions import atanh_poly, dispersive_lane_emden, dispersive_log, sqrt_one_minus_log
from concavelab.solver import InitialGuessError

grid = make_grid(box(1.0, 1.0), 81)
lam = principal_eigenpair(grid, 1e-12).lambda1
print(f"lambda_1 on the square: {lam:.6f}\n")

for sigma in (4.0, 6.0):
    reaction = dispersive_lane_emden(2.0, sigma)
    print(f"polynomial problem at sigma = {sigma}:")
    try:
        res = newton_solve(grid, reaction, initial_guess(grid, reaction), 1e-10)
        rep = check_transform_concavity(res.field, atanh_poly(2.0))
        print(f"  sup u = {res.sup_norm:.6f} (< 1), atanh transform: {rep.verdict}")
    except InitialGuessError as exc:
        print(f"  {exc}")
    print()

logd = dispersive_log()
res = newton_solve(grid, logd, initial_guess(grid, logd), 1e-10)
rep = check_transform_concavity(res.field, sqrt_one_minus_log())
print("logarithmic problem with reversed sign:")
print(f"  sup u = {res.sup_norm:.6f} (< 1), sqrt(1 - log u^2): {rep.verdict}")
