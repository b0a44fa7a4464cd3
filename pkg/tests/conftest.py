import numpy as np
import pytest

from concavelab import (
    box,
    dispersive_lane_emden,
    dispersive_log,
    initial_guess,
    interval,
    lane_emden,
    log_schrodinger,
    make_grid,
    newton_solve,
    principal_eigenpair,
)


@pytest.fixture(scope="session")
def box81():
    return make_grid(box(1.0, 1.0), 81)


@pytest.fixture(scope="session")
def interval201():
    return make_grid(interval(1.0), 201)


@pytest.fixture(scope="session")
def log_solve_box(box81):
    res = newton_solve(box81, log_schrodinger(), initial_guess(box81, log_schrodinger()), 1e-10)
    assert res.converged
    return res


@pytest.fixture(scope="session")
def lane_emden_solve_box(box81):
    reaction = lane_emden(2.0, 1.0)
    res = newton_solve(box81, reaction, initial_guess(box81, reaction), 1e-10)
    assert res.converged
    return res


@pytest.fixture(scope="session")
def dispersive_log_solve_box(box81):
    res = newton_solve(box81, dispersive_log(), initial_guess(box81, dispersive_log()), 1e-10)
    assert res.converged
    return res


@pytest.fixture(scope="session")
def dispersive_poly_solve_box(box81):
    # sigma must exceed lambda1 (about 4.93 on this square) for a positive solution
    reaction = dispersive_lane_emden(2.0, 6.0)
    res = newton_solve(box81, reaction, initial_guess(box81, reaction), 1e-10)
    assert res.converged
    return res


@pytest.fixture(scope="session")
def eigen_interval201(interval201):
    return principal_eigenpair(interval201, 1e-12)


def assert_close(value, target, tol, label=""):
    assert abs(value - target) <= tol, f"{label}: {value} vs {target} (tol {tol})"
