"""Exact one-dimensional analysis of ``-u'' = u log u^2`` on ``(-b, b)``.

The positive solution with ``u(0) = m`` has the conserved quantity
``|u'|^2 / 2 + F(u) = F(m)`` with ``F(t) = t^2 (log t^2 - 1) / 2``, which
yields the time map

    b(m) = integral_0^m (2 F(m) - 2 F(t))^(-1/2) dt,        m > sqrt(e).

This module provides the time map and its monotone inversion, the
boundary slope ``sqrt(2 F(m))``, the sharp power-concavity exponent
``alpha*(b)`` solving ``(1 - a) |u'(b)|^2 = a e^(-1/a)``, a fixed-step
RK4 shooting integrator as an independent cross-check, tensor-product
solutions on plurirectangles, and the explicit entire Gaussian-type
profile ``e^(N/2) e^(-|x|^2 / 2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .grid import Grid, box, make_grid
from .linops import ScalarField

__all__ = [
    "SQRT_E",
    "OneDimSolution",
    "ShootResult",
    "TimeMapError",
    "time_map",
    "solve_m_of_b",
    "boundary_slope",
    "alpha_star",
    "alpha_equality_lhs",
    "halfwidth_for_alpha",
    "shoot_profile",
    "locate_unit_value",
    "sqrtlog_concavity_criterion",
    "sqrtlog_concavity_check",
    "solve_interval",
    "profile_interpolator",
    "tensor_solution",
    "gausson",
    "gausson_field",
]

SQRT_E = math.sqrt(math.e)


class TimeMapError(ValueError):
    pass


def _F(t: float) -> float:
    return 0.5 * t * t * (math.log(t * t) - 1.0) if t > 0 else 0.0


def _f(t: float) -> float:
    return t * math.log(t * t) if t > 0 else 0.0


def _F_gap(m: float, t: float) -> float:
    """F(m) - F(t) in a cancellation-free form:
    ((m^2 - t^2)(log m^2 - 1) + 2 t^2 log(m/t)) / 2."""
    if t <= 0:
        return _F(m)
    return 0.5 * ((m * m - t * t) * (math.log(m * m) - 1.0) + 2.0 * t * t * math.log(m / t))


def time_map(m: float, quad_tol: float = 1e-10) -> float:
    """Halfwidth ``b`` of the interval on which the profile peaking at ``m``
    solves the problem.

    The integrable inverse-square-root singularity at ``t = m`` is removed
    by the substitution ``t = m - s^2`` on the upper half ``[m/2, m]``;
    both halves are handled by adaptive quadrature with absolute error
    budget ``quad_tol``.
    """
    if not m > SQRT_E:
        raise TimeMapError(f"time map requires m > sqrt(e) = {SQRT_E:.12f}, got {m}")
    fm = _f(m)

    def lower(t):
        return 1.0 / math.sqrt(2.0 * _F_gap(m, t))

    def upper(s):
        gap = 2.0 * _F_gap(m, m - s * s)
        if gap <= 0.0:  # removable limit at s = 0
            return 2.0 / math.sqrt(2.0 * fm)
        return 2.0 * s / math.sqrt(gap)

    i1, _ = quad(lower, 0.0, m / 2.0, epsabs=quad_tol / 2.0, epsrel=1e-13, limit=500)
    i2, _ = quad(upper, 0.0, math.sqrt(m / 2.0), epsabs=quad_tol / 2.0, epsrel=1e-13, limit=500)
    return i1 + i2


def solve_m_of_b(b: float, tol: float = 1e-9, quad_tol: float = 1e-11) -> float:
    """Invert the time map: the sup norm ``m`` with ``time_map(m) = b``.

    Bisection on ``(sqrt(e), cap]`` where the cap starts at 10 and doubles
    up to 1e6; ``b`` values smaller than the time map at the largest cap
    are reported as out of range.
    """
    if not b > 0:
        raise TimeMapError("halfwidth b must be positive")
    lo = SQRT_E * (1.0 + 1e-14)
    if time_map(lo, quad_tol) < b:
        raise TimeMapError(f"b = {b} too large: exceeds the reachable time-map range")
    hi = 10.0
    while time_map(hi, quad_tol) > b:
        hi *= 2.0
        if hi > 1e6:
            raise TimeMapError(
                f"b = {b} too small: sup norm beyond the bisection cap 1e6"
            )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        bm = time_map(mid, quad_tol)
        if abs(bm - b) <= tol:
            return mid
        if bm > b:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * mid:
            break
    return 0.5 * (lo + hi)


def boundary_slope(m: float) -> float:
    """``|u'(b)| = sqrt(2 F(m))``, from the conserved quantity."""
    if not m > SQRT_E:
        raise TimeMapError("boundary slope requires m > sqrt(e)")
    return math.sqrt(2.0 * _F(m))


def alpha_equality_lhs(alpha: float) -> float:
    """``a e^(-1/a) / (1 - a)``: the slope-squared threshold at which the
    power-concavity criterion becomes an equality; strictly increasing."""
    return alpha / (1.0 - alpha) * math.exp(-1.0 / alpha)


def alpha_star(b: float, tol: float = 1e-12, m: float | None = None) -> float:
    """Critical exponent in (0, 1): the profile on ``(-b, b)`` is
    ``a``-power concave exactly for ``a <= alpha_star(b)``."""
    if m is None:
        m = solve_m_of_b(b)
    slope_sq = 2.0 * _F(m)
    lo, hi = 1e-12, 1.0 - 1e-15
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if alpha_equality_lhs(mid) < slope_sq:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol:
            break
    return 0.5 * (lo + hi)


def halfwidth_for_alpha(alpha: float, quad_tol: float = 1e-11) -> float:
    """Halfwidth ``b`` whose profile has ``alpha_star(b) = alpha``."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    target_F = 0.5 * alpha_equality_lhs(alpha)
    hi = 2.0 * SQRT_E
    while _F(hi) < target_F:
        hi *= 2.0
    m = brentq(lambda t: _F(t) - target_F, SQRT_E * (1 + 1e-15), hi, xtol=1e-14)
    return time_map(m, quad_tol)


# ---------------------------------------------------------------------------
# shooting


@dataclass
class ShootResult:
    b: float                 # crossing abscissa
    xs: np.ndarray           # abscissae 0 .. b (last entry is the crossing)
    us: np.ndarray           # profile values, us[-1] ~ 0
    ps: np.ndarray           # derivative values
    energy_drift: float      # max |p^2/2 + F(u) - F(m)| over the samples
    boundary_slope: float    # |u'| at the crossing


def _rhs(u: float) -> float:
    # odd extension through 0; the isolated log singularity is harmless
    return -u * math.log(u * u) if u != 0.0 else 0.0


def _rk4_step(u: float, p: float, h: float) -> tuple[float, float]:
    k1u, k1p = p, _rhs(u)
    k2u, k2p = p + 0.5 * h * k1p, _rhs(u + 0.5 * h * k1u)
    k3u, k3p = p + 0.5 * h * k2p, _rhs(u + 0.5 * h * k2u)
    k4u, k4p = p + h * k3p, _rhs(u + h * k3u)
    return (
        u + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u),
        p + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p),
    )


def shoot_profile(m: float, n: int = 10_000) -> ShootResult:
    """Integrate ``u'' = -u log u^2`` from ``u(0) = m``, ``u'(0) = 0`` with
    fixed step ``1/n`` until the profile crosses zero.

    The crossing is located by root-finding on a single RK4 substep from
    the last positive sample.  ``n`` is the number of steps per unit
    length; the total step budget is capped at ``60 n``.
    """
    if not m > SQRT_E:
        raise TimeMapError("shooting requires m > sqrt(e)")
    if n < 100:
        raise ValueError("need at least 100 steps per unit length")
    h = 1.0 / float(n)
    cap = 60 * n
    f_m = _F(m)
    xs = [0.0]
    us = [m]
    ps = [0.0]
    u, p, x = m, 0.0, 0.0
    crossed = False
    for _ in range(cap):
        u_new, p_new = _rk4_step(u, p, h)
        if u_new <= 0.0:
            crossed = True
            break
        x += h
        u, p = u_new, p_new
        xs.append(x)
        us.append(u)
        ps.append(p)
    if not crossed:
        raise TimeMapError(
            f"profile failed to cross zero within {cap} steps; is m > sqrt(e)?"
        )
    tau = brentq(lambda s: _rk4_step(u, p, s)[0], 0.0, h, xtol=1e-15)
    ub, pb = _rk4_step(u, p, tau)
    xs.append(x + tau)
    us.append(ub)
    ps.append(pb)
    xs = np.asarray(xs)
    us_arr = np.asarray(us)
    ps_arr = np.asarray(ps)
    with np.errstate(divide="ignore", invalid="ignore"):
        f_vals = np.where(us_arr > 0, 0.5 * us_arr**2 * (np.log(us_arr**2) - 1.0), 0.0)
    drift = float(np.max(np.abs(0.5 * ps_arr**2 + f_vals - f_m)))
    return ShootResult(float(x + tau), xs, us_arr, ps_arr, drift, abs(pb))


def locate_unit_value(shoot: ShootResult) -> float:
    """Abscissa ``x*`` with ``u(x*) = 1`` (the inflection of the profile),
    refined by root-finding on an RK4 substep."""
    us = shoot.us
    idx = np.nonzero((us[:-1] - 1.0) * (us[1:] - 1.0) <= 0.0)[0]
    if idx.size == 0:
        raise TimeMapError("profile does not reach the value 1")
    k = int(idx[0])
    if us[k] == 1.0:
        return float(shoot.xs[k])
    h = shoot.xs[k + 1] - shoot.xs[k]
    u0, p0 = float(us[k]), float(shoot.ps[k])
    tau = brentq(lambda s: _rk4_step(u0, p0, s)[0] - 1.0, 0.0, h, xtol=1e-15)
    return float(shoot.xs[k] + tau)


def sqrtlog_concavity_criterion(t, m: float):
    """``(log(t^2/m^2) + 1) t^2/m^2 - 1``; nonpositive on ``(0, m]`` exactly
    when ``-sqrt(-log(u/m))`` is concave along the profile."""
    t = np.asarray(t, dtype=float)
    r2 = (t / m) ** 2
    out = np.full_like(t, -1.0)
    pos = t > 0
    out[pos] = (np.log(r2[pos]) + 1.0) * r2[pos] - 1.0
    return out


def sqrtlog_concavity_check(profile, m: float, slack: float = 1e-12) -> bool:
    """True when the criterion holds at every positive sample of ``profile``
    not exceeding ``m``, up to the given slack."""
    t = np.asarray(profile, dtype=float)
    t = t[(t > 0) & (t <= m)]
    return bool(np.max(sqrtlog_concavity_criterion(t, m)) <= slack)


# ---------------------------------------------------------------------------
# assembled one-dimensional solution


@dataclass
class OneDimSolution:
    """Fully resolved profile on ``(-b, b)`` with its derived quantities."""

    b: float
    m: float
    C: float                # F(m) = |u'(b)|^2 / 2
    x_star: float           # u(x_star) = 1, concave/convex switch
    alpha_star: float
    xs: np.ndarray          # half-profile abscissae from the shooting pass
    us: np.ndarray

    @property
    def slope(self) -> float:
        return math.sqrt(2.0 * self.C)


def solve_interval(b: float, n: int = 20_000, tol: float = 1e-9) -> OneDimSolution:
    """Resolve the unique positive profile on ``(-b, b)`` through the
    time-map inversion plus a shooting pass."""
    m = solve_m_of_b(b, tol=tol)
    shot = shoot_profile(m, n)
    return OneDimSolution(
        b=b,
        m=m,
        C=_F(m),
        x_star=locate_unit_value(shot),
        alpha_star=alpha_star(b, m=m),
        xs=shot.xs,
        us=shot.us,
    )


def profile_interpolator(sol: OneDimSolution) -> PchipInterpolator:
    """Monotone cubic interpolant of the half-profile; evaluate at ``|x|``."""
    return PchipInterpolator(sol.xs, sol.us, extrapolate=False)


def _profile_on_axis(sol: OneDimSolution, axis: np.ndarray) -> np.ndarray:
    interp = profile_interpolator(sol)
    vals = interp(np.minimum(np.abs(axis), sol.xs[-1]))
    vals = np.nan_to_num(vals, nan=0.0)
    vals[np.abs(np.abs(axis) - sol.b) < 1e-14] = 0.0
    return np.maximum(vals, 0.0)


def tensor_solution(bs, resolution, n: int = 100_000) -> ScalarField:
    """Product of one-dimensional profiles on the plurirectangle
    ``prod (-b_i, b_i)``; the product solves the same equation there and
    its sup norm is the product of the factor sup norms."""
    bs = [float(b) for b in np.atleast_1d(bs)]
    grid = make_grid(box(*bs), resolution)
    values = np.ones(grid.shape)
    sols = {}
    for axis, b in enumerate(bs):
        if b not in sols:
            sols[b] = solve_interval(b, n=n)
        axis_vals = _profile_on_axis(sols[b], grid.axes[axis])
        shape = [1] * grid.ndim
        shape[axis] = grid.shape[axis]
        values = values * axis_vals.reshape(shape)
    return ScalarField(grid, values)


# ---------------------------------------------------------------------------
# explicit entire profile


def gausson(ambient_dim: int, points) -> np.ndarray:
    """``e^(N/2) e^(-|x|^2/2)`` at coordinates of shape ``(..., N)``."""
    if ambient_dim < 1:
        raise ValueError("ambient dimension must be >= 1")
    pts = np.asarray(points, dtype=float)
    if pts.shape[-1] != ambient_dim:
        raise ValueError(f"points must have trailing dimension {ambient_dim}")
    r2 = np.sum(pts * pts, axis=-1)
    return math.exp(ambient_dim / 2.0) * np.exp(-r2 / 2.0)


def gausson_field(grid: Grid) -> ScalarField:
    """Gausson samples on the nodes of a grid (nonzero trace: the entire
    profile does not vanish on the box boundary, so validation is off)."""
    if grid.is_radial:
        r = grid.axes[0]
        vals = math.exp(grid.ambient_dim / 2.0) * np.exp(-(r * r) / 2.0)
    else:
        pts = np.stack(grid.coordinate_arrays(), axis=-1)
        vals = gausson(grid.ambient_dim, pts)
    return ScalarField(grid, vals, validate=False)
