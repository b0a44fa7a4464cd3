"""Reaction families and concavity transformations.

Reactions (all continuous at 0 with ``f(0) = 0``):

========================  =============================  ==========================================
kind                      f(t)                           F(t) = integral of f from 0 to t
========================  =============================  ==========================================
lane_emden                sigma (t^q - t)                sigma (t^(q+1)/(q+1) - t^2/2)
log_schrodinger           t log t^2                      t^2 (log t^2 - 1) / 2
dispersive_lane_emden     sigma (t - t^q)                -sigma (t^(q+1)/(q+1) - t^2/2)
dispersive_log            -t log t^2                     -t^2 (log t^2 - 1) / 2
========================  =============================  ==========================================

Transformations ``phi`` carry exact first and second derivatives, a
validity interval and an orientation flag (sign of ``phi'``).  The
composite right-hand side ``b(w, z)`` of the equation satisfied by
``w = phi(u)`` when ``-Delta u = f(u)`` is exposed as
:func:`transformed_rhs`; inverses ``psi = phi^-1`` via :func:`inverse`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Reaction",
    "Transform",
    "ReactionDomainError",
    "TransformDomainError",
    "lane_emden",
    "log_schrodinger",
    "dispersive_lane_emden",
    "dispersive_log",
    "f",
    "f_prime",
    "F",
    "validate_exponent",
    "power",
    "log_transform",
    "neg_log",
    "sqrt_log",
    "atanh_poly",
    "sqrt_one_minus_log",
    "transform_value",
    "transform_d1",
    "transform_d2",
    "inverse",
    "transformed_rhs",
]


class ReactionDomainError(ValueError):
    pass


class TransformDomainError(ValueError):
    pass


# ---------------------------------------------------------------------------
# reactions


@dataclass(frozen=True)
class Reaction:
    kind: str
    q: float = float("nan")
    sigma: float = float("nan")

    def __post_init__(self):
        if self.kind not in (
            "lane_emden",
            "log_schrodinger",
            "dispersive_lane_emden",
            "dispersive_log",
        ):
            raise ValueError(f"unknown reaction kind {self.kind!r}")
        if self.kind in ("lane_emden", "dispersive_lane_emden"):
            if not self.q > 1:
                raise ValueError("exponent q must exceed 1")
            if not self.sigma > 0:
                raise ValueError("sigma must be positive")

    @property
    def label(self) -> str:
        if self.kind in ("lane_emden", "dispersive_lane_emden"):
            return f"{self.kind}(q={self.q:g}, sigma={self.sigma:g})"
        return self.kind


def lane_emden(q: float, sigma: float) -> Reaction:
    return Reaction("lane_emden", q=float(q), sigma=float(sigma))


def log_schrodinger() -> Reaction:
    return Reaction("log_schrodinger")


def dispersive_lane_emden(q: float, sigma: float) -> Reaction:
    return Reaction("dispersive_lane_emden", q=float(q), sigma=float(sigma))


def dispersive_log() -> Reaction:
    return Reaction("dispersive_log")


def validate_exponent(reaction: Reaction, ambient_dim: int) -> None:
    """Check ``1 < q < 2* - 1`` against the ambient dimension (``2* - 1``
    is ``(N+2)/(N-2)`` for N >= 3, infinite otherwise)."""
    if reaction.kind not in ("lane_emden", "dispersive_lane_emden"):
        return
    if ambient_dim >= 3:
        q_max = (ambient_dim + 2.0) / (ambient_dim - 2.0)
        if not reaction.q < q_max:
            raise ReactionDomainError(
                f"q={reaction.q} is supercritical in dimension {ambient_dim} "
                f"(requires q < {q_max})"
            )


def _as_nonneg(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ReactionDomainError("reaction argument must be nonnegative")
    return t


def _t_log_t2(t):
    out = np.zeros_like(t)
    pos = t > 0
    tp = t[pos]
    out[pos] = tp * np.log(tp * tp)
    return out


def f(reaction: Reaction, t):
    """Reaction value; vectorized, continuous extension ``f(0) = 0``."""
    t = _as_nonneg(t)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    if reaction.kind == "lane_emden":
        out = reaction.sigma * (t**reaction.q - t)
    elif reaction.kind == "dispersive_lane_emden":
        out = reaction.sigma * (t - t**reaction.q)
    elif reaction.kind == "log_schrodinger":
        out = _t_log_t2(t)
    else:
        out = -_t_log_t2(t)
    return float(out[0]) if scalar else out


def f_prime(reaction: Reaction, t):
    """Derivative of the reaction; the logarithmic families diverge at 0."""
    t = _as_nonneg(t)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    if reaction.kind in ("log_schrodinger", "dispersive_log"):
        if np.any(t == 0):
            raise ReactionDomainError("f' of the logarithmic reaction is undefined at 0")
        out = np.log(t * t) + 2.0
        if reaction.kind == "dispersive_log":
            out = -out
    else:
        out = reaction.sigma * (reaction.q * t ** (reaction.q - 1.0) - 1.0)
        if reaction.kind == "dispersive_lane_emden":
            out = -out
    return float(out[0]) if scalar else out


def F(reaction: Reaction, t):
    """Antiderivative of ``f`` vanishing at 0, in closed form."""
    t = _as_nonneg(t)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    if reaction.kind in ("lane_emden", "dispersive_lane_emden"):
        q = reaction.q
        out = reaction.sigma * (t ** (q + 1.0) / (q + 1.0) - t * t / 2.0)
        if reaction.kind == "dispersive_lane_emden":
            out = -out
    else:
        out = np.zeros_like(t)
        pos = t > 0
        tp = t[pos]
        out[pos] = 0.5 * tp * tp * (np.log(tp * tp) - 1.0)
        if reaction.kind == "dispersive_log":
            out = -out
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# transformations


@dataclass(frozen=True)
class Transform:
    """Concavity transformation with closed-form derivatives.

    ``validity`` is the closed interval on which values may be requested;
    derivatives at an endpoint may be infinite (e.g. ``sqrt_log`` at
    ``t = m``).  ``sign`` implements negation: ``negate()`` flips it
    together with the orientation.
    """

    kind: str
    alpha: float = float("nan")
    m: float = float("nan")
    q: float = float("nan")
    sign: float = 1.0

    def __post_init__(self):
        if self.kind not in ("power", "log", "sqrt_log", "atanh_poly", "sqrt_one_minus_log"):
            raise ValueError(f"unknown transform kind {self.kind!r}")
        if self.kind == "power" and (self.alpha == 0.0 or not math.isfinite(self.alpha)):
            raise ValueError("power exponent must be finite and nonzero")
        if self.kind == "sqrt_log" and not self.m > 0:
            raise ValueError("sqrt_log scale m must be positive")
        if self.kind == "atanh_poly" and not self.q > 1:
            raise ValueError("atanh_poly exponent q must exceed 1")

    @property
    def validity(self) -> tuple[float, float]:
        if self.kind == "sqrt_log":
            return (0.0, self.m)
        if self.kind == "atanh_poly":
            return (0.0, ((self.q + 1.0) / 2.0) ** (1.0 / (self.q - 1.0)))
        if self.kind == "sqrt_one_minus_log":
            # convex only below t = 1, which is where it is used
            return (0.0, 1.0)
        return (0.0, math.inf)

    @property
    def increasing(self) -> bool:
        if self.kind == "power":
            raw = self.alpha > 0
        elif self.kind in ("log", "sqrt_log"):
            raw = True
        else:
            raw = False
        return raw if self.sign > 0 else not raw

    @property
    def label(self) -> str:
        base = {
            "power": f"power(alpha={self.alpha:g})",
            "log": "log",
            "sqrt_log": f"sqrt_log(m={self.m:g})",
            "atanh_poly": f"atanh_poly(q={self.q:g})",
            "sqrt_one_minus_log": "sqrt_one_minus_log",
        }[self.kind]
        return base if self.sign > 0 else f"neg[{base}]"

    def negate(self) -> "Transform":
        return Transform(self.kind, alpha=self.alpha, m=self.m, q=self.q, sign=-self.sign)


def power(alpha: float) -> Transform:
    return Transform("power", alpha=float(alpha))


def log_transform() -> Transform:
    return Transform("log")


def neg_log() -> Transform:
    return Transform("log", sign=-1.0)


def sqrt_log(m: float) -> Transform:
    return Transform("sqrt_log", m=float(m))


def atanh_poly(q: float) -> Transform:
    return Transform("atanh_poly", q=float(q))


def sqrt_one_minus_log() -> Transform:
    return Transform("sqrt_one_minus_log")


def _check_validity(transform: Transform, t: np.ndarray) -> None:
    lo, hi = transform.validity
    if np.any(t <= lo) or np.any(t > hi):
        raise TransformDomainError(
            f"argument outside validity interval ({lo:g}, {hi:g}] of {transform.label}"
        )


def _raw_value(tr: Transform, t):
    if tr.kind == "power":
        return t**tr.alpha
    if tr.kind == "log":
        return np.log(t)
    if tr.kind == "sqrt_log":
        return -np.sqrt(np.maximum(-np.log(t / tr.m), 0.0))
    if tr.kind == "atanh_poly":
        arg = 1.0 - 2.0 / (tr.q + 1.0) * t ** (tr.q - 1.0)
        return np.arctanh(np.sqrt(np.maximum(arg, 0.0)))
    s = 1.0 - np.log(t * t)
    return np.sqrt(np.maximum(s, 0.0))


def _raw_d1(tr: Transform, t):
    with np.errstate(divide="ignore"):
        if tr.kind == "power":
            return tr.alpha * t ** (tr.alpha - 1.0)
        if tr.kind == "log":
            return 1.0 / t
        if tr.kind == "sqrt_log":
            ell = -np.log(t / tr.m)
            return 1.0 / (2.0 * t * np.sqrt(ell))
        if tr.kind == "atanh_poly":
            g = np.sqrt(np.maximum(1.0 - 2.0 / (tr.q + 1.0) * t ** (tr.q - 1.0), 0.0))
            return -(tr.q - 1.0) / (2.0 * t * g)
        s = np.sqrt(np.maximum(1.0 - np.log(t * t), 0.0))
        return -1.0 / (t * s)


def _raw_d2(tr: Transform, t):
    with np.errstate(divide="ignore"):
        if tr.kind == "power":
            return tr.alpha * (tr.alpha - 1.0) * t ** (tr.alpha - 2.0)
        if tr.kind == "log":
            return -1.0 / (t * t)
        if tr.kind == "sqrt_log":
            ell = -np.log(t / tr.m)
            return (0.5 / ell - 1.0) / (2.0 * t * t * np.sqrt(ell))
        if tr.kind == "atanh_poly":
            g = np.sqrt(np.maximum(1.0 - 2.0 / (tr.q + 1.0) * t ** (tr.q - 1.0), 0.0))
            return (tr.q - 1.0) * (1.0 - t ** (tr.q - 1.0)) / (2.0 * t * t * g**3)
        s = np.sqrt(np.maximum(1.0 - np.log(t * t), 0.0))
        return -np.log(t * t) / (t * t * s**3)


def _eval(transform: Transform, t, raw):
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    _check_validity(transform, t)
    out = transform.sign * raw(transform, t)
    return float(out[0]) if scalar else out


def transform_value(transform: Transform, t):
    return _eval(transform, t, _raw_value)


def transform_d1(transform: Transform, t):
    return _eval(transform, t, _raw_d1)


def transform_d2(transform: Transform, t):
    return _eval(transform, t, _raw_d2)


def inverse(transform: Transform, w):
    """Inverse ``psi = phi^-1`` evaluated at ``w = phi(t)``."""
    w = np.asarray(w, dtype=float) * transform.sign
    tr = transform
    if tr.kind == "power":
        out = w ** (1.0 / tr.alpha)
    elif tr.kind == "log":
        out = np.exp(w)
    elif tr.kind == "sqrt_log":
        out = tr.m * np.exp(-(w * w))
    elif tr.kind == "atanh_poly":
        sech2 = 1.0 - np.tanh(w) ** 2
        out = ((tr.q + 1.0) / 2.0 * sech2) ** (1.0 / (tr.q - 1.0))
    else:
        out = np.exp((1.0 - w * w) / 2.0)
    return float(out) if out.ndim == 0 else out


def transformed_rhs(reaction: Reaction, transform: Transform, t, grad_norm_sq):
    """Right-hand side ``b(w, z)`` of ``Delta w = b(w, Dw)`` for ``w = phi(u)``.

    Expressed through the forward derivatives at ``t = psi(w)``:
    ``b = phi''(t)/phi'(t)^2 |z|^2 - phi'(t) f(t)``.
    """
    t_arr = np.asarray(t, dtype=float)
    scalar = t_arr.ndim == 0
    t_arr = np.atleast_1d(t_arr)
    z2 = np.broadcast_to(np.asarray(grad_norm_sq, dtype=float), t_arr.shape)
    if np.any(z2 < 0):
        raise ValueError("grad_norm_sq must be nonnegative")
    d1 = np.atleast_1d(transform_d1(transform, t_arr))
    if np.any(~np.isfinite(d1)) or np.any(d1 == 0.0):
        raise TransformDomainError(
            f"psi' undefined: phi' of {transform.label} is zero or infinite here"
        )
    d2 = np.atleast_1d(transform_d2(transform, t_arr))
    fv = np.atleast_1d(f(reaction, t_arr))
    out = d2 / d1**2 * z2 - d1 * fv
    return float(out[0]) if scalar else out
