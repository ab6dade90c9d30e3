"""Blow-up and growth conditions on initial data, time bounds, thresholds.

Notation (all inner products are the weighted ones of the model space):

* psi(t) = (P u, u); the quantity whose divergence defines blow-up.
* E = (P u_t, u_t)/2 + (A u, u)/2 - G(u); conserved along solutions.
* The growth conditions on data (u0, u1):

    (u0, P u1) / (u0, P u0) > 0                                   (first)
    E(0) + R0/(1+2 alpha) < (u0, P u1)^2 / (2 (u0, P u0))         (second)

  Under these, psi grows without bound; once psi passes the threshold
  psi* = (4(1+2a) E(0) + 4 R0 + delta)/(a a0) the concavity inequality
  psi'' psi - (1+a) psi'^2 >= 0 holds and the time bound of
  :func:`levine_time_bound` applies from any t0 >= t* with psi'(t0) > 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import inner, op_apply, quad_form
from .models import ModelSpec
from .nonlinearity import eval_G

__all__ = [
    "CriteriaReport",
    "GrowthCurve",
    "energy",
    "check_levine_conditions",
    "check_kg_condition",
    "check_nb_condition",
    "levine_time_bound",
    "psi_lower_bound",
    "t_star_threshold",
]


def energy(model: ModelSpec, u, v) -> float:
    """Conserved energy (P v, v)/2 + (A u, u)/2 - G(u) with v = u_t."""
    return (0.5 * quad_form(model.P, v)
            + 0.5 * quad_form(model.A, u)
            - eval_G(model.nl, model.space, u))


@dataclass(frozen=True)
class CriteriaReport:
    """Evaluation of the growth conditions on a data pair."""

    l1_value: float        # (u0, P u1) / (u0, P u0)
    l2_lhs: float          # E(0) + R0/(1+2 alpha)
    l2_rhs: float          # (u0, P u1)^2 / (2 (u0, P u0))
    satisfied: bool
    a0: float
    energy0: float
    psi0: float
    dpsi0: float
    levine_time_bound: float | None


def check_levine_conditions(model: ModelSpec, u0, u1) -> CriteriaReport:
    """Evaluate the two growth conditions on (u0, u1).

    The reported time bound is the concavity bound psi(0)/(alpha psi'(0))
    evaluated at the data (None when psi'(0) <= 0); it is a rigorous upper
    bound on the blow-up time only from points past the psi* threshold.
    """
    space = model.space
    pu1 = op_apply(model.P, u1)
    psi0 = quad_form(model.P, u0)
    if psi0 <= 0:
        raise ValueError("u0 must be nonzero: (u0, P u0) = 0")
    cross = inner(space, u0, pu1)
    l1 = cross / psi0
    e0 = energy(model, u0, u1)
    nl = model.nl
    l2_lhs = e0 + nl.R0 / (1 + 2 * nl.alpha)
    l2_rhs = 0.5 * cross**2 / psi0
    dpsi0 = 2.0 * cross
    bound = psi0 / (nl.alpha * dpsi0) if dpsi0 > 0 else None
    return CriteriaReport(
        l1_value=l1,
        l2_lhs=l2_lhs,
        l2_rhs=l2_rhs,
        satisfied=bool(l1 > 0 and l2_lhs < l2_rhs),
        a0=model.a0,
        energy0=e0,
        psi0=psi0,
        dpsi0=dpsi0,
        levine_time_bound=bound,
    )


def check_kg_condition(model: ModelSpec, u0, u1) -> bool:
    """Klein-Gordon form of the blow-up condition:

        (u0, u1) > sqrt(|u1|^2 + |grad u0|^2 + m^2 |u0|^2
                        - 2/(p+2) int |u0|^(p+2)) * |u0|.

    The bracket equals 2 E(0).  A negative bracket (the classical
    negative-energy regime) counts as satisfied whenever (u0, u1) > 0.
    Equivalent to :func:`check_levine_conditions` for this model.
    """
    if model.kind != "klein_gordon":
        raise ValueError("check_kg_condition needs a klein_gordon model")
    space = model.space
    u0 = np.asarray(u0, dtype=float)
    u1 = np.asarray(u1, dtype=float)
    m = model.params["mass"]
    p = model.params["p"]
    lap = model.aux["laplacian"]
    grad_sq = quad_form(lap, u0)
    norm0_sq = inner(space, u0, u0)
    norm1_sq = inner(space, u1, u1)
    pot = 2.0 / (p + 2) * float(np.dot(space.quad_weights, np.abs(u0) ** (p + 2)))
    bracket = norm1_sq + grad_sq + m**2 * norm0_sq - pot
    cross = inner(space, u0, u1)
    if bracket < 0:
        return bool(cross > 0)
    return bool(cross > math.sqrt(bracket) * math.sqrt(norm0_sq))


def check_nb_condition(model: ModelSpec, u0, u1) -> bool:
    """Boundary-flux blow-up condition:

        (u0, u1) / |u0|^2 > 2 E0 + Rb/(1+2 alpha) > 0,

    with Rb = |Gamma_2| r0 the boundary count convention (twice the
    abstract R0 stored on the nonlinearity) and E0 the boundary energy.
    """
    if model.kind != "nonlinear_boundary":
        raise ValueError("check_nb_condition needs a nonlinear_boundary model")
    norm0_sq = quad_form(model.P, u0)
    if norm0_sq <= 0:
        raise ValueError("u0 must be nonzero")
    lhs = inner(model.space, u0, u1) / norm0_sq
    nl = model.nl
    mid = 2.0 * energy(model, u0, u1) + 2.0 * nl.R0 / (1 + 2 * nl.alpha)
    return bool(lhs > mid > 0)


def levine_time_bound(psi_t0: float, dpsi_t0: float, alpha: float,
                      t0: float = 0.0) -> float:
    """Upper bound t0 + psi(t0)/(alpha psi'(t0)) on the blow-up time, valid
    once psi''psi - (1+alpha) psi'^2 >= 0 holds from t0 onward."""
    if psi_t0 <= 0:
        raise ValueError("psi(t0) must be positive")
    if dpsi_t0 <= 0:
        raise ValueError("psi'(t0) must be positive")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return t0 + psi_t0 / (alpha * dpsi_t0)


@dataclass(frozen=True)
class GrowthCurve:
    """State of psi at a reference time t0 with concavity exponent alpha."""

    t0: float
    psi_t0: float
    dpsi_t0: float
    alpha: float

    def __post_init__(self):
        if self.psi_t0 <= 0:
            raise ValueError("psi(t0) must be positive")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")

    @property
    def blowup_time_upper(self) -> float:
        if self.dpsi_t0 <= 0:
            return math.inf
        return self.t0 + self.psi_t0 / (self.alpha * self.dpsi_t0)


def psi_lower_bound(curve: GrowthCurve, t: float) -> float:
    """Pointwise lower bound on psi(t) implied by concavity of psi^(-alpha):

        psi(t) >= psi(t0) * (1 - (t - t0)/(T - t0))^(-1/alpha),

    with T the :attr:`GrowthCurve.blowup_time_upper`; diverges as t -> T-.
    """
    if t < curve.t0:
        raise ValueError("t must be >= t0")
    if t >= curve.blowup_time_upper:
        raise ValueError("t is at or beyond the guaranteed blow-up time")
    frac = curve.alpha * curve.dpsi_t0 / curve.psi_t0 * (t - curve.t0)
    return curve.psi_t0 * (1.0 - frac) ** (-1.0 / curve.alpha)


def t_star_threshold(model: ModelSpec, E0: float, delta: float = 0.0) -> float:
    """psi threshold past which the concavity inequality is guaranteed:

        psi* = (4 (1+2 alpha) E0 + 4 R0 + delta) / (alpha a0),

    clamped at zero (a nonpositive numerator means the inequality holds
    from the start).
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    nl = model.nl
    raw = (4 * (1 + 2 * nl.alpha) * E0 + 4 * nl.R0 + delta) / (nl.alpha * model.a0)
    return max(0.0, raw)
