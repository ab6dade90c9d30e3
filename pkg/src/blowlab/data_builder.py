"""Constructive initial data with prescribed positive energy.

Given any seed pair normalized to (P u0^, u0^) = (P u1^, u1^) = 1 with
theta = (P u0^, u1^) > 0 and any target K^2 > 0, data of the form
u0 = c0 u0^, u1 = c1 u1^ exist with E(u0, u1) = K^2 and the growth
conditions satisfied: pick any c1 above the threshold
theta^{-1} sqrt(2 K^2 + 4 R0/(m+2)), then solve H(c0) = E - K^2 = 0 by
bracketing and bisection (H(0+) > 0 and H -> -inf by superlinearity of the
potential, so a root exists by the intermediate value theorem).  The
inequality condition is then automatic, so blow-up data exist for every
prescribed positive energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import inner, op_apply, quad_form
from .criteria import CriteriaReport, check_levine_conditions, energy
from .models import ModelSpec
from .nonlinearity import eval_G

__all__ = [
    "SeedPair",
    "BuiltData",
    "normalize_pair",
    "c1_threshold",
    "solve_H_root",
    "build_positive_energy_data",
]


@dataclass(frozen=True)
class SeedPair:
    """P-normalized seed directions with overlap theta = (P u0^, u1^)."""

    u_hat0: np.ndarray
    u_hat1: np.ndarray
    theta: float


@dataclass(frozen=True)
class BuiltData:
    """Initial data with prescribed energy K^2 and satisfied conditions."""

    c0: float
    c1: float
    u0: np.ndarray
    u1: np.ndarray
    K2: float
    achieved_energy: float
    report: CriteriaReport
    notes: str = ""


def normalize_pair(model: ModelSpec, v0, v1) -> SeedPair:
    """Scale each seed by its P-norm and compute theta; theta must be
    positive (and is <= 1 by Cauchy-Schwarz)."""
    n0 = quad_form(model.P, v0)
    n1 = quad_form(model.P, v1)
    if n0 <= 0 or n1 <= 0:
        raise ValueError("seed vectors must be nonzero")
    u_hat0 = np.asarray(v0, dtype=float) / math.sqrt(n0)
    u_hat1 = np.asarray(v1, dtype=float) / math.sqrt(n1)
    theta = inner(model.space, op_apply(model.P, u_hat0), u_hat1)
    if theta <= 0:
        raise ValueError(f"seed pair has (P v0, v1) = {theta:g} <= 0; unusable")
    return SeedPair(u_hat0=u_hat0, u_hat1=u_hat1, theta=float(theta))


def c1_threshold(theta: float, K2: float, R0: float, m: float) -> float:
    """Velocity scale threshold theta^{-1} sqrt(2 K^2 + 4 R0/(m+2)); any c1
    strictly above it is admissible."""
    if not 0 < theta <= 1 + 1e-12:
        raise ValueError("theta must lie in (0, 1]")
    if K2 <= 0:
        raise ValueError("K2 must be positive")
    if R0 < 0:
        raise ValueError("R0 must be nonnegative")
    return math.sqrt(2 * K2 + 4 * R0 / (m + 2)) / theta


def solve_H_root(model: ModelSpec, pair: SeedPair, c1: float, K2: float,
                 tol_rel: float = 1e-10, max_doublings: int = 60) -> float:
    """Smallest bracketed root of H(c0) = E(c0 u0^, c1 u1^) - K^2.

    H(0+) = c1^2/2 - K^2 > 0 for admissible c1; the bracket is found by
    doubling c0 from 1 until H changes sign, then bisected until
    |H| <= tol_rel * max(1, K^2).
    """
    nl = model.nl
    thr = c1_threshold(pair.theta, K2, nl.R0, 4 * nl.alpha)
    if c1 <= thr:
        raise ValueError(f"c1 = {c1:g} is not above the threshold {thr:g}")
    quad_a = quad_form(model.A, pair.u_hat0)

    def H(c0: float) -> float:
        return (0.5 * c1**2 - K2 + 0.5 * c0**2 * quad_a
                - eval_G(nl, model.space, c0 * pair.u_hat0))

    h0 = 0.5 * c1**2 - K2
    if h0 <= 0:
        raise ValueError("H(0+) <= 0; c1 is inconsistent with the target energy")
    lo, h_lo = 0.0, h0
    hi = 1.0
    h_hi = H(hi)
    doublings = 0
    while h_hi > 0:
        lo, h_lo = hi, h_hi
        hi *= 2.0
        h_hi = H(hi)
        doublings += 1
        if doublings > max_doublings:
            raise RuntimeError(
                f"no sign change of H within {max_doublings} doublings "
                f"(H({hi:g}) = {h_hi:g}); the nonlinearity is too weak on "
                "this seed")
    tol = tol_rel * max(1.0, K2)
    best_c, best_h = hi, h_hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        h_mid = H(mid)
        if abs(h_mid) < abs(best_h):
            best_c, best_h = mid, h_mid
        if abs(h_mid) <= tol:
            return mid
        if h_mid > 0:
            lo = mid
        else:
            hi = mid
    if abs(best_h) <= tol:
        return best_c
    raise RuntimeError(f"bisection stalled with |H| = {abs(best_h):g} > {tol:g}")


def build_positive_energy_data(model: ModelSpec, pair: SeedPair, K2: float,
                               c1_factor: float = 1.01) -> BuiltData:
    """Assemble data with E = K^2 and the growth conditions satisfied.

    c1 is placed a small factor above the threshold (any admissible choice
    works; the margin keeps c0 moderate), then c0 solves H(c0) = 0.
    """
    if K2 <= 0:
        raise ValueError("K2 must be positive")
    if c1_factor <= 1:
        raise ValueError("c1_factor must exceed 1")
    nl = model.nl
    thr = c1_threshold(pair.theta, K2, nl.R0, 4 * nl.alpha)
    c1 = c1_factor * thr
    c0 = solve_H_root(model, pair, c1, K2)
    u0 = c0 * pair.u_hat0
    u1 = c1 * pair.u_hat1
    achieved = energy(model, u0, u1)
    report = check_levine_conditions(model, u0, u1)
    if abs(achieved - K2) > 1e-8 * max(1.0, K2):
        raise RuntimeError(
            f"achieved energy {achieved!r} misses the target {K2!r}")
    if not report.satisfied:
        raise RuntimeError("constructed data fails the growth conditions; "
                           "this contradicts the construction and indicates "
                           "a broken model setup")
    notes = ""
    n_changes = _count_sign_changes(model, pair, c1, K2, c0)
    if n_changes > 1:
        notes = (f"H has {n_changes} sign changes up to 4*c0; the smallest "
                 "bracketed root was returned")
    return BuiltData(c0=float(c0), c1=float(c1), u0=u0, u1=u1, K2=float(K2),
                     achieved_energy=float(achieved), report=report,
                     notes=notes)


def _count_sign_changes(model, pair, c1, K2, c0) -> int:
    nl = model.nl
    quad_a = quad_form(model.A, pair.u_hat0)
    grid = np.linspace(1e-3 * c0, 4 * c0, 200)
    vals = [0.5 * c1**2 - K2 + 0.5 * c**2 * quad_a
            - eval_G(nl, model.space, c * pair.u_hat0) for c in grid]
    signs = np.sign(vals)
    return int(np.sum(signs[1:] * signs[:-1] < 0))
