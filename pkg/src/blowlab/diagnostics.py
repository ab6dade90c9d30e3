"""Trajectory diagnostics: psi, its derivatives, energy, concavity monitors.

psi'' is always evaluated through the equation,

    psi'' = 2 (P v, v) + 2 (F(u) - A u, u),

never by differencing, so the monitors stay clean arbitrarily close to
blow-up.  A finite-difference cross-check lives in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .algebra import inner, op_apply, quad_form
from .criteria import GrowthCurve, energy, psi_lower_bound, t_star_threshold
from .models import ModelSpec
from .nonlinearity import eval_F

__all__ = [
    "Trajectory",
    "psi",
    "dpsi",
    "ddpsi_eq",
    "build_trajectory",
    "DefectSeries",
    "concavity_defect",
    "check_inf1",
    "GrowthBoundReport",
    "check_growth_vs_bound",
    "DriftResult",
    "energy_drift",
    "first_threshold_index",
]


def psi(model: ModelSpec, u) -> float:
    """(P u, u)."""
    return quad_form(model.P, u)


def dpsi(model: ModelSpec, u, v) -> float:
    """psi' = 2 (P v, u)."""
    return 2.0 * inner(model.space, op_apply(model.P, v), u)


def ddpsi_eq(model: ModelSpec, u, v) -> float:
    """psi'' via the equation: 2 (P v, v) + 2 (F(u) - A u, u)."""
    rhs = eval_F(model.nl, model.space, u) - op_apply(model.A, u)
    return 2.0 * quad_form(model.P, v) + 2.0 * inner(model.space, rhs, u)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Recorded samples of a run with the derived diagnostic series."""

    model: ModelSpec
    t: np.ndarray          # (k,)
    u: np.ndarray          # (k, n)
    v: np.ndarray          # (k, n)
    psi: np.ndarray
    dpsi: np.ndarray
    ddpsi_eq: np.ndarray
    energy: np.ndarray
    defect: np.ndarray     # psi'' psi - (1+alpha) psi'^2
    inf2_rhs: np.ndarray   # [alpha a0 psi - 4(1+2alpha) E(0) - 4 R0] psi

    def __post_init__(self):
        if len(self.t) and np.any(np.diff(self.t) <= 0):
            raise ValueError("timestamps must be strictly increasing")

    def __len__(self):
        return len(self.t)


def build_trajectory(model: ModelSpec, ts, us, vs) -> Trajectory:
    """Assemble a Trajectory from recorded (t, u, v) samples, computing all
    derived series."""
    t = np.asarray(ts, dtype=float)
    k = len(t)
    n = model.space.dim
    u = np.asarray(us, dtype=float).reshape(k, n)
    v = np.asarray(vs, dtype=float).reshape(k, n)
    psi_s = np.empty(k)
    dpsi_s = np.empty(k)
    ddpsi_s = np.empty(k)
    e_s = np.empty(k)
    for i in range(k):
        psi_s[i] = psi(model, u[i])
        dpsi_s[i] = dpsi(model, u[i], v[i])
        ddpsi_s[i] = ddpsi_eq(model, u[i], v[i])
        e_s[i] = energy(model, u[i], v[i])
    alpha = model.nl.alpha
    defect = ddpsi_s * psi_s - (1 + alpha) * dpsi_s**2
    e0 = e_s[0] if k else 0.0
    rhs = (alpha * model.a0 * psi_s - 4 * (1 + 2 * alpha) * e0
           - 4 * model.nl.R0) * psi_s
    return Trajectory(model=model, t=t, u=u, v=v, psi=psi_s, dpsi=dpsi_s,
                      ddpsi_eq=ddpsi_s, energy=e_s, defect=defect,
                      inf2_rhs=rhs)


class DefectSeries(NamedTuple):
    defect: np.ndarray
    inf2_rhs: np.ndarray


def concavity_defect(traj: Trajectory, alpha: float) -> DefectSeries:
    """Per-sample concavity defect psi'' psi - (1+alpha) psi'^2 together
    with its guaranteed lower bound [alpha a0 psi - 4(1+2alpha) E(0)
    - 4 R0] psi (valid wherever the superlinearity constants hold)."""
    defect = traj.ddpsi_eq * traj.psi - (1 + alpha) * traj.dpsi**2
    model = traj.model
    e0 = traj.energy[0] if len(traj) else 0.0
    rhs = (alpha * model.a0 * traj.psi - 4 * (1 + 2 * alpha) * e0
           - 4 * model.nl.R0) * traj.psi
    return DefectSeries(defect=defect, inf2_rhs=rhs)


def check_inf1(traj: Trajectory, model: ModelSpec | None = None) -> np.ndarray:
    """Per-sample margin of the psi'' lower bound implied by energy
    conservation and the superlinearity condition:

        psi'' >= -4(1+2a) E(0) - 4 R0 + 4(a+1)(P v, v) + 4a (A u, u).

    For the boundary-flux model this is exactly the boundary-energy form of
    the same inequality (the abstract operators encode the boundary terms).
    Margins should be >= -tol wherever the model's (alpha, R0) hold.
    """
    model = model or traj.model
    nl = model.nl
    k = len(traj)
    e0 = traj.energy[0] if k else 0.0
    margins = np.empty(k)
    for i in range(k):
        kinetic = quad_form(model.P, traj.v[i])
        potential = quad_form(model.A, traj.u[i])
        bound = (-4 * (1 + 2 * nl.alpha) * e0 - 4 * nl.R0
                 + 4 * (nl.alpha + 1) * kinetic + 4 * nl.alpha * potential)
        margins[i] = traj.ddpsi_eq[i] - bound
    return margins


@dataclass(frozen=True)
class GrowthBoundReport:
    passed: bool
    n_checked: int
    min_ratio: float                 # min of psi / bound over checked samples
    first_violation_t: float | None


def check_growth_vs_bound(traj: Trajectory, curve: GrowthCurve,
                          tol: float = 1e-3) -> GrowthBoundReport:
    """Check psi(t) >= psi_lower_bound(curve, t) * (1 - tol) on the samples
    in [t0, blowup_time_upper)."""
    sel = ((traj.t >= curve.t0) & (traj.t < curve.blowup_time_upper))
    idx = np.nonzero(sel)[0]
    min_ratio = np.inf
    first_violation = None
    for i in idx:
        bound = psi_lower_bound(curve, float(traj.t[i]))
        ratio = traj.psi[i] / bound
        if ratio < min_ratio:
            min_ratio = ratio
        if ratio < 1.0 - tol and first_violation is None:
            first_violation = float(traj.t[i])
    return GrowthBoundReport(passed=first_violation is None,
                             n_checked=len(idx),
                             min_ratio=float(min_ratio) if len(idx) else np.inf,
                             first_violation_t=first_violation)


class DriftResult(NamedTuple):
    max_abs: float
    max_rel: float


def energy_drift(traj: Trajectory) -> DriftResult:
    """Maximum |E(t) - E(0)| over the samples, absolute and relative."""
    if len(traj) < 1:
        raise ValueError("trajectory has no samples")
    e0 = traj.energy[0]
    max_abs = float(np.max(np.abs(traj.energy - e0)))
    if e0 != 0.0:
        max_rel = max_abs / abs(e0)
    else:
        max_rel = 0.0 if max_abs == 0.0 else np.inf
    return DriftResult(max_abs=max_abs, max_rel=max_rel)


def first_threshold_index(traj: Trajectory, delta: float = 0.0) -> int | None:
    """Index of the first sample with psi >= psi*(E(0), delta), or None."""
    if len(traj) == 0:
        return None
    thr = t_star_threshold(traj.model, float(traj.energy[0]), delta)
    hits = np.nonzero(traj.psi >= thr)[0]
    return int(hits[0]) if len(hits) else None
