"""Model factories: concrete instances of P u_tt + A u = F(u).

Each factory reduces one of the supported problems to the abstract form on
a grid, builds SPD operators P and A, attaches the nonlinearity with its
(alpha, R0) constants, and caches the coercivity constant a0 together with
the largest generalized eigenvalue (whose square root bounds the stable
explicit step).

Supported kinds:

* ``klein_gordon``      u_tt - lap u + m^2 u = |u|^p u, Dirichlet box
* ``boussinesq``        u_tt - a lap u_tt - lap u + nu lap^2 u + lap f(u) = 0,
                        recast with P = (-lap)^{-1} + a I, A = I - nu lap
* ``plate``             u_tt + lap^2 u = F(u) under u = lap u = 0, with
                        nonlocal Kirchhoff terms and/or a pointwise f
* ``nonlinear_boundary`` u_tt - lap u + b u = 0 with du/dn = f(u) on the
                        flux part of the boundary (1D, ghost-point scheme)
* ``scalar_ode``        the 1-node instance, used as a high-accuracy oracle
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .algebra import (
    DiscreteSpace,
    SpdOperator,
    build_bilaplacian,
    build_laplacian,
    identity_operator,
    interval_dirichlet,
    interval_flux,
    laplacian_matrix,
    max_generalized_eig,
    min_generalized_eig,
    rectangle_dirichlet,
)
from .nonlinearity import (
    Nonlinearity,
    boundary_nl,
    certify_FG,
    kirchhoff_nl,
    polynomial_nl,
    power_nl,
    zero_nl,
)

__all__ = [
    "ModelSpec",
    "make_klein_gordon",
    "make_boussinesq",
    "make_plate",
    "make_nonlinear_boundary",
    "make_scalar_ode",
]


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """A complete problem instance, immutable after construction."""

    kind: str
    space: DiscreteSpace
    P: SpdOperator
    A: SpdOperator
    nl: Nonlinearity
    params: dict
    a0: float
    eig_residual: float
    omega_max: float              # sqrt of the largest eigenvalue of (A, P)
    aux: dict = field(default_factory=dict)
    support_guard_tol: float | None = None


def _dirichlet_space(L, n) -> DiscreteSpace:
    if np.isscalar(L) and np.isscalar(n):
        return interval_dirichlet(float(L), int(n))
    L = tuple(np.atleast_1d(L).astype(float))
    n = tuple(np.atleast_1d(n).astype(int))
    if len(L) == 1 and len(n) == 1:
        return interval_dirichlet(L[0], n[0])
    if len(L) == 2 and len(n) == 2:
        return rectangle_dirichlet(L[0], L[1], n[0], n[1])
    raise ValueError("only 1D intervals and 2D rectangles are supported")


def _finalize(kind, space, P, A, nl, params, aux=None, support_guard_tol=None,
              dense_cutoff=512) -> ModelSpec:
    eig = min_generalized_eig(A, P, dense_cutoff=dense_cutoff)
    lam_max = max_generalized_eig(A, P, dense_cutoff=dense_cutoff)
    return ModelSpec(kind=kind, space=space, P=P, A=A, nl=nl, params=params,
                     a0=eig.a0, eig_residual=eig.residual,
                     omega_max=float(np.sqrt(lam_max)),
                     aux=aux or {}, support_guard_tol=support_guard_tol)


def make_klein_gordon(L, n, mass_m: float, p: float = 2.0, *,
                      linear: bool = False,
                      cauchy_guard: float | None = None) -> ModelSpec:
    """Klein-Gordon on a Dirichlet box: P = I, A = -lap + m^2 I, F = |u|^p u.

    ``linear=True`` drops the nonlinearity (control runs).  ``cauchy_guard``
    enables the compact-support monitor used when the box emulates a free
    Cauchy problem: a run aborts if |u| at the nodes adjacent to the wall
    exceeds the guard tolerance before blow-up.
    """
    if mass_m <= 0:
        raise ValueError("mass must be positive")
    if p <= 0:
        raise ValueError("exponent p must be positive")
    space = _dirichlet_space(L, n)
    lap = build_laplacian(space)
    A = SpdOperator(space, mat=lap.mat + mass_m**2 * sp.identity(space.dim),
                    label="-lap+m^2")
    P = identity_operator(space)
    nl = zero_nl(alpha=p / 4) if linear else power_nl(p)
    aux = {"laplacian": lap, "guard_nodes": _guard_nodes(space)}
    return _finalize("klein_gordon", space, P, A, nl,
                     params={"mass": float(mass_m), "p": float(p)},
                     aux=aux, support_guard_tol=cauchy_guard)


def _guard_nodes(space: DiscreteSpace):
    """Indices of nodes adjacent to the Dirichlet wall."""
    if space.kind == "interval_1d":
        return np.array([0, space.dim - 1])
    nx, ny = space.shape
    idx = np.arange(space.dim).reshape(nx, ny)
    ring = np.concatenate([idx[0, :], idx[-1, :], idx[1:-1, 0], idx[1:-1, -1]])
    return np.unique(ring)


def make_boussinesq(L, n, a: float = 0.0, nu: float = 1.0, m: int = 2,
                    poly=()) -> ModelSpec:
    """Generalized Boussinesq model after applying (-lap)^{-1}:

        P = (-lap)^{-1} + a I,   A = I - nu lap,   F(u) = |u|^m u + poly(u).

    P is never formed densely: applications use a cached factorization of
    the Dirichlet -lap, and P-solves factorize (I + a K) once.
    """
    if a < 0:
        raise ValueError("a must be nonnegative")
    if nu <= 0:
        raise ValueError("nu must be positive")
    if m < 1:
        raise ValueError("m must be an integer >= 1")
    space = _dirichlet_space(L, n)
    K = laplacian_matrix(space)
    A = SpdOperator(space, mat=sp.identity(space.dim) + nu * K, label="I-nu*lap")
    k_lu = spla.splu(K.tocsc())
    ik_lu = spla.splu((sp.identity(space.dim, format="csc") + a * K).tocsc())

    def p_apply(v, _k=k_lu, _a=a):
        return _k.solve(v) + _a * v

    def p_solve(rhs, _ik=ik_lu, _K=K):
        return _ik.solve(_K @ rhs)

    P = SpdOperator(space, apply_fn=p_apply, solve_fn=p_solve,
                    label="(-lap)^-1+aI")
    nl = polynomial_nl(m, poly, measure=space.measure)
    return _finalize("boussinesq", space, P, A, nl,
                     params={"a": float(a), "nu": float(nu), "m": int(m),
                             "poly": tuple(float(c) for c in poly)})


def make_plate(L, n, a1: float = 0.0, a2: float = 0.0,
               b1: float = 0.0, b2: float = 0.0,
               f: Nonlinearity | None = None) -> ModelSpec:
    """Plate/beam model: P = I, A = lap^2 under u = lap u = 0.

    The Kirchhoff terms (a_i + b_i int u_{x_i}^2) u_{x_i x_i} and/or the
    pointwise source f(u) are moved to the right-hand side as F(u).  ``f``
    must be a power/polynomial-kind nonlinearity; its scalar law is reused
    while (alpha, R0) are rederived in the plate context so that a single
    alpha serves both contributions.  With neither present the model is
    linear (control runs).
    """
    space = _dirichlet_space(L, n)
    two_d = space.kind == "rectangle_2d"
    kirchhoff = any(c != 0.0 for c in (a1, a2, b1, b2))
    if kirchhoff:
        if b1 <= 0:
            raise ValueError("Kirchhoff terms need b1 > 0")
        if two_d and b2 <= 0:
            raise ValueError("Kirchhoff terms in 2D need b2 > 0")
    if f is not None and f.kind not in ("power", "polynomial"):
        raise ValueError("plate source f must be a power/polynomial nonlinearity")

    A = build_bilaplacian(space)
    P = identity_operator(space)

    if kirchhoff and f is None:
        nl = kirchhoff_nl(space, a1, a2, b1, b2)
    elif f is not None and not kirchhoff:
        nl = polynomial_nl(int(f.exponent), f.poly_coeffs, measure=space.measure)
    elif f is not None and kirchhoff:
        base = kirchhoff_nl(space, a1, a2, b1, b2)
        probe = Nonlinearity(kind="polynomial", alpha=base.alpha,
                             exponent=f.exponent, poly_coeffs=f.poly_coeffs)
        from .nonlinearity import pointwise_r0 as _r0
        r0 = _r0(probe, base.alpha)
        nl = Nonlinearity(kind="kirchhoff_plate", alpha=base.alpha,
                          R0=base.R0 + space.measure * r0 / 2,
                          exponent=f.exponent, poly_coeffs=f.poly_coeffs,
                          plate_params=base.plate_params,
                          plate_ops=base.plate_ops, pointwise_r0=r0)
    else:
        nl = zero_nl(alpha=0.5)

    return _finalize("plate", space, P, A, nl,
                     params={"a1": float(a1), "a2": float(a2),
                             "b1": float(b1), "b2": float(b2),
                             "linear": nl.kind == "zero"})


def make_nonlinear_boundary(L: float, n: int, b: float,
                            f: Nonlinearity | None,
                            gamma_split: str = "both_ends") -> ModelSpec:
    """Wave equation u_tt - lap u + b u = 0 on (0, L) with boundary flux
    du/dn = f(u) on the flux endpoints (second-order ghost points).

    ``gamma_split`` selects ``both_ends`` or ``right_end_only`` (left end
    then pinned to zero).  The semidiscrete system conserves the boundary
    energy E = (|u_t|^2 + |grad u|^2 + b |u|^2)/2 - sum_flux phi(u) exactly;
    the time integrator preserves it to its own order.
    """
    if b <= 0:
        raise ValueError("b must be positive")
    if gamma_split not in ("both_ends", "right_end_only"):
        raise ValueError("gamma_split must be 'both_ends' or 'right_end_only'")
    if f is not None and f.kind not in ("power", "polynomial"):
        raise ValueError("boundary flux f must be a power/polynomial nonlinearity")
    space = interval_flux(float(L), int(n),
                          left_dirichlet=gamma_split == "right_end_only")
    K = laplacian_matrix(space)
    A = SpdOperator(space, mat=K + b * sp.identity(space.dim), label="-lap+bI")
    P = identity_operator(space)
    if f is None:
        nl = zero_nl(alpha=0.5)
    else:
        nl = boundary_nl(int(f.exponent), f.poly_coeffs,
                         boundary_measure=space.boundary_measure)
    aux = {}
    if nl.kind != "zero":
        aux["fg_certificate"] = certify_FG(nl, space, n_samples=64)
    return _finalize("nonlinear_boundary", space, P, A, nl,
                     params={"b": float(b), "gamma_split": gamma_split},
                     aux=aux)


def make_scalar_ode(a0: float, p: float) -> ModelSpec:
    """One-node instance u'' + a0 u = |u|^p u: blow-up resolvable to high
    accuracy, used as the brute-force oracle for time bounds."""
    if a0 <= 0:
        raise ValueError("a0 must be positive")
    if p <= 0:
        raise ValueError("p must be positive")
    space = interval_dirichlet(2.0, 1)   # single node with unit weight
    P = identity_operator(space)
    A = SpdOperator(space, mat=np.array([[float(a0)]]), label="a0")
    nl = power_nl(p)
    return _finalize("scalar_ode", space, P, A, nl,
                     params={"a0": float(a0), "p": float(p)})
