"""Gradient nonlinearities F with potential G and their structural constants.

Every nonlinearity here is the gradient of a scalar potential G in the
weighted inner product: (F(u), v) = d/de G(u + e v) at e = 0.  The blow-up
machinery additionally needs the superlinearity condition

    (F(v), v) >= 2 (1 + 2 alpha) G(v) - 2 R0          for all v

for some alpha > 0, R0 >= 0.  Each built-in kind ships analytic (alpha, R0);
:func:`certify_FG` is a sampling falsifier for user-chosen constants (it can
refute a claimed pair, never prove one).

Pointwise kinds use the scalar law f(s) = |s|^q s + sum_j c_j s^j with
potential  phi(s) = |s|^(q+2)/(q+2) + sum_j c_j s^(j+1)/(j+1); for those the
superlinearity reduces to the scalar condition f(s) s - 2(1+2a) phi(s) >= -r0,
quantified by :func:`pointwise_r0`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .algebra import DiscreteSpace, SpdOperator, inner, quad_form, directional_laplacian

__all__ = [
    "Nonlinearity",
    "FgCertificate",
    "zero_nl",
    "power_nl",
    "polynomial_nl",
    "kirchhoff_nl",
    "boundary_nl",
    "eval_F",
    "eval_G",
    "certify_FG",
    "pointwise_r0",
]

_POINTWISE = ("power", "polynomial")
_SCALAR_LAW = ("power", "polynomial", "boundary_scalar")


@dataclass(frozen=True, eq=False)
class Nonlinearity:
    """A gradient nonlinearity plus the constants entering the blow-up theory.

    ``R0`` is the constant of the superlinearity condition as written above
    (the one dividing by (1+2 alpha) in the initial-data conditions).  For
    scalar-law kinds ``pointwise_r0`` stores the underlying scalar constant
    r0; volume kinds carry R0 = measure * r0 / 2, the boundary kind
    R0 = |Gamma_2| * r0 / 2.
    """

    kind: str                      # zero | power | polynomial | kirchhoff_plate | boundary_scalar
    alpha: float
    R0: float = 0.0
    exponent: float = 0.0          # p (power) or m (polynomial laws)
    poly_coeffs: tuple[float, ...] = ()
    plate_params: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    pointwise_r0: float = 0.0
    plate_ops: tuple[SpdOperator, ...] = ()
    r0_range: tuple[float, float] = (0.0, 0.0)   # s-range the r0 was sampled on

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.R0 < 0:
            raise ValueError("R0 must be nonnegative")


def zero_nl(alpha: float = 1.0) -> Nonlinearity:
    """F = 0, G = 0 (linear control models)."""
    return Nonlinearity(kind="zero", alpha=alpha)


def power_nl(p: float, alpha: float | None = None) -> Nonlinearity:
    """F(u) = |u|^p u nodewise; G(u) = int |u|^(p+2)/(p+2).

    alpha defaults to p/4, for which the superlinearity holds with equality
    and R0 = 0.
    """
    if p <= 0:
        raise ValueError("exponent p must be positive")
    return Nonlinearity(kind="power", alpha=p / 4 if alpha is None else alpha,
                        exponent=p)


def polynomial_nl(m: int, coeffs=(), *, measure: float,
                  alpha: float | None = None,
                  s_range: tuple[float, float] = (-100.0, 100.0)) -> Nonlinearity:
    """f(u) = |u|^m u + sum_j c_j u^j nodewise, integer m >= 1.

    ``coeffs[j]`` multiplies u^j (degree <= m-1 enforced).  R0 is derived
    from the scalar constant r0 sampled on ``s_range`` and scales with the
    domain measure; the sampled range is recorded on the instance.
    """
    if m < 1 or int(m) != m:
        raise ValueError("m must be an integer >= 1")
    coeffs = tuple(float(c) for c in coeffs)
    if len(coeffs) > m:
        raise ValueError("lower-order part must have degree <= m-1")
    a = m / 4 if alpha is None else alpha
    probe = Nonlinearity(kind="polynomial", alpha=a, exponent=float(m),
                         poly_coeffs=coeffs)
    r0 = pointwise_r0(probe, a, s_range)
    return Nonlinearity(kind="polynomial", alpha=a, R0=measure * r0 / 2,
                        exponent=float(m), poly_coeffs=coeffs,
                        pointwise_r0=r0, r0_range=s_range)


def kirchhoff_nl(space: DiscreteSpace, a1: float, a2: float = 0.0,
                 b1: float = 0.0, b2: float = 0.0,
                 alpha: float | None = None) -> Nonlinearity:
    """Nonlocal beam/plate terms (a_i + b_i * int u_{x_i}^2) u_{x_i x_i},
    moved to the right-hand side of the equation.

    With q_i = int u_{x_i}^2 the potential is
    G(u) = sum_i a_i q_i / 2 + b_i q_i^2 / 4 and
    (F(u), u) - 2(1+2a) G(u) = sum_i [ -2a a_i q_i + (1-2a) b_i q_i^2 / 2 ],
    which is bounded below iff a < 1/2 wherever a_i > 0.  Defaults: alpha =
    1/2 (R0 = 0) when every a_i <= 0, alpha = 1/4 otherwise, with the exact
    minimum R0 = sum_i alpha^2 max(a_i,0)^2 / ((1-2 alpha) b_i).
    """
    two_d = space.kind == "rectangle_2d"
    active = [(a1, b1, 0)] + ([(a2, b2, 1)] if two_d else [])
    for a_i, b_i, _ in active:
        if (a_i, b_i) != (0.0, 0.0) and b_i <= 0:
            raise ValueError("Kirchhoff terms need b_i > 0")
    if alpha is None:
        alpha = 0.5 if all(a_i <= 0 for a_i, _, _ in active) else 0.25
    R0 = 0.0
    for a_i, b_i, _ in active:
        if a_i > 0:
            if alpha >= 0.5:
                raise ValueError(
                    "no finite R0 for alpha >= 1/2 with a positive a_i; "
                    "pick alpha in (0, 1/2)")
            R0 += alpha**2 * a_i**2 / ((1 - 2 * alpha) * b_i)
    ops = tuple(directional_laplacian(space, ax) for _, _, ax in active)
    return Nonlinearity(kind="kirchhoff_plate", alpha=alpha, R0=R0,
                        plate_params=(a1, a2, b1, b2), plate_ops=ops)


def boundary_nl(m: int, coeffs=(), *, boundary_measure: float,
                alpha: float | None = None,
                s_range: tuple[float, float] = (-100.0, 100.0)) -> Nonlinearity:
    """Boundary-flux nonlinearity du/dn = f(u) with the same scalar law as
    the polynomial kind; the potential integrates over the flux boundary."""
    if m < 1 or int(m) != m:
        raise ValueError("m must be an integer >= 1")
    coeffs = tuple(float(c) for c in coeffs)
    a = m / 4 if alpha is None else alpha
    probe = Nonlinearity(kind="boundary_scalar", alpha=a, exponent=float(m),
                         poly_coeffs=coeffs)
    r0 = pointwise_r0(probe, a, s_range)
    return Nonlinearity(kind="boundary_scalar", alpha=a,
                        R0=boundary_measure * r0 / 2, exponent=float(m),
                        poly_coeffs=coeffs, pointwise_r0=r0, r0_range=s_range)


# -- scalar law -----------------------------------------------------------

def _f_scalar(nl: Nonlinearity, s):
    s = np.asarray(s, dtype=float)
    out = np.abs(s) ** nl.exponent * s
    for j, c in enumerate(nl.poly_coeffs):
        if c != 0.0:
            out = out + c * s**j
    return out


def _phi_scalar(nl: Nonlinearity, s):
    s = np.asarray(s, dtype=float)
    q = nl.exponent
    out = np.abs(s) ** (q + 2) / (q + 2)
    for j, c in enumerate(nl.poly_coeffs):
        if c != 0.0:
            out = out + c * s ** (j + 1) / (j + 1)
    return out


def _margin_scalar(nl: Nonlinearity, alpha: float, s):
    """f(s) s - 2(1+2a) phi(s), with the leading |s|^(q+2) terms combined
    before evaluation so the equality case alpha = q/4 cancels exactly
    instead of leaving |s|^(q+2)-sized rounding noise."""
    s = np.asarray(s, dtype=float)
    q = nl.exponent
    coef = 1.0 - 2.0 * (1.0 + 2.0 * alpha) / (q + 2.0)
    out = coef * np.abs(s) ** (q + 2)
    for j, c in enumerate(nl.poly_coeffs):
        if c != 0.0:
            out = out + c * s ** (j + 1) * (1.0 - 2.0 * (1.0 + 2.0 * alpha) / (j + 1.0))
    return out


# -- evaluation -------------------------------------------------------------

def eval_F(nl: Nonlinearity, space: DiscreteSpace, u) -> np.ndarray:
    """Evaluate the nonlinearity as a grid vector."""
    u = np.asarray(u, dtype=float)
    if u.shape != (space.dim,):
        raise ValueError(f"u has shape {u.shape}, expected ({space.dim},)")
    if nl.kind == "zero":
        return np.zeros_like(u)
    if nl.kind in _POINTWISE:
        return _f_scalar(nl, u)
    if nl.kind == "kirchhoff_plate":
        a1, a2, b1, b2 = nl.plate_params
        out = np.zeros_like(u)
        for (a_i, b_i), op in zip(((a1, b1), (a2, b2)), nl.plate_ops):
            if op.space is not space:
                raise ValueError("Kirchhoff operators were built on a different space")
            if (a_i, b_i) != (0.0, 0.0):
                out += (a_i + b_i * quad_form(op, u)) * op.apply(u)
        return out
    if nl.kind == "boundary_scalar":
        if not space.boundary_nodes:
            raise ValueError("boundary nonlinearity needs a space with flux nodes")
        out = np.zeros_like(u)
        idx = list(space.boundary_nodes)
        out[idx] = (_f_scalar(nl, u[idx]) * space.boundary_weights
                    / space.quad_weights[idx])
        return out
    raise ValueError(f"unknown nonlinearity kind {nl.kind!r}")


def eval_G(nl: Nonlinearity, space: DiscreteSpace, u) -> float:
    """Potential of the nonlinearity; eval_F is its gradient in the
    weighted inner product."""
    u = np.asarray(u, dtype=float)
    if u.shape != (space.dim,):
        raise ValueError(f"u has shape {u.shape}, expected ({space.dim},)")
    if nl.kind == "zero":
        return 0.0
    if nl.kind in _POINTWISE:
        return float(np.dot(space.quad_weights, _phi_scalar(nl, u)))
    if nl.kind == "kirchhoff_plate":
        a1, a2, b1, b2 = nl.plate_params
        total = 0.0
        for (a_i, b_i), op in zip(((a1, b1), (a2, b2)), nl.plate_ops):
            if (a_i, b_i) != (0.0, 0.0):
                q = quad_form(op, u)
                total += a_i * q / 2 + b_i * q * q / 4
        return total
    if nl.kind == "boundary_scalar":
        idx = list(space.boundary_nodes)
        return float(np.dot(space.boundary_weights, _phi_scalar(nl, u[idx])))
    raise ValueError(f"unknown nonlinearity kind {nl.kind!r}")


# -- condition checks --------------------------------------------------------

@dataclass(frozen=True)
class FgCertificate:
    """Outcome of sampling the superlinearity margin
    (F(v), v) - 2(1+2 alpha) G(v) + 2 R0 over probe fields.

    A negative worst margin (beyond rounding) falsifies the claimed
    (alpha, R0); a nonnegative one is evidence, not proof.
    """

    verified: bool
    worst_margin: float
    witness: np.ndarray


def certify_FG(nl: Nonlinearity, space: DiscreteSpace, n_samples: int,
               amplitude_range: tuple[float, float] = (1e-2, 1e2),
               seed: int = 0) -> FgCertificate:
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    lo, hi = amplitude_range
    if not (0 < lo <= hi):
        raise ValueError("amplitude_range must be positive and ordered")
    rng = np.random.default_rng(seed)
    n = space.dim
    amps = np.geomspace(lo, hi, num=max(n_samples, 2))
    probes = []
    for amp in amps[:n_samples]:
        probes.append(amp * rng.standard_normal(n))
    # deterministic probes: constants and low modes, across the amplitude range
    for amp in (lo, np.sqrt(lo * hi), hi):
        probes.append(amp * np.ones(n))
        probes.append(-amp * np.ones(n))
        if space.kind == "interval_1d":
            x = space.coords / space.lengths[0]
            probes.append(amp * np.sin(np.pi * x))
            probes.append(amp * np.sin(2 * np.pi * x))
    worst = np.inf
    worst_scaled = np.inf
    witness = probes[0]
    verified = True
    for v in probes:
        fv = inner(space, eval_F(nl, space, v), v)
        g = eval_G(nl, space, v)
        margin = fv - 2 * (1 + 2 * nl.alpha) * g + 2 * nl.R0
        scale = abs(fv) + 2 * (1 + 2 * nl.alpha) * abs(g) + 2 * nl.R0 + 1.0
        if margin < -1e-9 * scale:
            verified = False
        if margin / scale < worst_scaled:
            worst_scaled = margin / scale
            witness = v
        worst = min(worst, margin)
    return FgCertificate(verified=verified, worst_margin=float(worst),
                         witness=np.asarray(witness))


def pointwise_r0(nl: Nonlinearity, alpha: float,
                 s_range: tuple[float, float] = (-100.0, 100.0),
                 n_grid: int = 4001) -> float:
    """Scalar constant r0 = max(0, -min_s [f(s) s - 2(1+2 alpha) phi(s)])
    on the given range, by dense sampling plus local refinement.

    Raises ValueError when the sampled minimum sits at a range endpoint and
    is still decreasing there: no finite r0 exists on this range.
    """
    if nl.kind not in _SCALAR_LAW:
        raise ValueError(f"kind {nl.kind!r} has no scalar law")
    lo, hi = s_range
    if not lo < hi:
        raise ValueError("empty s_range")
    s = np.linspace(lo, hi, n_grid)

    def g(t):
        return _margin_scalar(nl, alpha, t)

    vals = g(s)
    i = int(np.argmin(vals))
    scale = max(1.0, float(np.abs(vals).max()))
    if i == 0 and vals[0] < vals[1] - 1e-12 * scale:
        raise ValueError(
            f"f(s) s - 2(1+2a) phi(s) is still decreasing at s = {lo:g}; "
            "no finite r0 on this range")
    if i == n_grid - 1 and vals[-1] < vals[-2] - 1e-12 * scale:
        raise ValueError(
            f"f(s) s - 2(1+2a) phi(s) is still decreasing at s = {hi:g}; "
            "no finite r0 on this range")
    a = s[max(i - 1, 0)]
    b = s[min(i + 1, n_grid - 1)]
    res = minimize_scalar(lambda t: float(g(t)), bounds=(a, b), method="bounded",
                          options={"xatol": 1e-12 * max(1.0, abs(b - a))})
    gmin = min(float(vals[i]), float(res.fun))
    return max(0.0, -gmin)
