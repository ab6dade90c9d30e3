"""Finite-dimensional spaces and symmetric positive definite operators.

Grid functions live on a :class:`DiscreteSpace`: a uniform 1D or 2D grid
with per-node quadrature weights defining the working inner product

    (x, y) = sum_i w_i x_i y_i.

Operators are stored through their action matrix ``M`` (``u -> M u``) and
must be symmetric positive definite with respect to that inner product,
i.e. ``W M = M^T W`` with ``W = diag(w)``.  On uniform-weight grids
(Dirichlet interior grids) this is plain matrix symmetry; on trapezoid
grids with flux endpoints the weighted form is the symmetric object.

The module also provides the coercivity constant ``a0``: the smallest
generalized eigenvalue of the pencil ``(A, P)``, realizing the bound
``(A v, v) >= a0 (P v, v)`` that the blow-up machinery relies on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

__all__ = [
    "DiscreteSpace",
    "SpdOperator",
    "GeneralizedEigResult",
    "interval_dirichlet",
    "interval_flux",
    "rectangle_dirichlet",
    "inner",
    "norm_w",
    "op_apply",
    "op_solve",
    "quad_form",
    "identity_operator",
    "laplacian_matrix",
    "build_laplacian",
    "build_bilaplacian",
    "directional_laplacian",
    "min_generalized_eig",
    "max_generalized_eig",
]


@dataclass(frozen=True, eq=False)
class DiscreteSpace:
    """A uniform grid carrying the quadrature that defines the inner product.

    ``measure`` is the discrete volume carried by the weights (the union of
    the grid cells owned by the stored nodes); it converges to |Omega| as
    the grid is refined and always equals ``sum(quad_weights)`` exactly.
    ``boundary_nodes`` lists indices of nodes sitting on a flux boundary;
    Dirichlet grids store interior nodes only and have none.
    """

    kind: str                     # "interval_1d" | "rectangle_2d"
    lengths: tuple[float, ...]
    spacing: tuple[float, ...]
    coords: np.ndarray            # (dim,) in 1D, (dim, 2) in 2D
    quad_weights: np.ndarray
    measure: float
    boundary_nodes: tuple[int, ...] = ()
    boundary_weights: np.ndarray = field(default_factory=lambda: np.zeros(0))
    boundary_measure: float = 0.0
    shape: tuple[int, ...] = ()   # logical grid shape (n,) or (nx, ny)

    def __post_init__(self):
        w = np.asarray(self.quad_weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("quad_weights must be a non-empty 1D array")
        if np.any(w <= 0):
            raise ValueError("quad_weights must be strictly positive")
        total = float(np.sum(w))
        if abs(total - self.measure) > 1e-12 * max(abs(self.measure), 1.0):
            raise ValueError(
                f"quadrature weights sum {total} does not match measure {self.measure}"
            )

    @property
    def dim(self) -> int:
        return self.quad_weights.size


def interval_dirichlet(L: float, n: int) -> DiscreteSpace:
    """Interior grid for homogeneous Dirichlet problems on (0, L).

    Nodes x_i = i*h, i = 1..n with h = L/(n+1); weights are uniformly h so
    the standard difference stencils stay symmetric in the inner product.
    """
    if L <= 0 or n < 1:
        raise ValueError("need L > 0 and n >= 1")
    h = L / (n + 1)
    coords = h * np.arange(1, n + 1, dtype=float)
    w = np.full(n, h)
    return DiscreteSpace(
        kind="interval_1d",
        lengths=(float(L),),
        spacing=(h,),
        coords=coords,
        quad_weights=w,
        measure=n * h,
        boundary_measure=2.0,
        shape=(n,),
    )


def interval_flux(L: float, n: int, left_dirichlet: bool = False) -> DiscreteSpace:
    """Grid on [0, L] whose flux endpoints carry trapezoid half-weights.

    With ``left_dirichlet`` the left endpoint is eliminated (value pinned to
    zero) and only the right endpoint is a flux node.  Endpoint surface
    measure is 1 per flux node (0-dimensional boundary).
    """
    if L <= 0 or n < 3:
        raise ValueError("need L > 0 and n >= 3")
    if left_dirichlet:
        h = L / n
        coords = h * np.arange(1, n + 1, dtype=float)
        w = np.full(n, h)
        w[-1] = h / 2
        bnodes = (n - 1,)
    else:
        h = L / (n - 1)
        coords = h * np.arange(0, n, dtype=float)
        w = np.full(n, h)
        w[0] = w[-1] = h / 2
        bnodes = (0, n - 1)
    return DiscreteSpace(
        kind="interval_1d",
        lengths=(float(L),),
        spacing=(h,),
        coords=coords,
        quad_weights=w,
        measure=float(np.sum(w)),
        boundary_nodes=bnodes,
        boundary_weights=np.ones(len(bnodes)),
        boundary_measure=float(len(bnodes)),
        shape=(n,),
    )


def rectangle_dirichlet(Lx: float, Ly: float, nx: int, ny: int) -> DiscreteSpace:
    """Interior tensor grid for Dirichlet problems on (0,Lx) x (0,Ly).

    Node index is ix*ny + iy (x-major ordering).
    """
    if Lx <= 0 or Ly <= 0 or nx < 1 or ny < 1:
        raise ValueError("need positive lengths and node counts")
    hx = Lx / (nx + 1)
    hy = Ly / (ny + 1)
    xs = hx * np.arange(1, nx + 1, dtype=float)
    ys = hy * np.arange(1, ny + 1, dtype=float)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    coords = np.column_stack([X.ravel(), Y.ravel()])
    w = np.full(nx * ny, hx * hy)
    return DiscreteSpace(
        kind="rectangle_2d",
        lengths=(float(Lx), float(Ly)),
        spacing=(hx, hy),
        coords=coords,
        quad_weights=w,
        measure=nx * ny * hx * hy,
        boundary_measure=2.0 * (Lx + Ly),
        shape=(nx, ny),
    )


def _check_vector(space: DiscreteSpace, x, name: str = "vector") -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (space.dim,):
        raise ValueError(f"{name} has shape {x.shape}, expected ({space.dim},)")
    return x


def inner(space: DiscreteSpace, x, y) -> float:
    """Weighted inner product sum_i w_i x_i y_i."""
    x = _check_vector(space, x, "x")
    y = _check_vector(space, y, "y")
    return float(np.dot(space.quad_weights * x, y))


def norm_w(space: DiscreteSpace, x) -> float:
    return float(np.sqrt(inner(space, x, x)))


class SpdOperator:
    """Symmetric positive definite operator on a :class:`DiscreteSpace`.

    Matrix-backed operators pass ``mat`` (dense ndarray or scipy sparse);
    implicit operators pass ``apply_fn``/``solve_fn`` closures instead (used
    when the action involves an inverse that should never be materialized,
    e.g. mass operators of the form (-lap)^{-1} + a I).  Solves go through
    the symmetric weighted form and a cached direct factorization.

    Construction checks exact weighted symmetry for matrix-backed operators
    and positive definiteness (dense eigensolve up to ``dense_cutoff``
    nodes, random quadratic-form sampling above or for implicit operators).
    """

    def __init__(self, space, mat=None, apply_fn=None, solve_fn=None,
                 label="op", check=True, dense_cutoff=256):
        if mat is None and apply_fn is None:
            raise ValueError("need either a matrix or an apply_fn")
        self.space = space
        self.label = label
        self._apply_fn = apply_fn
        self._solve_fn = solve_fn
        self._mat = None
        self._factor = None
        self._dense = None
        if mat is not None:
            if sp.issparse(mat):
                self._mat = mat.tocsr()
            else:
                self._mat = np.asarray(mat, dtype=float)
            if self._mat.shape != (space.dim, space.dim):
                raise ValueError(
                    f"matrix shape {self._mat.shape} does not match space dim {space.dim}"
                )
        if check:
            self._check_spd(dense_cutoff)

    # -- representation ------------------------------------------------

    @property
    def mat(self):
        return self._mat

    def dense(self) -> np.ndarray:
        """Action matrix as a dense array (cached; built by application
        to basis vectors for implicit operators)."""
        if self._dense is None:
            if self._mat is not None:
                self._dense = (
                    self._mat.toarray() if sp.issparse(self._mat)
                    else np.array(self._mat, dtype=float)
                )
            else:
                n = self.space.dim
                cols = np.empty((n, n))
                eye = np.eye(n)
                for j in range(n):
                    cols[:, j] = self.apply(eye[:, j])
                self._dense = cols
        return self._dense

    def form_dense(self) -> np.ndarray:
        """Weighted form W M (symmetric) as a dense array."""
        return self.space.quad_weights[:, None] * self.dense()

    # -- action ---------------------------------------------------------

    def apply(self, v) -> np.ndarray:
        v = _check_vector(self.space, v)
        if self._mat is not None:
            return self._mat @ v
        return np.asarray(self._apply_fn(v), dtype=float)

    def solve(self, rhs) -> np.ndarray:
        rhs = _check_vector(self.space, rhs)
        if self._solve_fn is not None:
            return np.asarray(self._solve_fn(rhs), dtype=float)
        if self._mat is None:
            raise ValueError(f"operator {self.label!r} has no solve path")
        w = self.space.quad_weights
        if self._factor is None:
            if sp.issparse(self._mat):
                form = (sp.diags(w) @ self._mat).tocsc()
                lu = spla.splu(form)
                self._factor = lu.solve
            else:
                form = w[:, None] * self._mat
                c, low = scipy.linalg.cho_factor(form)
                self._factor = lambda b, c=c, low=low: scipy.linalg.cho_solve((c, low), b)
        return self._factor(w * rhs)

    # -- construction checks ---------------------------------------------

    def _check_spd(self, dense_cutoff: int):
        w = self.space.quad_weights
        if self._mat is not None:
            if sp.issparse(self._mat):
                diff = sp.diags(w) @ self._mat - (sp.diags(w) @ self._mat).T
                asym = 0.0 if diff.nnz == 0 else float(np.abs(diff.data).max())
            else:
                form = w[:, None] * self._mat
                asym = float(np.abs(form - form.T).max())
            if asym != 0.0:
                raise ValueError(
                    f"operator {self.label!r} is not symmetric in the weighted "
                    f"inner product (max asymmetry {asym:g})"
                )
        n = self.space.dim
        if self._mat is not None and n <= dense_cutoff:
            evals = scipy.linalg.eigvalsh(self.form_dense())
            if evals[0] <= 0:
                raise ValueError(
                    f"operator {self.label!r} is not positive definite "
                    f"(smallest eigenvalue {evals[0]:g})"
                )
        else:
            rng = np.random.default_rng(0)
            for _ in range(32):
                v = rng.standard_normal(n)
                if quad_form(self, v) <= 0:
                    raise ValueError(
                        f"operator {self.label!r} failed a positive "
                        "definiteness sample"
                    )


def op_apply(op: SpdOperator, v) -> np.ndarray:
    """Apply the operator: returns M v."""
    return op.apply(v)


def op_solve(op: SpdOperator, rhs) -> np.ndarray:
    """Solve M v = rhs by direct factorization (cached on the operator)."""
    return op.solve(rhs)


def quad_form(op: SpdOperator, v) -> float:
    """Quadratic form (M v, v) in the weighted inner product."""
    return inner(op.space, op.apply(v), v)


def identity_operator(space: DiscreteSpace) -> SpdOperator:
    return SpdOperator(space, mat=sp.identity(space.dim, format="csr"),
                       label="I", check=False)


def _laplacian_1d(n: int, h: float, flux_left: bool, flux_right: bool) -> sp.csr_matrix:
    main = np.full(n, 2.0)
    off = np.full(n - 1, -1.0)
    M = sp.diags([off, main, off], [-1, 0, 1], format="lil")
    # ghost-point elimination at flux endpoints: row becomes (2 u_i - 2 u_j)/h^2,
    # weighted-symmetric against the trapezoid half-weight
    if flux_left:
        M[0, 1] = -2.0
    if flux_right:
        M[n - 1, n - 2] = -2.0
    return (M.tocsr() / h**2)


def laplacian_matrix(space: DiscreteSpace) -> sp.csr_matrix:
    """Action matrix of -lap on the grid (raw, without any zero-order shift).

    On Dirichlet interior grids this is the textbook stencil and is SPD; on
    flux grids the ghost-eliminated endpoints make it only positive
    semi-definite (constants are in the kernel when no endpoint is pinned),
    so callers add a zero-order term before wrapping it in an SpdOperator.
    """
    if space.kind == "interval_1d":
        n = space.dim
        h = space.spacing[0]
        flux = set(space.boundary_nodes)
        return _laplacian_1d(n, h, flux_left=0 in flux, flux_right=(n - 1) in flux)
    if space.kind == "rectangle_2d":
        nx, ny = space.shape
        hx, hy = space.spacing
        Lx = _laplacian_1d(nx, hx, False, False)
        Ly = _laplacian_1d(ny, hy, False, False)
        return (sp.kron(Lx, sp.identity(ny)) + sp.kron(sp.identity(nx), Ly)).tocsr()
    raise ValueError(f"unsupported space kind {space.kind!r}")


def build_laplacian(space: DiscreteSpace) -> SpdOperator:
    """-lap with homogeneous Dirichlet conditions (second-order stencil)."""
    if space.boundary_nodes:
        raise ValueError("build_laplacian expects a Dirichlet grid; "
                         "flux grids need a zero-order shift to stay SPD")
    return SpdOperator(space, mat=laplacian_matrix(space), label="-lap")


def build_bilaplacian(space: DiscreteSpace) -> SpdOperator:
    """lap^2 under u = lap u = 0, as the exact matrix square of -lap."""
    if space.boundary_nodes:
        raise ValueError("build_bilaplacian expects a Dirichlet grid")
    L = laplacian_matrix(space)
    return SpdOperator(space, mat=(L @ L).tocsr(), label="bilap")


def directional_laplacian(space: DiscreteSpace, axis: int) -> SpdOperator:
    """-d^2/dx_axis^2 on a Dirichlet grid (the full -lap in 1D)."""
    if space.boundary_nodes:
        raise ValueError("directional_laplacian expects a Dirichlet grid")
    if space.kind == "interval_1d":
        if axis != 0:
            raise ValueError("1D spaces only have axis 0")
        return SpdOperator(space, mat=laplacian_matrix(space), label="-d2/dx2")
    nx, ny = space.shape
    hx, hy = space.spacing
    if axis == 0:
        M = sp.kron(_laplacian_1d(nx, hx, False, False), sp.identity(ny))
    elif axis == 1:
        M = sp.kron(sp.identity(nx), _laplacian_1d(ny, hy, False, False))
    else:
        raise ValueError("axis must be 0 or 1")
    return SpdOperator(space, mat=M.tocsr(), label=f"-d2/dx{axis + 1}2")


@dataclass(frozen=True)
class GeneralizedEigResult:
    """Smallest generalized eigenvalue of (A, P) with its eigenvector."""

    a0: float
    eigvec: np.ndarray
    residual: float


def min_generalized_eig(A: SpdOperator, P: SpdOperator,
                        dense_cutoff: int = 512,
                        tol: float = 1e-8,
                        max_iter: int = 5000) -> GeneralizedEigResult:
    """Coercivity constant a0 = min over v of (A v, v)/(P v, v).

    Direct symmetric generalized eigensolve of the weighted forms up to
    ``dense_cutoff`` nodes; inverse power iteration (normalized in the
    P-inner product) above.  Raises RuntimeError with the achieved residual
    when the iteration fails to converge.
    """
    if A.space is not P.space:
        raise ValueError("operators live on different spaces")
    space = A.space
    n = space.dim
    if n <= dense_cutoff:
        vals, vecs = scipy.linalg.eigh(A.form_dense(), P.form_dense(),
                                       subset_by_index=[0, 0])
        a0 = float(vals[0])
        v = vecs[:, 0]
    else:
        rng = np.random.default_rng(1)
        v = rng.standard_normal(n)
        v /= np.sqrt(quad_form(P, v))
        a0 = quad_form(A, v)
        for _ in range(max_iter):
            v = A.solve(P.apply(v))
            v /= np.sqrt(quad_form(P, v))
            a0 = quad_form(A, v)
            res = norm_w(space, A.apply(v) - a0 * P.apply(v)) / norm_w(space, v)
            if res <= tol:
                break
        else:
            raise RuntimeError(
                f"inverse power iteration did not converge in {max_iter} "
                f"iterations (residual {res:g}, tolerance {tol:g})"
            )
    v = v / norm_w(space, v)
    residual = norm_w(space, A.apply(v) - a0 * P.apply(v))
    if residual > tol * max(1.0, abs(a0)):
        raise RuntimeError(
            f"generalized eigensolve residual {residual:g} exceeds tolerance"
        )
    if a0 <= 0:
        raise ValueError("pencil is not positive definite: a0 <= 0")
    return GeneralizedEigResult(a0=a0, eigvec=v, residual=float(residual))


def max_generalized_eig(A: SpdOperator, P: SpdOperator,
                        dense_cutoff: int = 512,
                        tol: float = 1e-6,
                        max_iter: int = 5000) -> float:
    """Largest generalized eigenvalue of (A, P); sets the stable step size."""
    if A.space is not P.space:
        raise ValueError("operators live on different spaces")
    space = A.space
    n = space.dim
    if n <= dense_cutoff:
        vals = scipy.linalg.eigh(A.form_dense(), P.form_dense(),
                                 subset_by_index=[n - 1, n - 1],
                                 eigvals_only=True)
        return float(vals[0])
    rng = np.random.default_rng(2)
    v = rng.standard_normal(n)
    v /= np.sqrt(quad_form(P, v))
    lam = quad_form(A, v)
    for _ in range(max_iter):
        v = P.solve(A.apply(v))
        v /= np.sqrt(quad_form(P, v))
        lam_new = quad_form(A, v)
        if abs(lam_new - lam) <= tol * max(1.0, abs(lam_new)):
            return float(lam_new)
        lam = lam_new
    raise RuntimeError(f"power iteration for the largest eigenvalue did not "
                       f"converge in {max_iter} iterations")
