import numpy as np
import pytest
import scipy.linalg

from blowlab.algebra import (
    DiscreteSpace,
    SpdOperator,
    build_bilaplacian,
    build_laplacian,
    directional_laplacian,
    identity_operator,
    inner,
    interval_dirichlet,
    interval_flux,
    max_generalized_eig,
    min_generalized_eig,
    op_apply,
    op_solve,
    quad_form,
    rectangle_dirichlet,
)


def unit_weight_space(n):
    return DiscreteSpace(kind="interval_1d", lengths=(float(n + 1),),
                         spacing=(1.0,), coords=np.arange(1.0, n + 1),
                         quad_weights=np.ones(n), measure=float(n),
                         shape=(n,))


def dirichlet_eig(k, n, L):
    """Exact eigenvalue of the 1D Dirichlet difference laplacian."""
    h = L / (n + 1)
    return (4 / h**2) * np.sin(k * np.pi * h / (2 * L))**2


class TestDiscreteSpace:
    def test_weights_sum_to_measure(self):
        s = interval_dirichlet(3.0, 17)
        assert s.quad_weights.sum() == pytest.approx(s.measure, rel=1e-13)
        assert s.spacing[0] == pytest.approx(3.0 / 18)

    def test_flux_grid_trapezoid(self):
        s = interval_flux(2.0, 21)
        assert s.quad_weights.sum() == pytest.approx(2.0, rel=1e-13)
        assert s.boundary_nodes == (0, 20)
        s2 = interval_flux(2.0, 21, left_dirichlet=True)
        assert s2.boundary_nodes == (20,)

    def test_positive_weights_enforced(self):
        with pytest.raises(ValueError):
            DiscreteSpace(kind="interval_1d", lengths=(1.0,), spacing=(1.0,),
                          coords=np.array([0.5]), quad_weights=np.array([-1.0]),
                          measure=-1.0)


class TestInner:
    def test_unit_weight_projection(self):
        s = unit_weight_space(3)
        assert inner(s, [1, 2, 3], [1, 0, 0]) == 1.0

    def test_definiteness(self):
        s = unit_weight_space(4)
        assert inner(s, np.zeros(4), np.zeros(4)) == 0.0
        rng = np.random.default_rng(0)
        for _ in range(20):
            x = rng.standard_normal(4)
            assert inner(s, x, x) > 0 or not x.any()

    def test_sin_squared_integral(self):
        s = interval_dirichlet(np.pi, 199)
        x = np.sin(s.coords)
        assert inner(s, x, x) == pytest.approx(np.pi / 2, abs=1e-3)

    def test_bilinear_symmetric(self):
        s = interval_dirichlet(1.0, 9)
        rng = np.random.default_rng(1)
        x, y, z = rng.standard_normal((3, 9))
        assert inner(s, x, y) == pytest.approx(inner(s, y, x), rel=1e-14)
        assert inner(s, 2.0 * x + z, y) == pytest.approx(
            2 * inner(s, x, y) + inner(s, z, y), rel=1e-12)

    def test_dimension_mismatch(self):
        s = unit_weight_space(3)
        with pytest.raises(ValueError):
            inner(s, [1, 2], [1, 2, 3])


class TestOperators:
    def test_identity_apply(self):
        s = interval_dirichlet(1.0, 8)
        eye = identity_operator(s)
        v = np.arange(8.0)
        assert np.array_equal(op_apply(eye, v), v)

    def test_laplacian_eigvector(self):
        L, n = np.pi, 99
        s = interval_dirichlet(L, n)
        lap = build_laplacian(s)
        k = 3
        v = np.sin(k * np.pi * s.coords / L)
        lam = dirichlet_eig(k, n, L)
        assert np.allclose(op_apply(lap, v), lam * v, atol=1e-10 * lam)

    def test_apply_linearity(self):
        s = interval_dirichlet(1.0, 20)
        lap = build_laplacian(s)
        rng = np.random.default_rng(2)
        x, y = rng.standard_normal((2, 20))
        lhs = op_apply(lap, 0.7 * x + 1.3 * y)
        rhs = 0.7 * op_apply(lap, x) + 1.3 * op_apply(lap, y)
        assert np.allclose(lhs, rhs, rtol=1e-13)

    def test_solve_identity(self):
        s = interval_dirichlet(1.0, 6)
        eye = identity_operator(s)
        rhs = np.arange(6.0)
        assert np.allclose(op_solve(eye, rhs), rhs, rtol=1e-14)

    def test_solve_roundtrip(self):
        s = interval_dirichlet(2.0, 40)
        lap = build_laplacian(s)
        rng = np.random.default_rng(3)
        v = rng.standard_normal(40)
        assert np.allclose(op_solve(lap, op_apply(lap, v)), v, rtol=1e-9)

    def test_solve_manufactured(self):
        # -u'' = pi^2 sin(pi x) on (0,1) has solution sin(pi x)
        L, n = 1.0, 199
        s = interval_dirichlet(L, n)
        lap = build_laplacian(s)
        rhs = np.pi**2 * np.sin(np.pi * s.coords)
        u = op_solve(lap, rhs)
        h = s.spacing[0]
        assert np.max(np.abs(u - np.sin(np.pi * s.coords))) < 2 * h**2

    def test_quad_form_identity(self):
        s = interval_dirichlet(1.0, 12)
        eye = identity_operator(s)
        rng = np.random.default_rng(4)
        v = rng.standard_normal(12)
        assert quad_form(eye, v) == pytest.approx(inner(s, v, v), rel=1e-14)

    def test_quad_form_positive(self):
        s = interval_dirichlet(1.0, 12)
        lap = build_laplacian(s)
        rng = np.random.default_rng(5)
        for _ in range(10):
            v = rng.standard_normal(12)
            assert quad_form(lap, v) > 0

    def test_quad_form_rayleigh_of_eigvector(self):
        L, n = np.pi, 49
        s = interval_dirichlet(L, n)
        lap = build_laplacian(s)
        eye = identity_operator(s)
        v = np.sin(np.pi * s.coords / L)
        ratio = quad_form(lap, v) / quad_form(eye, v)
        assert ratio == pytest.approx(dirichlet_eig(1, n, L), rel=1e-12)

    def test_asymmetric_matrix_rejected(self):
        s = interval_dirichlet(1.0, 3)
        M = np.array([[2.0, 1.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 2.0]])
        with pytest.raises(ValueError, match="symmetric"):
            SpdOperator(s, mat=M)

    def test_indefinite_rejected(self):
        s = interval_dirichlet(1.0, 3)
        M = np.diag([1.0, -1.0, 1.0])
        with pytest.raises(ValueError, match="positive definite"):
            SpdOperator(s, mat=M)


class TestStencils:
    def test_textbook_tridiagonal(self):
        # n=3 on (0,4): h = 1, rows are [-1, 2, -1]/h^2
        s = interval_dirichlet(4.0, 3)
        assert s.spacing[0] == 1.0
        M = build_laplacian(s).dense()
        expected = np.array([[2.0, -1.0, 0.0],
                             [-1.0, 2.0, -1.0],
                             [0.0, -1.0, 2.0]])
        assert np.array_equal(M, expected)

    def test_bilaplacian_is_square(self):
        s = interval_dirichlet(1.0, 24)
        lap = build_laplacian(s).dense()
        bilap = build_bilaplacian(s).dense()
        assert np.allclose(bilap, lap @ lap, rtol=1e-14)
        evals_l = np.linalg.eigvalsh(lap)
        evals_b = np.linalg.eigvalsh(bilap)
        assert np.allclose(np.sort(evals_l**2), np.sort(evals_b), rtol=1e-9)

    def test_2d_kronecker_against_dense_assembly(self):
        s = rectangle_dirichlet(1.0, 2.0, 8, 8)
        M = build_laplacian(s).dense()
        hx, hy = s.spacing
        nx, ny = s.shape
        dense = np.zeros((64, 64))
        for ix in range(nx):
            for iy in range(ny):
                row = ix * ny + iy
                dense[row, row] = 2 / hx**2 + 2 / hy**2
                if ix > 0:
                    dense[row, (ix - 1) * ny + iy] = -1 / hx**2
                if ix < nx - 1:
                    dense[row, (ix + 1) * ny + iy] = -1 / hx**2
                if iy > 0:
                    dense[row, ix * ny + iy - 1] = -1 / hy**2
                if iy < ny - 1:
                    dense[row, ix * ny + iy + 1] = -1 / hy**2
        assert np.allclose(M, dense, rtol=1e-14)

    def test_directional_parts_sum_to_laplacian(self):
        s = rectangle_dirichlet(1.0, 1.5, 6, 5)
        full = build_laplacian(s).dense()
        parts = directional_laplacian(s, 0).dense() + directional_laplacian(s, 1).dense()
        assert np.allclose(full, parts, rtol=1e-14)

    def test_flux_laplacian_rejected(self):
        s = interval_flux(1.0, 11)
        with pytest.raises(ValueError):
            build_laplacian(s)


class TestGeneralizedEig:
    def test_equal_operators_give_one(self):
        s = interval_dirichlet(1.0, 30)
        lap = build_laplacian(s)
        res = min_generalized_eig(lap, lap)
        assert res.a0 == pytest.approx(1.0, rel=1e-12)

    def test_dirichlet_spectrum(self):
        L, n = np.pi, 199
        s = interval_dirichlet(L, n)
        lap = build_laplacian(s)
        eye = identity_operator(s)
        res = min_generalized_eig(lap, eye)
        assert res.a0 == pytest.approx(dirichlet_eig(1, n, L), rel=1e-10)
        assert res.a0 == pytest.approx(1.0, abs=1e-3)
        assert res.residual <= 1e-8

    def test_boussinesq_pencil_against_dense_oracle(self):
        # A = I - nu*lap, P = (-lap)^{-1} + a I with dense matrices
        n, nu, a = 64, 0.7, 0.3
        s = interval_dirichlet(np.pi, n)
        lap = build_laplacian(s)
        A = SpdOperator(s, mat=np.eye(n) + nu * lap.dense(), label="A")
        P_dense = np.linalg.inv(lap.dense()) + a * np.eye(n)
        P_dense = 0.5 * (P_dense + P_dense.T)
        P = SpdOperator(s, mat=P_dense, label="P")
        res = min_generalized_eig(A, P)
        W = np.diag(s.quad_weights)
        vals = scipy.linalg.eigh(W @ A.dense(), W @ P_dense, eigvals_only=True)
        assert res.a0 == pytest.approx(vals[0], rel=1e-8)

    def test_inverse_power_path_matches_dense(self):
        s = interval_dirichlet(np.pi, 80)
        lap = build_laplacian(s)
        eye = identity_operator(s)
        dense = min_generalized_eig(lap, eye)
        iterative = min_generalized_eig(lap, eye, dense_cutoff=0)
        assert iterative.a0 == pytest.approx(dense.a0, rel=1e-7)
        assert iterative.residual <= 1e-8

    def test_coercivity_property(self):
        s = interval_dirichlet(np.pi, 40)
        lap = build_laplacian(s)
        eye = identity_operator(s)
        a0 = min_generalized_eig(lap, eye).a0
        rng = np.random.default_rng(7)
        for _ in range(1000):
            v = rng.standard_normal(40)
            slack = quad_form(lap, v) - a0 * quad_form(eye, v)
            assert slack >= -1e-8 * float(v @ v)

    def test_max_eig_matches_dense(self):
        s = interval_dirichlet(np.pi, 60)
        lap = build_laplacian(s)
        eye = identity_operator(s)
        lam = max_generalized_eig(lap, eye)
        assert lam == pytest.approx(dirichlet_eig(60, 60, np.pi), rel=1e-10)
