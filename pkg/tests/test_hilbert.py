import numpy as np
import pytest

from oplearn.hilbert import (
    apply_spectral_fn,
    eig_sym,
    empirical_cov,
    hs_inner,
    outer,
    pseudoinverse,
    schatten_norm,
)


class TestOuter:
    def test_unit_basis(self):
        assert np.array_equal(outer([1.0, 0.0], [0.0, 1.0]), [[0.0, 1.0], [0.0, 0.0]])

    def test_zero_vector(self):
        assert np.array_equal(outer([0.0, 0.0], [1.0, 2.0]), np.zeros((2, 2)))

    def test_hs_norm_of_outer(self):
        # oracle: direct Frobenius sum over the 2x2 entries
        m = outer([1.0, 2.0], [3.0, 4.0])
        frob = np.sqrt(sum(m[i, j] ** 2 for i in range(2) for j in range(2)))
        assert frob == pytest.approx(5 * np.sqrt(5), rel=1e-14)
        assert schatten_norm(m, 2) == pytest.approx(frob, rel=1e-14)

    def test_apply_identity_random(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            x = rng.standard_normal(4)
            y = rng.standard_normal(3)
            v = rng.standard_normal(4)
            got = outer(y, x) @ v
            want = (x @ v) * y
            assert np.linalg.norm(got - want) <= 1e-12 * (1 + np.linalg.norm(want))

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            outer([np.nan, 1.0], [1.0, 2.0])


class TestHsInner:
    def test_identity(self):
        assert hs_inner(np.eye(2), np.eye(2)) == pytest.approx(2.0)

    def test_disjoint_supports(self):
        e11 = np.zeros((2, 2))
        e11[0, 0] = 1.0
        e22 = np.zeros((2, 2))
        e22[1, 1] = 1.0
        assert hs_inner(e11, e22) == 0.0

    def test_matches_elementwise_sum(self):
        rng = np.random.default_rng(1)
        a = rng.standard_normal((3, 2))
        b = rng.standard_normal((3, 2))
        oracle = sum(a[i, j] * b[i, j] for i in range(3) for j in range(2))
        assert hs_inner(a, b) == pytest.approx(oracle, rel=1e-13)
        assert hs_inner(a, b) == pytest.approx(np.trace(a.T @ b), rel=1e-13)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            hs_inner(np.eye(2), np.eye(3))


class TestSchattenNorm:
    def test_diagonal(self):
        a = np.diag([3.0, 4.0])
        assert schatten_norm(a, 1) == pytest.approx(7.0)
        assert schatten_norm(a, 2) == pytest.approx(5.0)
        assert schatten_norm(a, np.inf) == pytest.approx(4.0)

    def test_zero(self):
        z = np.zeros((3, 2))
        for p in (1, 2, np.inf):
            assert schatten_norm(z, p) == 0.0

    def test_rank_one_equals_norm_product(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal(5)
        y = rng.standard_normal(3)
        want = np.linalg.norm(x) * np.linalg.norm(y)
        for p in (1, 2, np.inf):
            assert schatten_norm(outer(y, x), p) == pytest.approx(want, rel=1e-12)

    def test_monotone_in_p(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            a = rng.standard_normal((rng.integers(1, 6), rng.integers(1, 6)))
            s1 = schatten_norm(a, 1)
            s2 = schatten_norm(a, 2)
            sinf = schatten_norm(a, np.inf)
            assert sinf <= s2 + 1e-12 <= s1 + 2e-12

    def test_unsupported_order(self):
        with pytest.raises(ValueError):
            schatten_norm(np.eye(2), 3)


class TestEmpiricalCov:
    def test_single_pair(self):
        got = empirical_cov(np.array([[1.0, 0.0]]), np.array([[0.0, 1.0]]))
        want = np.zeros((2, 2))
        want[1, 0] = 1.0
        assert np.array_equal(got, want)

    def test_antipodal_pairs(self):
        x = np.array([0.5, -1.5, 2.0])
        xs = np.vstack([x, -x])
        assert np.allclose(empirical_cov(xs), np.outer(x, x), atol=1e-15)

    def test_matches_loop_oracle(self):
        rng = np.random.default_rng(4)
        xs = rng.standard_normal((3, 4))
        ys = rng.standard_normal((3, 2))
        oracle = np.zeros((2, 4))
        for i in range(3):
            oracle += np.outer(ys[i], xs[i])
        oracle /= 3
        assert np.allclose(empirical_cov(xs, ys), oracle, atol=1e-15)

    def test_self_cov_psd(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            xs = rng.standard_normal((rng.integers(1, 20), rng.integers(1, 7)))
            c = empirical_cov(xs)
            assert np.linalg.eigvalsh((c + c.T) / 2).min() >= -1e-10

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            empirical_cov(np.zeros((0, 3)))


class TestEigSym:
    def test_diag(self):
        dec = eig_sym(np.diag([2.0, 1.0]))
        assert np.allclose(dec.eigenvalues, [2.0, 1.0])
        assert np.allclose(np.abs(dec.eigenvectors), np.eye(2))

    def test_identity(self):
        dec = eig_sym(np.eye(4))
        assert np.allclose(dec.eigenvalues, 1.0)

    def test_reconstruction_and_orthonormality(self):
        rng = np.random.default_rng(6)
        a = rng.standard_normal((5, 5))
        c = a + a.T
        dec = eig_sym(c)
        assert np.linalg.norm(dec.reconstruct() - c) <= 1e-10 * (1 + np.linalg.norm(c))
        v = dec.eigenvectors
        assert np.abs(v.T @ v - np.eye(5)).max() <= 1e-10
        assert np.all(np.diff(dec.eigenvalues) <= 1e-14)

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError, match="not symmetric"):
            eig_sym(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_rejects_nonsquare(self):
        with pytest.raises(ValueError):
            eig_sym(np.zeros((2, 3)))

    def test_symmetrizes_roundoff(self):
        c = np.array([[1.0, 0.5 + 1e-12], [0.5, 2.0]])
        dec = eig_sym(c)
        assert np.allclose(dec.reconstruct(), (c + c.T) / 2, atol=1e-12)


class TestApplySpectralFn:
    def test_identity_function(self):
        c = np.diag([2.0, 1.0])
        assert np.allclose(apply_spectral_fn(c, lambda lam: lam), c, atol=1e-10)

    def test_sqrt(self):
        got = apply_spectral_fn(np.diag([4.0, 9.0]), np.sqrt)
        assert np.allclose(got, np.diag([2.0, 3.0]), atol=1e-12)

    def test_shifted_inverse_matches_dense_solve(self):
        rng = np.random.default_rng(7)
        a = rng.standard_normal((6, 6))
        c = a @ a.T / 6
        got = apply_spectral_fn(c, lambda lam: 1.0 / (0.5 + lam))
        want = np.linalg.solve(c + 0.5 * np.eye(6), np.eye(6))
        assert np.abs(got - want).max() <= 1e-10

    def test_rejects_undefined_at_zero(self):
        c = np.diag([1.0, 0.0])
        with pytest.raises(ValueError, match="undefined"):
            apply_spectral_fn(c, lambda lam: 1.0 / lam)

    def test_rejects_non_psd(self):
        with pytest.raises(ValueError, match="not PSD"):
            apply_spectral_fn(np.diag([1.0, -0.5]), lambda lam: lam)

    def test_power_product_composition(self):
        rng = np.random.default_rng(8)
        for _ in range(5):
            a = rng.standard_normal((5, 5))
            c = a @ a.T / 5
            for p in (0.5, 1.0, 2.0):
                for q in (0.5, 1.0, 2.0):
                    prod = apply_spectral_fn(c, lambda lam: lam**p) @ apply_spectral_fn(c, lambda lam: lam**q)
                    direct = apply_spectral_fn(c, lambda lam: lam ** (p + q))
                    assert np.abs(prod - direct).max() <= 1e-9


class TestPseudoinverse:
    def test_diagonal_with_zero(self):
        got = pseudoinverse(np.diag([1.0, 0.5, 0.0]))
        assert np.allclose(got, np.diag([1.0, 2.0, 0.0]), atol=1e-12)

    def test_identity(self):
        assert np.allclose(pseudoinverse(np.eye(3)), np.eye(3), atol=1e-14)

    def test_penrose_identities_rank_deficient(self):
        rng = np.random.default_rng(9)
        a = rng.standard_normal((4, 2)) @ rng.standard_normal((2, 3))  # rank 2, 4x3
        p = pseudoinverse(a)
        assert np.abs(a @ p @ a - a).max() <= 1e-8
        assert np.abs(p @ a @ p - p).max() <= 1e-8
        assert np.abs((a @ p).T - a @ p).max() <= 1e-8
        assert np.abs((p @ a).T - p @ a).max() <= 1e-8

    def test_tol_must_be_positive(self):
        with pytest.raises(ValueError):
            pseudoinverse(np.eye(2), tol=0.0)
