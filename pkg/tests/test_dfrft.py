import numpy as np
import pytest

from jfrff.dfrft import build_dfrft_operator


def unitary_dft(d):
    m, n = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    return np.exp(-2j * np.pi * m * n / d) / np.sqrt(d)


class TestConstruction:
    def test_dimension_one(self):
        op = build_dfrft_operator(1)
        for beta in (0.0, 0.5, 1.0, 3.7):
            assert np.allclose(op.matrix(beta), [[1.0]], atol=1e-12)
        assert np.allclose(op.derivative(0.5), [[0.0]], atol=1e-12)

    def test_hermite_basis_orthonormal(self):
        for d in (4, 7, 16):
            v = build_dfrft_operator(d).hermite_basis
            assert np.allclose(v.T @ v, np.eye(d), atol=1e-10)

    @pytest.mark.parametrize("d", [2, 3, 4, 5, 8, 9, 16])
    def test_index_rule(self, d):
        # indices drawn from {0..D} skipping D-1 (even D) or D (odd D)
        idx = sorted(build_dfrft_operator(d).hermite_indices.tolist())
        if d % 2 == 0:
            assert idx == list(range(d - 1)) + [d]
        else:
            assert idx == list(range(d))

    @pytest.mark.parametrize("d", [2, 3, 4, 6, 8, 11, 16])
    def test_order_one_is_dft(self, d):
        op = build_dfrft_operator(d)
        assert np.linalg.norm(op.matrix(1.0) - unitary_dft(d)) <= 1e-6

    def test_d4_against_direct_dft_entries(self):
        f1 = build_dfrft_operator(4).matrix(1.0)
        assert np.allclose(f1, unitary_dft(4), atol=1e-6)

    def test_d8_eigenvalues_are_fourth_roots(self):
        w = np.linalg.eigvals(build_dfrft_operator(8).matrix(1.0))
        roots = np.array([1.0, -1j, -1.0, 1j])
        dist = np.min(np.abs(w[:, None] - roots[None, :]), axis=1)
        assert np.max(dist) <= 1e-6

    def test_generator_skew_hermitian(self):
        t = build_dfrft_operator(6).generator()
        assert np.linalg.norm(t + t.conj().T) <= 1e-10


class TestFractionalMatrix:
    def test_order_zero_identity(self):
        op = build_dfrft_operator(5)
        assert np.allclose(op.matrix(0.0), np.eye(5), atol=1e-10)

    def test_period_four(self):
        op = build_dfrft_operator(6)
        assert np.allclose(op.matrix(4.0), np.eye(6), atol=1e-8)
        assert np.allclose(op.matrix(2.3), op.matrix(6.3), atol=1e-8)

    def test_additivity(self):
        op = build_dfrft_operator(4)
        assert np.allclose(op.matrix(2.0), op.matrix(1.0) @ op.matrix(1.0), atol=1e-8)

    def test_additivity_random_pairs(self, rng):
        op = build_dfrft_operator(7)
        for _ in range(20):
            a, b = rng.uniform(-2.0, 2.0, size=2)
            assert np.linalg.norm(op.matrix(a) @ op.matrix(b) - op.matrix(a + b)) <= 1e-7

    def test_unitarity(self, rng):
        op = build_dfrft_operator(8)
        for beta in rng.uniform(-2.0, 2.0, size=5):
            f = op.matrix(beta)
            assert np.allclose(f @ f.conj().T, np.eye(8), atol=1e-8)

    def test_inverse_is_conjugate_transpose(self):
        op = build_dfrft_operator(6)
        f = op.matrix(0.9)
        assert np.allclose(op.matrix(-0.9), f.conj().T, atol=1e-8)


class TestFractionalDerivative:
    def test_matches_finite_difference(self):
        op = build_dfrft_operator(6)
        eps = 1e-4
        beta = 0.5
        fd = (op.matrix(beta + eps) - op.matrix(beta - eps)) / (2 * eps)
        assert np.max(np.abs(op.derivative(beta) - fd)) <= 1e-6

    def test_derivative_times_inverse_is_generator(self):
        op = build_dfrft_operator(5)
        t = op.generator()
        for beta in (0.0, 0.7, 1.4):
            assert np.linalg.norm(op.derivative(beta) @ op.matrix(-beta) - t) <= 1e-8
