import numpy as np
import pytest

from jfrff.dfrft import build_dfrft_operator
from jfrff.errors import CapacityError
from jfrff.gfrft import build_gfrft_operator
from jfrff.jfrft import (
    JointOperator,
    derivative_action,
    explicit_matrix,
    forward,
    inverse,
    operation_counter,
    two_sided_apply,
)
from jfrff.spectral import eigendecompose

from conftest import random_symmetric


def vec(x):
    # column-major stacking
    return x.reshape(-1, order="F")


@pytest.fixture
def jop34(rng):
    graph_op = build_gfrft_operator(eigendecompose(random_symmetric(rng, 3)))
    return JointOperator(graph_op=graph_op, time_op=build_dfrft_operator(4))


class TestForwardInverse:
    def test_zero_orders_identity(self, jop34, rng):
        x = rng.normal(size=(3, 4))
        assert np.allclose(forward(jop34, x, 0.0, 0.0), x, atol=1e-10)
        assert np.allclose(inverse(jop34, x, 0.0, 0.0), x, atol=1e-10)

    def test_scalar_case(self, rng):
        graph_op = build_gfrft_operator(eigendecompose(np.ones((1, 1))))
        jop = JointOperator(graph_op=graph_op, time_op=build_dfrft_operator(1))
        x = np.array([[2.5]])
        out = forward(jop, x, 0.7, 1.3)
        expect = graph_op.matrix(0.7)[0, 0] * jop.time_op.matrix(1.3)[0, 0] * 2.5
        assert np.allclose(out, [[expect]], atol=1e-12)

    def test_forward_matches_kronecker(self, jop34, rng):
        x = rng.normal(size=(3, 4)) + 1j * rng.normal(size=(3, 4))
        out = forward(jop34, x, 0.3, 0.8)
        big = explicit_matrix(jop34, 0.3, 0.8)
        assert np.max(np.abs(vec(out) - big @ vec(x))) <= 1e-10

    def test_inverse_matches_kronecker(self, jop34, rng):
        x = rng.normal(size=(3, 4))
        out = inverse(jop34, x, 0.5, 0.9)
        big = explicit_matrix(jop34, -0.5, -0.9)
        assert np.max(np.abs(vec(out) - big @ vec(x))) <= 1e-10

    def test_roundtrip(self, jop34, rng):
        x = rng.normal(size=(3, 4))
        assert np.allclose(inverse(jop34, forward(jop34, x, 0.5, 0.5), 0.5, 0.5), x, atol=1e-8)

    def test_order_additivity(self, jop34, rng):
        x = rng.normal(size=(3, 4))
        twice = forward(jop34, forward(jop34, x, 0.2, 0.6), 0.5, 0.3)
        once = forward(jop34, x, 0.7, 0.9)
        assert np.linalg.norm(twice - once) <= 1e-7

    def test_energy_preserved_unitary(self, jop34, rng):
        x = rng.normal(size=(3, 4))
        assert np.linalg.norm(forward(jop34, x, 0.77, 1.21)) == pytest.approx(
            np.linalg.norm(x), abs=1e-8
        )

    def test_batched_leading_axis(self, jop34, rng):
        xs = rng.normal(size=(5, 3, 4))
        out = forward(jop34, xs, 0.4, 0.2)
        for i in range(5):
            assert np.allclose(out[i], forward(jop34, xs[i], 0.4, 0.2), atol=1e-12)

    def test_shape_mismatch(self, jop34, rng):
        with pytest.raises(ValueError):
            forward(jop34, rng.normal(size=(4, 3)), 0.1, 0.1)


class TestDerivativeAction:
    def test_identity_shift_alpha_derivative_zero(self, rng):
        graph_op = build_gfrft_operator(eigendecompose(np.eye(3)))
        jop = JointOperator(graph_op=graph_op, time_op=build_dfrft_operator(4))
        x = rng.normal(size=(3, 4))
        assert np.allclose(derivative_action(jop, x, 0.5, 0.5, "alpha"), 0.0, atol=1e-10)

    def test_matches_finite_difference(self, jop34, rng):
        x = rng.normal(size=(3, 4))
        eps = 1e-4
        for which in ("alpha", "beta"):
            a, b = 0.6, 0.9
            da = eps if which == "alpha" else 0.0
            db = eps if which == "beta" else 0.0
            fd = (forward(jop34, x, a + da, b + db) - forward(jop34, x, a - da, b - db)) / (2 * eps)
            got = derivative_action(jop34, x, a, b, which)
            assert np.max(np.abs(got - fd)) <= 1e-6

    def test_matches_kronecker(self, jop34, rng):
        x = rng.normal(size=(3, 4))
        got = derivative_action(jop34, x, 0.3, 0.8, "alpha")
        big = np.kron(jop34.time_op.matrix(0.8), jop34.graph_op.derivative(0.3))
        assert np.max(np.abs(vec(got) - big @ vec(x))) <= 1e-10

    def test_unknown_which(self, jop34, rng):
        with pytest.raises(ValueError):
            derivative_action(jop34, rng.normal(size=(3, 4)), 0.1, 0.1, "gamma")


class TestExplicitMatrix:
    def test_kron_of_independent_factors(self, jop34):
        big = explicit_matrix(jop34, 1.0, 1.0)
        expect = np.kron(jop34.time_op.matrix(1.0), jop34.graph_op.matrix(1.0))
        assert np.array_equal(big, expect)

    def test_unitary_product(self, jop34):
        big = explicit_matrix(jop34, 0.4, 1.7)
        assert np.allclose(big @ big.conj().T, np.eye(12), atol=1e-8)

    def test_capacity_guard(self, rng):
        graph_op = build_gfrft_operator(eigendecompose(random_symmetric(rng, 65)))
        jop = JointOperator(graph_op=graph_op, time_op=build_dfrft_operator(64))
        with pytest.raises(CapacityError):
            explicit_matrix(jop, 0.5, 0.5)  # 65*64 = 4160 > 4096


class TestOperationCounter:
    def test_two_sided_cost_model(self, rng):
        # one N x D application costs N^2 D + N D^2 scalar mults
        left = rng.normal(size=(3, 3))
        right_t = rng.normal(size=(4, 4))
        x = rng.normal(size=(3, 4))
        operation_counter.reset()
        two_sided_apply(left, x, right_t)
        assert operation_counter.total == 3 * 3 * 4 + 3 * 4 * 4

    def test_batch_scales_count(self, rng):
        left = rng.normal(size=(3, 3))
        right_t = rng.normal(size=(4, 4))
        xs = rng.normal(size=(7, 3, 4))
        operation_counter.reset()
        two_sided_apply(left, xs, right_t)
        assert operation_counter.total == 7 * (3 * 3 * 4 + 3 * 4 * 4)
