"""
Unit tests for the tape and the pointwise, reduction and structural operations.
"""

import numpy as np
import pytest

from src.domain.autodiff import Tensor, backward, current_tape, no_grad
from src.domain.autodiff import functional as F
from src.domain.autodiff.functional import ElementwiseFn
from src.domain.shared_kernel import NonScalarLossError, ShapeMismatchError
from src.tests.gradcheck import check_gradients


def weighted(out: Tensor, seed: int = 7) -> Tensor:
    """Scalar projection of `out` with fixed random weights."""
    weights = np.random.default_rng(seed).uniform(-1.0, 1.0, size=out.shape)
    return F.sum(F.mul(out, weights))


@pytest.mark.unit
class TestTape:
    """Recording, backward and gradient accumulation."""

    def test_shared_input_accumulates(self):
        """x·x differentiates to 2x."""
        x = Tensor([1.5, -2.0], requires_grad=True)

        backward(F.sum(F.mul(x, x)))

        np.testing.assert_allclose(x.grad, [3.0, -4.0])

    def test_backward_clears_tape(self):
        """A finished backward pass leaves nothing recorded."""
        x = Tensor([1.0, 2.0], requires_grad=True)
        loss = F.sum(F.exp(x))
        assert len(current_tape()) == 2

        backward(loss)

        assert len(current_tape()) == 0

    def test_non_scalar_loss_rejected(self):
        x = Tensor(np.ones(3), requires_grad=True)

        with pytest.raises(NonScalarLossError):
            backward(F.exp(x))

    def test_no_grad_records_nothing(self):
        x = Tensor([1.0], requires_grad=True)

        with no_grad():
            out = F.exp(x)

        assert len(current_tape()) == 0
        assert not out.requires_grad

    def test_recorded_inputs_become_read_only(self):
        """Values the backward pass depends on cannot be mutated in place."""
        x = Tensor([1.0, 2.0], requires_grad=True)
        F.mul(x, 3.0)

        with pytest.raises(ValueError):
            x.data[0] = 5.0

    def test_constructor_copies_input(self):
        source = np.array([1.0, 2.0])
        t = Tensor(source)

        source[0] = 9.0

        assert t.data[0] == 1.0

    def test_item_requires_single_element(self):
        with pytest.raises(ShapeMismatchError):
            Tensor([1.0, 2.0]).item()


@pytest.mark.unit
class TestElementwise:
    """Pointwise functions and their gradients."""

    @pytest.mark.parametrize("fn", ["relu", "softplus", "sigmoid", "exp", "neg"])
    def test_unary_gradients(self, fn):
        x = np.array([[-1.3, 0.4, 2.1], [0.7, -0.2, 1.1]])

        check_gradients(lambda t: weighted(F.elementwise(t, fn)), x)

    def test_binary_with_broadcasting(self):
        a = np.array([[0.5, -1.0, 2.0], [1.5, 0.3, -0.7]])
        b = np.array([0.2, -0.4, 1.3])

        check_gradients(lambda x, y: weighted(F.elementwise(x, ElementwiseFn.MUL, y)), a, b)
        check_gradients(lambda x, y: weighted(F.elementwise(x, "add", y)), a, b)

    def test_division(self):
        a = np.array([0.5, -1.0, 2.0])
        b = np.array([1.2, 0.8, -1.5])

        check_gradients(lambda x, y: weighted(F.div(x, y)), a, b)

    def test_binary_needs_second_operand(self):
        with pytest.raises(ShapeMismatchError):
            F.elementwise(Tensor([1.0]), "mul")

    def test_incompatible_broadcast_rejected(self):
        with pytest.raises(ShapeMismatchError):
            F.add(Tensor(np.ones(3)), Tensor(np.ones(4)))

    def test_softplus_is_stable_for_large_inputs(self):
        out = F.softplus(Tensor([800.0, -800.0]))

        assert np.all(np.isfinite(out.data))
        np.testing.assert_allclose(out.data, [800.0, 0.0], atol=1e-12)

    def test_matmul(self):
        a = np.random.default_rng(1).normal(size=(3, 4))
        b = np.random.default_rng(2).normal(size=(4, 2))

        check_gradients(lambda x, y: weighted(F.matmul(x, y)), a, b)


@pytest.mark.unit
class TestReductions:
    """Sums, means, running sums and variance."""

    def test_sum_and_mean_over_axes(self):
        x = np.random.default_rng(3).normal(size=(2, 3, 4))

        check_gradients(lambda t: weighted(F.sum(t, axis=1)), x)
        check_gradients(lambda t: weighted(F.mean(t, axis=(0, 2))), x)

    @pytest.mark.parametrize("exclusive", [False, True])
    def test_cumsum(self, exclusive):
        x = np.random.default_rng(4).normal(size=(3, 5))

        check_gradients(lambda t: weighted(F.cumsum(t, axis=1, exclusive=exclusive)), x)

    def test_exclusive_cumsum_starts_at_zero(self):
        out = F.cumsum(Tensor([[1.0, 2.0, 3.0]]), axis=1, exclusive=True)

        np.testing.assert_array_equal(out.data, [[0.0, 1.0, 3.0]])

    def test_variance_of_identical_slices_is_exactly_zero(self):
        """Agreeing views give zero cost, not rounding noise."""
        slice_ = np.random.default_rng(5).normal(size=(4, 6)) * 1e3 + 0.1
        stacked = Tensor(np.stack([slice_, slice_, slice_]))

        out = F.variance(stacked, axis=0)

        assert np.all(out.data == 0.0)

    def test_variance_matches_population_formula(self):
        x = np.random.default_rng(6).normal(size=(3, 5))

        out = F.variance(Tensor(x), axis=0)

        np.testing.assert_allclose(out.data, x.var(axis=0), atol=1e-12)

    def test_variance_gradient(self):
        x = np.random.default_rng(8).normal(size=(3, 4))

        check_gradients(lambda t: weighted(F.variance(t, axis=0)), x)


@pytest.mark.unit
class TestStructure:
    """Reshaping, joining, indexing and padding."""

    def test_concat_stack_transpose(self):
        a = np.random.default_rng(9).normal(size=(2, 3))
        b = np.random.default_rng(10).normal(size=(2, 3))

        check_gradients(lambda x, y: weighted(F.concat([x, y], axis=1)), a, b)
        check_gradients(lambda x, y: weighted(F.stack([x, y], axis=0)), a, b)
        check_gradients(lambda x: weighted(F.transpose(x, (1, 0))), a)

    def test_index_with_repeats_accumulates(self):
        x = Tensor([1.0, 2.0, 3.0], requires_grad=True)

        backward(F.sum(F.index(x, [0, 0, 2])))

        np.testing.assert_array_equal(x.grad, [2.0, 0.0, 1.0])

    def test_pad_edge_values(self):
        out = F.pad_edge(Tensor([[1.0, 2.0]]), [(0, 0), (1, 2)])

        np.testing.assert_array_equal(out.data, [[1.0, 1.0, 2.0, 2.0, 2.0]])

    def test_pad_edge_gradient(self):
        x = np.random.default_rng(11).normal(size=(2, 3, 1))

        check_gradients(lambda t: weighted(F.pad_edge(t, [(0, 0), (1, 2), (2, 1)])), x)

    def test_pad_edge_rejects_negative_widths(self):
        with pytest.raises(ShapeMismatchError):
            F.pad_edge(Tensor(np.ones((2, 2))), [(0, 0), (-1, 0)])

    def test_where(self):
        a = np.array([1.0, -2.0, 3.0])
        b = np.array([0.5, 0.5, 0.5])
        mask = np.array([True, False, True])

        check_gradients(lambda x, y: weighted(F.where(mask, x, y)), a, b)
