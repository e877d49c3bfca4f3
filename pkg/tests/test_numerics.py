import numpy as np
import pytest

from pavesage.exceptions import NumericError, ShapeError
from pavesage.numerics import (
    concat_cols,
    grad_check,
    matmul,
    matmul_backward,
    mean_rows,
    mean_rows_backward,
    mse_loss,
    relu,
    relu_backward,
    segment_mean,
    split_cols,
)


def naive_matmul(a, b):
    out = np.zeros((a.shape[0], b.shape[1]))
    for i in range(a.shape[0]):
        for j in range(b.shape[1]):
            acc = 0.0
            for k in range(a.shape[1]):
                acc += a[i, k] * b[k, j]
            out[i, j] = acc
    return out


class TestMatmul:
    def test_identity(self):
        rng = np.random.default_rng(0)
        m = rng.normal(size=(4, 4))
        assert np.array_equal(matmul(np.eye(4), m), m)

    def test_one_by_one(self):
        assert matmul(np.array([[2.0]]), np.array([[3.0]]))[0, 0] == 6.0

    def test_matches_naive_triple_loop(self):
        rng = np.random.default_rng(1)
        a = rng.normal(size=(7, 5))
        b = rng.normal(size=(5, 3))
        got = matmul(a, b)
        want = naive_matmul(a, b)
        assert np.all(np.abs(got - want) <= 1e-12 * np.maximum(np.abs(want), 1.0))

    def test_shape_mismatch_names_both_shapes(self):
        with pytest.raises(ShapeError, match=r"\(2, 3\).*\(2, 3\)"):
            matmul(np.zeros((2, 3)), np.zeros((2, 3)))

    def test_algebraic_identities(self):
        rng = np.random.default_rng(2)
        a = rng.normal(size=(8, 8))
        b = rng.normal(size=(8, 8))
        c = rng.normal(size=(8, 8))
        eye = np.eye(8)
        tol = 1e-12
        assert np.allclose(matmul(matmul(a, eye), b), matmul(a, b), rtol=tol, atol=tol)
        assert np.allclose(
            matmul(a, b + c), matmul(a, b) + matmul(a, c), rtol=tol, atol=tol
        )
        assert np.allclose(matmul(a, b).T, matmul(b.T, a.T), rtol=tol, atol=tol)


class TestRelu:
    def test_all_negative_is_zero(self):
        x = -np.abs(np.random.default_rng(3).normal(size=(3, 4))) - 0.1
        assert np.array_equal(relu(x), np.zeros_like(x))

    def test_zero_input_and_subgradient(self):
        x = np.zeros((2, 2))
        assert np.array_equal(relu(x), np.zeros_like(x))
        up = np.ones_like(x)
        assert np.array_equal(relu_backward(x, up), np.zeros_like(x))

    def test_backward_matches_finite_differences(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=(5, 4))
        x[np.abs(x) < 1e-3] += 0.01  # keep away from the kink
        t = rng.normal(size=(5, 4))

        def f(p):
            loss, g = mse_loss(relu(p), t)
            return loss, relu_backward(p, g)

        assert grad_check(f, x) <= 1e-6


class TestConcat:
    def test_empty_right_block(self):
        m = np.random.default_rng(5).normal(size=(3, 2))
        assert np.array_equal(concat_cols(m, np.zeros((3, 0))), m)

    def test_per_row_layout(self):
        got = concat_cols(np.array([[1.0, 2.0]]), np.array([[3.0]]))
        assert np.array_equal(got, np.array([[1.0, 2.0, 3.0]]))

    def test_round_trip_split(self):
        rng = np.random.default_rng(6)
        a = rng.normal(size=(4, 3))
        b = rng.normal(size=(4, 5))
        ra, rb = split_cols(concat_cols(a, b), a.shape[1])
        assert np.array_equal(ra, a) and np.array_equal(rb, b)

    def test_row_mismatch(self):
        with pytest.raises(ShapeError):
            concat_cols(np.zeros((2, 1)), np.zeros((3, 1)))


class TestMeanRows:
    def test_singleton_group(self):
        x = np.random.default_rng(7).normal(size=(4, 3))
        assert np.array_equal(mean_rows(x, [[2]]), x[2:3])

    def test_empty_group_is_zero_row(self):
        x = np.ones((3, 2))
        out = mean_rows(x, [[], [0, 1]])
        assert np.array_equal(out[0], np.zeros(2))
        assert np.array_equal(out[1], np.ones(2))

    def test_three_rows_match_direct_sum(self):
        rng = np.random.default_rng(8)
        x = rng.normal(size=(5, 4))
        got = mean_rows(x, [[1, 3, 4]])
        want = (x[1] + x[3] + x[4]) / 3.0
        assert np.all(np.abs(got[0] - want) <= 1e-12)

    def test_index_out_of_range(self):
        with pytest.raises(IndexError):
            mean_rows(np.zeros((2, 2)), [[0, 5]])

    def test_mean_of_identical_rows_is_exact(self):
        row = np.random.default_rng(9).normal(size=4)
        for k in (1, 2, 3, 7, 16, 64):
            x = np.tile(row, (k, 1))
            assert np.array_equal(mean_rows(x, [list(range(k))])[0], row)

    def test_backward_distributes_by_group_size(self):
        up = np.array([[3.0, 6.0]])
        grad = mean_rows_backward(4, [[0, 2, 3]], up)
        assert np.array_equal(grad[0], np.array([1.0, 2.0]))
        assert np.array_equal(grad[1], np.zeros(2))
        assert np.array_equal(grad[2], np.array([1.0, 2.0]))


class TestSegmentMean:
    def test_summation_order_is_canonical(self):
        rng = np.random.default_rng(10)
        vals = rng.normal(size=(6, 3))
        segs = np.array([0, 0, 0, 1, 1, 0])
        base = segment_mean(vals, segs, 2)
        perm = np.array([5, 2, 0, 4, 3, 1])
        again = segment_mean(vals[perm], segs[perm], 2)
        assert np.array_equal(base, again)


class TestMseLoss:
    def test_perfect_prediction(self):
        p = np.random.default_rng(11).normal(size=(3, 2))
        loss, grad = mse_loss(p, p.copy())
        assert loss == 0.0
        assert np.array_equal(grad, np.zeros_like(p))

    def test_hand_arithmetic(self):
        loss, grad = mse_loss(np.array([[0.0]]), np.array([[2.0]]))
        assert loss == 4.0
        assert grad[0, 0] == -4.0

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(12)
        p = rng.normal(size=(6, 1))
        t = rng.normal(size=(6, 1))

        def f(q):
            return mse_loss(q, t)

        assert grad_check(f, p) <= 1e-7

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            mse_loss(np.zeros((2, 1)), np.zeros((1, 2)))


class TestGradCheck:
    def test_sum_function(self):
        def f(x):
            return float(x.sum()), np.ones_like(x)

        point = np.random.default_rng(13).normal(size=(3, 3))
        assert grad_check(f, point) <= 1e-9

    def test_quadratic(self):
        def f(x):
            return mse_loss(x, np.zeros_like(x))

        point = np.random.default_rng(14).normal(size=(4, 2))
        assert grad_check(f, point) <= 1e-7

    def test_non_finite_value_raises(self):
        def f(x):
            return float("inf"), np.zeros_like(x)

        with pytest.raises(NumericError):
            grad_check(f, np.zeros((1, 1)))
