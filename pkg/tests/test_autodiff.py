"""Backward-pass contracts and finite-difference verification of every op."""

import numpy as np
import pytest

from chemssm.numerics import (
    NonFiniteGradientError,
    NonScalarLossError,
    Tape,
    Tensor,
    add,
    backward,
    causal_depthwise_conv1d,
    elementwise,
    embedding,
    finite_diff_check,
    matmul,
    mul,
    narrow,
    reduce_mean,
    reduce_sum,
    reshape,
    rmsnorm,
    softmax,
    take_positions,
    tensor,
    transpose,
)

FD_TOL = 1e-4


def test_grad_of_sum_is_ones():
    x = Tensor(np.array([1.0, 2.0, 3.0]), requires_grad=True)
    with Tape() as tape:
        loss = reduce_sum(x)
    grad = backward(tape, loss)[x]
    assert np.array_equal(grad.data, np.ones(3))


def test_grad_of_quadratic():
    x = Tensor(np.array([1.0, 2.0]), requires_grad=True)
    with Tape() as tape:
        loss = reduce_sum(mul(x, x))
    grad = backward(tape, loss)[x]
    assert np.array_equal(grad.data, np.array([2.0, 4.0]))


def test_untouched_params_get_zero_grads():
    x = Tensor(np.ones(3), requires_grad=True)
    unused = Tensor(np.ones(2), requires_grad=True)
    with Tape() as tape:
        loss = reduce_sum(x)
    grads = backward(tape, loss, wrt=[x, unused])
    assert np.array_equal(grads[unused].data, np.zeros(2))
    assert grads[unused].shape == unused.shape


def test_grad_accumulates_over_reuse():
    x = Tensor(np.array([3.0]), requires_grad=True)
    with Tape() as tape:
        loss = reduce_sum(add(mul(x, x), x))  # x^2 + x
    grad = backward(tape, loss)[x]
    assert grad.data[0] == pytest.approx(7.0)


def test_non_scalar_loss_rejected():
    x = Tensor(np.ones(3), requires_grad=True)
    with Tape() as tape:
        y = mul(x, x)
    with pytest.raises(NonScalarLossError):
        backward(tape, y)


def test_non_finite_gradient_reports_node():
    x = Tensor(np.array([0.0]), requires_grad=True)
    with np.errstate(divide="ignore"):
        with Tape() as tape:
            y = elementwise("recip", x)  # 1/0 -> inf
            loss = reduce_sum(y)
        with pytest.raises(NonFiniteGradientError, match="node"):
            backward(tape, loss)


def test_no_recording_outside_tape():
    x = Tensor(np.ones(3), requires_grad=True)
    y = mul(x, x)
    assert not y.requires_grad


def test_broadcast_gradients_reduce_correctly(rng):
    a = Tensor(rng.normal(size=(3, 1)), requires_grad=True)
    b = Tensor(rng.normal(size=(4,)), requires_grad=True)
    with Tape() as tape:
        loss = reduce_sum(mul(a, b))
    grads = backward(tape, loss)
    assert grads[a].shape == (3, 1)
    assert grads[b].shape == (4,)
    assert np.allclose(grads[a].data, b.data.sum())
    assert np.allclose(grads[b].data, a.data.sum())


@pytest.mark.parametrize("op", ["add", "mul"])
def test_fd_binary_elementwise(op, rng):
    w = rng.uniform(-2, 2, size=(3, 4))
    other = Tensor(rng.uniform(-2, 2, size=(3, 4)))

    def f(p):
        return reduce_sum(mul(elementwise(op, p, other), Tensor(w)))

    x = Tensor(rng.uniform(-2, 2, size=(3, 4)))
    assert finite_diff_check(f, x) < FD_TOL


@pytest.mark.parametrize("op", ["exp", "silu", "sigmoid", "softplus", "neg", "recip"])
def test_fd_unary_elementwise(op, rng):
    w = rng.uniform(-2, 2, size=(2, 5))
    x = rng.uniform(-2, 2, size=(2, 5))
    if op == "recip":
        x = np.sign(x) * (np.abs(x) + 0.5)  # keep away from the pole

    def f(p):
        return reduce_sum(mul(elementwise(op, p), Tensor(w)))

    assert finite_diff_check(f, Tensor(x)) < FD_TOL


def test_fd_matmul_both_sides(rng):
    a = rng.uniform(-2, 2, size=(3, 4))
    b = rng.uniform(-2, 2, size=(4, 2))
    w = rng.uniform(-2, 2, size=(3, 2))
    assert finite_diff_check(
        lambda p: reduce_sum(mul(matmul(p, Tensor(b)), Tensor(w))), Tensor(a)
    ) < FD_TOL
    assert finite_diff_check(
        lambda p: reduce_sum(mul(matmul(Tensor(a), p), Tensor(w))), Tensor(b)
    ) < FD_TOL


def test_fd_batched_matmul(rng):
    a = rng.uniform(-2, 2, size=(2, 3, 4))
    b = rng.uniform(-2, 2, size=(4, 5))
    w = rng.uniform(-2, 2, size=(2, 3, 5))
    assert finite_diff_check(
        lambda p: reduce_sum(mul(matmul(Tensor(a), p), Tensor(w))), Tensor(b)
    ) < FD_TOL


def test_fd_softmax(rng):
    x = rng.uniform(-2, 2, size=(3, 6))
    w = rng.uniform(-2, 2, size=(3, 6))
    assert finite_diff_check(
        lambda p: reduce_sum(mul(softmax(p, axis=-1), Tensor(w))), Tensor(x)
    ) < FD_TOL


def test_fd_rmsnorm(rng):
    x = rng.uniform(-2, 2, size=(4, 5))
    gain = rng.uniform(0.5, 1.5, size=5)
    w = rng.uniform(-2, 2, size=(4, 5))
    assert finite_diff_check(
        lambda p: reduce_sum(mul(rmsnorm(p, Tensor(gain)), Tensor(w))), Tensor(x)
    ) < FD_TOL
    assert finite_diff_check(
        lambda g: reduce_sum(mul(rmsnorm(Tensor(x), g), Tensor(w))), Tensor(gain)
    ) < FD_TOL


def test_fd_reductions(rng):
    x = rng.uniform(-2, 2, size=(3, 4))
    w2 = rng.uniform(-2, 2, size=(3,))
    assert finite_diff_check(
        lambda p: reduce_sum(mul(reduce_mean(p, axis=1), Tensor(w2))), Tensor(x)
    ) < FD_TOL


def test_fd_conv(rng):
    x = rng.uniform(-2, 2, size=(2, 6, 3))
    k = rng.uniform(-2, 2, size=(3, 4))
    w = rng.uniform(-2, 2, size=(2, 6, 3))
    assert finite_diff_check(
        lambda p: reduce_sum(mul(causal_depthwise_conv1d(p, Tensor(k)), Tensor(w))), Tensor(x)
    ) < FD_TOL
    assert finite_diff_check(
        lambda p: reduce_sum(mul(causal_depthwise_conv1d(Tensor(x), p), Tensor(w))), Tensor(k)
    ) < FD_TOL


def test_fd_embedding_and_gathers(rng):
    table = rng.uniform(-2, 2, size=(6, 3))
    ids = rng.integers(0, 6, size=(2, 4))
    w = rng.uniform(-2, 2, size=(2, 4, 3))
    assert finite_diff_check(
        lambda p: reduce_sum(mul(embedding(p, ids), Tensor(w))), Tensor(table)
    ) < FD_TOL

    x = rng.uniform(-2, 2, size=(3, 5, 2))
    pos = np.array([0, 4, 2])
    w2 = rng.uniform(-2, 2, size=(3, 2))
    assert finite_diff_check(
        lambda p: reduce_sum(mul(take_positions(p, pos), Tensor(w2))), Tensor(x)
    ) < FD_TOL


def test_fd_shape_ops(rng):
    x = rng.uniform(-2, 2, size=(2, 6))
    w = rng.uniform(-2, 2, size=(3, 4))
    assert finite_diff_check(
        lambda p: reduce_sum(mul(reshape(p, (3, 4)), Tensor(w))), Tensor(x)
    ) < FD_TOL
    w2 = rng.uniform(-2, 2, size=(6, 2))
    assert finite_diff_check(
        lambda p: reduce_sum(mul(transpose(p), Tensor(w2))), Tensor(x)
    ) < FD_TOL
    w3 = rng.uniform(-2, 2, size=(2, 3))
    assert finite_diff_check(
        lambda p: reduce_sum(mul(narrow(p, 1, 2, 3), Tensor(w3))), Tensor(x)
    ) < FD_TOL


def test_fd_two_layer_composite(rng):
    w1 = rng.uniform(-1, 1, size=(4, 8))
    w2 = rng.uniform(-1, 1, size=(8, 1))

    def f(p):
        h = elementwise("silu", matmul(p, Tensor(w1)))
        return reduce_sum(matmul(h, Tensor(w2)))

    x = Tensor(rng.uniform(-2, 2, size=(3, 4)))
    assert finite_diff_check(f, x) < FD_TOL


def test_fd_of_sum_is_exact():
    err = finite_diff_check(lambda p: reduce_sum(p), tensor(np.array([1.0, 2.0, 3.0])))
    assert err < 1e-9


def test_fd_exp_analytic_anchor():
    # d/dx sum(exp(x)) at x=0 equals 1
    x = tensor(np.array([0.0]))
    probe = Tensor(x.data.copy(), requires_grad=True)
    with Tape() as tape:
        loss = reduce_sum(elementwise("exp", probe))
    grad = backward(tape, loss)[probe]
    assert grad.data[0] == pytest.approx(1.0, abs=1e-12)
    assert finite_diff_check(lambda p: reduce_sum(elementwise("exp", p)), x) < 1e-8
