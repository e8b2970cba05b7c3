"""Forward semantics of the tensor ops against independent oracles."""

import numpy as np
import pytest

from chemssm.numerics import (
    ShapeMismatchError,
    Tensor,
    add,
    assert_finite,
    causal_depthwise_conv1d,
    elementwise,
    exp,
    matmul,
    mul,
    narrow,
    neg,
    recip,
    reduce_mean,
    reduce_sum,
    reshape,
    rmsnorm,
    sigmoid,
    silu,
    softmax,
    softplus,
    tensor,
    transpose,
)
from chemssm.numerics.tensor import NonFiniteError


def matmul_oracle(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Naive triple loop for 2-d inputs."""
    m, k = a.shape
    k2, n = b.shape
    assert k == k2
    out = np.zeros((m, n))
    for i in range(m):
        for j in range(n):
            for p in range(k):
                out[i, j] += a[i, p] * b[p, j]
    return out


def test_add_mul_basic():
    assert add(tensor([1.0, 2.0]), tensor([3.0, 4.0])).data.tolist() == [4.0, 6.0]
    assert mul(tensor([2.0, 3.0]), tensor([4.0, 5.0])).data.tolist() == [8.0, 15.0]


def test_exp_and_silu_identities():
    assert exp(tensor([0.0])).data[0] == 1.0
    assert silu(tensor([0.0])).data[0] == 0.0
    assert sigmoid(tensor([0.0])).data[0] == 0.5
    assert softplus(tensor([0.0])).data[0] == pytest.approx(np.log(2.0), abs=1e-15)
    assert recip(tensor([4.0])).data[0] == 0.25
    assert neg(tensor([3.0])).data[0] == -3.0


def test_elementwise_dispatch():
    out = elementwise("add", tensor([1.0]), tensor([2.0]))
    assert out.data[0] == 3.0
    assert elementwise("exp", tensor([0.0])).data[0] == 1.0
    with pytest.raises(ValueError):
        elementwise("add", tensor([1.0]))
    with pytest.raises(ValueError):
        elementwise("exp", tensor([1.0]), tensor([1.0]))
    with pytest.raises(ValueError):
        elementwise("cosh", tensor([1.0]))


def test_broadcasting_against_numpy_shape_calculator(rng):
    def shape_oracle(s1, s2):
        # Right-aligned, size-1 expansion; independent of np.broadcast_shapes.
        out = []
        for i in range(1, max(len(s1), len(s2)) + 1):
            d1 = s1[-i] if i <= len(s1) else 1
            d2 = s2[-i] if i <= len(s2) else 1
            if d1 != d2 and 1 not in (d1, d2):
                return None
            out.append(max(d1, d2))
        return tuple(reversed(out))

    for _ in range(100):
        nd1, nd2 = rng.integers(1, 4, size=2)
        s1 = tuple(int(x) for x in rng.choice([1, 2, 3, 5], size=nd1))
        s2 = tuple(int(x) for x in rng.choice([1, 2, 3, 5], size=nd2))
        expected = shape_oracle(s1, s2)
        a, b = Tensor(np.ones(s1)), Tensor(np.ones(s2))
        if expected is None:
            with pytest.raises(ShapeMismatchError):
                add(a, b)
        else:
            assert add(a, b).shape == expected
            assert mul(a, b).shape == expected


def test_shape_mismatch_message_contains_both_shapes():
    with pytest.raises(ShapeMismatchError, match=r"\(2,\).*\(3,\)"):
        add(Tensor(np.ones(2)), Tensor(np.ones(3)))


def test_matmul_identity_and_selector():
    m = tensor([[1.0, 2.0], [3.0, 4.0]])
    assert np.array_equal(matmul(tensor(np.eye(2)), m).data, m.data)
    sel = matmul(tensor([[1.0, 0.0]]), tensor([[5.0], [7.0]]))
    assert sel.data.tolist() == [[5.0]]


def test_matmul_against_triple_loop(rng):
    a = rng.normal(size=(3, 4))
    b = rng.normal(size=(4, 2))
    got = matmul(Tensor(a), Tensor(b)).data
    assert np.abs(got - matmul_oracle(a, b)).max() < 1e-12


def test_matmul_associativity(rng):
    for _ in range(10):
        a = Tensor(rng.normal(size=(3, 4)))
        b = Tensor(rng.normal(size=(4, 5)))
        c = Tensor(rng.normal(size=(5, 2)))
        left = matmul(matmul(a, b), c).data
        right = matmul(a, matmul(b, c)).data
        assert np.abs(left - right).max() < 1e-9


def test_matmul_shape_errors():
    with pytest.raises(ShapeMismatchError):
        matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((4, 2))))
    with pytest.raises(ShapeMismatchError):
        matmul(Tensor(np.ones(3)), Tensor(np.ones((3, 2))))


def test_softmax_uniform_and_shift_invariance(rng):
    assert np.allclose(softmax(tensor([[0.0, 0.0, 0.0]])).data, 1 / 3)
    x = rng.normal(size=(4, 7))
    a = softmax(Tensor(x)).data
    b = softmax(Tensor(x + 3.7)).data
    assert np.abs(a - b).max() < 1e-12
    rows = a.sum(axis=-1)
    assert np.abs(rows - 1.0).max() < 1e-12
    assert ((a > 0) & (a < 1)).all()


def test_rmsnorm_constant_row():
    out = rmsnorm(tensor([[2.0, 2.0, 2.0]]), tensor([1.0, 1.0, 1.0]), eps=0.0)
    assert np.allclose(out.data, 1.0)


def test_rmsnorm_unit_rms(rng):
    x = rng.normal(size=(5, 8))
    out = rmsnorm(Tensor(x), Tensor(np.ones(8)), eps=0.0).data
    rms = np.sqrt((out * out).mean(axis=-1))
    assert np.abs(rms - 1.0).max() < 1e-12


def test_reductions(rng):
    x = rng.normal(size=(3, 4))
    assert reduce_sum(Tensor(x)).data == pytest.approx(x.sum())
    assert np.allclose(reduce_mean(Tensor(x), axis=1).data, x.mean(axis=1))
    assert reduce_sum(Tensor(x), axis=0, keepdims=True).shape == (1, 4)
    with pytest.raises(ShapeMismatchError):
        reduce_sum(Tensor(x), axis=5)


def test_conv_identity_and_delta():
    x = Tensor(np.arange(6.0).reshape(1, 6, 1))
    same = causal_depthwise_conv1d(x, tensor([[1.0]]))
    assert np.array_equal(same.data, x.data)
    delta = causal_depthwise_conv1d(x, tensor([[0.0, 1.0]]))
    assert np.array_equal(delta.data, x.data)


def test_conv_hand_example():
    x = Tensor(np.array([1.0, 2.0, 3.0]).reshape(1, 3, 1))
    out = causal_depthwise_conv1d(x, tensor([[1.0, 1.0]]))
    assert out.data.ravel().tolist() == [1.0, 3.0, 5.0]


def test_conv_causality(rng):
    x = rng.normal(size=(2, 8, 3))
    k = Tensor(rng.normal(size=(3, 4)))
    base = causal_depthwise_conv1d(Tensor(x), k).data
    bumped = x.copy()
    bumped[:, 5:] += 10.0
    out = causal_depthwise_conv1d(Tensor(bumped), k).data
    assert np.array_equal(base[:, :5], out[:, :5])


def test_conv_shape_error():
    with pytest.raises(ShapeMismatchError):
        causal_depthwise_conv1d(Tensor(np.ones((1, 4, 3))), Tensor(np.ones((2, 2))))


def test_reshape_transpose_narrow(rng):
    x = rng.normal(size=(2, 6))
    assert reshape(Tensor(x), (3, 4)).shape == (3, 4)
    assert np.array_equal(transpose(Tensor(x)).data, x.T)
    sliced = narrow(Tensor(x), 1, 2, 3)
    assert np.array_equal(sliced.data, x[:, 2:5])


def test_assert_finite():
    assert_finite(tensor([1.0, 2.0]))
    with pytest.raises(NonFiniteError):
        assert_finite(Tensor(np.array([1.0, np.inf])))
