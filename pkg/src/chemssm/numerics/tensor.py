"""Dense float64 tensors with reverse-mode automatic differentiation.

Operations run eagerly on NumPy arrays. When a Tape is active and an input
requires gradients, each op appends a node (output, inputs, vjp) to the
tape; backward() replays nodes in exact reverse append order. Tensors are
treated as immutable after creation and summation order is fixed, so runs
are bit-reproducible.
"""

from __future__ import annotations

from typing import Callable, Iterable, Sequence, Union

import numpy as np

ArrayLike = Union[float, int, Sequence, np.ndarray]


class ShapeMismatchError(ValueError):
    pass


class NonScalarLossError(ValueError):
    pass


class NonFiniteError(FloatingPointError):
    pass


class NonFiniteGradientError(FloatingPointError):
    pass


class Tensor:
    __slots__ = ("data", "requires_grad")

    def __init__(self, data: ArrayLike, requires_grad: bool = False):
        arr = np.asarray(data, dtype=np.float64)
        self.data = arr
        self.requires_grad = requires_grad

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else _scalar_error(self)

    def __repr__(self) -> str:
        grad = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}{grad})"

    # Arithmetic sugar; all routes through the recorded primitives below.
    def __add__(self, other):
        return add(self, _wrap(other))

    def __radd__(self, other):
        return add(_wrap(other), self)

    def __mul__(self, other):
        return mul(self, _wrap(other))

    def __rmul__(self, other):
        return mul(_wrap(other), self)

    def __neg__(self):
        return neg(self)

    def __sub__(self, other):
        return add(self, neg(_wrap(other)))

    def __rsub__(self, other):
        return add(_wrap(other), neg(self))

    def __matmul__(self, other):
        return matmul(self, _wrap(other))


def _scalar_error(t: Tensor):
    raise ValueError(f"item() on non-scalar tensor of shape {t.shape}")


def _wrap(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def tensor(data: ArrayLike, requires_grad: bool = False) -> Tensor:
    return Tensor(data, requires_grad)


def zeros(shape, requires_grad: bool = False) -> Tensor:
    return Tensor(np.zeros(shape), requires_grad)


def assert_finite(t: Tensor, context: str = "tensor") -> Tensor:
    """Explicit NaN/Inf check; the engine never checks silently."""
    if not np.isfinite(t.data).all():
        raise NonFiniteError(f"non-finite values in {context}")
    return t


class _Node:
    __slots__ = ("out", "inputs", "vjp")

    def __init__(self, out: Tensor, inputs: tuple[Tensor, ...], vjp: Callable):
        self.out = out
        self.inputs = inputs
        self.vjp = vjp


class Tape:
    """Append-only record of executed ops; context manager activates it."""

    def __init__(self):
        self.nodes: list[_Node] = []

    def __enter__(self) -> "Tape":
        _ACTIVE.append(self)
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        popped = _ACTIVE.pop()
        assert popped is self


_ACTIVE: list[Tape] = []


def record(out: Tensor, inputs: tuple[Tensor, ...], vjp: Callable) -> Tensor:
    """Register a differentiable op; extension point for fused kernels.

    `vjp(g)` must return one gradient array (or None) per input, each already
    reduced to the input's shape.
    """
    if _ACTIVE and any(t.requires_grad for t in inputs):
        out.requires_grad = True
        _ACTIVE[-1].nodes.append(_Node(out, inputs, vjp))
    return out


def backward(
    tape: Tape,
    loss: Tensor,
    wrt: Iterable[Tensor] | None = None,
    check_finite: bool = True,
) -> dict[Tensor, Tensor]:
    """Reverse sweep from a scalar loss; returns tensor -> gradient.

    With `wrt` given, the result has an entry for every listed tensor;
    parameters the loss never touched get zero gradients.
    """
    if loss.size != 1:
        raise NonScalarLossError(f"loss must be scalar, got shape {loss.shape}")
    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    holders: dict[int, Tensor] = {id(loss): loss}
    for position in range(len(tape.nodes) - 1, -1, -1):
        node = tape.nodes[position]
        g = grads.get(id(node.out))
        if g is None:
            continue
        input_grads = node.vjp(g)
        for t, ig in zip(node.inputs, input_grads):
            if ig is None or not t.requires_grad:
                continue
            if check_finite and not np.isfinite(ig).all():
                raise NonFiniteGradientError(
                    f"non-finite gradient produced at tape node {position}"
                )
            key = id(t)
            if key in grads:
                grads[key] = grads[key] + ig
            else:
                grads[key] = ig
                holders[key] = t
    result: dict[Tensor, Tensor] = {}
    if wrt is None:
        for key, holder in holders.items():
            if holder.requires_grad:
                result[holder] = Tensor(grads[key])
    else:
        for t in wrt:
            found = grads.get(id(t))
            result[t] = Tensor(found) if found is not None else zeros(t.shape)
    return result


# ---------------------------------------------------------------------------
# Shape helpers


def _broadcast_shape(a: Tensor, b: Tensor, op: str) -> tuple[int, ...]:
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeMismatchError(
            f"{op}: shapes {a.shape} and {b.shape} are not broadcast-compatible"
        ) from None


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum a gradient down to the shape it was broadcast up from."""
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, dim in enumerate(shape) if dim == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


# ---------------------------------------------------------------------------
# Elementwise primitives


def add(a: Tensor, b: Tensor) -> Tensor:
    _broadcast_shape(a, b, "add")
    out = Tensor(a.data + b.data)
    return record(
        out, (a, b), lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape))
    )


def mul(a: Tensor, b: Tensor) -> Tensor:
    _broadcast_shape(a, b, "mul")
    out = Tensor(a.data * b.data)
    return record(
        out,
        (a, b),
        lambda g: (_unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)),
    )


def neg(a: Tensor) -> Tensor:
    return record(Tensor(-a.data), (a,), lambda g: (-g,))


def exp(a: Tensor) -> Tensor:
    out = Tensor(np.exp(a.data))
    return record(out, (a,), lambda g: (g * out.data,))


def recip(a: Tensor) -> Tensor:
    out = Tensor(1.0 / a.data)
    return record(out, (a,), lambda g: (-g * out.data * out.data,))


def sigmoid(a: Tensor) -> Tensor:
    out = Tensor(_sigmoid(a.data))
    return record(out, (a,), lambda g: (g * out.data * (1.0 - out.data),))


def silu(a: Tensor) -> Tensor:
    s = _sigmoid(a.data)
    out = Tensor(a.data * s)
    return record(out, (a,), lambda g: (g * (s + a.data * s * (1.0 - s)),))


def softplus(a: Tensor) -> Tensor:
    out = Tensor(_softplus(a.data))
    return record(out, (a,), lambda g: (g * _sigmoid(a.data),))


def _sigmoid(x: np.ndarray) -> np.ndarray:
    # Evaluate on the negative half-line only; exp never overflows.
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _softplus(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))


_ELEMENTWISE = {
    "add": add,
    "mul": mul,
    "exp": exp,
    "silu": silu,
    "sigmoid": sigmoid,
    "softplus": softplus,
    "neg": neg,
    "recip": recip,
}


def elementwise(op: str, a: Tensor, b: Tensor | None = None) -> Tensor:
    """Dispatch an elementwise op by name; binary ops require `b`."""
    fn = _ELEMENTWISE.get(op)
    if fn is None:
        raise ValueError(f"unknown elementwise op {op!r}; choose from {sorted(_ELEMENTWISE)}")
    if op in ("add", "mul"):
        if b is None:
            raise ValueError(f"{op} is binary")
        return fn(a, b)
    if b is not None:
        raise ValueError(f"{op} is unary")
    return fn(a)


# ---------------------------------------------------------------------------
# Linear algebra and shape ops


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.ndim < 2 or b.ndim < 2:
        raise ShapeMismatchError(
            f"matmul requires ndim >= 2 operands, got {a.shape} and {b.shape}"
        )
    if a.shape[-1] != b.shape[-2]:
        raise ShapeMismatchError(
            f"matmul inner dimensions differ: {a.shape} vs {b.shape}"
        )
    try:
        out = Tensor(np.matmul(a.data, b.data))
    except ValueError:
        raise ShapeMismatchError(
            f"matmul batch dimensions incompatible: {a.shape} vs {b.shape}"
        ) from None

    def vjp(g):
        ga = _unbroadcast(np.matmul(g, np.swapaxes(b.data, -1, -2)), a.shape)
        gb = _unbroadcast(np.matmul(np.swapaxes(a.data, -1, -2), g), b.shape)
        return ga, gb

    return record(out, (a, b), vjp)


def transpose(a: Tensor) -> Tensor:
    """Swap the last two axes."""
    out = Tensor(np.swapaxes(a.data, -1, -2))
    return record(out, (a,), lambda g: (np.swapaxes(g, -1, -2),))


def reshape(a: Tensor, shape) -> Tensor:
    out = Tensor(a.data.reshape(shape))
    return record(out, (a,), lambda g: (g.reshape(a.shape),))


def narrow(a: Tensor, axis: int, start: int, size: int) -> Tensor:
    """Contiguous slice [start, start+size) along one axis."""
    index = [slice(None)] * a.ndim
    index[axis] = slice(start, start + size)
    index = tuple(index)
    out = Tensor(a.data[index])

    def vjp(g):
        full = np.zeros_like(a.data)
        full[index] = g
        return (full,)

    return record(out, (a,), vjp)


# ---------------------------------------------------------------------------
# Reductions and norms


def _normalize_axis(axis, ndim) -> tuple[int, ...]:
    if axis is None:
        return tuple(range(ndim))
    if isinstance(axis, int):
        axis = (axis,)
    checked = []
    for ax in axis:
        if not -ndim <= ax < ndim:
            raise ShapeMismatchError(f"axis {ax} invalid for ndim {ndim}")
        checked.append(ax % ndim)
    return tuple(checked)


def reduce_sum(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    axes = _normalize_axis(axis, a.ndim)
    out = Tensor(a.data.sum(axis=axes, keepdims=keepdims))

    def vjp(g):
        if not keepdims:
            g = np.expand_dims(g, axes)
        return (np.broadcast_to(g, a.shape).copy(),)

    return record(out, (a,), vjp)


def reduce_mean(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    axes = _normalize_axis(axis, a.ndim)
    count = int(np.prod([a.shape[ax] for ax in axes])) if axes else 1
    out = Tensor(a.data.mean(axis=axes, keepdims=keepdims))

    def vjp(g):
        if not keepdims:
            g = np.expand_dims(g, axes)
        return (np.broadcast_to(g / count, a.shape).copy(),)

    return record(out, (a,), vjp)


def softmax(a: Tensor, axis: int = -1) -> Tensor:
    _normalize_axis(axis, a.ndim)
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=axis, keepdims=True)
    out = Tensor(y)

    def vjp(g):
        inner = (g * y).sum(axis=axis, keepdims=True)
        return (y * (g - inner),)

    return record(out, (a,), vjp)


def rmsnorm(a: Tensor, gain: Tensor, eps: float = 1e-6) -> Tensor:
    """Root-mean-square normalization over the last axis, scaled by gain."""
    if gain.shape != a.shape[-1:]:
        raise ShapeMismatchError(
            f"rmsnorm gain shape {gain.shape} does not match feature dim {a.shape[-1:]}"
        )
    k = a.shape[-1]
    ms = (a.data * a.data).mean(axis=-1, keepdims=True)
    r = 1.0 / np.sqrt(ms + eps)
    out = Tensor(a.data * r * gain.data)

    def vjp(g):
        gx_direct = g * gain.data * r
        proj = (g * gain.data * a.data).sum(axis=-1, keepdims=True)
        gx = gx_direct - a.data * (r**3 / k) * proj
        ggain = (g * a.data * r).reshape(-1, k).sum(axis=0)
        return gx, ggain

    return record(out, (a, gain), vjp)


# ---------------------------------------------------------------------------
# Sequence ops


def causal_depthwise_conv1d(x: Tensor, kernel: Tensor) -> Tensor:
    """Per-channel causal convolution; kernel[..., -1] taps the current step.

    x is [batch, length, channels], kernel is [channels, width]; the input is
    left-padded with width-1 zeros so output position t sees only inputs <= t.
    """
    if x.ndim != 3 or kernel.ndim != 2 or x.shape[2] != kernel.shape[0]:
        raise ShapeMismatchError(
            f"conv1d expects x[b,l,c] and kernel[c,w], got {x.shape} and {kernel.shape}"
        )
    b, l, c = x.shape
    w = kernel.shape[1]
    pad = w - 1
    xp = np.concatenate([np.zeros((b, pad, c)), x.data], axis=1)
    y = np.zeros((b, l, c))
    for j in range(w):
        y += xp[:, j : j + l, :] * kernel.data[:, j]
    out = Tensor(y)

    def vjp(g):
        gxp = np.zeros_like(xp)
        gk = np.zeros_like(kernel.data)
        for j in range(w):
            gxp[:, j : j + l, :] += g * kernel.data[:, j]
            gk[:, j] = (g * xp[:, j : j + l, :]).sum(axis=(0, 1))
        return gxp[:, pad:, :], gk

    return record(out, (x, kernel), vjp)


def embedding(table: Tensor, ids: np.ndarray) -> Tensor:
    """Row gather: out[..., :] = table[ids[...], :]."""
    ids = np.asarray(ids)
    out = Tensor(table.data[ids])

    def vjp(g):
        gt = np.zeros_like(table.data)
        np.add.at(gt, ids.reshape(-1), g.reshape(-1, table.shape[-1]))
        return (gt,)

    return record(out, (table,), vjp)


def take_positions(x: Tensor, positions: np.ndarray) -> Tensor:
    """Per-row time gather: out[i] = x[i, positions[i]] for x[b,l,d]."""
    positions = np.asarray(positions)
    if x.ndim != 3 or positions.shape != (x.shape[0],):
        raise ShapeMismatchError(
            f"take_positions expects x[b,l,d] and positions[b], got {x.shape} and {positions.shape}"
        )
    rows = np.arange(x.shape[0])
    out = Tensor(x.data[rows, positions])

    def vjp(g):
        gx = np.zeros_like(x.data)
        gx[rows, positions] = g
        return (gx,)

    return record(out, (x,), vjp)
