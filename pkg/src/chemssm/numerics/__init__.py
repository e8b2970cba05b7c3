"""Minimal dense-tensor engine with reverse-mode autodiff."""

from .gradcheck import finite_diff_check
from .tensor import (
    NonFiniteError,
    NonFiniteGradientError,
    NonScalarLossError,
    ShapeMismatchError,
    Tape,
    Tensor,
    add,
    assert_finite,
    backward,
    causal_depthwise_conv1d,
    elementwise,
    embedding,
    exp,
    matmul,
    mul,
    narrow,
    neg,
    record,
    recip,
    reduce_mean,
    reduce_sum,
    reshape,
    rmsnorm,
    sigmoid,
    silu,
    softmax,
    softplus,
    take_positions,
    tensor,
    transpose,
    zeros,
)

__all__ = [
    "NonFiniteError",
    "NonFiniteGradientError",
    "NonScalarLossError",
    "ShapeMismatchError",
    "Tape",
    "Tensor",
    "add",
    "assert_finite",
    "backward",
    "causal_depthwise_conv1d",
    "elementwise",
    "embedding",
    "exp",
    "finite_diff_check",
    "matmul",
    "mul",
    "narrow",
    "neg",
    "record",
    "recip",
    "reduce_mean",
    "reduce_sum",
    "reshape",
    "rmsnorm",
    "sigmoid",
    "silu",
    "softmax",
    "softplus",
    "take_positions",
    "tensor",
    "transpose",
    "zeros",
]
