"""Central finite-difference oracle for gradient verification."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .tensor import Tape, Tensor, backward


def finite_diff_check(
    f: Callable[[Tensor], Tensor], x: Tensor, h: float = 1e-5
) -> float:
    """Max relative error between analytic and central-difference gradients.

    f must map a tensor to a scalar tensor deterministically. Error per
    coordinate is |fd - grad| / (|grad| + 1e-8); the max over coordinates is
    returned.
    """
    probe = Tensor(x.data.copy(), requires_grad=True)
    with Tape() as tape:
        loss = f(probe)
    grad = backward(tape, loss, wrt=[probe])[probe].data

    base = x.data.copy()
    fd = np.zeros_like(base)
    for idx in np.ndindex(base.shape):
        up = base.copy()
        up[idx] += h
        down = base.copy()
        down[idx] -= h
        fd[idx] = (f(Tensor(up)).item() - f(Tensor(down)).item()) / (2.0 * h)
    rel = np.abs(fd - grad) / (np.abs(grad) + 1e-8)
    return float(rel.max())
