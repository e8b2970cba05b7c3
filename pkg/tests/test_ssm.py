"""Discretization and selective-scan semantics against a straight-line oracle."""

import numpy as np
import pytest

from chemssm.numerics import (
    Tensor,
    finite_diff_check,
    mul,
    reduce_sum,
    tensor,
)
from chemssm.numerics.tensor import NonFiniteError, ShapeMismatchError
from chemssm.model.ssm import (
    discretize,
    scan_with_state,
    selective_scan_parallel,
    selective_scan_sequential,
)


def scan_oracle(u, delta, A, B, C, D):
    """Naive per-timestep matrix recurrence, one batch row at a time."""
    b, l, e = u.shape
    n = A.shape[1]
    y = np.zeros((b, l, e))
    for bi in range(b):
        h = np.zeros((e, n))
        for t in range(l):
            a_bar = np.exp(delta[bi, t][:, None] * A)
            b_bar = delta[bi, t][:, None] * B[bi, t][None, :]
            h = a_bar * h + b_bar * u[bi, t][:, None]
            y[bi, t] = h @ C[bi, t] + D * u[bi, t]
    return y


def random_instance(rng, b=2, l=12, e=5, n=3):
    u = rng.normal(size=(b, l, e))
    delta = np.abs(rng.normal(size=(b, l, e))) + 0.05
    A = -np.abs(rng.normal(size=(e, n))) - 0.1
    B = rng.normal(size=(b, l, n))
    C = rng.normal(size=(b, l, n))
    D = rng.normal(size=e)
    return u, delta, A, B, C, D


# ---------------------------------------------------------------------------
# discretize


def test_discretize_scalar_anchor():
    # exp(-ln 2) = 0.5
    delta = tensor(np.full((1, 1, 1), np.log(2.0)))
    A = tensor(np.array([[-1.0]]))
    B = tensor(np.ones((1, 1, 1)))
    a_bar, b_bar = discretize(delta, A, B)
    assert a_bar.data.ravel()[0] == pytest.approx(0.5, abs=1e-15)
    assert b_bar.data.ravel()[0] == pytest.approx(np.log(2.0), abs=1e-15)


def test_discretize_small_step_limit():
    delta = tensor(np.full((1, 1, 2), 1e-12))
    A = tensor(-np.ones((2, 3)))
    B = tensor(np.ones((1, 1, 3)))
    a_bar, b_bar = discretize(delta, A, B)
    assert np.abs(a_bar.data - 1.0).max() < 1e-11
    assert np.abs(b_bar.data).max() < 1e-11


def test_discretize_decay_in_unit_interval(rng):
    delta = tensor(np.abs(rng.normal(size=(4, 10, 6))) + 1e-6)
    A = tensor(-np.abs(rng.normal(size=(6, 4))) - 1e-6)
    B = tensor(rng.normal(size=(4, 10, 4)))
    a_bar, _ = discretize(delta, A, B)
    assert ((a_bar.data > 0) & (a_bar.data < 1)).all()


def test_discretize_rejects_nonfinite():
    delta = tensor(np.full((1, 1, 1), np.inf))
    with pytest.raises(NonFiniteError):
        discretize(delta, tensor(np.array([[1.0]])), tensor(np.ones((1, 1, 1))))


# ---------------------------------------------------------------------------
# scans


def test_sequential_matches_oracle(rng):
    args = random_instance(rng)
    got = selective_scan_sequential(*map(tensor, args)).data
    assert np.abs(got - scan_oracle(*args)).max() < 1e-12


def test_pure_skip_path(rng):
    u, delta, A, B, C, D = random_instance(rng)
    C = np.zeros_like(C)
    D = np.ones_like(D)
    got = selective_scan_sequential(*map(tensor, (u, delta, A, B, C, D))).data
    assert np.abs(got - u).max() < 1e-15


def test_cumulative_sum_mode():
    # A -> 0^- makes A_bar -> 1; delta=1, B=1, C=1, D=0 turns the scan into
    # a running sum of u.
    u = np.array([1.0, 2.0, 3.0]).reshape(1, 3, 1)
    delta = np.ones((1, 3, 1))
    A = np.full((1, 1), -1e-14)
    B = np.ones((1, 3, 1))
    C = np.ones((1, 3, 1))
    D = np.zeros(1)
    got = selective_scan_sequential(*map(tensor, (u, delta, A, B, C, D))).data
    assert np.abs(got.ravel() - [1.0, 3.0, 6.0]).max() < 1e-9


def test_parallel_equals_sequential(rng):
    for _ in range(5):
        args = random_instance(rng, b=3, l=33, e=6, n=4)
        seq = selective_scan_sequential(*map(tensor, args)).data
        par = selective_scan_parallel(*map(tensor, args)).data
        assert np.abs(par - seq).max() < 1e-9


def test_parallel_length_one_exact(rng):
    args = random_instance(rng, l=1)
    seq = selective_scan_sequential(*map(tensor, args)).data
    par = selective_scan_parallel(*map(tensor, args)).data
    assert np.array_equal(seq, par)


def test_affine_composition_law(rng):
    # ((a,b) then (c,d)) applied to h must equal c*(a*h+b)+d.
    for _ in range(100):
        a, b, c, d, h = rng.normal(size=5)
        composed_a, composed_b = c * a, c * b + d
        assert composed_a * h + composed_b == pytest.approx(c * (a * h + b) + d, rel=1e-12)


def test_scan_initial_state_consistency(rng):
    u, delta, A, B, C, D = random_instance(rng, l=9)
    args = (u, delta, A, B, C, D)
    # running the second half with the final state of the first half equals
    # running the whole sequence at once
    full, final = scan_with_state(*map(tensor, args), parallel=False)
    half1, state1 = scan_with_state(
        *(tensor(x[:, :4] if x.ndim == 3 else x) for x in args), parallel=False
    )
    half2, _ = scan_with_state(
        *(tensor(x[:, 4:] if x.ndim == 3 else x) for x in args), h0=state1, parallel=True
    )
    glued = np.concatenate([half1.data, half2.data], axis=1)
    assert np.abs(glued - full.data).max() < 1e-12


def test_scan_gradients_all_inputs(rng):
    args = random_instance(rng, b=2, l=7, e=3, n=2)
    w = rng.normal(size=args[0].shape)

    for mode in (selective_scan_sequential, selective_scan_parallel):
        for i in range(6):
            def f(p, i=i, mode=mode):
                full = [tensor(a) for a in args]
                full[i] = p
                return reduce_sum(mul(mode(*full), Tensor(w)))

            assert finite_diff_check(f, tensor(args[i])) < 1e-4, f"input {i}"


def test_scan_shape_validation(rng):
    u, delta, A, B, C, D = map(tensor, random_instance(rng))
    with pytest.raises(ShapeMismatchError):
        selective_scan_sequential(u, delta, A, B, C, tensor(np.ones(99)))
    with pytest.raises(ShapeMismatchError):
        selective_scan_sequential(tensor(np.ones((2, 3))), delta, A, B, C, D)


def test_scan_nonfinite_reports_time_index(rng):
    u, delta, A, B, C, D = random_instance(rng, l=6)
    u[:, 4] = np.inf
    with pytest.raises(NonFiniteError, match="time index 4"):
        selective_scan_sequential(*map(tensor, (u, delta, A, B, C, D)))
