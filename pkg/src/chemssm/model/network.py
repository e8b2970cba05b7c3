"""The token-to-logits network: gated SSM blocks around a residual stream.

Block pipeline: RMSNorm -> input projection to (main, gate) -> causal
depthwise conv + SiLU on main -> input-dependent step size (softplus), B, C
-> selective scan -> gate with SiLU -> output projection -> residual add.
The LM head is tied to the token embedding.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..numerics.tensor import (
    NonFiniteError,
    ShapeMismatchError,
    Tensor,
    add,
    causal_depthwise_conv1d,
    embedding,
    exp,
    matmul,
    mul,
    narrow,
    neg,
    rmsnorm,
    silu,
    softplus,
    take_positions,
    transpose,
)
from .config import ModelConfig
from .ssm import scan_with_state


class TokenOutOfRangeError(IndexError):
    pass


class LengthOutOfRangeError(IndexError):
    pass


@dataclass
class LayerParams:
    norm_gain: Tensor  # [d_model]
    w_in: Tensor  # [d_model, 2*d_inner]
    conv_kernel: Tensor  # [d_inner, d_conv]
    w_sel: Tensor  # [d_inner, dt_rank + 2*d_state]
    w_dt: Tensor  # [dt_rank, d_inner]
    b_dt: Tensor  # [d_inner]
    a_log: Tensor  # [d_inner, d_state]
    d_skip: Tensor  # [d_inner]
    w_out: Tensor  # [d_inner, d_model]


@dataclass
class ModelParams:
    config: ModelConfig
    embedding: Tensor  # [vocab_size, d_model]; also the LM head (tied)
    layers: list[LayerParams]
    final_norm_gain: Tensor  # [d_model]

    def named(self) -> dict[str, Tensor]:
        out = {"embedding": self.embedding}
        for i, layer in enumerate(self.layers):
            for name in _LAYER_FIELDS:
                out[f"layers.{i}.{name}"] = getattr(layer, name)
        out["final_norm_gain"] = self.final_norm_gain
        return out

    def parameter_count(self) -> int:
        return sum(t.size for t in self.named().values())

    @classmethod
    def from_named(cls, config: ModelConfig, arrays: dict[str, np.ndarray]) -> "ModelParams":
        def grab(name: str) -> Tensor:
            if name not in arrays:
                raise KeyError(f"missing parameter {name!r}")
            return Tensor(arrays[name], requires_grad=True)

        layers = [
            LayerParams(**{f: grab(f"layers.{i}.{f}") for f in _LAYER_FIELDS})
            for i in range(config.n_layers)
        ]
        return cls(config, grab("embedding"), layers, grab("final_norm_gain"))


_LAYER_FIELDS = (
    "norm_gain",
    "w_in",
    "conv_kernel",
    "w_sel",
    "w_dt",
    "b_dt",
    "a_log",
    "d_skip",
    "w_out",
)


def init_params(config: ModelConfig, rng: np.random.Generator) -> ModelParams:
    """Seeded initialization.

    The step-size bias is set so softplus(bias) lands log-uniformly in
    [dt_min, dt_max]; decay exponents follow the real-diagonal ramp
    log(1..d_state); the embedding is kept small so initial logits are near
    uniform despite weight tying.
    """
    d, e = config.d_model, config.d_inner
    r, n, w = config.dt_rank, config.d_state, config.d_conv

    def uniform(fan_in: int, shape) -> Tensor:
        bound = 1.0 / np.sqrt(fan_in)
        return Tensor(rng.uniform(-bound, bound, shape), requires_grad=True)

    layers = []
    for _ in range(config.n_layers):
        dt = np.exp(
            rng.uniform(np.log(config.dt_min), np.log(config.dt_max), size=e)
        )
        b_dt = np.log(np.expm1(dt))  # inverse softplus
        a_ramp = np.tile(np.arange(1, n + 1, dtype=np.float64), (e, 1))
        layers.append(
            LayerParams(
                norm_gain=Tensor(np.ones(d), requires_grad=True),
                w_in=uniform(d, (d, 2 * e)),
                conv_kernel=uniform(w, (e, w)),
                w_sel=uniform(e, (e, r + 2 * n)),
                w_dt=uniform(r, (r, e)),
                b_dt=Tensor(b_dt, requires_grad=True),
                a_log=Tensor(np.log(a_ramp), requires_grad=True),
                d_skip=Tensor(np.ones(e), requires_grad=True),
                w_out=Tensor(
                    rng.normal(0.0, 0.02 / np.sqrt(2.0 * config.n_layers), (e, d)),
                    requires_grad=True,
                ),
            )
        )
    return ModelParams(
        config=config,
        embedding=Tensor(rng.normal(0.0, 0.01, (config.vocab_size, d)), requires_grad=True),
        layers=layers,
        final_norm_gain=Tensor(np.ones(d), requires_grad=True),
    )


@dataclass
class HiddenState:
    """Per-layer carry for stepwise evaluation: SSM state and conv tail."""

    ssm: list[np.ndarray] = field(default_factory=list)  # each [b, d_inner, d_state]
    conv: list[np.ndarray] = field(default_factory=list)  # each [b, d_conv-1, d_inner]


def mamba_block(
    x: Tensor,
    layer: LayerParams,
    config: ModelConfig,
    ssm_state: np.ndarray | None = None,
    parallel: bool = True,
) -> tuple[Tensor, np.ndarray]:
    """One gated selective-SSM block with residual; returns final scan state."""
    e, r, n = config.d_inner, config.dt_rank, config.d_state
    h = rmsnorm(x, layer.norm_gain)
    both = matmul(h, layer.w_in)
    main = narrow(both, 2, 0, e)
    gate = narrow(both, 2, e, e)
    main = silu(causal_depthwise_conv1d(main, layer.conv_kernel))
    sel = matmul(main, layer.w_sel)
    dt_low = narrow(sel, 2, 0, r)
    b_sel = narrow(sel, 2, r, n)
    c_sel = narrow(sel, 2, r + n, n)
    delta = softplus(add(matmul(dt_low, layer.w_dt), layer.b_dt))
    a_neg = neg(exp(layer.a_log))
    scanned, final_state = scan_with_state(
        main, delta, a_neg, b_sel, c_sel, layer.d_skip, h0=ssm_state, parallel=parallel
    )
    gated = mul(scanned, silu(gate))
    return add(x, matmul(gated, layer.w_out)), final_state


def hidden_states(
    params: ModelParams, token_ids: np.ndarray, parallel: bool = True
) -> Tensor:
    """Embed, run all blocks, and apply the final norm: [b, l, d_model]."""
    ids = np.asarray(token_ids)
    if ids.ndim != 2:
        raise ShapeMismatchError(f"token ids must be [batch, length], got {ids.shape}")
    if ids.min(initial=0) < 0 or ids.max(initial=0) >= params.config.vocab_size:
        raise TokenOutOfRangeError(
            f"token ids must lie in [0, {params.config.vocab_size}), "
            f"got range [{ids.min()}, {ids.max()}]"
        )
    x = embedding(params.embedding, ids)
    for index, layer in enumerate(params.layers):
        x, _ = mamba_block(x, layer, params.config, parallel=parallel)
        if not np.isfinite(x.data).all():
            raise NonFiniteError(f"non-finite activations after layer {index}")
    return rmsnorm(x, params.final_norm_gain)


def forward(params: ModelParams, token_ids: np.ndarray, parallel: bool = True) -> Tensor:
    """Next-token logits [b, l, vocab_size]; position t predicts token t+1."""
    h = hidden_states(params, token_ids, parallel=parallel)
    return matmul(h, transpose(params.embedding))


def pool_final(hidden: Tensor, lengths: np.ndarray) -> Tensor:
    """Hidden state at the last non-pad position of each row."""
    lengths = np.asarray(lengths)
    b, l, _ = hidden.shape
    if lengths.shape != (b,) or lengths.min() < 1 or lengths.max() > l:
        raise LengthOutOfRangeError(
            f"lengths must be in [1, {l}] with shape ({b},), got {lengths}"
        )
    return take_positions(hidden, lengths - 1)
