"""Training configuration, AdamW with decoupled weight decay, gradient clipping."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..numerics.tensor import ShapeMismatchError, Tensor

LR_SCHEDULES = ("constant", "linear-warmup-cosine")


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 3e-4
    weight_decay: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int = 32
    max_steps: int | None = None
    epochs: int | None = None
    grad_clip: float = 1.0
    seed: int = 0
    lr_schedule: str = "constant"
    warmup_steps: int = 0

    def __post_init__(self):
        if self.lr <= 0 or self.eps <= 0 or self.grad_clip <= 0 or self.batch_size < 1:
            raise ValueError("lr, eps, grad_clip must be positive and batch_size >= 1")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1) or self.weight_decay < 0:
            raise ValueError("betas must lie in [0, 1) and weight_decay must be >= 0")
        if self.lr_schedule not in LR_SCHEDULES:
            raise ValueError(f"lr_schedule must be one of {LR_SCHEDULES}")
        if self.max_steps is None and self.epochs is None:
            raise ValueError("set max_steps or epochs")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        return cls(**data)


def lr_at_step(config: TrainConfig, step: int, total_steps: int) -> float:
    """Learning rate for a 1-based step index."""
    if config.lr_schedule == "constant":
        return config.lr
    if step <= config.warmup_steps:
        return config.lr * step / max(1, config.warmup_steps)
    span = max(1, total_steps - config.warmup_steps)
    progress = min(1.0, (step - config.warmup_steps) / span)
    return config.lr * 0.5 * (1.0 + np.cos(np.pi * progress))


def clip_global_norm(
    grads: dict[str, np.ndarray], max_norm: float
) -> tuple[dict[str, np.ndarray], float]:
    """Scale all gradients so their joint L2 norm is at most max_norm."""
    total = 0.0
    for g in grads.values():
        total += float((g * g).sum())
    norm = float(np.sqrt(total))
    if norm <= max_norm or norm == 0.0:
        return grads, norm
    scale = max_norm / norm
    return {k: g * scale for k, g in grads.items()}, norm


class AdamW:
    """Decoupled-weight-decay Adam over a named parameter dict.

    Parameters are updated in place between steps; moment buffers are keyed
    by name so the update order (sorted names) is deterministic.
    """

    def __init__(self, params: dict[str, Tensor], config: TrainConfig):
        self.params = params
        self.config = config
        self.m = {k: np.zeros_like(p.data) for k, p in params.items()}
        self.v = {k: np.zeros_like(p.data) for k, p in params.items()}
        self.step_count = 0

    def step(self, grads: dict[str, np.ndarray], lr: float | None = None) -> None:
        cfg = self.config
        lr = cfg.lr if lr is None else lr
        self.step_count += 1
        t = self.step_count
        bias1 = 1.0 - cfg.beta1**t
        bias2 = 1.0 - cfg.beta2**t
        for name in sorted(self.params):
            p = self.params[name]
            g = grads.get(name)
            if g is None:
                continue
            if g.shape != p.data.shape:
                raise ShapeMismatchError(
                    f"gradient shape {g.shape} != parameter {name!r} shape {p.data.shape}"
                )
            m = self.m[name]
            v = self.v[name]
            m *= cfg.beta1
            m += (1.0 - cfg.beta1) * g
            v *= cfg.beta2
            v += (1.0 - cfg.beta2) * g * g
            m_hat = m / bias1
            v_hat = v / bias2
            p.data = p.data - lr * (m_hat / (np.sqrt(v_hat) + cfg.eps)) - lr * cfg.weight_decay * p.data
