"""Architecture hyperparameters."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int
    d_model: int = 128
    n_layers: int = 4
    d_state: int = 16
    d_conv: int = 4
    expand: int = 2
    dt_min: float = 1e-3
    dt_max: float = 1e-1

    def __post_init__(self):
        for name in ("vocab_size", "d_model", "n_layers", "d_state", "d_conv", "expand"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.vocab_size < 5:
            raise ValueError("vocab_size must cover the 4 special tokens plus at least one more")
        if not 0 < self.dt_min < self.dt_max:
            raise ValueError(f"need 0 < dt_min < dt_max, got {self.dt_min}, {self.dt_max}")

    @property
    def d_inner(self) -> int:
        return self.expand * self.d_model

    @property
    def dt_rank(self) -> int:
        return max(1, math.ceil(self.d_model / 16))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        return cls(**data)


def parameter_count(config: ModelConfig) -> int:
    """Closed-form total number of learnable scalars for a config."""
    d, e = config.d_model, config.d_inner
    r, n, w = config.dt_rank, config.d_state, config.d_conv
    per_layer = (
        d  # norm gain
        + d * 2 * e  # input projection to (main, gate)
        + e * w  # depthwise conv kernel
        + e * (r + 2 * n)  # selection projections for step size, B, C
        + r * e  # step-size up-projection
        + e  # step-size bias
        + e * n  # decay exponents
        + e  # skip scale
        + e * d  # output projection
    )
    return config.vocab_size * d + config.n_layers * per_layer + d
