"""Selective state-space sequence model."""

from .config import ModelConfig, parameter_count
from .network import (
    HiddenState,
    LayerParams,
    LengthOutOfRangeError,
    ModelParams,
    TokenOutOfRangeError,
    forward,
    hidden_states,
    init_params,
    mamba_block,
    pool_final,
)
from .ssm import (
    discretize,
    scan_with_state,
    selective_scan_parallel,
    selective_scan_sequential,
)

__all__ = [
    "HiddenState",
    "LayerParams",
    "LengthOutOfRangeError",
    "ModelConfig",
    "ModelParams",
    "TokenOutOfRangeError",
    "discretize",
    "forward",
    "hidden_states",
    "init_params",
    "mamba_block",
    "parameter_count",
    "pool_final",
    "scan_with_state",
    "selective_scan_parallel",
    "selective_scan_sequential",
]
