"""Losses, optimizer, training loops, checkpoints."""

from .checkpoint import (
    Checkpoint,
    CheckpointHeader,
    CheckpointIoError,
    FormatVersionMismatchError,
    ShapeHeaderMismatchError,
    load_checkpoint,
    load_checkpoint_header,
    save_checkpoint,
)
from .loop import (
    BINARY_HEAD,
    REGRESSION_HEAD,
    EmptySplitError,
    FinetuneResult,
    HeadMismatchError,
    NonFiniteLossError,
    TaskHead,
    evaluate_checkpoint,
    finetune,
    mean_next_token_loss,
    predict_scores,
    pretrain,
    task_loss,
)
from .losses import (
    LabelOutOfDomainError,
    binary_cross_entropy_with_logits,
    cross_entropy_next_token,
    mean_squared_error,
    shifted_targets,
)
from .optim import AdamW, TrainConfig, clip_global_norm, lr_at_step

__all__ = [
    "AdamW",
    "BINARY_HEAD",
    "Checkpoint",
    "CheckpointHeader",
    "CheckpointIoError",
    "EmptySplitError",
    "FinetuneResult",
    "FormatVersionMismatchError",
    "HeadMismatchError",
    "LabelOutOfDomainError",
    "NonFiniteLossError",
    "REGRESSION_HEAD",
    "ShapeHeaderMismatchError",
    "TaskHead",
    "TrainConfig",
    "binary_cross_entropy_with_logits",
    "clip_global_norm",
    "cross_entropy_next_token",
    "evaluate_checkpoint",
    "finetune",
    "load_checkpoint",
    "load_checkpoint_header",
    "mean_next_token_loss",
    "mean_squared_error",
    "predict_scores",
    "pretrain",
    "save_checkpoint",
    "shifted_targets",
    "task_loss",
]
