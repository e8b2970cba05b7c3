"""Pretraining, fine-tuning, and prediction.

Pretraining minimizes next-token cross-entropy over a SMILES corpus and
emits a property-agnostic checkpoint. Fine-tuning restores the backbone,
attaches a fresh task head on the pooled final hidden state, trains epoch
by epoch, keeps the parameters of the best validation epoch, and reports
the test metric with those. All randomness descends from the config seed.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Sequence, Union

import numpy as np

from ..chem.tokenizer import Vocabulary
from ..data.batching import Batch, make_batches
from ..data.corpus import build_vocab, load_corpus
from ..data.split import SplitAssignment
from ..data.tasks import BINARY, CONTINUOUS, TaskDataset
from ..metrics import METRIC_DIRECTION, MetricReport, compute_metric
from ..model.config import ModelConfig
from ..model.network import ModelParams, hidden_states, init_params, pool_final
from ..numerics.tensor import Tape, Tensor, backward, matmul, reshape, _sigmoid
from .checkpoint import Checkpoint
from .losses import (
    binary_cross_entropy_with_logits,
    cross_entropy_next_token,
    mean_squared_error,
    shifted_targets,
)
from .optim import AdamW, TrainConfig, clip_global_norm, lr_at_step


class NonFiniteLossError(FloatingPointError):
    pass


class HeadMismatchError(ValueError):
    pass


class EmptySplitError(ValueError):
    pass


LogFn = Callable[[dict], None]


def _log_line(log: LogFn | None, step: int, split: str, loss: float, metric: str = "") -> None:
    if log is not None:
        log({"step": step, "split": split, "loss": loss, "metric": metric})


# ---------------------------------------------------------------------------
# Task heads


BINARY_HEAD = "binary_classification"
REGRESSION_HEAD = "regression"

_HEAD_FOR_LABEL_KIND = {BINARY: BINARY_HEAD, CONTINUOUS: REGRESSION_HEAD}


@dataclass
class TaskHead:
    kind: str
    weight: Tensor  # [d_model, 1]
    bias: Tensor  # [1]
    label_mean: float = 0.0
    label_std: float = 1.0

    @classmethod
    def create(cls, kind: str, d_model: int, label_mean: float = 0.0, label_std: float = 1.0):
        if kind not in (BINARY_HEAD, REGRESSION_HEAD):
            raise HeadMismatchError(f"unknown head kind {kind!r}")
        return cls(
            kind,
            Tensor(np.zeros((d_model, 1)), requires_grad=True),
            Tensor(np.zeros(1), requires_grad=True),
            label_mean,
            label_std,
        )

    def named(self) -> dict[str, Tensor]:
        return {"head.weight": self.weight, "head.bias": self.bias}

    def descriptor(self) -> dict:
        return {"kind": self.kind, "label_mean": self.label_mean, "label_std": self.label_std}

    @classmethod
    def from_descriptor(cls, desc: dict, arrays: dict[str, np.ndarray]) -> "TaskHead":
        head = cls.create(desc["kind"], arrays["head.weight"].shape[0],
                          desc["label_mean"], desc["label_std"])
        head.weight.data = arrays["head.weight"].copy()
        head.bias.data = arrays["head.bias"].copy()
        return head

    def raw_output(self, pooled: Tensor) -> Tensor:
        """Head logit (binary) or standardized prediction (regression), [b]."""
        out = matmul(pooled, self.weight)
        out = reshape(out, (pooled.shape[0],)) + self.bias
        return out


def task_loss(head: TaskHead, pooled: Tensor, labels: np.ndarray) -> Tensor:
    """Sigmoid BCE on the head logit, or MSE on standardized labels."""
    raw = head.raw_output(pooled)
    if head.kind == BINARY_HEAD:
        return binary_cross_entropy_with_logits(raw, labels)
    standardized = (np.asarray(labels, dtype=np.float64) - head.label_mean) / head.label_std
    return mean_squared_error(raw, standardized)


# ---------------------------------------------------------------------------
# Pretraining


def pretrain(
    corpus: Union[str, Path, Sequence[str]],
    model_config: ModelConfig,
    train_config: TrainConfig,
    vocab: Vocabulary | None = None,
    log: LogFn | None = None,
    stop_below: float | None = None,
) -> Checkpoint:
    """Autoregressive next-token training; returns a property-agnostic checkpoint.

    stop_below, when set, ends training at the first step whose loss drops
    under it (still deterministic: the stop step is a function of seed+data).
    """
    smiles = list(load_corpus(corpus)) if isinstance(corpus, (str, Path)) else list(corpus)
    if vocab is None:
        vocab = build_vocab(smiles)
    config = replace(model_config, vocab_size=len(vocab))
    rng = np.random.default_rng(train_config.seed)
    params = init_params(config, rng)
    named = params.named()
    opt = AdamW(named, train_config)

    total_steps = _total_steps(train_config, n_records=len(smiles))
    step = 0
    epoch = 0
    done = False
    while step < total_steps and not done:
        batches = make_batches(
            smiles,
            vocab,
            train_config.batch_size,
            seed=int(rng.integers(0, 2**63 - 1)),
        )
        epoch += 1
        for batch in batches:
            if step >= total_steps:
                break
            step += 1
            loss = _lm_step(params, named, opt, batch, train_config, step, total_steps)
            _log_line(log, step, "train", loss)
            if stop_below is not None and loss < stop_below:
                done = True
                break
    return Checkpoint(
        model_config=config,
        vocab=vocab,
        params={k: t.data.copy() for k, t in named.items()},
        head=None,
        metadata={
            "stage": "pretrain",
            "seed": train_config.seed,
            "steps": step,
            "epochs": epoch,
            "corpus_size": len(smiles),
        },
    )


def _total_steps(config: TrainConfig, n_records: int) -> int:
    per_epoch = max(1, int(np.ceil(n_records / config.batch_size)))
    if config.max_steps is not None:
        return config.max_steps
    return config.epochs * per_epoch


def _lm_step(params, named, opt, batch: Batch, config: TrainConfig, step, total_steps) -> float:
    from ..model.network import forward

    with Tape() as tape:
        logits = forward(params, batch.token_ids)
        targets, mask = shifted_targets(batch.token_ids)
        loss = cross_entropy_next_token(logits, targets, mask)
    value = loss.item()
    if not np.isfinite(value):
        raise NonFiniteLossError(f"non-finite pretraining loss at step {step}")
    grads = backward(tape, loss, wrt=named.values())
    raw = {k: grads[t].data for k, t in named.items()}
    clipped, _ = clip_global_norm(raw, config.grad_clip)
    opt.step(clipped, lr=lr_at_step(config, step, total_steps))
    return value


def mean_next_token_loss(params: ModelParams, batches: Sequence[Batch]) -> float:
    """Dataset-level mean cross-entropy, weighted by non-pad positions."""
    total, count = 0.0, 0.0
    for batch in batches:
        from ..model.network import forward

        logits = forward(params, batch.token_ids)
        targets, mask = shifted_targets(batch.token_ids)
        loss = cross_entropy_next_token(logits, targets, mask)
        total += loss.item() * mask.sum()
        count += mask.sum()
    return total / count


# ---------------------------------------------------------------------------
# Fine-tuning


@dataclass
class FinetuneResult:
    checkpoint: Checkpoint
    valid_report: MetricReport
    test_report: MetricReport
    best_epoch: int
    metric: str


def finetune(
    base: Checkpoint,
    dataset: TaskDataset,
    split: SplitAssignment,
    train_config: TrainConfig,
    metric: str | None = None,
    head_only: bool = False,
    log: LogFn | None = None,
) -> FinetuneResult:
    """Supervised training on the train split with validation-based epoch selection."""
    head_kind = _HEAD_FOR_LABEL_KIND.get(dataset.label_kind)
    if head_kind is None:
        raise HeadMismatchError(f"no head for label kind {dataset.label_kind!r}")
    if base.head is not None and base.head["kind"] != head_kind:
        raise HeadMismatchError(
            f"base checkpoint head {base.head['kind']!r} does not match task {head_kind!r}"
        )
    metric = metric or _default_metric(dataset)
    _check_metric_compatible(metric, dataset.label_kind)

    parts = {name: split.indices(name) for name in ("train", "valid", "test")}
    for name, idx in parts.items():
        if not idx:
            raise EmptySplitError(f"{name} split is empty")
    if len(split.assignments) != len(dataset):
        raise EmptySplitError(
            f"split covers {len(split.assignments)} records, dataset has {len(dataset)}"
        )

    smiles = dataset.smiles()
    labels = np.asarray(dataset.labels())
    params = ModelParams.from_named(base.model_config, base.params)
    label_mean, label_std = 0.0, 1.0
    if dataset.label_kind == CONTINUOUS:
        train_labels = labels[parts["train"]]
        label_mean = float(train_labels.mean())
        label_std = float(train_labels.std()) or 1.0
    head = TaskHead.create(head_kind, base.model_config.d_model, label_mean, label_std)

    trainable = dict(head.named())
    if not head_only:
        trainable.update(params.named())
    opt = AdamW(trainable, train_config)
    rng = np.random.default_rng(train_config.seed)

    epochs = train_config.epochs or 1
    per_epoch = max(1, int(np.ceil(len(parts["train"]) / train_config.batch_size)))
    total_steps = epochs * per_epoch
    direction = METRIC_DIRECTION[metric]
    best_value = -np.inf
    best_epoch = 0
    best_arrays = _snapshot(params, head)
    step = 0
    for epoch in range(1, epochs + 1):
        batches = make_batches(
            [smiles[i] for i in parts["train"]],
            base.vocab,
            train_config.batch_size,
            seed=int(rng.integers(0, 2**63 - 1)),
            labels=[float(x) for x in labels[parts["train"]]],
        )
        for batch in batches:
            step += 1
            loss = _task_step(params, head, opt, trainable, batch, train_config, step, total_steps)
            _log_line(log, step, "train", loss)
        valid_value = _evaluate_split(params, head, smiles, labels, parts["valid"],
                                      base.vocab, train_config.batch_size, metric)
        _log_line(log, step, "valid", float("nan"), f"{metric}={valid_value:.6f}")
        if direction * valid_value > best_value:
            best_value = direction * valid_value
            best_epoch = epoch
            best_arrays = _snapshot(params, head)

    _restore(params, head, best_arrays)
    valid_value = _evaluate_split(params, head, smiles, labels, parts["valid"],
                                  base.vocab, train_config.batch_size, metric)
    test_value = _evaluate_split(params, head, smiles, labels, parts["test"],
                                 base.vocab, train_config.batch_size, metric)
    ckpt = Checkpoint(
        model_config=base.model_config,
        vocab=base.vocab,
        params={k: t.data.copy() for k, t in {**params.named(), **head.named()}.items()},
        head=head.descriptor(),
        metadata={
            "stage": "finetune",
            "task": dataset.name,
            "seed": train_config.seed,
            "best_epoch": best_epoch,
            "metric": metric,
        },
    )
    seed = train_config.seed
    return FinetuneResult(
        checkpoint=ckpt,
        valid_report=MetricReport(metric, valid_value, n=len(parts["valid"]), seed=seed),
        test_report=MetricReport(metric, test_value, n=len(parts["test"]), seed=seed),
        best_epoch=best_epoch,
        metric=metric,
    )


def _default_metric(dataset: TaskDataset) -> str:
    from ..data.tasks import TASKS

    if dataset.name in TASKS:
        return TASKS[dataset.name].metric
    return "roc_auc" if dataset.label_kind == BINARY else "mae"


def _check_metric_compatible(metric: str, label_kind: str) -> None:
    binary_metrics = ("roc_auc", "pr_auc")
    if label_kind == BINARY and metric not in binary_metrics:
        raise HeadMismatchError(f"metric {metric!r} incompatible with binary labels")
    if label_kind == CONTINUOUS and metric in binary_metrics:
        raise HeadMismatchError(f"metric {metric!r} incompatible with continuous labels")


def _task_step(params, head, opt, trainable, batch: Batch, config, step, total_steps) -> float:
    with Tape() as tape:
        hidden = hidden_states(params, batch.token_ids)
        pooled = pool_final(hidden, batch.lengths)
        loss = task_loss(head, pooled, batch.labels)
    value = loss.item()
    if not np.isfinite(value):
        raise NonFiniteLossError(f"non-finite fine-tuning loss at step {step}")
    grads = backward(tape, loss, wrt=trainable.values())
    raw = {k: grads[t].data for k, t in trainable.items()}
    clipped, _ = clip_global_norm(raw, config.grad_clip)
    opt.step(clipped, lr=lr_at_step(config, step, total_steps))
    return value


def _snapshot(params: ModelParams, head: TaskHead) -> dict[str, np.ndarray]:
    return {k: t.data.copy() for k, t in {**params.named(), **head.named()}.items()}


def _restore(params: ModelParams, head: TaskHead, arrays: dict[str, np.ndarray]) -> None:
    for k, t in {**params.named(), **head.named()}.items():
        t.data = arrays[k].copy()


def predict_scores(
    params: ModelParams,
    head: TaskHead,
    smiles: Sequence[str],
    vocab: Vocabulary,
    batch_size: int = 32,
) -> np.ndarray:
    """Per-record scores in input order: P(positive) or raw-scale prediction."""
    scores = np.zeros(len(smiles))
    for batch in make_batches(smiles, vocab, batch_size, shuffle=False):
        hidden = hidden_states(params, batch.token_ids)
        pooled = pool_final(hidden, batch.lengths)
        raw = head.raw_output(pooled).data
        if head.kind == BINARY_HEAD:
            out = _sigmoid(raw)
        else:
            out = raw * head.label_std + head.label_mean
        scores[batch.record_indices] = out
    return scores


def _evaluate_split(params, head, smiles, labels, indices, vocab, batch_size, metric) -> float:
    subset = [smiles[i] for i in indices]
    preds = predict_scores(params, head, subset, vocab, batch_size)
    return compute_metric(metric, preds, labels[indices]).value


def evaluate_checkpoint(
    ckpt: Checkpoint,
    dataset: TaskDataset,
    split: SplitAssignment,
    metric: str,
    split_name: str = "test",
) -> MetricReport:
    """Metric of a fine-tuned checkpoint on one split of a dataset."""
    if ckpt.head is None:
        raise HeadMismatchError("checkpoint has no task head; fine-tune first")
    _check_metric_compatible(metric, dataset.label_kind)
    expected = _HEAD_FOR_LABEL_KIND[dataset.label_kind]
    if ckpt.head["kind"] != expected:
        raise HeadMismatchError(
            f"checkpoint head {ckpt.head['kind']!r} does not match task {expected!r}"
        )
    backbone = {k: v for k, v in ckpt.params.items() if not k.startswith("head.")}
    params = ModelParams.from_named(ckpt.model_config, backbone)
    head = TaskHead.from_descriptor(ckpt.head, ckpt.params)
    indices = split.indices(split_name)
    if not indices:
        raise EmptySplitError(f"{split_name} split is empty")
    labels = np.asarray(dataset.labels())
    value = _evaluate_split(
        params, head, dataset.smiles(), labels, indices, ckpt.vocab, 32, metric
    )
    return MetricReport(metric, value, n=len(indices), seed=ckpt.metadata.get("seed", -1))
