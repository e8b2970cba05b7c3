"""Command-line pipeline: vocabulary, pretraining, splits, fine-tuning, evaluation.

Exit codes are a stable contract: 0 success, 2 I/O failure, 3 parse or
validation failure, 4 numeric failure, 5 configuration mismatch. Every
command is deterministic given its flags and seed; a manifest line recording
config, input digests, and output digests is appended per run.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
import time
from pathlib import Path

from . import __version__
from .chem.graph import SmilesSemanticError, parse_molecule
from .chem.scaffold import murcko_scaffold
from .chem.tokenizer import SmilesSyntaxError, UnknownTokenError, Vocabulary, lex, tokenize
from .data.batching import SequenceTooLongError
from .data.corpus import EmptyCorpusError, build_vocab, load_corpus
from .data.split import EmptyDatasetError, load_split, save_split, scaffold_split
from .data.tasks import (
    BINARY,
    CONTINUOUS,
    TASKS,
    LabelParseError,
    MissingColumnError,
    load_task_csv,
)
from .metrics import METRIC_NAMES, MetricReport, aggregate
from .model.config import ModelConfig
from .numerics.tensor import NonFiniteError, NonFiniteGradientError
from .train.checkpoint import (
    CheckpointIoError,
    FormatVersionMismatchError,
    ShapeHeaderMismatchError,
    load_checkpoint,
    save_checkpoint,
)
from .train.loop import (
    EmptySplitError,
    HeadMismatchError,
    NonFiniteLossError,
    evaluate_checkpoint,
    finetune,
    pretrain,
)
from .train.optim import TrainConfig

EXIT_OK = 0
EXIT_IO = 2
EXIT_PARSE = 3
EXIT_NUMERIC = 4
EXIT_CONFIG = 5

_IO_ERRORS = (OSError, CheckpointIoError)
_PARSE_ERRORS = (
    SmilesSyntaxError,
    SmilesSemanticError,
    UnknownTokenError,
    EmptyCorpusError,
    EmptyDatasetError,
    EmptySplitError,
    LabelParseError,
    MissingColumnError,
    SequenceTooLongError,
    FormatVersionMismatchError,
    ShapeHeaderMismatchError,
    ValueError,
    KeyError,
)
_NUMERIC_ERRORS = (NonFiniteLossError, NonFiniteError, NonFiniteGradientError)
_CONFIG_ERRORS = (HeadMismatchError,)


# ---------------------------------------------------------------------------
# Config files: flat "key = value" lines mirroring ModelConfig/TrainConfig.


def read_config_file(path: str | Path) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        values[key.strip()] = value.strip()
    return values


_MODEL_FIELDS = {f.name: f for f in dataclasses.fields(ModelConfig)}
_TRAIN_FIELDS = {f.name: f for f in dataclasses.fields(TrainConfig)}


def _coerce(field: dataclasses.Field, text: str):
    if text.lower() in ("none", "null"):
        return None
    if field.type in ("int", "int | None"):
        return int(text)
    if field.type == "float":
        return float(text)
    return text


def build_configs(
    file_values: dict[str, str], overrides: dict[str, object]
) -> tuple[dict, dict]:
    """Sort flat key=value pairs into ModelConfig/TrainConfig kwargs."""
    model_kwargs: dict = {}
    train_kwargs: dict = {}
    for key, text in file_values.items():
        if key in _MODEL_FIELDS:
            model_kwargs[key] = _coerce(_MODEL_FIELDS[key], text)
        elif key in _TRAIN_FIELDS:
            train_kwargs[key] = _coerce(_TRAIN_FIELDS[key], text)
        else:
            raise ValueError(f"unknown config key {key!r}")
    for key, value in overrides.items():
        if value is None:
            continue
        if key in _MODEL_FIELDS:
            model_kwargs[key] = value
        elif key in _TRAIN_FIELDS:
            train_kwargs[key] = value
        else:
            raise ValueError(f"unknown config override {key!r}")
    return model_kwargs, train_kwargs


# ---------------------------------------------------------------------------
# Manifests


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(
    directory: Path,
    command: str,
    config: dict,
    seeds: list[int],
    inputs: dict[str, Path],
    outputs: list[Path],
    started: float,
) -> None:
    entry = {
        "command": command,
        "config": config,
        "seeds": seeds,
        "inputs": {name: {"path": str(p), "sha256": _sha256(p)} for name, p in inputs.items()},
        "outputs": [{"path": str(p), "sha256": _sha256(p)} for p in outputs],
        "wall_clock_s": round(time.time() - started, 3),
        "artifact_version": __version__,
    }
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / "manifest.jsonl", "a", encoding="utf-8") as fh:
        fh.write(json.dumps(entry, sort_keys=True) + "\n")


class _TrainLogWriter:
    def __init__(self, path: Path):
        self.path = path
        self.fh = open(path, "w", encoding="utf-8")

    def __call__(self, record: dict) -> None:
        self.fh.write(json.dumps(record, sort_keys=True) + "\n")

    def close(self) -> None:
        self.fh.close()


# ---------------------------------------------------------------------------
# Commands


def cmd_build_vocab(args) -> int:
    started = time.time()
    report = load_corpus(args.corpus)
    vocab = build_vocab(report.smiles)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    vocab.save(out)
    print(f"vocabulary: {len(vocab)} tokens from {report.count} molecules -> {out}")
    if report.skipped:
        print(f"skipped {len(report.skipped)} unparsable corpus lines", file=sys.stderr)
    write_manifest(
        out.parent, "build-vocab", {"corpus": str(args.corpus)}, [],
        {"corpus": Path(args.corpus)}, [out], started,
    )
    return EXIT_OK


def cmd_pretrain(args) -> int:
    started = time.time()
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    file_values = read_config_file(args.config) if args.config else {}
    model_kwargs, train_kwargs = build_configs(
        file_values,
        {
            "d_model": args.d_model,
            "n_layers": args.n_layers,
            "d_state": args.d_state,
            "max_steps": args.steps,
            "epochs": args.epochs,
            "batch_size": args.batch_size,
            "lr": args.lr,
            "seed": args.seed,
        },
    )
    model_kwargs.setdefault("vocab_size", 5)  # replaced by the real vocab below
    train_kwargs.setdefault("max_steps", 1000)
    model_config = ModelConfig(**model_kwargs)
    train_config = TrainConfig(**train_kwargs)

    vocab = Vocabulary.load(args.vocab) if args.vocab else None
    inputs = {"corpus": Path(args.corpus)}
    if args.vocab:
        inputs["vocab"] = Path(args.vocab)

    log = _TrainLogWriter(out_dir / "train_log.txt")
    try:
        ckpt = pretrain(args.corpus, model_config, train_config, vocab=vocab, log=log)
    finally:
        log.close()
    ckpt_path = out_dir / "checkpoint.bin"
    save_checkpoint(ckpt, ckpt_path)
    outputs = [ckpt_path, log.path]
    if vocab is None:
        vocab_path = out_dir / "vocab.txt"
        ckpt.vocab.save(vocab_path)
        outputs.append(vocab_path)
    print(
        f"pretrained {ckpt.metadata['steps']} steps on {ckpt.metadata['corpus_size']} molecules "
        f"-> {ckpt_path}"
    )
    write_manifest(
        out_dir, "pretrain",
        {"model": model_config.to_dict(), "train": train_config.to_dict()},
        [train_config.seed], inputs, outputs, started,
    )
    return EXIT_OK


def _load_dataset(args):
    label_kind = args.label_kind
    name = args.name
    if name and name in TASKS and label_kind is None:
        label_kind = TASKS[name].label_kind
    if label_kind is None:
        raise ValueError("pass --label-kind or a registered --name")
    return load_task_csv(
        args.task_csv,
        label_kind,
        smiles_col=args.smiles_col,
        label_col=args.label_col,
        name=name,
    )


def cmd_split(args) -> int:
    started = time.time()
    dataset = _load_dataset(args)
    assignment = scaffold_split(dataset, seed=args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_split(assignment, out)
    fractions = assignment.realized_fractions()
    print(
        f"split {len(dataset)} records over {assignment.n_groups} scaffold groups -> {out} "
        f"(train/valid/test = {fractions['train']:.3f}/{fractions['valid']:.3f}/"
        f"{fractions['test']:.3f})"
    )
    if len(dataset.excluded) > 0:
        print(f"excluded {len(dataset.excluded)} unparsable rows", file=sys.stderr)
    write_manifest(
        out.parent, "split", {"task_csv": str(args.task_csv), "seed": args.seed},
        [args.seed], {"task_csv": Path(args.task_csv)}, [out], started,
    )
    return EXIT_OK


def cmd_finetune(args) -> int:
    started = time.time()
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    base = load_checkpoint(args.base_ckpt)
    dataset = _load_dataset(args)
    seeds = [int(s) for s in str(args.seeds).split(",")] if args.seeds else [args.seed]

    file_values = read_config_file(args.config) if args.config else {}
    _, train_kwargs = build_configs(
        file_values,
        {"epochs": args.epochs, "batch_size": args.batch_size, "lr": args.lr},
    )
    train_kwargs.setdefault("epochs", 10)
    train_kwargs.pop("max_steps", None)

    metric = args.metric
    if metric is None and dataset.name in TASKS:
        metric = TASKS[dataset.name].metric

    fixed_split = load_split(args.split) if args.split else None
    valid_reports: list[MetricReport] = []
    test_reports: list[MetricReport] = []
    outputs: list[Path] = []
    for seed in seeds:
        split = fixed_split or scaffold_split(dataset, seed=seed)
        config = TrainConfig(**{**train_kwargs, "seed": seed})
        log = _TrainLogWriter(out_dir / f"train_log.seed{seed}.txt")
        try:
            result = finetune(
                base, dataset, split, config, metric=metric, head_only=args.head_only, log=log
            )
        finally:
            log.close()
        ckpt_path = out_dir / f"checkpoint.seed{seed}.bin"
        save_checkpoint(result.checkpoint, ckpt_path)
        outputs.extend([ckpt_path, log.path])
        valid_reports.append(result.valid_report)
        test_reports.append(result.test_report)
        print(
            f"seed {seed}: best epoch {result.best_epoch}, "
            f"valid {result.metric}={result.valid_report.value:.6f}, "
            f"test {result.metric}={result.test_report.value:.6f}"
        )

    report_path = out_dir / "reports.txt"
    with open(report_path, "w", encoding="utf-8") as fh:
        for report in test_reports:
            fh.write(report.line(dataset.name) + "\n")
    outputs.append(report_path)
    if len(test_reports) >= 2:
        agg = aggregate(test_reports)
        print(f"{dataset.name} {agg.metric} over {agg.n_seeds} seeds: {agg.render()}")
    write_manifest(
        out_dir, "finetune",
        {"task": dataset.name, "metric": metric, "train": {**train_kwargs}},
        seeds,
        {"base_ckpt": Path(args.base_ckpt), "task_csv": Path(args.task_csv)},
        outputs, started,
    )
    return EXIT_OK


def cmd_evaluate(args) -> int:
    started = time.time()
    ckpt = load_checkpoint(args.ckpt)
    dataset = _load_dataset(args)
    split = load_split(args.split)
    report = evaluate_checkpoint(ckpt, dataset, split, args.metric, split_name=args.split_name)
    line = report.line(dataset.name)
    print(line)
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(line + "\n", encoding="utf-8")
        write_manifest(
            out.parent, "evaluate", {"metric": args.metric, "split_name": args.split_name},
            [], {"ckpt": Path(args.ckpt), "task_csv": Path(args.task_csv),
                 "split": Path(args.split)}, [out], started,
        )
    return EXIT_OK


def cmd_tokenize(args) -> int:
    vocab = Vocabulary.load(args.vocab) if args.vocab else Vocabulary(
        text for _, text, _ in lex(args.smiles)
    )
    seq = tokenize(args.smiles, vocab)
    for token in seq:
        print(f"{token.id}\t{token.kind.value}\t{token.text}")
    return EXIT_OK


def cmd_scaffold(args) -> int:
    key = murcko_scaffold(parse_molecule(args.smiles))
    kind = "acyclic" if key.is_acyclic else "ring-bearing"
    print(f"{kind}\t{key.key}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chemssm",
        description="Sequence-model pipeline for molecular property prediction.",
    )
    parser.add_argument("--version", action="version", version=f"chemssm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-vocab", help="build a token vocabulary from a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_vocab)

    p = sub.add_parser("pretrain", help="self-supervised next-token pretraining")
    p.add_argument("--corpus", required=True)
    p.add_argument("--vocab", default=None)
    p.add_argument("--config", default=None, help="key = value config file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--d-model", dest="d_model", type=int, default=None)
    p.add_argument("--n-layers", dest="n_layers", type=int, default=None)
    p.add_argument("--d-state", dest="d_state", type=int, default=None)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch-size", dest="batch_size", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.set_defaults(func=cmd_pretrain)

    def add_dataset_flags(p):
        p.add_argument("--task-csv", dest="task_csv", required=True)
        p.add_argument("--label-kind", dest="label_kind", choices=(BINARY, CONTINUOUS),
                       default=None)
        p.add_argument("--name", default=None, help="registry name (sets label kind/metric)")
        p.add_argument("--smiles-col", dest="smiles_col", default="Drug")
        p.add_argument("--label-col", dest="label_col", default="Y")

    p = sub.add_parser("split", help="scaffold-grouped train/valid/test split")
    add_dataset_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="split file path")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("finetune", help="fine-tune a pretrained checkpoint on a task")
    p.add_argument("--base-ckpt", dest="base_ckpt", required=True)
    add_dataset_flags(p)
    p.add_argument("--split", default=None, help="split file; derived per seed when omitted")
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seeds", default=None, help="comma-separated list for multi-seed runs")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--metric", choices=METRIC_NAMES, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch-size", dest="batch_size", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--head-only", dest="head_only", action="store_true")
    p.set_defaults(func=cmd_finetune)

    p = sub.add_parser("evaluate", help="evaluate a fine-tuned checkpoint")
    p.add_argument("--ckpt", required=True)
    add_dataset_flags(p)
    p.add_argument("--split", required=True)
    p.add_argument("--split-name", dest="split_name", default="test",
                   choices=("train", "valid", "test"))
    p.add_argument("--metric", choices=METRIC_NAMES, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("tokenize", help="print the token stream of one SMILES")
    p.add_argument("--smiles", required=True)
    p.add_argument("--vocab", default=None)
    p.set_defaults(func=cmd_tokenize)

    p = sub.add_parser("scaffold", help="print the scaffold key of one SMILES")
    p.add_argument("--smiles", required=True)
    p.set_defaults(func=cmd_scaffold)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _NUMERIC_ERRORS as err:
        print(f"numeric failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    except _CONFIG_ERRORS as err:
        print(f"configuration mismatch: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except _IO_ERRORS as err:
        print(f"io error: {err}", file=sys.stderr)
        return EXIT_IO
    except _PARSE_ERRORS as err:
        print(f"invalid input: {err}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
