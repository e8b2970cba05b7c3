"""Labeled property-prediction datasets and the task registry.

Task CSVs are UTF-8 with a header row; SMILES and label column names are
configurable (defaults "Drug" and "Y"). Rows whose SMILES fails to parse
are excluded and reported, not fatal.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

from ..chem.graph import SmilesSemanticError, parse_molecule
from ..chem.tokenizer import SmilesSyntaxError


class MissingColumnError(KeyError):
    pass


class LabelParseError(ValueError):
    def __init__(self, message: str, row: int):
        super().__init__(f"{message} (csv row {row})")
        self.row = row


BINARY = "binary"
CONTINUOUS = "continuous"


@dataclass(frozen=True)
class TaskSpec:
    name: str
    expected_size: int
    label_kind: str
    metric: str


# Benchmark registry: dataset sizes, label kinds, and the evaluation metric
# conventionally reported for each task. Kept as data so new tasks are a row,
# not code.
TASKS: dict[str, TaskSpec] = {
    spec.name: spec
    for spec in [
        TaskSpec("caco2", 906, CONTINUOUS, "mae"),
        TaskSpec("hia", 578, BINARY, "roc_auc"),
        TaskSpec("pgp", 1212, BINARY, "roc_auc"),
        TaskSpec("bioav", 640, BINARY, "roc_auc"),
        TaskSpec("lipo", 4200, CONTINUOUS, "mae"),
        TaskSpec("aqsol", 9982, CONTINUOUS, "mae"),
        TaskSpec("bbb", 1975, BINARY, "roc_auc"),
        TaskSpec("ppbr", 1797, CONTINUOUS, "mae"),
        TaskSpec("vd", 1130, CONTINUOUS, "spearman"),
        TaskSpec("cyp2d6_inhibition", 13130, BINARY, "pr_auc"),
        TaskSpec("cyp3a4_inhibition", 12328, BINARY, "pr_auc"),
        TaskSpec("cyp2c9_inhibition", 12092, BINARY, "pr_auc"),
        TaskSpec("cyp2d6_substrate", 664, BINARY, "pr_auc"),
        TaskSpec("cyp3a4_substrate", 667, BINARY, "roc_auc"),
        TaskSpec("cyp2c9_substrate", 666, BINARY, "pr_auc"),
        TaskSpec("half_life", 667, CONTINUOUS, "spearman"),
        TaskSpec("cl_hepa", 1020, CONTINUOUS, "spearman"),
        TaskSpec("cl_micro", 1102, CONTINUOUS, "spearman"),
        TaskSpec("herg", 648, BINARY, "roc_auc"),
        TaskSpec("ames", 7255, BINARY, "roc_auc"),
        TaskSpec("dili", 475, BINARY, "roc_auc"),
        TaskSpec("ld50", 7385, CONTINUOUS, "mae"),
    ]
}


@dataclass(frozen=True)
class TaskRecord:
    smiles: str
    label: float


@dataclass
class TaskDataset:
    name: str
    records: list[TaskRecord]
    label_kind: str
    expected_size: int | None = None
    excluded: list[tuple[int, str]] = field(default_factory=list)  # (csv row, reason)

    def __len__(self) -> int:
        return len(self.records)

    def smiles(self) -> list[str]:
        return [r.smiles for r in self.records]

    def labels(self) -> list[float]:
        return [r.label for r in self.records]


def load_task_csv(
    path: Union[str, Path],
    label_kind: str,
    smiles_col: str = "Drug",
    label_col: str = "Y",
    name: str | None = None,
    size_tolerance: float = 0.02,
) -> TaskDataset:
    """Load and type-check a labeled task CSV.

    When `name` matches a registry entry the loaded size is checked against
    the registered one (warning beyond `size_tolerance`, relative).
    """
    if label_kind not in (BINARY, CONTINUOUS):
        raise ValueError(f"label_kind must be {BINARY!r} or {CONTINUOUS!r}, got {label_kind!r}")
    records: list[TaskRecord] = []
    excluded: list[tuple[int, str]] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in (smiles_col, label_col):
            if col not in header:
                raise MissingColumnError(f"column {col!r} not in header {header}")
        for row_num, row in enumerate(reader, start=2):
            smiles = (row[smiles_col] or "").strip()
            raw_label = (row[label_col] or "").strip()
            try:
                label = float(raw_label)
            except ValueError:
                raise LabelParseError(f"cannot parse label {raw_label!r}", row_num) from None
            if label != label:  # NaN
                raise LabelParseError("label is NaN", row_num)
            if label_kind == BINARY and label not in (0.0, 1.0):
                raise LabelParseError(f"binary label must be 0 or 1, got {label}", row_num)
            try:
                parse_molecule(smiles)
            except (SmilesSyntaxError, SmilesSemanticError) as err:
                excluded.append((row_num, str(err)))
                continue
            records.append(TaskRecord(smiles, label))

    expected = TASKS[name].expected_size if name in TASKS else None
    dataset = TaskDataset(name or Path(path).stem, records, label_kind, expected, excluded)
    if expected is not None and abs(len(records) - expected) > size_tolerance * expected:
        warnings.warn(
            f"task {dataset.name!r}: loaded {len(records)} records, registry expects "
            f"{expected} (tolerance {size_tolerance:.0%})",
            stacklevel=2,
        )
    return dataset
