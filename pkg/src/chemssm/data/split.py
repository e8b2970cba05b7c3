"""Scaffold-grouped train/valid/test splitting.

Records are grouped by their Murcko scaffold key so no scaffold spans two
splits. Groups are assigned largest-first to whichever split is currently
furthest below its target count, which keeps realized fractions within one
group of the targets. The seed shuffles record order before grouping, so
record order inside each split (and everything downstream that consumes it)
is seed-dependent while the invariants hold for every seed.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from ..chem.scaffold import scaffold_key_for_smiles
from .tasks import TaskDataset

SPLIT_NAMES = ("train", "valid", "test")


class EmptyDatasetError(ValueError):
    pass


@dataclass
class SplitAssignment:
    assignments: list[str]  # per record: "train" | "valid" | "test"
    seed: int
    ratios: tuple[float, float, float]
    n_groups: int
    largest_group: int

    def indices(self, split: str) -> list[int]:
        return [i for i, s in enumerate(self.assignments) if s == split]

    def realized_fractions(self) -> dict[str, float]:
        n = len(self.assignments)
        return {s: self.assignments.count(s) / n for s in SPLIT_NAMES}

    def counts(self) -> dict[str, int]:
        return {s: self.assignments.count(s) for s in SPLIT_NAMES}


def scaffold_split(
    dataset: TaskDataset,
    ratios: tuple[float, float, float] = (0.7, 0.1, 0.2),
    seed: int = 0,
) -> SplitAssignment:
    if len(dataset) == 0:
        raise EmptyDatasetError("cannot split an empty dataset")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1, got {ratios}")

    rng = np.random.default_rng(seed)
    order = rng.permutation(len(dataset))
    groups: dict[str, list[int]] = {}
    for idx in order:
        key = scaffold_key_for_smiles(dataset.records[idx].smiles).key
        groups.setdefault(key, []).append(int(idx))

    ordered = sorted(groups.items(), key=lambda item: (-len(item[1]), item[0]))
    n = len(dataset)
    targets = [r * n for r in ratios]
    counts = [0, 0, 0]
    assignments = [""] * n
    for _, members in ordered:
        deficits = [targets[s] - counts[s] for s in range(3)]
        chosen = max(range(3), key=lambda s: (deficits[s], -s))
        counts[chosen] += len(members)
        for idx in members:
            assignments[idx] = SPLIT_NAMES[chosen]

    largest = max(len(m) for _, m in ordered)
    result = SplitAssignment(assignments, seed, ratios, len(ordered), largest)
    fractions = result.realized_fractions()
    if min(fractions.values()) == 0.0:
        empty = [s for s, f in fractions.items() if f == 0.0]
        warnings.warn(
            f"scaffold split left {empty} empty (largest group {largest}/{n}); "
            f"realized fractions {fractions}",
            stacklevel=2,
        )
    return result


def save_split(assignment: SplitAssignment, path: Union[str, Path]) -> None:
    """Text export, one "record_index,split_name" line per record."""
    lines = [f"{i},{s}" for i, s in enumerate(assignment.assignments)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_split(path: Union[str, Path], seed: int = -1) -> SplitAssignment:
    assignments: list[str] = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        idx_text, _, split = line.partition(",")
        if split not in SPLIT_NAMES or int(idx_text) != len(assignments):
            raise ValueError(f"malformed split line {lineno}: {line!r}")
        assignments.append(split)
    if not assignments:
        raise EmptyDatasetError(f"split file {path} is empty")
    return SplitAssignment(assignments, seed, (0.0, 0.0, 0.0), n_groups=-1, largest_group=-1)
