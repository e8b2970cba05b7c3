"""Tokenized, right-padded minibatches."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..chem.tokenizer import Vocabulary, tokenize


class SequenceTooLongError(ValueError):
    pass


@dataclass
class Batch:
    token_ids: np.ndarray  # [b, l] int64, right-padded with <pad>
    mask: np.ndarray  # [b, l] float64, 1.0 on real tokens
    lengths: np.ndarray  # [b] int64, count of real tokens per row
    record_indices: np.ndarray  # [b] int64, positions in the source list
    labels: np.ndarray | None = None  # [b] float64

    @property
    def size(self) -> int:
        return self.token_ids.shape[0]


def encode_sequences(
    smiles: Sequence[str], vocab: Vocabulary, max_len: int, truncate: bool
) -> list[list[int]]:
    encoded = []
    for s in smiles:
        ids = tokenize(s, vocab).ids
        if len(ids) > max_len:
            if not truncate:
                raise SequenceTooLongError(
                    f"sequence of {len(ids)} tokens exceeds max_len={max_len}: {s!r}"
                )
            ids = ids[:max_len]
        encoded.append(ids)
    return encoded


def make_batches(
    smiles: Sequence[str],
    vocab: Vocabulary,
    batch_size: int,
    max_len: int = 256,
    seed: int = 0,
    labels: Sequence[float] | None = None,
    shuffle: bool = True,
    truncate: bool = False,
) -> list[Batch]:
    """Shuffle (seeded), chunk, tokenize, and right-pad one epoch of data.

    Every record appears exactly once; padding rows carry mask 0 and never
    reach the loss.
    """
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    if labels is not None and len(labels) != len(smiles):
        raise ValueError(f"{len(labels)} labels for {len(smiles)} records")
    encoded = encode_sequences(smiles, vocab, max_len, truncate)
    order = np.arange(len(smiles))
    if shuffle:
        order = np.random.default_rng(seed).permutation(len(smiles))
    batches: list[Batch] = []
    for start in range(0, len(order), batch_size):
        chunk = order[start : start + batch_size]
        rows = [encoded[i] for i in chunk]
        width = max(len(r) for r in rows)
        ids = np.full((len(rows), width), Vocabulary.PAD_ID, dtype=np.int64)
        mask = np.zeros((len(rows), width))
        lengths = np.zeros(len(rows), dtype=np.int64)
        for r, row in enumerate(rows):
            ids[r, : len(row)] = row
            mask[r, : len(row)] = 1.0
            lengths[r] = len(row)
        batch_labels = None
        if labels is not None:
            batch_labels = np.asarray([labels[i] for i in chunk], dtype=np.float64)
        batches.append(Batch(ids, mask, lengths, chunk.astype(np.int64), batch_labels))
    return batches
