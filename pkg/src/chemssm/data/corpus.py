"""Corpus ingestion and vocabulary building.

Corpus files are UTF-8 text with one SMILES per line; blank lines and lines
starting with '#' are skipped. Lines that fail lexical validation are
tallied and dropped rather than aborting the load.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Union

from ..chem.tokenizer import SmilesSyntaxError, Vocabulary, lex


class EmptyCorpusError(ValueError):
    pass


@dataclass
class CorpusReport:
    smiles: list[str] = field(default_factory=list)
    n_lines: int = 0
    n_comments: int = 0
    n_blank: int = 0
    skipped: list[tuple[int, str]] = field(default_factory=list)  # (line no, reason)

    @property
    def count(self) -> int:
        return len(self.smiles)

    def __iter__(self):
        return iter(self.smiles)

    def __len__(self) -> int:
        return len(self.smiles)


def load_corpus(path: Union[str, Path]) -> CorpusReport:
    """Read a one-SMILES-per-line corpus, order preserved."""
    report = CorpusReport()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            report.n_lines += 1
            line = raw.strip()
            if not line:
                report.n_blank += 1
                continue
            if line.startswith("#"):
                report.n_comments += 1
                continue
            try:
                lex(line)
            except SmilesSyntaxError as err:
                report.skipped.append((lineno, str(err)))
                continue
            report.smiles.append(line)
    return report


def build_vocab(corpus: Iterable[str]) -> Vocabulary:
    """Specials plus every distinct body token, in first-appearance order."""
    body: list[str] = []
    seen: set[str] = set()
    empty = True
    for smiles in corpus:
        empty = False
        for _, text, _ in lex(smiles):
            if text not in seen:
                seen.add(text)
                body.append(text)
    if empty:
        raise EmptyCorpusError("cannot build a vocabulary from an empty corpus")
    return Vocabulary(body)
