"""SMILES lexer, token vocabulary, and integer encoding.

Tokenization is greedy longest-match: two-character halogens (Cl, Br) and
whole bracket expressions "[...]" are single tokens, ring closures may be
"%nn", everything else is one character. Concatenating the body token texts
always reproduces the input string byte for byte.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, Union


class SmilesSyntaxError(ValueError):
    """Malformed SMILES text. Carries the byte offset of the offending character."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class UnknownTokenError(KeyError):
    """A token id or text has no entry in the vocabulary."""


class TokenKind(enum.Enum):
    ATOM = "atom"
    BRACKET_ATOM = "bracket_atom"
    BOND = "bond"
    RING_BOND = "ring_bond"
    BRANCH_OPEN = "branch_open"
    BRANCH_CLOSE = "branch_close"
    DOT = "dot"
    SPECIAL = "special"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    id: int


# Organic-subset atoms writable without brackets.
TWO_CHAR_ATOMS = ("Cl", "Br")
PLAIN_ATOMS = frozenset("B C N O P S F I".split())
AROMATIC_ATOMS = frozenset("b c n o p s".split())
BOND_CHARS = frozenset("-=#:/\\")

# Bracket expressions: optional isotope, element, chirality, H count,
# charge, optional atom class.
_BRACKET_RE = re.compile(
    r"\[(?P<isotope>\d+)?"
    r"(?P<element>[A-Z][a-z]?|[bcnops])"
    r"(?P<chiral>@{1,2})?"
    r"(?P<hcount>H\d*)?"
    r"(?P<charge>\+\d+|-\d+|\++|-+)?"
    r"(?::\d+)?\]$"
)

PAD, BOS, EOS, UNK = "<pad>", "<bos>", "<eos>", "<unk>"
SPECIAL_TOKENS = (PAD, BOS, EOS, UNK)


class Vocabulary:
    """Bijective text<->id map with the four special tokens pinned to ids 0..3."""

    PAD_ID, BOS_ID, EOS_ID, UNK_ID = 0, 1, 2, 3

    def __init__(self, body_tokens: Iterable[str] = ()):
        tokens = list(SPECIAL_TOKENS)
        seen = set(tokens)
        for text in body_tokens:
            if not text:
                raise ValueError("empty token text")
            if text in seen:
                continue
            seen.add(text)
            tokens.append(text)
        self.tokens: tuple[str, ...] = tuple(tokens)
        self.index: dict[str, int] = {t: i for i, t in enumerate(self.tokens)}

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, text: str) -> bool:
        return text in self.index

    def id_of(self, text: str) -> int:
        """Id of a token text, falling back to <unk>."""
        return self.index.get(text, self.UNK_ID)

    def text_of(self, token_id: int) -> str:
        if not 0 <= token_id < len(self.tokens):
            raise UnknownTokenError(f"token id {token_id} outside vocabulary of size {len(self.tokens)}")
        return self.tokens[token_id]

    def save(self, path: Union[str, Path]) -> None:
        """Write one token per line; the line number is the id."""
        Path(path).write_text("\n".join(self.tokens) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Vocabulary":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        if tuple(lines[:4]) != SPECIAL_TOKENS:
            raise ValueError(
                f"vocabulary file {path} must start with the four special tokens {SPECIAL_TOKENS}"
            )
        return cls(lines[4:])


@dataclass(frozen=True)
class TokenSequence:
    tokens: tuple[Token, ...]

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    @property
    def ids(self) -> list[int]:
        return [t.id for t in self.tokens]

    @property
    def texts(self) -> list[str]:
        return [t.text for t in self.tokens]

    def body(self) -> list[Token]:
        return [t for t in self.tokens if t.kind is not TokenKind.SPECIAL]


def lex(smiles: str) -> list[tuple[TokenKind, str, int]]:
    """Split a SMILES string into (kind, text, offset) triples.

    Performs purely lexical validation: balanced brackets and branches,
    paired ring-closure digits, legal characters. Graph-level checks live in
    the molecule parser.
    """
    out: list[tuple[TokenKind, str, int]] = []
    open_rings: set[str] = set()
    depth = 0
    i, n = 0, len(smiles)
    while i < n:
        ch = smiles[i]
        if ch == "[":
            j = smiles.find("]", i + 1)
            if j < 0:
                raise SmilesSyntaxError("unterminated bracket atom", i)
            text = smiles[i : j + 1]
            if not _BRACKET_RE.match(text):
                raise SmilesSyntaxError(f"malformed bracket atom {text!r}", i)
            out.append((TokenKind.BRACKET_ATOM, text, i))
            i = j + 1
        elif ch == "]":
            raise SmilesSyntaxError("unmatched ']'", i)
        elif smiles[i : i + 2] in TWO_CHAR_ATOMS:
            out.append((TokenKind.ATOM, smiles[i : i + 2], i))
            i += 2
        elif ch in PLAIN_ATOMS or ch in AROMATIC_ATOMS:
            out.append((TokenKind.ATOM, ch, i))
            i += 1
        elif ch in BOND_CHARS:
            out.append((TokenKind.BOND, ch, i))
            i += 1
        elif ch == "%":
            digits = smiles[i + 1 : i + 3]
            if len(digits) < 2 or not digits.isdigit():
                raise SmilesSyntaxError("'%' ring closure needs two digits", i)
            _toggle_ring(open_rings, "%" + digits)
            out.append((TokenKind.RING_BOND, "%" + digits, i))
            i += 3
        elif ch.isdigit():
            _toggle_ring(open_rings, ch)
            out.append((TokenKind.RING_BOND, ch, i))
            i += 1
        elif ch == "(":
            depth += 1
            out.append((TokenKind.BRANCH_OPEN, ch, i))
            i += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise SmilesSyntaxError("unmatched ')'", i)
            out.append((TokenKind.BRANCH_CLOSE, ch, i))
            i += 1
        elif ch == ".":
            out.append((TokenKind.DOT, ch, i))
            i += 1
        else:
            raise SmilesSyntaxError(f"illegal character {ch!r}", i)
    if depth != 0:
        raise SmilesSyntaxError("unclosed branch '('", n)
    if open_rings:
        dangling = sorted(open_rings)[0]
        raise SmilesSyntaxError(f"dangling ring digit {dangling!r}", n)
    return out


def _toggle_ring(open_rings: set[str], digit: str) -> None:
    if digit in open_rings:
        open_rings.remove(digit)
    else:
        open_rings.add(digit)


def tokenize(smiles: str, vocab: Vocabulary) -> TokenSequence:
    """Tokenize a SMILES string, wrapping the body in <bos>/<eos>.

    Body tokens keep their exact source text; tokens missing from the
    vocabulary are assigned the <unk> id but their text is preserved, so
    detokenization by text always round-trips.
    """
    tokens = [Token(TokenKind.SPECIAL, BOS, Vocabulary.BOS_ID)]
    for kind, text, _ in lex(smiles):
        tokens.append(Token(kind, text, vocab.id_of(text)))
    tokens.append(Token(TokenKind.SPECIAL, EOS, Vocabulary.EOS_ID))
    return TokenSequence(tuple(tokens))


def detokenize(seq: Union[TokenSequence, Sequence[int]], vocab: Vocabulary) -> str:
    """Reassemble the SMILES string from token ids, skipping special tokens.

    Raises UnknownTokenError if any id is outside the vocabulary or is <unk>,
    since the original text is unrecoverable from the <unk> id.
    """
    ids = seq.ids if isinstance(seq, TokenSequence) else list(seq)
    parts = []
    for token_id in ids:
        text = vocab.text_of(token_id)
        if token_id == Vocabulary.UNK_ID:
            raise UnknownTokenError("cannot detokenize <unk>: source text was lost")
        if text in SPECIAL_TOKENS:
            continue
        parts.append(text)
    return "".join(parts)
