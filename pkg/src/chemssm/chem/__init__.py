"""SMILES parsing: tokens, vocabularies, molecular graphs, scaffold keys."""

from .graph import Atom, Bond, MoleculeGraph, SmilesSemanticError, parse_molecule
from .scaffold import (
    EMPTY_SCAFFOLD,
    ScaffoldKey,
    canonical_key,
    murcko_scaffold,
    scaffold_key_for_smiles,
)
from .tokenizer import (
    BOS,
    EOS,
    PAD,
    SPECIAL_TOKENS,
    UNK,
    SmilesSyntaxError,
    Token,
    TokenKind,
    TokenSequence,
    UnknownTokenError,
    Vocabulary,
    detokenize,
    lex,
    tokenize,
)

__all__ = [
    "Atom",
    "Bond",
    "BOS",
    "EOS",
    "EMPTY_SCAFFOLD",
    "MoleculeGraph",
    "PAD",
    "ScaffoldKey",
    "SmilesSemanticError",
    "SmilesSyntaxError",
    "SPECIAL_TOKENS",
    "Token",
    "TokenKind",
    "TokenSequence",
    "UNK",
    "UnknownTokenError",
    "Vocabulary",
    "canonical_key",
    "detokenize",
    "lex",
    "murcko_scaffold",
    "parse_molecule",
    "scaffold_key_for_smiles",
    "tokenize",
]
