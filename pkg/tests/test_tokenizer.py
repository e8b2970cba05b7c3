"""Lexer, vocabulary, and round-trip behavior."""

import pytest

from chemssm.chem.tokenizer import (
    SmilesSyntaxError,
    TokenKind,
    UnknownTokenError,
    Vocabulary,
    detokenize,
    lex,
    tokenize,
)


def test_simple_chain(small_vocab):
    seq = tokenize("CCO", small_vocab)
    assert seq.texts == ["<bos>", "C", "C", "O", "<eos>"]
    assert seq.ids[0] == Vocabulary.BOS_ID
    assert seq.ids[-1] == Vocabulary.EOS_ID


def test_empty_string(small_vocab):
    seq = tokenize("", small_vocab)
    assert seq.texts == ["<bos>", "<eos>"]
    assert detokenize(seq, small_vocab) == ""


def test_two_char_halogen_longest_match(small_vocab):
    seq = tokenize("Clc1ccccc1", small_vocab)
    assert seq.texts == ["<bos>", "Cl", "c", "1", "c", "c", "c", "c", "c", "1", "<eos>"]


def test_bracket_atom_single_token(small_vocab):
    seq = tokenize("[nH]1cccc1", small_vocab)
    assert seq.texts[1] == "[nH]"
    assert seq.tokens[1].kind is TokenKind.BRACKET_ATOM


def test_percent_ring_digit(small_vocab):
    kinds = {text: kind for kind, text, _ in lex("C%12CCCCCCCCCCC%12")}
    assert kinds["%12"] is TokenKind.RING_BOND


def test_detokenize_is_concatenation(small_vocab):
    seq = tokenize("ClBr", small_vocab)
    assert detokenize(seq, small_vocab) == "ClBr"


def test_unknown_atom_maps_to_unk_but_text_survives():
    vocab = Vocabulary(["C"])
    seq = tokenize("CP", vocab)
    assert seq.ids[2] == Vocabulary.UNK_ID
    assert seq.texts[2] == "P"
    with pytest.raises(UnknownTokenError):
        detokenize(seq, vocab)


def test_detokenize_rejects_out_of_range(small_vocab):
    with pytest.raises(UnknownTokenError):
        detokenize([1, 999, 2], small_vocab)


@pytest.mark.parametrize(
    "bad,offset",
    [
        ("C(C", 3),  # unclosed branch reported at end
        ("C)C", 1),
        ("C[NH", 1),
        ("C1CC", 4),  # dangling ring digit reported at end
        ("C%1C", 1),
        ("CQ", 1),
        ("C]C", 1),
    ],
)
def test_syntax_errors_with_offsets(bad, offset):
    with pytest.raises(SmilesSyntaxError) as err:
        lex(bad)
    assert err.value.offset == offset


def test_ring_digit_recycling_is_legal():
    texts = [t for _, t, _ in lex("C1CC1C1CC1")]
    assert texts.count("1") == 4


def test_vocab_specials_pinned(small_vocab):
    assert small_vocab.tokens[:4] == ("<pad>", "<bos>", "<eos>", "<unk>")
    assert small_vocab.id_of("<pad>") == 0
    assert small_vocab.id_of("C") >= 4


def test_vocab_bijection(small_vocab):
    for i, text in enumerate(small_vocab.tokens):
        assert small_vocab.index[text] == i
        assert small_vocab.text_of(i) == text


def test_vocab_file_round_trip(tmp_path, small_vocab):
    path = tmp_path / "vocab.txt"
    small_vocab.save(path)
    loaded = Vocabulary.load(path)
    assert loaded.tokens == small_vocab.tokens
    lines = path.read_text().splitlines()
    assert lines[:4] == ["<pad>", "<bos>", "<eos>", "<unk>"]


def test_vocab_file_rejects_missing_specials(tmp_path):
    path = tmp_path / "vocab.txt"
    path.write_text("C\nO\n")
    with pytest.raises(ValueError):
        Vocabulary.load(path)


def test_corpus_round_trip_property(corpus_1k, corpus_1k_vocab):
    for smiles in corpus_1k:
        seq = tokenize(smiles, corpus_1k_vocab)
        assert detokenize(seq, corpus_1k_vocab) == smiles
        assert Vocabulary.UNK_ID not in seq.ids


def test_ring_closure_conservation(corpus_1k):
    from chemssm.chem.graph import parse_molecule

    for smiles in corpus_1k[:200]:
        ring_tokens = sum(1 for k, _, _ in lex(smiles) if k is TokenKind.RING_BOND)
        assert parse_molecule(smiles).closure_count == ring_tokens // 2
