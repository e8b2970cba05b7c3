import numpy as np
import pytest

from chemssm.chem.tokenizer import Vocabulary
from chemssm.data.corpus import build_vocab
from chemssm.data.synthetic import generate_corpus, generate_labeled, write_task_csv


@pytest.fixture(scope="session")
def small_vocab() -> Vocabulary:
    return Vocabulary(["C", "c", "O", "o", "N", "n", "S", "Cl", "Br",
                       "=", "#", "(", ")", "[nH]", "1", "2", "3"])


@pytest.fixture(scope="session")
def corpus_1k() -> list[str]:
    return generate_corpus(1000, seed=101)


@pytest.fixture(scope="session")
def corpus_1k_vocab(corpus_1k) -> Vocabulary:
    return build_vocab(corpus_1k)


@pytest.fixture(scope="session")
def dili_fixture_csv(tmp_path_factory):
    """475-record binary task CSV shaped like the liver-injury benchmark."""
    path = tmp_path_factory.mktemp("fixtures") / "dili.csv"
    dataset = generate_labeled(475, seed=77, name="dili", noise=0.12)
    write_task_csv(dataset, path)
    return path


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(0)
