import pathlib

import pytest

from medquery import (AmqConfig, ProviderConfig, embed_vocabulary,
                      load_gold_sets, load_vocabulary, run_query)

DATA_DIR = pathlib.Path(__file__).parent / "data"
GOLDEN_DIR = DATA_DIR / "golden"

FIXTURE_PHRASES = (
    "Insomnia",
    "Tremor",
    "Low blood glucose",
    "Palpitations",
    "Headache",
    "Diarrhea",
    "Rash",
    "Acute kidney injury",
    "Dyspnoea",
    "Bleeding events",
)


@pytest.fixture(scope="session")
def data_dir():
    return DATA_DIR


@pytest.fixture(scope="session")
def golden_dir():
    return GOLDEN_DIR


@pytest.fixture(scope="session")
def vocab():
    return load_vocabulary(DATA_DIR / "vocab_fixture.csv")


@pytest.fixture(scope="session")
def provider():
    return ProviderConfig()


@pytest.fixture(scope="session")
def emb(vocab, provider):
    return embed_vocabulary(provider, vocab)


@pytest.fixture(scope="session")
def config(provider):
    return AmqConfig(provider=provider)


@pytest.fixture(scope="session")
def gold():
    return load_gold_sets(DATA_DIR / "gold_fixture.csv")


@pytest.fixture(scope="session")
def fixture_results(vocab, emb, config):
    """run_query output for every fixture phrase, computed once."""
    return {phrase: run_query(phrase, vocab, emb, config)
            for phrase in FIXTURE_PHRASES}
