import csv
import random
from pathlib import Path

import pytest

from langadhere import demo, langid

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def corpus():
    return demo.demo_corpus()


@pytest.fixture(scope="session")
def profiles(corpus):
    return langid.build_profiles(corpus)


@pytest.fixture(scope="session")
def accuracy_table_rows():
    with (FIXTURES / "sft_accuracy_table.csv").open() as fh:
        return [
            {
                "model": r["model"],
                "language": r["language"],
                "plm": float(r["plm"]),
                "sft": float(r["sft"]),
                "delta": float(r["delta"]),
            }
            for r in csv.DictReader(fh)
        ]


@pytest.fixture()
def rng():
    return random.Random(20240817)


def random_id_sets(rng, n_ids=40, n_sets=2):
    """Random families of id sets over a shared small universe."""
    universe = [f"q{i}" for i in range(n_ids)]
    return [
        {q for q in universe if rng.random() < rng.choice((0.2, 0.5, 0.8))}
        for _ in range(n_sets)
    ]
