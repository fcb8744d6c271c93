import random

import pytest

from surprises.dsl import Scenario
from surprises.oracle import random_scenario

# The worked scenarios used throughout the tests.
SIGMA1 = Scenario.of((0, "a & b"), (5, "!a"))
SIGMA2 = Scenario.of((0, "a"), (5, "a | c"), (10, "b"), (15, "!a | !b"), (20, "!c"))
SIGMA3 = Scenario.of((0, "a"), (5, "a | b"), (10, "!a"))
SIGMA4 = Scenario.of((0, "a"), (15, "b"), (20, "!a | !b"))
SIGMA5 = Scenario.of((0, "a | b"), (5, "!a"), (20, "!b"))

CORPUS_SEED = 0
CORPUS_SIZE = 200


def make_corpus(seed=CORPUS_SEED, size=CORPUS_SIZE):
    rng = random.Random(seed)
    return [random_scenario(rng) for _ in range(size)]


@pytest.fixture(scope="session")
def corpus():
    return make_corpus()
