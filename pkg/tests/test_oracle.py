import math
import random

import pytest

from surprises.dsl import Scenario
from surprises.errors import ScaleError
from surprises.logic import Explanation
from surprises.oracle import (
    brute_cme,
    brute_probability,
    enumerate_models,
    minimal_pointwise_explanations,
    random_scenario,
    trajectories,
)
from surprises.probability import FluentParams, ProbModel

from conftest import SIGMA1


def test_enumerate_model_counts():
    assert len(list(enumerate_models(Scenario(1, ()), ["a"]))) == 4
    assert len(list(enumerate_models(Scenario.of((0, "a"), t_max=1)))) == 2
    assert list(enumerate_models(Scenario.of((0, "a & !a")))) == []


def test_enumeration_order_is_canonical():
    rows = [m.row("a") for m in enumerate_models(Scenario(1, ()), ["a"])]
    assert rows == [(False, False), (False, True), (True, False), (True, True)]


def test_scale_bound():
    with pytest.raises(ScaleError):
        list(enumerate_models(Scenario.of((0, "a & b"), (11, "a"))))
    with pytest.raises(ScaleError):
        brute_cme(Scenario.of((0, "a & b & c"), (7, "a")))


def test_brute_cme_examples():
    assert list(brute_cme(SIGMA1)) == [Explanation.of(("a", 0, 5))]
    assert list(brute_cme(Scenario.of((0, "a"), (2, "a | b"), (4, "!a")))) == [Explanation.of(("a", 0, 4))]
    assert brute_cme(Scenario.of((0, "a"), (3, "a"))).is_empty_explanation


def test_minimal_pointwise_explanations_sigma1():
    found = minimal_pointwise_explanations(SIGMA1)
    assert len(found) == 5 and all(len(pe) == 1 for pe in found)


def test_brute_probability_examples():
    assert brute_probability(ProbModel({"a": FluentParams(0.3, 0.2, 0.2)}), Scenario.of((0, "a"))) == pytest.approx(0.3)
    pm = ProbModel({"a": FluentParams(1.0, 0.5, 0.5)})
    assert brute_probability(pm, Scenario.of((0, "a"), t_max=2), Explanation.of(("a", 0, 2))) == pytest.approx(0.75)


def test_weights_sum_to_one():
    rng = random.Random(4)
    for _ in range(20):
        pm = ProbModel({v: FluentParams(rng.random(), rng.random(), rng.random()) for v in "ab"})
        sc = Scenario(rng.randint(0, 5), ())
        total = math.fsum(tr.weight for tr in trajectories(pm, sc, ["a", "b"]))
        assert total == pytest.approx(1.0, abs=1e-9)


def test_conjunction_is_monotone(corpus):
    rng = random.Random(8)
    for sc in corpus[:60]:
        pm = ProbModel({v: FluentParams(rng.random(), rng.random(), rng.random()) for v in sc.variables})
        total = brute_probability(pm, sc)
        for e in brute_cme(sc):
            assert brute_probability(pm, sc, e) <= total + 1e-15


def test_random_scenarios_are_pointwise_satisfiable():
    rng = random.Random(9)
    for _ in range(50):
        sc = random_scenario(rng)
        assert len(sc.variables) <= 2 and sc.t_max <= 6 and 1 <= len({o.t for o in sc.observations}) <= 3
        assert next(enumerate_models(sc), None) is not None


def test_generator_is_seeded():
    assert [random_scenario(random.Random(3)) for _ in range(3)] == [random_scenario(random.Random(3)) for _ in range(3)]
