import math

import pytest

from surprises.dsl import FluentParamsDecl, Scenario
from surprises.errors import ConditioningError, DegenerateScenarioError, ParameterError, PersistenceRegimeError
from surprises.explanation import compact_minimal_explanations
from surprises.logic import Explanation, Fluent
from surprises.oracle import brute_probability
from surprises.probability import (
    FluentClass,
    FluentParams,
    ProbModel,
    approx_explanation_weight,
    approx_posteriors,
    derive_params,
    exact_event_probability,
    exact_posteriors,
    is_pure_prediction,
    surprise_prior,
)

from conftest import SIGMA1, SIGMA2, SIGMA4, SIGMA5

E = Explanation.of


def uniform(sc, eps, p0=0.5):
    return ProbModel({v: FluentParams(p0, eps, eps) for v in sc.variables})


def decl(var, p0, eps, eps_neg=None, stationary=False):
    return FluentParamsDecl(var, p0, eps, eps_neg, stationary)


def test_derive_params_examples():
    pm = derive_params({"a": decl("a", 0.5, 0.001, stationary=True), "b": decl("b", 0.8, 0.001, stationary=True)})
    assert pm.get("a").eps_neg == pytest.approx(0.001, abs=1e-15)
    assert pm.get("b").eps_neg == pytest.approx(0.004, abs=1e-15)
    assert derive_params({"c": decl("c", 0.5, 0.0)}).classify(Fluent("c")) is FluentClass.PERSISTENT


def test_stationarity_relation_holds():
    for p0 in (0.1, 0.3, 0.5, 0.7):
        fp = derive_params({"a": decl("a", p0, 0.01, stationary=True)}).get("a")
        assert fp.eps_pos * fp.p0 == pytest.approx(fp.eps_neg * (1 - fp.p0), abs=1e-15)


def test_derive_params_defaults_and_errors():
    pm = derive_params({}, ["x"])
    assert pm.get("x") == FluentParams(0.5, 1e-4, 1e-4, True)
    assert derive_params({"a": decl("a", 0.2, 0.01)}).get("a").eps_neg == 0.01
    with pytest.raises(ParameterError):
        derive_params({"a": decl("a", 1.0, 0.01, stationary=True)})
    with pytest.raises(ParameterError):
        derive_params({"a": decl("a", 0.9, 0.5, stationary=True)})
    with pytest.raises(ParameterError):
        FluentParams(0.5, 0.1, 0.3, stationary=True)


def test_regime_warning():
    pm = derive_params({"a": decl("a", 0.5, 0.01)}, t_max=20)
    assert pm.warnings and "not highly persistent" in pm.warnings[0]
    assert not derive_params({"a": decl("a", 0.5, 0.001)}, t_max=20).warnings


def test_fluent_classes():
    pm = ProbModel(
        {
            "p": FluentParams(0.5, 0.0, 0.0),
            "s": FluentParams(0.5, 1.0, 1.0),
            "c": FluentParams(0.5, 0.5, 0.5, stationary=True),
            "g": FluentParams(0.5, 0.01, 0.02),
        }
    )
    classes = pm.classes()
    assert classes[Fluent("p")] is FluentClass.PERSISTENT
    assert classes[Fluent("s", False)] is FluentClass.SWITCHING
    assert classes[Fluent("c")] is FluentClass.CHAOTIC
    assert classes[Fluent("g")] is FluentClass.GENERIC


def test_surprise_prior_examples():
    a = Fluent("a")
    assert surprise_prior(ProbModel({"a": FluentParams(0.4, 0.0, 0.0)}), a, 7) == 0.0
    assert surprise_prior(ProbModel({"a": FluentParams(0.5, 0.3, 0.3)}), a, 1) == pytest.approx(0.15, abs=1e-15)
    assert surprise_prior(ProbModel({"a": FluentParams(1.0, 0.5, 0.5)}), a, 2) == pytest.approx(0.75, abs=1e-15)
    # the negative fluent uses 1 - p0 and eps_neg
    pm = ProbModel({"a": FluentParams(0.3, 0.1, 0.2)})
    assert surprise_prior(pm, -a, 3) == pytest.approx((1 - 0.8**3) * 0.7, abs=1e-15)


def test_approx_weight_examples():
    eps, pa, pb = 1e-4, 0.3, 0.6
    pm = ProbModel({"a": FluentParams(pa, eps, eps), "b": FluentParams(pb, eps, eps)})
    assert approx_explanation_weight(pm, E(("a", 0, 20)), SIGMA4) == pytest.approx(20 * eps * pa * pb, rel=1e-12)
    assert approx_explanation_weight(pm, E(("b", 0, 20)), SIGMA5) == pytest.approx(20 * eps * pb * (1 - pa), rel=1e-12)
    sc = Scenario.of((0, "a"), (3, "a | b"))
    assert approx_explanation_weight(pm, Explanation(()), sc) == pytest.approx(pa, rel=1e-12)


def test_approx_refuses_outside_regime():
    with pytest.raises(PersistenceRegimeError, match="exact method"):
        approx_posteriors(uniform(SIGMA4, 0.01), compact_minimal_explanations(SIGMA4), SIGMA4)
    rep = approx_posteriors(uniform(SIGMA4, 0.01), compact_minimal_explanations(SIGMA4), SIGMA4, force=True)
    assert any("forced" in w for w in rep.warnings)


def test_approx_degenerate():
    with pytest.raises(DegenerateScenarioError):
        approx_posteriors(uniform(SIGMA1, 0.0), compact_minimal_explanations(SIGMA1), SIGMA1)


def test_approx_posteriors_examples():
    cme = compact_minimal_explanations(SIGMA4)
    rep = approx_posteriors(uniform(SIGMA4, 1e-4, 0.3), cme, SIGMA4)
    post = rep.as_dict()
    assert post[E(("a", 0, 20))] == pytest.approx(0.8, abs=1e-15)
    assert post[E(("b", 15, 20))] == pytest.approx(0.2, abs=1e-15)
    assert rep.pure_prediction and rep.prior_independent
    rep2 = approx_posteriors(uniform(SIGMA2, 1e-4), compact_minimal_explanations(SIGMA2), SIGMA2)
    assert math.fsum(p for _, p in rep2.entries) == pytest.approx(1.0, abs=1e-12)
    assert not rep2.pure_prediction


def test_pure_prediction_detection():
    assert is_pure_prediction(SIGMA4)
    assert not is_pure_prediction(SIGMA5)
    assert not is_pure_prediction(SIGMA1)


def test_exact_examples():
    assert exact_event_probability(ProbModel({"a": FluentParams(0.3, 0.1, 0.1)}), Scenario.of((0, "a"))) == pytest.approx(0.3)
    pm = ProbModel({"a": FluentParams(1.0, 0.5, 0.5)})
    sc = Scenario.of((0, "a"), (2, "!a"))
    assert exact_event_probability(pm, sc) == pytest.approx(brute_probability(pm, sc), abs=1e-15)
    assert exact_event_probability(pm, sc) == pytest.approx(0.5, abs=1e-15)


def test_exact_sigma4_closed_form():
    # symmetric stationary chains: a parity flip over n steps has probability (1 - (1 - 2 eps)^n) / 2
    eps = 1e-4
    flip = lambda n: (1 - (1 - 2 * eps) ** n) / 2  # noqa: E731
    expected = 0.25 * (1 - (1 - flip(20)) * (1 - flip(5)))
    got = exact_event_probability(uniform(SIGMA4, eps), SIGMA4)
    assert got == pytest.approx(expected, rel=1e-10)
    # the first-order value is off by second-order terms, relative size about eps * t_max
    first_order = 0.25 * (20 * eps + 5 * eps - 100 * eps**2)
    assert got == pytest.approx(first_order, rel=SIGMA4.t_max * eps)


def test_exact_posteriors_examples():
    eps = 0.01
    rep = exact_posteriors(uniform(SIGMA1, eps), compact_minimal_explanations(SIGMA1), SIGMA1)
    assert rep.as_dict()[E(("a", 0, 5))] >= 1 - 5 * eps
    post4 = exact_posteriors(uniform(SIGMA4, 1e-4), compact_minimal_explanations(SIGMA4), SIGMA4).as_dict()
    assert abs(post4[E(("a", 0, 20))] - 0.8) <= 0.01 and abs(post4[E(("b", 15, 20))] - 0.2) <= 0.01
    inert = Scenario.of((0, "a"), (2, "b"), (6, "a | !b"))
    cme = compact_minimal_explanations(inert)
    rep = exact_posteriors(uniform(inert, eps), cme, inert)
    assert rep.as_dict()[Explanation(())] >= 1 - inert.t_max * 2 * eps
    assert rep.residual == pytest.approx(1 - rep.as_dict()[Explanation(())])


def test_exact_conditioning_error():
    with pytest.raises(ConditioningError):
        exact_posteriors(uniform(SIGMA1, 0.0), compact_minimal_explanations(SIGMA1), SIGMA1)


@pytest.mark.parametrize("eps", [0.0, 1.0, 0.5])
def test_exact_handles_extreme_switch_rates(eps):
    sc = Scenario.of((0, "a"), (3, "a | b"), (5, "!a"))
    pm = ProbModel({"a": FluentParams(0.7, eps, eps), "b": FluentParams(0.2, eps, 1 - eps)})
    for e in [None, *compact_minimal_explanations(sc)]:
        assert exact_event_probability(pm, sc, e) == pytest.approx(brute_probability(pm, sc, e), abs=1e-12)


@pytest.mark.parametrize("sc", [SIGMA2, SIGMA4, SIGMA5], ids=["sigma2", "sigma4", "sigma5"])
@pytest.mark.parametrize("eps", [1e-2, 1e-3])
def test_first_order_convergence(sc, eps):
    cme = compact_minimal_explanations(sc)

    def gap(x):
        approx = approx_posteriors(uniform(sc, x), cme, sc, force=True).as_dict()
        exact = exact_posteriors(uniform(sc, x), cme, sc).as_dict()
        return max(abs(approx[e] - exact[e]) for e in cme)

    assert 1.5 <= gap(eps) / gap(eps / 2) <= 2.5


@pytest.mark.parametrize("eps", [1e-2, 1e-3, 1e-4])
def test_posterior_mass_bound(eps):
    cme = compact_minimal_explanations(SIGMA2)
    total = math.fsum(p for _, p in exact_posteriors(uniform(SIGMA2, eps), cme, SIGMA2).entries)
    assert total >= 1 - 10 * SIGMA2.t_max * eps


@pytest.mark.parametrize("times", [(0, 15, 20), (0, 10, 20), (2, 8, 14)])
def test_prior_independence_in_pure_prediction(times):
    ta, tb, tp = times
    sc = Scenario.of((ta, "a"), (tb, "b"), (tp, "!a | !b"))
    cme = compact_minimal_explanations(sc)
    a = approx_posteriors(uniform(sc, 1e-4, 0.5), cme, sc).as_dict()
    b = approx_posteriors(uniform(sc, 1e-4, 0.9), cme, sc).as_dict()
    assert all(abs(a[e] - b[e]) <= 1e-12 for e in cme)
