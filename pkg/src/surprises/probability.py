"""Markovian fluent parameters and probabilities of explanations.

Each variable is an independent two-state chain started at time 0 with
``Pr(v) = p0`` and per-step switch probabilities ``eps_pos`` (v to ¬v) and
``eps_neg`` (¬v to v).  Two ways to rank explanations are offered:

* ``approx_*``: first order in the switch probabilities, valid when every
  fluent is highly persistent over the horizon;
* ``exact_*``: exact event probabilities, with the stretches between relevant
  time points collapsed through powers of (augmented) transition matrices.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from .consistency import RelevanceIndex, relevance_index
from .dsl import FluentParamsDecl, Scenario
from .errors import (
    ConditioningError,
    DegenerateScenarioError,
    DomainError,
    InvariantViolation,
    ParameterError,
    PersistenceRegimeError,
)
from .logic import Explanation, Fluent, has_disjunction

DEFAULT_P0 = 0.5
DEFAULT_EPS = 1e-4
# a fluent counts as highly persistent when max(eps_pos, eps_neg) * t_max is below this
HIGH_PERSISTENCE = 0.1
STATIONARY_TOL = 1e-12


class FluentClass(str, enum.Enum):
    PERSISTENT = "persistent"
    CHAOTIC = "chaotic"
    SWITCHING = "switching"
    GENERIC = "generic"


@dataclass(frozen=True)
class FluentParams:
    p0: float
    eps_pos: float
    eps_neg: float
    stationary: bool = False

    def __post_init__(self):
        for name in ("p0", "eps_pos", "eps_neg"):
            x = getattr(self, name)
            if not (isinstance(x, (int, float)) and 0.0 <= x <= 1.0):
                raise ParameterError(f"{name}={x!r} is not a probability")
        if self.stationary and abs(self.eps_pos * self.p0 - self.eps_neg * (1 - self.p0)) > STATIONARY_TOL:
            raise ParameterError(
                f"stationary fluent needs eps_pos*p0 == eps_neg*(1-p0); got {self.eps_pos}*{self.p0} vs {self.eps_neg}*{1 - self.p0}"
            )


@dataclass(frozen=True)
class ProbModel:
    params: Mapping[str, FluentParams]
    warnings: tuple[str, ...] = ()

    def get(self, var: str) -> FluentParams:
        try:
            return self.params[var]
        except KeyError:
            raise DomainError(f"no probability parameters for variable {var!r}") from None

    def p0(self, var: str) -> float:
        return self.get(var).p0

    def prior(self, fluent: Fluent) -> float:
        """``p_f``: prior of the fluent (``p0`` or ``1 - p0``)."""
        p = self.p0(fluent.var)
        return p if fluent.positive else 1.0 - p

    def eps(self, fluent: Fluent) -> float:
        """Per-step probability that ``fluent`` stops holding."""
        fp = self.get(fluent.var)
        return fp.eps_pos if fluent.positive else fp.eps_neg

    def classify(self, fluent: Fluent) -> FluentClass:
        eps = self.eps(fluent)
        if eps == 0.0:
            return FluentClass.PERSISTENT
        if eps == 1.0:
            return FluentClass.SWITCHING
        if self.get(fluent.var).stationary and math.isclose(eps, 1.0 - self.prior(fluent), abs_tol=STATIONARY_TOL):
            return FluentClass.CHAOTIC
        return FluentClass.GENERIC

    def classes(self) -> dict[Fluent, FluentClass]:
        out = {}
        for v in sorted(self.params):
            for pos in (True, False):
                out[Fluent(v, pos)] = self.classify(Fluent(v, pos))
        return out

    def highly_persistent(self, var: str, horizon: int) -> bool:
        fp = self.get(var)
        return max(fp.eps_pos, fp.eps_neg) * horizon < HIGH_PERSISTENCE

    def with_priors(self, p0: float) -> ProbModel:
        """Same switch probabilities, every prior replaced (stationarity dropped)."""
        return ProbModel({v: replace(fp, p0=p0, stationary=False) for v, fp in self.params.items()}, self.warnings)


def derive_params(
    decls: Mapping[str, FluentParamsDecl],
    variables: Iterable[str] = (),
    t_max: int | None = None,
    eps_override: float | None = None,
) -> ProbModel:
    """Build a ``ProbModel`` from declarations.

    Undeclared ``variables`` get ``p0=0.5, eps=1e-4, stationary``.  Under
    stationarity a missing ``eps_neg`` is solved from
    ``eps_pos * p0 = eps_neg * (1 - p0)``; without it, a missing ``eps_neg``
    defaults to ``eps_pos``.  ``eps_override`` replaces ``eps`` for every
    variable (``eps_neg`` is then re-derived or set equal).
    """
    decls = dict(decls)
    for v in variables:
        decls.setdefault(v, FluentParamsDecl(v, DEFAULT_P0, DEFAULT_EPS, None, True))
    params = {}
    warnings = []
    for v in sorted(decls):
        d = decls[v]
        eps_pos, eps_neg = d.eps_pos, d.eps_neg
        if eps_override is not None:
            if not 0.0 <= eps_override <= 1.0:
                raise ParameterError(f"epsilon override {eps_override} is not a probability")
            eps_pos, eps_neg = eps_override, None
        if eps_neg is None:
            if d.stationary:
                if not 0.0 < d.p0 < 1.0:
                    raise ParameterError(f"fluent {v}: cannot derive eps_neg for a stationary fluent with p0={d.p0}")
                eps_neg = eps_pos * d.p0 / (1.0 - d.p0)
                if eps_neg > 1.0:
                    raise ParameterError(f"fluent {v}: derived eps_neg={eps_neg:.6g} exceeds 1")
            else:
                eps_neg = eps_pos
        params[v] = FluentParams(d.p0, eps_pos, eps_neg, d.stationary)
        if t_max is not None and max(eps_pos, eps_neg) * t_max >= HIGH_PERSISTENCE:
            warnings.append(
                f"fluent {v} is not highly persistent over [0,{t_max}] "
                f"(max eps * t_max = {max(eps_pos, eps_neg) * t_max:.3g} >= {HIGH_PERSISTENCE})"
            )
    return ProbModel(params, tuple(warnings))


def surprise_prior(pm: ProbModel, fluent: Fluent, n: int) -> float:
    """Prior of a surprise on ``fluent`` over ``n`` steps: ``(1 - (1 - eps)^n) * p_f``."""
    if n < 1:
        raise ValueError(f"surprise needs n >= 1, got {n}")
    eps = pm.eps(fluent)
    if eps == 1.0:
        at_least_one = 1.0
    else:
        at_least_one = -math.expm1(n * math.log1p(-eps))
    return at_least_one * pm.prior(fluent)


@dataclass(frozen=True)
class PosteriorReport:
    entries: tuple[tuple[Explanation, float], ...]
    method: str
    warnings: tuple[str, ...] = ()
    residual: float | None = None
    pure_prediction: bool = False
    prior_independent: bool | None = None

    def as_dict(self) -> dict[Explanation, float]:
        return dict(self.entries)


# --- shared machinery -----------------------------------------------------

# per variable: list of (value at each relevant point, weight)
Options = list[tuple[tuple[bool, ...], float]]


def _surprises_by_var(e: Explanation | None, idx: RelevanceIndex) -> dict[str, list]:
    out: dict[str, list] = {}
    if e is None:
        return out
    for s in e.surprises:
        pts = idx.rt.get(s.fluent.var)
        if not pts or s.start not in pts or s.end not in pts:
            raise InvariantViolation(f"surprise {s} does not start and end at relevant time points of {s.fluent.var}")
        i, j = pts.index(s.start), pts.index(s.end)
        out.setdefault(s.fluent.var, []).append((s, list(range(i, j))))
    return out


def _join(scenario: Scenario, idx: RelevanceIndex, options: Mapping[str, Options]) -> float:
    """Sum of products of per-variable weights over joint assignments satisfying the scenario."""
    order = list(idx.vars)
    position = {v: i for i, v in enumerate(order)}
    pos_in_rt = {v: {t: k for k, t in enumerate(idx.rt[v])} for v in order}
    checks: list[list] = [[] for _ in order]
    for o in scenario.observations:
        vs = o.body.variables()
        if not vs:
            if not o.body.evaluate(lambda _: False):
                return 0.0
            continue
        checks[max(position[v] for v in vs)].append(o)
    chosen: dict[str, tuple[bool, ...]] = {}

    def ok(depth):
        for o in checks[depth]:
            if not o.body.evaluate(lambda v, t=o.t: chosen[v][pos_in_rt[v][t]]):
                return False
        return True

    def rec(depth):
        if depth == len(order):
            return 1.0
        v = order[depth]
        total = 0.0
        for values, w in options[v]:
            chosen[v] = values
            if ok(depth):
                total += w * rec(depth + 1)
        return total

    return rec(0)


# --- first-order approximation -------------------------------------------


def _approx_options(pm: ProbModel, idx: RelevanceIndex, var: str, surprises) -> Options:
    pts = idx.rt[var]
    designations = itertools.product(*(segs for _, segs in surprises))
    out = []
    for des in designations:
        if len(set(des)) != len(des):
            continue
        changed = set(des)
        for x0 in (True, False):
            values = [x0]
            w = pm.prior(Fluent(var, x0))
            for k in range(len(pts) - 1):
                cur = values[-1]
                if k in changed:
                    w *= (pts[k + 1] - pts[k]) * pm.eps(Fluent(var, cur))
                    values.append(not cur)
                else:
                    values.append(cur)
            if all(s.fluent.holds(values[pts.index(s.start)]) for s, _ in surprises):
                out.append((tuple(values), w))
    return out


def _check_regime(pm: ProbModel, scenario: Scenario, force: bool):
    bad = [v for v in relevance_index(scenario).vars if not pm.highly_persistent(v, scenario.t_max)]
    if bad and not force:
        raise PersistenceRegimeError(
            f"fluents {', '.join(bad)} are not highly persistent over [0,{scenario.t_max}]; use the exact method"
        )
    return bad


def approx_explanation_weight(pm: ProbModel, e: Explanation, scenario: Scenario, force: bool = False) -> float:
    """First-order value of ``Pr(E ∧ Σ)``.

    Completions assign every (variable, relevant point) and let each surprise
    change its fluent in exactly one segment of its interval; a changed
    segment of length ``n`` starting from value ``x`` weighs ``n * eps_x``,
    the first relevant point weighs the prior.
    """
    _check_regime(pm, scenario, force)
    idx = relevance_index(scenario)
    by_var = _surprises_by_var(e, idx)
    options = {v: _approx_options(pm, idx, v, by_var.get(v, [])) for v in idx.vars}
    return _join(scenario, idx, options)


def is_pure_prediction(scenario: Scenario) -> bool:
    """Disjunctions occur, and only at the last observed time point."""
    if not scenario.observations:
        return False
    last = scenario.observations[-1].t
    disj = [o.t for o in scenario.observations if has_disjunction(o.body)]
    return bool(disj) and all(t == last for t in disj)


def _normalise(weights: Sequence[float]) -> list[float]:
    total = math.fsum(weights)
    if total <= 0.0:
        raise DegenerateScenarioError("every explanation has zero weight")
    return [w / total for w in weights]


PRIOR_PROBES = (0.5, 0.9)
PRIOR_TOL = 1e-12


def approx_posteriors(pm: ProbModel, cme, scenario: Scenario, force: bool = False) -> PosteriorReport:
    """Normalise first-order weights over the compact minimal explanations.

    ``force=True`` computes even when some fluent is not highly persistent
    (a warning is attached instead of refusing).
    """
    bad = _check_regime(pm, scenario, force)
    warnings = list(pm.warnings)
    if bad:
        warnings.append(f"first-order approximation forced for non-persistent fluents: {', '.join(bad)}")
    explanations = list(cme)
    probs = _normalise([approx_explanation_weight(pm, e, scenario, force=True) for e in explanations])
    pure = is_pure_prediction(scenario)
    independent = None
    if pure:
        independent = True
        for p0 in PRIOR_PROBES:
            try:
                other = _normalise([approx_explanation_weight(pm.with_priors(p0), e, scenario, force=True) for e in explanations])
            except DegenerateScenarioError:
                independent = False
                break
            if any(abs(a - b) > PRIOR_TOL for a, b in zip(probs, other)):
                independent = False
                break
        if not independent:
            warnings.append("pure prediction scenario, but posteriors depend on the priors")
    return PosteriorReport(tuple(zip(explanations, probs)), "approx", tuple(warnings), None, pure, independent)


# --- exact computation ----------------------------------------------------


@lru_cache(maxsize=4096)
def _segment_table(eps_pos: float, eps_neg: float, x: bool, n: int) -> tuple[dict[bool, float], dict[bool, float]]:
    """Over ``n`` steps from value ``x``: (no switch and end at y, at least one switch and end at y)."""
    # augmented states: (True, no switch), (False, no switch), (True, switched), (False, switched)
    m = np.zeros((4, 4))
    m[0, 0], m[0, 3] = 1 - eps_pos, eps_pos
    m[1, 1], m[1, 2] = 1 - eps_neg, eps_neg
    m[2, 2], m[2, 3] = 1 - eps_pos, eps_pos
    m[3, 3], m[3, 2] = 1 - eps_neg, eps_neg
    row = np.linalg.matrix_power(m, n)[0 if x else 1]
    still = {x: float(row[0 if x else 1]), (not x): 0.0}
    moved = {True: float(row[2]), False: float(row[3])}
    return still, moved


def _marginal(pm: ProbModel, var: str, t: int) -> dict[bool, float]:
    fp = pm.get(var)
    m = np.array([[1 - fp.eps_pos, fp.eps_pos], [fp.eps_neg, 1 - fp.eps_neg]])
    dist = np.array([fp.p0, 1 - fp.p0]) @ np.linalg.matrix_power(m, t)
    return {True: float(dist[0]), False: float(dist[1])}


def _exact_options(pm: ProbModel, idx: RelevanceIndex, var: str, surprises) -> Options:
    pts = idx.rt[var]
    fp = pm.get(var)
    start = _marginal(pm, var, pts[0])
    touched = sorted({k for _, segs in surprises for k in segs})
    patterns = [
        dict(zip(touched, bits))
        for bits in itertools.product((False, True), repeat=len(touched))
        if all(any(dict(zip(touched, bits))[k] for k in segs) for _, segs in surprises)
    ]
    out = []
    for values in itertools.product((True, False), repeat=len(pts)):
        if not all(s.fluent.holds(values[pts.index(s.start)]) for s, _ in surprises):
            continue
        w = start[values[0]]
        tables = [_segment_table(fp.eps_pos, fp.eps_neg, values[k], pts[k + 1] - pts[k]) for k in range(len(pts) - 1)]
        for k, (still, moved) in enumerate(tables):
            if k not in touched:
                w *= still[values[k + 1]] + moved[values[k + 1]]
        if touched:
            w *= math.fsum(
                math.prod((tables[k][1] if pat[k] else tables[k][0])[values[k + 1]] for k in touched) for pat in patterns
            )
        if w > 0.0:
            out.append((values, w))
    return out


def exact_event_probability(pm: ProbModel, scenario: Scenario, e: Explanation | None = None) -> float:
    """``Pr(Σ)`` when ``e`` is None, otherwise ``Pr(E ∧ Σ)``."""
    idx = relevance_index(scenario)
    by_var = _surprises_by_var(e, idx)
    options = {v: _exact_options(pm, idx, v, by_var.get(v, [])) for v in idx.vars}
    return _join(scenario, idx, options)


def exact_posteriors(pm: ProbModel, cme, scenario: Scenario) -> PosteriorReport:
    evidence = exact_event_probability(pm, scenario)
    if evidence <= 0.0:
        raise ConditioningError("the scenario has probability zero under these parameters")
    explanations = list(cme)
    probs = [exact_event_probability(pm, scenario, e) / evidence for e in explanations]
    return PosteriorReport(
        tuple(zip(explanations, probs)), "exact", tuple(pm.warnings), 1.0 - math.fsum(probs), is_pure_prediction(scenario)
    )
