"""Exhaustive ground truth at desk scale.

Everything here enumerates full timed models over ``V(Σ) × {0..t_max}``
and shares no code with the grounding / diagnosis / segment machinery it is
used to check.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from typing import Iterator, Sequence

from .dsl import Scenario
from .errors import ScaleError
from .explanation import CmeResult
from .logic import (
    And,
    Change,
    Const,
    Explanation,
    Formula,
    Iff,
    Implies,
    Not,
    Or,
    Surprise,
    TimedFormula,
    TimedModel,
    Var,
    changes,
    is_surprise,
)
from .probability import ProbModel

MAX_CELLS = 22


@dataclass(frozen=True)
class WeightedTrajectory:
    model: TimedModel
    weight: float


def _check_scale(n_vars: int, t_max: int):
    if n_vars * (t_max + 1) > MAX_CELLS:
        raise ScaleError(f"{n_vars} variables x {t_max + 1} time points exceeds the enumeration bound of {MAX_CELLS} cells")


def enumerate_models(scenario: Scenario, variables: Sequence[str] | None = None) -> Iterator[TimedModel]:
    """Every model of the scenario, time-major with ``False < True`` per cell."""
    names = list(scenario.variables if variables is None else variables)
    _check_scale(len(names), scenario.t_max)
    per_time = []
    for t in range(scenario.t_max + 1):
        obs = scenario.at(t)
        ok = []
        for bits in itertools.product((False, True), repeat=len(names)):
            env = dict(zip(names, bits))
            if all(f.evaluate(env.__getitem__) for f in obs):
                ok.append(bits)
        per_time.append(ok)
    for cols in itertools.product(*per_time):
        rows = {v: [col[i] for col in cols] for i, v in enumerate(names)}
        yield TimedModel.from_rows(rows, scenario.t_max)


def minimal_pointwise_explanations(scenario: Scenario) -> list[frozenset[Change]]:
    """Subset-minimal change sets over all models of the scenario."""
    sets = sorted({changes(m) for m in enumerate_models(scenario)}, key=len)
    minimal: list[frozenset[Change]] = []
    for s in sets:
        if not any(m <= s for m in minimal):
            minimal.append(s)
    return minimal


def _boxes(points: set[tuple[int, ...]], width: int):
    """All products of integer intervals (one per slot) lying inside ``points``."""
    if width == 0:
        yield ()
        return
    firsts = sorted({p[0] for p in points})
    tails = {u: {p[1:] for p in points if p[0] == u} for u in firsts}
    for lo in firsts:
        common = None
        hi = lo
        while hi in tails:
            common = tails[hi] if common is None else common & tails[hi]
            if not common:
                break
            for rest in _boxes(common, width - 1):
                yield ((lo, hi),) + rest
            hi += 1


def brute_cme(scenario: Scenario) -> CmeResult:
    """Compact minimal explanations straight from the definitions.

    Minimal pointwise explanations are grouped by their fluent signature;
    within a group, explanations are boxes of selection intervals all of
    whose points are minimal pointwise explanations, and the compact ones are
    the boxes no other box strictly contains.
    """
    groups: dict[tuple, set[tuple[int, ...]]] = {}
    for pe in minimal_pointwise_explanations(scenario):
        ordered = sorted(pe, key=Change.sort_key)
        sig = tuple(c.fluent for c in ordered)
        groups.setdefault(sig, set()).add(tuple(c.t for c in ordered))
    result = []
    for sig, points in groups.items():
        boxes = set(_boxes(points, len(sig)))
        maximal = [
            b
            for b in boxes
            if not any(o != b and all(olo <= lo and hi <= ohi for (lo, hi), (olo, ohi) in zip(b, o)) for o in boxes)
        ]
        for b in maximal:
            result.append(Explanation(tuple(Surprise(f, lo - 1, hi) for f, (lo, hi) in zip(sig, b))))
    return CmeResult.build(result)


def trajectories(pm: ProbModel, scenario: Scenario, variables: Sequence[str] | None = None) -> Iterator[WeightedTrajectory]:
    """Models of the scenario with their chain probability, in enumeration order."""
    for m in enumerate_models(scenario, variables):
        w = 1.0
        for v, row in m.values:
            fp = pm.get(v)
            w *= fp.p0 if row[0] else 1.0 - fp.p0
            for a, b in zip(row, row[1:]):
                eps = fp.eps_pos if a else fp.eps_neg
                w *= eps if a != b else 1.0 - eps
        yield WeightedTrajectory(m, w)


def brute_probability(pm: ProbModel, scenario: Scenario, e: Explanation | None = None) -> float:
    weights = []
    for tr in trajectories(pm, scenario):
        if e is None or all(is_surprise(tr.model, s.fluent, s.start, s.end) for s in e.surprises):
            weights.append(tr.weight)
    return math.fsum(weights)


# --- random scenarios -----------------------------------------------------

VAR_NAMES = ("a", "b")


def random_formula(rng: random.Random, names: Sequence[str], depth: int = 3) -> Formula:
    if depth == 0 or rng.random() < 0.3:
        if rng.random() < 0.08:
            return Const(rng.random() < 0.5)
        return Var(rng.choice(names))
    kind = rng.choice((Not, And, Or, Implies, Iff, Not))
    if kind is Not:
        return Not(random_formula(rng, names, depth - 1))
    return kind(random_formula(rng, names, depth - 1), random_formula(rng, names, depth - 1))


def random_scenario(rng: random.Random, max_vars: int = 2, max_tmax: int = 6, max_obs: int = 3) -> Scenario:
    """A random scenario whose observations are each satisfiable at their own time point."""
    while True:
        names = VAR_NAMES[: rng.randint(1, max_vars)]
        t_max = rng.randint(1, max_tmax)
        n_obs = rng.randint(1, min(max_obs, t_max + 1))
        times = rng.sample(range(t_max + 1), n_obs)
        obs = tuple(TimedFormula(t, random_formula(rng, names)) for t in times)
        sc = Scenario(t_max, obs)
        if next(enumerate_models(sc), None) is not None:
            return sc
