"""Pointwise explanations, explanations, coverage and compactification."""

from __future__ import annotations

import bisect
import enum
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

from .consistency import PersistenceAxiom, both_polarities, candidates, is_consistent, relevance_index
from .dsl import Scenario
from .errors import DomainError
from .logic import Change, Explanation, PointwiseExplanation, Surprise

__all__ = [
    "CmeResult",
    "Explanation",
    "PointwiseExplanation",
    "Status",
    "compact_minimal_explanations",
    "compactify",
    "coverage_count",
    "covers",
    "frame_axioms",
    "is_explanation",
    "is_pointwise_explanation",
    "frame_consistency_status",
    "selections",
]


class Status(str, enum.Enum):
    NOT_EXPLANATION = "not_explanation"
    EXPLANATION = "explanation"
    MINIMAL = "minimal"

    def __bool__(self):
        return self is not Status.NOT_EXPLANATION


@dataclass(frozen=True)
class CmeResult:
    explanations: tuple[Explanation, ...]
    coverage_counts: tuple[int, ...]

    @classmethod
    def build(cls, explanations: Iterable[Explanation]) -> CmeResult:
        ordered = tuple(sorted(set(explanations), key=Explanation.sort_key))
        return cls(ordered, tuple(coverage_count(e) for e in ordered))

    def __iter__(self):
        return iter(self.explanations)

    def __len__(self):
        return len(self.explanations)

    @property
    def is_empty_explanation(self) -> bool:
        """True for ``{∅}``: the scenario is consistent with full persistence."""
        return self.explanations == (Explanation(),)


# --- frame axioms with excused steps --------------------------------------


def frame_axioms(scenario: Scenario, changes: Iterable[Change]) -> list[PersistenceAxiom]:
    """Step frame axioms ``[t-1]f -> [t]f`` minus the excused ``changes``.

    Unbroken runs of frame axioms between two points of interest are collapsed
    into one implication per polarity; variables outside the scenario are
    dropped since they can always stay constant.
    """
    excused: dict[str, dict[int, set[bool]]] = {}
    for c in changes:
        excused.setdefault(c.fluent.var, {}).setdefault(c.t, set()).add(c.fluent.positive)
    idx = relevance_index(scenario)
    out = []
    for v in idx.vars:
        steps = excused.get(v, {})
        points = set(idx.rt[v])
        for u in steps:
            points.update((u - 1, u))
        points = sorted(points)
        for a, b in zip(points, points[1:]):
            dropped = steps.get(b, set()) if b == a + 1 else set()
            out.extend(ax for ax in both_polarities(v, a, b) if ax.fluent.positive not in dropped)
    return out


class _Checker:
    """Memoised pointwise-explanation consistency for one scenario.

    Whether a change set is consistent only depends, per variable, on which
    relevant segment each change falls in and on the order of changes inside
    a segment; that abstraction is the cache key.
    """

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.idx = relevance_index(scenario)
        self.cache: dict[tuple, bool] = {}

    def key(self, changes: Iterable[Change]) -> tuple:
        per_var: dict[str, dict[int, set[bool]]] = {}
        for c in changes:
            pts = self.idx.rt.get(c.fluent.var)
            if not pts or c.t <= pts[0] or c.t > pts[-1]:
                continue
            per_var.setdefault(c.fluent.var, {}).setdefault(c.t, set()).add(c.fluent.positive)
        out = []
        for v in sorted(per_var):
            pts = self.idx.rt[v]
            steps = per_var[v]
            out.append((v, tuple((bisect.bisect_left(pts, u) - 1, frozenset(steps[u])) for u in sorted(steps))))
        return tuple(out)

    def consistent(self, changes: frozenset[Change]) -> bool:
        k = self.key(changes)
        hit = self.cache.get(k)
        if hit is None:
            hit = is_consistent(self.scenario, frame_axioms(self.scenario, changes))
            self.cache[k] = hit
        return hit

    def status(self, changes: frozenset[Change], check_minimal: bool = True) -> Status:
        if not self.consistent(changes):
            return Status.NOT_EXPLANATION
        if not check_minimal:
            return Status.EXPLANATION
        for c in changes:
            if self.consistent(changes - {c}):
                return Status.EXPLANATION
        return Status.MINIMAL


@lru_cache(maxsize=128)
def _checker(scenario: Scenario) -> _Checker:
    return _Checker(scenario)


def _change_set(pe) -> frozenset[Change]:
    if isinstance(pe, PointwiseExplanation):
        return pe.changes
    return frozenset(pe)


def _check_times(scenario: Scenario, changes: Iterable[Change]):
    for c in changes:
        if not 1 <= c.t <= scenario.t_max:
            raise DomainError(f"change {c} outside [1,{scenario.t_max}]")


def is_pointwise_explanation(pe, scenario: Scenario, check_minimal: bool = True) -> Status:
    changes = _change_set(pe)
    _check_times(scenario, changes)
    return _checker(scenario).status(changes, check_minimal)


def selections(e: Explanation) -> Iterable[frozenset[Change]]:
    """Every pointwise explanation covered by ``e``, one change per surprise."""
    ranges = [[Change(s.fluent, u) for u in s.selection_range()] for s in e.surprises]
    for pick in itertools.product(*ranges):
        yield frozenset(pick)


def is_explanation(e: Explanation, scenario: Scenario) -> Status:
    for s in e.surprises:
        if s.end > scenario.t_max:
            raise DomainError(f"surprise {s} ends beyond t_max={scenario.t_max}")
    chk = _checker(scenario)
    minimal = True
    for sel in selections(e):
        st = chk.status(sel, check_minimal=minimal)
        if st is Status.NOT_EXPLANATION:
            return st
        minimal = st is Status.MINIMAL
    return Status.MINIMAL if minimal else Status.EXPLANATION


def frame_consistency_status(e: Explanation, scenario: Scenario) -> Status:
    """Consistency of the scenario with every frame axiom outside the surprise intervals.

    Exact for time-unambiguous surprises (``end == start + 1``); for wider
    intervals it is only a necessary condition for being an explanation.
    """
    excused = frozenset(Change(s.fluent, u) for s in e.surprises for u in s.selection_range())
    return _checker(scenario).status(excused)


def _covers_changes(e: Explanation, target: frozenset[Change]) -> bool:
    if not e.surprises:
        return not target
    options = []
    for s in e.surprises:
        opts = [c for c in target if c.fluent == s.fluent and s.start < c.t <= s.end]
        if not opts:
            return False
        options.append(opts)
    return any(set(pick) == target for pick in itertools.product(*options))


def covers(e: Explanation, target) -> bool:
    """Whether ``e`` covers a pointwise explanation, or every selection of another explanation."""
    if isinstance(target, Explanation):
        if target == e:
            return True
        fluents = {s.fluent for s in e.surprises}
        if any(s.fluent not in fluents for s in target.surprises):
            return False
        return all(_covers_changes(e, sel) for sel in selections(target))
    return _covers_changes(e, _change_set(target))


def coverage_count(e: Explanation) -> int:
    return math.prod(s.length for s in e.surprises)


def _merge(a: Explanation, b: Explanation) -> Explanation | None:
    """Merge two explanations that differ in one surprise on the same fluent with joinable intervals."""
    sa, sb = set(a.surprises), set(b.surprises)
    only_a, only_b = sa - sb, sb - sa
    if len(only_a) != 1 or len(only_b) != 1:
        return None
    (x,), (y,) = only_a, only_b
    if x.fluent != y.fluent or max(x.start, y.start) > min(x.end, y.end):
        return None
    joined = Surprise(x.fluent, min(x.start, y.start), max(x.end, y.end))
    if joined in (x, y):
        return None
    return Explanation(tuple(sa & sb) + (joined,))


def compactify(cands: Sequence[Explanation], scenario: Scenario) -> CmeResult:
    """Close the minimal explanations under pairwise merging, keep the ones nobody strictly covers.

    Every merged candidate is re-verified as a minimal explanation that covers
    both parents. Pairs are visited in input order; the closure (and hence
    the result) does not depend on that order.
    """
    pool = list(dict.fromkeys(cands))
    for e in pool:
        if is_explanation(e, scenario) is not Status.MINIMAL:
            raise ValueError(f"{e} is not a minimal explanation")
    seen = set(pool)
    queue = list(pool)
    done: list[Explanation] = []
    while queue:
        e = queue.pop(0)
        for o in done:
            m = _merge(e, o)
            if m is None or m in seen:
                continue
            if is_explanation(m, scenario) is Status.MINIMAL and covers(m, e) and covers(m, o):
                seen.add(m)
                queue.append(m)
        done.append(e)
    kept = [e for e in done if not any(o != e and covers(o, e) and not covers(e, o) for o in done)]
    return CmeResult.build(kept)


def compact_minimal_explanations(scenario: Scenario) -> CmeResult:
    return compactify(candidates(scenario), scenario)
