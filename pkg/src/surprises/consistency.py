"""Grounding, consistency checks and the persistence-axiom diagnosis step.

Observations and persistence axioms are propositionalised over ground atoms
``(var, t)``; only time points that something actually mentions get an atom,
and a satisfying assignment extends to a full timed model by holding every
variable constant between the atoms it has.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping

from .dsl import Scenario
from .errors import UnexplainableScenarioError
from .logic import (
    And,
    Const,
    Explanation,
    Fluent,
    Formula,
    Iff,
    Implies,
    Not,
    Or,
    Surprise,
    TimedModel,
    Var,
)
from .sat import solve

# formulas with more variables than this are encoded with auxiliary atoms
TRUTH_TABLE_LIMIT = 10

GroundAtom = tuple[str, int]


@dataclass(frozen=True)
class RelevanceIndex:
    vars: tuple[str, ...]
    rt: Mapping[str, tuple[int, ...]]

    def rt_star(self, var: str) -> tuple[int, ...]:
        return self.rt[var][:-1]

    def next(self, var: str, t: int) -> int:
        pts = self.rt[var]
        i = pts.index(t)
        if i + 1 >= len(pts):
            raise ValueError(f"{t} is the last relevant time point of {var}")
        return pts[i + 1]

    def segments(self, var: str) -> list[tuple[int, int]]:
        pts = self.rt.get(var, ())
        return list(zip(pts, pts[1:]))


@lru_cache(maxsize=256)
def relevance_index(scenario: Scenario) -> RelevanceIndex:
    rt: dict[str, set[int]] = {}
    for o in scenario.observations:
        for v in o.body.variables():
            rt.setdefault(v, set()).add(o.t)
    return RelevanceIndex(tuple(sorted(rt)), {v: tuple(sorted(ts)) for v, ts in sorted(rt.items())})


@dataclass(frozen=True)
class PersistenceAxiom:
    """``[t]fluent -> [t_next]fluent``."""

    fluent: Fluent
    t: int
    t_next: int

    def __post_init__(self):
        if self.t >= self.t_next:
            raise ValueError(f"persistence axiom needs t < t_next, got ({self.t},{self.t_next})")

    def sort_key(self):
        return (*self.fluent.sort_key(), self.t, self.t_next)

    def surprise(self) -> Surprise:
        return Surprise(self.fluent, self.t, self.t_next)

    def clause(self, atom_id: Mapping[GroundAtom, int]) -> tuple[int, int]:
        a = atom_id[(self.fluent.var, self.t)]
        b = atom_id[(self.fluent.var, self.t_next)]
        return (-a, b) if self.fluent.positive else (a, -b)

    def __str__(self):
        lit = str(self.fluent)
        return f"[{self.t}]{lit} -> [{self.t_next}]{lit}"


def both_polarities(var: str, t: int, t_next: int) -> tuple[PersistenceAxiom, PersistenceAxiom]:
    return (PersistenceAxiom(Fluent(var, True), t, t_next), PersistenceAxiom(Fluent(var, False), t, t_next))


@lru_cache(maxsize=256)
def persistence_axioms(scenario: Scenario) -> tuple[PersistenceAxiom, ...]:
    idx = relevance_index(scenario)
    out = []
    for v in idx.vars:
        for t, t_next in idx.segments(v):
            out.extend(both_polarities(v, t, t_next))
    return tuple(sorted(out, key=PersistenceAxiom.sort_key))


# --- CNF ------------------------------------------------------------------


@dataclass(frozen=True)
class Cnf:
    """Clauses over ground atoms numbered ``1..len(atoms)`` in (var, t) order.

    Auxiliary atoms from the structural encoding of wide formulas follow,
    numbered ``len(atoms)+1 ..``.
    """

    atoms: tuple[GroundAtom, ...]
    clauses: tuple[tuple[int, ...], ...]
    num_aux: int = 0

    @property
    def num_atoms(self) -> int:
        return len(self.atoms) + self.num_aux

    def to_dimacs(self) -> str:
        lines = [
            "c ground CNF of the scenario and its persistence axioms",
            "c atom k = rank of (var, t) in lexicographic (var, t) order, starting at 1",
        ]
        lines += [f"c {i} = [{t}]{v}" for i, (v, t) in enumerate(self.atoms, start=1)]
        if self.num_aux:
            lines.append(f"c atoms {len(self.atoms) + 1}..{self.num_atoms} are auxiliary")
        lines.append(f"p cnf {self.num_atoms} {len(self.clauses)}")
        lines += [" ".join(map(str, c)) + " 0" for c in self.clauses]
        return "\n".join(lines) + "\n"


def _truth_table_clauses(f: Formula, t: int, atom_id) -> list[tuple[int, ...]]:
    names = sorted(f.variables())
    ids = [atom_id[(v, t)] for v in names]
    out = []
    for bits in itertools.product((False, True), repeat=len(names)):
        env = dict(zip(names, bits))
        if not f.evaluate(env.__getitem__):
            out.append(tuple(-i if b else i for i, b in zip(ids, bits)))
    return out


class _Tseitin:
    def __init__(self, atom_id, t: int, next_id: int):
        self.atom_id = atom_id
        self.t = t
        self.next_id = next_id
        self.clauses: list[tuple[int, ...]] = []

    def fresh(self) -> int:
        self.next_id += 1
        return self.next_id - 1

    def lit(self, f: Formula) -> int:
        if isinstance(f, Var):
            return self.atom_id[(f.name, self.t)]
        if isinstance(f, Not):
            return -self.lit(f.arg)
        x = self.fresh()
        if isinstance(f, Const):
            self.clauses.append((x,) if f.value else (-x,))
            return x
        a, b = self.lit(f.left), self.lit(f.right)
        if isinstance(f, Implies):
            a, f = -a, Or(f.left, f.right)
        if isinstance(f, And):
            self.clauses += [(-x, a), (-x, b), (x, -a, -b)]
        elif isinstance(f, Or):
            self.clauses += [(-x, a, b), (x, -a), (x, -b)]
        elif isinstance(f, Iff):
            self.clauses += [(-x, -a, b), (-x, a, -b), (x, a, b), (x, -a, -b)]
        return x


def ground(scenario: Scenario, axioms: Iterable[PersistenceAxiom] = ()) -> Cnf:
    axioms = list(axioms)
    atoms: set[GroundAtom] = set()
    for o in scenario.observations:
        atoms.update((v, o.t) for v in o.body.variables())
    for ax in axioms:
        atoms.add((ax.fluent.var, ax.t))
        atoms.add((ax.fluent.var, ax.t_next))
    order = tuple(sorted(atoms))
    atom_id = {a: i for i, a in enumerate(order, start=1)}
    clauses: list[tuple[int, ...]] = []
    next_id = len(order) + 1
    for o in scenario.observations:
        if len(o.body.variables()) <= TRUTH_TABLE_LIMIT:
            clauses += _truth_table_clauses(o.body, o.t, atom_id)
        else:
            enc = _Tseitin(atom_id, o.t, next_id)
            root = enc.lit(o.body)
            clauses += enc.clauses + [(root,)]
            next_id = enc.next_id
    clauses += [ax.clause(atom_id) for ax in axioms]
    return Cnf(order, tuple(clauses), next_id - 1 - len(order))


def extend_witness(scenario: Scenario, cnf: Cnf, assignment: Mapping[int, bool]) -> TimedModel:
    """Full model over ``V(Σ) × {0..t_max}``, constant between grounded points."""
    known: dict[str, list[tuple[int, bool]]] = {}
    for i, (v, t) in enumerate(cnf.atoms, start=1):
        known.setdefault(v, []).append((t, assignment.get(i, False)))
    rows = {}
    for v in scenario.variables:
        pts = known.get(v, [(0, False)])
        row = []
        k = 0
        for t in range(scenario.t_max + 1):
            while k + 1 < len(pts) and pts[k + 1][0] <= t:
                k += 1
            row.append(pts[k][1])
        rows[v] = row
    return TimedModel.from_rows(rows, scenario.t_max)


def find_model(scenario: Scenario, axioms: Iterable[PersistenceAxiom] = ()) -> TimedModel | None:
    """A model of the scenario plus ``axioms``, or ``None`` when inconsistent."""
    cnf = ground(scenario, axioms)
    assignment = solve(cnf.clauses, cnf.num_atoms)
    if assignment is None:
        return None
    return extend_witness(scenario, cnf, assignment)


def is_consistent(scenario: Scenario, axioms: Iterable[PersistenceAxiom] = ()) -> bool:
    cnf = ground(scenario, axioms)
    return solve(cnf.clauses, cnf.num_atoms) is not None


# --- diagnosis ------------------------------------------------------------


def _pairs_one_segment(subset) -> bool:
    segs = [(a.fluent.var, a.t, a.t_next) for a in subset]
    return len(segs) != len(set(segs))


@lru_cache(maxsize=256)
def minimal_correction_sets(scenario: Scenario) -> tuple[frozenset[PersistenceAxiom], ...]:
    """Subset-minimal sets of persistence axioms whose removal restores consistency.

    Breadth-first over the size of the removed set, skipping supersets of
    sets already found. A minimal correction set never drops both polarities
    of one segment (any model violates at most one of them), so such subsets
    are not tried.
    """
    pers = persistence_axioms(scenario)
    if not is_consistent(scenario, ()):
        raise UnexplainableScenarioError("some observation is unsatisfiable at its own time point")
    found: list[frozenset[PersistenceAxiom]] = []
    n_segments = len(pers) // 2
    for k in range(n_segments + 1):
        for combo in itertools.combinations(pers, k):
            removed = frozenset(combo)
            if _pairs_one_segment(combo) or any(f <= removed for f in found):
                continue
            if is_consistent(scenario, [a for a in pers if a not in removed]):
                found.append(removed)
    return tuple(sorted(found, key=lambda s: sorted(a.sort_key() for a in s)))


def max_cons(scenario: Scenario) -> list[frozenset[PersistenceAxiom]]:
    pers = frozenset(persistence_axioms(scenario))
    return [pers - r for r in minimal_correction_sets(scenario)]


def candidates(scenario: Scenario) -> list[Explanation]:
    out = [Explanation(tuple(a.surprise() for a in r)) for r in minimal_correction_sets(scenario)]
    return sorted(out, key=Explanation.sort_key)


def dump_cnf(scenario: Scenario) -> str:
    """DIMACS text of the scenario together with all of its persistence axioms."""
    return ground(scenario, persistence_axioms(scenario)).to_dimacs()
