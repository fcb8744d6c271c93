"""Small DPLL solver: unit propagation plus chronological backtracking.

Literals are non-zero ints in DIMACS convention. Branching always picks the
lowest-numbered unassigned atom and tries ``True`` first, so the witness
returned for a given clause list is reproducible.
"""

from __future__ import annotations

from typing import Sequence

Clause = tuple[int, ...]


def _simplify(clauses: list[Clause], lit: int) -> list[Clause] | None:
    out = []
    for clause in clauses:
        if lit in clause:
            continue
        if -lit in clause:
            clause = tuple(x for x in clause if x != -lit)
            if not clause:
                return None
        out.append(clause)
    return out


def _propagate(clauses: list[Clause], assignment: dict[int, bool]):
    while True:
        unit = next((c[0] for c in clauses if len(c) == 1), None)
        if unit is None:
            return clauses
        assignment[abs(unit)] = unit > 0
        clauses = _simplify(clauses, unit)
        if clauses is None:
            return None


def _dpll(clauses: list[Clause], assignment: dict[int, bool]) -> dict[int, bool] | None:
    clauses = _propagate(clauses, assignment)
    if clauses is None:
        return None
    if not clauses:
        return assignment
    atom = min(abs(x) for c in clauses for x in c)
    for lit in (atom, -atom):
        reduced = _simplify(clauses, lit)
        if reduced is None:
            continue
        trial = dict(assignment)
        trial[atom] = lit > 0
        found = _dpll(reduced, trial)
        if found is not None:
            return found
    return None


def solve(clauses: Sequence[Sequence[int]], num_atoms: int = 0) -> dict[int, bool] | None:
    """Return a satisfying assignment for atoms ``1..num_atoms`` or ``None``.

    Atoms left free by the search are set to ``False`` in the result.
    """
    clauses = [tuple(dict.fromkeys(c)) for c in clauses]
    if any(not c for c in clauses):
        return None
    # drop tautologies
    clauses = [c for c in clauses if not any(-x in c for x in c)]
    model = _dpll(clauses, {})
    if model is None:
        return None
    top = max([num_atoms, *model.keys()], default=0)
    return {a: model.get(a, False) for a in range(1, top + 1)}


def satisfiable(clauses: Sequence[Sequence[int]]) -> bool:
    return solve(clauses) is not None
