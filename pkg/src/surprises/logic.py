"""Propositional formulas, timed formulas, timed models, changes and surprises."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping

from .errors import DomainError

IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")


def check_var_name(name: str) -> str:
    if not isinstance(name, str) or not IDENT_RE.match(name):
        raise DomainError(f"invalid variable name {name!r}")
    return name


# --- formulas -------------------------------------------------------------


class Formula:
    """Base class of the propositional AST."""

    def evaluate(self, value: Callable[[str], bool]) -> bool:
        raise NotImplementedError

    def variables(self) -> frozenset[str]:
        return frozenset(_walk_vars(self))

    def __invert__(self) -> Formula:
        return Not(self)

    def __and__(self, other: Formula) -> Formula:
        return And(self, other)

    def __or__(self, other: Formula) -> Formula:
        return Or(self, other)

    def __str__(self) -> str:
        from .dsl import render_formula

        return render_formula(self)


@dataclass(frozen=True)
class Var(Formula):
    name: str

    def __post_init__(self):
        check_var_name(self.name)

    def evaluate(self, value):
        return value(self.name)


@dataclass(frozen=True)
class Const(Formula):
    value: bool

    def evaluate(self, value):
        return self.value


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula

    def evaluate(self, value):
        return not self.arg.evaluate(value)


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula

    def evaluate(self, value):
        return self.left.evaluate(value) and self.right.evaluate(value)


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula

    def evaluate(self, value):
        return self.left.evaluate(value) or self.right.evaluate(value)


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula

    def evaluate(self, value):
        return (not self.left.evaluate(value)) or self.right.evaluate(value)


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula

    def evaluate(self, value):
        return self.left.evaluate(value) == self.right.evaluate(value)


def _walk_vars(f: Formula) -> Iterator[str]:
    if isinstance(f, Var):
        yield f.name
    elif isinstance(f, Not):
        yield from _walk_vars(f.arg)
    elif isinstance(f, (And, Or, Implies, Iff)):
        yield from _walk_vars(f.left)
        yield from _walk_vars(f.right)


def nnf(f: Formula, negate: bool = False) -> Formula:
    """Negation normal form over {¬, ∧, ∨}; implications and biconditionals are rewritten away."""
    if isinstance(f, Var):
        return Not(f) if negate else f
    if isinstance(f, Const):
        return Const(f.value != negate)
    if isinstance(f, Not):
        return nnf(f.arg, not negate)
    if isinstance(f, Implies):
        return nnf(Or(Not(f.left), f.right), negate)
    if isinstance(f, Iff):
        both = And(f.left, f.right)
        neither = And(Not(f.left), Not(f.right))
        return nnf(Or(both, neither), negate)
    left, right = nnf(f.left, negate), nnf(f.right, negate)
    conj = isinstance(f, And) != negate
    return And(left, right) if conj else Or(left, right)


def has_disjunction(f: Formula) -> bool:
    """True when the negation normal form of ``f`` contains a disjunction."""

    def walk(g):
        if isinstance(g, Or):
            return True
        if isinstance(g, And):
            return walk(g.left) or walk(g.right)
        return False

    return walk(nnf(f))


# --- fluents, changes, surprises -----------------------------------------


@dataclass(frozen=True, order=True)
class Fluent:
    """A variable with a polarity; ``Fluent("a", False)`` is ¬a."""

    var: str
    positive: bool = True

    def __post_init__(self):
        check_var_name(self.var)

    def __neg__(self) -> Fluent:
        return Fluent(self.var, not self.positive)

    def holds(self, value: bool) -> bool:
        return value == self.positive

    def sort_key(self):
        return (self.var, not self.positive)

    def __str__(self) -> str:
        return self.var if self.positive else "!" + self.var

    @classmethod
    def parse(cls, text: str) -> Fluent:
        text = text.strip()
        for prefix in ("!", "¬", "~"):
            if text.startswith(prefix):
                return cls(text[len(prefix):].strip(), False)
        return cls(text, True)


@dataclass(frozen=True)
class Change:
    """``fluent`` held at ``t - 1`` and its negation holds at ``t``."""

    fluent: Fluent
    t: int

    def __post_init__(self):
        if self.t < 1:
            raise DomainError(f"a change needs t >= 1, got {self.t}")

    def sort_key(self):
        return (*self.fluent.sort_key(), self.t)

    def __str__(self):
        return f"<{self.fluent},{self.t}>"


@dataclass(frozen=True)
class Surprise:
    """``fluent`` holds at ``start`` and fails somewhere in ``(start, end]``."""

    fluent: Fluent
    start: int
    end: int

    def __post_init__(self):
        if not 0 <= self.start < self.end:
            raise DomainError(f"a surprise needs 0 <= start < end, got ({self.start},{self.end})")

    @property
    def length(self) -> int:
        return self.end - self.start

    def selection_range(self) -> range:
        """Time points a covered pointwise change may sit at."""
        return range(self.start + 1, self.end + 1)

    def sort_key(self):
        return (*self.fluent.sort_key(), self.start, self.end)

    def __str__(self):
        return f"<{self.fluent},{self.start},{self.end}>"


@dataclass(frozen=True)
class Explanation:
    """A set of surprises, read disjunctively over their interior time points."""

    surprises: tuple[Surprise, ...] = ()

    def __post_init__(self):
        uniq = sorted(set(self.surprises), key=Surprise.sort_key)
        object.__setattr__(self, "surprises", tuple(uniq))

    @classmethod
    def of(cls, *items) -> Explanation:
        """``Explanation.of(("a", 0, 5), ("!c", 5, 20))``."""
        out = []
        for item in items:
            if isinstance(item, Surprise):
                out.append(item)
            else:
                fl, start, end = item
                fl = fl if isinstance(fl, Fluent) else Fluent.parse(fl)
                out.append(Surprise(fl, start, end))
        return cls(tuple(out))

    def sort_key(self):
        return tuple(s.sort_key() for s in self.surprises)

    def __iter__(self):
        return iter(self.surprises)

    def __len__(self):
        return len(self.surprises)

    def __str__(self):
        return "{" + ", ".join(map(str, self.surprises)) + "}"


@dataclass(frozen=True)
class PointwiseExplanation:
    changes: frozenset[Change] = frozenset()

    def __post_init__(self):
        changes = frozenset(self.changes)
        object.__setattr__(self, "changes", changes)
        seen = {(c.fluent.var, c.t) for c in changes}
        if len(seen) != len(changes):
            raise DomainError("a pointwise explanation cannot change v and ¬v at the same time point")

    @classmethod
    def of(cls, *items) -> PointwiseExplanation:
        out = []
        for item in items:
            if isinstance(item, Change):
                out.append(item)
            else:
                fl, t = item
                out.append(Change(fl if isinstance(fl, Fluent) else Fluent.parse(fl), t))
        return cls(frozenset(out))

    def sorted(self) -> list[Change]:
        return sorted(self.changes, key=Change.sort_key)

    def __iter__(self):
        return iter(self.sorted())

    def __len__(self):
        return len(self.changes)

    def __str__(self):
        return "{" + ", ".join(map(str, self.sorted())) + "}"


# --- timed formulas and models -------------------------------------------


@dataclass(frozen=True)
class TimedFormula:
    """``[t]body``, or ``[t, until]body`` when ``until`` is given."""

    t: int
    body: Formula
    until: int | None = None

    def __post_init__(self):
        if self.t < 0:
            raise DomainError(f"negative time point {self.t}")
        if self.until is not None and self.until < self.t:
            raise DomainError(f"empty interval [{self.t},{self.until}]")

    def expand(self) -> list[TimedFormula]:
        if self.until is None:
            return [self]
        return [TimedFormula(u, self.body) for u in range(self.t, self.until + 1)]

    @property
    def last(self) -> int:
        return self.t if self.until is None else self.until


@dataclass(frozen=True)
class TimedModel:
    """Dense truth assignment over ``variables × {0..t_max}``."""

    t_max: int
    values: tuple[tuple[str, tuple[bool, ...]], ...] = field(default=())

    def __post_init__(self):
        vals = tuple(sorted((v, tuple(bool(x) for x in row)) for v, row in dict(self.values).items()))
        for v, row in vals:
            check_var_name(v)
            if len(row) != self.t_max + 1:
                raise DomainError(f"row for {v} has {len(row)} entries, expected {self.t_max + 1}")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "_index", dict(vals))

    @classmethod
    def from_rows(cls, rows: Mapping[str, Iterable], t_max: int | None = None) -> TimedModel:
        rows = {v: tuple(bool(x) for x in r) for v, r in rows.items()}
        if t_max is None:
            t_max = len(next(iter(rows.values()))) - 1 if rows else 0
        return cls(t_max, tuple(rows.items()))

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.values)

    def row(self, var: str) -> tuple[bool, ...]:
        try:
            return self._index[var]
        except KeyError:
            raise DomainError(f"unknown variable {var!r}") from None

    def __call__(self, var: str, t: int) -> bool:
        if not 0 <= t <= self.t_max:
            raise DomainError(f"time point {t} outside [0,{self.t_max}]")
        return self.row(var)[t]

    def fluent_holds(self, fluent: Fluent, t: int) -> bool:
        return fluent.holds(self(fluent.var, t))


def evaluate(model: TimedModel, phi: TimedFormula | Iterable[TimedFormula]) -> bool:
    """Whether ``model`` satisfies a timed formula (or a conjunction of them)."""
    if not isinstance(phi, TimedFormula):
        return all(evaluate(model, p) for p in phi)
    for elem in phi.expand():
        if not elem.body.evaluate(lambda v, t=elem.t: model(v, t)):
            return False
    return True


def changes(model: TimedModel) -> frozenset[Change]:
    out = set()
    for var, row in model.values:
        for t in range(1, model.t_max + 1):
            if row[t - 1] != row[t]:
                out.add(Change(Fluent(var, row[t - 1]), t))
    return frozenset(out)


def is_surprise(model: TimedModel, fluent: Fluent, t: int, t_end: int) -> bool:
    if t >= t_end:
        raise ValueError(f"surprise interval needs t < t', got ({t},{t_end})")
    if not model.fluent_holds(fluent, t):
        return False
    return not all(model.fluent_holds(fluent, u) for u in range(t, t_end + 1))
