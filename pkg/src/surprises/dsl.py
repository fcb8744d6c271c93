"""Text format for scenarios.

One directive per line, ``#`` starts a comment::

    tmax 20
    obs 0: a
    obs 15: b
    obs 20: !a | !b
    obs 3..6: c -> d
    fluent a { p0=0.5, eps=0.001, stationary }

Formula operators by decreasing precedence: ``!``, ``&``, ``|``, ``->``
(right associative), ``<->``; constants ``true`` and ``false``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Mapping

from .errors import DomainError, ScenarioSyntaxError
from .logic import (
    IDENT_RE,
    And,
    Const,
    Formula,
    Iff,
    Implies,
    Not,
    Or,
    TimedFormula,
    Var,
)


@dataclass(frozen=True)
class Scenario:
    """A finite set of elementary timed observations over ``{0..t_max}``.

    Observations are kept in canonical order (time, then rendered text);
    duplicates are kept.
    """

    t_max: int
    observations: tuple[TimedFormula, ...] = ()

    def __post_init__(self):
        obs = []
        for o in self.observations:
            obs.extend(o.expand())
        for o in obs:
            if o.t > self.t_max:
                raise DomainError(f"observation at {o.t} beyond t_max={self.t_max}")
        obs.sort(key=lambda o: (o.t, render_formula(o.body)))
        object.__setattr__(self, "observations", tuple(obs))

    @classmethod
    def of(cls, *obs: tuple[int, Formula | str], t_max: int | None = None) -> Scenario:
        tfs = [TimedFormula(t, parse_formula(b) if isinstance(b, str) else b) for t, b in obs]
        if t_max is None:
            t_max = max((o.t for o in tfs), default=0)
        return cls(t_max, tuple(tfs))

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(sorted({v for o in self.observations for v in o.body.variables()}))

    def at(self, t: int) -> list[Formula]:
        return [o.body for o in self.observations if o.t == t]

    def times(self) -> list[int]:
        return sorted({o.t for o in self.observations})


@dataclass(frozen=True)
class FluentParamsDecl:
    var: str
    p0: float
    eps_pos: float
    eps_neg: float | None = None
    stationary: bool = False


@dataclass(frozen=True)
class ScenarioDoc:
    scenario: Scenario
    params: Mapping[str, FluentParamsDecl] = field(default_factory=dict)


# --- formula lexing and parsing ------------------------------------------

_TOKEN_RE = re.compile(r"\s*(?:(<->)|(->)|([!&|()])|([A-Za-z][A-Za-z0-9_]*)|(\S))")

# binary operators: token -> (precedence, node type, right associative)
_BINARY = {
    "<->": (1, Iff, False),
    "->": (2, Implies, True),
    "|": (3, Or, False),
    "&": (4, And, False),
}
_PREC = {Iff: 1, Implies: 2, Or: 3, And: 4}
_SYMBOL = {Iff: "<->", Implies: "->", Or: "|", And: "&"}


def _tokenize(text: str, line: int, col0: int):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:  # trailing whitespace
            break
        col = col0 + m.start(m.lastindex)
        if m.group(5) is not None:
            raise ScenarioSyntaxError(f"unexpected character {m.group(5)!r}", line, col)
        tokens.append((m.group(m.lastindex), col))
        pos = m.end()
    return tokens


class _FormulaParser:
    """Precedence climbing over the token list of one formula."""

    def __init__(self, text: str, line: int = 1, col0: int = 1):
        self.line = line
        self.end_col = col0 + len(text.rstrip())
        self.tokens = _tokenize(text, line, col0)
        self.i = 0

    def error(self, msg, col=None):
        if col is None:
            col = self.tokens[self.i][1] if self.i < len(self.tokens) else self.end_col
        raise ScenarioSyntaxError(msg, self.line, col)

    def peek(self):
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def parse(self) -> Formula:
        if not self.tokens:
            self.error("expected a formula")
        f = self.expr(1)
        if self.i < len(self.tokens):
            self.error(f"unexpected {self.peek()!r}")
        return f

    def expr(self, min_prec: int) -> Formula:
        left = self.unary()
        while True:
            op = self.peek()
            if op not in _BINARY:
                return left
            prec, node, right_assoc = _BINARY[op]
            if prec < min_prec:
                return left
            self.i += 1
            right = self.expr(prec if right_assoc else prec + 1)
            left = node(left, right)

    def unary(self) -> Formula:
        tok = self.peek()
        if tok is None:
            self.error("unexpected end of formula")
        if tok == "!":
            self.i += 1
            return Not(self.unary())
        if tok == "(":
            self.i += 1
            f = self.expr(1)
            if self.peek() != ")":
                self.error("expected ')'")
            self.i += 1
            return f
        if tok == "true":
            self.i += 1
            return Const(True)
        if tok == "false":
            self.i += 1
            return Const(False)
        if IDENT_RE.match(tok):
            self.i += 1
            return Var(tok)
        self.error(f"unexpected {tok!r}")


def parse_formula(text: str, line: int = 1, col0: int = 1) -> Formula:
    return _FormulaParser(text, line, col0).parse()


def render_formula(f: Formula) -> str:
    """Render with the fewest parentheses that re-parse to the same tree."""
    if isinstance(f, Var):
        return f.name
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, Not):
        inner = render_formula(f.arg)
        if isinstance(f.arg, (Var, Const, Not)):
            return "!" + inner
        return f"!({inner})"
    prec = _PREC[type(f)]
    right_assoc = type(f) is Implies

    def side(child, is_left):
        s = render_formula(child)
        cp = _PREC.get(type(child))
        if cp is None or cp > prec:
            return s
        if cp == prec and (is_left != right_assoc):
            return s
        return f"({s})"

    return f"{side(f.left, True)} {_SYMBOL[type(f)]} {side(f.right, False)}"


# --- scenario documents ---------------------------------------------------

_OBS_RE = re.compile(r"obs\s+(\d+)(?:\s*\.\.\s*(\d+))?\s*:")
_TMAX_RE = re.compile(r"tmax\s+(\d+)\s*\Z")
_FLUENT_RE = re.compile(r"fluent\s+([A-Za-z][A-Za-z0-9_]*)\s*\{(.*)\}\s*\Z")
_KV_RE = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*(?:=\s*(\S+?))?\s*\Z")


def _parse_fluent_decl(var: str, body: str, lineno: int, col0: int) -> FluentParamsDecl:
    values: dict[str, float] = {}
    stationary = False
    offset = 0
    for part in body.split(","):
        col = col0 + offset + (len(part) - len(part.lstrip()))
        offset += len(part) + 1
        m = _KV_RE.match(part)
        if not m:
            raise ScenarioSyntaxError(f"malformed parameter {part.strip()!r}", lineno, col)
        key, raw = m.group(1), m.group(2)
        if key == "stationary" and raw is None:
            stationary = True
            continue
        if key not in ("p0", "eps", "eps_neg") or raw is None:
            raise ScenarioSyntaxError(f"unknown parameter {part.strip()!r}", lineno, col)
        if key in values:
            raise ScenarioSyntaxError(f"parameter {key} given twice", lineno, col)
        try:
            x = float(raw)
        except ValueError:
            raise ScenarioSyntaxError(f"not a number: {raw!r}", lineno, col) from None
        if not (math.isfinite(x) and 0.0 <= x <= 1.0):
            raise ScenarioSyntaxError(f"{key}={raw} is not a probability in [0,1]", lineno, col)
        values[key] = x
    for key in ("p0", "eps"):
        if key not in values:
            raise ScenarioSyntaxError(f"fluent {var}: missing {key}", lineno, col0)
    return FluentParamsDecl(var, values["p0"], values["eps"], values.get("eps_neg"), stationary)


def parse(text: str) -> ScenarioDoc:
    t_max = None
    tmax_line = None
    observations: list[tuple[TimedFormula, int]] = []
    params: dict[str, FluentParamsDecl] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        stripped = line.lstrip()
        if not stripped:
            continue
        indent = len(line) - len(stripped)
        col0 = indent + 1
        word = stripped.split(None, 1)[0]
        if word == "tmax":
            m = _TMAX_RE.match(stripped)
            if not m:
                raise ScenarioSyntaxError("expected 'tmax <int>'", lineno, col0)
            if t_max is not None:
                raise ScenarioSyntaxError("duplicate tmax directive", lineno, col0)
            t_max, tmax_line = int(m.group(1)), lineno
        elif word == "obs":
            m = _OBS_RE.match(stripped)
            if not m:
                raise ScenarioSyntaxError("expected 'obs <int>: <formula>' or 'obs <int>..<int>: <formula>'", lineno, col0)
            start = int(m.group(1))
            until = int(m.group(2)) if m.group(2) is not None else None
            if until is not None and until < start:
                raise ScenarioSyntaxError(f"empty interval {start}..{until}", lineno, col0 + m.start(2))
            body = parse_formula(stripped[m.end():], lineno, col0 + m.end())
            observations.append((TimedFormula(start, body, until), lineno))
        elif word == "fluent":
            m = _FLUENT_RE.match(stripped)
            if not m:
                raise ScenarioSyntaxError("expected 'fluent <name> { p0=<p>, eps=<p> [, eps_neg=<p>] [, stationary] }'", lineno, col0)
            var = m.group(1)
            if var in params:
                raise ScenarioSyntaxError(f"duplicate declaration of fluent {var}", lineno, col0)
            params[var] = _parse_fluent_decl(var, m.group(2), lineno, col0 + m.start(2))
        else:
            raise ScenarioSyntaxError(f"unknown directive {word!r}", lineno, col0)

    if t_max is None:
        t_max = max((o.last for o, _ in observations), default=0)
    else:
        for o, lineno in observations:
            if o.last > t_max:
                raise ScenarioSyntaxError(f"observation at {o.last} beyond tmax {t_max} (line {tmax_line})", lineno, 1)
    scenario = Scenario(t_max, tuple(o for o, _ in observations))
    return ScenarioDoc(scenario, params)


def _fmt(x: float) -> str:
    return repr(float(x))


def render(doc: ScenarioDoc | Scenario) -> str:
    if isinstance(doc, Scenario):
        doc = ScenarioDoc(doc)
    lines = [f"tmax {doc.scenario.t_max}"]
    for o in doc.scenario.observations:
        lines.append(f"obs {o.t}: {render_formula(o.body)}")
    for var in sorted(doc.params):
        d = doc.params[var]
        parts = [f"p0={_fmt(d.p0)}", f"eps={_fmt(d.eps_pos)}"]
        if d.eps_neg is not None:
            parts.append(f"eps_neg={_fmt(d.eps_neg)}")
        if d.stationary:
            parts.append("stationary")
        lines.append(f"fluent {var} {{ {', '.join(parts)} }}")
    return "\n".join(lines) + "\n"


def normalize(doc: ScenarioDoc) -> ScenarioDoc:
    """Canonical form; ``Scenario`` already orders its observations, so only params are copied."""
    return ScenarioDoc(doc.scenario, {k: doc.params[k] for k in sorted(doc.params)})
