"""Command-line front end.

    surprises explain FILE [--format text|json] [--dump-cnf]
    surprises rank FILE [--method approx|exact|both] [--epsilon E] [--format text|json]
    surprises check FILE | --random N [--seed S]

Exit status: 0 success, 1 scenario/parameter error, 2 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass
from typing import Sequence

from . import __version__
from .consistency import dump_cnf
from .dsl import ScenarioDoc, parse
from .errors import InvariantViolation, PersistenceRegimeError, ScenarioError
from .explanation import CmeResult, compact_minimal_explanations, coverage_count
from .logic import Explanation, Surprise
from .oracle import brute_cme, brute_probability, random_scenario
from .probability import ProbModel, approx_posteriors, derive_params, exact_event_probability, exact_posteriors

PROB_TOL = 1e-9


@dataclass(frozen=True)
class RunConfig:
    command: str
    input: str | None = None
    output_format: str = "text"
    method: str = "both"
    epsilon_override: float | None = None
    seed: int = 0
    random_count: int | None = None
    dump_cnf: bool = False

    def __post_init__(self):
        if self.epsilon_override is not None and not 0.0 <= self.epsilon_override <= 1.0:
            raise ScenarioError(f"--epsilon {self.epsilon_override} is not a probability")


def _num(x: float) -> float:
    return float(f"{x:.12g}")


def render_surprise(s: Surprise) -> str:
    name = s.fluent.var if s.fluent.positive else "¬" + s.fluent.var
    return f"{name} changed within ({s.start},{s.end}]"


def render_explanation(e: Explanation) -> str:
    if not e.surprises:
        return "∅"
    return "{" + ", ".join(render_surprise(s) for s in e.surprises) + "}"


def _surprise_json(s: Surprise) -> dict:
    return {"fluent": str(s.fluent), "from": s.start, "to": s.end}


def _posteriors(cfg: RunConfig, pm: ProbModel, cme: CmeResult, doc: ScenarioDoc, warnings: list[str]):
    sc = doc.scenario
    approx = exact = None
    if cfg.method in ("approx", "both"):
        try:
            report = approx_posteriors(pm, cme, sc)
        except PersistenceRegimeError as exc:
            if cfg.method == "approx":
                raise
            warnings.append(f"approx skipped: {exc}")
        else:
            approx = report.as_dict()
            warnings.extend(w for w in report.warnings if w not in warnings)
    if cfg.method in ("exact", "both"):
        report = exact_posteriors(pm, cme, sc)
        exact = report.as_dict()
        warnings.extend(w for w in report.warnings if w not in warnings)
        warnings.append(f"exact posteriors leave residual mass {_num(report.residual)}")
    return approx, exact


def _explain_or_rank(cfg: RunConfig, out) -> int:
    with open(cfg.input, encoding="utf-8") as fh:
        doc = parse(fh.read())
    sc = doc.scenario
    if cfg.dump_cnf:
        sys.stderr.write(dump_cnf(sc))
    cme = compact_minimal_explanations(sc)
    warnings: list[str] = []
    approx = exact = None
    if cfg.command == "rank":
        pm = derive_params(doc.params, sc.variables, sc.t_max, cfg.epsilon_override)
        approx, exact = _posteriors(cfg, pm, cme, doc, warnings)

    if cfg.output_format == "json":
        items = []
        for e in cme:
            item = {"surprises": [_surprise_json(s) for s in e.surprises], "coverage": coverage_count(e)}
            if approx is not None:
                item["posterior_approx"] = _num(approx[e])
            if exact is not None:
                item["posterior_exact"] = _num(exact[e])
            items.append(item)
        doc_out = {"tmax": sc.t_max, "explanations": items, "warnings": warnings}
        out.write(json.dumps(doc_out, ensure_ascii=False, indent=2) + "\n")
        return 0

    out.write(f"tmax {sc.t_max}\n")
    if cme.is_empty_explanation:
        out.write("{∅} — scenario consistent with full persistence\n")
    else:
        out.write(f"{len(cme)} compact minimal explanation(s)\n")
    for i, e in enumerate(cme, start=1):
        if cme.is_empty_explanation and approx is None and exact is None:
            break
        line = f"  E{i}: {render_explanation(e)}  coverage {coverage_count(e)}"
        if approx is not None:
            line += f"  approx {_num(approx[e])}"
        if exact is not None:
            line += f"  exact {_num(exact[e])}"
        out.write(line + "\n")
    for w in warnings:
        out.write(f"warning: {w}\n")
    return 0


def check_scenario(sc, pm: ProbModel) -> list[tuple[str, bool, str]]:
    """Oracle agreement on one scenario: (label, passed, detail) rows."""
    rows = []
    pipeline, brute = compact_minimal_explanations(sc), brute_cme(sc)
    rows.append(("cme", pipeline == brute, f"pipeline {len(pipeline)} vs oracle {len(brute)} explanation(s)"))
    for e in [None, *pipeline]:
        x, y = exact_event_probability(pm, sc, e), brute_probability(pm, sc, e)
        label = "Pr(Σ)" if e is None else f"Pr({e} ∧ Σ)"
        rows.append((label, abs(x - y) <= PROB_TOL, f"exact {x:.12g} vs oracle {y:.12g}"))
    return rows


def _check(cfg: RunConfig, out) -> int:
    if cfg.random_count is not None:
        rng = random.Random(cfg.seed)
        failures = 0
        for i in range(cfg.random_count):
            sc = random_scenario(rng)
            pm = derive_params({}, sc.variables, sc.t_max, eps_override=rng.uniform(0.0, 0.5))
            bad = [r for r in check_scenario(sc, pm) if not r[1]]
            if bad:
                failures += 1
                out.write(f"FAIL scenario {i}: " + "; ".join(f"{lbl}: {d}" for lbl, _, d in bad) + "\n")
        verdict = "PASS" if not failures else "FAIL"
        out.write(f"{verdict}: {cfg.random_count - failures}/{cfg.random_count} random scenarios agree (seed {cfg.seed})\n")
        return 0 if not failures else 2
    with open(cfg.input, encoding="utf-8") as fh:
        doc = parse(fh.read())
    sc = doc.scenario
    pm = derive_params(doc.params, sc.variables, sc.t_max, cfg.epsilon_override)
    rows = check_scenario(sc, pm)
    for label, ok, detail in rows:
        out.write(f"{'PASS' if ok else 'FAIL'} {label}: {detail}\n")
    return 0 if all(ok for _, ok, _ in rows) else 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="surprises", description="Explain timed observations by minimal sets of surprises.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--format", dest="output_format", choices=("text", "json"), default="text")
        sp.add_argument("--dump-cnf", action="store_true", help="write the ground CNF (DIMACS) to stderr")

    ex = sub.add_parser("explain", help="print the compact minimal explanations")
    ex.add_argument("input")
    common(ex)
    rk = sub.add_parser("rank", help="explanations with posterior probabilities")
    rk.add_argument("input")
    common(rk)
    rk.add_argument("--method", choices=("approx", "exact", "both"), default="both")
    rk.add_argument("--epsilon", dest="epsilon_override", type=float, help="switch probability for every fluent")
    ck = sub.add_parser("check", help="compare the engines against brute-force enumeration")
    ck.add_argument("input", nargs="?")
    ck.add_argument("--random", dest="random_count", type=int, metavar="N")
    ck.add_argument("--seed", type=int, default=0)
    ck.add_argument("--epsilon", dest="epsilon_override", type=float)
    return p


def run(argv: Sequence[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(**{k: v for k, v in vars(args).items() if k in RunConfig.__dataclass_fields__})
        if cfg.command == "check":
            if (cfg.input is None) == (cfg.random_count is None):
                parser.error("check needs exactly one of FILE or --random N")
            return _check(cfg, out)
        return _explain_or_rank(cfg, out)
    except (ScenarioError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except InvariantViolation as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())
