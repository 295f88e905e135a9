"""Command line front end.

Four modes: solve a program, emit its grounding, check a candidate model
read from JSON, or translate a classical program into the probability
syntax.  Text output is the default; --json switches the solve and check
modes to a machine-readable form with rationals serialized as strings.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import TextIO

from .classical import parse_classical, translate_dlp
from .errors import DhppError
from .grounder import GroundProgram, ground_program
from .model import PInterpretation, ProbInterval, Program
from .parser import parse_formula, parse_program
from .solver import enumerate_answer_sets, is_answer_set
from .semantics import satisfies_program

MODES = ("solve", "ground-only", "check-model", "translate-dlp")


@dataclass
class RunConfig:
    mode: str = "solve"
    inputs: list[str] = field(default_factory=list)
    limit: int | None = None
    strategies: str | None = None
    json_output: bool = False
    max_ground: int = 100_000
    lattice_cap: int = 200_000
    model: str | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.max_ground <= 0 or self.lattice_cap <= 0:
            raise ValueError("caps must be positive")
        if self.limit is not None and self.limit <= 0:
            raise ValueError("limit must be positive")


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _load_program(config: RunConfig) -> Program:
    merged: Program | None = None
    for path in config.inputs:
        part = parse_program(_read(path), filename=path)
        if merged is None:
            merged = part
        else:
            merged.rules.extend(part.rules)
            merged.tau.update(part.tau)
            merged.default_tau = part.default_tau
    if merged is None:
        raise DhppError("no input files")
    if config.strategies:
        text = _read(config.strategies)
        overrides = parse_program(text, filename=config.strategies)
        if overrides.rules:
            raise DhppError(f"{config.strategies}: strategy files take directives only")
        merged.tau.update(overrides.tau)
        if "default_tau" in text:
            merged.default_tau = overrides.default_tau
    return merged


def _ground(config: RunConfig) -> GroundProgram:
    program = _load_program(config)
    return ground_program(program, max_rules=config.max_ground, max_index=config.max_ground)


def _interval_json(formula, value: ProbInterval) -> dict:
    return {
        "formula": str(formula),
        "text": str(formula),
        "lo": str(value.lo),
        "hi": str(value.hi),
    }


def _load_model(path: str) -> PInterpretation:
    pairs = []
    try:
        data = json.loads(_read(path))
        for entry in data["formulae"]:
            text = entry.get("text") or entry["formula"]
            formula = parse_formula(text)
            value = ProbInterval(Fraction(entry["lo"]), Fraction(entry["hi"]))
            pairs.append((formula, value))
    except (KeyError, TypeError, ValueError) as exc:
        raise DhppError(f"bad model file {path}: {exc}") from exc
    return PInterpretation.from_pairs(pairs)


def _run_solve(config: RunConfig, gp: GroundProgram, out: TextIO) -> int:
    result = enumerate_answer_sets(gp, limit=config.limit, seed=config.seed)
    if config.json_output:
        payload = {
            "answer_sets": [
                {"formulae": [_interval_json(f, v) for f, v in h.entries]}
                for h in result.interpretations
            ],
            "count": len(result.interpretations),
            "truncated": result.truncated,
        }
        json.dump(payload, out, indent=2)
        out.write("\n")
    else:
        for n, h in enumerate(result.interpretations, start=1):
            out.write(f"answer set {n}:\n")
            for formula, value in h.entries:
                out.write(f"  {formula} : {value}\n")
            if not h.entries:
                out.write("  (empty)\n")
        if result.truncated:
            out.write(f"(stopped after {config.limit} answer sets)\n")
        if not result.interpretations:
            out.write("no answer sets\n")
        else:
            plural = "s" if len(result.interpretations) != 1 else ""
            out.write(f"{len(result.interpretations)} answer set{plural}\n")
    return 0 if result.interpretations else 1


def _run_check(config: RunConfig, gp: GroundProgram, out: TextIO) -> int:
    if not config.model:
        raise DhppError("check-model needs --model FILE")
    h = _load_model(config.model)
    report = satisfies_program(gp, h)
    verdict, reason = (False, report.first_failure)
    if report.satisfied:
        verdict, reason = is_answer_set(gp, h)
    if config.json_output:
        payload = {
            "p_model": report.satisfied,
            "answer_set": verdict,
            "rules_satisfied": sum(report.rule_verdicts),
            "rules_total": len(report.rule_verdicts),
            "failure": reason,
        }
        json.dump(payload, out, indent=2)
        out.write("\n")
        return 0 if verdict else 1
    rules_ok = sum(report.rule_verdicts)
    out.write(f"rules satisfied: {rules_ok}/{len(report.rule_verdicts)}\n")
    if not report.satisfied:
        out.write(f"not a p-model: {report.first_failure}\n")
        return 1
    out.write("p-model: yes\n")
    if verdict:
        out.write("answer set: yes\n")
        return 0
    out.write(f"answer set: no ({reason})\n")
    return 1


def run(config: RunConfig, out: TextIO | None = None, err: TextIO | None = None) -> int:
    # resolved late so callers may swap sys.stdout after import
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    try:
        if not config.inputs:
            raise DhppError("no input files")
        if config.mode == "translate-dlp":
            classical = parse_classical(_read(config.inputs[0]), config.inputs[0])
            for path in config.inputs[1:]:
                classical.rules.extend(parse_classical(_read(path), path).rules)
            out.write(str(translate_dlp(classical)))
            return 0
        gp = _ground(config)
        if config.mode == "ground-only":
            out.write(str(gp))
            return 0
        if config.mode == "check-model":
            return _run_check(config, gp, out)
        return _run_solve(config, gp, out)
    except (DhppError, OSError) as exc:
        err.write(f"error: {exc}\n")
        return 2


def build_arg_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="dhpp",
        description="Ground, solve, check, and translate probability logic programs.",
    )
    ap.add_argument("inputs", nargs="+", metavar="FILE", help="program file(s)")
    ap.add_argument("--mode", choices=MODES, default="solve")
    ap.add_argument("--limit", type=int, default=None, metavar="N",
                    help="stop after N answer sets")
    ap.add_argument("--json", action="store_true", help="machine-readable output")
    ap.add_argument("--strategies", metavar="FILE", default=None,
                    help="directive file overriding the program's strategy assignment")
    ap.add_argument("--max-ground", type=int, default=100_000, metavar="N",
                    help="cap on ground rules and derivable atoms")
    ap.add_argument("--model", metavar="FILE", default=None,
                    help="candidate model JSON for check-model")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_arg_parser().parse_args(argv)
    seed_text = os.environ.get("DHPP_SEED")
    try:
        config = RunConfig(
            mode=args.mode,
            inputs=args.inputs,
            limit=args.limit,
            strategies=args.strategies,
            json_output=args.json,
            max_ground=args.max_ground,
            model=args.model,
            seed=int(seed_text) if seed_text else None,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
