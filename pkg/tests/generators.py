"""Random program builders and brute-force references for differential tests.

The solver is checked against two independent computations: a full product
enumeration over the derivable-value lattice (probability side) and an
exhaustive classical oracle (translation side).  Both are deliberately
naive; they only need to be obviously correct at toy scale.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from math import prod

from dhpp import (
    Atom,
    ClassicalProgram,
    ClassicalRule,
    HybridFormula,
    PInterpretation,
    ProbInterval,
    Program,
    Rule,
    builtin_registry,
    ground_program,
    interp_lt,
    satisfies_program,
    truth_leq,
)
from dhpp.grounder import GroundProgram
from dhpp.solver import _scoped_reduct

ANNOTATIONS = [Fraction(3, 10), Fraction(1, 2), Fraction(7, 10), Fraction(1)]
GRID = [Fraction(0), Fraction(3, 10), Fraction(1, 2), Fraction(7, 10), Fraction(1)]


def point(q) -> ProbInterval:
    return ProbInterval(q, q)


def random_interval(rng: random.Random) -> ProbInterval:
    lo, hi = sorted(rng.choices(GRID, k=2))
    return ProbInterval(lo, hi)


def random_leq_interpretations(
    rng: random.Random, formulae
) -> tuple[PInterpretation, PInterpretation]:
    """Two interpretations with h1 <=t h2 pointwise over the given formulae."""
    low, high = [], []
    for f in formulae:
        a = rng.choice(GRID)
        b = rng.choice([g for g in GRID if g >= a])
        c = rng.choice([g for g in GRID if g >= a])
        d = rng.choice([g for g in GRID if g >= max(b, c)])
        low.append((f, ProbInterval(a, b)))
        high.append((f, ProbInterval(c, d)))
    return PInterpretation.from_pairs(low), PInterpretation.from_pairs(high)


# ---------------------------------------------------------------------------
# Probability programs


def random_probability_program(
    rng: random.Random, max_atoms: int = 5, max_rules: int = 6
) -> GroundProgram:
    atoms = [Atom(name) for name in "abcde"[: rng.randint(1, max_atoms)]]
    rules = []
    for _ in range(rng.randint(1, max_rules)):
        width = 2 if len(atoms) > 1 and rng.random() < 0.3 else 1
        head = tuple(
            (a, point(rng.choice(ANNOTATIONS))) for a in rng.sample(atoms, width)
        )
        pos, neg = [], []
        for _ in range(rng.randint(0, 2)):
            literal = (
                HybridFormula.atomic(rng.choice(atoms)),
                point(rng.choice(ANNOTATIONS)),
            )
            (neg if rng.random() < 0.4 else pos).append(literal)
        rules.append(Rule(head, tuple(pos), tuple(neg)))
    default = "ind" if rng.random() < 0.2 else "pcd"
    program = Program(
        rules=rules, tau={}, default_tau=default, registry=builtin_registry()
    )
    return ground_program(program)


def brute_force_answer_sets(
    gp: GroundProgram, cap: int = 30_000
) -> list[PInterpretation] | None:
    """Definition-level enumeration; None when the lattice product is too big."""
    lattice = gp.value_lattice()
    formulae = list(gp.relevant_formulae)
    domains = [lattice[f] for f in formulae]
    total = prod(len(d) for d in domains)
    if total > cap:
        return None

    combos = [
        PInterpretation.from_pairs(zip(formulae, values))
        for values in itertools.product(*domains)
    ]
    models = [h for h in combos if satisfies_program(gp, h).satisfied]

    answer_sets = []
    for h in models:
        red = _scoped_reduct(gp, h)
        below = [
            [v for v in dom if truth_leq(v, h.value(f))]
            for f, dom in zip(formulae, domains)
        ]
        minimal = True
        for values in itertools.product(*below):
            smaller = PInterpretation.from_pairs(zip(formulae, values))
            if interp_lt(smaller, h) and satisfies_program(red, smaller).satisfied:
                minimal = False
                break
        if minimal:
            answer_sets.append(h)
    answer_sets.sort(key=str)
    return answer_sets


def definite_fixpoint(gp: GroundProgram) -> PInterpretation:
    """Bottom-up least model of a ground program with plain positive bodies,
    single-atom heads, and no aggregates."""
    atoms = sorted(
        {f.atoms[0] for f in gp.relevant_formulae if f.is_atomic}, key=str
    )
    values = {a: ProbInterval(0, 0) for a in atoms}
    for _ in range(len(gp.rules) + 2):
        fired: dict[Atom, list[ProbInterval]] = {a: [] for a in atoms}
        for rule in gp.rules:
            assert not rule.neg_body, "definite programs only"
            body_ok = all(
                truth_leq(ann, values[item.atoms[0]]) for item, ann in rule.pos_body
            )
            if body_ok:
                assert len(rule.head) == 1, "definite programs only"
                atom, ann = rule.head[0]
                fired[atom].append(ann)
        new_values = {}
        for atom in atoms:
            strat = gp.strategy_for(atom.predicate)
            folded = None
            for ann in fired[atom]:
                folded = ann if folded is None else strat.compose(folded, ann)
            new_values[atom] = folded if folded is not None else ProbInterval(0, 0)
        if new_values == values:
            break
        values = new_values
    return PInterpretation.from_pairs(
        (HybridFormula.atomic(a), v) for a, v in values.items()
    )


def random_definite_program(rng: random.Random, max_atoms: int = 5) -> GroundProgram:
    atoms = [Atom(name) for name in "abcde"[: rng.randint(1, max_atoms)]]
    rules = []
    for _ in range(rng.randint(1, 6)):
        head = ((rng.choice(atoms), point(rng.choice(ANNOTATIONS))),)
        pos = tuple(
            (HybridFormula.atomic(rng.choice(atoms)), point(rng.choice(ANNOTATIONS)))
            for _ in range(rng.randint(0, 2))
        )
        rules.append(Rule(head, pos, ()))
    program = Program(
        rules=rules, tau={}, default_tau="pcd", registry=builtin_registry()
    )
    return ground_program(program)


# ---------------------------------------------------------------------------
# Classical programs


def random_classical_program(
    rng: random.Random, max_atoms: int = 6, max_rules: int = 8
) -> ClassicalProgram:
    atoms = [Atom(name) for name in "abcdef"[: rng.randint(1, max_atoms)]]
    rules = []
    for _ in range(rng.randint(1, max_rules)):
        roll = rng.random()
        if roll < 0.1:
            head: tuple[Atom, ...] = ()
        elif roll < 0.6 or len(atoms) == 1:
            head = (rng.choice(atoms),)
        else:
            head = tuple(rng.sample(atoms, 2))
        pos, neg = [], []
        for _ in range(rng.randint(0, 3)):
            (neg if rng.random() < 0.4 else pos).append(rng.choice(atoms))
        if not head and not (pos or neg):
            continue  # bare falsum helps nothing
        rules.append(ClassicalRule(head, tuple(pos), tuple(neg)))
    if not rules:
        rules.append(ClassicalRule((atoms[0],), (), ()))
    return ClassicalProgram(rules)
