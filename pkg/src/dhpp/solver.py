"""Answer-set enumeration.

Candidates come from a guess-and-close scheme: pick a disjunct for every
disjunctive rule, guess the final truth of every distinct aggregate literal
and every distinct negated literal, then run a monotone closure from the
empty interpretation. When a rule fires, the chosen disjunct contributes its
annotation, and so does any other disjunct already satisfied by the current
values; atom values are strategy folds over the contributed annotations,
compound values are strategy compositions over their components.

Every candidate is then checked exactly: it must be a p-model of the
program and a minimal p-model of its own reduct. Closure-based generation
is complete for the built-in strategies (their disjunctive compositions
never shrink below a component); exotic registered strategies keep exact
checking but may miss models whose values a closure cannot reach.

Minimality runs as a DFS over per-formula value domains at or below the
candidate, with unit propagation on rules whose bodies are decided.
Compound values are determined by their components throughout.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from .errors import SearchSpaceOverflow
from .grounder import GroundProgram
from .model import (
    AggregateAtom,
    Atom,
    BuiltinComparison,
    HybridFormula,
    interp_leq,
    PInterpretation,
    ProbInterval,
    Rule,
    truth_leq,
    ZERO,
)
from .semantics import _aggregate_satisfied, reduct, satisfies_program
from .strategies import compose_fold

GuessKey = tuple[str, object, ProbInterval]


@dataclass(frozen=True)
class Certificate:
    """Why an interpretation was accepted: how much work said so."""

    reduct_size: int
    minimality_nodes: int


@dataclass
class AnswerSetResult:
    interpretations: list[PInterpretation]
    certificates: list[Certificate]
    truncated: bool


def _scoped_reduct(gp: GroundProgram, h: PInterpretation) -> GroundProgram:
    red = reduct(gp, h)
    # the reduct shares the source program's formula scope: clause checks and
    # minimality quantify over every formula the original program mentions
    red.__dict__["relevant_formulae"] = gp.relevant_formulae
    return red


# -- candidate generation -------------------------------------------------------


def _guess_keys(gp: GroundProgram) -> list[GuessKey]:
    keys: set[GuessKey] = set()
    for rule in gp.rules:
        for item, ann in rule.pos_body:
            if isinstance(item, AggregateAtom):
                keys.add(("agg", item, ann))
        for item, ann in rule.neg_body:
            if isinstance(item, AggregateAtom):
                keys.add(("agg", item, ann))
            elif isinstance(item, HybridFormula):
                keys.add(("naf", item, ann))
    return sorted(keys, key=lambda k: (k[0], str(k[1]), str(k[2])))


def _body_fires(rule: Rule, values: dict[HybridFormula, ProbInterval], guesses) -> bool:
    for item, ann in rule.pos_body:
        if isinstance(item, HybridFormula):
            if not truth_leq(ann, values.get(item, ZERO)):
                return False
        elif isinstance(item, AggregateAtom):
            if not guesses[("agg", item, ann)]:
                return False
        elif isinstance(item, BuiltinComparison):
            if not item.holds():
                return False
    for item, ann in rule.neg_body:
        if isinstance(item, HybridFormula):
            if guesses[("naf", item, ann)]:
                return False
        elif isinstance(item, AggregateAtom):
            if guesses[("agg", item, ann)]:
                return False
    return True


def _closure(
    gp: GroundProgram,
    choices: dict[int, int],
    guesses: dict[GuessKey, bool],
) -> PInterpretation:
    atomics = {f.atoms[0]: f for f in gp.relevant_formulae if f.is_atomic}
    compounds = [f for f in gp.relevant_formulae if not f.is_atomic]
    values: dict[HybridFormula, ProbInterval] = {f: ZERO for f in gp.relevant_formulae}
    contributions: set[tuple[int, int]] = set()
    total_disjuncts = sum(len(rule.head) for rule in gp.rules)

    for _ in range(total_disjuncts + 2):
        new = set(contributions)
        for i, rule in enumerate(gp.rules):
            if not _body_fires(rule, values, guesses):
                continue
            chosen = choices.get(i, 0)
            new.add((i, chosen))
            for j, (atom, ann) in enumerate(rule.head):
                if j == chosen:
                    continue
                if truth_leq(ann, values[atomics[atom]]):
                    new.add((i, j))
        if new == contributions:
            break
        contributions = new
        per_atom: dict[Atom, list[ProbInterval]] = {}
        for i, j in contributions:
            atom, ann = gp.rules[i].head[j]
            per_atom.setdefault(atom, []).append(ann)
        for atom, formula in atomics.items():
            anns = per_atom.get(atom)
            if anns:
                values[formula] = compose_fold(gp.strategy_for(atom.predicate), anns)
            else:
                values[formula] = ZERO
        for formula in compounds:
            component = [values[atomics[a]] for a in formula.atoms]
            values[formula] = compose_fold(gp.formula_strategy(formula), component)
    return PInterpretation.from_pairs(values.items())


# -- minimality ---------------------------------------------------------------


class _MinimalitySearch:
    """DFS for a strictly smaller p-model of the reduct.

    Domains hold lattice values at or below the candidate; compound values
    are determined by components, so only atoms branch. Propagation: a rule
    whose body is decided true in the whole branch must keep a satisfiable
    head disjunct, and when only one disjunct can serve, its atom's domain
    shrinks to the satisfying values.
    """

    def __init__(
        self,
        red: GroundProgram,
        h: PInterpretation,
        lattice: dict[HybridFormula, tuple[ProbInterval, ...]],
        node_cap: int,
    ):
        self.red = red
        self.h = h
        self.node_cap = node_cap
        self.nodes = 0
        scope = red.relevant_formulae
        self.atom_order = [f for f in scope if f.is_atomic]
        self.compounds = [f for f in scope if not f.is_atomic]
        self.atomics = {f.atoms[0]: f for f in self.atom_order}
        self.domains: dict[HybridFormula, tuple[ProbInterval, ...]] = {}
        for f in self.atom_order:
            assigned = h.value(f)
            vals = {v for v in lattice.get(f, (ZERO,)) if truth_leq(v, assigned)}
            vals.add(assigned)
            self.domains[f] = tuple(sorted(vals, key=lambda v: (v.lo, v.hi)))

    def run(self) -> PInterpretation | None:
        return self._search(self.domains)

    def _spend(self) -> None:
        self.nodes += 1
        if self.nodes > self.node_cap:
            raise SearchSpaceOverflow(
                f"minimality search exceeded {self.node_cap} nodes"
            )

    # literal status in a branch: True/False when decided for every
    # completion of the domains, None when still open
    def _formula_values(self, formula, domains) -> tuple[ProbInterval, ...] | None:
        if formula.is_atomic:
            return domains[formula]
        component = []
        for a in formula.atoms:
            dom = domains[self.atomics[a]]
            if len(dom) != 1:
                return None
            component.append(dom[0])
        strat = self.red.formula_strategy(formula)
        return (compose_fold(strat, component),)

    def _plain_status(self, formula, ann, positive, domains) -> bool | None:
        vals = self._formula_values(formula, domains)
        if vals is None:
            return None
        hits = sum(1 for v in vals if truth_leq(ann, v))
        if hits == len(vals):
            return positive
        if hits == 0:
            return not positive
        return None

    def _aggregate_status(self, item, ann, positive, domains) -> bool | None:
        pairs = []
        for pair in item.pset.pairs:
            for formula, _ in pair.condition:
                vals = self._formula_values(formula, domains)
                if vals is None or len(vals) != 1:
                    return None
                pairs.append((formula, vals[0]))
        partial = PInterpretation.from_pairs(dict(pairs).items())
        sat = _aggregate_satisfied(partial, item, ann)
        return sat if positive else not sat

    def _rule_body_status(self, rule, domains) -> bool | None:
        decided_true = True
        for item, ann in rule.pos_body:
            if isinstance(item, HybridFormula):
                s = self._plain_status(item, ann, True, domains)
            elif isinstance(item, AggregateAtom):
                s = self._aggregate_status(item, ann, True, domains)
            else:
                s = item.holds()
            if s is False:
                return False
            if s is None:
                decided_true = False
        for item, ann in rule.neg_body:
            if isinstance(item, HybridFormula):
                s = self._plain_status(item, ann, False, domains)
            elif isinstance(item, AggregateAtom):
                s = self._aggregate_status(item, ann, False, domains)
            else:
                s = not item.holds()
            if s is False:
                return False
            if s is None:
                decided_true = False
        return True if decided_true else None

    def _propagate(self, domains) -> bool:
        changed = True
        while changed:
            changed = False
            for rule in self.red.rules:
                if self._rule_body_status(rule, domains) is not True:
                    continue
                satisfiable = []
                for atom, ann in rule.head:
                    f = self.atomics[atom]
                    ok = tuple(v for v in domains[f] if truth_leq(ann, v))
                    if ok:
                        satisfiable.append((f, ok))
                if not satisfiable:
                    return False
                if len(satisfiable) == 1:
                    f, ok = satisfiable[0]
                    if len(ok) < len(domains[f]):
                        domains[f] = ok
                        changed = True
        return True

    def _search(self, domains) -> PInterpretation | None:
        self._spend()
        domains = dict(domains)
        if not self._propagate(domains):
            return None
        open_formula = None
        for f in self.atom_order:
            if len(domains[f]) > 1:
                open_formula = f
                break
        if open_formula is None:
            return self._leaf(domains)
        for v in domains[open_formula]:
            branch = dict(domains)
            branch[open_formula] = (v,)
            witness = self._search(branch)
            if witness is not None:
                return witness
        return None

    def _leaf(self, domains) -> PInterpretation | None:
        pairs = [(f, domains[f][0]) for f in self.atom_order]
        for formula in self.compounds:
            vals = self._formula_values(formula, domains)
            value = vals[0]
            if not truth_leq(value, self.h.value(formula)):
                return None
            pairs.append((formula, value))
        candidate = PInterpretation.from_pairs(pairs)
        if candidate == self.h:
            return None
        if satisfies_program(self.red, candidate).satisfied:
            return candidate
        return None


def find_smaller_model(
    red: GroundProgram,
    h: PInterpretation,
    lattice: dict[HybridFormula, tuple[ProbInterval, ...]],
    node_cap: int = 500_000,
) -> tuple[PInterpretation | None, int]:
    """A p-model of red strictly below h, or None; plus nodes searched."""
    search = _MinimalitySearch(red, h, lattice, node_cap)
    witness = search.run()
    return witness, search.nodes


def is_answer_set(
    gp: GroundProgram,
    h: PInterpretation,
    node_cap: int = 500_000,
) -> tuple[bool, str | None]:
    """Exact check with a human-readable reason on rejection."""
    report = satisfies_program(gp, h)
    if not report.satisfied:
        return False, report.first_failure
    relevant = set(gp.relevant_formulae)
    for formula, value in h.entries:
        if formula not in relevant:
            return False, f"assigns {value} to {formula}, which the program never mentions"
    red = _scoped_reduct(gp, h)
    lattice = gp.value_lattice()
    witness, _ = find_smaller_model(red, h, lattice)
    if witness is not None:
        return False, f"not minimal: the reduct has a smaller p-model {witness}"
    return True, None


# -- enumeration ------------------------------------------------------------------


def enumerate_answer_sets(
    gp: GroundProgram,
    limit: int | None = None,
    max_candidates: int = 2_000_000,
    node_cap: int = 500_000,
    seed: int | None = None,
) -> AnswerSetResult:
    """All probability answer sets, canonically sorted.

    The seed shuffles candidate order, which can only matter for which
    models are found before a limit cuts enumeration short.
    """
    keys = _guess_keys(gp)
    disjunctive = [(i, len(rule.head)) for i, rule in enumerate(gp.rules) if len(rule.head) > 1]
    total = 2 ** len(keys)
    for _, n in disjunctive:
        total *= n
    if total > max_candidates:
        raise SearchSpaceOverflow(
            f"candidate space of {total} exceeds {max_candidates}; "
            "the program has too many independent guesses"
        )
    lattice = gp.value_lattice()

    combos = itertools.product(
        itertools.product((False, True), repeat=len(keys)),
        itertools.product(*(range(n) for _, n in disjunctive)),
    )
    if seed is not None:
        materialized = list(combos)
        random.Random(seed).shuffle(materialized)
        combos = iter(materialized)

    seen: set[PInterpretation] = set()
    found: list[tuple[PInterpretation, Certificate]] = []
    truncated = False
    for guess_bits, choice_bits in combos:
        guesses = dict(zip(keys, guess_bits))
        choices = {i: c for (i, _), c in zip(disjunctive, choice_bits)}
        h = _closure(gp, choices, guesses)
        if h in seen:
            continue
        seen.add(h)
        if not satisfies_program(gp, h).satisfied:
            continue
        red = _scoped_reduct(gp, h)
        witness, nodes = find_smaller_model(red, h, lattice, node_cap)
        if witness is not None:
            continue
        found.append((h, Certificate(len(red.rules), nodes)))
        if limit is not None and len(found) >= limit:
            truncated = True
            break
    found.sort(key=lambda pair: str(pair[0]))
    return AnswerSetResult(
        interpretations=[h for h, _ in found],
        certificates=[c for _, c in found],
        truncated=truncated,
    )


def pairwise_incomparable(interps: list[PInterpretation]) -> bool:
    """Distinct answer sets are never related by the truth order."""
    for a, b in itertools.combinations(interps, 2):
        if interp_leq(a, b) or interp_leq(b, a):
            return False
    return True
