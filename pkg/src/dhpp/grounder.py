"""Grounding: from rules with variables to finite ground programs.

Object variables are bound by matching positive plain body literals against
the derivable-atom index, a fixpoint over rule heads that over-approximates
everything any interpretation of interest can support. Variables that remain
free after matching (guard-only or comparison-only occurrences) are
enumerated over the universe of ground terms seen in the program.

Annotation variables bind positionally: matching a literal annotated [P1,P2]
against an indexed entry with value [l,u] binds P1 to l and P2 to u; the
single-variable form :P tries both endpoints. Annotation variables that only
occur where no entry can bind them (inside function applications, or on
compound formulae) stay free and surface as UnboundAnnotationVariable.

A body literal with the constant annotation [0,0] is satisfied vacuously, so
its arguments are enumerated over the universe instead of the index.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

from .errors import UniverseOverflow, UnsupportedConstruct
from .model import (
    AggregateAtom,
    Annotation,
    AnnotationLike,
    AnnVar,
    Atom,
    BodyLiteral,
    BuiltinComparison,
    evaluate_annotation,
    FuncTerm,
    GroundPair,
    GroundSet,
    HybridFormula,
    Num,
    ProbabilitySet,
    ProbInterval,
    Program,
    Rule,
    substitute_term,
    Term,
    term_is_ground,
    term_variables,
    Var,
    ZERO,
)
from .strategies import (
    CONJUNCTIVE,
    DISJUNCTIVE,
    PStrategy,
    StrategyRegistry,
    builtin_registry,
    compose_fold,
)

Env = dict[str, Term]


# -- universe ----------------------------------------------------------------


def _ground_subterms(t: Term) -> set[Term]:
    if isinstance(t, (Var,)):
        return set()
    if isinstance(t, FuncTerm):
        out: set[Term] = set()
        for a in t.args:
            out |= _ground_subterms(a)
        if term_is_ground(t):
            out.add(t)
        return out
    if term_is_ground(t):
        return {t}
    return set()


def collect_universe(program: Program) -> tuple[Term, ...]:
    """All ground terms appearing in argument or guard position."""
    terms: set[Term] = set()

    def from_atom(atom: Atom) -> None:
        for a in atom.args:
            terms.update(_ground_subterms(a))

    def from_formula(f: HybridFormula) -> None:
        for a in f.atoms:
            from_atom(a)

    def from_item(item, ann) -> None:
        if isinstance(item, HybridFormula):
            from_formula(item)
        elif isinstance(item, BuiltinComparison):
            terms.update(_ground_subterms(item.left))
            terms.update(_ground_subterms(item.right))
        elif isinstance(item, AggregateAtom):
            terms.update(_ground_subterms(item.guard_lo))
            terms.update(_ground_subterms(item.guard_hi))
            if isinstance(item.pset, ProbabilitySet):
                terms.update(_ground_subterms(item.pset.value))
                for formula, _ in item.pset.condition:
                    from_formula(formula)
            else:
                for pair in item.pset.pairs:
                    terms.update(_ground_subterms(pair.value))
                    for formula, _ in pair.condition:
                        from_formula(formula)

    for rule in program.rules:
        for atom, _ in rule.head:
            from_atom(atom)
        for item, ann in rule.pos_body + rule.neg_body:
            from_item(item, ann)
    return tuple(sorted(terms, key=str))


# -- the derivable-atom index -------------------------------------------------


class AtomIndex:
    """Ground atoms with the annotation values they can be derived at."""

    def __init__(self, max_entries: int):
        self.values: dict[Atom, set[ProbInterval]] = {}
        self.by_pred: dict[tuple[str, int], list[Atom]] = {}
        self.max_entries = max_entries
        self.size = 0

    def add(self, atom: Atom, value: ProbInterval) -> bool:
        known = self.values.get(atom)
        if known is None:
            known = set()
            self.values[atom] = known
            self.by_pred.setdefault((atom.predicate, len(atom.args)), []).append(atom)
        if value in known:
            return False
        known.add(value)
        self.size += 1
        if self.size > self.max_entries:
            raise UniverseOverflow(
                f"derivable-atom index exceeded {self.max_entries} entries"
            )
        return True

    def candidates(self, predicate: str, arity: int) -> list[Atom]:
        return self.by_pred.get((predicate, arity), [])


# -- unification and literal matching ------------------------------------------


def unify_term(pattern: Term, value: Term, env: Env) -> Env | None:
    """Match a pattern term against a ground term, extending env."""
    if isinstance(pattern, Var):
        bound = env.get(pattern.name)
        if bound is None:
            out = dict(env)
            out[pattern.name] = value
            return out
        return env if bound == value else None
    if isinstance(pattern, FuncTerm):
        if not isinstance(value, FuncTerm) or pattern.name != value.name:
            return None
        if len(pattern.args) != len(value.args):
            return None
        for p, v in zip(pattern.args, value.args):
            nxt = unify_term(p, v, env)
            if nxt is None:
                return None
            env = nxt
        return env
    resolved = substitute_term(pattern, env)
    if resolved is None or not term_is_ground(resolved):
        return None
    return env if resolved == value else None


def unify_atom(pattern: Atom, fact: Atom, env: Env) -> Env | None:
    if pattern.predicate != fact.predicate or len(pattern.args) != len(fact.args):
        return None
    for p, v in zip(pattern.args, fact.args):
        nxt = unify_term(p, v, env)
        if nxt is None:
            return None
        env = nxt
    return env


def _bind_ann_var(env: Env, name: str, value) -> Env | None:
    bound = env.get(name)
    term = Num(value)
    if bound is None:
        out = dict(env)
        out[name] = term
        return out
    return env if bound == term else None


def annotation_bindings(ann: AnnotationLike, value: ProbInterval, env: Env) -> list[Env]:
    """Envs binding the annotation's variables against an indexed value."""
    if not isinstance(ann, Annotation):
        return [env]
    lo, hi = ann.lo, ann.hi
    if isinstance(lo, AnnVar) and isinstance(hi, AnnVar) and lo.name == hi.name:
        # :P form, try both endpoints
        outs = []
        for v in dict.fromkeys((value.lo, value.hi)):
            nxt = _bind_ann_var(env, lo.name, v)
            if nxt is not None:
                outs.append(nxt)
        return outs
    out: Env | None = env
    if isinstance(lo, AnnVar):
        out = _bind_ann_var(out, lo.name, value.lo)
        if out is None:
            return []
    if isinstance(hi, AnnVar):
        out = _bind_ann_var(out, hi.name, value.hi)
        if out is None:
            return []
    return [out]


def _is_vacuous(ann: AnnotationLike) -> bool:
    return isinstance(ann, ProbInterval) and ann == ZERO


class _Budget:
    def __init__(self, limit: int, what: str):
        self.limit = limit
        self.used = 0
        self.what = what

    def spend(self, n: int = 1) -> None:
        self.used += n
        if self.used > self.limit:
            raise UniverseOverflow(f"{self.what} exceeded {self.limit}")


def _enumerate_atom(atom: Atom, env: Env, universe: tuple[Term, ...], budget: _Budget):
    """Bind an atom's arguments over the whole universe (vacuous literals)."""
    free = sorted(atom.variables() - set(env))
    if not free:
        yield env
        return
    for combo in itertools.product(universe, repeat=len(free)):
        budget.spend()
        out = dict(env)
        out.update(zip(free, combo))
        yield out


def match_conjunct(
    formula: HybridFormula,
    ann: AnnotationLike,
    env: Env,
    index: AtomIndex,
    universe: tuple[Term, ...],
    budget: _Budget,
):
    """Envs under which the conjunct can match derivable atoms.

    Atomic conjuncts also bind annotation variables from the indexed values.
    Compound conjuncts bind object variables per component atom; their
    annotation variables have nothing to bind against.
    """
    if _is_vacuous(ann):
        envs = [env]
        for atom in formula.atoms:
            envs = [e2 for e in envs for e2 in _enumerate_atom(atom, e, universe, budget)]
        yield from envs
        return
    if formula.is_atomic:
        atom = formula.atoms[0]
        for fact in index.candidates(atom.predicate, len(atom.args)):
            nxt = unify_atom(atom, fact, env)
            if nxt is None:
                continue
            for value in index.values[fact]:
                budget.spend()
                yield from annotation_bindings(ann, value, nxt)
        return
    envs = [env]
    for atom in formula.atoms:
        new: list[Env] = []
        for e in envs:
            for fact in index.candidates(atom.predicate, len(atom.args)):
                budget.spend()
                nxt = unify_atom(atom, fact, e)
                if nxt is not None:
                    new.append(nxt)
        envs = new
    yield from envs


def _rule_object_vars(rule: Rule) -> set[str]:
    """Variables needing a binding before the rule can ground: everything
    outside symbolic sets (set-locals are bound per pair)."""
    out: set[str] = set()
    for atom, ann in rule.head:
        out |= atom.variables()
    for item, ann in rule.pos_body + rule.neg_body:
        if isinstance(item, HybridFormula):
            out |= item.variables()
        elif isinstance(item, BuiltinComparison):
            out |= term_variables(item.left) | term_variables(item.right)
        elif isinstance(item, AggregateAtom):
            out |= term_variables(item.guard_lo) | term_variables(item.guard_hi)
    return out


def _plain_literals(rule: Rule) -> list[BodyLiteral]:
    plain = [
        (item, ann)
        for item, ann in rule.pos_body
        if isinstance(item, HybridFormula)
    ]
    # defer literals with arithmetic arguments until others have bound things
    def has_arith(lit: BodyLiteral) -> bool:
        formula = lit[0]
        return any(
            not isinstance(a, (Var,)) and not term_is_ground(a)
            for atom in formula.atoms
            for a in atom.args
        )

    return sorted(plain, key=has_arith)


def rule_bindings(
    rule: Rule,
    index: AtomIndex,
    universe: tuple[Term, ...],
    budget: _Budget,
) -> list[Env]:
    """Ground substitutions for a rule's object and annotation variables."""
    envs: list[Env] = [{}]
    for formula, ann in _plain_literals(rule):
        new: list[Env] = []
        for env in envs:
            new.extend(match_conjunct(formula, ann, env, index, universe, budget))
        envs = new
        if not envs:
            return []
    # residual enumeration for guard-only or comparison-only variables
    needed = _rule_object_vars(rule)
    out: list[Env] = []
    for env in envs:
        free = sorted(needed - set(env))
        if not free:
            out.append(env)
            continue
        for combo in itertools.product(universe, repeat=len(free)):
            budget.spend()
            e2 = dict(env)
            e2.update(zip(free, combo))
            out.append(e2)
    return out


# -- applying a substitution ----------------------------------------------------


def substitute_atom(atom: Atom, env: Env) -> Atom | None:
    args = []
    for a in atom.args:
        t = substitute_term(a, env)
        if t is None or not term_is_ground(t):
            return None
        args.append(t)
    return Atom(atom.predicate, tuple(args))


def substitute_formula(formula: HybridFormula, env: Env) -> HybridFormula | None:
    atoms = []
    for atom in formula.atoms:
        ga = substitute_atom(atom, env)
        if ga is None:
            return None
        atoms.append(ga)
    if formula.is_atomic:
        return HybridFormula.atomic(atoms[0])
    if len(set(atoms)) != len(atoms):
        # distinctness can collapse under substitution; no such ground formula
        return None
    return HybridFormula(tuple(atoms), formula.connective, formula.strategy)


def ground_symbolic_set(
    pset: ProbabilitySet,
    env: Env,
    index: AtomIndex,
    universe: tuple[Term, ...],
    budget: _Budget,
) -> GroundSet:
    """Instantiate a symbolic set's local variables against the index."""
    envs: list[Env] = [env]
    for formula, ann in pset.condition:
        new: list[Env] = []
        for e in envs:
            new.extend(match_conjunct(formula, ann, e, index, universe, budget))
        envs = new
        if not envs:
            break
    pairs: list[GroundPair] = []
    seen: set[GroundPair] = set()
    for e in envs:
        value = substitute_term(pset.value, e)
        if value is None or not term_is_ground(value):
            continue
        prob = evaluate_annotation(Annotation(pset.lo, pset.hi), e)
        condition = []
        ok = True
        for formula, ann in pset.condition:
            gf = substitute_formula(formula, e)
            if gf is None:
                ok = False
                break
            condition.append((gf, evaluate_annotation(ann, e)))
        if not ok:
            continue
        pair = GroundPair(value, prob, tuple(condition))
        if pair not in seen:
            seen.add(pair)
            pairs.append(pair)
    pairs.sort(key=str)
    return GroundSet(tuple(pairs))


def _ground_guard(term: Term, env: Env) -> Term:
    t = substitute_term(term, env)
    if t is None or not isinstance(t, Num):
        raise UnsupportedConstruct(f"aggregate guard {term} is not numeric")
    return t


def _ground_literal(
    item,
    ann: AnnotationLike,
    env: Env,
    index: AtomIndex,
    universe: tuple[Term, ...],
    budget: _Budget,
) -> BodyLiteral | None:
    if isinstance(item, HybridFormula):
        gf = substitute_formula(item, env)
        if gf is None:
            return None
        return gf, evaluate_annotation(ann, env)
    if isinstance(item, AggregateAtom):
        if isinstance(item.pset, ProbabilitySet):
            gset = ground_symbolic_set(item.pset, env, index, universe, budget)
        else:
            gset = item.pset
        atom = AggregateAtom(
            item.func,
            gset,
            item.cmp,
            _ground_guard(item.guard_lo, env),
            _ground_guard(item.guard_hi, env),
        )
        return atom, evaluate_annotation(ann, env)
    raise AssertionError(f"unexpected body item {item!r}")


def ground_rule(
    rule: Rule,
    index: AtomIndex,
    universe: tuple[Term, ...],
    budget: _Budget,
) -> list[Rule]:
    out: list[Rule] = []
    for env in rule_bindings(rule, index, universe, budget):
        builtins_ok = True
        for item, _ in rule.pos_body:
            if isinstance(item, BuiltinComparison):
                left = substitute_term(item.left, env)
                right = substitute_term(item.right, env)
                if left is None or right is None:
                    builtins_ok = False
                    break
                if not BuiltinComparison(left, item.op, right).holds():
                    builtins_ok = False
                    break
        if not builtins_ok:
            continue
        head = []
        ok = True
        for atom, ann in rule.head:
            ga = substitute_atom(atom, env)
            if ga is None:
                ok = False
                break
            head.append((ga, evaluate_annotation(ann, env)))
        if not ok:
            continue
        pos = []
        for item, ann in rule.pos_body:
            if isinstance(item, BuiltinComparison):
                continue
            lit = _ground_literal(item, ann, env, index, universe, budget)
            if lit is None:
                ok = False
                break
            pos.append(lit)
        if not ok:
            continue
        neg = []
        for item, ann in rule.neg_body:
            lit = _ground_literal(item, ann, env, index, universe, budget)
            if lit is None:
                ok = False
                break
            neg.append(lit)
        if not ok:
            continue
        out.append(Rule(tuple(head), tuple(pos), tuple(neg)))
    return out


# -- the ground program ----------------------------------------------------------


@dataclass
class GroundProgram(Program):
    """A fully ground program; every rule is variable-free."""

    def strategy_for(self, predicate: str) -> PStrategy:
        return self.registry.get_kind(self.tau_name(predicate), DISJUNCTIVE)

    def formula_strategy(self, formula: HybridFormula) -> PStrategy | None:
        if formula.is_atomic:
            return None
        kind = CONJUNCTIVE if formula.connective == "and" else DISJUNCTIVE
        return self.registry.get_kind(formula.strategy, kind)

    @cached_property
    def relevant_formulae(self) -> tuple[HybridFormula, ...]:
        """Every formula whose value an interpretation of this program can
        constrain: head atoms, body formulae and their component atoms, and
        formulae inside aggregate pair conditions."""
        seen: set[HybridFormula] = set()

        def add_formula(f: HybridFormula) -> None:
            seen.add(f)
            if not f.is_atomic:
                for atom in f.atoms:
                    seen.add(HybridFormula.atomic(atom))

        for rule in self.rules:
            for atom, _ in rule.head:
                seen.add(HybridFormula.atomic(atom))
            for item, _ in rule.pos_body + rule.neg_body:
                if isinstance(item, HybridFormula):
                    add_formula(item)
                elif isinstance(item, AggregateAtom):
                    for pair in item.pset.pairs:
                        for formula, _ in pair.condition:
                            add_formula(formula)
        return tuple(sorted(seen, key=str))

    def head_annotations(self) -> dict[Atom, list[ProbInterval]]:
        """Annotation of every head occurrence, one entry per occurrence."""
        out: dict[Atom, list[ProbInterval]] = {}
        for rule in self.rules:
            for atom, ann in rule.head:
                out.setdefault(atom, []).append(ann)
        return out

    def value_lattice(self, cap: int = 200_000) -> dict[HybridFormula, tuple[ProbInterval, ...]]:
        """Per formula, every value an answer set could assign it.

        Atoms take fold values over sub-multisets of their head-occurrence
        annotations; compound formulae take strategy compositions over
        component values. Sorted ascending by (lo, hi).
        """
        occurrences = self.head_annotations()
        lattice: dict[HybridFormula, tuple[ProbInterval, ...]] = {}
        total = 0
        for formula in self.relevant_formulae:
            if not formula.is_atomic:
                continue
            atom = formula.atoms[0]
            strat = self.strategy_for(atom.predicate)
            acc: set[ProbInterval] = {ZERO}
            for ann in occurrences.get(atom, ()):
                grown = {ann} | {strat.compose(v, ann) for v in acc}
                acc |= grown
                if len(acc) > cap:
                    raise UniverseOverflow(f"value lattice for {atom} exceeded {cap}")
            total += len(acc)
            if total > cap:
                raise UniverseOverflow(f"value lattice exceeded {cap} entries")
            lattice[formula] = tuple(sorted(acc, key=lambda v: (v.lo, v.hi)))
        for formula in self.relevant_formulae:
            if formula.is_atomic:
                continue
            strat = self.formula_strategy(formula)
            component = [lattice[HybridFormula.atomic(a)] for a in formula.atoms]
            size = 1
            for c in component:
                size *= len(c)
            if size > cap:
                raise UniverseOverflow(f"value lattice for {formula} exceeded {cap}")
            values = {ZERO}
            for combo in itertools.product(*component):
                values.add(compose_fold(strat, combo))
            total += len(values)
            if total > cap:
                raise UniverseOverflow(f"value lattice exceeded {cap} entries")
            lattice[formula] = tuple(sorted(values, key=lambda v: (v.lo, v.hi)))
        return lattice


def ground_program(
    program: Program,
    registry: StrategyRegistry | None = None,
    max_rules: int = 100_000,
    max_index: int = 100_000,
) -> GroundProgram:
    """Ground every rule, or raise UniverseOverflow past the caps."""
    if registry is None:
        registry = program.registry if program.registry is not None else builtin_registry()
    universe = collect_universe(program)
    index = AtomIndex(max_index)
    budget = _Budget(max(max_rules * 50, 1_000_000), "grounding work")

    changed = True
    while changed:
        changed = False
        for rule in program.rules:
            for env in rule_bindings(rule, index, universe, budget):
                skip = False
                for item, _ in rule.pos_body:
                    if isinstance(item, BuiltinComparison):
                        left = substitute_term(item.left, env)
                        right = substitute_term(item.right, env)
                        if (
                            left is None
                            or right is None
                            or not BuiltinComparison(left, item.op, right).holds()
                        ):
                            skip = True
                            break
                if skip:
                    continue
                for atom, ann in rule.head:
                    ga = substitute_atom(atom, env)
                    if ga is None:
                        continue
                    value = evaluate_annotation(ann, env)
                    changed |= index.add(ga, value)

    rules: list[Rule] = []
    seen: set[Rule] = set()
    for rule in program.rules:
        for ground in ground_rule(rule, index, universe, budget):
            if ground in seen:
                continue
            seen.add(ground)
            rules.append(ground)
            if len(rules) > max_rules:
                raise UniverseOverflow(f"ground program exceeded {max_rules} rules")
    return GroundProgram(
        rules=rules,
        tau=dict(program.tau),
        default_tau=program.default_tau,
        registry=registry,
    )
