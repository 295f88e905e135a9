import random
from fractions import Fraction

import pytest

from dhpp import (
    AggregateAtom,
    Atom,
    ProbInterval,
    UniverseOverflow,
    ground_program,
    parse_program,
)
from dhpp.model import ZERO, HybridFormula, Num
from generators import random_probability_program


def ground(text: str, **kwargs):
    return ground_program(parse_program(text), **kwargs)


def rule_strings(gp) -> set[str]:
    return {str(r) for r in gp.rules}


def first_aggregate(gp) -> AggregateAtom:
    for rule in gp.rules:
        for item, _ in rule.pos_body + rule.neg_body:
            if isinstance(item, AggregateAtom):
                return item
    raise AssertionError("no aggregate in program")


def test_ground_rule_without_variables_is_identity():
    gp = ground("a(1):0.5 :- b(2):0.3.\nb(2):0.3.")
    assert "a(1):0.5 :- b(2):0.3." in rule_strings(gp)


def test_object_variable_instantiation():
    gp = ground("p(X) :- q(X).\nq(1).\nq(2).")
    assert rule_strings(gp) == {"q(1).", "q(2).", "p(1) :- q(1).", "p(2) :- q(2)."}


def test_false_builtins_drop_rules():
    gp = ground("a(X) :- b(X), X < 2.\nb(1).\nb(3).")
    texts = rule_strings(gp)
    assert "a(1) :- b(1)." in texts
    assert all("a(3)" not in t for t in texts)


def test_arithmetic_evaluated():
    gp = ground("d(X*2) :- b(X).\nb(3).")
    assert "d(6) :- b(3)." in rule_strings(gp)


def test_annotation_variable_bound_from_index():
    gp = ground("a : P :- b : P.\nb : 0.4.")
    assert "a:0.4 :- b:0.4." in rule_strings(gp)


def test_annotation_interval_variables_bind_positionally():
    gp = ground("a : [P1,P2] :- b : [P1,P2].\nb : [0.2,0.6].")
    assert "a:[0.2,0.6] :- b:[0.2,0.6]." in rule_strings(gp)


def test_dice_ground_set(dice_solved):
    agg = first_aggregate(dice_solved.ground)
    assert {str(p) for p in agg.pset.pairs} == {
        "<1 : 0.5 | a(1,1):0.5>",
        "<2 : 0.5 | a(2,1):0.5>",
        "<1 : 0.7 | a(1,2):0.7>",
        "<2 : 0.3 | a(2,2):0.3>",
    }


VITAMIN_A_PAIRS = {
    "<60 : 0.7 | nutr(beef,a,60,s1):0.7>",
    "<120 : 0.7 | nutr(beef,a,120,s1):0.7>",
    "<50 : 0.3 | nutr(beef,a,50,s2):0.3>",
    "<100 : 0.3 | nutr(beef,a,100,s2):0.3>",
    "<8 : 0.8 | nutr(fish,a,8,s1):0.8>",
    "<16 : 0.8 | nutr(fish,a,16,s1):0.8>",
    "<11 : 0.2 | nutr(fish,a,11,s2):0.2>",
    "<22 : 0.2 | nutr(fish,a,22,s2):0.2>",
    "<60 : 0.8 | nutr(turk,a,60,s1):0.8>",
    "<120 : 0.8 | nutr(turk,a,120,s1):0.8>",
    "<55 : 0.2 | nutr(turk,a,55,s2):0.2>",
    "<110 : 0.2 | nutr(turk,a,110,s2):0.2>",
}


def test_vitamin_a_constraint_grounds_to_twelve_pairs(diet_solved):
    aggregates = [
        item
        for rule in diet_solved.ground.rules
        for item, _ in rule.pos_body
        if isinstance(item, AggregateAtom)
    ]
    vit_a = [
        agg
        for agg in aggregates
        if any("nutr" in str(p) and ",a," in str(p) for p in agg.pset.pairs)
    ]
    assert len(vit_a) == 1
    assert {str(p) for p in vit_a[0].pset.pairs} == VITAMIN_A_PAIRS


def test_pckg_rule_grounds_per_food_and_scenario(diet_solved):
    pckg_rules = [
        r for r in diet_solved.ground.rules if r.head[0][0].predicate == "pckg"
    ]
    assert len(pckg_rules) == 6  # 3 foods x 2 scenarios


def test_nutr_rule_multiplies_units(diet_solved):
    texts = rule_strings(diet_solved.ground)
    assert (
        "nutr(beef,a,120,s1):0.7 :- units(beef,a,60,s1):0.7, pckg(beef,2,s1)."
        in texts
    )


def test_unmatched_condition_gives_empty_set():
    gp = ground("a :- sumP{X : P | b(X) : P} >= 1 : 0.5.")
    agg = first_aggregate(gp)
    assert agg.pset.pairs == ()


def test_vacuous_annotation_enumerates_universe():
    # a [0,0]-annotated conjunct holds under every interpretation
    gp = ground("p(X) :- q(X) : 0.\nq(1).\nr(2).")
    texts = rule_strings(gp)
    assert "p(1) :- q(1):0." in texts
    assert "p(2) :- q(2):0." in texts


def test_ground_output_has_no_variables(dice_solved, diet_solved):
    for gp in (dice_solved.ground, diet_solved.ground):
        for rule in gp.rules:
            assert rule.is_ground(), str(rule)


def test_grounding_is_monotone_in_facts():
    base = "p(X) :- q(X).\nq(1)."
    bigger = base + "\nq(2)."
    assert rule_strings(ground(base)) <= rule_strings(ground(bigger))


def test_random_programs_ground_clean():
    rng = random.Random(7)
    for _ in range(25):
        gp = random_probability_program(rng)
        for rule in gp.rules:
            assert rule.is_ground()


def test_universe_overflow_on_tiny_caps():
    text = "p(X,Y) :- q(X), q(Y).\n" + "\n".join(f"q({i})." for i in range(12))
    with pytest.raises(UniverseOverflow):
        ground(text, max_rules=20)


def test_value_lattice_contains_zero_and_head_folds(dice_solved):
    lattice = dice_solved.ground.value_lattice()
    half = ProbInterval(Fraction(1, 2), Fraction(1, 2))
    a11 = HybridFormula.atomic(Atom("a", (Num("1"), Num("1"))))
    assert ZERO in lattice[a11]
    assert half in lattice[a11]
    for formula, values in lattice.items():
        assert ZERO in values
        assert len(values) < 10


def test_relevant_formulae_include_aggregate_conditions(dice_solved):
    names = {str(f) for f in dice_solved.ground.relevant_formulae}
    assert {"a(1,1)", "a(2,1)", "a(1,2)", "a(2,2)", "__c"} <= names


def test_compound_lattice_composes_components():
    gp = ground("a : 0.5.\nb : 0.4.\nc :- a and[inc] b : 0.2.")
    compound = next(f for f in gp.relevant_formulae if not f.is_atomic)
    lattice = gp.value_lattice()
    product = ProbInterval(Fraction(1, 5), Fraction(1, 5))  # 0.5 * 0.4
    assert product in lattice[compound]
    assert ZERO in lattice[compound]
