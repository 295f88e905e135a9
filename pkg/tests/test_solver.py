import random

import pytest

from dhpp import (
    Atom,
    HybridFormula,
    PInterpretation,
    ProbInterval,
    SearchSpaceOverflow,
    enumerate_answer_sets,
    ground_program,
    interp_leq,
    is_answer_set,
    parse_program,
)
from dhpp.solver import find_smaller_model, pairwise_incomparable
from generators import (
    brute_force_answer_sets,
    definite_fixpoint,
    random_definite_program,
    random_probability_program,
)


def solve_text(text: str):
    gp = ground_program(parse_program(text))
    return gp, enumerate_answer_sets(gp)


def interp_strings(result) -> list[str]:
    return [str(h) for h in result.interpretations]


# -- the two-dice program ----------------------------------------------------------

DICE_ANSWER_SETS = [
    "{a(1,1):[0.5,0.5], a(1,2):[0.7,0.7]}",
    "{a(1,1):[0.5,0.5], a(2,2):[0.3,0.3]}",
    "{a(2,1):[0.5,0.5], a(2,2):[0.3,0.3]}",
]


def test_dice_answer_sets_exact(dice_solved):
    assert interp_strings(dice_solved.result) == DICE_ANSWER_SETS
    assert not dice_solved.result.truncated


def test_dice_excludes_the_discarded_roll(dice_solved):
    # faces 2 and 1 sum to 3 with joint probability 0.35 >= 0.3
    bad = PInterpretation.from_pairs(
        [
            (HybridFormula.atomic(Atom("a", ("2", "1"))), ProbInterval("0.5", "0.5")),
            (HybridFormula.atomic(Atom("a", ("1", "2"))), ProbInterval("0.7", "0.7")),
        ]
    )
    assert str(bad) not in interp_strings(dice_solved.result)
    ok, reason = is_answer_set(dice_solved.ground, bad)
    assert not ok
    assert reason is not None


def test_dice_answer_sets_verify(dice_solved):
    for h in dice_solved.result.interpretations:
        ok, reason = is_answer_set(dice_solved.ground, h)
        assert ok, reason


def test_dice_certificates_align(dice_solved):
    res = dice_solved.result
    assert len(res.certificates) == len(res.interpretations)
    assert all(c.reduct_size >= 1 for c in res.certificates)


# -- small hand-checked programs ---------------------------------------------------


def test_naf_supported_atom():
    _, res = solve_text("a : 0.5 :- not b : 1.")
    assert interp_strings(res) == ["{a:[0.5,0.5]}"]


def test_naf_self_blocking_has_no_answer_set():
    # b would have to be derived exactly when it is not
    _, res = solve_text("b : 1 :- not b : 1.")
    assert res.interpretations == []


def test_empty_program_has_the_empty_answer_set():
    _, res = solve_text("")
    assert len(res.interpretations) == 1
    assert res.interpretations[0].entries == ()


def test_disjunctive_fact_splits():
    _, res = solve_text("a : 0.4 | b : 0.6.")
    assert interp_strings(res) == ["{a:[0.4,0.4]}", "{b:[0.6,0.6]}"]


def test_positive_loop_stays_empty():
    _, res = solve_text("a : 0.5 :- b : 0.5.  b : 0.5 :- a : 0.5.")
    assert len(res.interpretations) == 1
    assert res.interpretations[0].entries == ()


def test_raised_atom_is_model_but_not_answer_set():
    gp, _ = solve_text("a : 0.5.")
    raised = PInterpretation.from_pairs(
        [(HybridFormula.atomic(Atom("a")), ProbInterval("0.9", "0.9"))]
    )
    ok, reason = is_answer_set(gp, raised)
    assert not ok
    assert "minimal" in reason


def test_foreign_formula_is_rejected():
    gp, _ = solve_text("a : 0.5.")
    stray = PInterpretation.from_pairs(
        [
            (HybridFormula.atomic(Atom("a")), ProbInterval("0.5", "0.5")),
            (HybridFormula.atomic(Atom("zzz")), ProbInterval("0.5", "0.5")),
        ]
    )
    ok, reason = is_answer_set(gp, stray)
    assert not ok
    assert "never mentions" in reason


def test_find_smaller_model_returns_witness():
    gp, _ = solve_text("a : 0.5.")
    a = HybridFormula.atomic(Atom("a"))
    top = PInterpretation.from_pairs([(a, ProbInterval(1, 1))])
    witness, nodes = find_smaller_model(gp, top, gp.value_lattice())
    assert witness is not None
    assert witness.value(a) == ProbInterval("0.5", "0.5")
    assert nodes >= 1


def test_find_smaller_model_none_at_bottom():
    gp, _ = solve_text("a : 0.5.")
    a = HybridFormula.atomic(Atom("a"))
    exact = PInterpretation.from_pairs([(a, ProbInterval("0.5", "0.5"))])
    witness, _ = find_smaller_model(gp, exact, gp.value_lattice())
    assert witness is None


# -- enumeration controls ----------------------------------------------------------


def test_limit_truncates(dice_solved):
    res = enumerate_answer_sets(dice_solved.ground, limit=2)
    assert len(res.interpretations) == 2
    assert res.truncated
    assert interp_strings(res) == DICE_ANSWER_SETS[:2]


def test_generous_limit_is_not_truncation(dice_solved):
    res = enumerate_answer_sets(dice_solved.ground, limit=50)
    assert len(res.interpretations) == 3
    assert not res.truncated


def test_enumeration_is_deterministic(dice_solved):
    again = enumerate_answer_sets(dice_solved.ground)
    assert interp_strings(again) == interp_strings(dice_solved.result)


def test_seed_shuffles_search_not_answers(dice_solved):
    for seed in (1, 7, 99):
        res = enumerate_answer_sets(dice_solved.ground, seed=seed)
        assert interp_strings(res) == DICE_ANSWER_SETS


def test_candidate_cap_overflows(dice_solved):
    with pytest.raises(SearchSpaceOverflow):
        enumerate_answer_sets(dice_solved.ground, max_candidates=1)


# -- incomparability ---------------------------------------------------------------


def test_answer_sets_pairwise_incomparable(dice_solved):
    assert pairwise_incomparable(dice_solved.result.interpretations)


def test_pairwise_incomparable_detects_order():
    a = HybridFormula.atomic(Atom("a"))
    b = HybridFormula.atomic(Atom("b"))
    small = PInterpretation.from_pairs([(a, ProbInterval("0.5", "0.5"))])
    big = PInterpretation.from_pairs(
        [(a, ProbInterval("0.5", "0.5")), (b, ProbInterval("0.3", "0.3"))]
    )
    assert interp_leq(small, big)
    assert not pairwise_incomparable([small, big])


# -- differential checks -----------------------------------------------------------


def test_definite_programs_have_their_fixpoint():
    rng = random.Random(404)
    for _ in range(30):
        gp = random_definite_program(rng)
        res = enumerate_answer_sets(gp)
        assert len(res.interpretations) == 1
        assert str(res.interpretations[0]) == str(definite_fixpoint(gp))


def test_matches_brute_force_on_random_programs():
    rng = random.Random(1105)
    checked = 0
    while checked < 40:
        gp = random_probability_program(rng)
        expected = brute_force_answer_sets(gp)
        if expected is None:
            continue
        got = enumerate_answer_sets(gp)
        assert [str(h) for h in got.interpretations] == [str(h) for h in expected]
        assert pairwise_incomparable(got.interpretations)
        checked += 1
