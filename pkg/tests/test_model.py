from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dhpp import (
    ONE,
    ZERO,
    AggregateAtom,
    Atom,
    GroundSet,
    HybridFormula,
    InvalidInterval,
    PInterpretation,
    ProbInterval,
    Rule,
    ValueInterval,
    format_rational,
    interp_leq,
    interp_lt,
    truth_leq,
    truth_lt,
)
from dhpp.errors import ConstantOutOfRange, UnknownAnnotationFunction
from dhpp.model import (
    AnnConst,
    AnnFunc,
    AnnVar,
    Annotation,
    Num,
    as_fraction,
    interval_compare,
)

rationals = st.fractions(min_value=0, max_value=1, max_denominator=20)


@st.composite
def prob_intervals(draw):
    a, b = sorted((draw(rationals), draw(rationals)))
    return ProbInterval(a, b)


def iv(lo, hi=None) -> ProbInterval:
    if hi is None:
        hi = lo
    return ProbInterval(Fraction(str(lo)), Fraction(str(hi)))


# ---------------------------------------------------------------------------
# Rationals and intervals


def test_as_fraction_accepts_exact_forms():
    assert as_fraction("0.7") == Fraction(7, 10)
    assert as_fraction("1/3") == Fraction(1, 3)
    assert as_fraction(1) == Fraction(1)
    assert as_fraction(Fraction(2, 5)) == Fraction(2, 5)


def test_as_fraction_rejects_inexact_forms():
    with pytest.raises(TypeError):
        as_fraction(0.7)
    with pytest.raises(TypeError):
        as_fraction(True)


def test_format_rational():
    assert format_rational(Fraction(1, 2)) == "0.5"
    assert format_rational(Fraction(7, 10)) == "0.7"
    assert format_rational(Fraction(3)) == "3"
    assert format_rational(Fraction(1, 3)) == "1/3"
    assert format_rational(Fraction(1171, 5)) == "234.2"


def test_interval_construction_rejects_bad_endpoints():
    with pytest.raises(InvalidInterval):
        ValueInterval(Fraction(2), Fraction(1))
    with pytest.raises(InvalidInterval):
        ProbInterval(Fraction(-1, 10), Fraction(1, 2))
    with pytest.raises(InvalidInterval):
        ProbInterval(Fraction(1, 2), Fraction(11, 10))
    assert ValueInterval(Fraction(-5), Fraction(-2)).lo == -5  # values may leave [0,1]


def test_truth_order_examples():
    assert truth_leq(iv("0.2", "0.3"), iv("0.5", "0.9"))
    assert truth_leq(iv("0.3", "0.35"), iv("0.3", "0.35"))
    assert not truth_leq(iv("0.3", "0.6"), iv("0.4", "0.5"))  # upper bound decides
    assert not truth_lt(iv("0.3"), iv("0.3"))
    assert truth_lt(ZERO, ONE)


@given(prob_intervals(), prob_intervals(), prob_intervals())
def test_truth_leq_is_a_partial_order(x, y, z):
    assert truth_leq(x, x)
    if truth_leq(x, y) and truth_leq(y, x):
        assert x == y
    if truth_leq(x, y) and truth_leq(y, z):
        assert truth_leq(x, z)


def test_interval_compare_examples():
    v230 = ValueInterval(Fraction(230), Fraction(230))
    assert not interval_compare(v230, "<", v230)
    assert interval_compare(
        ValueInterval(Fraction(180), Fraction(200)),
        "<",
        ValueInterval(Fraction(190), Fraction(230)),
    )
    # componentwise comparison is partial: overlapping intervals decide neither way
    a = ValueInterval(Fraction(1), Fraction(5))
    b = ValueInterval(Fraction(2), Fraction(3))
    assert not interval_compare(a, "<", b)
    assert not interval_compare(b, "<", a)


@given(prob_intervals())
def test_interval_compare_reflexivity(x):
    assert interval_compare(x, "=", x)
    assert not interval_compare(x, "<", x)
    assert not interval_compare(x, "!=", x)
    assert interval_compare(x, "<=", x)


# ---------------------------------------------------------------------------
# Formulae and rules


def test_compound_formula_validation():
    a, b = Atom("a"), Atom("b")
    f = HybridFormula((a, b), "and", "inc")
    assert str(f) == "a and[inc] b"
    with pytest.raises(ValueError):
        HybridFormula((a, a), "or", "ind")  # atoms must be distinct
    with pytest.raises(ValueError):
        HybridFormula((a, b))  # connective required
    with pytest.raises(ValueError):
        HybridFormula((a,), "and", "inc")  # single atom takes no connective


def test_rule_requires_head():
    with pytest.raises(ValueError):
        Rule(head=())


def test_e_aggregate_annotation_forced_to_one():
    agg = AggregateAtom("sumE", GroundSet(()), ">=", Num("1"), Num("1"))
    rule = Rule(
        head=((Atom("a"), ONE),),
        pos_body=((agg, iv("0.4")),),
    )
    assert rule.pos_body[0][1] == ONE


def test_p_aggregate_annotation_kept():
    agg = AggregateAtom("sumP", GroundSet(()), ">=", Num("1"), Num("1"))
    rule = Rule(head=((Atom("a"), ONE),), pos_body=((agg, iv("0.4")),))
    assert rule.pos_body[0][1] == iv("0.4")


# ---------------------------------------------------------------------------
# Interpretations


def test_empty_interpretation_defaults_to_zero():
    h = PInterpretation()
    assert h.value(HybridFormula.atomic(Atom("b"))) == ZERO


def test_unstored_compound_defaults_to_zero():
    a = HybridFormula.atomic(Atom("a"))
    h = PInterpretation.from_pairs([(a, iv("0.5"))])
    compound = HybridFormula((Atom("a"), Atom("b")), "and", "inc")
    assert h.value(compound) == ZERO


def test_interpretation_normalizes_zero_entries():
    a = HybridFormula.atomic(Atom("a"))
    b = HybridFormula.atomic(Atom("b"))
    h = PInterpretation.from_pairs([(a, iv("0.5")), (b, ZERO)])
    assert h.support() == (a,)
    assert h == PInterpretation.from_pairs([(a, iv("0.5"))])


def test_interp_order():
    a = HybridFormula.atomic(Atom("a"))
    b = HybridFormula.atomic(Atom("b"))
    small = PInterpretation.from_pairs([(a, iv("0.5"))])
    big = PInterpretation.from_pairs([(a, iv("0.5")), (b, iv("0.3"))])
    assert interp_leq(small, big)
    assert interp_lt(small, big)
    assert not interp_leq(big, small)


# ---------------------------------------------------------------------------
# Annotations


def test_annotation_constant_range():
    with pytest.raises(ConstantOutOfRange):
        AnnConst("1.5")


def test_annotation_function_arity_checked():
    with pytest.raises(UnknownAnnotationFunction):
        AnnFunc("pcomp", (AnnConst("0.3"), AnnConst("0.4")))
    with pytest.raises(UnknownAnnotationFunction):
        AnnFunc("nope", (AnnConst("0.3"),))


def test_annotation_evaluation():
    env = {"P1": Num("0.5"), "P2": Num("0.7")}
    pmul = AnnFunc("pmul", (AnnVar("P1"), AnnVar("P2")))
    ann = Annotation(pmul, pmul)
    assert ann.evaluate(env) == iv("0.35")
    padd = Annotation(AnnFunc("padd", (AnnVar("P1"), AnnVar("P2"))), AnnConst("1"))
    assert padd.evaluate(env) == iv("1")  # sums cap at 1
    pcomp = Annotation(AnnFunc("pcomp", (AnnVar("P2"),)), AnnConst("0.5"))
    assert pcomp.evaluate(env) == iv("0.3", "0.5")
    assert Annotation(AnnVar("P1"), AnnVar("P2")).is_ground() is False
