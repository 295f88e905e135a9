"""Probability aggregate evaluation.

A ground set is a collection of <value : prob | condition> pairs. Under an
interpretation h the pairs whose conditions h satisfies form a multiset of
(value, prob) entries; the eleven aggregate functions map that multiset
either to a value interval (expectation family, suffix E) or to a pair of a
plain value and the joint probability of the selected members (suffix P).

Empty multisets follow the neutral-element conventions: additive functions
start from 0, multiplicative ones from 1, and the joint probability of no
members is [1,1]. min and max have no neutral element and come out
undefined, which is a value here, not an error.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .model import (
    GroundSet,
    Num,
    PInterpretation,
    ProbInterval,
    Term,
    ValueInterval,
    truth_leq,
)


class _Undefined:
    """Result of applying an aggregate outside its domain."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNDEFINED"


UNDEFINED = _Undefined()


@dataclass(frozen=True)
class EValue:
    """Expectation-family result: a value interval."""

    value: ValueInterval


@dataclass(frozen=True)
class PValue:
    """Probability-family result: plain value plus joint probability."""

    value: Fraction
    prob: ProbInterval


AggregateResult = EValue | PValue | _Undefined

Multiset = list[tuple[Term, ProbInterval]]


def build_multiset(gset: GroundSet, h: PInterpretation) -> Multiset:
    """Collect (value, prob) from the pairs whose conditions h satisfies.

    Two distinct pairs that agree on value and probability both contribute,
    so the result is a genuine multiset.
    """
    out: Multiset = []
    for pair in gset.pairs:
        if all(truth_leq(ann, h.value(f)) for f, ann in pair.condition):
            out.append((pair.value, pair.prob))
    return out


def scalar_interval_product(c: Fraction, iv: ValueInterval) -> ValueInterval:
    """c * [lo, hi]; a negative scalar flips the endpoints."""
    a, b = c * iv.lo, c * iv.hi
    if a <= b:
        return ValueInterval(a, b)
    return ValueInterval(b, a)


def joint_probability(ms: Multiset) -> ProbInterval:
    """Componentwise product of the member annotations; [1,1] when empty."""
    lo = hi = Fraction(1)
    for _, prob in ms:
        lo *= prob.lo
        hi *= prob.hi
    return ProbInterval(lo, hi)


def _numeric_values(ms: Multiset) -> list[Fraction] | None:
    values = []
    for term, _ in ms:
        if not isinstance(term, Num):
            return None
        values.append(term.value)
    return values


def _interval_sum(parts: list[ValueInterval]) -> ValueInterval:
    lo = sum((p.lo for p in parts), Fraction(0))
    hi = sum((p.hi for p in parts), Fraction(0))
    return ValueInterval(lo, hi)


def eval_aggregate(func: str, ms: Multiset) -> AggregateResult:
    """Apply one of the eleven aggregate functions to a selected multiset."""
    if func == "countE":
        return EValue(scalar_interval_product(Fraction(len(ms)), joint_probability(ms)))
    if func == "countP":
        return PValue(Fraction(len(ms)), joint_probability(ms))

    values = _numeric_values(ms)
    if values is None:
        return UNDEFINED  # non-numeric members fall outside the domain

    if func == "valE":
        return EValue(_interval_sum([scalar_interval_product(v, prob) for v, (_, prob) in zip(values, ms)]))

    if func in ("minE", "maxE", "minP", "maxP") and not ms:
        return UNDEFINED

    if func.startswith("sum"):
        x = sum(values, Fraction(0))
    elif func.startswith("times"):
        x = Fraction(1)
        for v in values:
            x *= v
    elif func.startswith("min"):
        x = min(values)
    else:
        x = max(values)

    if func.endswith("E"):
        return EValue(scalar_interval_product(x, joint_probability(ms)))
    return PValue(x, joint_probability(ms))
