"""Satisfaction-likelihood metrics over the concern forest.

deg_pos(c) counts (property, component) pairs: the denominator is every pair
where the property positively impacts c and the component can provide it, the
numerator is the subset where the component is currently active with the
property. The prose definition speaks of properties alone; the computation is
over pairs because only pair counting reproduces the reference magnitudes.
Note the numerator checks activity only, not the prop fluent itself.

los(c) multiplies deg_pos(c) with the los of every subconcern. The weighted
variant sums los over aspects with caller-supplied weights; the lexicographic
variant compares two states along a priority list of aspects.

All of this is mode-independent: only active atoms are inspected.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Mapping

from .errors import EngineError
from .model import CpsTheory, Fluent
from .transition import State


def _rel_pairs(theory: CpsTheory, concern: str) -> tuple[tuple[str, str], ...]:
    o = theory.ontology
    pairs = []
    for (p, c) in sorted(o.positive_impact):
        if c != concern or p not in o.addressed(concern):
            continue
        for co in theory.system.related(p):
            pairs.append((p, co))
    return tuple(pairs)


def deg_pos(theory: CpsTheory, concern: str, state: State) -> Fraction:
    if concern not in theory.ontology.concern_ids():
        raise EngineError("UNKNOWN_CONCERN", f"no concern named {concern!r}")
    pairs = _rel_pairs(theory, concern)
    if not pairs:
        return Fraction(1)
    num = sum(1 for (p, co) in pairs if state.truth(Fluent(p, co)))
    return Fraction(num, len(pairs))


def los_value(theory: CpsTheory, concern: str, state: State,
              _cache: dict[str, Fraction] | None = None) -> Fraction:
    if concern not in theory.ontology.concern_ids():
        raise EngineError("UNKNOWN_CONCERN", f"no concern named {concern!r}")
    cache = _cache if _cache is not None else {}
    if concern in cache:
        return cache[concern]
    value = deg_pos(theory, concern, state)
    for sub in theory.ontology.concern(concern).subconcerns:
        value *= los_value(theory, sub, state, cache)
    cache[concern] = value
    return value


def los_table(theory: CpsTheory, state: State) -> dict[str, dict[str, Fraction]]:
    cache: dict[str, Fraction] = {}
    out: dict[str, dict[str, Fraction]] = {}
    for c in sorted(theory.ontology.concern_ids()):
        out[c] = {
            "deg_pos": deg_pos(theory, c, state),
            "los": los_value(theory, c, state, cache),
        }
    return out


def effective_weights(theory: CpsTheory, weights: Mapping[str, Fraction] | None) -> dict[str, Fraction]:
    """Caller-supplied weights, falling back to the theory's analysis defaults.
    Aspects without a weight contribute 0."""
    chosen = weights if weights is not None else theory.analysis.weights
    out: dict[str, Fraction] = {}
    for aspect in theory.ontology.aspects():
        w = chosen.get(aspect, Fraction(0))
        if w < 0:
            raise EngineError("NEGATIVE_WEIGHT", f"weight of {aspect!r} is negative")
        out[aspect] = w
    for name in chosen:
        if name not in theory.ontology.aspects():
            raise EngineError("UNKNOWN_CONCERN", f"weight names unknown aspect {name!r}")
    return out


def weighted_los(theory: CpsTheory, state: State,
                 weights: Mapping[str, Fraction] | None = None) -> Fraction:
    w = effective_weights(theory, weights)
    cache: dict[str, Fraction] = {}
    total = Fraction(0)
    for aspect in theory.ontology.aspects():
        total += los_value(theory, aspect, state, cache) * w[aspect]
    return total


def check_priority(theory: CpsTheory, priority: tuple[str, ...]) -> tuple[str, ...]:
    aspects = set(theory.ontology.aspects())
    seen: set[str] = set()
    for a in priority:
        if a not in aspects:
            raise EngineError("UNKNOWN_CONCERN", f"priority names unknown aspect {a!r}")
        if a in seen:
            raise EngineError("DUPLICATE_PRIORITY", f"aspect {a!r} listed twice in priority")
        seen.add(a)
    return tuple(priority)


def lex_vector(theory: CpsTheory, state: State,
               priority: tuple[str, ...] | None = None) -> tuple[Fraction, ...]:
    chosen = check_priority(theory, tuple(priority) if priority is not None
                            else theory.analysis.priority)
    cache: dict[str, Fraction] = {}
    return tuple(los_value(theory, a, state, cache) for a in chosen)


def lex_compare(theory: CpsTheory, s1: State, s2: State,
                priority: tuple[str, ...] | None = None) -> int:
    """1 when s1 wins the lexicographic comparison, -1 when s2 does, 0 on ties.
    Aspects that are not listed are ignored entirely."""
    v1 = lex_vector(theory, s1, priority)
    v2 = lex_vector(theory, s2, priority)
    if v1 > v2:
        return 1
    if v1 < v2:
        return -1
    return 0
