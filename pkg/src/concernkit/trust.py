"""Component trust scores and the trustworthiness ordering.

A component earns a positive pair (c, p) when it actively provides a true
property p addressed by some concern c0 that declares positive impact for p
and is itself satisfied in the state; the pair then counts for c0 and every
ancestor of c0. Pairs that are addressed but miss positivity or satisfaction
count on the negative side, propagated the same way. The trust weight is
pos / (npos + 1) as an exact rational, and ``impact`` is the negative count,
used to break ties between fully untrusted components (lower impact wins).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key

from .concerns import Evaluator, PLAIN, resolve_mode
from .model import CpsTheory, Fluent
from .transition import State


@dataclass(frozen=True)
class TrustScore:
    component: str
    pos_pairs: int
    npos_pairs: int
    tw: Fraction
    impact: int


@dataclass(frozen=True)
class Ranking:
    most: tuple[str, ...]
    least: tuple[str, ...]
    ranking: tuple[tuple[str, ...], ...]  # groups of equals, best first


def trust_pairs(theory: CpsTheory, component: str, state: State,
                evaluator: Evaluator) -> tuple[frozenset, frozenset]:
    """The propagated (concern, property) pair sets behind a component's score."""
    o = theory.ontology
    pos: set[tuple[str, str]] = set()
    npos: set[tuple[str, str]] = set()
    for p in sorted(theory.system.relation.get(component, frozenset())):
        if not (state.truth(Fluent(p)) and state.truth(Fluent(p, component))):
            continue
        for c0 in o.concern_ids():
            if p not in o.addressed(c0):
                continue
            positive = (p, c0) in o.positive_impact and evaluator.satisfied(c0, state)
            target = pos if positive else npos
            target.add((c0, p))
            for anc in o.ancestors(c0):
                target.add((anc, p))
    return frozenset(pos), frozenset(npos)


def trust_scores(theory: CpsTheory, state: State, mode: str | None = None,
                 evaluator: Evaluator | None = None) -> tuple[TrustScore, ...]:
    ev = evaluator if evaluator is not None else Evaluator(theory, resolve_mode(theory, mode, PLAIN))
    out = []
    for x in sorted(theory.system.components):
        pos, npos = trust_pairs(theory, x, state, ev)
        out.append(TrustScore(
            component=x,
            pos_pairs=len(pos),
            npos_pairs=len(npos),
            tw=Fraction(len(pos), len(npos) + 1),
            impact=len(npos),
        ))
    return tuple(out)


def _compare(a: TrustScore, b: TrustScore) -> int:
    """1 when a is more trustworthy than b, -1 when less, 0 when equal."""
    if a.tw != b.tw:
        return 1 if a.tw > b.tw else -1
    if a.tw == 0:  # both fully untrusted: lower impact is better
        if a.impact != b.impact:
            return 1 if a.impact < b.impact else -1
    return 0


def compare_trust(theory: CpsTheory, x1: str, x2: str, state: State,
                  mode: str | None = None) -> int:
    scores = {s.component: s for s in trust_scores(theory, state, mode)}
    return _compare(scores[x1], scores[x2])


def rank_components(theory: CpsTheory, state: State, mode: str | None = None,
                    evaluator: Evaluator | None = None) -> Ranking:
    scores = trust_scores(theory, state, mode, evaluator)
    ordered = sorted(scores, key=cmp_to_key(_compare), reverse=True)
    groups: list[list[str]] = []
    group_rep: TrustScore | None = None
    for s in ordered:
        if group_rep is not None and _compare(group_rep, s) == 0:
            groups[-1].append(s.component)
        else:
            groups.append([s.component])
            group_rep = s
    ranking = tuple(tuple(sorted(g)) for g in groups)
    return Ranking(
        most=ranking[0] if ranking else (),
        least=ranking[-1] if ranking else (),
        ranking=ranking,
    )
