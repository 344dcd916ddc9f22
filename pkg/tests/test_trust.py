"""Trust pair counting, the exact weights, and the trustworthiness order."""
from __future__ import annotations

import random
from fractions import Fraction

import generators
import oracles
from concernkit import (
    Concern,
    CpsSystem,
    CpsTheory,
    Fluent,
    Ontology,
)
from concernkit.concerns import Evaluator
from concernkit.transition import initial_state, state_of
from concernkit.trust import compare_trust, rank_components, trust_pairs, trust_scores


def by_component(scores):
    return {s.component: s for s in scores}


# ---------------------------------------------------------------------------
# Fixture scores, frozen

def test_scores_at_the_healthy_state(lkas):
    s = initial_state(lkas)
    scores = by_component(trust_scores(lkas, s, mode="plain"))
    assert (scores["bat"].pos_pairs, scores["bat"].npos_pairs) == (4, 0)
    assert scores["bat"].tw == Fraction(4)
    assert scores["bat"].impact == 0
    for sensor in ("cam", "sam"):
        assert (scores[sensor].pos_pairs, scores[sensor].npos_pairs) == (4, 4)
        assert scores[sensor].tw == Fraction(4, 5)
        assert scores[sensor].impact == 4


def test_scores_are_mode_stable_here(lkas):
    s = initial_state(lkas)
    plain = [(x.component, x.tw) for x in trust_scores(lkas, s, mode="plain")]
    grounded = [(x.component, x.tw) for x in trust_scores(lkas, s, mode="grounded")]
    assert plain == grounded


def test_attacked_state_zeroes_everyone(lkas_attacked):
    s = initial_state(lkas_attacked)
    scores = by_component(trust_scores(lkas_attacked, s, mode="grounded"))
    for x in ("bat", "cam", "sam"):
        assert scores[x].tw == 0
        assert (scores[x].pos_pairs, scores[x].npos_pairs) == (0, 4)


def test_pair_sets_propagate_to_ancestors(lkas):
    s = initial_state(lkas)
    ev = Evaluator(lkas, "plain")
    pos, npos = trust_pairs(lkas, "bat", s, ev)
    assert pos == {("integrity", "powerful_mode"),
                   ("cybersecurity", "powerful_mode"),
                   ("security", "powerful_mode"),
                   ("trustworthiness", "powerful_mode")}
    assert npos == frozenset()
    pos_cam, npos_cam = trust_pairs(lkas, "cam", s, ev)
    assert {p for _, p in pos_cam} == {"secure_boot"}
    assert {p for _, p in npos_cam} == {"basic_mode"}


def test_inactive_or_false_properties_earn_nothing(lkas):
    s = initial_state(lkas)
    ev = Evaluator(lkas, "plain")
    pos, npos = trust_pairs(lkas, "bat", s, ev)
    # saving/normal are not actively provided at this state: no pairs at all
    assert all(p == "powerful_mode" for _, p in pos | npos)


# ---------------------------------------------------------------------------
# Ranking and comparisons

def test_fixture_ranking(lkas):
    r = rank_components(lkas, initial_state(lkas), mode="plain")
    assert r.most == ("bat",)
    assert r.least == ("cam", "sam")
    assert r.ranking == (("bat",), ("cam", "sam"))


def test_attacked_ranking_collapses_to_one_group(lkas_attacked):
    r = rank_components(lkas_attacked, initial_state(lkas_attacked), mode="grounded")
    assert r.ranking == (("bat", "cam", "sam"),)
    assert r.most == r.least == ("bat", "cam", "sam")


def test_compare_is_antisymmetric_on_the_fixture(lkas):
    s = initial_state(lkas)
    assert compare_trust(lkas, "bat", "cam", s, mode="plain") == 1
    assert compare_trust(lkas, "cam", "bat", s, mode="plain") == -1
    assert compare_trust(lkas, "cam", "sam", s, mode="plain") == 0


def test_zero_weight_ties_break_by_impact():
    """Fully untrusted components order by how much they negatively touch."""
    ontology = Ontology(
        concerns=(Concern("c"),),
        properties=frozenset({"p", "q"}),
        addressed_by={"c": frozenset({"p", "q"})},
        positive_impact=frozenset(),
    )
    system = CpsSystem(
        components=("heavy", "light"),
        relation={"heavy": frozenset({"p"}), "light": frozenset({"q"})},
        actions=(), statics=(), gamma=(),
    )
    theory = CpsTheory(ontology=ontology, system=system, initial={
        Fluent("p"): True, Fluent("q"): True,
        Fluent("p", "heavy"): True, Fluent("q", "light"): False,
    })
    s = initial_state(theory)
    scores = by_component(trust_scores(theory, s, mode="plain"))
    assert scores["heavy"].tw == scores["light"].tw == 0
    assert scores["heavy"].impact == 1 and scores["light"].impact == 0
    r = rank_components(theory, s, mode="plain")
    assert r.most == ("light",)
    assert r.least == ("heavy",)


# ---------------------------------------------------------------------------
# Order properties on random instances

def test_order_is_total_and_transitive_on_random_instances():
    rng = random.Random(99)
    for _ in range(30):
        theory = generators.random_concern_theory(rng)
        assignment = generators.random_assignment(rng, theory)
        s = state_of(theory, assignment)
        comps = theory.system.components
        rel = {(a, b): compare_trust(theory, a, b, s, mode="plain")
               for a in comps for b in comps}
        for a in comps:
            assert rel[(a, a)] == 0
            for b in comps:
                assert rel[(a, b)] == -rel[(b, a)]
                for c in comps:
                    if rel[(a, b)] >= 0 and rel[(b, c)] >= 0:
                        assert rel[(a, c)] >= 0


def test_scores_match_the_pair_recount_on_random_instances():
    rng = random.Random(123)
    for _ in range(30):
        theory = generators.random_concern_theory(rng)
        assignment = generators.random_assignment(rng, theory)
        s = state_of(theory, assignment)
        scores = by_component(trust_scores(theory, s, mode="plain"))
        for x in theory.system.components:
            pos, npos = oracles.trust_pairs(theory, x, assignment, "plain")
            assert scores[x].pos_pairs == len(pos)
            assert scores[x].npos_pairs == len(npos)
            assert scores[x].tw == Fraction(len(pos), len(npos) + 1)
