"""Mitigation planning, plan scoring, and noncompliance detection.

A mitigation for a set of goal concerns is a nonempty action sequence, up to a
horizon, whose execution from the start state cannot fail (no branch dies) and
whose every reachable final state satisfies every goal concern. The planner
walks the prefix tree depth-first over sorted action ids, carrying the set of
states reachable by the current prefix; a prefix with a dead branch is cut
entirely, which is sound because the multi-step semantics collapses any
extension of a dead plan to the empty result.

Noncompliance checks quantify over every valid initial state and every action
sequence (length 0..n) over a designated action subset: weak asks whether some
pair fails a designated concern, strong asks whether all pairs do. Failure is
read literally off the plan-entailment definition, so an inexecutable plan
violates every concern.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .concerns import Evaluator, GROUNDED, resolve_mode
from .errors import BranchAmbiguous, BudgetExceeded, EngineError, NotExecutable
from .los import check_priority, lex_vector, weighted_los
from .model import CpsTheory
from .transition import State, engine, enumerate_states, initial_state, run, step

DEFAULT_BUDGET = 10**6

POLICIES = ("weighted", "lexicographic", "max_probability")


@dataclass(frozen=True)
class MitigationPlan:
    actions: tuple[str, ...]
    final_states: tuple[State, ...]

    @property
    def length(self) -> int:
        return len(self.actions)


@dataclass(frozen=True)
class Witness:
    initial: State
    plan: tuple[str, ...]
    violated_concern: str | None  # None for a compliant witness (strong=false)


@dataclass(frozen=True)
class NoncomplianceReport:
    mode: str  # "weak" | "strong"
    n: int
    verdict: bool
    witness: Witness | None


def _known_concerns(theory: CpsTheory, concerns: Iterable[str]) -> tuple[str, ...]:
    declared = set(theory.ontology.concern_ids())
    out = tuple(concerns)
    for c in out:
        if c not in declared:
            raise EngineError("UNKNOWN_CONCERN", f"no concern named {c!r}")
    return out


def _known_actions(theory: CpsTheory, actions: Iterable[str]) -> tuple[str, ...]:
    out = tuple(actions)
    for a in out:
        if theory.system.action(a) is None:
            raise EngineError("UNKNOWN_ACTION", f"no action named {a!r}")
    return out


def find_mitigations(theory: CpsTheory, concerns: Sequence[str], horizon: int,
                     mode: str | None = None, minimal: bool = False,
                     start: State | None = None,
                     budget: int = DEFAULT_BUDGET) -> tuple[MitigationPlan, ...]:
    """Every mitigation of length 1..horizon, in canonical order (length,
    then action-id tuple). With ``minimal`` set, any plan extending an already
    satisfying plan is dropped along with its whole subtree."""
    goals = _known_concerns(theory, concerns)
    ev = Evaluator(theory, resolve_mode(theory, mode, GROUNDED))
    s0 = start if start is not None else initial_state(theory)
    action_ids = sorted(a.id for a in theory.system.actions)

    results: list[MitigationPlan] = []
    nodes = 0

    def dfs(prefix: tuple[str, ...], frontier: tuple[State, ...]) -> None:
        nonlocal nodes
        for a in action_ids:
            nodes += 1
            if nodes > budget:
                raise BudgetExceeded(f"mitigation search exceeded {budget} nodes")
            nxt: dict[int, State] = {}
            dead = False
            for s in frontier:
                succs = step(theory, a, s)
                if not succs:
                    dead = True
                    break
                for v in succs:
                    nxt[v.bits] = v
            if dead:
                continue
            plan = prefix + (a,)
            finals = tuple(sorted(nxt.values(), key=State.key))
            valid = all(ev.satisfied(c, s) for c in goals for s in finals)
            if valid:
                results.append(MitigationPlan(plan, finals))
            if len(plan) < horizon and not (minimal and valid):
                dfs(plan, finals)

    if horizon >= 1:
        dfs((), (s0,))
    results.sort(key=lambda m: (m.length, m.actions))
    return tuple(results)


def _success_probability(theory: CpsTheory, action_id: str, s: State) -> Fraction:
    eng = engine(theory)
    act = eng.action(action_id)
    t, f = s.bits, ~s.bits & eng.full
    applicable = [p for (p, ct, cf) in act.success if (ct & t) == ct and (cf & f) == cf]
    if not applicable:
        return Fraction(1)
    if len(set(applicable)) > 1:
        raise EngineError("PROB_INCONSISTENT",
                          f"action {action_id!r} has conflicting success rules in one state")
    return applicable[0]


def plan_success_probability(theory: CpsTheory, plan: Sequence[str],
                             start: State | None = None) -> Fraction:
    """Product of per-step success probabilities along the execution tree.

    Every branch must agree on the product; disagreement raises
    BRANCH_AMBIGUOUS, a dead branch raises NOT_EXECUTABLE.
    """
    s0 = start if start is not None else initial_state(theory)
    products: set[Fraction] = set()

    def walk(i: int, s: State, acc: Fraction) -> None:
        if i == len(plan):
            products.add(acc)
            return
        succs = step(theory, plan[i], s)
        if not succs:
            raise NotExecutable(f"plan dies at step {i + 1} ({plan[i]!r})")
        p = _success_probability(theory, plan[i], s)
        for v in succs:
            walk(i + 1, v, acc * p)

    walk(0, s0, Fraction(1))
    if len(products) > 1:
        raise BranchAmbiguous("branches of the plan yield different success probabilities")
    return products.pop()


@dataclass(frozen=True)
class Selection:
    policy: str
    best: tuple[MitigationPlan, ...]
    scoreboard: tuple[tuple[MitigationPlan, object], ...]  # plan -> Fraction or vector


def select_preferred(theory: CpsTheory, plans: Sequence[MitigationPlan], policy: str,
                     weights: Mapping[str, Fraction] | None = None,
                     priority: Sequence[str] | None = None,
                     start: State | None = None) -> Selection:
    """Rank plans under one preference policy and return every argmax.

    weighted: best weighted satisfaction likelihood over the plan's final
    states; lexicographic: best priority-ordered likelihood vector over final
    states; max_probability: success probability of the plan itself.
    """
    if policy not in POLICIES:
        raise EngineError("UNKNOWN_POLICY", f"policy must be one of {POLICIES}")
    if policy == "lexicographic":
        check_priority(theory, tuple(priority) if priority is not None
                       else theory.analysis.priority)

    scored: list[tuple[MitigationPlan, object]] = []
    for plan in plans:
        if policy == "weighted":
            score: object = max(weighted_los(theory, s, weights) for s in plan.final_states)
        elif policy == "lexicographic":
            score = max(lex_vector(theory, s, tuple(priority) if priority is not None else None)
                        for s in plan.final_states)
        else:
            score = plan_success_probability(theory, plan.actions, start)
        scored.append((plan, score))

    best_plans: tuple[MitigationPlan, ...] = ()
    if scored:
        top = max(score for _, score in scored)  # type: ignore[type-var]
        best_plans = tuple(plan for plan, score in scored if score == top)
    return Selection(policy=policy, best=best_plans, scoreboard=tuple(scored))


_DEAD = None  # frontier marker for plans whose run already collapsed


def detect_noncompliance(theory: CpsTheory, sa: Sequence[str], sc: Sequence[str], n: int,
                         check: str = "weak", mode: str | None = None,
                         bound: int = 24, budget: int = DEFAULT_BUDGET) -> NoncomplianceReport:
    """Sweep every (initial state, plan) pair looking for concern violations.

    weak: verdict true iff some pair fails some concern of ``sc``; the witness
    is the first such pair in canonical order (initial states in canonical
    state order, plans by length then lexicographically over ``sa``).
    strong: verdict true iff every pair fails; a compliant pair is returned as
    the witness when the verdict is false.
    """
    if check not in ("weak", "strong"):
        raise EngineError("INVALID_CHECK", "check must be weak or strong")
    if n < 0:
        raise EngineError("INVALID_HORIZON", "plan length bound must be nonnegative")
    actions = tuple(sorted(_known_actions(theory, sa)))
    concerns = tuple(sorted(_known_concerns(theory, sc)))
    ev = Evaluator(theory, resolve_mode(theory, mode, GROUNDED))

    nodes = 0

    def violated_in(frontier: tuple[State, ...] | None) -> str | None:
        if frontier is _DEAD:
            return concerns[0] if concerns else None
        for c in concerns:
            if not all(ev.satisfied(c, s) for s in frontier):
                return c
        return None

    for s0 in enumerate_states(theory, bound=bound):
        layer: list[tuple[tuple[str, ...], tuple[State, ...] | None]] = [((), (s0,))]
        for _ in range(n + 1):
            for plan, frontier in layer:
                bad = violated_in(frontier)
                if check == "weak" and bad is not None:
                    return NoncomplianceReport("weak", n, True, Witness(s0, plan, bad))
                if check == "strong" and bad is None:
                    return NoncomplianceReport("strong", n, False, Witness(s0, plan, None))
            if len(layer[0][0]) == n:
                break
            nxt: list[tuple[tuple[str, ...], tuple[State, ...] | None]] = []
            for plan, frontier in layer:
                for a in actions:
                    nodes += 1
                    if nodes > budget:
                        raise BudgetExceeded(f"noncompliance sweep exceeded {budget} nodes")
                    if frontier is _DEAD:
                        nxt.append((plan + (a,), _DEAD))
                        continue
                    merged: dict[int, State] = {}
                    dead = False
                    for s in frontier:
                        succs = step(theory, a, s)
                        if not succs:
                            dead = True
                            break
                        for v in succs:
                            merged[v.bits] = v
                    nxt.append((plan + (a,),
                                _DEAD if dead else tuple(sorted(merged.values(), key=State.key))))
            layer = nxt
            if not layer:
                break
    if check == "weak":
        return NoncomplianceReport("weak", n, False, None)
    return NoncomplianceReport("strong", n, True, None)
