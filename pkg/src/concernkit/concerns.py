"""Concern formulas and satisfaction.

Each concern c gets one formula built from the theory's decomposition entries:
entries sharing a function are disjoined (members of a top-level ``or`` are
spliced inline rather than nested), distinct functions are conjoined in
first-occurrence order, and every addressed property that no entry mentions is
prepended as a bare positive literal, alphabetically. A concern is satisfied
in a state when its formula holds there and all of its subconcerns are
recursively satisfied.

Two evaluation modes exist. In ``plain`` mode a property literal is read off
the prop fluent directly. In ``grounded`` mode a property additionally needs
some related component actively providing it (active(co, p) true). Literals
over active atoms are direct lookups in both modes.
"""
from __future__ import annotations

from typing import Iterable

from .errors import EngineError
from .model import (
    And,
    CpsTheory,
    EVALUATION_MODES,
    Fluent,
    Formula,
    Lit,
    Literal,
    Not,
    Or,
    formula_properties,
)
from .transition import State, engine, initial_state, run

PLAIN = "plain"
GROUNDED = "grounded"


def resolve_mode(theory: CpsTheory, requested: str | None, operation_default: str) -> str:
    """Explicit request beats the theory's analysis default beats the
    operation's own default."""
    mode = requested or theory.analysis.evaluation_mode or operation_default
    if mode not in EVALUATION_MODES:
        raise EngineError("INVALID_MODE", f"evaluation mode must be one of {EVALUATION_MODES}")
    return mode


def lambda_formula(theory: CpsTheory, concern: str) -> Formula:
    """The satisfaction formula of a concern.

    Deterministic: unmentioned addressed properties first (sorted), then one
    conjunct per decomposition function in declaration order.
    """
    if concern not in theory.ontology.concern_ids():
        raise EngineError("UNKNOWN_CONCERN", f"no concern named {concern!r}")
    entries = [g for g in theory.system.gamma if g.concern == concern]

    groups: dict[str, list[Formula]] = {}
    for g in entries:
        members = groups.setdefault(g.function, [])
        if isinstance(g.formula, Or):
            members.extend(g.formula.members)
        else:
            members.append(g.formula)

    mentioned: set[str] = set()
    for g in entries:
        mentioned |= formula_properties(g.formula)
    leftovers = sorted(theory.ontology.addressed(concern) - mentioned)

    parts: list[Formula] = [Lit(Literal(Fluent(p))) for p in leftovers]
    for members in groups.values():
        parts.append(members[0] if len(members) == 1 else Or(tuple(members)))
    return And(tuple(parts))


class Evaluator:
    """Satisfaction for one (theory, mode) pair, memoized per (concern, state).

    Queries that touch many states (planning, noncompliance sweeps) construct
    one evaluator and reuse it; the caches are never shared across queries.
    """

    def __init__(self, theory: CpsTheory, mode: str):
        if mode not in EVALUATION_MODES:
            raise EngineError("INVALID_MODE", f"evaluation mode must be one of {EVALUATION_MODES}")
        self.theory = theory
        self.mode = mode
        eng = engine(theory)
        self._index = eng.index
        self._prop_bit: dict[str, int] = {}
        self._active_mask: dict[str, int] = {}
        for p in theory.ontology.properties:
            self._prop_bit[p] = 1 << eng.index[Fluent(p)]
            mask = 0
            for co in theory.system.related(p):
                mask |= 1 << eng.index[Fluent(p, co)]
            self._active_mask[p] = mask
        self._lambdas: dict[str, Formula] = {}
        self._fv: dict[tuple[str, int], bool] = {}
        self._sat: dict[tuple[str, int], bool] = {}

    def lambda_formula(self, concern: str) -> Formula:
        if concern not in self._lambdas:
            self._lambdas[concern] = lambda_formula(self.theory, concern)
        return self._lambdas[concern]

    def _literal(self, l: Literal, bits: int) -> bool:
        f = l.fluent
        if f.is_active:
            try:
                truth = bool(bits & (1 << self._index[f]))
            except KeyError:
                raise EngineError("UNKNOWN_ATOM", f"atom {f.render()} is outside the fluent universe")
        else:
            try:
                bit = self._prop_bit[f.prop]
            except KeyError:
                raise EngineError("UNKNOWN_ATOM", f"property {f.prop!r} is not declared")
            truth = bool(bits & bit)
            if self.mode == GROUNDED:
                truth = truth and bool(bits & self._active_mask[f.prop])
        return truth == l.value

    def eval_formula(self, f: Formula, state: State) -> bool:
        bits = state.bits
        def ev(node: Formula) -> bool:
            if isinstance(node, Lit):
                return self._literal(node.literal, bits)
            if isinstance(node, Not):
                return not ev(node.inner)
            if isinstance(node, And):
                return all(ev(m) for m in node.members)
            return any(ev(m) for m in node.members)
        return ev(f)

    def formula_value(self, concern: str, state: State) -> bool:
        key = (concern, state.bits)
        if key not in self._fv:
            self._fv[key] = self.eval_formula(self.lambda_formula(concern), state)
        return self._fv[key]

    def satisfied(self, concern: str, state: State) -> bool:
        key = (concern, state.bits)
        if key not in self._sat:
            c = self.theory.ontology.concern(concern)
            self._sat[key] = self.formula_value(concern, state) and all(
                self.satisfied(sub, state) for sub in c.subconcerns
            )
        return self._sat[key]

    def failing_subconcerns(self, concern: str, state: State) -> list[str]:
        c = self.theory.ontology.concern(concern)
        return [sub for sub in c.subconcerns if not self.satisfied(sub, state)]


def eval_formula(theory: CpsTheory, f: Formula, state: State, mode: str | None = None) -> bool:
    return Evaluator(theory, resolve_mode(theory, mode, PLAIN)).eval_formula(f, state)


def concern_satisfied(theory: CpsTheory, concern: str, state: State,
                      mode: str | None = None) -> bool:
    if concern not in theory.ontology.concern_ids():
        raise EngineError("UNKNOWN_CONCERN", f"no concern named {concern!r}")
    return Evaluator(theory, resolve_mode(theory, mode, PLAIN)).satisfied(concern, state)


def satisfaction_map(theory: CpsTheory, state: State, mode: str | None = None,
                     evaluator: Evaluator | None = None) -> dict[str, dict]:
    """Per-concern verdicts: satisfied flag, bare formula value, and which
    immediate subconcerns fail."""
    ev = evaluator if evaluator is not None else Evaluator(theory, resolve_mode(theory, mode, PLAIN))
    out: dict[str, dict] = {}
    for c in sorted(theory.ontology.concern_ids()):
        out[c] = {
            "satisfied": ev.satisfied(c, state),
            "formula_value": ev.formula_value(c, state),
            "failing_subconcerns": ev.failing_subconcerns(c, state),
        }
    return out


def satisfied_after(theory: CpsTheory, plan: Iterable[str], concern: str,
                    mode: str | None = None,
                    start: State | None = None, evaluator: Evaluator | None = None) -> bool:
    """Def-style plan entailment: the plan must be executable (nonempty run)
    and the concern must hold in every reachable final state."""
    if concern not in theory.ontology.concern_ids():
        raise EngineError("UNKNOWN_CONCERN", f"no concern named {concern!r}")
    s0 = start if start is not None else initial_state(theory)
    finals = run(theory, list(plan), s0)
    if not finals:
        return False
    ev = evaluator if evaluator is not None else Evaluator(theory, resolve_mode(theory, mode, PLAIN))
    return all(ev.satisfied(concern, s) for s in finals)
