"""Domain types for CPS theories and whole-theory validation.

A theory couples an ontology side (a forest of concerns, the properties that
address them, and which properties positively impact which concerns) with a
dynamic side (components, the properties each component can provide, fluents,
actions, and static laws), plus one initial state and optional analysis
defaults (aspect weights, a priority order, an evaluation mode).

All values here are immutable dataclasses. Validation never raises; the
``validate_*`` functions return lists of :class:`~concernkit.errors.Diagnostic`
records with stable codes, and an empty list means the input is well formed.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping, Union

from .errors import Diagnostic

TOKEN_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")

EVALUATION_MODES = ("plain", "grounded")


# ---------------------------------------------------------------------------
# Fluents and literals

@dataclass(frozen=True, order=True)
class Fluent:
    """A ground atom: either ``prop(p)`` (component is None) or ``active(co, p)``."""

    prop: str
    component: str | None = None

    @property
    def is_active(self) -> bool:
        return self.component is not None

    def render(self) -> str:
        if self.component is None:
            return self.prop
        return f"active {self.component} {self.prop}"

    def __repr__(self) -> str:  # keeps pytest diffs readable
        return f"Fluent({self.render()!r})"


def prop(p: str) -> Fluent:
    return Fluent(p)


def active(component: str, p: str) -> Fluent:
    return Fluent(p, component)


@dataclass(frozen=True, order=True)
class Literal:
    """A fluent with a sign. ``value=True`` means the atom holds."""

    fluent: Fluent
    value: bool = True

    def negated(self) -> "Literal":
        return Literal(self.fluent, not self.value)

    def render(self) -> str:
        text = self.fluent.render()
        return text if self.value else f"-{text}"

    def __repr__(self) -> str:
        return f"Literal({self.render()!r})"


def lit(fluent: Fluent, value: bool = True) -> Literal:
    return Literal(fluent, value)


def consistent(literals: Iterator[Literal] | tuple[Literal, ...]) -> bool:
    """True when no fluent occurs with both signs."""
    seen: dict[Fluent, bool] = {}
    for l in literals:
        prev = seen.setdefault(l.fluent, l.value)
        if prev != l.value:
            return False
    return True


# ---------------------------------------------------------------------------
# Formulas

@dataclass(frozen=True)
class Lit:
    literal: Literal


@dataclass(frozen=True)
class Not:
    inner: "Formula"


@dataclass(frozen=True)
class And:
    members: tuple["Formula", ...] = ()


@dataclass(frozen=True)
class Or:
    members: tuple["Formula", ...] = ()


Formula = Union[Lit, Not, And, Or]

TRUE = And(())    # empty conjunction
FALSE = Or(())    # empty disjunction


def formula_literals(f: Formula) -> Iterator[Literal]:
    """All literals occurring anywhere in the formula tree."""
    if isinstance(f, Lit):
        yield f.literal
    elif isinstance(f, Not):
        yield from formula_literals(f.inner)
    else:
        for m in f.members:
            yield from formula_literals(m)


def formula_properties(f: Formula) -> set[str]:
    """Property ids mentioned by the formula, including inside active atoms."""
    return {l.fluent.prop for l in formula_literals(f)}


# ---------------------------------------------------------------------------
# Ontology side

@dataclass(frozen=True)
class Concern:
    id: str
    subconcerns: tuple[str, ...] = ()
    is_aspect: bool = False


@dataclass(frozen=True)
class Ontology:
    concerns: tuple[Concern, ...]
    properties: frozenset[str]
    addressed_by: Mapping[str, frozenset[str]]
    positive_impact: frozenset[tuple[str, str]]  # (property, concern)

    def concern(self, cid: str) -> Concern:
        for c in self.concerns:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def concern_ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.concerns)

    def parent_of(self) -> dict[str, str]:
        out: dict[str, str] = {}
        for c in self.concerns:
            for sub in c.subconcerns:
                out[sub] = c.id
        return out

    def ancestors(self, cid: str) -> tuple[str, ...]:
        """Proper ancestors of ``cid``, nearest first."""
        parents = self.parent_of()
        chain: list[str] = []
        cur = cid
        while cur in parents:
            cur = parents[cur]
            if cur in chain:  # cyclic input; validation reports it elsewhere
                break
            chain.append(cur)
        return tuple(chain)

    def descendants_or_self(self, cid: str) -> tuple[str, ...]:
        by_id = {c.id: c for c in self.concerns}
        out: list[str] = []
        stack = [cid]
        while stack:
            cur = stack.pop()
            if cur in out or cur not in by_id:
                continue
            out.append(cur)
            stack.extend(by_id[cur].subconcerns)
        return tuple(out)

    def aspects(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.concerns if c.is_aspect)

    def addressed(self, cid: str) -> frozenset[str]:
        return self.addressed_by.get(cid, frozenset())


# ---------------------------------------------------------------------------
# Dynamic side

@dataclass(frozen=True)
class StaticLaw:
    """``heads`` after ``body``. One head is a classic static law; several heads
    mean exactly one of them holds whenever the body does."""

    heads: tuple[Literal, ...]
    body: tuple[Literal, ...] = ()


@dataclass(frozen=True)
class Effect:
    literal: Literal
    conditions: tuple[Literal, ...] = ()


@dataclass(frozen=True)
class SuccessRule:
    p: Fraction
    conditions: tuple[Literal, ...] = ()


@dataclass(frozen=True)
class Action:
    id: str
    executable_if: tuple[tuple[Literal, ...], ...] = ()
    causes: tuple[Effect, ...] = ()
    success_with: tuple[SuccessRule, ...] = ()


@dataclass(frozen=True)
class GammaEntry:
    """A functional decomposition entry: ``concern`` is partly fulfilled by
    ``formula`` under function ``function``."""

    concern: str
    function: str
    formula: Formula


@dataclass(frozen=True)
class CpsSystem:
    components: tuple[str, ...]
    relation: Mapping[str, frozenset[str]]  # component -> providable properties
    actions: tuple[Action, ...]
    statics: tuple[StaticLaw, ...]
    gamma: tuple[GammaEntry, ...]

    def related(self, p: str) -> tuple[str, ...]:
        return tuple(co for co in self.components if p in self.relation.get(co, frozenset()))

    def action(self, action_id: str) -> Action | None:
        for a in self.actions:
            if a.id == action_id:
                return a
        return None


@dataclass(frozen=True)
class Analysis:
    weights: Mapping[str, Fraction] = field(default_factory=dict)
    priority: tuple[str, ...] = ()
    evaluation_mode: str | None = None


@dataclass(frozen=True)
class CpsTheory:
    ontology: Ontology
    system: CpsSystem
    initial: Mapping[Fluent, bool]
    analysis: Analysis = field(default_factory=Analysis)

    def fluents(self) -> tuple[Fluent, ...]:
        """The closed fluent universe, sorted by rendered name.

        Derived, never declared: one prop atom per declared property plus one
        active atom per (component, providable property) pair.
        """
        atoms = [Fluent(p) for p in self.ontology.properties]
        for co in self.system.components:
            for p in self.system.relation.get(co, frozenset()):
                atoms.append(Fluent(p, co))
        return tuple(sorted(atoms, key=lambda f: f.render()))


# ---------------------------------------------------------------------------
# Validation

def _d(code: str, *args: str, msg: str = "") -> Diagnostic:
    return Diagnostic(code, tuple(args), msg)


def validate_ontology(o: Ontology) -> list[Diagnostic]:
    """Check the concern forest and the addressing relations.

    Codes: BAD_IDENTIFIER, DUPLICATE_CONCERN, UNKNOWN_ID, MULTIPLE_PARENTS,
    CYCLE, ASPECT_NOT_ROOT, IMPACT_WITHOUT_ADDRESS.
    """
    out: list[Diagnostic] = []
    ids: list[str] = []
    for c in o.concerns:
        if not TOKEN_RE.match(c.id):
            out.append(_d("BAD_IDENTIFIER", c.id, msg="concern id is not a token"))
        if c.id in ids:
            out.append(_d("DUPLICATE_CONCERN", c.id, msg="concern declared twice"))
        ids.append(c.id)
    for p in sorted(o.properties):
        if not TOKEN_RE.match(p):
            out.append(_d("BAD_IDENTIFIER", p, msg="property id is not a token"))

    declared = set(ids)
    parent_seen: dict[str, str] = {}
    for c in o.concerns:
        for sub in c.subconcerns:
            if sub not in declared:
                out.append(_d("UNKNOWN_ID", sub, msg=f"subconcern of {c.id} is not declared"))
                continue
            if sub in parent_seen and parent_seen[sub] != c.id:
                out.append(_d("MULTIPLE_PARENTS", sub, parent_seen[sub], c.id,
                              msg="concern has more than one parent"))
            parent_seen[sub] = c.id

    # cycle detection over the subconcern graph (restricted to declared ids)
    edges = {c.id: [s for s in c.subconcerns if s in declared] for c in o.concerns}
    state: dict[str, int] = {}  # 0 visiting, 1 done

    def visit(node: str, trail: list[str]) -> None:
        state[node] = 0
        trail.append(node)
        for nxt in edges.get(node, []):
            if state.get(nxt) == 0:
                out.append(_d("CYCLE", node, nxt, msg="subconcern relation is cyclic"))
            elif nxt not in state:
                visit(nxt, trail)
        trail.pop()
        state[node] = 1

    for cid in edges:
        if cid not in state:
            visit(cid, [])

    children = {s for c in o.concerns for s in c.subconcerns}
    for c in o.concerns:
        if c.is_aspect and c.id in children:
            out.append(_d("ASPECT_NOT_ROOT", c.id, msg="aspect concern has a parent"))

    for cid, props in sorted(o.addressed_by.items()):
        if cid not in declared:
            out.append(_d("UNKNOWN_ID", cid, msg="addressed_by key is not a declared concern"))
        for p in sorted(props):
            if p not in o.properties:
                out.append(_d("UNKNOWN_ID", p, msg=f"addressed_by({cid}) names an undeclared property"))

    for (p, cid) in sorted(o.positive_impact):
        if p not in o.properties:
            out.append(_d("UNKNOWN_ID", p, msg="positive_impact names an undeclared property"))
        elif cid not in declared:
            out.append(_d("UNKNOWN_ID", cid, msg="positive_impact names an undeclared concern"))
        elif p not in o.addressed_by.get(cid, frozenset()):
            out.append(_d("IMPACT_WITHOUT_ADDRESS", p, cid,
                          msg="positive_impact pair is not backed by addressed_by"))
    return out


def _universe(theory: CpsTheory) -> frozenset[Fluent]:
    return frozenset(theory.fluents())


def _check_literals(kind: str, literals: tuple[Literal, ...], universe: frozenset[Fluent],
                    out: list[Diagnostic]) -> None:
    for l in literals:
        if l.fluent not in universe:
            out.append(_d("UNKNOWN_ID", l.fluent.render(),
                          msg=f"{kind} refers to an atom outside the fluent universe"))


def _jointly_complementary(a: tuple[Literal, ...], b: tuple[Literal, ...]) -> bool:
    return not consistent(tuple(a) + tuple(b))


def validate_system(t: CpsTheory) -> list[Diagnostic]:
    """Check the dynamic side against the (assumed valid) ontology.

    Codes: BAD_IDENTIFIER, DUPLICATE_COMPONENT, DUPLICATE_ACTION, UNKNOWN_ID,
    EMPTY_HEADS, PROB_RANGE, PROB_CONDITION_INCONSISTENT, PROB_INCONSISTENT,
    GAMMA_UNADDRESSED.
    """
    o, s = t.ontology, t.system
    out: list[Diagnostic] = []

    seen_co: set[str] = set()
    for co in s.components:
        if not TOKEN_RE.match(co):
            out.append(_d("BAD_IDENTIFIER", co, msg="component id is not a token"))
        if co in seen_co:
            out.append(_d("DUPLICATE_COMPONENT", co, msg="component declared twice"))
        seen_co.add(co)

    for co, props in sorted(s.relation.items()):
        if co not in seen_co:
            out.append(_d("UNKNOWN_ID", co, msg="relation key is not a declared component"))
        for p in sorted(props):
            if p not in o.properties:
                out.append(_d("UNKNOWN_ID", p, msg=f"relation({co}) names an undeclared property"))

    universe = _universe(t)

    for law in s.statics:
        if not law.heads:
            out.append(_d("EMPTY_HEADS", msg="static law with no head"))
        _check_literals("static law", law.heads + law.body, universe, out)

    seen_act: set[str] = set()
    for a in s.actions:
        if a.id in seen_act:
            out.append(_d("DUPLICATE_ACTION", a.id, msg="action declared twice"))
        seen_act.add(a.id)
        for cond_set in a.executable_if:
            _check_literals(f"executability of {a.id}", tuple(cond_set), universe, out)
        for eff in a.causes:
            _check_literals(f"effect of {a.id}", (eff.literal,) + eff.conditions, universe, out)
        for rule in a.success_with:
            _check_literals(f"success rule of {a.id}", tuple(rule.conditions), universe, out)
            if not (0 <= rule.p <= 1):
                out.append(_d("PROB_RANGE", a.id, str(rule.p),
                              msg="success probability outside [0, 1]"))
            if not consistent(rule.conditions):
                out.append(_d("PROB_CONDITION_INCONSISTENT", a.id,
                              msg="success rule condition set contradicts itself"))
        for i, r1 in enumerate(a.success_with):
            for r2 in a.success_with[i + 1:]:
                if r1.p != r2.p and not _jointly_complementary(r1.conditions, r2.conditions):
                    out.append(_d("PROB_INCONSISTENT", a.id,
                                  msg="success rules with different p can apply together"))

    for entry in s.gamma:
        if entry.concern not in set(o.concern_ids()):
            out.append(_d("UNKNOWN_ID", entry.concern, msg="gamma entry names an undeclared concern"))
            continue
        if not TOKEN_RE.match(entry.function):
            out.append(_d("BAD_IDENTIFIER", entry.function, msg="function id is not a token"))
        addressed = o.addressed(entry.concern)
        for l in formula_literals(entry.formula):
            if l.fluent not in universe:
                out.append(_d("UNKNOWN_ID", l.fluent.render(),
                              msg="gamma formula refers to an atom outside the fluent universe"))
            elif not l.fluent.is_active and l.fluent.prop not in addressed:
                out.append(_d("GAMMA_UNADDRESSED", l.fluent.prop, entry.concern,
                              msg="gamma formula mentions a property the concern does not address"))
    return out


def validate_theory(t: CpsTheory) -> list[Diagnostic]:
    """Full validation: ontology, system, initial state, analysis defaults."""
    out = validate_ontology(t.ontology)
    out += validate_system(t)
    if out:
        return out  # downstream checks assume a sane universe

    universe = _universe(t)
    extra = set(t.initial) - universe
    missing = universe - set(t.initial)
    for f in sorted(extra, key=Fluent.render):
        out.append(_d("UNKNOWN_ID", f.render(), msg="initial state mentions an undeclared atom"))
    for f in sorted(missing, key=Fluent.render):
        out.append(_d("INITIAL_INCOMPLETE", f.render(), msg="initial state leaves an atom unassigned"))
    if not extra and not missing:
        from .transition import is_state  # local import; transition depends on model

        if not is_state(t, t.initial):
            out.append(_d("INITIAL_NOT_CLOSED", msg="initial state violates the static laws"))

    aspects = set(t.ontology.aspects())
    for cid, w in sorted(t.analysis.weights.items()):
        if cid not in aspects:
            out.append(_d("UNKNOWN_ID", cid, msg="weight key is not a declared aspect"))
        if w < 0:
            out.append(_d("NEGATIVE_WEIGHT", cid, str(w), msg="aspect weight is negative"))
    seen_p: set[str] = set()
    for cid in t.analysis.priority:
        if cid not in aspects:
            out.append(_d("UNKNOWN_ID", cid, msg="priority entry is not a declared aspect"))
        if cid in seen_p:
            out.append(_d("DUPLICATE_PRIORITY", cid, msg="aspect listed twice in priority"))
        seen_p.add(cid)
    if t.analysis.evaluation_mode is not None and t.analysis.evaluation_mode not in EVALUATION_MODES:
        out.append(_d("INVALID_MODE", str(t.analysis.evaluation_mode),
                      msg="evaluation_mode must be plain or grounded"))
    return out
