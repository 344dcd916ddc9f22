"""Reading and writing theory documents (`.cpst.json`).

A document is a JSON object with up to four sections: ``ontology``, ``system``,
``initial`` and ``analysis``. Empty sections are omitted. Fluent literals are
strings (``"basic_mode"``, ``"-basic_mode"``, ``"active cam basic_mode"``),
formulas are either a literal string or a single-key object ``{"and": [...]}``,
``{"or": [...]}``, ``{"not": ...}``. Rationals travel as strings: a decimal
when the denominator divides a power of ten (``"0.2"``), ``"num/den"``
otherwise.

``serialize_theory`` emits the canonical form: set-valued arrays sorted,
actions sorted by id, dict keys sorted, two-space indent, one trailing
newline. Declaration order is preserved only where it matters semantically:
decomposition entries, formula members, and the priority list.

``parse_theory`` = structural parse + full validation. Structural problems
raise :class:`ParseFailure`, semantic ones :class:`ValidationFailure`; both
carry the complete diagnostic list.
"""
from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

from .errors import Diagnostic, ParseFailure, ValidationFailure
from .model import (
    Action,
    Analysis,
    And,
    Concern,
    CpsSystem,
    CpsTheory,
    Effect,
    Fluent,
    Formula,
    GammaEntry,
    Lit,
    Literal,
    Not,
    Ontology,
    Or,
    StaticLaw,
    SuccessRule,
    validate_theory,
)

ENGINE_VERSION = "0.1.0"


# ---------------------------------------------------------------------------
# Rationals on the wire

def fraction_to_text(x: Fraction) -> str:
    """Exact decimal when the denominator is of the form 2^a * 5^b, else n/d."""
    den = x.denominator
    a = b = 0
    d = den
    while d % 2 == 0:
        d //= 2
        a += 1
    while d % 5 == 0:
        d //= 5
        b += 1
    if d != 1:
        return f"{x.numerator}/{den}"
    k = max(a, b)
    if k == 0:
        return str(x.numerator)
    scaled = abs(x.numerator) * 10**k // den
    sign = "-" if x.numerator < 0 else ""
    digits = str(scaled).rjust(k + 1, "0")
    return f"{sign}{digits[:-k]}.{digits[-k:]}"


def fraction_decimal(x: Fraction, places: int = 12) -> str:
    """Decimal rendering for display: exact when terminating, rounded otherwise."""
    text = fraction_to_text(x)
    if "/" not in text:
        return text
    scaled = round(x * 10**places)
    sign = "-" if scaled < 0 else ""
    digits = str(abs(scaled)).rjust(places + 1, "0")
    return f"{sign}{digits[:-places]}.{digits[-places:]}".rstrip("0").rstrip(".")


def _parse_fraction(value: Any, where: str, diags: list[Diagnostic]) -> Fraction:
    if isinstance(value, bool):
        diags.append(Diagnostic("BAD_NUMBER", (where,), "expected a rational, got a boolean"))
        return Fraction(0)
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError):
            diags.append(Diagnostic("BAD_NUMBER", (where, value), "not a decimal or num/den string"))
            return Fraction(0)
    diags.append(Diagnostic("BAD_NUMBER", (where, repr(value)),
                            "rationals must be integers or strings (floats lose exactness)"))
    return Fraction(0)


# ---------------------------------------------------------------------------
# Literals and formulas on the wire

def literal_to_text(l: Literal) -> str:
    return l.render()


def parse_literal(text: Any, where: str, diags: list[Diagnostic]) -> Literal | None:
    if not isinstance(text, str):
        diags.append(Diagnostic("BAD_LITERAL", (where, repr(text)), "literal must be a string"))
        return None
    body = text
    value = True
    if body.startswith("-"):
        value = False
        body = body[1:]
    parts = body.split()
    if len(parts) == 1 and parts[0]:
        return Literal(Fluent(parts[0]), value)
    if len(parts) == 3 and parts[0] == "active":
        return Literal(Fluent(parts[2], parts[1]), value)
    diags.append(Diagnostic("BAD_LITERAL", (where, text),
                            "expected 'name', '-name', 'active comp name' or '-active comp name'"))
    return None


def formula_to_obj(f: Formula) -> Any:
    if isinstance(f, Lit):
        return literal_to_text(f.literal)
    if isinstance(f, Not):
        return {"not": formula_to_obj(f.inner)}
    if isinstance(f, And):
        return {"and": [formula_to_obj(m) for m in f.members]}
    return {"or": [formula_to_obj(m) for m in f.members]}


def parse_formula(obj: Any, where: str, diags: list[Diagnostic]) -> Formula:
    if isinstance(obj, str):
        l = parse_literal(obj, where, diags)
        return Lit(l) if l is not None else And(())
    if isinstance(obj, dict) and len(obj) == 1:
        (key, value), = obj.items()
        if key == "not":
            return Not(parse_formula(value, f"{where}.not", diags))
        if key in ("and", "or"):
            if not isinstance(value, list):
                diags.append(Diagnostic("BAD_FORMULA", (where,), f"'{key}' must hold a list"))
                return And(())
            members = tuple(parse_formula(m, f"{where}.{key}[{i}]", diags)
                            for i, m in enumerate(value))
            return And(members) if key == "and" else Or(members)
    diags.append(Diagnostic("BAD_FORMULA", (where,),
                            "formula must be a literal string or one of not/and/or"))
    return And(())


# ---------------------------------------------------------------------------
# Structural parsing

def _expect(obj: Any, kind: type, where: str, diags: list[Diagnostic], default):
    if isinstance(obj, kind) and not isinstance(obj, bool):
        return obj
    diags.append(Diagnostic("BAD_SHAPE", (where,), f"expected {kind.__name__}"))
    return default


def _check_fields(obj: dict, allowed: set[str], where: str, diags: list[Diagnostic]) -> None:
    for key in obj:
        if key not in allowed:
            diags.append(Diagnostic("UNKNOWN_FIELD", (where, key), "field is not part of the format"))


def _parse_literal_list(obj: Any, where: str, diags: list[Diagnostic]) -> tuple[Literal, ...]:
    items = _expect(obj, list, where, diags, [])
    out = []
    for i, entry in enumerate(items):
        l = parse_literal(entry, f"{where}[{i}]", diags)
        if l is not None:
            out.append(l)
    return tuple(out)


def _parse_ontology(obj: Any, diags: list[Diagnostic]) -> Ontology:
    obj = _expect(obj, dict, "ontology", diags, {})
    _check_fields(obj, {"concerns", "properties", "addressed_by", "positive_impact"}, "ontology", diags)

    concerns = []
    for i, entry in enumerate(_expect(obj.get("concerns", []), list, "ontology.concerns", diags, [])):
        entry = _expect(entry, dict, f"ontology.concerns[{i}]", diags, {})
        _check_fields(entry, {"id", "is_aspect", "subconcerns"}, f"ontology.concerns[{i}]", diags)
        cid = _expect(entry.get("id", ""), str, f"ontology.concerns[{i}].id", diags, "")
        subs = _expect(entry.get("subconcerns", []), list, f"ontology.concerns[{i}].subconcerns", diags, [])
        concerns.append(Concern(
            id=cid,
            subconcerns=tuple(_expect(s, str, f"ontology.concerns[{i}].subconcerns[{j}]", diags, "")
                              for j, s in enumerate(subs)),
            is_aspect=bool(entry.get("is_aspect", False)),
        ))

    properties = frozenset(
        _expect(p, str, f"ontology.properties[{i}]", diags, "")
        for i, p in enumerate(_expect(obj.get("properties", []), list, "ontology.properties", diags, []))
    )

    addressed: dict[str, frozenset[str]] = {}
    for cid, props in sorted(_expect(obj.get("addressed_by", {}), dict, "ontology.addressed_by", diags, {}).items()):
        values = _expect(props, list, f"ontology.addressed_by.{cid}", diags, [])
        addressed[cid] = frozenset(
            _expect(p, str, f"ontology.addressed_by.{cid}[{i}]", diags, "") for i, p in enumerate(values)
        )

    impact = set()
    for i, pair in enumerate(_expect(obj.get("positive_impact", []), list, "ontology.positive_impact", diags, [])):
        pair = _expect(pair, list, f"ontology.positive_impact[{i}]", diags, ["", ""])
        if len(pair) != 2:
            diags.append(Diagnostic("BAD_SHAPE", (f"ontology.positive_impact[{i}]",),
                                    "expected a [property, concern] pair"))
            continue
        impact.add((
            _expect(pair[0], str, f"ontology.positive_impact[{i}][0]", diags, ""),
            _expect(pair[1], str, f"ontology.positive_impact[{i}][1]", diags, ""),
        ))

    return Ontology(
        concerns=tuple(sorted(concerns, key=lambda c: c.id)),
        properties=properties,
        addressed_by={k: v for k, v in addressed.items() if v},
        positive_impact=frozenset(impact),
    )


def _parse_system(obj: Any, diags: list[Diagnostic]) -> CpsSystem:
    obj = _expect(obj, dict, "system", diags, {})
    _check_fields(obj, {"components", "relation", "statics", "actions", "gamma"}, "system", diags)

    components = tuple(sorted(
        _expect(c, str, f"system.components[{i}]", diags, "")
        for i, c in enumerate(_expect(obj.get("components", []), list, "system.components", diags, []))
    ))

    relation: dict[str, frozenset[str]] = {}
    for co, props in sorted(_expect(obj.get("relation", {}), dict, "system.relation", diags, {}).items()):
        values = _expect(props, list, f"system.relation.{co}", diags, [])
        parsed = frozenset(
            _expect(p, str, f"system.relation.{co}[{i}]", diags, "") for i, p in enumerate(values)
        )
        if parsed:
            relation[co] = parsed

    statics = []
    for i, entry in enumerate(_expect(obj.get("statics", []), list, "system.statics", diags, [])):
        entry = _expect(entry, dict, f"system.statics[{i}]", diags, {})
        _check_fields(entry, {"heads", "body"}, f"system.statics[{i}]", diags)
        heads = _parse_literal_list(entry.get("heads", []), f"system.statics[{i}].heads", diags)
        body = _parse_literal_list(entry.get("body", []), f"system.statics[{i}].body", diags)
        statics.append(StaticLaw(heads=heads, body=body))

    actions = []
    for i, entry in enumerate(_expect(obj.get("actions", []), list, "system.actions", diags, [])):
        entry = _expect(entry, dict, f"system.actions[{i}]", diags, {})
        _check_fields(entry, {"id", "executable_if", "causes", "success_with"}, f"system.actions[{i}]", diags)
        aid = _expect(entry.get("id", ""), str, f"system.actions[{i}].id", diags, "")
        exec_if = []
        for j, cs in enumerate(_expect(entry.get("executable_if", []), list,
                                       f"system.actions[{i}].executable_if", diags, [])):
            exec_if.append(_parse_literal_list(cs, f"system.actions[{i}].executable_if[{j}]", diags))
        causes = []
        for j, ce in enumerate(_expect(entry.get("causes", []), list, f"system.actions[{i}].causes", diags, [])):
            ce = _expect(ce, dict, f"system.actions[{i}].causes[{j}]", diags, {})
            _check_fields(ce, {"effect", "if"}, f"system.actions[{i}].causes[{j}]", diags)
            eff = parse_literal(ce.get("effect", ""), f"system.actions[{i}].causes[{j}].effect", diags)
            conds = _parse_literal_list(ce.get("if", []), f"system.actions[{i}].causes[{j}].if", diags)
            if eff is not None:
                causes.append(Effect(literal=eff, conditions=conds))
        success = []
        for j, sw in enumerate(_expect(entry.get("success_with", []), list,
                                       f"system.actions[{i}].success_with", diags, [])):
            sw = _expect(sw, dict, f"system.actions[{i}].success_with[{j}]", diags, {})
            _check_fields(sw, {"p", "if"}, f"system.actions[{i}].success_with[{j}]", diags)
            p = _parse_fraction(sw.get("p", "1"), f"system.actions[{i}].success_with[{j}].p", diags)
            conds = _parse_literal_list(sw.get("if", []), f"system.actions[{i}].success_with[{j}].if", diags)
            success.append(SuccessRule(p=p, conditions=conds))
        actions.append(Action(id=aid, executable_if=tuple(exec_if), causes=tuple(causes),
                              success_with=tuple(success)))

    gamma = []
    for i, entry in enumerate(_expect(obj.get("gamma", []), list, "system.gamma", diags, [])):
        entry = _expect(entry, dict, f"system.gamma[{i}]", diags, {})
        _check_fields(entry, {"concern", "function", "formula"}, f"system.gamma[{i}]", diags)
        gamma.append(GammaEntry(
            concern=_expect(entry.get("concern", ""), str, f"system.gamma[{i}].concern", diags, ""),
            function=_expect(entry.get("function", ""), str, f"system.gamma[{i}].function", diags, ""),
            formula=parse_formula(entry.get("formula", {"and": []}), f"system.gamma[{i}].formula", diags),
        ))

    return CpsSystem(
        components=components,
        relation=relation,
        actions=tuple(sorted(actions, key=lambda a: a.id)),
        statics=tuple(sorted(statics, key=_law_key)),
        gamma=tuple(gamma),
    )


def _parse_initial(obj: Any, diags: list[Diagnostic]) -> dict[Fluent, bool]:
    obj = _expect(obj, dict, "initial", diags, {})
    _check_fields(obj, {"true", "false"}, "initial", diags)
    out: dict[Fluent, bool] = {}
    for key, value in (("true", True), ("false", False)):
        for i, entry in enumerate(_expect(obj.get(key, []), list, f"initial.{key}", diags, [])):
            l = parse_literal(entry, f"initial.{key}[{i}]", diags)
            if l is None:
                continue
            if not l.value:
                diags.append(Diagnostic("BAD_LITERAL", (f"initial.{key}[{i}]", entry),
                                        "initial lists plain atoms; use the false list instead of '-'"))
                continue
            if l.fluent in out and out[l.fluent] != value:
                diags.append(Diagnostic("INITIAL_CONFLICT", (l.fluent.render(),),
                                        "atom listed as both true and false"))
            out[l.fluent] = value
    return out


def _parse_analysis(obj: Any, diags: list[Diagnostic]) -> Analysis:
    obj = _expect(obj, dict, "analysis", diags, {})
    _check_fields(obj, {"weights", "priority", "evaluation_mode"}, "analysis", diags)
    weights = {}
    for cid, w in sorted(_expect(obj.get("weights", {}), dict, "analysis.weights", diags, {}).items()):
        weights[cid] = _parse_fraction(w, f"analysis.weights.{cid}", diags)
    priority = tuple(
        _expect(p, str, f"analysis.priority[{i}]", diags, "")
        for i, p in enumerate(_expect(obj.get("priority", []), list, "analysis.priority", diags, []))
    )
    mode = obj.get("evaluation_mode")
    if mode is not None:
        mode = _expect(mode, str, "analysis.evaluation_mode", diags, None)
    return Analysis(weights=weights, priority=priority, evaluation_mode=mode)


def parse_document(text: str) -> CpsTheory:
    """Structural parse only; raises ParseFailure on malformed input."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseFailure([Diagnostic("SYNTAX", (str(exc.lineno), str(exc.colno)), exc.msg)])

    diags: list[Diagnostic] = []
    if not isinstance(data, dict):
        raise ParseFailure([Diagnostic("SYNTAX", ("1", "1"), "top-level value must be an object")])
    _check_fields(data, {"ontology", "system", "initial", "analysis"}, "$", diags)

    theory = CpsTheory(
        ontology=_parse_ontology(data.get("ontology", {}), diags),
        system=_parse_system(data.get("system", {}), diags),
        initial=_parse_initial(data.get("initial", {}), diags),
        analysis=_parse_analysis(data.get("analysis", {}), diags),
    )
    if diags:
        raise ParseFailure(diags)
    return theory


def parse_theory(text: str) -> CpsTheory:
    """Parse and fully validate; the result is safe for every engine operation."""
    theory = parse_document(text)
    diags = validate_theory(theory)
    if diags:
        raise ValidationFailure(diags)
    return theory


# ---------------------------------------------------------------------------
# Serialization

def _law_key(law: StaticLaw):
    return (
        tuple(sorted(l.render() for l in law.heads)),
        tuple(sorted(l.render() for l in law.body)),
    )


def _literal_list(literals, sort: bool = True) -> list[str]:
    texts = [l.render() for l in literals]
    return sorted(texts) if sort else texts


def document_of(theory: CpsTheory) -> dict:
    """The canonical plain-data document for a theory (before JSON encoding)."""
    doc: dict[str, Any] = {}

    o = theory.ontology
    ontology: dict[str, Any] = {}
    if o.concerns:
        ontology["concerns"] = [
            {
                "id": c.id,
                **({"is_aspect": True} if c.is_aspect else {}),
                **({"subconcerns": sorted(c.subconcerns)} if c.subconcerns else {}),
            }
            for c in sorted(o.concerns, key=lambda c: c.id)
        ]
    if o.properties:
        ontology["properties"] = sorted(o.properties)
    if o.addressed_by:
        ontology["addressed_by"] = {c: sorted(ps) for c, ps in sorted(o.addressed_by.items()) if ps}
    if o.positive_impact:
        ontology["positive_impact"] = [list(pair) for pair in sorted(o.positive_impact)]
    if ontology:
        doc["ontology"] = ontology

    s = theory.system
    system: dict[str, Any] = {}
    if s.components:
        system["components"] = sorted(s.components)
    if s.relation:
        system["relation"] = {c: sorted(ps) for c, ps in sorted(s.relation.items()) if ps}
    if s.statics:
        system["statics"] = [
            {
                "heads": _literal_list(law.heads),
                **({"body": _literal_list(law.body)} if law.body else {}),
            }
            for law in sorted(s.statics, key=_law_key)
        ]
    if s.actions:
        system["actions"] = [
            {
                "id": a.id,
                **({"executable_if": sorted(
                    (_literal_list(cs) for cs in a.executable_if))} if a.executable_if else {}),
                **({"causes": [
                    {
                        "effect": e.literal.render(),
                        **({"if": _literal_list(e.conditions)} if e.conditions else {}),
                    }
                    for e in sorted(a.causes, key=lambda e: (e.literal.render(),
                                                             _literal_list(e.conditions)))
                ]} if a.causes else {}),
                **({"success_with": [
                    {
                        "p": fraction_to_text(r.p),
                        **({"if": _literal_list(r.conditions)} if r.conditions else {}),
                    }
                    for r in sorted(a.success_with, key=lambda r: (_literal_list(r.conditions), r.p))
                ]} if a.success_with else {}),
            }
            for a in sorted(s.actions, key=lambda a: a.id)
        ]
    if s.gamma:
        system["gamma"] = [
            {"concern": g.concern, "function": g.function, "formula": formula_to_obj(g.formula)}
            for g in s.gamma
        ]
    if system:
        doc["system"] = system

    if theory.initial:
        doc["initial"] = {
            "true": sorted(f.render() for f, v in theory.initial.items() if v),
            "false": sorted(f.render() for f, v in theory.initial.items() if not v),
        }

    a = theory.analysis
    analysis: dict[str, Any] = {}
    if a.weights:
        analysis["weights"] = {c: fraction_to_text(w) for c, w in sorted(a.weights.items())}
    if a.priority:
        analysis["priority"] = list(a.priority)
    if a.evaluation_mode is not None:
        analysis["evaluation_mode"] = a.evaluation_mode
    if analysis:
        doc["analysis"] = analysis

    return doc


def serialize_theory(theory: CpsTheory) -> str:
    return json.dumps(document_of(theory), sort_keys=True, indent=2, ensure_ascii=False) + "\n"
