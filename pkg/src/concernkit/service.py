"""HTTP facade over the reasoning engine.

Sessions hold a parsed theory plus a current state; queries are read-only and
may be evaluated against a literal-override of the current state (the same
mechanism the what-if route uses), while apply is the only mutation. Every
JSON body is rendered canonically (sorted keys, two-space indent, trailing
newline), so identical queries against an unchanged session produce
byte-identical responses and the CLI can guarantee parity by echoing bodies.

Status mapping: 400 malformed request, 404 unknown session, 409 conflicts
with the session state (inexecutable plan, ambiguous branch, overrides that
violate the static laws), 422 theory parse/validation diagnostics, 503
exhausted search budget or an oversized fluent universe.
"""
from __future__ import annotations

import json
import logging
import os
import secrets
import threading
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping, Sequence

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from starlette.exceptions import HTTPException as StarletteHTTPException

from .concerns import GROUNDED, PLAIN, resolve_mode, satisfaction_map
from .documents import ENGINE_VERSION, document_of, fraction_decimal, parse_literal, parse_theory
from .errors import (
    BranchAmbiguous,
    BudgetExceeded,
    EngineError,
    NotExecutable,
    ParseFailure,
    UniverseTooLarge,
    ValidationFailure,
)
from .los import effective_weights, lex_vector, los_table, weighted_los
from .model import CpsTheory
from .planner import MitigationPlan, detect_noncompliance, find_mitigations, select_preferred
from .schemas import (
    Apply,
    LosQuery,
    MitigateQuery,
    NoncomplianceQuery,
    SatisfactionQuery,
    SessionCreate,
    TrustQuery,
    WhatIf,
)
from .transition import State, initial_state, run, state_of
from .trust import rank_components, trust_scores

log = logging.getLogger("concernkit.service")

SNAPSHOT_ENV = "CONCERNKIT_SNAPSHOT"
CORS_ENV = "CONCERNKIT_CORS"
DEFAULT_PORT = 8787


# ---------------------------------------------------------------------------
# Wire encoding

def canonical_json(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _respond(payload: dict, status: int = 200) -> Response:
    return Response(content=canonical_json(payload),
                    status_code=status, media_type="application/json")


def _rat(x: Fraction) -> dict:
    """Exact rational plus a convenience decimal; equality checks must use
    num/den, the decimal may be rounded."""
    return {"num": x.numerator, "den": x.denominator, "decimal": fraction_decimal(x)}


def _state_doc(s: State) -> dict:
    return {
        "true": [f.render() for f in s.true_atoms()],
        "false": [f.render() for f in s.false_atoms()],
    }


def _plan_doc(p: MitigationPlan) -> dict:
    return {
        "actions": list(p.actions),
        "final_states": [_state_doc(s) for s in p.final_states],
    }


def _score_doc(policy: str, score: Any) -> Any:
    if policy == "lexicographic":
        return [_rat(v) for v in score]
    return _rat(score)


def _parse_weights(raw: Mapping[str, Any] | None) -> dict[str, Fraction] | None:
    if raw is None:
        return None
    out: dict[str, Fraction] = {}
    for key, value in raw.items():
        try:
            out[key] = Fraction(value)
        except (ValueError, ZeroDivisionError, TypeError):
            raise EngineError("BAD_NUMBER", f"weight {key!r} has unreadable value {value!r}")
    return out


def _parse_overrides(overrides: Sequence[str]) -> list:
    diags: list = []
    lits = [parse_literal(text, f"set[{i}]", diags) for i, text in enumerate(overrides)]
    if diags:
        raise EngineError("BAD_LITERAL", "; ".join(d.render() for d in diags))
    return lits


def _derive_state(theory: CpsTheory, base: State, overrides: Sequence[str] | None) -> State:
    """Apply literal overrides to a state and re-check it against the laws."""
    if not overrides:
        return base
    assignment = base.as_dict()
    chosen: dict = {}
    for l in _parse_overrides(overrides):
        if l.fluent not in assignment:
            raise EngineError("UNKNOWN_ATOM",
                              f"atom {l.fluent.render()} is outside the fluent universe")
        if l.fluent in chosen and chosen[l.fluent] != l.value:
            raise EngineError("SET_CONFLICT",
                              f"overrides assign both values to {l.fluent.render()}")
        chosen[l.fluent] = l.value
        assignment[l.fluent] = l.value
    return state_of(theory, assignment)


# ---------------------------------------------------------------------------
# Session store

@dataclass
class SessionRecord:
    id: str
    theory: CpsTheory
    document: dict
    current_state: State
    history: list[dict] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionStore:
    def __init__(self):
        self._records: dict[str, SessionRecord] = {}
        self._order: list[str] = []
        self._lock = threading.Lock()

    def create(self, document: dict) -> SessionRecord:
        theory = parse_theory(json.dumps(document))
        rec = SessionRecord(
            id=secrets.token_hex(8),
            theory=theory,
            document=document_of(theory),
            current_state=initial_state(theory),
        )
        with self._lock:
            self._records[rec.id] = rec
            self._order.append(rec.id)
        return rec

    def get(self, session_id: str) -> SessionRecord:
        rec = self._records.get(session_id)
        if rec is None:
            raise EngineError("UNKNOWN_SESSION", f"no session named {session_id!r}")
        return rec

    def ids(self) -> list[str]:
        with self._lock:
            return list(self._order)

    # -- optional single-file persistence ----------------------------------

    def save(self, path: str) -> None:
        payload = {
            "engine_version": ENGINE_VERSION,
            "sessions": [
                {"id": rec.id, "document": rec.document, "history": rec.history}
                for rec in (self._records[i] for i in self.ids())
            ],
        }
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(canonical_json(payload))

    def load(self, path: str) -> int:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        restored = 0
        for entry in payload.get("sessions", []):
            try:
                theory = parse_theory(json.dumps(entry["document"]))
                rec = SessionRecord(
                    id=entry["id"],
                    theory=theory,
                    document=document_of(theory),
                    current_state=initial_state(theory),
                )
                for item in entry.get("history", []):
                    start = _derive_state(theory, rec.current_state, item.get("set") or [])
                    finals = run(theory, item.get("actions") or [], start)
                    rec.current_state = finals[item.get("branch") or 0]
                    rec.history.append(item)
            except Exception:
                log.warning("snapshot session %r could not be replayed; dropped",
                            entry.get("id"), exc_info=True)
                continue
            with self._lock:
                self._records[rec.id] = rec
                self._order.append(rec.id)
            restored += 1
        return restored


# ---------------------------------------------------------------------------
# Error rendering

def _status_for(exc: EngineError) -> int:
    if isinstance(exc, (ParseFailure, ValidationFailure)):
        return 422
    if isinstance(exc, (BudgetExceeded, UniverseTooLarge)):
        return 503
    if isinstance(exc, (NotExecutable, BranchAmbiguous)) or exc.code == "INVALID_STATE":
        return 409
    if exc.code == "UNKNOWN_SESSION":
        return 404
    return 400


def _error_payload(code: str, message: str, diagnostics: list | None = None,
                   extra: dict | None = None) -> dict:
    error: dict = {"code": code, "message": message}
    if diagnostics:
        error["diagnostics"] = diagnostics
    if extra:
        error.update(extra)
    return {"engine_version": ENGINE_VERSION, "error": error}


def _diag_doc(d) -> dict:
    return {"code": d.code, "args": list(d.args), "message": d.message}


# ---------------------------------------------------------------------------
# Application factory

def create_app(preload: Sequence[str] = (), snapshot_path: str | None = None,
               cors: bool | None = None) -> FastAPI:
    """Build the service.

    ``preload`` is a list of theory document texts turned into sessions up
    front. ``snapshot_path`` (default from CONCERNKIT_SNAPSHOT) enables load
    on startup and save on shutdown. ``cors`` (default from CONCERNKIT_CORS,
    on unless set to "0") controls the permissive cross-origin policy the
    browser console needs.
    """
    store = SessionStore()
    snapshot = snapshot_path if snapshot_path is not None else os.environ.get(SNAPSHOT_ENV)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        if snapshot and os.path.exists(snapshot):
            try:
                n = store.load(snapshot)
                log.info("restored %d session(s) from %s", n, snapshot)
            except Exception:
                log.warning("snapshot %s could not be read", snapshot, exc_info=True)
        yield
        if snapshot:
            try:
                store.save(snapshot)
            except Exception:
                log.warning("snapshot %s could not be written", snapshot, exc_info=True)

    app = FastAPI(title="concernkit", version=ENGINE_VERSION, lifespan=lifespan)
    app.state.store = store

    cors_on = cors if cors is not None else os.environ.get(CORS_ENV, "1") != "0"
    if cors_on:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(CORSMiddleware, allow_origins=["*"],
                           allow_methods=["*"], allow_headers=["*"])

    for text in preload:
        store.create(json.loads(text))

    @app.exception_handler(EngineError)
    async def _engine_error(request: Request, exc: EngineError) -> Response:
        diagnostics = None
        if isinstance(exc, (ParseFailure, ValidationFailure)):
            diagnostics = [_diag_doc(d) for d in exc.diagnostics]
        return _respond(
            _error_payload(exc.code, exc.detail or exc.code, diagnostics),
            _status_for(exc),
        )

    @app.exception_handler(RequestValidationError)
    async def _schema_error(request: Request, exc: RequestValidationError) -> Response:
        diagnostics = [
            {
                "code": "SCHEMA",
                "args": [".".join(str(part) for part in err.get("loc", ())),
                         str(err.get("type", ""))],
                "message": str(err.get("msg", "")),
            }
            for err in exc.errors()
        ]
        return _respond(
            _error_payload("SCHEMA", "request body failed validation", diagnostics), 400)

    @app.exception_handler(StarletteHTTPException)
    async def _http_error(request: Request, exc: StarletteHTTPException) -> Response:
        code = {404: "NOT_FOUND", 405: "METHOD_NOT_ALLOWED"}.get(
            exc.status_code, f"HTTP_{exc.status_code}")
        return _respond(_error_payload(code, str(exc.detail)), exc.status_code)

    # -- session management -------------------------------------------------

    @app.post("/sessions", status_code=201)
    def create_session(body: SessionCreate) -> Response:
        rec = store.create(body.document)
        return _respond({
            "engine_version": ENGINE_VERSION,
            "evaluation_mode": resolve_mode(rec.theory, None, PLAIN),
            "id": rec.id,
            "state": _state_doc(rec.current_state),
        }, 201)

    @app.get("/sessions")
    def list_sessions() -> Response:
        return _respond({"engine_version": ENGINE_VERSION, "sessions": store.ids()})

    @app.get("/sessions/{session_id}/state")
    def session_state(session_id: str) -> Response:
        rec = store.get(session_id)
        return _respond({
            "engine_version": ENGINE_VERSION,
            "evaluation_mode": resolve_mode(rec.theory, None, PLAIN),
            "id": rec.id,
            "state": _state_doc(rec.current_state),
            "history": rec.history,
        })

    @app.get("/sessions/{session_id}/theory")
    def session_theory(session_id: str) -> Response:
        rec = store.get(session_id)
        return _respond({
            "engine_version": ENGINE_VERSION,
            "evaluation_mode": resolve_mode(rec.theory, None, PLAIN),
            "document": rec.document,
        })

    # -- read-only queries ---------------------------------------------------

    @app.post("/sessions/{session_id}/query/satisfaction")
    def query_satisfaction(session_id: str, body: SatisfactionQuery) -> Response:
        rec = store.get(session_id)
        mode = resolve_mode(rec.theory, body.mode, PLAIN)
        state = _derive_state(rec.theory, rec.current_state, body.set)
        return _respond({
            "engine_version": ENGINE_VERSION,
            "evaluation_mode": mode,
            "state": _state_doc(state),
            "concerns": satisfaction_map(rec.theory, state, mode),
        })

    @app.post("/sessions/{session_id}/query/trust")
    def query_trust(session_id: str, body: TrustQuery) -> Response:
        rec = store.get(session_id)
        mode = resolve_mode(rec.theory, body.mode, PLAIN)
        state = _derive_state(rec.theory, rec.current_state, body.set)
        scores = trust_scores(rec.theory, state, mode)
        ranking = rank_components(rec.theory, state, mode)
        return _respond({
            "engine_version": ENGINE_VERSION,
            "evaluation_mode": mode,
            "state": _state_doc(state),
            "scores": [
                {
                    "component": s.component,
                    "pos_pairs": s.pos_pairs,
                    "npos_pairs": s.npos_pairs,
                    "tw": _rat(s.tw),
                    "impact": s.impact,
                }
                for s in scores
            ],
            "ranking": [list(group) for group in ranking.ranking],
            "most": list(ranking.most),
            "least": list(ranking.least),
        })

    @app.post("/sessions/{session_id}/query/mitigate")
    def query_mitigate(session_id: str, body: MitigateQuery) -> Response:
        rec = store.get(session_id)
        mode = resolve_mode(rec.theory, body.mode, GROUNDED)
        start = _derive_state(rec.theory, rec.current_state, body.set)
        weights = _parse_weights(body.weights)
        priority = tuple(body.priority) if body.priority is not None else None

        if body.plans is not None:
            plans = []
            for actions in body.plans:
                finals = run(rec.theory, actions, start)
                if not finals:
                    raise NotExecutable(f"plan {actions} has no executable branch")
                plans.append(MitigationPlan(tuple(actions), finals))
            plans = tuple(plans)
        else:
            plans = find_mitigations(rec.theory, body.concerns, body.horizon,
                                     mode=mode, minimal=body.minimal, start=start)

        payload: dict = {
            "engine_version": ENGINE_VERSION,
            "evaluation_mode": mode,
            "concerns": list(body.concerns),
            "horizon": body.horizon,
            "minimal": body.minimal,
            "count": len(plans),
            "plans": [_plan_doc(p) for p in plans],
        }
        if body.policy is not None:
            sel = select_preferred(rec.theory, plans, body.policy,
                                   weights=weights, priority=priority, start=start)
            payload["policy"] = sel.policy
            payload["scoreboard"] = [
                {"actions": list(p.actions), "score": _score_doc(sel.policy, score)}
                for p, score in sel.scoreboard
            ]
            payload["best"] = [list(p.actions) for p in sel.best]
        return _respond(payload)

    @app.post("/sessions/{session_id}/query/noncompliance")
    def query_noncompliance(session_id: str, body: NoncomplianceQuery) -> Response:
        rec = store.get(session_id)
        mode = resolve_mode(rec.theory, body.evaluation_mode, GROUNDED)
        report = detect_noncompliance(rec.theory, body.sa, body.sc, body.n,
                                      check=body.mode, mode=body.evaluation_mode)
        witness = None
        if report.witness is not None:
            witness = {
                "initial": _state_doc(report.witness.initial),
                "plan": list(report.witness.plan),
                "violated_concern": report.witness.violated_concern,
            }
        return _respond({
            "engine_version": ENGINE_VERSION,
            "evaluation_mode": mode,
            "mode": report.mode,
            "n": report.n,
            "sa": list(body.sa),
            "sc": list(body.sc),
            "verdict": report.verdict,
            "witness": witness,
        })

    @app.post("/sessions/{session_id}/query/los")
    def query_los(session_id: str, body: LosQuery) -> Response:
        rec = store.get(session_id)
        mode = resolve_mode(rec.theory, body.mode, PLAIN)
        state = _derive_state(rec.theory, rec.current_state, body.set)
        weights = _parse_weights(body.weights)
        table = los_table(rec.theory, state)
        payload: dict = {
            "engine_version": ENGINE_VERSION,
            "evaluation_mode": mode,
            "state": _state_doc(state),
            "table": {
                cid: {"deg_pos": _rat(row["deg_pos"]), "los": _rat(row["los"])}
                for cid, row in table.items()
            },
            "weights": {k: _rat(v) for k, v in effective_weights(rec.theory, weights).items()},
            "weighted": _rat(weighted_los(rec.theory, state, weights)),
        }
        if body.priority is not None:
            vec = lex_vector(rec.theory, state, tuple(body.priority))
            payload["priority"] = list(body.priority)
            payload["lex_vector"] = [_rat(v) for v in vec]
        return _respond(payload)

    # -- exploration and mutation --------------------------------------------

    @app.post("/sessions/{session_id}/whatif")
    def whatif(session_id: str, body: WhatIf) -> Response:
        rec = store.get(session_id)
        mode = resolve_mode(rec.theory, body.mode, PLAIN)
        state = _derive_state(rec.theory, rec.current_state, body.set)
        return _respond({
            "engine_version": ENGINE_VERSION,
            "evaluation_mode": mode,
            "state": _state_doc(state),
            "concerns": satisfaction_map(rec.theory, state, mode),
        })

    @app.post("/sessions/{session_id}/apply")
    def apply(session_id: str, body: Apply) -> Response:
        rec = store.get(session_id)
        with rec.lock:
            start = _derive_state(rec.theory, rec.current_state, body.set)
            finals = run(rec.theory, body.plan, start)
            if not finals:
                raise NotExecutable(f"plan {body.plan} has no executable branch"
                                    " from the session state")
            if len(finals) > 1 and body.branch is None:
                return _respond(_error_payload(
                    "BRANCH_AMBIGUOUS",
                    f"plan has {len(finals)} final states; pass a branch index",
                    extra={"branches": [_state_doc(s) for s in finals]},
                ), 409)
            index = body.branch if body.branch is not None else 0
            if index >= len(finals):
                raise EngineError(
                    "BAD_BRANCH", f"branch {index} out of range ({len(finals)} final states)")
            rec.current_state = finals[index]
            rec.history.append({
                "set": list(body.set or []),
                "actions": list(body.plan),
                "branch": index,
            })
            return _respond({
                "engine_version": ENGINE_VERSION,
                "evaluation_mode": resolve_mode(rec.theory, None, PLAIN),
                "state": _state_doc(rec.current_state),
                "branch": index,
                "branch_count": len(finals),
                "history_length": len(rec.history),
            })

    return app
