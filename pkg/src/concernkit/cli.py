"""Command-line front door.

Each query subcommand drives the real service application in-process through
an ASGI transport and prints the raw response body, so the JSON a script sees
here is byte-identical to what the HTTP service would return for the same
request. ``--format table`` is a presentation convenience layered on top of
the same body.

Exit codes: 0 success, 1 parse/validation or rejected request, 2 exhausted
search budget or oversized universe, 64 usage error.
"""
from __future__ import annotations

import asyncio
import json
import sys

import click
import httpx

from .documents import ENGINE_VERSION, parse_theory
from .errors import ParseFailure, ValidationFailure
from .service import DEFAULT_PORT, canonical_json, create_app

_POLICY_NAMES = {"weighted": "weighted", "lex": "lexicographic", "prob": "max_probability"}

_MODE = click.Choice(["plain", "grounded"])


def _read_document(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        click.echo(f"cannot read {path}: {exc.strerror}", err=True)
        sys.exit(1)


def _split_csv(text: str | None) -> list[str]:
    if not text:
        return []
    return [part.strip() for part in text.split(",") if part.strip()]


def _parse_weights_flag(text: str | None) -> dict[str, str] | None:
    if not text:
        return None
    out: dict[str, str] = {}
    for pair in text.split(","):
        pair = pair.strip()
        if not pair:
            continue
        if "=" not in pair:
            raise click.UsageError(f"--weights expects k=v pairs, got {pair!r}")
        key, _, value = pair.partition("=")
        out[key.strip()] = value.strip()
    return out


def _call(document_text: str, route: str, body: dict,
          at: list[str] | None = None, branch: int | None = None) -> tuple[int, bytes]:
    """Create a throwaway session for the document and run one query."""
    try:
        document = json.loads(document_text)
    except json.JSONDecodeError as exc:
        payload = {
            "engine_version": ENGINE_VERSION,
            "error": {
                "code": "SYNTAX",
                "message": f"line {exc.lineno}, column {exc.colno}: {exc.msg}",
                "diagnostics": [{"code": "SYNTAX",
                                 "args": [str(exc.lineno), str(exc.colno)],
                                 "message": exc.msg}],
            },
        }
        return 422, canonical_json(payload).encode("utf-8")

    app = create_app(snapshot_path="", cors=False)

    async def go() -> tuple[int, bytes]:
        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(transport=transport, base_url="http://engine") as client:
            created = await client.post("/sessions", json={"document": document})
            if created.status_code != 201:
                return created.status_code, created.content
            sid = created.json()["id"]
            if at:
                moved = await client.post(
                    f"/sessions/{sid}/apply",
                    json={"plan": at, **({"branch": branch} if branch is not None else {})},
                )
                if moved.status_code != 200:
                    return moved.status_code, moved.content
            response = await client.post(f"/sessions/{sid}/{route}", json=body)
            return response.status_code, response.content

    return asyncio.run(go())


def _exit_for(status: int) -> int:
    if status in (200, 201):
        return 0
    if status == 503:
        return 2
    return 1


def _emit(status: int, body: bytes, fmt: str, table_fn=None) -> None:
    if status in (200, 201):
        if fmt == "table" and table_fn is not None:
            table_fn(json.loads(body.decode("utf-8")))
        else:
            sys.stdout.buffer.write(body)
            sys.stdout.buffer.flush()
        return
    sys.stderr.buffer.write(body)
    sys.stderr.buffer.flush()
    sys.exit(_exit_for(status))


def _print_table(headers: list[str], rows: list[list[str]]) -> None:
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    line = "  ".join(h.ljust(widths[i]) for i, h in enumerate(headers))
    click.echo(line)
    click.echo("  ".join("-" * w for w in widths))
    for row in rows:
        click.echo("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)))


@click.group()
@click.version_option(ENGINE_VERSION, prog_name="concernkit")
def cli() -> None:
    """Reason about concern satisfaction, trust, mitigation, and compliance
    of a declarative system model."""


@cli.command()
@click.argument("file", metavar="FILE")
def check(file: str) -> None:
    """Validate a theory document and report diagnostics."""
    text = _read_document(file)
    diagnostics: list[dict] = []
    valid = True
    try:
        parse_theory(text)
    except (ParseFailure, ValidationFailure) as exc:
        valid = False
        diagnostics = [{"code": d.code, "args": list(d.args), "message": d.message}
                       for d in exc.diagnostics]
    report = {"engine_version": ENGINE_VERSION, "valid": valid, "diagnostics": diagnostics}
    sys.stdout.write(canonical_json(report))
    if not valid:
        sys.exit(1)


def _sat_table(payload: dict) -> None:
    rows = []
    for cid, row in sorted(payload["concerns"].items()):
        failing = ", ".join(row["failing_subconcerns"]) or "-"
        rows.append([cid, "yes" if row["satisfied"] else "NO",
                     "yes" if row["formula_value"] else "NO", failing])
    _print_table(["concern", "satisfied", "formula", "failing subconcerns"], rows)


@cli.command()
@click.argument("file", metavar="FILE")
@click.option("--mode", type=_MODE, default=None, help="Evaluation mode.")
@click.option("--at", "at_plan", default=None,
              help="Evaluate after this comma-separated plan instead of the initial state.")
@click.option("--branch", type=int, default=None,
              help="Branch index when the --at plan has several outcomes.")
@click.option("--format", "fmt", type=click.Choice(["json", "table"]), default="json")
def sat(file: str, mode: str | None, at_plan: str | None, branch: int | None, fmt: str) -> None:
    """Report per-concern satisfaction."""
    body: dict = {}
    if mode:
        body["mode"] = mode
    status, content = _call(_read_document(file), "query/satisfaction", body,
                            at=_split_csv(at_plan), branch=branch)
    _emit(status, content, fmt, _sat_table)


def _trust_table(payload: dict) -> None:
    rows = [[s["component"], s["tw"]["decimal"], str(s["impact"]),
             str(s["pos_pairs"]), str(s["npos_pairs"])]
            for s in payload["scores"]]
    _print_table(["component", "tw", "impact", "pos", "npos"], rows)
    click.echo(f"most trustworthy:  {', '.join(payload['most'])}")
    click.echo(f"least trustworthy: {', '.join(payload['least'])}")


@cli.command()
@click.argument("file", metavar="FILE")
@click.option("--mode", type=_MODE, default=None, help="Evaluation mode.")
@click.option("--format", "fmt", type=click.Choice(["json", "table"]), default="json")
def trust(file: str, mode: str | None, fmt: str) -> None:
    """Score and rank components by trustworthiness."""
    body: dict = {}
    if mode:
        body["mode"] = mode
    status, content = _call(_read_document(file), "query/trust", body)
    _emit(status, content, fmt, _trust_table)


def _mitigate_table(payload: dict) -> None:
    scores = {}
    best = set()
    if "scoreboard" in payload:
        for entry in payload["scoreboard"]:
            key = tuple(entry["actions"])
            score = entry["score"]
            scores[key] = (score["decimal"] if isinstance(score, dict)
                           else " / ".join(v["decimal"] for v in score))
        best = {tuple(actions) for actions in payload.get("best", [])}
    rows = []
    for plan in payload["plans"]:
        key = tuple(plan["actions"])
        rows.append([
            " ; ".join(plan["actions"]),
            str(len(plan["final_states"])),
            scores.get(key, "-"),
            "best" if key in best else "",
        ])
    _print_table(["plan", "outcomes", "score", ""], rows)
    click.echo(f"{payload['count']} plan(s)")


@cli.command()
@click.argument("file", metavar="FILE")
@click.option("--concerns", required=True, help="Comma-separated goal concern ids.")
@click.option("--horizon", required=True, type=int, help="Maximum plan length.")
@click.option("--policy", type=click.Choice(sorted(_POLICY_NAMES)), default=None,
              help="Rank results: weighted, lex, or prob.")
@click.option("--minimal", is_flag=True, help="Drop plans with a satisfying proper prefix.")
@click.option("--mode", type=_MODE, default=None, help="Evaluation mode.")
@click.option("--format", "fmt", type=click.Choice(["json", "table"]), default="json")
def mitigate(file: str, concerns: str, horizon: int, policy: str | None,
             minimal: bool, mode: str | None, fmt: str) -> None:
    """Search for plans that make every goal concern satisfied."""
    body: dict = {"concerns": _split_csv(concerns), "horizon": horizon, "minimal": minimal}
    if policy:
        body["policy"] = _POLICY_NAMES[policy]
    if mode:
        body["mode"] = mode
    status, content = _call(_read_document(file), "query/mitigate", body)
    _emit(status, content, fmt, _mitigate_table)


def _noncompliance_table(payload: dict) -> None:
    verdict = payload["verdict"]
    click.echo(f"{payload['mode']} {payload['n']}-noncompliant: {'yes' if verdict else 'no'}")
    witness = payload.get("witness")
    if witness:
        plan = ", ".join(witness["plan"]) or "(empty plan)"
        click.echo(f"witness plan:    {plan}")
        if witness["violated_concern"]:
            click.echo(f"violated:        {witness['violated_concern']}")
        click.echo(f"witness initial: true={', '.join(witness['initial']['true']) or '-'}")


@cli.command()
@click.argument("file", metavar="FILE")
@click.option("--sa", required=True, help="Comma-separated action ids under scrutiny.")
@click.option("--sc", required=True, help="Comma-separated monitored concern ids.")
@click.option("--n", "n", required=True, type=int, help="Maximum plan length.")
@click.option("--mode", type=click.Choice(["weak", "strong"]), default="weak",
              show_default=True, help="Noncompliance flavor.")
@click.option("--format", "fmt", type=click.Choice(["json", "table"]), default="json")
def noncompliance(file: str, sa: str, sc: str, n: int, mode: str, fmt: str) -> None:
    """Decide weak or strong n-noncompliance for an action and concern set."""
    body = {"sa": _split_csv(sa), "sc": _split_csv(sc), "n": n, "mode": mode}
    status, content = _call(_read_document(file), "query/noncompliance", body)
    _emit(status, content, fmt, _noncompliance_table)


def _los_table(payload: dict) -> None:
    rows = [[cid, row["deg_pos"]["decimal"], row["los"]["decimal"]]
            for cid, row in sorted(payload["table"].items())]
    _print_table(["concern", "deg+", "LoS"], rows)
    click.echo(f"weighted: {payload['weighted']['decimal']}")
    if "lex_vector" in payload:
        vec = ", ".join(v["decimal"] for v in payload["lex_vector"])
        click.echo(f"priority vector ({' > '.join(payload['priority'])}): {vec}")


@cli.command()
@click.argument("file", metavar="FILE")
@click.option("--weights", default=None, help="Aspect weights as k=v pairs, comma-separated.")
@click.option("--priority", default=None, help="Aspect priority as a>b>c.")
@click.option("--mode", type=_MODE, default=None, help="Evaluation mode.")
@click.option("--format", "fmt", type=click.Choice(["json", "table"]), default="json")
def los(file: str, weights: str | None, priority: str | None,
        mode: str | None, fmt: str) -> None:
    """Report satisfaction-likelihood degrees and the weighted aggregate."""
    body: dict = {}
    flag_weights = _parse_weights_flag(weights)
    if flag_weights is not None:
        body["weights"] = flag_weights
    if priority:
        body["priority"] = [p.strip() for p in priority.split(">") if p.strip()]
    if mode:
        body["mode"] = mode
    status, content = _call(_read_document(file), "query/los", body)
    _emit(status, content, fmt, _los_table)


@cli.command()
@click.argument("file", metavar="FILE")
@click.option("--port", type=int, default=None,
              help=f"Listen port (default CONCERNKIT_PORT or {DEFAULT_PORT}).")
@click.option("--host", default="127.0.0.1", show_default=True, help="Bind address.")
def serve(file: str, port: int | None, host: str) -> None:
    """Serve the HTTP API with the document preloaded as a session."""
    import os

    import uvicorn

    text = _read_document(file)
    try:
        app = create_app(preload=[text])
    except (ParseFailure, ValidationFailure) as exc:
        for d in exc.diagnostics:
            click.echo(d.render(), err=True)
        sys.exit(1)
    except json.JSONDecodeError as exc:
        click.echo(f"SYNTAX({exc.lineno}, {exc.colno}): {exc.msg}", err=True)
        sys.exit(1)
    chosen = port if port is not None else int(os.environ.get("CONCERNKIT_PORT", DEFAULT_PORT))
    for sid in app.state.store.ids():
        click.echo(f"session {sid} ready", err=True)
    uvicorn.run(app, host=host, port=chosen, log_level="warning")


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        click.echo(exc.format_message(), err=True)
        return 64
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
