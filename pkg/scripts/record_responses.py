"""Record real service responses for the console's unit tests.

Drives the HTTP service in-process against the bundled fixture documents
and writes each exchange to frontend/tests/recorded/ as
{"method", "path", "status", "body"}. The console's view-model tests run
against these files, so they exercise genuine wire payloads without
needing a live server.

Run from the repository root: python3 scripts/record_responses.py
"""
from __future__ import annotations

import json
import pathlib

from fastapi.testclient import TestClient

from concernkit.service import create_app

ROOT = pathlib.Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "tests" / "fixtures"
OUT = ROOT / "frontend" / "tests" / "recorded"

FIVE_PLANS = [
    ["tOn basic_mode"],
    ["switM cam advanced_mode", "switM sam advanced_mode"],
    ["switM sam advanced_mode", "switM cam advanced_mode"],
    ["switM sam advanced_mode", "tOn basic_mode"],
    ["switM cam advanced_mode", "tOn basic_mode"],
]


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    healthy_text = (FIXTURES / "lkas_mini.cpst.json").read_text()
    attacked_doc = json.loads((FIXTURES / "lkas_mini_attacked.cpst.json").read_text())

    client = TestClient(create_app(preload=[healthy_text], cors=False))
    sid = client.get("/sessions").json()["sessions"][0]
    atk_sid = client.post("/sessions", json={"document": attacked_doc}).json()["id"]

    def record(name: str, method: str, path: str, body: dict | None = None) -> None:
        if method == "GET":
            response = client.get(path)
        else:
            response = client.post(path, json=body)
        payload = {
            "method": method,
            "path": path.replace(sid, "{sid}").replace(atk_sid, "{sid}"),
            "status": response.status_code,
            "body": response.json(),
        }
        (OUT / f"{name}.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")

    record("theory", "GET", f"/sessions/{sid}/theory")
    record("state", "GET", f"/sessions/{sid}/state")
    record("satisfaction_grounded", "POST", f"/sessions/{sid}/query/satisfaction",
           {"mode": "grounded"})
    record("satisfaction_attacked", "POST", f"/sessions/{atk_sid}/query/satisfaction",
           {"mode": "grounded"})
    record("whatif_minus_basic", "POST", f"/sessions/{sid}/whatif",
           {"set": ["-basic_mode"], "mode": "grounded"})
    record("mitigate_search", "POST", f"/sessions/{sid}/query/mitigate",
           {"concerns": ["integrity"], "horizon": 2, "mode": "grounded",
            "set": ["-basic_mode"]})
    record("mitigate_shortlist", "POST", f"/sessions/{sid}/query/mitigate",
           {"concerns": ["integrity"], "plans": FIVE_PLANS,
            "policy": "max_probability", "mode": "grounded", "set": ["-basic_mode"]})
    record("mitigate_lexicographic", "POST", f"/sessions/{sid}/query/mitigate",
           {"concerns": ["integrity"], "plans": FIVE_PLANS,
            "policy": "lexicographic", "mode": "grounded", "set": ["-basic_mode"]})
    record("trust_healthy", "POST", f"/sessions/{sid}/query/trust", {"mode": "grounded"})
    record("trust_attacked", "POST", f"/sessions/{atk_sid}/query/trust", {"mode": "grounded"})
    record("los_priority", "POST", f"/sessions/{sid}/query/los",
           {"priority": ["trustworthiness"]})
    record("noncompliance_weak", "POST", f"/sessions/{sid}/query/noncompliance",
           {"sa": [], "sc": ["integrity"], "n": 0, "mode": "weak"})
    record("branch_conflict", "POST", f"/sessions/{atk_sid}/apply",
           {"plan": ["tOn basic_mode"]})
    record("bad_literal", "POST", f"/sessions/{sid}/query/satisfaction",
           {"set": ["active nowhere"]})

    print(f"recorded {len(list(OUT.glob('*.json')))} responses into {OUT}")


if __name__ == "__main__":
    main()
