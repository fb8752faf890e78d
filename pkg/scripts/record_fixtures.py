#!/usr/bin/env python3
"""Record real service responses as fixtures for the frontend tests.

Drives the three golden conversations plus a batch upload against an
in-process service instance and writes the raw JSON payloads under
frontend/test/fixtures/.
"""

import json
from pathlib import Path

from fastapi.testclient import TestClient

from reqspec.seed import STARTER_REQUIREMENTS, seed_kb
from reqspec.service import create_app

CASE3 = (
    "In all the buildings, during weekdays from 2pm to 5pm, the average"
    " concentration of tetrachloroethylene should be no more than 0.25 mg/m3."
)

OUT = Path(__file__).resolve().parent.parent / "frontend" / "test" / "fixtures"


def record_conversation(client: TestClient, texts: list[str]) -> list[dict]:
    sid = client.post("/api/sessions").json()["session_id"]
    steps = []
    for text in texts:
        reply = client.post(f"/api/sessions/{sid}/messages", json={"text": text}).json()
        steps.append({"sent": text, "reply": reply})
    client.delete(f"/api/sessions/{sid}")
    return steps


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    app = create_app(seed_kb(), admin_token="secret")
    with TestClient(app) as client:
        cases = {
            "case1.json": [STARTER_REQUIREMENTS[0], "yes"],
            "case2.json": [
                STARTER_REQUIREMENTS[0],
                "location all the buildings",
                "yes",
            ],
            "case3.json": [CASE3, "weekdays from 2pm to 5pm", CASE3, "yes"],
        }
        for name, texts in cases.items():
            (OUT / name).write_text(
                json.dumps(record_conversation(client, texts), indent=2) + "\n"
            )
        batch = client.post(
            "/api/batch",
            content="\n".join(STARTER_REQUIREMENTS + [CASE3]),
            headers={"Content-Type": "text/plain"},
        ).json()
        (OUT / "batch.json").write_text(json.dumps(batch, indent=2) + "\n")
    print(f"fixtures written to {OUT}")


if __name__ == "__main__":
    main()
