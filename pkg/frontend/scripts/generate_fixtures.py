#!/usr/bin/env python3
"""Regenerate the committed response fixtures from the real service.

Each fixture under tests/fixtures/responses/ is the byte-exact body the
HTTP API returns for the matching request under tests/fixtures/requests/.
The sweep CSV is the canonical export for the same sweep, produced by
the backend's own CSV writer, so the UI's rebuilt CSV can be compared
against it byte for byte.

Run from the frontend directory (requires the backend installed):
    npm run fixtures
"""

import json
from pathlib import Path

from starlette.testclient import TestClient

from shardsim import api, jsonio
from shardsim.config import parse_run_config
from shardsim.service import create_app

ROOT = Path(__file__).resolve().parent.parent
REQUESTS = ROOT / "tests" / "fixtures" / "requests"
RESPONSES = ROOT / "tests" / "fixtures" / "responses"

SIMULATE_FIXTURES = ("single-gpu", "dp-4nodes", "mp-32nodes", "fsdp-32nodes")


def save(name: str, text: str) -> None:
    path = RESPONSES / name
    path.write_text(text)
    print(f"wrote {path.relative_to(ROOT)} ({len(text)} bytes)")


def main() -> None:
    RESPONSES.mkdir(parents=True, exist_ok=True)
    client = TestClient(create_app())

    for name in SIMULATE_FIXTURES:
        body = json.loads((REQUESTS / f"{name}.json").read_text())
        response = client.post("/api/simulate", json=body)
        assert response.status_code == 200, f"{name}: {response.status_code}"
        save(f"{name}.json", response.text)

    sweep_body = json.loads((REQUESTS / "weak-sweep.json").read_text())
    response = client.post("/api/sweep", json=sweep_body)
    assert response.status_code == 200, f"weak-sweep: {response.status_code}"
    save("weak-sweep.json", response.text)

    # Canonical CSV for the same sweep, via the backend's own writer.
    rc, violations = parse_run_config(sweep_body)
    assert rc is not None, violations
    request, violations = api.parse_sweep_request(sweep_body["sweep"])
    assert request is not None, violations
    save("weak-sweep.csv", jsonio.sweep_csv(api.run_sweep(rc, request)))

    error_body = json.loads((REQUESTS / "error-bad-product.json").read_text())
    response = client.post("/api/simulate", json=error_body)
    assert response.status_code == 400, f"error-bad-product: {response.status_code}"
    save("error-bad-product.json", response.text)

    response = client.get("/api/presets")
    assert response.status_code == 200, f"presets: {response.status_code}"
    save("presets.json", response.text)


if __name__ == "__main__":
    main()
