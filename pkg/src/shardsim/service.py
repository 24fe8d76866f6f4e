"""HTTP JSON API over the simulation core.

Stateless: every request runs an independent pure simulation against
immutable presets. Responses carry either a result block or a non-empty
`errors` list, never both, and are rendered with the same canonical JSON
writer the CLI uses, so identical configs produce byte-identical payloads
on both paths.
"""

from __future__ import annotations

import json

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware

from . import api
from ._version import __version__
from .config import parse_run_config
from .jsonio import render_json
from .planner import OBJECTIVES, PlanConstraints

# Long sweeps run synchronously; beyond this many estimated simulations
# the request is rejected rather than queued.
SWEEP_SIMULATION_CAP = 512

_MEDIA_TYPE = "application/json"


def _respond(env: dict, status_code: int = 200) -> Response:
    return Response(
        content=render_json(env) + "\n", status_code=status_code, media_type=_MEDIA_TYPE
    )


def _reject(violations: list[str]) -> Response:
    return _respond(api.violations_envelope(violations), status_code=400)


async def _read_body(request: Request) -> tuple[object | None, list[str]]:
    try:
        return json.loads(await request.body()), []
    except json.JSONDecodeError as exc:
        return None, [f"/: body is not valid JSON: {exc}"]


def _constraints_from(raw: object) -> tuple[PlanConstraints | None, list[str]]:
    objective = raw.get("objective", "throughput") if isinstance(raw, dict) else "throughput"
    if objective not in OBJECTIVES:
        return None, [f"/objective: must be one of {list(OBJECTIVES)}"]
    return PlanConstraints(objective=objective), []


_SCHEMA = {
    "openapi": "3.0.0",
    "info": {
        "title": "shardsim service",
        "version": __version__,
        "description": "Analytical simulator for sharded data-parallel, tensor-parallel, "
        "and pipeline-parallel transformer training.",
    },
    "paths": {
        "/api/simulate": {
            "post": {
                "summary": "Simulate one training step for a fixed parallelism layout",
                "requestBody": "run config object: hardware, model, workload, parallelism, "
                "optional knobs and cost_params blocks",
                "responses": {
                    "200": "{engine_version, errors: [], simulation: {config, breakdown, metrics}}",
                    "400": "{engine_version, errors: [violation, ...]}",
                },
            }
        },
        "/api/plan": {
            "post": {
                "summary": "Enumerate and rank parallelism layouts",
                "requestBody": "run config object without a parallelism block; "
                "optional objective: throughput|energy",
                "responses": {
                    "200": "{engine_version, errors: [], plan: {...}}",
                    "400": "{engine_version, errors: [...]}",
                },
            }
        },
        "/api/sweep": {
            "post": {
                "summary": "Simulate a series along one axis",
                "requestBody": "run config object plus sweep: {axis: world|batch|model|seqlen|hw, "
                "nodes: [...], values: [...], local_batch}",
                "responses": {
                    "200": "{engine_version, errors: [], sweep: {...}}",
                    "400": "{engine_version, errors: [...]}",
                },
            }
        },
        "/api/decide": {
            "post": {
                "summary": "Compare two layouts with the sharding cost model",
                "requestBody": '{"from": <run config>, "to": <run config>}',
                "responses": {
                    "200": "{engine_version, errors: [], decision: {...}}",
                    "400": "{engine_version, errors: [...]}",
                },
            }
        },
        "/api/presets": {
            "get": {
                "summary": "Hardware and model presets plus default knobs and cost params",
                "responses": {"200": "{engine_version, errors: [], presets: {...}}"},
            }
        },
    },
}


def create_app() -> FastAPI:
    app = FastAPI(title="shardsim", version=__version__, openapi_url=None, docs_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["GET", "POST"],
        allow_headers=["*"],
    )

    @app.post("/api/simulate")
    async def simulate(request: Request) -> Response:
        raw, errors = await _read_body(request)
        if errors:
            return _reject(errors)
        rc, violations = parse_run_config(raw)
        if rc is None:
            return _reject(violations)
        return _respond(api.simulate_envelope(rc))

    @app.post("/api/plan")
    async def plan(request: Request) -> Response:
        raw, errors = await _read_body(request)
        if errors:
            return _reject(errors)
        constraints, errors = _constraints_from(raw)
        if errors:
            return _reject(errors)
        rc, violations = parse_run_config(raw, require_parallelism=False)
        if rc is None:
            return _reject(violations)
        return _respond(api.plan_envelope(rc, constraints))

    @app.post("/api/sweep")
    async def sweep(request: Request) -> Response:
        raw, errors = await _read_body(request)
        if errors:
            return _reject(errors)
        if not isinstance(raw, dict):
            return _reject(["/: configuration must be a JSON object"])
        sweep_request, violations = api.parse_sweep_request(raw.get("sweep"))
        constraints, errors = _constraints_from(raw)
        violations.extend(errors)
        rc, config_violations = parse_run_config(raw, require_parallelism=False)
        violations.extend(config_violations)
        if rc is None or sweep_request is None or constraints is None:
            return _reject(violations)
        cost = api.estimated_sweep_cost(rc, sweep_request)
        if cost > SWEEP_SIMULATION_CAP:
            return _reject(
                [
                    f"/sweep: estimated {cost} simulations exceeds the per-request "
                    f"cap of {SWEEP_SIMULATION_CAP}; shorten the ladder or pin a "
                    f"parallelism block"
                ]
            )
        return _respond(api.sweep_envelope(api.run_sweep(rc, sweep_request, constraints)))

    @app.post("/api/decide")
    async def decide(request: Request) -> Response:
        raw, errors = await _read_body(request)
        if errors:
            return _reject(errors)
        if not isinstance(raw, dict) or "from" not in raw or "to" not in raw:
            return _reject(['/: body must have "from" and "to" run config objects'])
        rc_from, violations_from = parse_run_config(raw["from"])
        rc_to, violations_to = parse_run_config(raw["to"])
        violations = [f"/from{v}" for v in violations_from]
        violations += [f"/to{v}" for v in violations_to]
        if rc_from is None or rc_to is None:
            return _reject(violations)
        env = api.decide_envelope(rc_from, rc_to)
        if env["errors"]:
            return _respond(env, status_code=400)
        return _respond(env)

    @app.get("/api/presets")
    async def presets() -> Response:
        return _respond(api.presets_envelope())

    @app.get("/api/schema")
    async def schema() -> Response:
        return _respond(_SCHEMA)

    return app
