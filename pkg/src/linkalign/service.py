"""HTTP service hosting fixture pods and streamed query executions.

The service rebases each configured fixture onto its own origin under
``/pods/{network}/`` so embedded IRIs dereference against the service,
and exposes execution endpoints under ``/api/``.  Events for every
execution are buffered in full, so reconnecting streams replay from the
start.
"""

from __future__ import annotations

import json
import threading
import uuid
from typing import Iterator, Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response, StreamingResponse

from .alignment import issuer_rules_from_json
from .engine import DEFAULT_SKIP_LIST, POLICIES, POLICY_FOLLOW_ALL, TraversalConfig, execute
from .fixtures import FixtureSet, rebase
from .sources import InMemorySource
from .sparql.parser import QueryParseError, parse_query

MAX_BODY_BYTES = 64 * 1024


class _ExecutionState:
    def __init__(self, execution_id: str):
        self.id = execution_id
        self.status = "running"
        self.report: Optional[dict] = None
        self.error: Optional[str] = None
        self.events: list[tuple[str, dict]] = []
        self.cond = threading.Condition()

    def emit(self, kind: str, payload: dict) -> None:
        with self.cond:
            self.events.append((kind, payload))
            self.cond.notify_all()

    def finish(self, report: dict) -> None:
        with self.cond:
            self.status = "done"
            self.report = report
            self.events.append(("done", {"id": self.id, "report": report}))
            self.cond.notify_all()

    def fail(self, message: str) -> None:
        with self.cond:
            self.status = "failed"
            self.error = message
            self.events.append(("error", {"id": self.id, "message": message}))
            self.cond.notify_all()

    def stream(self) -> Iterator[str]:
        index = 0
        while True:
            with self.cond:
                while index >= len(self.events):
                    self.cond.wait(timeout=0.1)
                kind, payload = self.events[index]
                index += 1
            yield f"event: {kind}\ndata: {json.dumps(payload, sort_keys=True)}\n\n"
            if kind in ("done", "error"):
                return


def _bad_request(message: str, **extra) -> JSONResponse:
    return JSONResponse({"error": message, **extra}, status_code=400)


def create_app(networks: dict[str, FixtureSet], origin: str) -> FastAPI:
    """Build the service over the given fixtures, rebased onto ``origin``."""
    if origin.endswith("/"):
        origin = origin[:-1]
    hosted: dict[str, FixtureSet] = {
        name: rebase(fx, f"{origin}/pods/{name}/") for name, fx in networks.items()
    }
    app = FastAPI(title="linkalign")
    executions: dict[str, _ExecutionState] = {}
    executions_lock = threading.Lock()

    @app.get("/pods/{network}/{suffix:path}")
    def get_pod_document(network: str, suffix: str) -> Response:
        fx = hosted.get(network)
        if fx is None:
            return Response(status_code=404)
        text = fx.documents.get(f"{fx.base_prefix}{suffix}")
        if text is None:
            return Response(status_code=404)
        return Response(content=text, media_type="text/turtle")

    @app.get("/api/networks")
    def get_networks() -> dict:
        return {
            "networks": [
                {
                    "name": name,
                    "configuration": fx.config.configuration,
                    "podCount": fx.config.pod_count,
                    "documentCount": len(fx.documents),
                    "podsRoot": fx.base_prefix,
                }
                for name, fx in sorted(hosted.items())
            ]
        }

    @app.get("/api/queries")
    def get_queries() -> dict:
        names: list[str] = []
        for fx in hosted.values():
            for name in fx.queries:
                if name not in names:
                    names.append(name)
        return {
            "queries": [
                {
                    "name": name,
                    "texts": {
                        network: fx.queries[name]
                        for network, fx in sorted(hosted.items())
                        if name in fx.queries
                    },
                }
                for name in names
            ]
        }

    def _run(state: _ExecutionState, query, cfg, src) -> None:
        try:
            report = execute(query, cfg, src, events=state.emit)
            state.finish(report.to_json_dict())
        except Exception as exc:  # surfaced to the stream, not the log
            state.fail(str(exc))

    @app.post("/api/executions")
    async def start_execution(request: Request) -> JSONResponse:
        body = await request.body()
        if len(body) > MAX_BODY_BYTES:
            return JSONResponse({"error": "request body exceeds 64 KiB"}, status_code=413)
        try:
            payload = json.loads(body)
        except ValueError:
            return _bad_request("request body is not valid JSON")
        if not isinstance(payload, dict):
            return _bad_request("request body must be a JSON object")

        network = payload.get("network")
        fx = hosted.get(network)
        if fx is None:
            return JSONResponse(
                {"error": f"network {network!r} is not hosted"}, status_code=409
            )

        query_text = payload.get("queryText")
        query_name = payload.get("queryName")
        if bool(query_text) == bool(query_name):
            return _bad_request("provide exactly one of queryText / queryName")
        if query_name is not None:
            if query_name not in fx.queries:
                return _bad_request(f"unknown query name {query_name!r}")
            query_text = fx.queries[query_name]
            seeds = fx.seeds[query_name]
        else:
            if not isinstance(query_text, str):
                return _bad_request("queryText must be a string")
            seeds = (f"{fx.base_prefix}u0/card",)
        try:
            query = parse_query(query_text)
        except QueryParseError as exc:
            return _bad_request(str(exc), position=exc.position)

        alignment = payload.get("alignment", "on")
        if alignment in (True, False):
            alignment = "on" if alignment else "off"
        if alignment not in ("on", "off"):
            return _bad_request("alignment must be 'on' or 'off'")
        policy = payload.get("policy", POLICY_FOLLOW_ALL)
        if policy not in POLICIES:
            return _bad_request(f"unknown policy {policy!r}")
        deterministic = bool(payload.get("deterministic", False))
        issuer_rules = ()
        if "issuerRules" in payload and payload["issuerRules"] is not None:
            try:
                issuer_rules = tuple(issuer_rules_from_json(payload["issuerRules"]))
            except ValueError as exc:
                return _bad_request(f"invalid issuer rules: {exc}")

        cfg = TraversalConfig(
            seeds=seeds,
            policy=policy,
            deterministic=deterministic,
            alignment_enabled=alignment == "on",
            namespace_skip_list=DEFAULT_SKIP_LIST | frozenset(fx.skip_prefixes),
            workers=1 if deterministic else 4,
            issuer_rules=issuer_rules,
        )
        src = InMemorySource(fx.documents)

        state = _ExecutionState(uuid.uuid4().hex[:12])
        with executions_lock:
            executions[state.id] = state
        threading.Thread(
            target=_run, args=(state, query, cfg, src), daemon=True
        ).start()
        return JSONResponse({"id": state.id}, status_code=202)

    @app.get("/api/executions/{execution_id}")
    def get_execution(execution_id: str) -> JSONResponse:
        with executions_lock:
            state = executions.get(execution_id)
        if state is None:
            return JSONResponse({"error": "unknown execution id"}, status_code=404)
        with state.cond:
            return JSONResponse(
                {
                    "id": state.id,
                    "status": state.status,
                    "report": state.report,
                    "error": state.error,
                }
            )

    @app.get("/api/executions/{execution_id}/events")
    def stream_events(execution_id: str) -> Response:
        with executions_lock:
            state = executions.get(execution_id)
        if state is None:
            return JSONResponse({"error": "unknown execution id"}, status_code=404)
        return StreamingResponse(state.stream(), media_type="text/event-stream")

    return app
