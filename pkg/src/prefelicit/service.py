"""HTTP service hosting live elicitation sessions for a human decision
maker.

Each session is an append-only JSONL event log (created / query_issued /
answered / finished) plus an in-memory runtime; crash recovery replays the
created and answered events, which reproduces the posterior bit for bit
because all randomness derives from the session seed. Solves triggered by an
answer run on a background thread: the answer endpoint returns a computing
status immediately and the query endpoint is polled until the next pair is
ready.

The decision-maker-facing payloads expose only per-criterion performance
vectors; the posterior itself is visible only through the flag-gated
diagnostics endpoint.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI, HTTPException
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .elicitation import SessionConfig, SessionState, advance, apply_answer, new_session
from .milp import MilpBackend, SolverError, get_backend
from .problems import ProblemInstance, instance_from_json_dict


class CreateSessionRequest(BaseModel):
    instance: dict
    config: dict = {}


class AnswerRequest(BaseModel):
    a: int
    query_index: int | None = None


@dataclass
class SessionRuntime:
    session_id: str
    instance: ProblemInstance
    config: SessionConfig
    state: SessionState
    backend: MilpBackend  # one instance per session: solves never share state
    lock: threading.Lock = field(default_factory=threading.Lock)
    computing: bool = False
    error: str | None = None


class SessionStore:
    """In-memory sessions backed by per-session JSONL event logs."""

    def __init__(self, data_dir: str, backend_name: str, time_limit: float):
        self.data_dir = data_dir
        self.backend_name = backend_name
        self.time_limit = time_limit
        self.sessions: dict[str, SessionRuntime] = {}
        self._registry_lock = threading.Lock()
        os.makedirs(data_dir, exist_ok=True)

    def new_backend(self) -> MilpBackend:
        return get_backend(self.backend_name, time_limit=self.time_limit)

    def log_path(self, session_id: str) -> str:
        return os.path.join(self.data_dir, f"{session_id}.jsonl")

    def append_event(self, session_id: str, event: dict):
        with open(self.log_path(session_id), "a") as fh:
            fh.write(json.dumps(event) + "\n")

    def read_events(self, session_id: str) -> list[dict]:
        with open(self.log_path(session_id)) as fh:
            return [json.loads(line) for line in fh if line.strip()]

    def create(self, instance: ProblemInstance, config: SessionConfig) -> SessionRuntime:
        session_id = uuid.uuid4().hex
        runtime = SessionRuntime(
            session_id, instance, config, new_session(instance, config), self.new_backend()
        )
        self.append_event(
            session_id,
            {
                "event": "created",
                "session_id": session_id,
                "instance": instance.to_json_dict(),
                "config": config.__dict__,
            },
        )
        runtime.state = advance(runtime.state, instance, config, runtime.backend)
        self._log_round(runtime)
        with self._registry_lock:
            self.sessions[session_id] = runtime
        return runtime

    def _log_round(self, runtime: SessionRuntime):
        state = runtime.state
        if state.finished:
            rec = state.recommendation
            self.append_event(
                runtime.session_id,
                {
                    "event": "finished",
                    "query_count": state.query_count,
                    "mmer": state.current.value,
                    "recommendation_decision": rec.decision.tolist(),
                    "recommendation_performance": rec.performance.tolist(),
                },
            )
        else:
            x, y = state.pending
            self.append_event(
                runtime.session_id,
                {
                    "event": "query_issued",
                    "query_index": state.query_count,
                    "mmer": state.current.value,
                    "x_performance": x.performance.tolist(),
                    "y_performance": y.performance.tolist(),
                    "x_decision": x.decision.tolist(),
                    "y_decision": y.decision.tolist(),
                },
            )

    def get(self, session_id: str) -> SessionRuntime:
        with self._registry_lock:
            runtime = self.sessions.get(session_id)
        if runtime is not None:
            return runtime
        if os.path.exists(self.log_path(session_id)):
            runtime = self._replay(session_id)
            with self._registry_lock:
                return self.sessions.setdefault(session_id, runtime)
        raise HTTPException(status_code=404, detail="unknown session")

    def _replay(self, session_id: str) -> SessionRuntime:
        """Rebuild a session from its log; deterministic seed derivation
        makes the replayed posterior bit-identical to the original."""
        events = self.read_events(session_id)
        created = events[0]
        instance = instance_from_json_dict(created["instance"])
        config = SessionConfig(**created["config"])
        backend = self.new_backend()
        state = advance(new_session(instance, config), instance, config, backend)
        for event in events:
            if event["event"] == "answered":
                state = apply_answer(state, config, event["a"])
                state = advance(state, instance, config, backend)
        return SessionRuntime(session_id, instance, config, state, backend)


def _query_payload(runtime: SessionRuntime) -> dict:
    state = runtime.state
    if runtime.error is not None:
        raise HTTPException(status_code=500, detail=runtime.error)
    if runtime.computing:
        return {"status": "computing", "session_id": runtime.session_id,
                "query_count": state.query_count}
    names = runtime.instance.criteria_names
    base = {
        "session_id": runtime.session_id,
        "query_count": state.query_count,
        "mmer": state.current.value if state.current else None,
        "initial_mmer": state.initial_mmer,
        "criteria_names": list(names) if names else None,
    }
    if state.finished:
        rec = state.recommendation
        return {
            **base,
            "status": "finished",
            "recommendation": {
                "decision": rec.decision.tolist(),
                "performance": rec.performance.tolist(),
            },
        }
    x, y = state.pending
    return {
        **base,
        "status": "ready",
        "query_index": state.query_count,
        "x": x.performance.tolist(),
        "y": y.performance.tolist(),
    }


def create_app(
    data_dir: str = "./sessions",
    backend_name: str = "highs",
    time_limit: float = 60.0,
    expose_diagnostics: bool = False,
    static_dir: str | None = None,
) -> FastAPI:
    app = FastAPI(title="prefelicit session service")
    store = SessionStore(data_dir, backend_name, time_limit)
    app.state.store = store

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/sessions", status_code=201)
    def create_session(request: CreateSessionRequest):
        try:
            instance = instance_from_json_dict(request.instance)
            config = SessionConfig(**request.config)
        except (ValueError, TypeError, KeyError) as exc:
            raise HTTPException(status_code=400, detail=f"invalid payload: {exc}")
        try:
            runtime = store.create(instance, config)
        except SolverError as exc:
            raise HTTPException(status_code=500, detail=f"solver failure: {exc}")
        return _query_payload(runtime)

    @app.get("/sessions/{session_id}/query")
    def get_query(session_id: str):
        runtime = store.get(session_id)
        with runtime.lock:
            return _query_payload(runtime)

    @app.post("/sessions/{session_id}/answer")
    def post_answer(session_id: str, request: AnswerRequest):
        runtime = store.get(session_id)
        if request.a not in (0, 1):
            raise HTTPException(status_code=400, detail="a must be 0 or 1")
        with runtime.lock:
            if runtime.error is not None:
                raise HTTPException(status_code=500, detail=runtime.error)
            if runtime.computing:
                raise HTTPException(status_code=409, detail="still computing; poll the query")
            if runtime.state.finished:
                raise HTTPException(status_code=409, detail="session already finished")
            if runtime.state.pending is None:
                raise HTTPException(status_code=409, detail="no pending query")
            current_index = runtime.state.query_count
            if request.query_index is not None and request.query_index != current_index:
                raise HTTPException(
                    status_code=409,
                    detail=f"query {request.query_index} is not pending (now {current_index})",
                )
            runtime.state = apply_answer(runtime.state, runtime.config, request.a)
            store.append_event(
                session_id, {"event": "answered", "query_index": current_index, "a": request.a}
            )
            runtime.computing = True

        def compute_next():
            try:
                next_state = advance(
                    runtime.state, runtime.instance, runtime.config, runtime.backend
                )
                with runtime.lock:
                    runtime.state = next_state
                    store._log_round(runtime)
                    runtime.computing = False
            except Exception as exc:  # noqa: BLE001 - surfaced via the API
                with runtime.lock:
                    runtime.error = str(exc)
                    runtime.computing = False

        threading.Thread(target=compute_next, daemon=True).start()
        return {"status": "computing", "session_id": session_id, "answered": current_index}

    @app.get("/sessions/{session_id}/trace")
    def get_trace(session_id: str):
        runtime = store.get(session_id)
        return {"session_id": session_id, "events": store.read_events(session_id)}

    if expose_diagnostics:
        @app.get("/sessions/{session_id}/diagnostics")
        def diagnostics(session_id: str):
            runtime = store.get(session_id)
            with runtime.lock:
                mean = runtime.state.posterior.mean
                normalized = mean.clip(min=0.0)
                total = normalized.sum()
                return {
                    "posterior_mean": mean.tolist(),
                    "posterior_mean_normalized": (
                        (normalized / total).tolist() if total > 0 else None
                    ),
                    "query_count": runtime.state.query_count,
                }

    if static_dir is not None and os.path.isdir(static_dir):
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    return app


def main():
    import click
    import uvicorn

    @click.command()
    @click.option("--host", default="127.0.0.1", show_default=True)
    @click.option("--port", type=int, default=8000, show_default=True)
    @click.option("--data-dir", default="./sessions", show_default=True)
    @click.option("--backend", type=click.Choice(["highs", "bnb"]), default="highs",
                  show_default=True)
    @click.option("--time-limit", type=float, default=60.0, show_default=True)
    @click.option("--expose-diagnostics", is_flag=True, default=False)
    @click.option("--static-dir", default=None, help="serve a built frontend from this directory")
    def serve(host, port, data_dir, backend, time_limit, expose_diagnostics, static_dir):
        app = create_app(data_dir, backend, time_limit, expose_diagnostics, static_dir)
        uvicorn.run(app, host=host, port=port)

    serve()


if __name__ == "__main__":
    main()
