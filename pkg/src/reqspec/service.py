"""HTTP service: sessions, batch conversion, knowledge-base admin, UI hosting.

All durable state lives in the knowledge-base store (a JSON file) and
the session store; handlers only ever read one immutable snapshot per
message, and a flush swaps the published snapshot atomically so
in-flight sessions keep their version until their next extraction.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import dialogue
from .errors import EmptyInput, ReqspecError, SessionFinalized
from .extract import extract_frame
from .formula import build_formula, render_formal, render_friendly
from .kb import KnowledgeBase, LearnedSample, flush_learned, save_file
from .model import Requirement

DEFAULT_BATCH_LIMIT = 1000
DEFAULT_SESSION_TTL = 3600.0


def _error(status: int, error: str, detail: str) -> JSONResponse:
    return JSONResponse({"error": error, "detail": detail}, status_code=status)


@dataclass
class _SessionBox:
    session: dialogue.Session
    lock: threading.Lock = field(default_factory=threading.Lock)
    last_access: float = field(default_factory=time.time)


class AppState:
    """Shared mutable state behind the endpoints."""

    def __init__(self, kb: KnowledgeBase, kb_path: str | None):
        self._kb = kb
        self.kb_path = kb_path
        self.kb_lock = threading.Lock()
        self.flush_lock = threading.Lock()
        self.sessions: dict[str, _SessionBox] = {}
        self.sessions_lock = threading.Lock()
        self.learning_queue: list[LearnedSample] = []
        self.queue_lock = threading.Lock()

    @property
    def kb(self) -> KnowledgeBase:
        with self.kb_lock:
            return self._kb

    def publish(self, kb: KnowledgeBase):
        with self.kb_lock:
            self._kb = kb

    def flush(self) -> dict:
        """Validate queued samples into a new snapshot; exclusive."""
        with self.flush_lock:
            with self.queue_lock:
                samples = list(self.learning_queue)
                self.learning_queue = []
            new_kb = flush_learned(self.kb, samples)
            if self.kb_path:
                save_file(new_kb, self.kb_path)
            self.publish(new_kb)
            accepted = sum(1 for s in samples if s.status == "accepted")
            rejected = sum(1 for s in samples if s.status == "rejected")
            return {
                "new_version": new_kb.version,
                "accepted": accepted,
                "rejected": rejected,
            }


def reply_payload(reply: dialogue.Reply) -> dict:
    return {
        "reply_text": reply.text,
        "state": reply.state_after,
        "frame": reply.frame_view,
        "formal": reply.spec_view["formal"] if reply.spec_view else None,
        "friendly": reply.spec_view["friendly"] if reply.spec_view else None,
    }


def batch_outcomes(lines: list[str], kb: KnowledgeBase) -> list[dict]:
    """One outcome per non-empty line; batch mode never prompts."""
    outcomes = []
    line_no = 0
    for raw in lines:
        text = raw.strip()
        if not text:
            continue
        line_no += 1
        try:
            frame, missing = extract_frame(
                Requirement(f"line-{line_no}", text, source="batch"), kb
            )
            if missing:
                outcomes.append(
                    {
                        "line": line_no,
                        "status": "needs_clarification",
                        "missing": [k.value for k in missing],
                    }
                )
            else:
                formula = build_formula(frame)
                outcomes.append(
                    {
                        "line": line_no,
                        "status": "ok",
                        "frame": frame.to_dict(),
                        "formal": render_formal(formula),
                        "friendly": render_friendly(frame, formula),
                    }
                )
        except ReqspecError as exc:
            outcomes.append({"line": line_no, "status": "error", "error": str(exc)})
    return outcomes


def create_app(
    kb: KnowledgeBase,
    *,
    kb_path: str | None = None,
    admin_token: str | None = None,
    batch_limit: int = DEFAULT_BATCH_LIMIT,
    session_ttl: float = DEFAULT_SESSION_TTL,
    static_dir: str | None = None,
) -> FastAPI:
    app = FastAPI(title="reqspec", version="0.1.0")
    state = AppState(kb, kb_path)
    app.state.reqspec = state

    def prune_sessions():
        horizon = time.time() - session_ttl
        with state.sessions_lock:
            stale = [k for k, v in state.sessions.items() if v.last_access < horizon]
            for k in stale:
                del state.sessions[k]

    def authorized(request: Request) -> bool:
        supplied = request.headers.get("x-admin-token")
        return admin_token is not None and supplied == admin_token

    @app.get("/api/health")
    def health():
        return {"status": "ok", "kb_version": state.kb.version}

    @app.post("/api/sessions", status_code=201)
    def create_session(request: Request):
        prune_sessions()
        user = request.headers.get("x-user-id", "anonymous")
        session = dialogue.open_session(user=user)
        with state.sessions_lock:
            state.sessions[session.id] = _SessionBox(session)
        return {"session_id": session.id}

    @app.post("/api/sessions/{session_id}/messages")
    async def post_message(session_id: str, request: Request):
        with state.sessions_lock:
            box = state.sessions.get(session_id)
        if box is None:
            return _error(404, "unknown_session", f"no session {session_id!r}")
        try:
            body = await request.json()
        except Exception:
            body = None
        text = (body or {}).get("text") if isinstance(body, dict) else None
        if not isinstance(text, str) or not text.strip():
            return _error(422, "empty_text", "body must be {\"text\": \"...\"}")
        snapshot = state.kb
        with box.lock:
            box.last_access = time.time()
            try:
                reply = dialogue.handle_message(box.session, text, snapshot)
            except SessionFinalized as exc:
                return _error(409, "session_finalized", str(exc))
            except EmptyInput as exc:
                return _error(422, "empty_text", str(exc))
        return reply_payload(reply)

    @app.get("/api/sessions/{session_id}/transcript")
    def get_transcript(session_id: str):
        with state.sessions_lock:
            box = state.sessions.get(session_id)
        if box is None:
            return _error(404, "unknown_session", f"no session {session_id!r}")
        return {"transcript": dialogue.export_transcript(box.session)}

    @app.delete("/api/sessions/{session_id}", status_code=204)
    def delete_session(session_id: str):
        with state.sessions_lock:
            box = state.sessions.pop(session_id, None)
        if box is None:
            return _error(404, "unknown_session", f"no session {session_id!r}")
        with box.lock:
            samples = dialogue.close_session(box.session)
        with state.queue_lock:
            state.learning_queue.extend(samples)
        return Response(status_code=204)

    @app.post("/api/batch")
    async def batch(request: Request):
        content_type = request.headers.get("content-type", "")
        if content_type and not content_type.lower().startswith("text/"):
            return _error(415, "unsupported_media_type", "upload plain text")
        body = await request.body()
        try:
            text = body.decode("utf-8")
        except UnicodeDecodeError:
            return _error(415, "unsupported_media_type", "upload must be UTF-8 text")
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if len(lines) > batch_limit:
            return _error(
                413, "too_many_lines", f"batch limited to {batch_limit} lines"
            )
        return {"results": batch_outcomes(lines, state.kb)}

    @app.post("/api/admin/flush")
    def admin_flush(request: Request):
        if not authorized(request):
            return _error(401, "unauthorized", "admin token required")
        return state.flush()

    @app.get("/api/admin/kb")
    def admin_kb(request: Request):
        if not authorized(request):
            return _error(401, "unauthorized", "admin token required")
        snapshot = state.kb
        return {
            "version": snapshot.version,
            "vocabulary_size": len(snapshot.vocabulary),
            "learned_entries": sum(
                1 for e in snapshot.vocabulary if e.provenance == "learned"
            ),
            "patterns": len(snapshot.patterns),
            "ordinal_scales": sorted(snapshot.ordinal_scales),
            "rejections": len(snapshot.rejection_log),
            "pending_samples": len(state.learning_queue),
        }

    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    else:

        @app.get("/")
        def index():
            return {
                "service": "reqspec",
                "hint": "build the frontend (see README) or use the /api endpoints",
            }

    return app


def flush_periodically(app: FastAPI, period_seconds: float) -> threading.Thread:
    """Background flush timer; used by the CLI server, not by tests."""
    state: AppState = app.state.reqspec

    def loop():
        while True:
            time.sleep(period_seconds)
            state.flush()

    thread = threading.Thread(target=loop, daemon=True, name="kb-flush")
    thread.start()
    return thread
