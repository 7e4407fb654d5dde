"""HTTP service for the animator, plus static hosting for the web client.

Sessions live in memory; each is stepped under its own lock so concurrent
requests against one session serialise.  Prompts use the same JSON
encoding as the stdio protocol.
"""

from __future__ import annotations

import json
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional

from .animator import RejectedEvent, SessionError, session_start
from .dsl import ElabError, ModelRuntimeError, ParseError
from .protocol import prompt_json

__all__ = ["AnimatorService", "make_server", "serve_forever"]

_SESSION_PATH = re.compile(r"^/sessions/(\d+)(/(choose|continue))?$")

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".mjs": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".map": "application/json",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".ico": "image/x-icon",
}


class AnimatorService:
    """Session registry behind the HTTP handler; usable directly in tests."""

    def __init__(self, model_root: Optional[str] = None):
        self.model_root = Path(model_root) if model_root else None
        self._sessions: dict = {}
        self._locks: dict = {}
        self._registry_lock = threading.Lock()

    def _resolve_path(self, ref: str) -> str:
        if self.model_root is not None and not Path(ref).is_absolute():
            return str(self.model_root / ref)
        return ref

    # -- operations, each returning (http status, payload dict) -------------

    def create(self, body: dict):
        model = body.get("model")
        target = body.get("target")
        if not model or not target:
            return 400, _err("body needs 'model' and 'target'", "bad_request")
        try:
            session = session_start(
                self._resolve_path(model), target,
                args=tuple(body.get("args", ())),
                consts=body.get("consts") or {},
                tau_budget=body.get("tauBudget", 20))
        except (ParseError, ElabError, ModelRuntimeError, OSError, SessionError) as e:
            return 422, _err(str(e), "start_failed")
        with self._registry_lock:
            self._sessions[session.id] = session
            self._locks[session.id] = threading.Lock()
        return 201, {"id": session.id, "prompt": prompt_json(session)}

    def get(self, sid: int):
        session = self._sessions.get(sid)
        if session is None:
            return 404, _err(f"no session {sid}", "session_gone")
        with self._locks[sid]:
            return 200, {"id": sid, "prompt": prompt_json(session)}

    def choose(self, sid: int, body: dict):
        session = self._sessions.get(sid)
        if session is None:
            return 404, _err(f"no session {sid}", "session_gone")
        choice = body.get("eventId", body.get("label"))
        if choice is None:
            return 400, _err("body needs 'eventId' or 'label'", "bad_request")
        with self._locks[sid]:
            try:
                session.choose(choice)
            except RejectedEvent as e:
                return 409, _err(str(e), "event_not_enabled")
            except SessionError as e:
                return 409, _err(str(e), "bad_state")
            return 200, {"id": sid, "prompt": prompt_json(session)}

    def cont(self, sid: int):
        session = self._sessions.get(sid)
        if session is None:
            return 404, _err(f"no session {sid}", "session_gone")
        with self._locks[sid]:
            try:
                session.continue_taus()
            except SessionError as e:
                return 409, _err(str(e), "bad_state")
            return 200, {"id": sid, "prompt": prompt_json(session)}

    def delete(self, sid: int):
        with self._registry_lock:
            if sid not in self._sessions:
                return 404, _err(f"no session {sid}", "session_gone")
            del self._sessions[sid]
            del self._locks[sid]
        return 204, None


def _err(message: str, code: str) -> dict:
    return {"status": "error", "message": message, "code": code}


_FALLBACK_PAGE = """<!doctype html>
<html><head><title>itree animator</title></head>
<body><h1>itree animator</h1>
<p>The API is live: POST /sessions with {"model": ..., "target": ...}.</p>
<p>No web client bundle was found; pass --static DIR to serve one.</p>
</body></html>
"""


def make_server(port: int = 0, static_dir: Optional[str] = None,
                model_root: Optional[str] = None) -> ThreadingHTTPServer:
    service = AnimatorService(model_root=model_root)
    static = Path(static_dir) if static_dir else None

    class Handler(BaseHTTPRequestHandler):
        def log_message(self, *args):  # quiet by default
            pass

        def _send_json(self, status: int, payload):
            if status == 204:
                self.send_response(204)
                self.end_headers()
                return
            blob = json.dumps(payload).encode()
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(blob)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(blob)

        def _body(self) -> dict:
            length = int(self.headers.get("Content-Length") or 0)
            if length == 0:
                return {}
            try:
                parsed = json.loads(self.rfile.read(length))
                return parsed if isinstance(parsed, dict) else {}
            except json.JSONDecodeError:
                return {}

        def do_POST(self):
            if self.path == "/sessions":
                self._send_json(*service.create(self._body()))
                return
            m = _SESSION_PATH.match(self.path)
            if m and m.group(3) == "choose":
                self._send_json(*service.choose(int(m.group(1)), self._body()))
                return
            if m and m.group(3) == "continue":
                self._send_json(*service.cont(int(m.group(1))))
                return
            self._send_json(404, _err("not found", "not_found"))

        def do_GET(self):
            m = _SESSION_PATH.match(self.path)
            if m and m.group(2) is None:
                self._send_json(*service.get(int(m.group(1))))
                return
            self._serve_static()

        def do_DELETE(self):
            m = _SESSION_PATH.match(self.path)
            if m and m.group(2) is None:
                self._send_json(*service.delete(int(m.group(1))))
                return
            self._send_json(404, _err("not found", "not_found"))

        def _serve_static(self):
            path = self.path.split("?", 1)[0]
            if path == "/":
                path = "/index.html"
            if static is not None:
                target = (static / path.lstrip("/")).resolve()
                if str(target).startswith(str(static.resolve())) and target.is_file():
                    blob = target.read_bytes()
                    self.send_response(200)
                    ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
                    self.send_header("Content-Type", ctype)
                    self.send_header("Content-Length", str(len(blob)))
                    self.end_headers()
                    self.wfile.write(blob)
                    return
            if path == "/index.html":
                blob = _FALLBACK_PAGE.encode()
                self.send_response(200)
                self.send_header("Content-Type", "text/html; charset=utf-8")
                self.send_header("Content-Length", str(len(blob)))
                self.end_headers()
                self.wfile.write(blob)
                return
            self._send_json(404, _err("not found", "not_found"))

    server = ThreadingHTTPServer(("127.0.0.1", port), Handler)
    server.service = service
    return server


def serve_forever(port: int, static_dir=None, model_root=None) -> None:
    server = make_server(port, static_dir, model_root)
    host, actual_port = server.server_address
    print(f"itree animator listening on http://{host}:{actual_port}/", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
