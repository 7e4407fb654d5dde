"""Machine protocol for driving sessions: one JSON object per line.

Requests: {"cmd": "start"|"choose"|"continue"|"quit", ...}.  Responses
mirror the possible prompts: menu, terminated, deadlock, taulimit, or an
error carrying a machine-readable code.  The same prompt encoding is used
by the HTTP service.
"""

from __future__ import annotations

import json
import sys
from typing import Optional

from .animator import (DeadlockPrompt, MenuPrompt, RejectedEvent, Session,
                       SessionError, TerminatedPrompt, _json_value,
                       session_start)
from .dsl import ElabError, ModelRuntimeError, ParseError

__all__ = ["prompt_json", "ProtocolDriver", "run_stdio"]


def prompt_json(session: Session) -> dict:
    """Encode a session's current prompt, trace and state snapshot."""
    prompt = session.prompt
    base = {
        "trace": session.trace_labels(),
        "state": session.state_view(),
    }
    if isinstance(prompt, MenuPrompt):
        return {"status": "menu",
                "events": [{"id": i, "label": label} for i, label in prompt.entries],
                **base}
    if isinstance(prompt, TerminatedPrompt):
        return {"status": "terminated", "value": _json_value(prompt.value), **base}
    if isinstance(prompt, DeadlockPrompt):
        return {"status": "deadlock", **base}
    return {"status": "taulimit", "taus": prompt.taus, **base}


def _error(message: str, code: str) -> dict:
    return {"status": "error", "message": message, "code": code}


class ProtocolDriver:
    """Stateful request dispatcher shared by the stdio loop and tests."""

    def __init__(self, default_model: Optional[str] = None,
                 default_target: Optional[str] = None,
                 consts: Optional[dict] = None, tau_budget: int = 20):
        self.default_model = default_model
        self.default_target = default_target
        self.consts = consts or {}
        self.tau_budget = tau_budget
        self.session: Optional[Session] = None
        self.done = False

    def handle(self, request: dict) -> dict:
        cmd = request.get("cmd")
        if cmd == "quit":
            self.done = True
            return {"status": "bye"}
        if cmd == "start":
            return self._start(request)
        if cmd == "choose":
            return self._choose(request)
        if cmd == "continue":
            return self._continue()
        return _error(f"unknown command {cmd!r}", "bad_command")

    def handle_line(self, line: str) -> dict:
        try:
            request = json.loads(line)
        except json.JSONDecodeError as e:
            return _error(f"bad JSON: {e}", "bad_json")
        if not isinstance(request, dict):
            return _error("request must be a JSON object", "bad_json")
        return self.handle(request)

    def _start(self, request: dict) -> dict:
        model = request.get("model", self.default_model)
        target = request.get("target", self.default_target)
        if model is None or target is None:
            return _error("start needs a model and a target", "bad_request")
        consts = {**self.consts, **request.get("consts", {})}
        try:
            self.session = session_start(
                model, target, args=tuple(request.get("args", ())),
                consts=consts, tau_budget=request.get("tauBudget", self.tau_budget))
        except (ParseError, ElabError, ModelRuntimeError, OSError, SessionError) as e:
            return _error(str(e), "start_failed")
        return prompt_json(self.session)

    def _choose(self, request: dict) -> dict:
        if self.session is None:
            return _error("no session started", "no_session")
        choice = request.get("eventId", request.get("label"))
        if choice is None:
            return _error("choose needs an eventId or label", "bad_request")
        try:
            self.session.choose(choice)
        except RejectedEvent as e:
            return _error(str(e), "event_not_enabled")
        except SessionError as e:
            return _error(str(e), "bad_state")
        return prompt_json(self.session)

    def _continue(self) -> dict:
        if self.session is None:
            return _error("no session started", "no_session")
        try:
            self.session.continue_taus()
        except SessionError as e:
            return _error(str(e), "bad_state")
        return prompt_json(self.session)


def run_stdio(default_model=None, default_target=None, consts=None,
              tau_budget: int = 20, stdin=None, stdout=None) -> None:
    """Serve the line protocol until quit or end of input."""
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    driver = ProtocolDriver(default_model, default_target, consts, tau_budget)
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        response = driver.handle_line(line)
        stdout.write(json.dumps(response) + "\n")
        stdout.flush()
        if driver.done:
            break
