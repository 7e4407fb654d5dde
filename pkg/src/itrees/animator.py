"""Interactive sessions: step a tree by choosing events from its menus.

A session advances through at most ``tau_budget`` internal steps between
prompts (default 20); hitting the limit yields a prompt asking whether to
continue.  Choosing an event that is not on the menu is rejected and
leaves the session unchanged.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from importlib import resources
from typing import Any, Optional

from .combinators import Menu as ExecMenu
from .combinators import Deadlock as ExecDeadlock
from .combinators import Terminated as ExecTerminated
from .combinators import Timeout as ExecTimeout
from .combinators import execute
from .core import ExplorationBudget, ITree, canonical_value, render_value
from .dsl import Model, load_model
from .state import state_monitor

__all__ = [
    "MenuPrompt", "TerminatedPrompt", "DeadlockPrompt", "TauLimitPrompt",
    "Session", "SessionError", "RejectedEvent", "session_start",
    "builtin_models", "resolve_model",
]

BUILTIN_MODELS = ("buffer", "reverse", "bounded_buffer", "ring")


@dataclass(frozen=True)
class MenuPrompt:
    entries: tuple          # (id, label) pairs, sorted by event order
    events: tuple


@dataclass(frozen=True)
class TerminatedPrompt:
    value: Any


@dataclass(frozen=True)
class DeadlockPrompt:
    pass


@dataclass(frozen=True)
class TauLimitPrompt:
    taus: int


class SessionError(Exception):
    pass


class RejectedEvent(SessionError):
    """The chosen event is not currently enabled; the session is unchanged."""


_session_ids = itertools.count(1)


class Session:
    """One animation: a current tree, the trace so far, and the last prompt.

    The state view reflects store updates computed during this session's
    own stepping, so a tree must be built by the factory passed here (or
    freshly) for the initial assignments to show up.
    """

    def __init__(self, tree, tau_budget: int = 20,
                 source: Optional[str] = None, target: Optional[str] = None):
        if tau_budget <= 0:
            raise SessionError("tau budget must be positive")
        self.id = next(_session_ids)
        self.source = source
        self.target = target
        self.tau_budget = tau_budget
        self.trace: list = []
        self.taus_total = 0
        self.taus_since_prompt = 0
        self.state: dict = {}
        with state_monitor(self.state):
            if callable(tree) and not isinstance(tree, ITree):
                tree = tree()
        self.current = tree
        self.prompt = self._advance(tree)

    def _advance(self, tree: ITree):
        with state_monitor(self.state):
            result = execute(tree, ExplorationBudget(tau_fuel=self.tau_budget))
        if isinstance(result, ExecTerminated):
            self.current = None
            self.taus_since_prompt = 0
            prompt = TerminatedPrompt(result.value)
        elif isinstance(result, ExecDeadlock):
            self.current = None
            self.taus_since_prompt = 0
            prompt = DeadlockPrompt()
        elif isinstance(result, ExecMenu):
            # re-stabilise to the Vis node itself for stepping
            t = tree
            while not t.is_stable():
                t = t.child()
            self.current = t
            self.taus_since_prompt = 0
            prompt = MenuPrompt(
                entries=tuple((i, e.label) for i, e in enumerate(result.events)),
                events=result.events)
        else:
            assert isinstance(result, ExecTimeout)
            self.current = result.residual
            self.taus_since_prompt = result.taus_consumed
            self.taus_total += result.taus_consumed
            prompt = TauLimitPrompt(result.taus_consumed)
        self.prompt = prompt
        return prompt

    def menu_event(self, choice):
        """Resolve a menu id, label, or event to an enabled event."""
        if not isinstance(self.prompt, MenuPrompt):
            raise SessionError("no menu is being offered")
        events = self.prompt.events
        if isinstance(choice, int):
            if not 0 <= choice < len(events):
                raise RejectedEvent(f"no menu entry {choice}")
            return events[choice]
        if isinstance(choice, str):
            for e in events:
                if e.label == choice:
                    return e
            raise RejectedEvent(f"event {choice!r} is not enabled")
        for e in events:
            if e == choice:
                return e
        raise RejectedEvent(f"event {getattr(choice, 'label', choice)!r} is not enabled")

    def choose(self, choice):
        """Perform one enabled event and advance to the next prompt."""
        event = self.menu_event(choice)
        with state_monitor(self.state):
            cont = self.current.menu.child(event)
        self.trace.append(event)
        return self._advance(cont)

    def continue_taus(self):
        """Grant another tau budget after a TauLimit prompt."""
        if not isinstance(self.prompt, TauLimitPrompt):
            raise SessionError("nothing to continue: the session is not at a tau limit")
        return self._advance(self.current)

    def trace_labels(self) -> list:
        return [e.label for e in self.trace]

    def state_view(self):
        """The latest store snapshot(s) observed while stepping, if any."""
        if not self.state:
            return None
        rendered = {label: {k: _json_value(v) for k, v in store.as_dict().items()}
                    for label, store in self.state.items()}
        if len(rendered) == 1:
            return next(iter(rendered.values()))
        return rendered


def _json_value(v):
    from .state import Store
    if isinstance(v, Store):
        return {k: _json_value(x) for k, x in v.as_dict().items()}
    if isinstance(v, tuple):
        return [_json_value(x) for x in v]
    if isinstance(v, frozenset):
        return sorted((_json_value(x) for x in v), key=repr)
    if isinstance(v, (bool, int, str)) or v is None:
        return v
    return render_value(v)


def builtin_models() -> tuple:
    return BUILTIN_MODELS


def model_text(ref: str) -> str:
    """Model source from a path or a built-in name."""
    if ref in BUILTIN_MODELS:
        return resources.files("itrees.models").joinpath(f"{ref}.itm").read_text()
    with open(ref, "r", encoding="utf-8") as fh:
        return fh.read()


def resolve_model(ref: str, bindings: Optional[dict] = None) -> Model:
    """Load a model from a path or a built-in name.  Binding values are
    canonicalised, so JSON lists work where the model expects sets/lists."""
    if bindings:
        bindings = {k: canonical_value(v) for k, v in bindings.items()}
    return load_model(model_text(ref), bindings)


def session_start(model, target: str, args=(), consts: Optional[dict] = None,
                  tau_budget: int = 20) -> Session:
    """Elaborate a model (path, built-in name, or Model) and start a session
    on the named target."""
    if isinstance(model, Model):
        resolved = model
    else:
        resolved = resolve_model(model, consts)
    values = tuple(canonical_value(a) for a in args)
    return Session(lambda: resolved.itree(target, values),
                   tau_budget=tau_budget,
                   source=(model if isinstance(model, str) else None), target=target)
