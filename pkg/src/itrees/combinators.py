"""Tree combinators: bind, sequencing, iteration, and bounded execution.

``bind`` grafts a continuation onto every terminating leaf of a tree and is
the workhorse behind sequential composition.  ``while_loop`` is the guarded
iteration form: each round contributes exactly one internal step, which
keeps infinite loop values productive and makes the iteration count
observable as a tau count.
"""

from __future__ import annotations

import contextlib
import contextvars
from dataclasses import dataclass
from typing import Any, Callable, Optional, Union

from .core import (ExplorationBudget, ITree, Ret, Sil, Vis, stop)

__all__ = [
    "bind", "kcomp", "seq", "while_loop", "loop", "iterate",
    "diverge", "run", "skip", "un_sils",
    "execute", "ExecResult", "Terminated", "Deadlock", "Menu", "Timeout",
    "loop_checking", "LoopCheckViolation", "DEFAULT_EXECUTE_BUDGET",
]


def bind(tree: ITree, cont: Callable[[Any], ITree]) -> ITree:
    """Run ``tree``; upon termination with value v, continue as ``cont(v)``.

    Internal steps and menus pass through unchanged, with the bind pushed
    lazily into every child.
    """
    if isinstance(tree, Ret):
        return cont(tree.value)
    if isinstance(tree, Sil):
        return Sil(lambda: bind(tree.child(), cont))
    return Vis(tree.menu.map_tree(lambda t: bind(t, cont)))


def kcomp(first: Callable, second: Callable) -> Callable:
    """Kleisli composition: feed each result of ``first`` into ``second``."""
    return lambda x: bind(first(x), second)


def seq(*stages: Callable) -> Callable:
    """Sequential composition of continuation functions.

    Folded as a balanced tree (composition is associative), so demanding a
    long straight-line program costs logarithmic, not linear, call depth.
    """
    items = list(stages)
    if not items:
        return Ret
    while len(items) > 1:
        paired = [kcomp(items[i], items[i + 1])
                  for i in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            paired.append(items[-1])
        items = paired
    return items[0]


def skip() -> ITree:
    """Terminate immediately with the unit value."""
    return Ret(())


# ---------------------------------------------------------------------------
# Loop annotation checking
# ---------------------------------------------------------------------------
#
# Loop annotations are semantically vacuous: a plain demand of the tree
# never evaluates them.  Verification enables them through a context
# variable, at which point a failing invariant or a non-decreasing variant
# raises LoopCheckViolation out of the demand, carrying the states seen at
# the loop heads so far.

_loop_checks: contextvars.ContextVar = contextvars.ContextVar("loop_checks", default=None)


class LoopCheckViolation(Exception):
    """Raised during a demand when an enabled annotation check fails."""

    def __init__(self, kind: str, state, heads: tuple, detail: str = ""):
        self.kind = kind          # "invariant" | "variant"
        self.state = state
        self.heads = heads        # states observed at loop heads, in order
        self.detail = detail
        super().__init__(detail or kind)


@contextlib.contextmanager
def loop_checking(mode: str):
    """Enable annotation checks: mode "partial" (invariants) or "total"
    (invariants and variants)."""
    if mode not in ("partial", "total"):
        raise ValueError(f"unknown loop-checking mode {mode!r}")
    token = _loop_checks.set(mode)
    try:
        yield
    finally:
        _loop_checks.reset(token)


def while_loop(cond: Callable[[Any], bool], body: Callable[[Any], ITree],
               annotation=None) -> Callable[[Any], ITree]:
    """Iterate ``body`` while ``cond`` holds; one internal step per round.

    ``annotation``, when given, is an object with ``invariant`` and optional
    ``variant`` attributes (state -> bool / state -> nat).  Checks only fire
    inside a :func:`loop_checking` context.
    """

    def step(s, heads, prev_variant):
        mode = _loop_checks.get() if annotation is not None else None
        if mode is not None and annotation.invariant is not None:
            if not annotation.invariant(s):
                raise LoopCheckViolation(
                    "invariant", s, heads + (s,), "loop invariant does not hold")
        if cond(s):
            variant = None
            if mode == "total" and annotation is not None and annotation.variant is not None:
                variant = annotation.variant(s)
                if not isinstance(variant, int) or isinstance(variant, bool) or variant < 0:
                    raise LoopCheckViolation(
                        "variant", s, heads + (s,),
                        f"loop variant must be a natural number, got {variant!r}")
                if prev_variant is not None and variant >= prev_variant:
                    raise LoopCheckViolation(
                        "variant", s, heads + (s,),
                        f"loop variant did not decrease: {prev_variant} -> {variant}")
            # head states are only kept while checks can consume them,
            # so plain animation of long loops stays linear
            new_heads = heads + (s,) if mode is not None else ()
            return Sil(lambda: bind(body(s), lambda s2: step(s2, new_heads, variant)))
        return Ret(s)

    def htree(s):
        return step(s, (), None)

    htree.loop_cond = cond
    htree.loop_body = body
    htree.loop_annotation = annotation
    return htree


def loop(body: Callable[[Any], ITree]) -> Callable[[Any], ITree]:
    """Iterate ``body`` forever (a while-loop whose condition never fails)."""
    return while_loop(lambda _s: True, body)


def iterate(tree: ITree) -> ITree:
    """Repeat a unit-state tree forever."""
    return loop(lambda _s: tree)(())


_DIVERGE: Optional[Sil] = None


def diverge() -> ITree:
    """The tree that only ever takes internal steps."""
    global _DIVERGE
    if _DIVERGE is None:
        _DIVERGE = Sil(lambda: _DIVERGE)
    return _DIVERGE


def run(events) -> ITree:
    """Offer every event in ``events`` forever; ``run(()) `` deadlocks."""
    events = tuple(events)
    if not events:
        return stop()
    tree: list[ITree] = []
    menu = [(e, (lambda: tree[0])) for e in events]
    tree.append(Vis(menu))
    return tree[0]


def un_sils(n: int, tree: ITree) -> ITree:
    """Strip up to ``n`` leading internal steps, stopping early if the tree
    stabilises."""
    if n < 0:
        raise ValueError("n must be non-negative")
    while n > 0 and isinstance(tree, Sil):
        tree = tree.child()
        n -= 1
    return tree


# ---------------------------------------------------------------------------
# Non-interactive execution
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Terminated:
    value: Any


@dataclass(frozen=True)
class Deadlock:
    pass


@dataclass(frozen=True)
class Menu:
    events: tuple  # sorted, non-empty


@dataclass(frozen=True)
class Timeout:
    residual: ITree
    taus_consumed: int


ExecResult = Union[Terminated, Deadlock, Menu, Timeout]

# Interactive prompts default to 20 taus; unattended execution gets a much
# larger allowance since nobody is waiting at a menu.
DEFAULT_EXECUTE_BUDGET = ExplorationBudget(tau_fuel=10_000)


def execute(tree: ITree, budget: ExplorationBudget = DEFAULT_EXECUTE_BUDGET) -> ExecResult:
    """Strip internal steps and classify the first stable node.

    A ``Timeout`` result is resumable: running ``execute`` again on its
    residual continues the same internal chain.
    """
    taus = 0
    while isinstance(tree, Sil):
        if taus >= budget.tau_fuel:
            return Timeout(tree, taus)
        tree = tree.child()
        taus += 1
    if isinstance(tree, Ret):
        return Terminated(tree.value)
    if len(tree.menu) == 0:
        return Deadlock()
    return Menu(tree.menu.sorted_events())
