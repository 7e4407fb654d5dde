"""Explicit-state verification: Hoare triples, wp/wlp, invariant checks.

Where a symbolic tool would generate verification conditions, this module
enumerates a declared finite state space and runs every execution found
within budget.  Counterexamples are concrete and replayable: an initial
state, the offending final state, the event trace between them and, for
annotated loops, the chain of loop-head states.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Optional, Union

from .combinators import LoopCheckViolation, loop_checking
from .core import ExplorationBudget
from .semantics import (ExplorationReport, IterationChain, retvals,
                        traced_retvals)

__all__ = [
    "LoopAnnotation", "HoareVerdict", "Holds", "Counterexample", "Inconclusive",
    "hoare_partial", "hoare_total", "weakest_precondition", "invariant_checks",
    "iteration_chains", "DomainEscape", "TRUE",
]


def TRUE(_s) -> bool:
    return True


@dataclass(frozen=True)
class LoopAnnotation:
    """Invariant and optional variant attached to a while loop.

    Semantically vacuous: the loop behaves identically whether or not the
    annotation is present; only verification evaluates it.
    """

    invariant: Optional[Callable] = None
    variant: Optional[Callable] = None


@dataclass(frozen=True)
class Holds:
    states_checked: int


@dataclass(frozen=True)
class Counterexample:
    initial: Any
    final: Any                       # None when no terminating run exists
    trace: tuple = ()
    chain: Optional[IterationChain] = None
    message: str = ""


@dataclass(frozen=True)
class Inconclusive:
    reason: str                      # "fuel" | "space"


HoareVerdict = Union[Holds, Counterexample, Inconclusive]


class DomainEscape(ValueError):
    """A final state left the declared per-field domains."""


def _chain_of(violation: LoopCheckViolation) -> IterationChain:
    return IterationChain(tuple(((), s) for s in violation.heads))


def _check_domains(space, store) -> None:
    checker = getattr(space, "contains_fieldwise", None)
    if checker is None:
        return
    bad = checker(store)
    if bad is not None:
        raise DomainEscape(
            f"field {bad!r} left its declared domain in state {store!r}")


def _check_one_state(prog, s, post, space, budget, mode, require_termination):
    """Run one initial state; returns (counterexample | None, inconclusive?)."""
    with loop_checking(mode):
        nodes, exhaustive = traced_retvals(prog(s), budget)
    terminated = False
    for n in nodes:
        if n.kind == "violation":
            v: LoopCheckViolation = n.value
            return Counterexample(
                initial=s, final=v.state, trace=n.trace, chain=_chain_of(v),
                message=f"{v.kind} check failed: {v.detail}"), False
        if n.kind == "ret":
            terminated = True
            _check_domains(space, n.value)
            if not post(n.value):
                return Counterexample(
                    initial=s, final=n.value, trace=n.trace,
                    message="postcondition does not hold in the final state"), False
    if require_termination and not terminated:
        if exhaustive:
            return Counterexample(
                initial=s, final=None,
                message="no terminating execution from this state"), False
        return None, True
    return None, not exhaustive


def hoare_partial(pre: Callable, prog: Callable, post: Callable,
                  space, budget: ExplorationBudget = ExplorationBudget()) -> HoareVerdict:
    """Partial-correctness triple over a finite space.

    Every terminating execution found from a pre-state must satisfy the
    postcondition; annotated loops additionally have their invariants
    checked at every loop head.  Budget exhaustion anywhere downgrades a
    would-be Holds to Inconclusive.
    """
    return _hoare(pre, prog, post, space, budget, mode="partial",
                  require_termination=False)


def hoare_total(pre: Callable, prog: Callable, post: Callable,
                space, budget: ExplorationBudget = ExplorationBudget()) -> HoareVerdict:
    """Total correctness: the partial triple plus, for every pre-state, at
    least one terminating execution; loop variants must strictly decrease."""
    return _hoare(pre, prog, post, space, budget, mode="total",
                  require_termination=True)


def _hoare(pre, prog, post, space, budget, mode, require_termination) -> HoareVerdict:
    checked = 0
    saw_inconclusive = False
    for s in space:
        if not pre(s):
            continue
        checked += 1
        cex, inconclusive = _check_one_state(
            prog, s, post, space, budget, mode, require_termination)
        if cex is not None:
            return cex
        saw_inconclusive = saw_inconclusive or inconclusive
    if saw_inconclusive:
        return Inconclusive("fuel")
    return Holds(checked)


def weakest_precondition(mode: str, prog: Callable, post: Callable,
                         space, budget: ExplorationBudget = ExplorationBudget()) -> ExplorationReport:
    """The wp ("some final state satisfies post") or wlp ("all final states
    satisfy post") set over the space, with an exhaustiveness flag.

    An inexhaustive exploration can under-approximate wlp and, for states
    with no discovered final state, under-approximate wp.
    """
    if mode not in ("wp", "wlp"):
        raise ValueError(f"mode must be 'wp' or 'wlp', got {mode!r}")
    out = []
    exhaustive = True
    for s in space:
        rep = retvals(prog(s), budget)
        exhaustive = exhaustive and rep.exhaustive
        if mode == "wp":
            if any(post(s2) for s2 in rep.items):
                out.append(s)
        else:
            if all(post(s2) for s2 in rep.items):
                out.append(s)
    return ExplorationReport(tuple(out), exhaustive)


def invariant_checks(kind: str, prog: Callable, invariant: Callable,
                     space, budget: ExplorationBudget = ExplorationBudget()) -> HoareVerdict:
    """``establishes``: {True} prog {inv}; ``preserves``: {inv} prog {inv}.

    Parametric operations arrive here as plain programs whose menus already
    range over every parameter valuation, so exploring the tree checks all
    of them.
    """
    if kind == "establishes":
        return hoare_partial(TRUE, prog, invariant, space, budget)
    if kind == "preserves":
        return hoare_partial(invariant, prog, invariant, space, budget)
    raise ValueError(f"kind must be 'establishes' or 'preserves', got {kind!r}")


# ---------------------------------------------------------------------------
# Iteration chains
# ---------------------------------------------------------------------------

def iteration_chains(loop_prog: Callable, initial, budget: ExplorationBudget = ExplorationBudget(),
                     max_iterations: int = 1000, max_chains: int = 10_000):
    """Enumerate the iteration chains of a while loop from one state.

    ``loop_prog`` must be a loop built by ``while_loop`` (it carries its
    condition and body).  Returns (chain, final_state) for every
    terminating execution found within budget: the chain lists one
    (trace, state) pair per completed iteration, linked by body
    transitions, and the final state fails the loop condition.
    """
    cond = getattr(loop_prog, "loop_cond", None)
    body = getattr(loop_prog, "loop_body", None)
    if cond is None or body is None:
        raise ValueError("iteration chains need a loop built by while_loop")
    results = []
    stack = [(initial, ())]
    while stack and len(results) < max_chains:
        s, steps = stack.pop()
        if not cond(s):
            results.append((IterationChain(steps), s))
            continue
        if len(steps) >= max_iterations:
            continue  # runaway loop; bounded enumeration gives up
        nodes, _exhaustive = traced_retvals(body(s), budget)
        for n in nodes:
            if n.kind == "ret":
                stack.append((n.value, steps + ((n.trace, n.value),)))
    return results
