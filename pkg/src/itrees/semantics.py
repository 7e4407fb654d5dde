"""Bounded operational and denotational semantics.

Everything here is a breadth-first exploration of a tree under an
:class:`~itrees.core.ExplorationBudget`: big-step transitions, return
values, the traces/failures/divergences sets, divergence freedom, weak
bisimulation, and the relational (predicative) reading of stateful
programs.  All queries are semi-decidable, so results carry an
``exhaustive`` flag or come as three-valued verdicts.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Any, Callable, Optional

from .combinators import LoopCheckViolation
from .core import (ExplorationBudget, ITree, Ret, Sil,
                   Equivalent, Distinguished, Inconclusive as BisimInconclusive,
                   _menu_diff, render_value)

__all__ = [
    "Tick", "TICK", "Failure", "ExplorationReport", "IterationChain",
    "transitions", "retvals", "traced_retvals",
    "FdReport", "fd_semantics", "straces", "failures", "divergences",
    "Holds", "PossiblyDivergent", "Inconclusive", "div_free",
    "weak_bisim", "RelationReport", "psem", "rel", "RelationSpec",
    "Refines", "RefinementCounterexample", "refines", "AlphabetError",
]


# ---------------------------------------------------------------------------
# Ticked events and failures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Tick:
    """Termination observation; ``Tick(v)`` ends a trace with value v.

    The bare marker ``TICK`` (= ``Tick(None)``) appears in refusal sets and
    means "termination refused".
    """

    value: Any = None

    @property
    def label(self) -> str:
        if self.value is None:
            return "tick"
        return f"tick({render_value(self.value)})"

    def __repr__(self):
        return self.label


TICK = Tick()


@dataclass(frozen=True)
class Failure:
    """A trace plus the maximal refusal after it; subset closure implicit."""

    trace: tuple
    refusal: frozenset

    def covers(self, trace, refused) -> bool:
        return tuple(trace) == self.trace and set(refused) <= self.refusal


@dataclass(frozen=True)
class ExplorationReport:
    """A bounded set-valued answer.

    ``exhaustive`` means the exploration closed with budget to spare;
    ``frontier`` counts the nodes left unresolved when it did not.
    """

    items: tuple
    exhaustive: bool
    frontier: int = 0


@dataclass(frozen=True)
class IterationChain:
    """Per-iteration (trace, state) records explaining a loop execution."""

    steps: tuple

    def states(self) -> tuple:
        return tuple(s for _tr, s in self.steps)


# ---------------------------------------------------------------------------
# The exploration engine
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Node:
    trace: tuple
    kind: str                    # ret | menu | deadlock | diverged | violation
    value: Any = None            # Ret payload / LoopCheckViolation
    residual: Optional[ITree] = None
    taus: int = 0


def _stabilise(tree: ITree, fuel: int):
    taus = 0
    while isinstance(tree, Sil) and taus < fuel:
        tree = tree.child()
        taus += 1
    return tree, taus


def _explore(tree: ITree, budget: ExplorationBudget, dedup_states: bool = False):
    """BFS over visible events.  Returns (nodes, truncated_count).

    ``dedup_states`` stops re-expanding a stable node already seen (by
    identity), which lets finite-graph systems close even though their
    unfoldings are infinite.
    """
    nodes: list[_Node] = []
    queue: deque = deque()
    queue.append(((), lambda: tree))
    seen: set[int] = set()
    truncated = 0
    popped = 0
    while queue:
        trace, supplier = queue.popleft()
        popped += 1
        if popped > budget.max_nodes:
            truncated += 1 + len(queue)
            break
        try:
            t = supplier()
            stable, taus = _stabilise(t, budget.tau_fuel)
        except LoopCheckViolation as violation:
            nodes.append(_Node(trace, "violation", value=violation))
            continue
        if isinstance(stable, Sil):
            nodes.append(_Node(trace, "diverged", residual=stable, taus=taus))
            continue
        if isinstance(stable, Ret):
            nodes.append(_Node(trace, "ret", value=stable.value, residual=stable, taus=taus))
            continue
        menu = stable.menu
        if len(menu) == 0:
            nodes.append(_Node(trace, "deadlock", residual=stable, taus=taus))
            continue
        nodes.append(_Node(trace, "menu", residual=stable, taus=taus))
        if dedup_states:
            key = id(stable)
            if key in seen:
                continue
            seen.add(key)
        if len(trace) >= budget.max_trace_len:
            truncated += 1
            continue
        for e in menu.sorted_events():
            cell = menu.cell(e)
            queue.append((trace + (e,), cell.force))
    return nodes, truncated


# ---------------------------------------------------------------------------
# Transitions and return values
# ---------------------------------------------------------------------------

def transitions(tree: ITree, budget: ExplorationBudget = ExplorationBudget()) -> ExplorationReport:
    """Big-step reachability: every (trace, stabilised residual) pair found
    within budget, including the empty trace."""
    nodes, truncated = _explore(tree, budget)
    items = []
    diverged = 0
    for n in nodes:
        if n.kind == "diverged":
            diverged += 1
            items.append((n.trace, n.residual))
        elif n.kind != "violation":
            items.append((n.trace, n.residual))
    return ExplorationReport(tuple(items),
                             exhaustive=(truncated == 0 and diverged == 0),
                             frontier=truncated + diverged)


def retvals(tree: ITree, budget: ExplorationBudget = ExplorationBudget()) -> ExplorationReport:
    """All values the tree can terminate with, within budget."""
    nodes, truncated = _explore(tree, budget)
    out = []
    seen = set()
    diverged = 0
    for n in nodes:
        if n.kind == "ret" and n.value not in seen:
            seen.add(n.value)
            out.append(n.value)
        elif n.kind == "diverged":
            diverged += 1
    return ExplorationReport(tuple(out),
                             exhaustive=(truncated == 0 and diverged == 0),
                             frontier=truncated + diverged)


def traced_retvals(tree: ITree, budget: ExplorationBudget = ExplorationBudget()):
    """Raw exploration nodes for callers that need traces, terminations and
    annotation violations together (the Hoare checker does)."""
    nodes, truncated = _explore(tree, budget)
    diverged = sum(1 for n in nodes if n.kind == "diverged")
    return nodes, (truncated == 0 and diverged == 0)


# ---------------------------------------------------------------------------
# Traces, failures, divergences
# ---------------------------------------------------------------------------

class AlphabetError(ValueError):
    """An explored event fell outside the declared alphabet."""


@dataclass(frozen=True)
class FdReport:
    traces: tuple
    failures: tuple
    divergences: tuple
    exhaustive: bool

    def has_failure(self, trace, refused) -> bool:
        trace = tuple(trace)
        return any(f.covers(trace, refused) for f in self.failures)

    def has_trace(self, trace) -> bool:
        return tuple(trace) in set(self.traces)

    def has_divergence(self, trace) -> bool:
        return tuple(trace) in set(self.divergences)


def fd_semantics(tree: ITree, alphabet=None, budget: ExplorationBudget = ExplorationBudget()) -> FdReport:
    """Compute bounded traces, failures and divergences in one pass.

    Refusals are reported as the unique maximal refusal of each stable
    residual (with ``TICK`` standing for refused termination); divergences
    are fuel-exhaustion traces, extension-closed up to the trace budget.
    With ``alphabet=None`` the alphabet is inferred as every event the
    bounded exploration encounters.
    """
    nodes, truncated = _explore(tree, budget)
    if alphabet is None:
        seen_events = set()
        for n in nodes:
            seen_events.update(n.trace)
            if n.kind == "menu":
                seen_events.update(n.residual.menu.events())
        alphabet = tuple(sorted(seen_events))
    alphabet = tuple(alphabet)
    alpha_set = set(alphabet)
    for n in nodes:
        for e in n.trace:
            if e not in alpha_set:
                raise AlphabetError(f"event {e.label} outside declared alphabet")
        if n.kind == "menu":
            for e in n.residual.menu.events():
                if e not in alpha_set:
                    raise AlphabetError(f"event {e.label} outside declared alphabet")
    traces = []
    trace_seen = set()

    def add_trace(tr):
        if tr not in trace_seen:
            trace_seen.add(tr)
            traces.append(tr)

    fails = []
    divs = []
    div_seen = set()
    diverged = 0
    for n in nodes:
        add_trace(n.trace)
        if n.kind in ("menu", "deadlock"):
            enabled = set(n.residual.menu.events()) if n.kind == "menu" else set()
            refusal = frozenset(e for e in alphabet if e not in enabled) | {TICK}
            fails.append(Failure(n.trace, refusal))
        elif n.kind == "ret":
            fails.append(Failure(n.trace, frozenset(alphabet)))
            ticked = n.trace + (Tick(n.value),)
            add_trace(ticked)
            fails.append(Failure(ticked, frozenset(alphabet) | {TICK}))
        elif n.kind == "diverged":
            diverged += 1
            if n.trace not in div_seen:
                div_seen.add(n.trace)
                divs.append(n.trace)

    # Divergences are extension-closed: once divergence is reachable, every
    # continuation of the trace is divergent too.  Materialisation respects
    # the node budget; overflowing it only flips the exhaustive flag.
    closed = list(divs)
    frontier = list(divs)
    closure_capped = False
    while frontier:
        if len(closed) >= budget.max_nodes:
            closure_capped = True
            break
        tr = frontier.pop()
        if len(tr) >= budget.max_trace_len:
            continue
        for e in alphabet:
            ext = tr + (e,)
            if ext not in div_seen:
                div_seen.add(ext)
                closed.append(ext)
                frontier.append(ext)
    exhaustive = truncated == 0 and diverged == 0 and not closure_capped
    return FdReport(tuple(traces), tuple(fails), tuple(sorted(closed, key=len)), exhaustive)


def straces(tree, alphabet, budget=ExplorationBudget()) -> ExplorationReport:
    rep = fd_semantics(tree, alphabet, budget)
    return ExplorationReport(rep.traces, rep.exhaustive)


def failures(tree, alphabet, budget=ExplorationBudget()) -> ExplorationReport:
    rep = fd_semantics(tree, alphabet, budget)
    return ExplorationReport(rep.failures, rep.exhaustive)


def divergences(tree, alphabet, budget=ExplorationBudget()) -> ExplorationReport:
    rep = fd_semantics(tree, alphabet, budget)
    return ExplorationReport(rep.divergences, rep.exhaustive)


# ---------------------------------------------------------------------------
# Divergence freedom
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Holds:
    nodes_checked: int = 0


@dataclass(frozen=True)
class PossiblyDivergent:
    witness: tuple


@dataclass(frozen=True)
class Inconclusive:
    reason: str


def div_free(tree: ITree, budget: ExplorationBudget = ExplorationBudget()):
    """Check that every reachable node stabilises.

    Stable nodes are deduplicated by identity, so systems that tie the
    recursive knot (event loops and the like) close after finitely many
    nodes and earn a definite ``Holds``.
    """
    nodes, truncated = _explore(tree, budget, dedup_states=True)
    for n in nodes:
        if n.kind == "diverged":
            return PossiblyDivergent(n.trace)
    if truncated:
        return Inconclusive("node or trace budget exhausted")
    return Holds(len(nodes))


# ---------------------------------------------------------------------------
# Weak bisimulation
# ---------------------------------------------------------------------------

def weak_bisim(p: ITree, q: ITree, budget: ExplorationBudget = ExplorationBudget()):
    """Compare post-stabilisation structure, skipping finite tau chains.

    Returns the same verdict shapes as :func:`~itrees.core.bounded_bisim`:
    Equivalent is a bounded claim up to ``max_trace_len`` visible steps;
    Inconclusive means some node failed to stabilise within ``tau_fuel``
    before any mismatch was found.  Pairs are deduplicated by identity so
    recursive processes can close early.
    """
    queue = deque([(p, q, ())])
    seen = set()
    exhausted = False
    while queue:
        a, b, trace = queue.popleft()
        sa, _ = _stabilise(a, budget.tau_fuel)
        sb, _ = _stabilise(b, budget.tau_fuel)
        if isinstance(sa, Sil) or isinstance(sb, Sil):
            # at least one side would not stabilise within fuel
            exhausted = True
            continue
        if isinstance(sa, Ret) and isinstance(sb, Ret):
            if sa.value != sb.value:
                return Distinguished(trace, f"returns differ: "
                                     f"{render_value(sa.value)} vs {render_value(sb.value)}")
            continue
        if isinstance(sa, Ret) or isinstance(sb, Ret):
            return Distinguished(trace, f"{type(sa).__name__} vs {type(sb).__name__}")
        fa, fb = sa.menu, sb.menu
        if set(fa.events()) != set(fb.events()):
            return Distinguished(trace, _menu_diff(fa, fb))
        key = (id(sa), id(sb))
        if key in seen:
            continue
        seen.add(key)
        if len(trace) >= budget.max_trace_len:
            continue
        for e in fa.sorted_events():
            queue.append((fa.child(e), fb.child(e), trace + (e,)))
    if exhausted:
        return BisimInconclusive((budget.max_trace_len, budget.tau_fuel))
    return Equivalent(budget.max_trace_len)


# ---------------------------------------------------------------------------
# Predicative semantics and refinement
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RelationReport:
    """An explored initial/final-state relation."""

    pairs: tuple
    exhaustive: bool

    def pair_set(self) -> frozenset:
        return frozenset(self.pairs)


def psem(prog: Callable, space, budget: ExplorationBudget = ExplorationBudget()) -> RelationReport:
    """The program as a relation: all (s, s') with s' a reachable final
    state of ``prog(s)``, over a finite state space."""
    pairs = []
    exhaustive = True
    for s in space:
        rep = retvals(prog(s), budget)
        exhaustive = exhaustive and rep.exhaustive
        for s2 in rep.items:
            pairs.append((s, s2))
    return RelationReport(tuple(pairs), exhaustive)


@dataclass(frozen=True)
class RelationSpec:
    """A specification given directly as a predicate over (s, s')."""

    predicate: Callable

    def __call__(self, s, s2):
        return self.predicate(s, s2)


def rel(predicate: Callable) -> RelationSpec:
    return RelationSpec(predicate)


@dataclass(frozen=True)
class Refines:
    pairs_checked: int


@dataclass(frozen=True)
class RefinementCounterexample:
    initial: Any
    final: Any


def refines(spec, impl: Callable, space, budget: ExplorationBudget = ExplorationBudget()):
    """Check that ``impl`` only exhibits behaviours the spec allows.

    The spec is either another program or a :class:`RelationSpec`.  Holds
    requires the implementation's relation to be exhaustively explored (and
    likewise the spec's, when the spec is a program); otherwise the answer
    is inconclusive.
    """
    impl_rep = psem(impl, space, budget)
    if not impl_rep.exhaustive:
        return Inconclusive("implementation exploration not exhaustive")
    if isinstance(spec, RelationSpec):
        allowed = spec
    else:
        spec_rep = psem(spec, space, budget)
        if not spec_rep.exhaustive:
            return Inconclusive("specification exploration not exhaustive")
        allowed_set = spec_rep.pair_set()
        allowed = RelationSpec(lambda s, s2: (s, s2) in allowed_set)
    for s, s2 in impl_rep.pairs:
        if not allowed(s, s2):
            return RefinementCounterexample(s, s2)
    return Refines(len(impl_rep.pairs))
