"""Declarative abstract machines: a state schema with invariants, an
initialisation, and guarded parametric operations composed as an event loop.

Each operation gets its own channel; an operation event ``Op.v`` is on the
menu exactly when ``v`` lies in the declared parameter sets and the
precondition holds in the current state.  Verification generates one
obligation per operation (plus one for the initialisation) and discharges
them by explicit-state checking.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .combinators import loop, seq
from .core import Channel, Chantype, EventMap, ITree, Ret, Vis
from .csp import extchoice_all
from .state import StateSpace, Store, _record_state, assigns
from .verify import Counterexample, Holds, HoareVerdict, invariant_checks

__all__ = ["ZOperation", "ZMachine", "op_semantics", "machine_semantics",
           "Obligation", "generate_pos", "check_pos", "reachable_states"]


@dataclass
class ZOperation:
    """A guarded, parametric state update.

    ``params`` maps each parameter name to a state-dependent finite set
    expression.  ``precondition`` and ``update`` take the parameter values
    (as positional arguments) and return a predicate / substitution over
    the state.  ``emit`` marks output-only sugar: a single parameter pinned
    to the value of an expression.
    """

    name: str
    params: Sequence[tuple] = ()              # (name, state -> finite iterable)
    precondition: Optional[Callable] = None   # *values -> (state -> bool)
    update: Optional[Callable] = None         # *values -> Subst-like
    emit: bool = False

    def param_names(self) -> tuple:
        return tuple(n for n, _ in self.params)

    def guard(self, values, state) -> bool:
        if self.precondition is None:
            return True
        return self.precondition(*values)(state)

    def apply(self, values, state):
        if self.update is None:
            return state
        return self.update(*values)(state)


@dataclass
class ZMachine:
    """A machine: schema fields, invariants, an initialisation, operations.

    ``invariants`` is a list of (label, predicate) conjuncts; ``init`` is a
    substitution that must assign every schema field.  ``constants`` keeps
    the bindings used to close over abstract constants, for reporting.
    """

    name: str
    fields: Sequence[str]
    invariants: Sequence[tuple]                # (label, state -> bool)
    init: Callable                             # Subst over the schema store
    operations: Sequence[ZOperation]
    constants: dict = field(default_factory=dict)
    space: Optional[StateSpace] = None

    def __post_init__(self):
        names = [op.name for op in self.operations]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate operation names in machine {self.name}")
        self._chantype = Chantype()
        self._channels = {}
        for op in self.operations:
            arity = len(op.params)
            self._channels[op.name] = self._chantype.channel(
                op.name, arity=(0 if arity == 0 else (arity if arity >= 2 else None)))

    def channel(self, op_name: str) -> Channel:
        return self._channels[op_name]

    def invariant(self, state) -> bool:
        return all(pred(state) for _label, pred in self.invariants)

    def failing_invariant(self, state) -> Optional[str]:
        for label, pred in self.invariants:
            if not pred(state):
                return label
        return None

    def empty_store(self) -> Store:
        return Store({f: None for f in self.fields})

    def initial_state(self) -> Store:
        state = self.init(self.empty_store())
        missing = [f for f in self.fields if state.get(f) is None]
        if missing:
            raise ValueError(
                f"init of machine {self.name} leaves fields unassigned: {', '.join(missing)}")
        return state


def _enabled_events(machine: ZMachine, op: ZOperation, state):
    """(event, next-state thunk payload) pairs for one operation."""
    channel = machine.channel(op.name)
    domains = [tuple(dom(state)) for _n, dom in op.params]
    out = []
    for combo in itertools.product(*domains):
        if not op.guard(combo, state):
            continue
        if len(op.params) == 0:
            payload = ()
        elif len(op.params) == 1:
            payload = combo[0]
        else:
            payload = combo
        out.append((channel.build(payload), combo))
    return out


def op_semantics(machine: ZMachine, op: ZOperation) -> Callable:
    """The operation as a program: an input prefix over its channel,
    parameters drawn from their sets, guarded by the precondition, followed
    by the update.  With nothing enabled the behaviour is deadlock."""

    def prog(state):
        entries = []
        for event, combo in _enabled_events(machine, op, state):
            def next_state(combo=combo):
                s2 = op.apply(combo, state)
                _record_state(machine.name, s2)
                return Ret(s2)
            entries.append((event, next_state))
        return Vis(EventMap(entries))

    prog.operation = op
    return prog


def machine_semantics(machine: ZMachine) -> ITree:
    """Initialise, then loop over the choice of all operations."""
    ops = [op_semantics(machine, op) for op in machine.operations]

    def body(state):
        return extchoice_all([op(state) for op in ops])

    program = seq(assigns(machine.init, monitor_label=machine.name), loop(body))
    return program(machine.empty_store())


# ---------------------------------------------------------------------------
# Proof obligations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Obligation:
    name: str
    kind: str        # "establishes" | "preserves"
    program: Callable


def generate_pos(machine: ZMachine) -> tuple:
    """One obligation for the initialisation and one per operation."""
    obligations = [Obligation(f"Init establishes {machine.name}_inv", "establishes",
                              assigns(machine.init))]
    for op in machine.operations:
        obligations.append(Obligation(f"{op.name} preserves {machine.name}_inv", "preserves",
                                      op_semantics(machine, op)))
    return tuple(obligations)


def check_pos(machine: ZMachine, space: Optional[StateSpace] = None,
              budget=None, mode: str = "exhaustive") -> list:
    """Check every obligation; returns (obligation, verdict) pairs.

    Mode "exhaustive" quantifies over all invariant-satisfying states of
    the declared space; mode "reachable" walks the states reachable from
    the initialisation instead.
    """
    from .core import ExplorationBudget
    budget = budget or ExplorationBudget()
    if mode == "reachable":
        return _check_reachable(machine, budget)
    if mode != "exhaustive":
        raise ValueError(f"mode must be 'exhaustive' or 'reachable', got {mode!r}")
    space = space or machine.space
    if space is None:
        raise ValueError(
            f"machine {machine.name} has no declared finite state space; "
            "declare per-field domains or use reachable mode")
    checking = tuple(s for s in space.states() if machine.invariant(s))
    results = []
    for ob in generate_pos(machine):
        if ob.kind == "establishes":
            verdict = invariant_checks("establishes", ob.program, machine.invariant,
                                       space.states(), budget)
        else:
            verdict = invariant_checks("preserves", ob.program, machine.invariant,
                                       checking, budget)
        results.append((ob, _name_failing_conjunct(machine, verdict)))
    return results


def _name_failing_conjunct(machine: ZMachine, verdict: HoareVerdict) -> HoareVerdict:
    if isinstance(verdict, Counterexample) and verdict.final is not None and not verdict.message.startswith(("invariant", "variant")):
        label = machine.failing_invariant(verdict.final)
        if label is not None:
            return Counterexample(verdict.initial, verdict.final, verdict.trace,
                                  verdict.chain, f"invariant conjunct fails: {label}")
    return verdict


def reachable_states(machine: ZMachine, budget=None, limit: int = 100_000) -> tuple:
    """Breadth-first closure of the state graph from the initialisation."""
    init = machine.initial_state()
    seen = {init}
    order = [init]
    frontier = [init]
    while frontier and len(seen) < limit:
        nxt = []
        for s in frontier:
            for op in machine.operations:
                for _event, combo in _enabled_events(machine, op, s):
                    s2 = op.apply(combo, s)
                    if s2 not in seen:
                        seen.add(s2)
                        order.append(s2)
                        nxt.append(s2)
        frontier = nxt
    return tuple(order)


def _check_reachable(machine: ZMachine, budget) -> list:
    """Reachable-mode analogue: init must establish the invariant and every
    operation fired from a reachable state must preserve it."""
    results = []
    init_state = machine.initial_state()
    obligations = generate_pos(machine)
    init_ob = obligations[0]
    if machine.invariant(init_state):
        results.append((init_ob, Holds(1)))
        start_ok = True
    else:
        label = machine.failing_invariant(init_state)
        results.append((init_ob, Counterexample(
            machine.empty_store(), init_state,
            message=f"invariant conjunct fails: {label}")))
        start_ok = False
    states = reachable_states(machine) if start_ok else ()
    for ob, op in zip(obligations[1:], machine.operations):
        verdict: HoareVerdict = Holds(len(states))
        for s in states:
            if not machine.invariant(s):
                continue
            broken = False
            for event, combo in _enabled_events(machine, op, s):
                s2 = op.apply(combo, s)
                if not machine.invariant(s2):
                    label = machine.failing_invariant(s2)
                    verdict = Counterexample(
                        s, s2, trace=(event,),
                        message=f"invariant conjunct fails: {label}")
                    broken = True
                    break
            if broken:
                break
        results.append((ob, verdict))
    return results
