"""Deterministic CSP operators over interaction trees.

External choice, generalised parallel, and hiding all follow a maximal
progress discipline: internal steps are consumed before visible events are
offered.  Overlapping unsynchronised events are dropped rather than biased,
which keeps choice and parallel commutative.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable, Union

from .combinators import bind
from .core import (Channel, Event, EventMap, ITree, Prism, Ret, Sil, Vis,
                   prism_lift, stop)

__all__ = [
    "inp", "outp", "sync", "guard",
    "extchoice", "extchoice_all",
    "EventSet", "MergeTag", "Left", "Right", "Both", "merge_maps",
    "gpar", "par", "interleave", "interleave_all", "hide", "hide_seq",
]


# ---------------------------------------------------------------------------
# Basic constructs
# ---------------------------------------------------------------------------

def inp(channel: Prism, values: Iterable) -> ITree:
    """Accept any listed value on ``channel`` and return it.

    ``inp(c, ())`` offers nothing, i.e. deadlocks.
    """
    return Vis(prism_lift(channel, values, lambda v: Ret(v)))


def outp(channel: Prism, value) -> ITree:
    """Offer the single event ``channel.value`` and return unit."""
    return Vis(EventMap([(channel.build(value), Ret(()))]))


def sync(channel: Prism) -> ITree:
    """A bare synchronisation on a unit-valued channel."""
    return outp(channel, ())


def guard(cond: bool) -> ITree:
    """Terminate when the condition holds, deadlock otherwise."""
    return Ret(()) if cond else stop()


# ---------------------------------------------------------------------------
# External choice
# ---------------------------------------------------------------------------

def _choice_merge(f: EventMap, g: EventMap) -> EventMap:
    # Events enabled on both sides are excluded from the combined menu,
    # which is what keeps the operator commutative.
    return f.restrict(g, keep=False).override(g.restrict(f, keep=False))


def extchoice(p: ITree, q: ITree) -> ITree:
    """Environment-resolved choice between two trees.

    Internal steps are consumed first (left side first), termination beats
    a menu, two menus combine with shared events dropped, and two
    terminations agree or deadlock.
    """
    if isinstance(p, Sil):
        return Sil(lambda: extchoice(p.child(), q))
    if isinstance(q, Sil):
        return Sil(lambda: extchoice(p, q.child()))
    if isinstance(p, Ret) and isinstance(q, Ret):
        return p if p.value == q.value else stop()
    if isinstance(p, Ret):
        return p
    if isinstance(q, Ret):
        return q
    return Vis(_choice_merge(p.menu, q.menu))


def extchoice_all(trees: Iterable[ITree]) -> ITree:
    """Fold external choice over a sequence; empty input deadlocks.

    Folded as a balanced tree so wide choices stay shallow.
    """
    items = list(trees)
    if not items:
        return stop()
    while len(items) > 1:
        paired = []
        for i in range(0, len(items) - 1, 2):
            paired.append(extchoice(items[i], items[i + 1]))
        if len(items) % 2:
            paired.append(items[-1])
        items = paired
    return items[0]


# ---------------------------------------------------------------------------
# Event sets (synchronisation and hiding)
# ---------------------------------------------------------------------------

class EventSet:
    """A set of events given extensionally, by channel, or both.

    Membership is what matters operationally; channel-based sets stand for
    every event the channel can carry.
    """

    __slots__ = ("channels", "events")

    def __init__(self, channels: Iterable[Channel] = (), events: Iterable[Event] = ()):
        self.channels = frozenset(id(c) for c in channels)
        self.events = frozenset(events)

    def __contains__(self, event) -> bool:
        return event in self.events or id(event.channel) in self.channels

    @staticmethod
    def of(*items) -> "EventSet":
        chans = [x for x in items if isinstance(x, Channel)]
        evs = [x for x in items if isinstance(x, Event)]
        return EventSet(chans, evs)


EMPTY_EVENTS = EventSet()


def _as_event_set(s) -> EventSet:
    if isinstance(s, EventSet):
        return s
    return EventSet.of(*s)


# ---------------------------------------------------------------------------
# Parallel composition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Left:
    cont: Any


@dataclass(frozen=True)
class Right:
    cont: Any


@dataclass(frozen=True)
class Both:
    left: Any
    right: Any


MergeTag = Union[Left, Right, Both]


def merge_maps(sync_set, f: EventMap, g: EventMap) -> list:
    """Tag each event of two menus by which side(s) may take it.

    Returns ordered (event, tag) pairs: events private to one side and
    outside the synchronisation set move alone; synchronised shared events
    move together; shared unsynchronised events are excluded.
    """
    sync_set = _as_event_set(sync_set)
    out = []
    for e in f.events():
        if e in sync_set:
            if e in g:
                out.append((e, Both(f.cell(e), g.cell(e))))
        elif e not in g:
            out.append((e, Left(f.cell(e))))
    for e in g.events():
        if e not in sync_set and e not in f:
            out.append((e, Right(g.cell(e))))
    return out


def gpar(p: ITree, sync_set, q: ITree) -> ITree:
    """Generalised parallel: synchronise on ``sync_set``, interleave the
    rest, and pair up the final values.

    Internal steps happen independently with priority (left first); a
    finished side keeps its value and lets the other continue.
    """
    sync_set = _as_event_set(sync_set)
    if isinstance(p, Sil):
        return Sil(lambda: gpar(p.child(), sync_set, q))
    if isinstance(q, Sil):
        return Sil(lambda: gpar(p, sync_set, q.child()))
    if isinstance(p, Ret) and isinstance(q, Ret):
        return Ret((p.value, q.value))
    if isinstance(p, Ret):
        return Vis(q.menu.map_tree(lambda t: gpar(p, sync_set, t)))
    if isinstance(q, Ret):
        return Vis(p.menu.map_tree(lambda t: gpar(t, sync_set, q)))
    entries = []
    for e, tag in merge_maps(sync_set, p.menu, q.menu):
        if isinstance(tag, Left):
            cell = tag.cont
            entries.append((e, lambda cell=cell: gpar(cell.force(), sync_set, q)))
        elif isinstance(tag, Right):
            cell = tag.cont
            entries.append((e, lambda cell=cell: gpar(p, sync_set, cell.force())))
        else:
            lc, rc = tag.left, tag.right
            entries.append((e, lambda lc=lc, rc=rc: gpar(lc.force(), sync_set, rc.force())))
    return Vis(EventMap(entries))


def par(p: ITree, sync_set, q: ITree) -> ITree:
    """Parallel composition of unit-valued processes; results discarded."""
    return bind(gpar(p, sync_set, q), lambda _pair: Ret(()))


def interleave(p: ITree, q: ITree) -> ITree:
    """Parallel with no synchronisation at all."""
    return par(p, EMPTY_EVENTS, q)


def interleave_all(trees: Iterable[ITree]) -> ITree:
    """Interleave a family of processes, folded as a balanced tree so a
    network of hundreds of components stays cheap to step."""
    items = list(trees)
    if not items:
        return Ret(())
    while len(items) > 1:
        paired = []
        for i in range(0, len(items) - 1, 2):
            paired.append(interleave(items[i], items[i + 1]))
        if len(items) % 2:
            paired.append(items[-1])
        items = paired
    return items[0]


# ---------------------------------------------------------------------------
# Hiding
# ---------------------------------------------------------------------------

def hide(p: ITree, hidden) -> ITree:
    """Internalise events in ``hidden``.

    At a menu, exactly one enabled hidden event fires silently with
    priority over the remaining visible events; none leaves the menu
    visible (with hiding pushed inside); two or more deadlock.
    """
    hidden = _as_event_set(hidden)
    if isinstance(p, Ret):
        return p
    if isinstance(p, Sil):
        return Sil(lambda: hide(p.child(), hidden))
    enabled = [e for e in p.menu.events() if e in hidden]
    if len(enabled) == 1:
        cell = p.menu.cell(enabled[0])
        return Sil(lambda: hide(cell.force(), hidden))
    if not enabled:
        return Vis(p.menu.map_tree(lambda t: hide(t, hidden)))
    return stop()


def hide_seq(p: ITree, ordered_events) -> ITree:
    """Hide events one at a time, in the given priority order, so that
    simultaneously enabled hidden events resolve instead of deadlocking."""
    for item in ordered_events:
        single = item if isinstance(item, EventSet) else EventSet.of(item)
        p = hide(p, single)
    return p
