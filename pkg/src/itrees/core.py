"""Core interaction-tree values: lazy trees, finite event menus, channels.

A tree has exactly one of three shapes: ``Ret(v)`` terminates with a value,
``Sil(t)`` performs one internal (tau) step and continues as ``t``, and
``Vis(menu)`` waits for the environment to pick one of finitely many events.
Children are deferred computations, so infinite trees (spinners, event
loops) are ordinary values; demanding a child is pure and idempotent.

Tree equality is never structural.  All equational laws are checked with
:func:`bounded_bisim`, which compares two trees constructor-by-constructor
down to a depth/fuel budget and returns a three-valued verdict.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Union

__all__ = [
    "ITree", "Ret", "Sil", "Vis", "stop", "vis",
    "EventMap", "Event", "Prism", "Channel", "Chantype", "prism_lift",
    "ExplorationBudget",
    "BisimVerdict", "Equivalent", "Distinguished", "Inconclusive",
    "bounded_bisim", "render_value", "value_order_key",
]


# ---------------------------------------------------------------------------
# Payload values
# ---------------------------------------------------------------------------
#
# Event payloads and store values are plain Python data: ints, bools,
# strings, the unit value () and tuples (which stand in for lists, keeping
# everything hashable).  They need a total order so that menus can be
# presented deterministically.

def value_order_key(v):
    """Total-order key covering the payload values the workbench uses."""
    if isinstance(v, bool):
        return (0, int(v))
    if isinstance(v, int):
        return (0, v)
    if isinstance(v, tuple):
        return (1, len(v), tuple(value_order_key(x) for x in v))
    if isinstance(v, str):
        return (2, v)
    return (3, repr(v))


def canonical_value(v):
    """Normalise externally supplied data (e.g. JSON) to payload values:
    lists become tuples, recursively."""
    if isinstance(v, (list, tuple)):
        return tuple(canonical_value(x) for x in v)
    if isinstance(v, (set, frozenset)):
        return frozenset(canonical_value(x) for x in v)
    return v


def render_value(v) -> str:
    """Human-readable rendering: tuples print as lists, bools lowercase."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return "[" + ", ".join(render_value(x) for x in v) + "]"
    if isinstance(v, frozenset):
        return "{" + ", ".join(sorted(render_value(x) for x in v)) + "}"
    return str(v)


# ---------------------------------------------------------------------------
# Channels, events, prisms
# ---------------------------------------------------------------------------

class Prism:
    """A constructor/destructor pair embedding values into an event type.

    ``build`` is total on the value type; ``match`` inverts it and returns
    None for events that belong to a different constructor.
    """

    def build(self, value):
        raise NotImplementedError

    def match(self, event):
        raise NotImplementedError


class Event:
    """A concrete event: a channel plus a payload value.

    Ordered by channel declaration order, then payload order, which fixes a
    deterministic presentation for menus.
    """

    __slots__ = ("channel", "value", "_key")

    def __init__(self, channel: "Channel", value):
        self.channel = channel
        self.value = value
        self._key = (channel.index, channel.name, value_order_key(value))

    def __eq__(self, other):
        return (isinstance(other, Event)
                and self.channel is other.channel
                and self.value == other.value)

    def __hash__(self):
        return hash((id(self.channel), self.value))

    def __lt__(self, other):
        return self._key < other._key

    def __le__(self, other):
        return self._key <= other._key

    @property
    def label(self) -> str:
        return self.channel.label(self.value)

    def __repr__(self):
        return self.label

    def to_json(self):
        return self.label


class Channel(Prism):
    """A named channel within an alphabet; a prism into :class:`Event`.

    ``arity`` controls payload rendering: 0 for bare synchronisation events
    (payload ()), None for a single value, n >= 2 for dotted tuples.
    ``domain``, when given, is the finite ordered set of payload values the
    channel can carry (used to enumerate input menus).
    """

    __slots__ = ("name", "index", "domain", "arity")

    def __init__(self, name: str, index: int = 0, domain=None, arity=None):
        self.name = name
        self.index = index
        self.domain = tuple(domain) if domain is not None else None
        self.arity = arity

    def build(self, value=()) -> Event:
        return Event(self, value)

    def match(self, event):
        if isinstance(event, Event) and event.channel is self:
            return event.value
        return None

    def label(self, value) -> str:
        if self.arity == 0:
            return self.name
        if self.arity and self.arity >= 2:
            return self.name + "." + ".".join(render_value(c) for c in value)
        return f"{self.name}.{render_value(value)}"

    def __repr__(self):
        return f"Channel({self.name})"


class Chantype:
    """A declared alphabet: an ordered family of channels.

    Declaration order fixes the total order on events, so menus render the
    same way in every run.
    """

    def __init__(self):
        self._channels: list[Channel] = []
        self._by_name: dict[str, Channel] = {}

    def channel(self, name: str, domain=None, arity=None) -> Channel:
        if name in self._by_name:
            raise ValueError(f"duplicate channel {name!r}")
        ch = Channel(name, index=len(self._channels), domain=domain, arity=arity)
        self._channels.append(ch)
        self._by_name[name] = ch
        return ch

    def __getitem__(self, name: str) -> Channel:
        return self._by_name[name]

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def channels(self) -> tuple:
        return tuple(self._channels)

    def events(self) -> tuple:
        """All events of channels with declared finite domains."""
        out = []
        for ch in self._channels:
            if ch.domain is None:
                raise ValueError(f"channel {ch.name} has no finite domain")
            out.extend(ch.build(v) for v in ch.domain)
        return tuple(out)


# ---------------------------------------------------------------------------
# Deferred children
# ---------------------------------------------------------------------------

class _Cell:
    """A memoised deferred tree.  Demanding is pure, so the unlocked
    memo write is a benign race; at worst a thunk runs twice."""

    __slots__ = ("_thunk", "_tree")

    def __init__(self, src):
        if isinstance(src, ITree):
            self._tree = src
            self._thunk = None
        elif callable(src):
            self._tree = None
            self._thunk = src
        else:
            raise TypeError(f"expected ITree or thunk, got {type(src).__name__}")

    def force(self) -> "ITree":
        t = self._tree
        if t is None:
            t = self._thunk()
            if not isinstance(t, ITree):
                raise TypeError(f"deferred child produced {type(t).__name__}, not an ITree")
            self._tree = t
            self._thunk = None
        return t


def _as_cell(src) -> _Cell:
    return src if isinstance(src, _Cell) else _Cell(src)


# ---------------------------------------------------------------------------
# Event maps
# ---------------------------------------------------------------------------

class EventMap:
    """A finite map from events to deferred trees.

    Keys are pairwise distinct and iteration follows insertion order, so a
    menu serialises identically every time.  Values share memo cells across
    :meth:`override` / :meth:`restrict`, keeping demands idempotent.
    """

    __slots__ = ("_order", "_cells")

    def __init__(self, entries: Iterable = ()):
        order: list[Event] = []
        cells: dict = {}
        for ev, child in entries:
            if ev in cells:
                raise ValueError(f"duplicate event in menu: {ev!r}")
            order.append(ev)
            cells[ev] = _as_cell(child)
        self._order = tuple(order)
        self._cells = cells

    @staticmethod
    def empty() -> "EventMap":
        return _EMPTY_MAP

    @staticmethod
    def _from_parts(order, cells) -> "EventMap":
        m = EventMap.__new__(EventMap)
        m._order = tuple(order)
        m._cells = cells
        return m

    def events(self) -> tuple:
        return self._order

    def sorted_events(self) -> tuple:
        return tuple(sorted(self._order))

    def __len__(self):
        return len(self._order)

    def __contains__(self, ev):
        return ev in self._cells

    def __iter__(self):
        return iter(self._order)

    def cell(self, ev) -> _Cell:
        return self._cells[ev]

    def child(self, ev) -> "ITree":
        """Demand the continuation under ``ev``."""
        return self._cells[ev].force()

    def override(self, other: "EventMap") -> "EventMap":
        """Right-biased union: the other map wins on shared events."""
        cells = dict(self._cells)
        cells.update(other._cells)
        order = list(self._order) + [e for e in other._order if e not in self._cells]
        return EventMap._from_parts(order, cells)

    def restrict(self, keys, keep: bool = True) -> "EventMap":
        """Keep (or drop) the entries whose event lies in ``keys``.

        ``keys`` is anything supporting ``in`` over events (a set, a
        frozenset, or an :class:`~itrees.csp.EventSet`).
        """
        if keep:
            order = [e for e in self._order if e in keys]
        else:
            order = [e for e in self._order if e not in keys]
        cells = {e: self._cells[e] for e in order}
        return EventMap._from_parts(order, cells)

    def map_tree(self, fn: Callable[["ITree"], "ITree"]) -> "EventMap":
        """Lazily apply ``fn`` to every continuation."""
        cells = {}
        for e in self._order:
            c = self._cells[e]
            cells[e] = _Cell(lambda c=c: fn(c.force()))
        return EventMap._from_parts(self._order, cells)

    def items_forced(self):
        for e in self._order:
            yield e, self._cells[e].force()

    def __repr__(self):
        return "{" + ", ".join(e.label for e in self._order) + "}"


_EMPTY_MAP = EventMap(())


# ---------------------------------------------------------------------------
# The tree type
# ---------------------------------------------------------------------------

class ITree:
    """Base class of the three node kinds; instances are immutable."""

    __slots__ = ()

    def is_ret(self) -> bool:
        return isinstance(self, Ret)

    def is_sil(self) -> bool:
        return isinstance(self, Sil)

    def is_vis(self) -> bool:
        return isinstance(self, Vis)

    def is_stable(self) -> bool:
        return not isinstance(self, Sil)


class Ret(ITree):
    """Termination with a value."""

    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value

    def __repr__(self):
        return f"Ret {render_value(self.value)}"


class Sil(ITree):
    """One internal step followed by a deferred continuation."""

    __slots__ = ("_cell",)

    def __init__(self, child):
        self._cell = _as_cell(child)

    def child(self) -> ITree:
        return self._cell.force()

    def __repr__(self):
        return "Sil <..>"


class Vis(ITree):
    """A menu of visible events, each with a deferred continuation."""

    __slots__ = ("menu",)

    def __init__(self, menu):
        if not isinstance(menu, EventMap):
            menu = EventMap(menu)
        self.menu = menu

    def __repr__(self):
        if len(self.menu) == 0:
            return "stop"
        return f"Vis {self.menu!r}"


_STOP = Vis(EventMap.empty())


def stop() -> Vis:
    """The deadlocked tree: an empty menu."""
    return _STOP


def vis(entries) -> Vis:
    """Build a menu node from (event, deferred tree) pairs.

    Duplicate events are a construction error; an empty menu is deadlock.
    """
    return _STOP if isinstance(entries, EventMap) and len(entries) == 0 else Vis(entries)


def prism_lift(prism: Prism, values: Iterable, cont: Callable) -> EventMap:
    """Menu over ``prism``: one entry per value, in the given order.

    ``cont`` maps each value to a deferred tree (an ITree or a thunk).
    """
    entries = []
    for v in values:
        child = cont(v)
        entries.append((prism.build(v), child))
    return EventMap(entries)


# ---------------------------------------------------------------------------
# Exploration budgets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExplorationBudget:
    """Fuel for every semi-decidable query.

    ``tau_fuel`` bounds the internal steps crossed when stabilising a node,
    ``max_trace_len`` bounds visible depth, ``max_nodes`` bounds the total
    breadth-first frontier.
    """

    tau_fuel: int = 20
    max_trace_len: int = 20
    max_nodes: int = 10_000

    def __post_init__(self):
        if self.tau_fuel < 0 or self.max_trace_len < 0 or self.max_nodes < 0:
            raise ValueError("budget components must be non-negative")


# ---------------------------------------------------------------------------
# Bounded strong bisimulation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Equivalent:
    depth_checked: int


@dataclass(frozen=True)
class Distinguished:
    witness: tuple
    observation: str


@dataclass(frozen=True)
class Inconclusive:
    budget: tuple  # (depth, tau_fuel) that ran out


BisimVerdict = Union[Equivalent, Distinguished, Inconclusive]


def _menu_diff(left: EventMap, right: EventMap) -> str:
    ls, rs = set(left.events()), set(right.events())
    only_l = sorted(ls - rs)
    only_r = sorted(rs - ls)
    parts = []
    if only_l:
        parts.append("left offers " + ", ".join(e.label for e in only_l))
    if only_r:
        parts.append("right offers " + ", ".join(e.label for e in only_r))
    return "menus differ: " + "; ".join(parts)


def bounded_bisim(p: ITree, q: ITree, depth: int, tau_fuel: int) -> BisimVerdict:
    """Compare two trees up to strong bisimilarity within a budget.

    Internal steps are matched one-for-one, with at most ``tau_fuel`` steps
    crossed per uninterrupted chain; ``depth`` bounds the number of visible
    events descended through.  The search is breadth-first, so a
    ``Distinguished`` verdict carries a shortest discriminating trace.
    ``Inconclusive`` is returned only when some branch ran out of budget
    and no mismatch was found anywhere.
    """
    if depth < 0 or tau_fuel < 0:
        raise ValueError("depth and tau_fuel must be non-negative")
    queue = deque([(p, q, (), depth)])
    exhausted = False
    while queue:
        a, b, trace, d = queue.popleft()
        fuel = tau_fuel
        while isinstance(a, Sil) and isinstance(b, Sil):
            if fuel == 0:
                break
            a, b = a.child(), b.child()
            fuel -= 1
        if isinstance(a, Sil) and isinstance(b, Sil):
            exhausted = True
            continue
        if isinstance(a, Sil) != isinstance(b, Sil):
            kinds = (type(a).__name__, type(b).__name__)
            return Distinguished(trace, f"{kinds[0]} vs {kinds[1]}")
        # both stable now
        if isinstance(a, Ret) and isinstance(b, Ret):
            if a.value != b.value:
                return Distinguished(
                    trace, f"returns differ: {render_value(a.value)} vs {render_value(b.value)}")
            continue
        if isinstance(a, Ret) or isinstance(b, Ret):
            return Distinguished(trace, f"{type(a).__name__} vs {type(b).__name__}")
        # both Vis
        fa, fb = a.menu, b.menu
        if set(fa.events()) != set(fb.events()):
            return Distinguished(trace, _menu_diff(fa, fb))
        if d == 0:
            continue
        for e in fa.sorted_events():
            queue.append((fa.child(e), fb.child(e), trace + (e,), d - 1))
    if exhausted:
        return Inconclusive((depth, tau_fuel))
    return Equivalent(depth)
