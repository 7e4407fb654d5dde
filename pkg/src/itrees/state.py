"""Mutable-store abstraction and state-aware process operators.

Stores are immutable field records; lenses give composable read/write
access to single fields or regions.  Imperative programs are functions from
a store to a tree over that store, so assignment is just ``Ret`` of an
updated store and sequencing is Kleisli composition.
"""

from __future__ import annotations

import contextlib
import contextvars
import itertools
from typing import Callable, Iterable, Optional

from .combinators import bind, diverge
from .core import EventMap, Prism, Ret, Vis, render_value, stop, value_order_key
from .csp import guard as csp_guard
from .csp import gpar, inp, outp

__all__ = [
    "Store", "Lens", "field_lens", "fields_lens", "identity_lens",
    "Subst", "StateSpace",
    "assigns", "assign", "Skip", "Stop", "Div", "cond", "test",
    "ndet_choice", "sqcap",
    "c_prefix_in", "c_prefix_out", "c_extchoice", "c_guard", "frame_par",
    "state_monitor", "lens_override", "unrestricted",
]


# ---------------------------------------------------------------------------
# Stores
# ---------------------------------------------------------------------------

class Store:
    """An immutable record of named fields.

    Values are hashable data (ints, bools, tuples standing for lists), so
    whole stores can be enumerated, hashed and compared.
    """

    __slots__ = ("_names", "_values")

    def __init__(self, fields: dict | None = None, _names=None, _values=None):
        if fields is not None:
            self._names = tuple(fields)
            self._values = tuple(fields[n] for n in self._names)
        else:
            self._names = _names
            self._values = _values

    def names(self) -> tuple:
        return self._names

    def get(self, name: str):
        try:
            return self._values[self._names.index(name)]
        except ValueError:
            raise KeyError(f"store has no field {name!r}") from None

    def set(self, name: str, value) -> "Store":
        i = self._names.index(name)
        vals = self._values[:i] + (value,) + self._values[i + 1:]
        return Store(_names=self._names, _values=vals)

    def set_many(self, pairs) -> "Store":
        vals = list(self._values)
        for name, value in pairs:
            vals[self._names.index(name)] = value
        return Store(_names=self._names, _values=tuple(vals))

    def as_dict(self) -> dict:
        return dict(zip(self._names, self._values))

    def __eq__(self, other):
        return (isinstance(other, Store)
                and self._names == other._names
                and self._values == other._values)

    def __hash__(self):
        return hash((self._names, self._values))

    def __lt__(self, other):
        return tuple(map(value_order_key, self._values)) < tuple(map(value_order_key, other._values))

    def __repr__(self):
        inner = ", ".join(f"{n} = {render_value(v)}" for n, v in zip(self._names, self._values))
        return "{" + inner + "}"


# ---------------------------------------------------------------------------
# Lenses
# ---------------------------------------------------------------------------

class Lens:
    """A get/put pair focusing on part of a state.

    Two lenses are independent when they touch disjoint regions; for
    field-based lenses over a Store this is decided structurally, otherwise
    it must be declared.
    """

    def __init__(self, get: Callable, put: Callable, name: str = "<lens>",
                 fields: Optional[frozenset] = None, whole: bool = False):
        self.get = get
        self.put = put
        self.name = name
        self.fields = fields          # field names covered, when known
        self.whole = whole            # covers the entire state
        self._independent: set[int] = set()

    def declare_independent(self, other: "Lens") -> None:
        self._independent.add(id(other))
        other._independent.add(id(self))

    def independent(self, other: "Lens") -> bool:
        if self.whole or other.whole:
            return False
        if self.fields is not None and other.fields is not None:
            return not (self.fields & other.fields)
        return id(other) in self._independent

    def __call__(self, state):
        """Lenses double as read expressions."""
        return self.get(state)

    def __repr__(self):
        return f"Lens({self.name})"


def field_lens(name: str) -> Lens:
    """Focus on a single named store field."""
    return Lens(get=lambda s: s.get(name),
                put=lambda s, v: s.set(name, v),
                name=name, fields=frozenset([name]))


def fields_lens(names: Iterable[str]) -> Lens:
    """Focus on a region made of several fields; reads/writes tuples."""
    names = tuple(names)
    return Lens(get=lambda s: tuple(s.get(n) for n in names),
                put=lambda s, vs: s.set_many(zip(names, vs)),
                name="{" + ",".join(names) + "}", fields=frozenset(names))


def identity_lens() -> Lens:
    """The whole-state lens."""
    return Lens(get=lambda s: s, put=lambda _s, v: v, name="<whole>", whole=True)


def lens_override(base, source, region: Lens):
    """Copy the region focused by ``region`` out of ``source`` into ``base``."""
    if region.fields is not None and not region.fields:
        return base
    return region.put(base, region.get(source))


def unrestricted(lens: Lens, expr: Callable, states, values) -> bool:
    """Spot-check that an expression never reads through a lens: writing
    any sampled value leaves the expression's result unchanged."""
    for s in states:
        base = expr(s)
        for v in values:
            if expr(lens.put(s, v)) != base:
                return False
    return True


# ---------------------------------------------------------------------------
# Substitutions
# ---------------------------------------------------------------------------

class Subst:
    """A simultaneous state update built from (lens, expression) maplets.

    All expressions are evaluated against the incoming state before any
    write happens, so ``[x ~> y, y ~> x]`` swaps.  Maplet targets must be
    pairwise independent.
    """

    def __init__(self, maplets: Iterable[tuple] = ()):
        self.maplets = tuple(maplets)
        for i, (x, _) in enumerate(self.maplets):
            for y, _ in self.maplets[i + 1:]:
                if not x.independent(y):
                    raise ValueError(
                        f"substitution targets {x.name} and {y.name} are not independent")

    def __call__(self, state):
        values = [(lens, expr(state)) for lens, expr in self.maplets]
        for lens, v in values:
            state = lens.put(state, v)
        return state

    @staticmethod
    def identity() -> "Subst":
        return Subst(())

    def compose_after(self, first: "Subst") -> Callable:
        """The function applying ``first`` then this substitution."""
        return lambda s: self(first(s))


# ---------------------------------------------------------------------------
# Finite state spaces
# ---------------------------------------------------------------------------

class StateSpace:
    """A finite ordered enumeration of states, with an optional invariant.

    Built either from an explicit sequence or as the cartesian product of
    per-field domains (in which case final states of checked programs are
    validated against those domains).
    """

    def __init__(self, states: Iterable, invariant: Optional[Callable] = None,
                 field_domains: Optional[dict] = None):
        seen = set()
        ordered = []
        for s in states:
            if s not in seen:
                seen.add(s)
                ordered.append(s)
        self._states = tuple(ordered)
        self.invariant = invariant
        self.field_domains = field_domains

    @staticmethod
    def of(states, invariant=None) -> "StateSpace":
        return StateSpace(states, invariant=invariant)

    @staticmethod
    def product(field_domains: dict, invariant=None) -> "StateSpace":
        """All stores over the given per-field domains, in row-major order."""
        names = tuple(field_domains)
        domains = [tuple(field_domains[n]) for n in names]
        states = (Store(dict(zip(names, combo)))
                  for combo in itertools.product(*domains))
        return StateSpace(states, invariant=invariant,
                          field_domains={n: tuple(vs) for n, vs in zip(names, domains)})

    def states(self, satisfying_invariant: bool = False) -> tuple:
        if satisfying_invariant and self.invariant is not None:
            return tuple(s for s in self._states if self.invariant(s))
        return self._states

    def contains_fieldwise(self, store: Store) -> Optional[str]:
        """Name of the first field whose value escapes its declared domain,
        or None.  Only meaningful for product-built spaces."""
        if self.field_domains is None:
            return None
        for name, domain in self.field_domains.items():
            if store.get(name) not in domain:
                return name
        return None

    def __len__(self):
        return len(self._states)

    def __iter__(self):
        return iter(self._states)


# ---------------------------------------------------------------------------
# State display monitor
# ---------------------------------------------------------------------------
#
# The animator wants to show "the current store" even though stores live
# inside closures.  Labelled assignments report the store they produce into
# a per-session dict whenever a monitor is installed; with no monitor they
# cost one context-variable read.

_state_monitor: contextvars.ContextVar = contextvars.ContextVar("state_monitor", default=None)


@contextlib.contextmanager
def state_monitor(sink: dict):
    token = _state_monitor.set(sink)
    try:
        yield sink
    finally:
        _state_monitor.reset(token)


def _record_state(label: str, store) -> None:
    sink = _state_monitor.get()
    if sink is not None and label is not None:
        sink[label] = store


# ---------------------------------------------------------------------------
# Imperative operators
# ---------------------------------------------------------------------------

def assigns(subst: Callable, monitor_label: Optional[str] = None) -> Callable:
    """Lift a state update to a program: apply it and terminate."""
    def prog(s):
        s2 = subst(s)
        _record_state(monitor_label, s2)
        return Ret(s2)
    return prog


def assign(lens: Lens, expr: Callable) -> Callable:
    return assigns(Subst([(lens, expr)]))


def Skip(s):
    """The do-nothing program."""
    return Ret(s)


def Stop(s):
    """Deadlock in every initial state."""
    return stop()


def Div(s):
    """Diverge in every initial state."""
    return diverge()


def cond(then_prog: Callable, condition: Callable, else_prog: Callable) -> Callable:
    return lambda s: then_prog(s) if condition(s) else else_prog(s)


def test(condition: Callable) -> Callable:
    """Skip when the condition holds, deadlock otherwise."""
    return cond(Skip, condition, Stop)


# ---------------------------------------------------------------------------
# Nondeterminism
# ---------------------------------------------------------------------------

def ndet_choice(nd_channel, indices: Iterable[int], branch: Callable[[int], Callable]) -> Callable:
    """Internal choice resolved through a dedicated oracle channel.

    Each index becomes an ``nd.i`` event whose continuation runs the
    corresponding branch; the environment (or an exhaustive explorer)
    resolves which branch runs.
    """
    if nd_channel is None or not isinstance(nd_channel, Prism):
        raise ValueError("nondeterministic choice requires an nd channel in the alphabet")
    indices = tuple(indices)
    return lambda s: Vis(EventMap(
        [(nd_channel.build(i), (lambda i=i: branch(i)(s))) for i in indices]))


def sqcap(left: Callable, right: Callable, nd_channel) -> Callable:
    """Binary internal choice."""
    return ndet_choice(nd_channel, (0, 1), lambda i: left if i == 0 else right)


# ---------------------------------------------------------------------------
# State-aware (Circus) operators
# ---------------------------------------------------------------------------

def c_prefix_in(channel: Prism, values_expr: Callable, cont: Callable) -> Callable:
    """Input prefix whose value set may depend on the current store.

    ``cont(v)`` is a program run in the store the prefix was entered with.
    """
    return lambda s: bind(inp(channel, values_expr(s)), lambda v: cont(v)(s))


def c_prefix_out(channel: Prism, expr: Callable, cont: Callable) -> Callable:
    """Output prefix carrying an expression evaluated against the store."""
    return lambda s: bind(outp(channel, expr(s)), lambda _u: cont(s))


def c_extchoice(left: Callable, right: Callable) -> Callable:
    from .csp import extchoice
    return lambda s: extchoice(left(s), right(s))


def c_guard(condition: Callable, prog: Callable) -> Callable:
    return lambda s: bind(csp_guard(condition(s)), lambda _u: prog(s))


def frame_par(left: Callable, ns_left: Lens, sync_set, ns_right: Lens,
              right: Callable) -> Callable:
    """Framed parallel: run two programs from the same store and merge.

    Each side owns the region named by its lens; the merged final store
    takes the left region from the left result, the right region from the
    right result, and everything else from the initial store.  The name-set
    lenses must be independent.
    """
    if not ns_left.independent(ns_right):
        if not (_lens_empty(ns_left) or _lens_empty(ns_right)):
            raise ValueError(
                f"name-set lenses {ns_left.name} and {ns_right.name} are not independent")

    def prog(s):
        def merge(pair):
            s1, s2 = pair
            return Ret(lens_override(lens_override(s, s1, ns_left), s2, ns_right))
        return bind(gpar(left(s), sync_set, right(s)), merge)

    return prog


def _lens_empty(lens: Lens) -> bool:
    return lens.fields is not None and not lens.fields
