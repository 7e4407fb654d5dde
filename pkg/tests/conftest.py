"""Shared fixtures: alphabets and random tree/process generators."""

from __future__ import annotations

import random

import pytest

from itrees import (Chantype, EventMap, Ret, Sil, Vis, bind, diverge, extchoice,
                    guard, hide, inp, interleave, outp, par, seq, sync)
from itrees.csp import EventSet


@pytest.fixture
def abcd():
    """Four bare events a, b, c, d on a fresh alphabet."""
    ct = Chantype()
    chans = [ct.channel(n, domain=[()], arity=0) for n in "abcd"]
    return tuple(ch.build(()) for ch in chans)


def make_events(names="abcd"):
    ct = Chantype()
    return tuple(ct.channel(n, domain=[()], arity=0).build(()) for n in names)


def rand_tree(rng: random.Random, depth: int, events, ret_values=(0, 1, 2, 3)):
    """A random finite tree: menus over a subset of ``events``, silent
    steps, and integer returns.  Size is kept small by biased choice."""
    if depth == 0:
        return Ret(rng.choice(ret_values))
    kind = rng.random()
    if kind < 0.35:
        return Ret(rng.choice(ret_values))
    if kind < 0.55:
        return Sil(rand_tree(rng, depth - 1, events, ret_values))
    width = rng.randint(0, min(3, len(events)))
    chosen = rng.sample(list(events), width)
    return Vis(EventMap(
        [(e, rand_tree(rng, depth - 1, events, ret_values)) for e in chosen]))


def rand_ktree(rng: random.Random, depth: int, events, n_branches: int = 4):
    """A random continuation: maps an integer to one of a few finite trees."""
    branches = [rand_tree(rng, depth, events) for _ in range(n_branches)]
    return lambda v: branches[v % n_branches] if isinstance(v, int) else branches[0]


def rand_process(rng: random.Random, depth: int, channels):
    """A random CSP-flavoured process over unit channels, built from
    prefixes, choice, parallel, interleave, hiding and sequencing."""
    if depth == 0:
        return rng.choice([Ret(()), Vis(EventMap(()))])
    roll = rng.random()
    ch = rng.choice(channels)
    if roll < 0.30:
        return bind(sync(ch), lambda _u, t=rand_process(rng, depth - 1, channels): t)
    if roll < 0.50:
        return extchoice(rand_process(rng, depth - 1, channels),
                         rand_process(rng, depth - 1, channels))
    if roll < 0.62:
        return par(rand_process(rng, depth - 1, channels),
                   EventSet([ch]),
                   rand_process(rng, depth - 1, channels))
    if roll < 0.72:
        return interleave(rand_process(rng, depth - 1, channels),
                          rand_process(rng, depth - 1, channels))
    if roll < 0.80:
        return hide(rand_process(rng, depth - 1, channels), EventSet([ch]))
    if roll < 0.90:
        return bind(rand_process(rng, depth - 1, channels),
                    lambda _u, t=rand_process(rng, depth - 1, channels): t)
    if roll < 0.95:
        return Sil(rand_process(rng, depth - 1, channels))
    return rng.choice([Ret(()), Vis(EventMap(()))])
