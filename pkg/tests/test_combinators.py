"""bind/sequencing laws, iteration, and bounded execution."""

import random

import pytest

from itrees import (Distinguished, Equivalent, EventMap, ExplorationBudget,
                    Inconclusive, Ret, Sil, Vis, bind, bounded_bisim, diverge,
                    execute, iterate, kcomp, loop, run, seq, skip, stop,
                    un_sils, while_loop)
from itrees.combinators import Deadlock, Menu, Terminated, Timeout

from conftest import make_events, rand_ktree, rand_tree


def assert_equiv(p, q, depth=8, fuel=25):
    verdict = bounded_bisim(p, q, depth, fuel)
    assert isinstance(verdict, Equivalent), verdict


# --- bind --------------------------------------------------------------------

def test_bind_left_unit():
    events = make_events()
    rng = random.Random(1)
    for _ in range(50):
        k = rand_ktree(rng, 3, events)
        v = rng.randint(0, 3)
        assert_equiv(bind(Ret(v), k), k(v))


def test_bind_right_unit():
    events = make_events()
    rng = random.Random(2)
    for _ in range(50):
        p = rand_tree(rng, 4, events)
        assert_equiv(bind(p, Ret), p)


def test_bind_associativity_via_kcomp():
    events = make_events()
    rng = random.Random(3)
    for _ in range(100):
        k1 = rand_ktree(rng, 2, events)
        k2 = rand_ktree(rng, 2, events)
        k3 = rand_ktree(rng, 2, events)
        v = rng.randint(0, 3)
        assert_equiv(kcomp(kcomp(k1, k2), k3)(v), kcomp(k1, kcomp(k2, k3))(v))


def test_bind_div_annihilates():
    # div >>= k unfolds exactly like div: silent steps forever
    t = bind(diverge(), lambda v: Ret(v))
    for _ in range(50):
        assert isinstance(t, Sil)
        t = t.child()
    assert isinstance(bounded_bisim(bind(diverge(), Ret), diverge(), 4, 16),
                      Inconclusive)


def test_bind_run_annihilates():
    events = make_events("ab")
    assert_equiv(bind(run(events), lambda v: Ret(99)), run(events), depth=4)


def test_seq_scales_to_long_programs():
    # balanced composition keeps demand depth logarithmic
    from itrees import assign, field_lens
    from itrees.state import Store
    x = field_lens("x")
    prog = seq(*([assign(x, lambda s: s.get("x") + 1)] * 5000))
    result = execute(prog(Store({"x": 0})))
    assert isinstance(result, Terminated)
    assert result.value.get("x") == 5000


def test_kcomp_units():
    events = make_events()
    rng = random.Random(4)
    k = rand_ktree(rng, 3, events)
    for v in range(4):
        assert_equiv(kcomp(Ret, k)(v), k(v))
        assert_equiv(kcomp(k, Ret)(v), k(v))
    assert_equiv(seq()(5), Ret(5))


# --- iteration ---------------------------------------------------------------

def test_while_false_returns_state():
    w = while_loop(lambda s: False, lambda s: Ret(s + 1))
    assert_equiv(w(42), Ret(42))


def test_iterate_unit_is_divergence():
    t = iterate(skip())
    for _ in range(30):
        assert isinstance(t, Sil)
        t = t.child()


def test_while_counts_taus_one_per_iteration():
    # while i < 3 do i := i + 1: by hand, each round contributes one
    # silent step and the returns carry no step, so exactly 3 taus.
    w = while_loop(lambda i: i < 3, lambda i: Ret(i + 1))
    t = w(0)
    taus = 0
    while isinstance(t, Sil):
        t = t.child()
        taus += 1
    assert taus == 3 and isinstance(t, Ret) and t.value == 3
    assert isinstance(execute(w(0), ExplorationBudget(tau_fuel=3)), Terminated)
    assert isinstance(execute(w(0), ExplorationBudget(tau_fuel=2)), Timeout)


# --- diverge / run / un_sils -------------------------------------------------

def test_run_empty_deadlocks():
    assert len(run(()).menu) == 0
    assert isinstance(execute(run(())), Deadlock)


def test_run_offers_events_forever():
    (a,) = make_events("a")
    t = run([a])
    for _ in range(3):
        assert isinstance(t, Vis) and t.menu.events() == (a,)
        t = t.menu.child(a)


def test_execute_diverge_times_out():
    r = execute(diverge(), ExplorationBudget(tau_fuel=20))
    assert isinstance(r, Timeout) and r.taus_consumed == 20


def test_un_sils():
    assert un_sils(0, diverge()) is diverge()
    t = Sil(Sil(Ret(1)))
    assert un_sils(5, t).value == 1
    assert isinstance(un_sils(3, diverge()), Sil)
    with pytest.raises(ValueError):
        un_sils(-1, t)


# --- execute -----------------------------------------------------------------

def test_execute_classifies_heads():
    events = make_events("ab")
    a, b = events
    assert execute(Ret(5)) == Terminated(5)
    assert isinstance(execute(stop()), Deadlock)
    menu = execute(Vis(EventMap([(b, Ret(1)), (a, Ret(2))])))
    assert isinstance(menu, Menu)
    assert menu.events == (a, b)  # sorted by declaration order


def test_execute_is_resumable_with_additive_taus():
    chain = Ret(9)
    for _ in range(25):
        chain = Sil(chain)
    first = execute(chain, ExplorationBudget(tau_fuel=10))
    assert isinstance(first, Timeout) and first.taus_consumed == 10
    second = execute(first.residual, ExplorationBudget(tau_fuel=10))
    assert isinstance(second, Timeout) and second.taus_consumed == 10
    third = execute(second.residual, ExplorationBudget(tau_fuel=10))
    assert third == Terminated(9)
    assert first.taus_consumed + second.taus_consumed + 5 == 25
