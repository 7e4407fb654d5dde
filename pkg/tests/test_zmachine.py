"""Abstract machines: operation menus, the machine loop, and obligations."""

import itertools

import pytest

from itrees import (ExplorationBudget, Store, StateSpace, Subst, execute,
                    field_lens, machine_semantics, transitions)
from itrees.combinators import Deadlock, Menu, Terminated, Timeout, un_sils
from itrees.verify import Counterexample, Holds
from itrees.zmachine import (ZMachine, ZOperation, check_pos, generate_pos,
                             op_semantics, reachable_states)

MAX_SIZE = 2
VAL = (0, 1)

sz, buf = field_lens("sz"), field_lens("buf")


def make_ops(broken_input=False):
    def input_subst(v):
        maplets = [(buf, lambda s, v=v: s.get("buf") + (v,))]
        if not broken_input:
            maplets.append((sz, lambda s: s.get("sz") + 1))
        return Subst(maplets)

    return [
        ZOperation("Input", params=[("v", lambda s: VAL)],
                   precondition=lambda v: (lambda s: s.get("sz") < MAX_SIZE),
                   update=input_subst),
        ZOperation("Output", params=[("v", lambda s: VAL)],
                   precondition=lambda v: (lambda s: s.get("sz") > 0
                                           and v == s.get("buf")[0]),
                   update=lambda v: Subst([(sz, lambda s: s.get("sz") - 1),
                                           (buf, lambda s: s.get("buf")[1:])])),
        ZOperation("Size", params=[("n", lambda s: (s.get("sz"),))], emit=True),
    ]


def buffer_space():
    lists = [tuple(p) for n in range(MAX_SIZE + 1)
             for p in itertools.product(VAL, repeat=n)]
    return StateSpace.product({"sz": range(MAX_SIZE + 1), "buf": lists})


def make_machine(broken_input=False, bad_init=False):
    init = Subst([(sz, lambda s: (1 if bad_init else 0)), (buf, lambda s: ())])
    return ZMachine(
        "Buffer", fields=("sz", "buf"),
        invariants=[("sz = length(buf)", lambda s: s.get("sz") == len(s.get("buf"))),
                    ("sz <= MAX_SIZE", lambda s: s.get("sz") <= MAX_SIZE)],
        init=init, operations=make_ops(broken_input), space=buffer_space())


# --- operation semantics -----------------------------------------------------

def test_input_enabled_exactly_below_bound():
    m = make_machine()
    op = op_semantics(m, m.operations[0])
    t = op(Store({"sz": 0, "buf": ()}))
    assert [e.label for e in t.menu.sorted_events()] == ["Input.0", "Input.1"]
    full = op(Store({"sz": MAX_SIZE, "buf": (0, 1)}))
    assert len(full.menu) == 0  # unsatisfiable precondition deadlocks


def test_output_guard_pins_the_parameter():
    m = make_machine()
    op = op_semantics(m, m.operations[1])
    t = op(Store({"sz": 2, "buf": (1, 0)}))
    assert [e.label for e in t.menu.events()] == ["Output.1"]
    after = execute(t.menu.child(t.menu.events()[0]))
    assert after == Terminated(Store({"sz": 1, "buf": (0,)}))


def test_emit_offers_single_event_with_current_value():
    m = make_machine()
    op = op_semantics(m, m.operations[2])
    t = op(Store({"sz": 2, "buf": (0, 1)}))
    assert [e.label for e in t.menu.events()] == ["Size.2"]
    assert execute(t.menu.child(t.menu.events()[0])) == \
        Terminated(Store({"sz": 2, "buf": (0, 1)}))


def test_menu_soundness_against_direct_guard_evaluation():
    m = make_machine()
    for state in buffer_space().states(satisfying_invariant=False):
        if not m.invariant(state):
            continue
        for op in m.operations:
            t = op_semantics(m, op)(state)
            offered = {e.value for e in t.menu.events()}
            domains = [tuple(dom(state)) for _n, dom in op.params]
            expected = set()
            for combo in itertools.product(*domains):
                if op.guard(combo, state):
                    expected.add(combo[0] if len(combo) == 1 else combo)
            assert offered == expected, (op.name, state)


# --- machine loop ------------------------------------------------------------

def test_machine_menu_after_init():
    tree = machine_semantics(make_machine())
    r = execute(tree, ExplorationBudget(tau_fuel=20))
    assert [e.label for e in r.events] == ["Input.0", "Input.1", "Size.0"]


def test_output_enabled_after_input():
    tree = machine_semantics(make_machine())
    t = un_sils(10, tree)
    ev = next(e for e in t.menu.events() if e.label == "Input.1")
    t = un_sils(10, t.menu.child(ev))
    labels = [e.label for e in t.menu.sorted_events()]
    assert labels == ["Input.0", "Input.1", "Output.1", "Size.1"]


def test_machine_with_no_operations_deadlocks_after_one_step():
    m = ZMachine("Empty", fields=("sz",), invariants=[],
                 init=Subst([(sz, lambda s: 0)]), operations=())
    r = execute(machine_semantics(m), ExplorationBudget(tau_fuel=5))
    assert isinstance(r, Deadlock)


# --- proof obligations -------------------------------------------------------

def test_all_four_obligations_hold():
    m = make_machine()
    results = check_pos(m)
    assert [ob.name for ob, _v in results] == [
        "Init establishes Buffer_inv",
        "Input preserves Buffer_inv",
        "Output preserves Buffer_inv",
        "Size preserves Buffer_inv",
    ]
    assert all(isinstance(v, Holds) for _ob, v in results)


def test_mutated_input_breaks_preservation():
    m = make_machine(broken_input=True)
    results = dict((ob.name, v) for ob, v in check_pos(m))
    verdict = results["Input preserves Buffer_inv"]
    assert isinstance(verdict, Counterexample)
    assert "sz = length(buf)" in verdict.message
    # the other obligations still hold
    assert isinstance(results["Init establishes Buffer_inv"], Holds)
    assert isinstance(results["Output preserves Buffer_inv"], Holds)


def test_bad_init_fails_establishes():
    m = make_machine(bad_init=True)
    results = dict((ob.name, v) for ob, v in check_pos(m))
    assert isinstance(results["Init establishes Buffer_inv"], Counterexample)


def test_reachable_mode_agrees_here():
    for broken in (False, True):
        m = make_machine(broken_input=broken)
        exhaustive = {ob.name: isinstance(v, Holds) for ob, v in check_pos(m)}
        reachable = {ob.name: isinstance(v, Holds)
                     for ob, v in check_pos(m, mode="reachable")}
        # exhaustive verdicts imply reachable verdicts
        for name, ok in exhaustive.items():
            if ok:
                assert reachable[name], name


def test_reachable_states_of_buffer():
    m = make_machine()
    states = reachable_states(m)
    assert Store({"sz": 0, "buf": ()}) in states
    assert Store({"sz": 2, "buf": (1, 0)}) in states
    assert all(m.invariant(s) for s in states)
    assert len(states) == 7  # sz=0:1, sz=1:2, sz=2:4


def test_duplicate_operation_names_rejected():
    with pytest.raises(ValueError, match="duplicate"):
        ZMachine("M", fields=("sz",), invariants=[],
                 init=Subst([(sz, lambda s: 0)]),
                 operations=(ZOperation("Op"), ZOperation("Op")))
