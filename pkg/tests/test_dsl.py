"""Model language: lexing, parsing, printing round-trips, elaboration."""

import json

import pytest

from itrees import ExplorationBudget, execute, retvals
from itrees.combinators import Menu, Terminated
from itrees.dsl import (ElabError, ModelRuntimeError, ParseError, load_model,
                        node_to_json, parse_expression, parse_model,
                        print_model, eval_literal)
from itrees.dsl.printer import print_proc


BUFFER = """
channel Input : {0..3}
channel Output : {0..3}
channel State : int list

process buffer =
  buf := [] ;
  while true do
    ( Input?i -> buf := buf ++ [i]
      [] length(buf) > 0 & Output!head(buf) -> buf := tail(buf)
      [] State!buf -> skip )
  od
"""

ZBUFFER = """
const MAX_SIZE = 2
const VAL = {0, 1}

zmachine BoundedBuffer
  state { sz : int ; buf : int list }
  domains { sz in {0..MAX_SIZE} ; buf in lists(VAL, MAX_SIZE) }
  invariant { sz = length(buf) ; sz <= MAX_SIZE }
  init { sz := 0 ; buf := [] }
  operations {
    Input  { params v in VAL ; pre sz < MAX_SIZE ;
             update { sz := sz + 1 ; buf := buf ++ [v] } }
    Output { params v in VAL ; pre sz > 0 and v = head(buf) ;
             update { sz := sz - 1 ; buf := tail(buf) } }
    Size   { emit sz }
  }
"""


# --- parsing -----------------------------------------------------------------

def test_buffer_model_parses():
    ast = parse_model(BUFFER)
    names = [getattr(item, "name", None) for item in ast.items]
    assert names == ["Input", "Output", "State", "buffer"]


def test_zmachine_parses():
    ast = parse_model(ZBUFFER)
    machine = ast.items[-1]
    assert machine.name == "BoundedBuffer"
    assert [op.name for op in machine.operations] == ["Input", "Output", "Size"]


def test_unbalanced_do_od_is_a_syntax_error():
    bad = "process p = while true do skip"
    with pytest.raises(ParseError) as err:
        parse_model(bad)
    assert "od" in err.value.expected
    assert err.value.line == 1


def test_error_carries_position_and_expected_set():
    with pytest.raises(ParseError) as err:
        parse_model("channel c :\nprocess p = skip")
    assert err.value.line == 2
    assert "a payload type" in err.value.expected


def test_duplicate_definitions_rejected():
    with pytest.raises(ParseError, match="duplicate"):
        parse_model("process p = skip\nprocess p = stop")


def test_precedence_seq_loosest_then_choice_parallel_hide_prefix():
    ast = parse_model("channel a : {0..0}\nchannel b : {0..0}\n"
                      "process p = a -> skip [] b -> skip ; x := 1")
    body = ast.items[-1].body
    assert type(body).__name__ == "PSeq"
    assert type(body.left).__name__ == "PExtChoice"
    ast2 = parse_model("channel a : {0..0}\nprocess p = a -> skip ||| skip \\ {a}")
    body2 = ast2.items[-1].body
    assert type(body2).__name__ == "PInterleave"
    assert type(body2.right).__name__ == "PHide"


def test_guard_binds_tighter_than_choice():
    ast = parse_model("process p = x > 0 & x := 1 [] x := 2")
    body = ast.items[-1].body
    assert type(body).__name__ == "PExtChoice"
    assert type(body.left).__name__ == "PGuard"


# --- printing round-trips ----------------------------------------------------

@pytest.mark.parametrize("source", [
    BUFFER,
    ZBUFFER,
    "const n\nprocess p(k) = if k > 0 then skip else stop",
    "channel a : {0..0}\nprocess p = (a -> p) \\ {a}",
    "channel c : {0..1} * {5, 6}\nprocess p = c.0!5 -> c.1?v -> skip",
    "process w = x := 0 ; while x < 3 invariant x >= 0 variant 3 - x do x := x + 1 od",
    "channel nd : int\nprocess p = x := 1 |~| x := 2",
])
def test_print_parse_round_trip(source):
    ast = parse_model(source)
    assert parse_model(print_model(ast)) == ast


@pytest.mark.parametrize("name", ["buffer", "reverse", "bounded_buffer", "ring"])
def test_packaged_models_round_trip(name):
    from importlib import resources
    source = resources.files("itrees.models").joinpath(f"{name}.itm").read_text()
    ast = parse_model(source)
    assert parse_model(print_model(ast)) == ast


def test_prism_laws_for_generated_channels():
    m = load_model("channel c : {0..3}\nchannel d : {5, 7} * {0..1}\n"
                   "process p = c?x -> skip")
    c = m.channels["c"]
    for v in range(4):
        assert c.match(c.build(v)) == v
        assert c.build(c.match(c.build(v))) == c.build(v)
    d = m.channels["d"]
    ev = d.build((5, 1))
    assert d.match(ev) == (5, 1) and d.build(d.match(ev)) == ev
    assert d.match(c.build(0)) is None


def test_ast_json_dump():
    ast = parse_model("process p = skip")
    blob = node_to_json(ast)
    assert blob["node"] == "Model"
    assert blob["items"][0]["node"] == "ProcessDecl"
    json.dumps(blob)  # serialisable


# --- expressions -------------------------------------------------------------

def test_eval_literal_values():
    assert eval_literal("3 + 4 * 2") == 11
    assert eval_literal("[1, 2, 3]") == (1, 2, 3)
    assert eval_literal("{1..3}") == frozenset({1, 2, 3})
    assert eval_literal("reverse(take(2, [1, 2, 3]))") == (2, 1)
    assert eval_literal("7 div 2") == 3
    assert eval_literal("-7 div 2") == -4   # flooring division, pairs with mod
    assert eval_literal("-7 mod 2") == 1
    assert eval_literal("7 mod 2") == 1
    assert eval_literal("true and not false") is True
    assert eval_literal("2 in {1..4}") is True


def test_expression_errors():
    with pytest.raises(ParseError):
        parse_expression("1 +")
    with pytest.raises(ModelRuntimeError, match="zero"):
        eval_literal("1 div 0")
    with pytest.raises(ModelRuntimeError, match="head"):
        eval_literal("head([])")


# --- elaboration -------------------------------------------------------------

def test_guarded_self_reference_elaborates():
    m = load_model("channel a : {0..0}\nprocess p = a -> p")
    t = m.itree("p")
    r = execute(t)
    assert isinstance(r, Menu) and [e.label for e in r.events] == ["a.0"]


def test_unguarded_self_reference_rejected():
    with pytest.raises(ElabError, match="unguarded recursion"):
        load_model("channel a : {0..0}\nprocess p = p [] a -> skip")


def test_unguarded_mutual_cycle_names_the_chain():
    with pytest.raises(ElabError, match="p -> q -> p"):
        load_model("process p = q\nprocess q = p")


def test_unguarded_but_acyclic_references_allowed():
    m = load_model("channel a : {0..0}\nchannel b : {0..0}\n"
                   "process q = a -> skip\nprocess r = b -> skip\n"
                   "process p = q ||| r")
    res = execute(m.itree("p"))
    assert isinstance(res, Menu)
    assert [e.label for e in res.events] == ["a.0", "b.0"]


def test_interleaved_identical_offers_are_excluded():
    # both sides offering the same unsynchronised event would be
    # nondeterministic, so the merge drops it: the composition deadlocks
    m = load_model("channel a : {0..0}\nprocess q = a -> skip\nprocess p = q ||| q")
    from itrees.combinators import Deadlock
    assert isinstance(execute(m.itree("p")), Deadlock)


def test_unknown_name_errors():
    with pytest.raises(ElabError, match="unknown name"):
        load_model("process p = x := y")
    with pytest.raises(ElabError, match="unknown channel"):
        load_model("process p = c!1 -> skip")
    with pytest.raises(ElabError, match="unknown process"):
        load_model("process p = q ||| skip")
    with pytest.raises(ElabError, match="unknown channel"):
        load_model("process p = skip || {nochan} skip")
    with pytest.raises(ElabError, match="unknown channel"):
        load_model("process p = skip \\ {nochan}")


def test_unbound_constant_is_an_error_naming_it():
    with pytest.raises(ElabError, match="MAX"):
        load_model("const MAX\nprocess p = x := MAX")
    # binding it fixes elaboration
    m = load_model("const MAX\nprocess p = x := MAX", bindings={"MAX": 9})
    assert execute(m.itree("p")) == Terminated(m.processes["p"].initial_store().set("x", 9))


def test_parameters_are_read_only():
    with pytest.raises(ElabError, match="read-only"):
        load_model("process p(k) = k := 1")


def test_input_variable_cannot_shadow():
    with pytest.raises(ElabError, match="input variable"):
        load_model("channel c : {0..1}\nprocess p = c?x -> x := 1")


def test_input_on_infinite_channel_needs_a_set():
    with pytest.raises(ElabError, match="explicit finite set"):
        load_model("channel c : int\nprocess p = c?x -> skip")
    m = load_model("channel c : int\nprocess p = c?x:{1..2} -> skip")
    r = execute(m.itree("p"))
    assert [e.label for e in r.events] == ["c.1", "c.2"]


def test_read_before_assignment_is_a_runtime_model_error():
    m = load_model("process p = x := x + 1")
    with pytest.raises(ModelRuntimeError, match="before assignment"):
        execute(m.itree("p"))


def test_internal_choice_requires_nd_channel():
    with pytest.raises(ElabError, match="nd"):
        load_model("process p = skip |~| stop")
    m = load_model("channel nd : int\nprocess p = x := 1 |~| x := 2")
    r = execute(m.itree("p"))
    assert [e.label for e in r.events] == ["nd.0", "nd.1"]


def test_parallel_write_conflict_rejected():
    with pytest.raises(ElabError, match="same variable"):
        load_model("process p = x := 1 ||| x := 2")


def test_alphabet_is_exactly_declared_channels():
    m = load_model(BUFFER)
    tree = m.itree("buffer")
    rep = __import__("itrees").transitions(tree, ExplorationBudget(max_trace_len=3))
    seen = {e.channel.name for tr, _ in rep.items for e in tr}
    assert seen <= {"Input", "Output", "State"}


def test_elaborated_buffer_behaviour():
    m = load_model(BUFFER)
    tree = m.itree("buffer")
    r = execute(tree)
    assert [e.label for e in r.events] == \
        ["Input.0", "Input.1", "Input.2", "Input.3", "State.[]"]


def test_zmachine_elaborates_and_checks():
    from itrees.zmachine import check_pos
    from itrees.verify import Holds
    m = load_model(ZBUFFER)
    machine = m.machines["BoundedBuffer"]
    assert machine.space is not None and len(machine.space) == 21
    results = check_pos(machine)
    assert all(isinstance(v, Holds) for _ob, v in results)
    assert len(results) == 4


def test_zmachine_init_must_cover_fields():
    bad = """
zmachine M
  state { x : int ; y : int }
  init { x := 0 }
  operations { Op { emit x } }
"""
    with pytest.raises(ElabError, match="missing y"):
        load_model(bad)


def test_const_override_changes_elaboration():
    m = load_model(ZBUFFER, bindings={"MAX_SIZE": 1})
    machine = m.machines["BoundedBuffer"]
    assert len(machine.space) == 6  # sz in {0,1}, buf in lists <= 1


def test_if_else_elaborates_on_parameter():
    m = load_model("channel a : {0..0}\n"
                   "process p(k) = if k > 0 then a -> skip else stop")
    r = execute(m.itree("p", (1,)))
    assert isinstance(r, Menu)
    from itrees.combinators import Deadlock
    assert isinstance(execute(m.itree("p", (0,))), Deadlock)


def test_input_set_may_depend_on_store():
    # the offered values shrink as the counter grows
    m = load_model("channel c : int\n"
                   "process p = n := 2 ; c?x:{0..n} -> n := x ; c?y:{0..n} -> skip")
    t = m.itree("p")
    r = execute(t)
    assert [e.label for e in r.events] == ["c.0", "c.1", "c.2"]
    session_tree = t
    while not session_tree.is_stable():
        session_tree = session_tree.child()
    after = execute(session_tree.menu.child(
        next(e for e in session_tree.menu.events() if e.label == "c.1")))
    assert [e.label for e in after.events] == ["c.0", "c.1"]
