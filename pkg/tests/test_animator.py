"""Interactive sessions: menus, rejection, tau limits, replay."""

import pytest

from itrees import Ret, Sil, Vis, EventMap, diverge
from itrees.animator import (DeadlockPrompt, MenuPrompt, RejectedEvent, Session,
                             SessionError, TauLimitPrompt, TerminatedPrompt,
                             resolve_model, session_start)

from conftest import make_events


# --- prompts -----------------------------------------------------------------

def test_buffer_session_presents_exact_menu():
    session = session_start("buffer", "buffer")
    assert isinstance(session.prompt, MenuPrompt)
    assert [label for _i, label in session.prompt.entries] == \
        ["Input.0", "Input.1", "Input.2", "Input.3", "State.[]"]
    assert session.state_view() == {"buf": []}


def test_start_on_stop_deadlocks_immediately():
    session = Session(Vis(EventMap(())))
    assert isinstance(session.prompt, DeadlockPrompt)


def test_start_on_divergence_hits_tau_limit_at_20():
    session = Session(diverge())
    assert session.prompt == TauLimitPrompt(20)
    assert session.continue_taus() == TauLimitPrompt(20)
    assert session.taus_total == 40


def test_continue_after_menu_is_an_error():
    session = session_start("buffer", "buffer")
    with pytest.raises(SessionError, match="continue"):
        session.continue_taus()


def test_continue_through_long_tau_chain_reaches_menu():
    (a,) = make_events("a")
    chain = Vis(EventMap([(a, Ret(()))]))
    for _ in range(25):
        chain = Sil(chain)
    session = Session(chain)
    assert session.prompt == TauLimitPrompt(20)
    prompt = session.continue_taus()
    assert isinstance(prompt, MenuPrompt)
    assert [label for _i, label in prompt.entries] == ["a"]


# --- choosing ----------------------------------------------------------------

def test_choose_extends_trace_and_updates_state():
    session = session_start("buffer", "buffer")
    session.choose("Input.1")
    session.choose("Input.2")
    assert session.trace_labels() == ["Input.1", "Input.2"]
    assert session.state_view() == {"buf": [1, 2]}
    labels = [label for _i, label in session.prompt.entries]
    assert "State.[1, 2]" in labels
    session.choose("State.[1, 2]")
    assert session.trace_labels() == ["Input.1", "Input.2", "State.[1, 2]"]


def test_disabled_event_rejected_without_state_change():
    session = session_start("buffer", "buffer")
    before_trace = list(session.trace_labels())
    before_state = session.state_view()
    before_prompt = session.prompt
    with pytest.raises(RejectedEvent):
        session.choose("Output.0")   # empty buffer: no output enabled
    with pytest.raises(RejectedEvent):
        session.choose(99)
    assert session.trace_labels() == before_trace
    assert session.state_view() == before_state
    assert session.prompt is before_prompt


def test_choose_by_id_and_by_label_agree():
    s1 = session_start("buffer", "buffer")
    s2 = session_start("buffer", "buffer")
    s1.choose(1)
    s2.choose("Input.1")
    assert s1.trace_labels() == s2.trace_labels()
    assert [e for e in s1.prompt.entries] == [e for e in s2.prompt.entries]


# --- determinism and replay --------------------------------------------------

def test_identical_choices_give_identical_runs():
    choices = ["Input.3", "Input.0", "Output.3", "State.[0]"]
    runs = []
    for _ in range(2):
        session = session_start("buffer", "buffer")
        prompts = []
        for c in choices:
            prompts.append(session.choose(c))
        runs.append((session.trace_labels(), [p.entries for p in prompts],
                     session.state_view()))
    assert runs[0] == runs[1]


def test_replaying_a_recorded_trace_reproduces_the_prompt():
    session = session_start("buffer", "buffer")
    session.choose("Input.2")
    session.choose("Output.2")
    recorded = session.trace_labels()
    fresh = session_start("buffer", "buffer")
    for label in recorded:
        fresh.choose(label)
    assert fresh.trace_labels() == recorded
    assert fresh.prompt.entries == session.prompt.entries
    assert fresh.state_view() == session.state_view()


def test_menu_matches_one_step_transitions():
    from itrees import ExplorationBudget, transitions
    model = resolve_model("buffer")
    session = Session(lambda: model.itree("buffer"))
    rep = transitions(model.itree("buffer"),
                      ExplorationBudget(tau_fuel=20, max_trace_len=1))
    first_events = sorted({tr[0] for tr, _ in rep.items if len(tr) == 1})
    assert list(session.prompt.events) == first_events


# --- machine sessions --------------------------------------------------------

def test_machine_session_tracks_state():
    session = session_start("bounded_buffer", "BoundedBuffer")
    assert session.state_view() == {"sz": 0, "buf": []}
    session.choose("Input.1")
    assert session.state_view() == {"sz": 1, "buf": [1]}
    labels = [label for _i, label in session.prompt.entries]
    assert labels == ["Input.0", "Input.1", "Output.1", "Size.1"]


def test_ring_session_fifo():
    session = session_start("ring", "Ring", tau_budget=200)
    session.choose("input.0")
    session.choose("input.1")
    labels = [label for _i, label in session.prompt.entries]
    assert "output.0" in labels and "output.1" not in labels


def test_execute_reverse_program_session():
    session = session_start("reverse", "reverse", args=((1, 2, 3),), tau_budget=20)
    assert isinstance(session.prompt, TerminatedPrompt)
    assert session.prompt.value.as_dict() == {"i": 3, "ys": (3, 2, 1)}
