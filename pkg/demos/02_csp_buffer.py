"""The reactive buffer, built two ways, and its failures-divergences sets.

The buffer loops offering three branches: accept an input, emit the head
(only when non-empty), or display its contents.  We build it with the raw
combinators, then load the same model from its .itm source, and check the
two agree on bounded traces.
"""

from itrees import (Chantype, ExplorationBudget, Ret, bind, execute,
                    extchoice_all, fd_semantics, guard, inp, loop, outp,
                    transitions)
from itrees.animator import resolve_model

VALUES = range(4)

ct = Chantype()
Input = ct.channel("Input", domain=VALUES)
Output = ct.channel("Output", domain=VALUES)
State = ct.channel("State")


def buffer_body(buf):
    return extchoice_all([
        bind(inp(Input, VALUES), lambda v: Ret(buf + (v,))),
        bind(guard(len(buf) > 0),
             lambda _u: bind(outp(Output, buf[0] if buf else 0),
                             lambda _v: Ret(buf[1:]))),
        bind(outp(State, buf), lambda _u: Ret(buf)),
    ])


buffer = loop(buffer_body)(())
print("initial menu:", [e.label for e in execute(buffer).events])

# The same process from the model language:
model_buffer = resolve_model("buffer").itree("buffer")

budget = ExplorationBudget(tau_fuel=20, max_trace_len=3)
mine = {tuple(e.label for e in tr) for tr, _ in transitions(buffer, budget).items}
theirs = {tuple(e.label for e in tr) for tr, _ in transitions(model_buffer, budget).items}
print("bounded traces agree:", mine == theirs, f"({len(mine)} traces)")

# Failures say what the buffer refuses: before any input, every Output
# event is refused (there is nothing to emit yet).
report = fd_semantics(buffer, None, ExplorationBudget(tau_fuel=20, max_trace_len=2))
empty_refusals = next(f for f in report.failures if f.trace == ())
print("refused at start:",
      sorted(x.label for x in empty_refusals.refusal if hasattr(x, "label")))
print("divergences found:", list(report.divergences))
