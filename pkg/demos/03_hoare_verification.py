"""Verifying the list-reversal program by explicit-state checking.

The program carries a loop invariant and a variant; the checker runs every
execution from every initial state of a finite space, checks the
postcondition at each final state, the invariant at each loop head, and
the variant for strict decrease.
"""

import itertools

from itrees import (LoopAnnotation, StateSpace, Store, assign, field_lens,
                    hoare_partial, hoare_total, seq, while_loop,
                    weakest_precondition)
from itrees.verify import TRUE

ys, i = field_lens("ys"), field_lens("i")


def reverse_program(xs):
    body = seq(assign(ys, lambda s: (xs[s.get("i")],) + s.get("ys")),
               assign(i, lambda s: s.get("i") + 1))
    return seq(
        assign(ys, lambda s: ()),
        assign(i, lambda s: 0),
        while_loop(lambda s: s.get("i") < len(xs), body,
                   LoopAnnotation(
                       invariant=lambda s: s.get("ys") == tuple(reversed(xs[:s.get("i")])),
                       variant=lambda s: len(xs) - s.get("i"))))


space = StateSpace.of([Store({"ys": (), "i": 0})])
inputs = [tuple(p) for n in range(4) for p in itertools.product((0, 1, 2), repeat=n)]
print(f"checking {len(inputs)} inputs, partial and total ...")
bad = 0
for xs in inputs:
    post = lambda s, xs=xs: s.get("ys") == tuple(reversed(xs))
    for checker in (hoare_partial, hoare_total):
        verdict = checker(TRUE, reverse_program(xs), post, space)
        if type(verdict).__name__ != "Holds":
            bad += 1
            print("  FAILED:", xs, verdict)
print("all held" if bad == 0 else f"{bad} failures")

# A broken variant is caught with the chain of loop-head states.
stuck = while_loop(lambda s: s.get("i") < 1, assign(i, lambda s: s.get("i")),
                   LoopAnnotation(invariant=TRUE, variant=lambda s: 1 - s.get("i")))
verdict = hoare_total(TRUE, stuck, TRUE, StateSpace.of([Store({"ys": (), "i": 0})]))
print("broken loop:", verdict.message)
print("loop heads:", [s.as_dict() for s in verdict.chain.states()])

# Weakest preconditions, by enumeration: from which states does
# incrementing twice land exactly on 4?
x = field_lens("x")
twice = seq(assign(x, lambda s: s.get("x") + 1), assign(x, lambda s: s.get("x") + 1))
wp = weakest_precondition("wp", twice, lambda s: s.get("x") == 4,
                          StateSpace.of([Store({"x": v}) for v in range(6)]))
print("wp(x:=x+1; x:=x+1, x=4) =", [s.get("x") for s in wp.items])
