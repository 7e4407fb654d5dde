"""Trees, laziness, and bounded execution.

A process value has one of three shapes: termination (Ret), an internal
step (Sil), or a menu of visible events (Vis).  Children are deferred, so
infinite processes are ordinary values and we only ever pay for the parts
we look at.
"""

from itrees import (Chantype, ExplorationBudget, Ret, bind, diverge, execute,
                    run, while_loop)

# A tiny alphabet: a channel carrying small numbers.
ct = Chantype()
ping = ct.channel("ping", domain=range(3))

# run offers its events forever -- an infinite tree, built in O(1).
spinner = run([ping.build(v) for v in range(3)])
print("run offers:", execute(spinner))

# diverge only ever takes internal steps; execution times out rather than
# hanging, and the result is resumable.
result = execute(diverge(), ExplorationBudget(tau_fuel=20))
print("diverge:", type(result).__name__, "after", result.taus_consumed, "taus")
again = execute(result.residual, ExplorationBudget(tau_fuel=20))
print("resumed:", type(again).__name__, "after", again.taus_consumed, "more")

# A while loop contributes exactly one internal step per iteration, so the
# tau count of a run is the iteration count.
count_up = while_loop(lambda n: n < 5, lambda n: Ret(n + 1))
print("count to five:", execute(count_up(0)))

# Sequencing is monadic bind: run the first tree, feed its result on.
doubled = bind(count_up(0), lambda n: Ret(n * 2))
print("then doubled:", execute(doubled))
