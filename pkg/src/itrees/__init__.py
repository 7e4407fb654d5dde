"""Interaction-tree semantics workbench.

Define imperative, CSP/Circus and abstract-machine models either through
the host API or the ``.itm`` model language, animate them interactively,
and check Hoare triples, invariants and failures-divergences properties by
bounded explicit-state exploration.
"""

from .core import (BisimVerdict, Channel, Chantype, Distinguished, Equivalent, Event,
                   EventMap, ExplorationBudget, ITree, Inconclusive, Prism, Ret, Sil,
                   Vis, bounded_bisim, prism_lift, render_value, stop, vis)
from .combinators import (Deadlock, ExecResult, Menu, Terminated, Timeout, bind,
                          diverge, execute, iterate, kcomp, loop, run, seq, skip,
                          un_sils, while_loop)
from .csp import (EventSet, extchoice, extchoice_all, gpar, guard, hide, hide_seq,
                  inp, interleave, interleave_all, merge_maps, outp, par, sync)
from .state import (Div, Lens, Skip, StateSpace, Stop, Store, Subst, assign, assigns,
                    c_extchoice, c_guard, c_prefix_in, c_prefix_out, cond, field_lens,
                    fields_lens, frame_par, identity_lens, ndet_choice, sqcap, test)
from .semantics import (Failure, FdReport, IterationChain, RelationReport, Tick, TICK,
                        div_free, divergences, failures, fd_semantics, psem, refines,
                        rel, retvals, straces, transitions, weak_bisim)
from .verify import (Counterexample, HoareVerdict, LoopAnnotation, hoare_partial,
                     hoare_total, invariant_checks, iteration_chains,
                     weakest_precondition)
from .zmachine import (Obligation, ZMachine, ZOperation, check_pos, generate_pos,
                       machine_semantics, op_semantics, reachable_states)

__version__ = "0.1.0"
