"""Elaboration of .itm ASTs into executable definitions.

Channels become prisms over a generated alphabet, processes compile to
closures building lazy trees, and machine declarations become
:class:`~itrees.zmachine.ZMachine` values.  Recursion through process
references is only allowed when every cycle passes a syntactic guard (a
prefix continuation or a loop body); unguarded cycles are rejected with
the offending chain of names.
"""

from __future__ import annotations

import itertools
from typing import Callable, Optional

from ..combinators import bind, diverge, while_loop
from ..core import Chantype, EventMap, ITree, Ret, Vis, stop, value_order_key
from ..csp import EventSet, extchoice, gpar, guard, hide, interleave_all
from ..state import (Store, StateSpace, Subst, _record_state, field_lens,
                     fields_lens, lens_override)
from ..verify import LoopAnnotation
from ..zmachine import ZMachine, ZOperation
from . import nodes as N
from .parser import parse_model
from .printer import print_expr

__all__ = ["ElabError", "ModelRuntimeError", "Model", "ProcessDef", "elaborate",
           "load_model", "UNSET", "UNBOUND"]


class ElabError(Exception):
    def __init__(self, message: str, span=(0, 0)):
        self.message = message
        self.span = span
        super().__init__(f"{span[0]}:{span[1]}: {message}")


class ModelRuntimeError(Exception):
    def __init__(self, message: str, span=(0, 0)):
        self.message = message
        self.span = span
        super().__init__(f"{span[0]}:{span[1]}: {message}")


class _Unset:
    def __repr__(self):
        return "<unset>"


class _Unbound:
    def __repr__(self):
        return "<unbound>"


UNSET = _Unset()
UNBOUND = _Unbound()


# ---------------------------------------------------------------------------
# Channel payload descriptions
# ---------------------------------------------------------------------------

def _sorted_values(values):
    return tuple(sorted(set(values), key=value_order_key))


class _Payload:
    """Finite-domain information for one channel component."""

    def __init__(self, domain):
        self.domain = domain  # ordered tuple or None when infinite

    @property
    def finite(self):
        return self.domain is not None


def _type_payloads(tnode, const_eval) -> list:
    """Per-component payload descriptions of a channel type."""
    if isinstance(tnode, N.TTuple):
        return [_one_payload(p, const_eval) for p in tnode.parts]
    return [_one_payload(tnode, const_eval)]


def _one_payload(tnode, const_eval) -> _Payload:
    if isinstance(tnode, N.TInt):
        return _Payload(None)
    if isinstance(tnode, N.TBool):
        return _Payload((False, True))
    if isinstance(tnode, N.TList):
        return _Payload(None)
    if isinstance(tnode, N.TSetLit):
        return _Payload(_sorted_values(const_eval(e) for e in tnode.items))
    if isinstance(tnode, N.TRange):
        lo, hi = const_eval(tnode.lo), const_eval(tnode.hi)
        return _Payload(tuple(range(lo, hi + 1)))
    if isinstance(tnode, N.TTuple):
        raise ElabError("nested tuple payloads are not supported", tnode.span)
    raise ElabError("unsupported payload type", getattr(tnode, "span", (0, 0)))


# ---------------------------------------------------------------------------
# Expression compilation
# ---------------------------------------------------------------------------

_BUILTINS = {"head", "tail", "length", "take", "reverse", "nth", "lists"}


class _Ctx:
    """Name environment for one compilation unit."""

    def __init__(self, model: "Model", locals_: frozenset = frozenset(),
                 store_fields: frozenset = frozenset()):
        self.model = model
        self.locals = locals_
        self.store_fields = store_fields

    def with_locals(self, *names) -> "_Ctx":
        return _Ctx(self.model, self.locals | frozenset(names), self.store_fields)


def _need_list(value, span):
    if not isinstance(value, tuple):
        raise ModelRuntimeError(f"expected a list, got {value!r}", span)
    return value


def _compile_expr(e, ctx: _Ctx) -> Callable:
    """Compile to a closure (env, store) -> value."""
    sp = e.span
    if isinstance(e, N.EInt):
        v = e.value
        return lambda env, s: v
    if isinstance(e, N.EBool):
        v = e.value
        return lambda env, s: v
    if isinstance(e, N.EName):
        name = e.name
        if name in ctx.locals:
            return lambda env, s: env[name]
        if name in ctx.store_fields:
            def read(env, s):
                v = s.get(name)
                if v is UNSET:
                    raise ModelRuntimeError(f"variable {name!r} read before assignment", sp)
                return v
            return read
        if name in ctx.model.consts:
            v = ctx.model.consts[name]
            if v is UNBOUND:
                raise ElabError(f"abstract constant {name!r} is not bound; "
                                "give it a value in the model or with --const", sp)
            return lambda env, s: v
        raise ElabError(f"unknown name {name!r}", sp)
    if isinstance(e, N.ECall):
        if e.func not in _BUILTINS:
            raise ElabError(f"unknown function {e.func!r}", sp)
        args = [_compile_expr(a, ctx) for a in e.args]
        return _compile_call(e.func, args, len(e.args), sp)
    if isinstance(e, N.EUn):
        inner = _compile_expr(e.operand, ctx)
        if e.op == "not":
            return lambda env, s: not inner(env, s)
        return lambda env, s: -inner(env, s)
    if isinstance(e, N.EBin):
        return _compile_binop(e, ctx)
    if isinstance(e, N.EList):
        items = [_compile_expr(x, ctx) for x in e.items]
        return lambda env, s: tuple(f(env, s) for f in items)
    if isinstance(e, N.ETuple):
        items = [_compile_expr(x, ctx) for x in e.items]
        return lambda env, s: tuple(f(env, s) for f in items)
    if isinstance(e, N.ESet):
        items = [_compile_expr(x, ctx) for x in e.items]
        return lambda env, s: frozenset(f(env, s) for f in items)
    if isinstance(e, N.ERange):
        lo, hi = _compile_expr(e.lo, ctx), _compile_expr(e.hi, ctx)
        return lambda env, s: frozenset(range(lo(env, s), hi(env, s) + 1))
    raise ElabError(f"cannot compile expression {e!r}", sp)


def _compile_call(func, args, arity, sp):
    expect = {"head": 1, "tail": 1, "length": 1, "take": 2, "reverse": 1,
              "nth": 2, "lists": 2}[func]
    if arity != expect:
        raise ElabError(f"{func} takes {expect} argument(s), got {arity}", sp)
    if func == "head":
        def call(env, s):
            xs = _need_list(args[0](env, s), sp)
            if not xs:
                raise ModelRuntimeError("head of empty list", sp)
            return xs[0]
    elif func == "tail":
        def call(env, s):
            xs = _need_list(args[0](env, s), sp)
            if not xs:
                raise ModelRuntimeError("tail of empty list", sp)
            return xs[1:]
    elif func == "length":
        def call(env, s):
            return len(_need_list(args[0](env, s), sp))
    elif func == "take":
        def call(env, s):
            n = args[0](env, s)
            return _need_list(args[1](env, s), sp)[:max(n, 0)]
    elif func == "reverse":
        def call(env, s):
            return tuple(reversed(_need_list(args[0](env, s), sp)))
    elif func == "nth":
        def call(env, s):
            xs = _need_list(args[0](env, s), sp)
            n = args[1](env, s)
            if not 0 <= n < len(xs):
                raise ModelRuntimeError(f"index {n} out of range for list of length {len(xs)}", sp)
            return xs[n]
    else:  # lists(S, n): every list over S with length <= n
        def call(env, s):
            base = _as_iterable(args[0](env, s), sp)
            n = args[1](env, s)
            out = []
            for k in range(n + 1):
                out.extend(itertools.product(base, repeat=k))
            return frozenset(out)
    return call


def _as_iterable(v, sp):
    if isinstance(v, (frozenset, tuple)):
        return _sorted_values(v)
    raise ModelRuntimeError(f"expected a set or list, got {v!r}", sp)


def _compile_binop(e: N.EBin, ctx: _Ctx) -> Callable:
    sp = e.span
    op = e.op
    left = _compile_expr(e.left, ctx)
    if op == "and":
        right = _compile_expr(e.right, ctx)
        return lambda env, s: bool(left(env, s)) and bool(right(env, s))
    if op == "or":
        right = _compile_expr(e.right, ctx)
        return lambda env, s: bool(left(env, s)) or bool(right(env, s))
    right = _compile_expr(e.right, ctx)
    table = {
        "+": lambda a, b: a + b,
        "-": lambda a, b: a - b,
        "*": lambda a, b: a * b,
        "div": None, "mod": None,
        "=": lambda a, b: a == b,
        "!=": lambda a, b: a != b,
        "<": lambda a, b: a < b,
        "<=": lambda a, b: a <= b,
        ">": lambda a, b: a > b,
        ">=": lambda a, b: a >= b,
        "++": lambda a, b: a + b,
        "in": lambda a, b: a in b,
    }
    if op == "div":
        # flooring division, so that a = b * (a div b) + (a mod b)
        def apply(env, s):
            b = right(env, s)
            if b == 0:
                raise ModelRuntimeError("division by zero", sp)
            return left(env, s) // b
        return apply
    if op == "mod":
        def apply(env, s):
            b = right(env, s)
            if b == 0:
                raise ModelRuntimeError("modulo by zero", sp)
            return left(env, s) % b
        return apply
    fn = table[op]

    def apply(env, s):
        try:
            return fn(left(env, s), right(env, s))
        except TypeError as err:
            raise ModelRuntimeError(f"type error in {op!r}: {err}", sp) from None
    return apply


# ---------------------------------------------------------------------------
# Static analysis of process bodies
# ---------------------------------------------------------------------------

def _assigned_vars(p) -> set:
    if isinstance(p, N.PAssign):
        return {p.var}
    out = set()
    for attr in ("left", "right", "proc", "cont", "then", "orelse", "body"):
        sub = getattr(p, attr, None)
        if isinstance(sub, N.Node):
            out |= _assigned_vars(sub)
    return out


def _bound_vars(p) -> set:
    out = set()
    if isinstance(p, N.PPrefix) and p.kind == "in":
        out.add(p.var)
    if isinstance(p, N.PIndexedInterleave):
        out.add(p.var)
    for attr in ("left", "right", "proc", "cont", "then", "orelse", "body"):
        sub = getattr(p, attr, None)
        if isinstance(sub, N.Node):
            out |= _bound_vars(sub)
    return out


def _unguarded_refs(p) -> set:
    """Process names referenced outside any prefix continuation/loop body."""
    if isinstance(p, N.PRef):
        return {p.name}
    if isinstance(p, (N.PPrefix, N.PWhile)):
        return set()  # continuations and loop bodies are guarded
    out = set()
    for attr in ("left", "right", "proc", "then", "orelse", "body"):
        sub = getattr(p, attr, None)
        if isinstance(sub, N.Node):
            out |= _unguarded_refs(sub)
    return out


def _all_refs(p) -> set:
    if isinstance(p, N.PRef):
        return {p.name}
    out = set()
    for attr in ("left", "right", "proc", "cont", "then", "orelse", "body"):
        sub = getattr(p, attr, None)
        if isinstance(sub, N.Node):
            out |= _all_refs(sub)
    return out


def _find_unguarded_cycle(decls: dict) -> Optional[list]:
    """A cycle in the unguarded-reference graph, if any."""
    graph = {name: sorted(_unguarded_refs(d.body) & decls.keys())
             for name, d in decls.items()}
    WHITE, GREY, BLACK = 0, 1, 2
    colour = {n: WHITE for n in graph}
    path: list = []

    def visit(n):
        colour[n] = GREY
        path.append(n)
        for m in graph[n]:
            if colour[m] == GREY:
                return path[path.index(m):] + [m]
            if colour[m] == WHITE:
                cycle = visit(m)
                if cycle:
                    return cycle
        path.pop()
        colour[n] = BLACK
        return None

    for n in graph:
        if colour[n] == WHITE:
            cycle = visit(n)
            if cycle:
                return cycle
    return None


# ---------------------------------------------------------------------------
# Process compilation
# ---------------------------------------------------------------------------

class ProcessDef:
    """A compiled process definition.

    The store fields are exactly the variables the body assigns; parameters
    are read-only logical constants bound at instantiation.
    """

    def __init__(self, model: "Model", decl: N.ProcessDecl):
        self.model = model
        self.decl = decl
        self.name = decl.name
        self.params = decl.params
        assigned = _assigned_vars(decl.body)
        bound = _bound_vars(decl.body)
        for v in assigned:
            if v in decl.params:
                raise ElabError(
                    f"parameter {v!r} of process {decl.name} is read-only", decl.span)
            if v in bound:
                raise ElabError(
                    f"{v!r} is both an input variable and an assigned variable "
                    f"in process {decl.name}", decl.span)
            if v in model.consts:
                raise ElabError(
                    f"{v!r} is a constant and cannot be assigned in process {decl.name}",
                    decl.span)
        self.fields = tuple(sorted(assigned))
        ctx = _Ctx(model, locals_=frozenset(decl.params),
                   store_fields=frozenset(self.fields))
        self._compiled = _compile_proc(decl.body, ctx)

    def initial_store(self) -> Store:
        return Store({f: UNSET for f in self.fields})

    def label(self, args) -> str:
        if args:
            from ..core import render_value
            return f"{self.name}(" + ", ".join(render_value(a) for a in args) + ")"
        return self.name

    def program(self, args=()) -> Callable:
        """The body as a function over its store (parameters bound)."""
        if len(args) != len(self.params):
            raise ElabError(
                f"process {self.name} takes {len(self.params)} argument(s), "
                f"got {len(args)}", self.decl.span)
        env = dict(zip(self.params, args))
        env["__label__"] = self.label(args)
        return lambda s: self._compiled(env, s)

    def itree(self, args=()) -> ITree:
        return self.program(args)(self.initial_store())


def _compile_proc(p, ctx: _Ctx) -> Callable:
    """Compile to a closure (env, store) -> ITree (over ctx's store)."""
    sp = p.span
    model = ctx.model

    if isinstance(p, N.PSkip):
        return lambda env, s: Ret(s)
    if isinstance(p, N.PStop):
        return lambda env, s: stop()
    if isinstance(p, N.PDiv):
        return lambda env, s: diverge()

    if isinstance(p, N.PSeq):
        left = _compile_proc(p.left, ctx)
        right = _compile_proc(p.right, ctx)
        return lambda env, s: bind(left(env, s), lambda s2: right(env, s2))

    if isinstance(p, N.PExtChoice):
        left = _compile_proc(p.left, ctx)
        right = _compile_proc(p.right, ctx)
        return lambda env, s: extchoice(left(env, s), right(env, s))

    if isinstance(p, N.PIntChoice):
        if "nd" not in model.channels:
            raise ElabError(
                "internal choice |~| needs a declared channel named 'nd'", sp)
        nd = model.channels["nd"]
        left = _compile_proc(p.left, ctx)
        right = _compile_proc(p.right, ctx)
        return lambda env, s: Vis(EventMap([
            (nd.build(0), lambda: left(env, s)),
            (nd.build(1), lambda: right(env, s)),
        ]))

    if isinstance(p, (N.PPar, N.PInterleave)):
        return _compile_parallel(p, ctx)

    if isinstance(p, N.PIndexedInterleave):
        writes = _assigned_vars(p.body)
        if writes:
            raise ElabError(
                "indexed interleave operands must not assign shared state "
                f"(assigns {', '.join(sorted(writes))})", sp)
        values = _compile_expr(p.values, ctx)
        body = _compile_proc(p.body, ctx.with_locals(p.var))

        def indexed(env, s):
            vals = _as_iterable(values(env, s), sp)
            trees = [body({**env, p.var: v}, s) for v in vals]
            return bind(interleave_all(trees), lambda _u: Ret(s))
        return indexed

    if isinstance(p, N.PHide):
        inner = _compile_proc(p.proc, ctx)
        hidden = _event_set(model, p.channels, sp)
        return lambda env, s: hide(inner(env, s), hidden)

    if isinstance(p, N.PGuard):
        cond = _compile_expr(p.cond, ctx)
        inner = _compile_proc(p.proc, ctx)
        return lambda env, s: bind(guard(bool(cond(env, s))), lambda _u: inner(env, s))

    if isinstance(p, N.PAssign):
        var = p.var
        expr = _compile_expr(p.expr, ctx)

        def assign(env, s):
            s2 = s.set(var, expr(env, s))
            _record_state(env.get("__label__"), s2)
            return Ret(s2)
        return assign

    if isinstance(p, N.PIf):
        cond = _compile_expr(p.cond, ctx)
        then = _compile_proc(p.then, ctx)
        orelse = _compile_proc(p.orelse, ctx)
        return lambda env, s: then(env, s) if cond(env, s) else orelse(env, s)

    if isinstance(p, N.PWhile):
        cond = _compile_expr(p.cond, ctx)
        body = _compile_proc(p.body, ctx)
        inv = _compile_expr(p.invariant, ctx) if p.invariant is not None else None
        var = _compile_expr(p.variant, ctx) if p.variant is not None else None

        def loop_tree(env, s):
            annotation = None
            if inv is not None or var is not None:
                annotation = LoopAnnotation(
                    invariant=(lambda st: bool(inv(env, st))) if inv is not None else None,
                    variant=(lambda st: var(env, st)) if var is not None else None)
            w = while_loop(lambda st: bool(cond(env, st)),
                           lambda st: body(env, st), annotation)
            return w(s)
        return loop_tree

    if isinstance(p, N.PRef):
        if p.name not in model._process_decls:
            raise ElabError(f"unknown process {p.name!r}", sp)
        args = [_compile_expr(a, ctx) for a in p.args]

        def ref(env, s):
            vals = tuple(a(env, s) for a in args)
            tree = model.instantiate(p.name, vals)
            return bind(tree, lambda _v: Ret(s))
        return ref

    if isinstance(p, N.PPrefix):
        return _compile_prefix(p, ctx)

    raise ElabError(f"cannot compile process node {type(p).__name__}", sp)


def _event_set(model: "Model", channel_names, sp) -> EventSet:
    chans = []
    for name in channel_names:
        if name not in model.channels:
            raise ElabError(f"unknown channel {name!r}", sp)
        chans.append(model.channels[name])
    return EventSet(chans)


def _compile_parallel(p, ctx: _Ctx) -> Callable:
    sp = p.span
    if isinstance(p, N.PPar):
        sync_set = _event_set(ctx.model, p.channels, sp)
        lnode, rnode = p.left, p.right
    else:
        sync_set = EventSet()
        lnode, rnode = p.left, p.right
    lwrites = frozenset(_assigned_vars(lnode))
    rwrites = frozenset(_assigned_vars(rnode))
    overlap = lwrites & rwrites
    if overlap:
        raise ElabError(
            "parallel operands assign the same variable(s): "
            + ", ".join(sorted(overlap)), sp)
    left = _compile_proc(lnode, ctx)
    right = _compile_proc(rnode, ctx)
    ns_left = fields_lens(sorted(lwrites))
    ns_right = fields_lens(sorted(rwrites))

    def parallel(env, s):
        def merge(pair):
            s1, s2 = pair
            return Ret(lens_override(lens_override(s, s1, ns_left), s2, ns_right))
        return bind(gpar(left(env, s), sync_set, right(env, s)), merge)
    return parallel


def _compile_prefix(p: N.PPrefix, ctx: _Ctx) -> Callable:
    sp = p.span
    model = ctx.model
    if p.channel not in model.channels:
        raise ElabError(f"unknown channel {p.channel!r}", sp)
    channel = model.channels[p.channel]
    payloads = model.channel_payloads[p.channel]
    arity = len(payloads)
    n_fixed = len(p.dotargs) + (1 if p.kind == "out" else 0)
    n_needed = arity - n_fixed
    if p.kind in ("out", "sync"):
        if n_needed != 0 and not (p.kind == "sync" and n_needed == 1):
            raise ElabError(
                f"channel {p.channel} carries {arity} component(s); "
                f"prefix fixes {n_fixed}", sp)
    else:
        if n_needed != 1:
            raise ElabError(
                f"input prefix on {p.channel} must leave exactly one free "
                f"component ({arity} declared, {len(p.dotargs)} dotted)", sp)
    dotargs = [_compile_expr(a, ctx) for a in p.dotargs]

    def build_event(env, s, final=None):
        comps = [a(env, s) for a in dotargs]
        if final is not None:
            comps.append(final[0])
        payload = tuple(comps) if arity >= 2 else (comps[0] if comps else ())
        return channel.build(payload)

    if p.kind == "out":
        payload_expr = _compile_expr(p.payload, ctx)
        cont = _compile_proc(p.cont, ctx)

        def out_tree(env, s):
            ev = build_event(env, s, final=(payload_expr(env, s),))
            return Vis(EventMap([(ev, lambda: cont(env, s))]))
        return out_tree

    if p.kind == "sync":
        if n_needed == 1:
            # bare `c -> P` on a value-carrying channel: only legal when the
            # remaining component has a singleton domain
            dom = payloads[-1].domain
            if dom is None or len(dom) != 1:
                raise ElabError(
                    f"channel {p.channel} carries a value; use {p.channel}?x or "
                    f"{p.channel}!e", sp)
            pinned = dom[0]
        else:
            pinned = None
        cont = _compile_proc(p.cont, ctx)

        def sync_tree(env, s):
            ev = build_event(env, s, final=(pinned,) if pinned is not None else None)
            return Vis(EventMap([(ev, lambda: cont(env, s))]))
        return sync_tree

    # input
    var = p.var
    if var in ctx.locals or var in ctx.store_fields:
        raise ElabError(f"input variable {var!r} shadows an existing name", sp)
    if p.var_set is not None:
        values_fn = _compile_expr(p.var_set, ctx)
    else:
        dom = payloads[len(p.dotargs)].domain
        if dom is None:
            raise ElabError(
                f"input on {p.channel} needs an explicit finite set: "
                f"{p.channel}?{var}:A", sp)
        values_fn = lambda env, s: dom
    cont = _compile_proc(p.cont, ctx.with_locals(var))

    def in_tree(env, s):
        values = _as_iterable(values_fn(env, s), sp)
        entries = []
        for v in values:
            ev = build_event(env, s, final=(v,))
            entries.append((ev, lambda v=v: cont({**env, var: v}, s)))
        return Vis(EventMap(entries))
    return in_tree


# ---------------------------------------------------------------------------
# Machine elaboration
# ---------------------------------------------------------------------------

def _elaborate_machine(model: "Model", decl: N.ZMachineDecl) -> ZMachine:
    fields = tuple(f.name for f in decl.state)
    base_ctx = _Ctx(model, store_fields=frozenset(fields))
    const_ctx = _Ctx(model)

    invariants = []
    for e in decl.invariants:
        fn = _compile_expr(e, base_ctx)
        invariants.append((print_expr(e), lambda s, fn=fn: bool(fn({}, s))))

    init_targets = [a.var for a in decl.init]
    missing = set(fields) - set(init_targets)
    if missing:
        raise ElabError(f"init of {decl.name} must assign every field; "
                        f"missing {', '.join(sorted(missing))}", decl.span)
    for a in decl.init:
        if a.var not in fields:
            raise ElabError(f"init assigns unknown field {a.var!r}", a.span)
    init_exprs = [(a.var, _compile_expr(a.expr, const_ctx)) for a in decl.init]
    init = Subst([(field_lens(v), lambda s, fn=fn: fn({}, s)) for v, fn in init_exprs])

    operations = []
    for op in decl.operations:
        operations.append(_elaborate_operation(model, decl, fields, op))

    space = None
    if decl.domains:
        declared = {d.name: d for d in decl.domains}
        unknown = set(declared) - set(fields)
        if unknown:
            raise ElabError(f"domains name unknown field(s): {', '.join(sorted(unknown))}",
                            decl.span)
        missing = set(fields) - set(declared)
        if missing:
            raise ElabError(f"domains block must cover every field; missing "
                            f"{', '.join(sorted(missing))}", decl.span)
        per_field = {}
        for f in fields:
            fn = _compile_expr(declared[f].values, const_ctx)
            per_field[f] = _as_iterable(fn({}, None), declared[f].span)
        space = StateSpace.product(per_field)

    machine = ZMachine(
        name=decl.name, fields=fields, invariants=tuple(invariants),
        init=init, operations=tuple(operations),
        constants={k: v for k, v in model.consts.items() if v is not UNBOUND},
        space=space)
    return machine


def _elaborate_operation(model, decl, fields, op: N.OperationDecl) -> ZOperation:
    params: list = []
    pres: list = []
    updates: list = []
    emit_expr = None
    for sec in op.sections:
        if sec.kind == "params":
            params.extend(sec.params)
        elif sec.kind == "pre":
            pres.append(sec.expr)
        elif sec.kind == "update":
            updates.extend(sec.assigns)
        else:
            emit_expr = sec.expr

    base_ctx = _Ctx(model, store_fields=frozenset(fields))
    if emit_expr is not None:
        if params or pres or updates:
            raise ElabError(f"operation {op.name}: emit cannot be combined with "
                            "other sections", op.span)
        fn = _compile_expr(emit_expr, base_ctx)
        return ZOperation(op.name,
                          params=[(op.name.lower(), lambda s, fn=fn: (fn({}, s),))],
                          emit=True)

    param_names = tuple(n for n, _e in params)
    pctx = base_ctx.with_locals(*param_names)
    param_list = []
    for name, set_expr in params:
        fn = _compile_expr(set_expr, base_ctx)
        def domain(s, fn=fn, span=set_expr.span):
            return _as_iterable(_to_set(fn({}, s), span), span)
        param_list.append((name, domain))

    pre_fns = [_compile_expr(e, pctx) for e in pres]

    def precondition(*values):
        env = dict(zip(param_names, values))
        return lambda s: all(fn(env, s) for fn in pre_fns)

    for a in updates:
        if a.var not in fields:
            raise ElabError(f"operation {op.name} updates unknown field {a.var!r}", a.span)
    update_exprs = [(a.var, _compile_expr(a.expr, pctx)) for a in updates]

    def update(*values):
        env = dict(zip(param_names, values))
        return Subst([(field_lens(v), lambda s, fn=fn, env=env: fn(env, s))
                      for v, fn in update_exprs])

    return ZOperation(op.name, params=param_list,
                      precondition=precondition if pre_fns else None,
                      update=update if update_exprs else None)


def _to_set(v, span):
    if isinstance(v, (frozenset, tuple)):
        return v
    raise ModelRuntimeError(f"parameter set must be a set or list, got {v!r}", span)


# ---------------------------------------------------------------------------
# The elaborated model
# ---------------------------------------------------------------------------

class Model:
    """An elaborated model: channels, constants, processes and machines."""

    def __init__(self, ast: N.Model, bindings: Optional[dict] = None):
        self.ast = ast
        self.chantype = Chantype()
        self.channels: dict = {}
        self.channel_payloads: dict = {}
        self.consts: dict = {}
        self._process_decls: dict = {}
        self.machines: dict = {}
        bindings = dict(bindings or {})

        const_eval = self._const_eval

        for item in ast.items:
            if isinstance(item, N.ConstDecl):
                if item.name in bindings:
                    self.consts[item.name] = bindings.pop(item.name)
                elif item.value is not None:
                    fn = _compile_expr(item.value, _Ctx(self))
                    self.consts[item.name] = fn({}, None)
                else:
                    self.consts[item.name] = UNBOUND
            elif isinstance(item, N.ChannelDecl):
                payloads = _type_payloads(item.payload, const_eval)
                arity = len(payloads) if len(payloads) >= 2 else None
                single = payloads[0].domain if len(payloads) == 1 else None
                ch = self.chantype.channel(item.name, domain=single, arity=arity)
                self.channels[item.name] = ch
                self.channel_payloads[item.name] = payloads
        if bindings:
            unknown = ", ".join(sorted(bindings))
            raise ElabError(f"--const binds unknown constant(s): {unknown}")

        for item in ast.items:
            if isinstance(item, N.ProcessDecl):
                self._process_decls[item.name] = item

        cycle = _find_unguarded_cycle(self._process_decls)
        if cycle:
            raise ElabError("unguarded recursion through "
                            + " -> ".join(cycle),
                            self._process_decls[cycle[0]].span)

        self.processes: dict = {}
        for name, decl in self._process_decls.items():
            self.processes[name] = ProcessDef(self, decl)

        for item in ast.items:
            if isinstance(item, N.ZMachineDecl):
                self.machines[item.name] = _elaborate_machine(self, item)

        self._instances: dict = {}

    def _const_eval(self, expr):
        fn = _compile_expr(expr, _Ctx(self))
        return fn({}, None)

    # -- lookups -------------------------------------------------------------

    def targets(self) -> tuple:
        return tuple(self.processes) + tuple(self.machines)

    def instantiate(self, name: str, args=()) -> ITree:
        key = (name, tuple(args))
        if key not in self._instances:
            self._instances[key] = self.processes[name].itree(tuple(args))
        return self._instances[key]

    def itree(self, target: str, args=()) -> ITree:
        """Build the tree for a named process or machine."""
        if target in self.processes:
            return self.instantiate(target, args)
        if target in self.machines:
            if args:
                raise ElabError(f"machine {target} takes no arguments")
            from ..zmachine import machine_semantics
            return machine_semantics(self.machines[target])
        raise ElabError(f"unknown target {target!r}; model defines: "
                        + ", ".join(self.targets()))

    def alphabet_events(self) -> tuple:
        """Events of every declared channel with a finite domain."""
        out = []
        for name, ch in self.channels.items():
            payloads = self.channel_payloads[name]
            if all(p.finite for p in payloads):
                domains = [p.domain for p in payloads]
                for combo in itertools.product(*domains):
                    payload = combo if len(domains) >= 2 else combo[0]
                    out.append(ch.build(payload))
        return tuple(out)


def elaborate(ast: N.Model, bindings: Optional[dict] = None) -> Model:
    """Elaborate a parsed model; ``bindings`` assigns abstract constants."""
    return Model(ast, bindings)


def load_model(source: str, bindings: Optional[dict] = None) -> Model:
    """Parse and elaborate model text."""
    return elaborate(parse_model(source), bindings)


class _NoModel:
    consts: dict = {}


def eval_literal(text: str):
    """Parse and evaluate a closed expression (CLI constants, arguments)."""
    from .parser import parse_expression
    expr = parse_expression(text)
    fn = _compile_expr(expr, _Ctx(_NoModel()))
    return fn({}, None)
