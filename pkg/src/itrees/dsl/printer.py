"""Canonical printer for .itm ASTs.

Parenthesisation is re-derived from operator precedence, so printing then
re-parsing returns an equal AST (spans aside).
"""

from __future__ import annotations

from . import nodes as N

__all__ = ["print_model", "print_proc", "print_expr", "print_type"]


# Expression precedence levels, loosest first.
_E_LEVEL = {
    "or": 1, "and": 2,
    "=": 4, "!=": 4, "<": 4, "<=": 4, ">": 4, ">=": 4, "in": 4,
    "+": 5, "-": 5, "++": 5,
    "*": 6, "div": 6, "mod": 6,
}


def print_expr(e, level: int = 0) -> str:
    if isinstance(e, N.EInt):
        return str(e.value)
    if isinstance(e, N.EBool):
        return "true" if e.value else "false"
    if isinstance(e, N.EName):
        return e.name
    if isinstance(e, N.ECall):
        return e.func + "(" + ", ".join(print_expr(a) for a in e.args) + ")"
    if isinstance(e, N.EUn):
        inner = print_expr(e.operand, 7)
        return ("not " if e.op == "not" else "-") + inner
    if isinstance(e, N.EBin):
        mine = _E_LEVEL[e.op]
        # binary operators associate left; right operand printed one tighter
        text = f"{print_expr(e.left, mine)} {e.op} {print_expr(e.right, mine + 1)}"
        return f"({text})" if mine < level else text
    if isinstance(e, N.EList):
        return "[" + ", ".join(print_expr(x) for x in e.items) + "]"
    if isinstance(e, N.ESet):
        return "{" + ", ".join(print_expr(x) for x in e.items) + "}"
    if isinstance(e, N.ERange):
        return "{" + print_expr(e.lo) + ".." + print_expr(e.hi) + "}"
    if isinstance(e, N.ETuple):
        return "(" + ", ".join(print_expr(x) for x in e.items) + ")"
    raise TypeError(f"not an expression node: {e!r}")


def print_type(t) -> str:
    if isinstance(t, N.TInt):
        return "int"
    if isinstance(t, N.TBool):
        return "bool"
    if isinstance(t, N.TList):
        return print_type(t.elem) + " list"
    if isinstance(t, N.TSetLit):
        return "{" + ", ".join(print_expr(x) for x in t.items) + "}"
    if isinstance(t, N.TRange):
        return "{" + print_expr(t.lo) + ".." + print_expr(t.hi) + "}"
    if isinstance(t, N.TTuple):
        return " * ".join(print_type(p) for p in t.parts)
    raise TypeError(f"not a type node: {t!r}")


# Process precedence levels, loosest first.
_SEQ, _CHOICE, _PAR, _HIDE, _PREFIX = 1, 2, 3, 4, 5


def print_proc(p, level: int = 0) -> str:
    text, mine = _proc_text(p)
    return f"({text})" if mine < level else text


def _proc_text(p):
    if isinstance(p, N.PSkip):
        return "skip", _PREFIX
    if isinstance(p, N.PStop):
        return "stop", _PREFIX
    if isinstance(p, N.PDiv):
        return "div", _PREFIX
    if isinstance(p, N.PSeq):
        return f"{print_proc(p.left, _SEQ)} ; {print_proc(p.right, _SEQ + 1)}", _SEQ
    if isinstance(p, N.PExtChoice):
        return f"{print_proc(p.left, _CHOICE)} [] {print_proc(p.right, _CHOICE + 1)}", _CHOICE
    if isinstance(p, N.PIntChoice):
        return f"{print_proc(p.left, _CHOICE)} |~| {print_proc(p.right, _CHOICE + 1)}", _CHOICE
    if isinstance(p, N.PPar):
        chans = "{" + ", ".join(p.channels) + "}"
        return f"{print_proc(p.left, _PAR)} || {chans} {print_proc(p.right, _PAR + 1)}", _PAR
    if isinstance(p, N.PInterleave):
        return f"{print_proc(p.left, _PAR)} ||| {print_proc(p.right, _PAR + 1)}", _PAR
    if isinstance(p, N.PIndexedInterleave):
        return (f"||| {p.var} in {print_expr(p.values)} @ {print_proc(p.body, _PREFIX)}",
                _PREFIX)
    if isinstance(p, N.PHide):
        chans = "{" + ", ".join(p.channels) + "}"
        return f"{print_proc(p.proc, _HIDE)} \\ {chans}", _HIDE
    if isinstance(p, N.PGuard):
        return f"{print_expr(p.cond, 5)} & {print_proc(p.proc, _PREFIX)}", _PREFIX
    if isinstance(p, N.PAssign):
        return f"{p.var} := {print_expr(p.expr)}", _PREFIX
    if isinstance(p, N.PIf):
        return (f"if {print_expr(p.cond)} then {print_proc(p.then, _CHOICE)} "
                f"else {print_proc(p.orelse, _CHOICE)}", _PREFIX)
    if isinstance(p, N.PWhile):
        inv = f" invariant {print_expr(p.invariant)}" if p.invariant is not None else ""
        var = f" variant {print_expr(p.variant)}" if p.variant is not None else ""
        return (f"while {print_expr(p.cond)}{inv}{var} do {print_proc(p.body)} od",
                _PREFIX)
    if isinstance(p, N.PRef):
        if p.args:
            return p.name + "(" + ", ".join(print_expr(a) for a in p.args) + ")", _PREFIX
        return p.name, _PREFIX
    if isinstance(p, N.PPrefix):
        head = p.channel + "".join("." + print_expr(a, 7) for a in p.dotargs)
        if p.kind == "out":
            head += "!" + print_expr(p.payload, 5)
        elif p.kind == "in":
            head += "?" + p.var
            if p.var_set is not None:
                head += ":" + print_expr(p.var_set, 5)
        return f"{head} -> {print_proc(p.cont, _PREFIX)}", _PREFIX
    raise TypeError(f"not a process node: {p!r}")


def _print_zmachine(z: N.ZMachineDecl) -> str:
    lines = [f"zmachine {z.name}"]
    lines.append("  state { " + " ; ".join(
        f"{f.name} : {print_type(f.payload)}" for f in z.state) + " }")
    if z.domains:
        lines.append("  domains { " + " ; ".join(
            f"{d.name} in {print_expr(d.values)}" for d in z.domains) + " }")
    if z.invariants:
        lines.append("  invariant { " + " ; ".join(
            print_expr(e) for e in z.invariants) + " }")
    lines.append("  init { " + " ; ".join(
        f"{a.var} := {print_expr(a.expr)}" for a in z.init) + " }")
    lines.append("  operations {")
    for op in z.operations:
        parts = []
        for sec in op.sections:
            if sec.kind == "params":
                parts.append("params " + ", ".join(
                    f"{n} in {print_expr(e)}" for n, e in sec.params))
            elif sec.kind == "pre":
                parts.append("pre " + print_expr(sec.expr))
            elif sec.kind == "update":
                parts.append("update { " + " ; ".join(
                    f"{a.var} := {print_expr(a.expr)}" for a in sec.assigns) + " }")
            else:
                parts.append("emit " + print_expr(sec.expr))
        lines.append(f"    {op.name} {{ " + " ; ".join(parts) + " }")
    lines.append("  }")
    return "\n".join(lines)


def print_model(model: N.Model) -> str:
    chunks = []
    for item in model.items:
        if isinstance(item, N.ChannelDecl):
            chunks.append(f"channel {item.name} : {print_type(item.payload)}")
        elif isinstance(item, N.ConstDecl):
            if item.value is None:
                chunks.append(f"const {item.name}")
            else:
                chunks.append(f"const {item.name} = {print_expr(item.value)}")
        elif isinstance(item, N.ProcessDecl):
            params = "(" + ", ".join(item.params) + ")" if item.params else ""
            chunks.append(f"process {item.name}{params} =\n  {print_proc(item.body)}")
        elif isinstance(item, N.ZMachineDecl):
            chunks.append(_print_zmachine(item))
        else:
            raise TypeError(f"not a model item: {item!r}")
    return "\n\n".join(chunks) + "\n"
