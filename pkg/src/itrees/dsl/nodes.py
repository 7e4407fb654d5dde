"""AST for the .itm model language.

Every node carries a source span (line, col) which is excluded from
equality so that printing and re-parsing yields an equal tree.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Any, Optional, Tuple

__all__ = [
    "Span", "Node",
    "EInt", "EBool", "EName", "ECall", "EBin", "EUn", "EList", "ESet",
    "ERange", "ETuple",
    "TInt", "TBool", "TList", "TSetLit", "TRange", "TTuple",
    "PSkip", "PStop", "PDiv", "PSeq", "PExtChoice", "PIntChoice", "PPar",
    "PInterleave", "PIndexedInterleave", "PHide", "PPrefix", "PGuard",
    "PAssign", "PIf", "PWhile", "PRef",
    "ChannelDecl", "ConstDecl", "ProcessDecl",
    "FieldDecl", "DomainDecl", "AssignItem", "OpSection", "OperationDecl",
    "ZMachineDecl", "Model", "node_to_json",
]

Span = Tuple[int, int]


def _span_field():
    return field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Node:
    pass


# --- expressions -----------------------------------------------------------

@dataclass(frozen=True)
class EInt(Node):
    value: int
    span: Span = _span_field()


@dataclass(frozen=True)
class EBool(Node):
    value: bool
    span: Span = _span_field()


@dataclass(frozen=True)
class EName(Node):
    name: str
    span: Span = _span_field()


@dataclass(frozen=True)
class ECall(Node):
    func: str
    args: tuple
    span: Span = _span_field()


@dataclass(frozen=True)
class EBin(Node):
    op: str
    left: Node
    right: Node
    span: Span = _span_field()


@dataclass(frozen=True)
class EUn(Node):
    op: str
    operand: Node
    span: Span = _span_field()


@dataclass(frozen=True)
class EList(Node):
    items: tuple
    span: Span = _span_field()


@dataclass(frozen=True)
class ESet(Node):
    items: tuple
    span: Span = _span_field()


@dataclass(frozen=True)
class ERange(Node):
    lo: Node
    hi: Node
    span: Span = _span_field()


@dataclass(frozen=True)
class ETuple(Node):
    items: tuple
    span: Span = _span_field()


# --- payload types ---------------------------------------------------------

@dataclass(frozen=True)
class TInt(Node):
    span: Span = _span_field()


@dataclass(frozen=True)
class TBool(Node):
    span: Span = _span_field()


@dataclass(frozen=True)
class TList(Node):
    elem: Node
    span: Span = _span_field()


@dataclass(frozen=True)
class TSetLit(Node):
    items: tuple
    span: Span = _span_field()


@dataclass(frozen=True)
class TRange(Node):
    lo: Node
    hi: Node
    span: Span = _span_field()


@dataclass(frozen=True)
class TTuple(Node):
    parts: tuple
    span: Span = _span_field()


# --- processes -------------------------------------------------------------

@dataclass(frozen=True)
class PSkip(Node):
    span: Span = _span_field()


@dataclass(frozen=True)
class PStop(Node):
    span: Span = _span_field()


@dataclass(frozen=True)
class PDiv(Node):
    span: Span = _span_field()


@dataclass(frozen=True)
class PSeq(Node):
    left: Node
    right: Node
    span: Span = _span_field()


@dataclass(frozen=True)
class PExtChoice(Node):
    left: Node
    right: Node
    span: Span = _span_field()


@dataclass(frozen=True)
class PIntChoice(Node):
    left: Node
    right: Node
    span: Span = _span_field()


@dataclass(frozen=True)
class PPar(Node):
    left: Node
    channels: tuple            # channel names to synchronise on
    right: Node
    span: Span = _span_field()


@dataclass(frozen=True)
class PInterleave(Node):
    left: Node
    right: Node
    span: Span = _span_field()


@dataclass(frozen=True)
class PIndexedInterleave(Node):
    var: str
    values: Node               # finite set expression
    body: Node
    span: Span = _span_field()


@dataclass(frozen=True)
class PHide(Node):
    proc: Node
    channels: tuple
    span: Span = _span_field()


@dataclass(frozen=True)
class PPrefix(Node):
    """Channel prefix: dotted components, then an input/output/sync part.

    kind: "out" (payload expr), "in" (bound var + optional value set) or
    "sync" (bare channel event).
    """

    channel: str
    dotargs: tuple
    kind: str
    payload: Optional[Node]    # expression, for "out"
    var: Optional[str]         # bound name, for "in"
    var_set: Optional[Node]    # optional value-set expression, for "in"
    cont: Node
    span: Span = _span_field()


@dataclass(frozen=True)
class PGuard(Node):
    cond: Node
    proc: Node
    span: Span = _span_field()


@dataclass(frozen=True)
class PAssign(Node):
    var: str
    expr: Node
    span: Span = _span_field()


@dataclass(frozen=True)
class PIf(Node):
    cond: Node
    then: Node
    orelse: Node
    span: Span = _span_field()


@dataclass(frozen=True)
class PWhile(Node):
    cond: Node
    invariant: Optional[Node]
    variant: Optional[Node]
    body: Node
    span: Span = _span_field()


@dataclass(frozen=True)
class PRef(Node):
    name: str
    args: tuple
    span: Span = _span_field()


# --- declarations ----------------------------------------------------------

@dataclass(frozen=True)
class ChannelDecl(Node):
    name: str
    payload: Node
    span: Span = _span_field()


@dataclass(frozen=True)
class ConstDecl(Node):
    name: str
    value: Optional[Node]
    span: Span = _span_field()


@dataclass(frozen=True)
class ProcessDecl(Node):
    name: str
    params: tuple
    body: Node
    span: Span = _span_field()


@dataclass(frozen=True)
class FieldDecl(Node):
    name: str
    payload: Node
    span: Span = _span_field()


@dataclass(frozen=True)
class DomainDecl(Node):
    name: str
    values: Node
    span: Span = _span_field()


@dataclass(frozen=True)
class AssignItem(Node):
    var: str
    expr: Node
    span: Span = _span_field()


@dataclass(frozen=True)
class OpSection(Node):
    kind: str                  # "params" | "pre" | "update" | "emit"
    params: tuple = ()         # (name, set expr) pairs for "params"
    expr: Optional[Node] = None
    assigns: tuple = ()
    span: Span = _span_field()


@dataclass(frozen=True)
class OperationDecl(Node):
    name: str
    sections: tuple
    span: Span = _span_field()


@dataclass(frozen=True)
class ZMachineDecl(Node):
    name: str
    state: tuple               # FieldDecl*
    domains: tuple             # DomainDecl*
    invariants: tuple          # expressions
    init: tuple                # AssignItem*
    operations: tuple          # OperationDecl*
    span: Span = _span_field()


@dataclass(frozen=True)
class Model(Node):
    items: tuple
    span: Span = _span_field()


def node_to_json(node):
    """Nested-dict AST dump, including spans, for tooling."""
    if isinstance(node, Node):
        out = {"node": type(node).__name__}
        for f in fields(node):
            out[f.name] = node_to_json(getattr(node, f.name))
        return out
    if isinstance(node, tuple):
        return [node_to_json(x) for x in node]
    return node
