"""Recursive-descent parser for the .itm model language.

Operator precedence, loosest to tightest: ``;`` then the choice operators
``[]`` / ``|~|`` then parallel ``||`` / ``|||`` then hiding ``\\`` then
prefix/guard.  The parser backtracks only at the prefix level, to tell a
guard expression from an assignment, a channel prefix or a process
reference; the error position reported is the farthest point any attempt
reached, together with the tokens that would have allowed it to continue.
"""

from __future__ import annotations

from .lexer import LexError, Token, tokenize
from . import nodes as N

__all__ = ["ParseError", "parse_model", "parse_expression"]


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int, expected=()):
        self.message = message
        self.line = line
        self.col = col
        self.expected = tuple(sorted(set(expected)))
        detail = f"{line}:{col}: {message}"
        if self.expected:
            detail += " (expected " + ", ".join(self.expected) + ")"
        super().__init__(detail)


class _Fail(Exception):
    """Internal backtracking signal; never escapes the parser."""


class Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0
        self.farthest = 0
        self.expected_at_farthest: set = set()

    # -- token plumbing -----------------------------------------------------

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.peek()
        return t.kind == kind and (text is None or t.text == text)

    def _note(self, expectation: str) -> None:
        if self.pos > self.farthest:
            self.farthest = self.pos
            self.expected_at_farthest = {expectation}
        elif self.pos == self.farthest:
            self.expected_at_farthest.add(expectation)

    def take(self, kind: str, text: str | None = None) -> Token:
        if self.at(kind, text):
            t = self.peek()
            self.pos += 1
            return t
        self._note(text or kind)
        raise _Fail()

    def accept(self, kind: str, text: str | None = None):
        if self.at(kind, text):
            t = self.peek()
            self.pos += 1
            return t
        self._note(text or kind)
        return None

    def error_here(self, message: str) -> ParseError:
        t = self.tokens[min(self.farthest, len(self.tokens) - 1)]
        return ParseError(f"{message}, found {t.text or 'end of input'!r}",
                          t.line, t.col, self.expected_at_farthest)

    def span(self) -> tuple:
        t = self.peek()
        return (t.line, t.col)

    # -- model items --------------------------------------------------------

    def parse_model(self) -> N.Model:
        items = []
        sp = self.span()
        while not self.at("eof"):
            items.append(self.parse_item())
        return N.Model(tuple(items), span=sp)

    def parse_item(self):
        sp = self.span()
        if self.accept("keyword", "channel"):
            name = self.take("name").text
            self.take(":")
            payload = self.parse_type()
            return N.ChannelDecl(name, payload, span=sp)
        if self.accept("keyword", "const"):
            name = self.take("name").text
            value = None
            if self.accept("="):
                value = self.parse_expr()
            return N.ConstDecl(name, value, span=sp)
        if self.accept("keyword", "process"):
            name = self.take("name").text
            params = ()
            if self.accept("("):
                ps = [self.take("name").text]
                while self.accept(","):
                    ps.append(self.take("name").text)
                self.take(")")
                params = tuple(ps)
            self.take("=")
            body = self.parse_proc()
            return N.ProcessDecl(name, params, body, span=sp)
        if self.accept("keyword", "zmachine"):
            return self.parse_zmachine(sp)
        self._note("channel, const, process or zmachine")
        raise self.error_here("expected a declaration")

    # -- types --------------------------------------------------------------

    def parse_type(self):
        sp = self.span()
        parts = [self.parse_base_type()]
        while self.accept("*"):
            parts.append(self.parse_base_type())
        if len(parts) == 1:
            return parts[0]
        return N.TTuple(tuple(parts), span=sp)

    def parse_base_type(self):
        sp = self.span()
        if self.accept("keyword", "int"):
            t = N.TInt(span=sp)
        elif self.accept("keyword", "bool"):
            t = N.TBool(span=sp)
        elif self.at("{"):
            t = self.parse_set_type()
        else:
            self._note("a payload type")
            raise self.error_here("expected a payload type")
        while self.accept("keyword", "list"):
            t = N.TList(t, span=sp)
        return t

    def parse_set_type(self):
        sp = self.span()
        self.take("{")
        first = self.parse_expr()
        if self.accept(".."):
            hi = self.parse_expr()
            self.take("}")
            return N.TRange(first, hi, span=sp)
        items = [first]
        while self.accept(","):
            items.append(self.parse_expr())
        self.take("}")
        return N.TSetLit(tuple(items), span=sp)

    # -- zmachines ------------------------------------------------------------

    def parse_zmachine(self, sp):
        name = self.take("name").text
        state = domains = invariants = init = operations = None
        while True:
            if self.accept("keyword", "state"):
                state = self._brace_list(self.parse_field_decl)
            elif self.accept("keyword", "domains"):
                domains = self._brace_list(self.parse_domain_decl)
            elif self.accept("keyword", "invariant"):
                invariants = self._brace_list(self.parse_expr)
            elif self.accept("keyword", "init"):
                init = self._brace_list(self.parse_assign_item)
            elif self.accept("keyword", "operations"):
                operations = self._brace_ops()
            else:
                break
        missing = [label for label, part in
                   (("state", state), ("init", init), ("operations", operations))
                   if part is None]
        if missing:
            raise self.error_here(f"zmachine {name} is missing " + ", ".join(missing) + " block(s)")
        return N.ZMachineDecl(name, state, domains or (), invariants or (),
                              init, operations, span=sp)

    def _brace_list(self, parse_one):
        self.take("{")
        items = [parse_one()]
        while self.accept(";"):
            if self.at("}"):
                break
            items.append(parse_one())
        self.take("}")
        return tuple(items)

    def parse_field_decl(self):
        sp = self.span()
        name = self.take("name").text
        self.take(":")
        return N.FieldDecl(name, self.parse_type(), span=sp)

    def parse_domain_decl(self):
        sp = self.span()
        name = self.take("name").text
        self.take("keyword", "in")
        return N.DomainDecl(name, self.parse_expr(), span=sp)

    def parse_assign_item(self):
        sp = self.span()
        name = self.take("name").text
        self.take(":=")
        return N.AssignItem(name, self.parse_expr(), span=sp)

    def _brace_ops(self):
        self.take("{")
        ops = []
        while not self.at("}"):
            ops.append(self.parse_operation())
        self.take("}")
        return tuple(ops)

    def parse_operation(self):
        sp = self.span()
        name = self.take("name").text
        self.take("{")
        sections = [self.parse_op_section()]
        while self.accept(";"):
            if self.at("}"):
                break
            sections.append(self.parse_op_section())
        self.take("}")
        return N.OperationDecl(name, tuple(sections), span=sp)

    def parse_op_section(self):
        sp = self.span()
        if self.accept("keyword", "params"):
            params = [self._parse_param()]
            while self.accept(","):
                params.append(self._parse_param())
            return N.OpSection("params", params=tuple(params), span=sp)
        if self.accept("keyword", "pre"):
            return N.OpSection("pre", expr=self.parse_expr(), span=sp)
        if self.accept("keyword", "update"):
            assigns = self._brace_list(self.parse_assign_item)
            return N.OpSection("update", assigns=assigns, span=sp)
        if self.accept("keyword", "emit"):
            return N.OpSection("emit", expr=self.parse_expr(), span=sp)
        self._note("params, pre, update or emit")
        raise self.error_here("expected an operation section")

    def _parse_param(self):
        name = self.take("name").text
        self.take("keyword", "in")
        return (name, self.parse_expr())

    # -- processes ------------------------------------------------------------

    def parse_proc(self):
        sp = self.span()
        left = self.parse_choice()
        while self.accept(";"):
            right = self.parse_choice()
            left = N.PSeq(left, right, span=sp)
        return left

    def parse_choice(self):
        sp = self.span()
        left = self.parse_par()
        while True:
            if self.accept("[]"):
                left = N.PExtChoice(left, self.parse_par(), span=sp)
            elif self.accept("|~|"):
                left = N.PIntChoice(left, self.parse_par(), span=sp)
            else:
                return left

    def parse_par(self):
        sp = self.span()
        left = self.parse_hide()
        while True:
            if self.accept("||"):
                chans = self._channel_set()
                left = N.PPar(left, chans, self.parse_hide(), span=sp)
            elif self.accept("|||"):
                left = N.PInterleave(left, self.parse_hide(), span=sp)
            else:
                return left

    def _channel_set(self):
        self.take("{")
        names = []
        if not self.at("}"):
            names.append(self.take("name").text)
            while self.accept(","):
                names.append(self.take("name").text)
        self.take("}")
        return tuple(names)

    def parse_hide(self):
        sp = self.span()
        p = self.parse_prefix()
        while self.accept("\\"):
            chans = self._channel_set()
            p = N.PHide(p, chans, span=sp)
        return p

    def parse_prefix(self):
        sp = self.span()
        if self.accept("keyword", "skip"):
            return N.PSkip(span=sp)
        if self.accept("keyword", "stop"):
            return N.PStop(span=sp)
        if self.accept("keyword", "div"):
            return N.PDiv(span=sp)
        if self.accept("keyword", "if"):
            cond = self.parse_expr()
            self.take("keyword", "then")
            then = self.parse_choice()
            self.take("keyword", "else")
            orelse = self.parse_choice()
            return N.PIf(cond, then, orelse, span=sp)
        if self.accept("keyword", "while"):
            cond = self.parse_expr()
            invariant = variant = None
            if self.accept("keyword", "invariant"):
                invariant = self.parse_expr()
            if self.accept("keyword", "variant"):
                variant = self.parse_expr()
            self.take("keyword", "do")
            body = self.parse_proc()
            self.take("keyword", "od")
            return N.PWhile(cond, invariant, variant, body, span=sp)
        if self.accept("|||"):
            var = self.take("name").text
            self.take("keyword", "in")
            values = self.parse_expr()
            self.take("@")
            body = self.parse_prefix()
            return N.PIndexedInterleave(var, values, body, span=sp)

        # A guard is an expression followed by '&'.  Attempt that reading
        # first; commit once the '&' is seen so errors in the guarded body
        # surface instead of backtracking.
        saved = self.pos
        cond = None
        try:
            cond = self.parse_expr()
            guarded = self.at("&")
        except _Fail:
            guarded = False
        if guarded:
            self.take("&")
            return N.PGuard(cond, self.parse_prefix(), span=sp)
        self.pos = saved

        if self.at("name"):
            name_tok = self.take("name")
            name = name_tok.text
            if self.accept(":="):
                return N.PAssign(name, self.parse_expr(), span=sp)
            if self.at(".") or self.at("!") or self.at("?") or self.at("->"):
                return self._channel_prefix(name, sp)
            args = ()
            if self.accept("("):
                a = [self.parse_expr()]
                while self.accept(","):
                    a.append(self.parse_expr())
                self.take(")")
                args = tuple(a)
            return N.PRef(name, args, span=sp)
        if self.accept("("):
            p = self.parse_proc()
            self.take(")")
            return p
        self._note("a process")
        raise self.error_here("expected a process")

    def _channel_prefix(self, name, sp):
        dotargs = []
        while self.accept("."):
            dotargs.append(self.parse_expr_atom())
        kind, payload, var, var_set = "sync", None, None, None
        if self.accept("!"):
            kind = "out"
            payload = self.parse_expr()
        elif self.accept("?"):
            kind = "in"
            var = self.take("name").text
            if self.accept(":"):
                var_set = self.parse_expr()
        self.take("->")
        cont = self.parse_prefix()
        return N.PPrefix(name, tuple(dotargs), kind, payload, var, var_set,
                         cont, span=sp)

    # -- expressions ----------------------------------------------------------

    def parse_expr(self):
        return self.parse_or()

    def parse_or(self):
        sp = self.span()
        left = self.parse_and()
        while self.accept("keyword", "or"):
            left = N.EBin("or", left, self.parse_and(), span=sp)
        return left

    def parse_and(self):
        sp = self.span()
        left = self.parse_not()
        while self.accept("keyword", "and"):
            left = N.EBin("and", left, self.parse_not(), span=sp)
        return left

    def parse_not(self):
        sp = self.span()
        if self.accept("keyword", "not"):
            return N.EUn("not", self.parse_not(), span=sp)
        return self.parse_cmp()

    _CMP = ("=", "!=", "<", "<=", ">", ">=")

    def parse_cmp(self):
        sp = self.span()
        left = self.parse_add()
        for op in self._CMP:
            if self.accept(op):
                return N.EBin(op, left, self.parse_add(), span=sp)
        if self.accept("keyword", "in"):
            return N.EBin("in", left, self.parse_add(), span=sp)
        return left

    def parse_add(self):
        sp = self.span()
        left = self.parse_mul()
        while True:
            if self.accept("+"):
                left = N.EBin("+", left, self.parse_mul(), span=sp)
            elif self.accept("-"):
                left = N.EBin("-", left, self.parse_mul(), span=sp)
            elif self.accept("++"):
                left = N.EBin("++", left, self.parse_mul(), span=sp)
            else:
                return left

    def parse_mul(self):
        sp = self.span()
        left = self.parse_unary()
        while True:
            if self.accept("*"):
                left = N.EBin("*", left, self.parse_unary(), span=sp)
            elif self.accept("keyword", "div"):
                left = N.EBin("div", left, self.parse_unary(), span=sp)
            elif self.accept("keyword", "mod"):
                left = N.EBin("mod", left, self.parse_unary(), span=sp)
            else:
                return left

    def parse_unary(self):
        sp = self.span()
        if self.accept("-"):
            return N.EUn("-", self.parse_unary(), span=sp)
        return self.parse_expr_atom()

    def parse_expr_atom(self):
        sp = self.span()
        if self.at("int"):
            return N.EInt(int(self.take("int").text), span=sp)
        if self.accept("keyword", "true"):
            return N.EBool(True, span=sp)
        if self.accept("keyword", "false"):
            return N.EBool(False, span=sp)
        if self.at("name"):
            name = self.take("name").text
            if self.accept("("):
                args = []
                if not self.at(")"):
                    args.append(self.parse_expr())
                    while self.accept(","):
                        args.append(self.parse_expr())
                self.take(")")
                return N.ECall(name, tuple(args), span=sp)
            return N.EName(name, span=sp)
        if self.accept("("):
            first = self.parse_expr()
            if self.accept(","):
                items = [first, self.parse_expr()]
                while self.accept(","):
                    items.append(self.parse_expr())
                self.take(")")
                return N.ETuple(tuple(items), span=sp)
            self.take(")")
            return first
        if self.accept("["):
            items = []
            if not self.at("]"):
                items.append(self.parse_expr())
                while self.accept(","):
                    items.append(self.parse_expr())
            self.take("]")
            return N.EList(tuple(items), span=sp)
        if self.accept("[]"):
            # '[]' lexes as one token; in expression position it is the
            # empty list literal.
            return N.EList((), span=sp)
        if self.accept("{"):
            if self.accept("}"):
                return N.ESet((), span=sp)
            first = self.parse_expr()
            if self.accept(".."):
                hi = self.parse_expr()
                self.take("}")
                return N.ERange(first, hi, span=sp)
            items = [first]
            while self.accept(","):
                items.append(self.parse_expr())
            self.take("}")
            return N.ESet(tuple(items), span=sp)
        self._note("an expression")
        raise _Fail()


def parse_model(text: str) -> N.Model:
    """Parse model text to an AST, or raise :class:`ParseError` with the
    position and expected-token set of the first error."""
    try:
        tokens = tokenize(text)
    except LexError as e:
        raise ParseError(e.message, e.line, e.col) from None
    parser = Parser(tokens)
    try:
        model = parser.parse_model()
    except _Fail:
        raise parser.error_here("syntax error") from None
    except ParseError:
        raise
    names: dict = {}
    for item in model.items:
        key = (type(item).__name__, getattr(item, "name", None))
        if key[1] is not None and key in names:
            raise ParseError(f"duplicate definition of {key[1]!r}",
                             item.span[0], item.span[1])
        names[key] = item
    return model


def parse_expression(text: str):
    """Parse a standalone expression (used for CLI constant/argument values)."""
    try:
        tokens = tokenize(text)
    except LexError as e:
        raise ParseError(e.message, e.line, e.col) from None
    parser = Parser(tokens)
    try:
        expr = parser.parse_expr()
        parser.take("eof")
    except _Fail:
        raise parser.error_here("syntax error in expression") from None
    return expr
