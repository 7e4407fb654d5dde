"""Tokeniser for the .itm model language."""

from __future__ import annotations

from dataclasses import dataclass

__all__ = ["Token", "LexError", "tokenize", "KEYWORDS"]


KEYWORDS = {
    "channel", "const", "process", "zmachine",
    "state", "domains", "invariant", "variant", "init", "operations",
    "params", "pre", "update", "emit",
    "skip", "stop", "div", "mod",
    "if", "then", "else", "while", "do", "od",
    "in", "and", "or", "not", "true", "false",
    "int", "bool", "list",
}

# Longest first so e.g. '|||' never lexes as '||' '|'.
_SYMBOLS = [
    "|||", "|~|", ":=", "->", "[]", "||", "++", "..", "<=", ">=", "!=",
    "(", ")", "[", "]", "{", "}", ",", ";", ":", "=", "<", ">", "+", "-",
    "*", "!", "?", "&", "\\", ".", "@",
]


@dataclass(frozen=True)
class Token:
    kind: str      # "name" | "int" | "keyword" | symbol text | "eof"
    text: str
    line: int
    col: int

    def __repr__(self):
        return f"{self.kind}({self.text!r})@{self.line}:{self.col}"


class LexError(Exception):
    def __init__(self, message: str, line: int, col: int):
        self.message = message
        self.line = line
        self.col = col
        super().__init__(f"{line}:{col}: {message}")


def tokenize(text: str) -> list:
    tokens = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch.isdigit():
            start = i
            while i < n and text[i].isdigit():
                i += 1
            tokens.append(Token("int", text[start:i], line, col))
            col += i - start
            continue
        if ch.isalpha() or ch == "_":
            start = i
            while i < n and (text[i].isalnum() or text[i] == "_"):
                i += 1
            word = text[start:i]
            kind = "keyword" if word in KEYWORDS else "name"
            tokens.append(Token(kind, word, line, col))
            col += i - start
            continue
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                tokens.append(Token(sym, sym, line, col))
                i += len(sym)
                col += len(sym)
                break
        else:
            raise LexError(f"unexpected character {ch!r}", line, col)
    tokens.append(Token("eof", "", line, col))
    return tokens
