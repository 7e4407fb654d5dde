"""The .itm model language: parser, printer, and elaborator."""

from .lexer import LexError, tokenize
from .nodes import Model as ModelAST, node_to_json
from .parser import ParseError, parse_expression, parse_model
from .printer import print_expr, print_model, print_proc, print_type
from .elaborator import (ElabError, Model, ModelRuntimeError, ProcessDef,
                         UNSET, elaborate, eval_literal, load_model)

__all__ = [
    "LexError", "tokenize", "ModelAST", "node_to_json",
    "ParseError", "parse_expression", "parse_model",
    "print_expr", "print_model", "print_proc", "print_type",
    "ElabError", "Model", "ModelRuntimeError", "ProcessDef", "UNSET",
    "elaborate", "load_model",
]
