"""Verilog-2005 frontend for a fixed synthesizable subset."""
from .lexer import Token, tokenize
from .nodes import (
    AstModule,
    AlwaysBlock,
    BlockingAssign,
    Begin,
    Binary,
    Case,
    CaseArm,
    Concat,
    Const,
    ContinuousAssign,
    Decl,
    If,
    Instance,
    NonBlockingAssign,
    Port,
    Ref,
    Replicate,
    Select,
    Ternary,
    Unary,
)
from .parser import parse, parse_source
from .printer import pretty_print

__all__ = [
    "Token", "tokenize", "parse", "parse_source", "pretty_print",
    "AstModule", "Port", "Decl", "ContinuousAssign", "AlwaysBlock", "Instance",
    "BlockingAssign", "NonBlockingAssign", "If", "Case", "CaseArm", "Begin",
    "Ref", "Const", "Unary", "Binary", "Ternary", "Concat", "Replicate", "Select",
]
