"""Recursive-descent parser for the supported Verilog-2005 subset.

Supported: one module per file, ANSI or non-ANSI port lists, wire/reg/
parameter/integer declarations, continuous assigns, always blocks with
posedge/negedge/star sensitivity, blocking and non-blocking assignment,
if/else, case, module instances, and the usual expression operators.
Anything else raises UnsupportedConstructError instead of mis-parsing.
"""
from __future__ import annotations

from ..errors import ParseError, UnsupportedConstructError
from .lexer import Token, tokenize
from .nodes import (
    AlwaysBlock, AstModule, Begin, Binary, BlockingAssign, Case, CaseArm,
    Concat, Connection, Const, ContinuousAssign, Decl, If, Instance,
    NonBlockingAssign, Pos, Port, Range, Ref, Replicate, Select, SensItem,
    Ternary, Unary,
)

_UNSUPPORTED_ITEMS = {
    "initial", "function", "task", "generate", "genvar", "for", "while",
    "repeat", "forever", "fork", "defparam", "specify", "localparam",
    "real", "time", "event", "wait", "force", "release", "deassign",
    "tri", "supply0", "supply1", "casex", "casez", "signed",
}

# binary operators from loosest to tightest; ternary sits below all of these
_BINARY_LEVELS = (
    ("||",),
    ("&&",),
    ("|",),
    ("^", "~^", "^~"),
    ("&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("<<", ">>", "<<<", ">>>"),
    ("+", "-"),
    ("*", "/", "%"),
)

_UNARY_OPS = {"~", "!", "-", "+", "&", "|", "^", "~&", "~|", "~^"}


class _Stream:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.index = 0

    def peek(self, ahead=0) -> Token | None:
        i = self.index + ahead
        return self.tokens[i] if i < len(self.tokens) else None

    def next(self) -> Token:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else None
            raise ParseError("unexpected end of input",
                             last.line if last else 1, last.col if last else 1)
        self.index += 1
        return tok

    def at(self, kind, text=None) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind == kind and (text is None or tok.text == text)

    def accept(self, kind, text=None) -> Token | None:
        if self.at(kind, text):
            return self.next()
        return None

    def expect(self, kind, text=None) -> Token:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else None
            raise ParseError(f"expected {text or kind}, found end of input",
                             last.line if last else 1, last.col if last else 1)
        if tok.kind != kind or (text is not None and tok.text != text):
            raise ParseError(f"expected {text or kind}, found {tok.text!r}",
                             tok.line, tok.col)
        return self.next()

    def pos(self) -> Pos:
        tok = self.peek()
        if tok is None:
            return Pos(0, 0)
        return Pos(tok.line, tok.col)


def parse_source(source: str) -> AstModule:
    """Tokenize and parse a complete module from source text."""
    return parse(tokenize(source))


def parse(tokens: list[Token]) -> AstModule:
    stream = _Stream(tokens)
    module = _parse_module(stream)
    trailing = stream.peek()
    if trailing is not None:
        raise ParseError(f"unexpected token {trailing.text!r} after endmodule",
                         trailing.line, trailing.col)
    return module


def _unsupported(tok: Token):
    raise UnsupportedConstructError(tok.text, tok.line)


def _parse_module(s: _Stream) -> AstModule:
    pos = s.pos()
    s.expect("Keyword", "module")
    name = s.expect("Identifier").text
    module = AstModule(name=name, pos=pos)
    ports_by_name: dict[str, Port] = {}

    if s.accept("Punct", "("):
        if not s.at("Punct", ")"):
            _parse_port_list(s, module, ports_by_name)
        s.expect("Punct", ")")
    s.expect("Punct", ";")

    while not s.at("Keyword", "endmodule"):
        _parse_module_item(s, module, ports_by_name)
    s.expect("Keyword", "endmodule")
    return module


def _parse_port_list(s: _Stream, module: AstModule, ports_by_name: dict):
    direction = None
    width = None
    while True:
        pos = s.pos()
        tok = s.peek()
        if tok is None:
            raise ParseError("unterminated port list", 0, 0)
        if tok.kind == "Keyword" and tok.text in ("input", "output", "inout"):
            direction = s.next().text
            if s.at("Keyword", "wire") or s.at("Keyword", "reg"):
                kind = s.next().text
            else:
                kind = None
            width = _parse_range_opt(s)
            name = s.expect("Identifier").text
            port = Port(name=name, direction=direction, width=width, pos=pos)
            _add_port(module, ports_by_name, port)
            if kind == "reg":
                module.decls.append(Decl(name=name, kind="reg", width=width, pos=pos))
        elif tok.kind == "Identifier":
            name = s.next().text
            # continuation of an ANSI group keeps direction/width; a bare
            # non-ANSI list has direction None until declared in the body
            port = Port(name=name, direction=direction, width=width, pos=pos)
            _add_port(module, ports_by_name, port)
        else:
            raise ParseError(f"expected port, found {tok.text!r}", tok.line, tok.col)
        if not s.accept("Punct", ","):
            break


def _add_port(module: AstModule, ports_by_name: dict, port: Port):
    if port.name in ports_by_name:
        raise ParseError(f"duplicate port {port.name!r}", port.pos.line, port.pos.col)
    module.ports.append(port)
    ports_by_name[port.name] = port


def _parse_module_item(s: _Stream, module: AstModule, ports_by_name: dict):
    tok = s.peek()
    if tok is None:
        raise ParseError("missing endmodule", 0, 0)
    if tok.kind == "Keyword":
        if tok.text in _UNSUPPORTED_ITEMS:
            _unsupported(tok)
        if tok.text in ("input", "output", "inout"):
            _parse_port_decl(s, module, ports_by_name)
            return
        if tok.text in ("wire", "reg", "integer"):
            _parse_net_decl(s, module)
            return
        if tok.text == "parameter":
            _parse_parameter_decl(s, module)
            return
        if tok.text == "assign":
            pos = s.pos()
            s.next()
            target = _parse_lvalue(s)
            s.expect("Operator", "=")
            value = _parse_expr(s)
            s.expect("Punct", ";")
            module.items.append(ContinuousAssign(target=target, value=value, pos=pos))
            return
        if tok.text == "always":
            module.items.append(_parse_always(s))
            return
        raise ParseError(f"unexpected keyword {tok.text!r}", tok.line, tok.col)
    if tok.kind == "Identifier":
        if tok.text.startswith("$"):
            _unsupported(tok)
        module.items.append(_parse_instance(s))
        return
    if tok.kind == "Punct" and tok.text == "#":
        raise UnsupportedConstructError("delay control", tok.line)
    raise ParseError(f"unexpected token {tok.text!r}", tok.line, tok.col)


def _parse_port_decl(s: _Stream, module: AstModule, ports_by_name: dict):
    pos = s.pos()
    direction = s.next().text
    kind = None
    if s.at("Keyword", "wire") or s.at("Keyword", "reg"):
        kind = s.next().text
    width = _parse_range_opt(s)
    while True:
        name_tok = s.expect("Identifier")
        port = ports_by_name.get(name_tok.text)
        if port is None:
            # body-only port declaration; tolerated for fixture convenience
            port = Port(name=name_tok.text, direction=direction, width=width, pos=pos)
            _add_port(module, ports_by_name, port)
        else:
            port.direction = direction
            port.width = width
        if kind == "reg":
            module.decls.append(Decl(name=name_tok.text, kind="reg", width=width, pos=pos))
        if not s.accept("Punct", ","):
            break
    s.expect("Punct", ";")


def _parse_net_decl(s: _Stream, module: AstModule):
    pos = s.pos()
    kind = s.next().text
    width = _parse_range_opt(s) if kind != "integer" else None
    while True:
        name = s.expect("Identifier").text
        init = None
        if s.accept("Operator", "="):
            init = _parse_expr(s)
        module.decls.append(Decl(name=name, kind=kind, width=width, init=init, pos=pos))
        if not s.accept("Punct", ","):
            break
    s.expect("Punct", ";")


def _parse_parameter_decl(s: _Stream, module: AstModule):
    pos = s.pos()
    s.next()
    width = _parse_range_opt(s)
    while True:
        name = s.expect("Identifier").text
        s.expect("Operator", "=")
        init = _parse_expr(s)
        module.decls.append(Decl(name=name, kind="parameter", width=width, init=init, pos=pos))
        if not s.accept("Punct", ","):
            break
    s.expect("Punct", ";")


def _parse_range_opt(s: _Stream) -> Range | None:
    if not s.at("Punct", "["):
        return None
    pos = s.pos()
    s.next()
    msb = _parse_expr(s)
    s.expect("Punct", ":")
    lsb = _parse_expr(s)
    s.expect("Punct", "]")
    return Range(msb=msb, lsb=lsb, pos=pos)


def _parse_always(s: _Stream) -> AlwaysBlock:
    pos = s.pos()
    s.expect("Keyword", "always")
    s.expect("Punct", "@")
    if s.accept("Operator", "*"):
        sensitivity = "*"
    else:
        s.expect("Punct", "(")
        if s.accept("Operator", "*"):
            sensitivity = "*"
        else:
            sensitivity = []
            while True:
                item_pos = s.pos()
                edge = None
                if s.at("Keyword", "posedge") or s.at("Keyword", "negedge"):
                    edge = s.next().text
                signal = s.expect("Identifier").text
                sensitivity.append(SensItem(edge=edge, signal=signal, pos=item_pos))
                if s.accept("Keyword", "or") or s.accept("Punct", ","):
                    continue
                break
        s.expect("Punct", ")")
    body = _parse_stmt(s)
    return AlwaysBlock(sensitivity=sensitivity, body=body, pos=pos)


def _parse_stmt(s: _Stream):
    tok = s.peek()
    if tok is None:
        raise ParseError("expected statement, found end of input", 0, 0)
    if tok.kind == "Keyword":
        if tok.text in _UNSUPPORTED_ITEMS or tok.text == "initial":
            _unsupported(tok)
        if tok.text == "begin":
            pos = s.pos()
            s.next()
            statements = []
            while not s.at("Keyword", "end"):
                statements.append(_parse_stmt(s))
            s.expect("Keyword", "end")
            return Begin(statements=statements, pos=pos)
        if tok.text == "if":
            pos = s.pos()
            s.next()
            s.expect("Punct", "(")
            cond = _parse_expr(s)
            s.expect("Punct", ")")
            then = _parse_stmt(s)
            other = None
            if s.accept("Keyword", "else"):
                other = _parse_stmt(s)
            return If(cond=cond, then=then, other=other, pos=pos)
        if tok.text == "case":
            return _parse_case(s)
        raise ParseError(f"unexpected keyword {tok.text!r}", tok.line, tok.col)
    if tok.kind == "Identifier" and tok.text.startswith("$"):
        _unsupported(tok)
    if tok.kind == "Punct" and tok.text == "#":
        raise UnsupportedConstructError("delay control", tok.line)
    pos = s.pos()
    target = _parse_lvalue(s)
    if s.accept("Operator", "<="):
        value = _parse_expr(s)
        s.expect("Punct", ";")
        return NonBlockingAssign(target=target, value=value, pos=pos)
    s.expect("Operator", "=")
    value = _parse_expr(s)
    s.expect("Punct", ";")
    return BlockingAssign(target=target, value=value, pos=pos)


def _parse_case(s: _Stream) -> Case:
    pos = s.pos()
    s.expect("Keyword", "case")
    s.expect("Punct", "(")
    subject = _parse_expr(s)
    s.expect("Punct", ")")
    arms = []
    while not s.at("Keyword", "endcase"):
        arm_pos = s.pos()
        if s.accept("Keyword", "default"):
            s.accept("Punct", ":")
            arms.append(CaseArm(labels=[], body=_parse_stmt(s), pos=arm_pos))
            continue
        labels = [_parse_expr(s)]
        while s.accept("Punct", ","):
            labels.append(_parse_expr(s))
        s.expect("Punct", ":")
        arms.append(CaseArm(labels=labels, body=_parse_stmt(s), pos=arm_pos))
    s.expect("Keyword", "endcase")
    return Case(subject=subject, arms=arms, pos=pos)


def _parse_instance(s: _Stream) -> Instance:
    pos = s.pos()
    module_name = s.expect("Identifier").text
    if s.at("Punct", "#"):
        raise UnsupportedConstructError("parameterized instance", pos.line)
    inst_name = s.expect("Identifier").text
    s.expect("Punct", "(")
    connections = []
    if not s.at("Punct", ")"):
        while True:
            conn_pos = s.pos()
            if s.accept("Punct", "."):
                port = s.expect("Identifier").text
                s.expect("Punct", "(")
                value = None if s.at("Punct", ")") else _parse_expr(s)
                s.expect("Punct", ")")
                connections.append(Connection(port=port, value=value, pos=conn_pos))
            else:
                connections.append(Connection(port=None, value=_parse_expr(s), pos=conn_pos))
            if not s.accept("Punct", ","):
                break
    s.expect("Punct", ")")
    s.expect("Punct", ";")
    return Instance(module=module_name, name=inst_name, connections=connections, pos=pos)


def _parse_lvalue(s: _Stream):
    tok = s.peek()
    if tok is not None and tok.kind == "Punct" and tok.text == "{":
        pos = s.pos()
        s.next()
        parts = [_parse_lvalue(s)]
        while s.accept("Punct", ","):
            parts.append(_parse_lvalue(s))
        s.expect("Punct", "}")
        return Concat(parts=parts, pos=pos)
    pos = s.pos()
    name = s.expect("Identifier").text
    expr = Ref(name=name, pos=pos)
    while s.at("Punct", "["):
        expr = _parse_select(s, expr)
    return expr


def _parse_select(s: _Stream, base) -> Select:
    pos = s.pos()
    s.expect("Punct", "[")
    msb = _parse_expr(s)
    lsb = None
    if s.accept("Punct", ":"):
        lsb = _parse_expr(s)
    s.expect("Punct", "]")
    return Select(base=base, msb=msb, lsb=lsb, pos=pos)


# -- expressions --------------------------------------------------------------

def _parse_expr(s: _Stream):
    return _parse_ternary(s)


def _parse_ternary(s: _Stream):
    pos = s.pos()
    cond = _parse_binary(s, 0)
    if s.accept("Operator", "?"):
        then = _parse_ternary(s)
        s.expect("Punct", ":")
        other = _parse_ternary(s)
        return Ternary(cond=cond, then=then, other=other, pos=pos)
    return cond


def _parse_binary(s: _Stream, level: int):
    if level >= len(_BINARY_LEVELS):
        return _parse_unary(s)
    ops = _BINARY_LEVELS[level]
    pos = s.pos()
    left = _parse_binary(s, level + 1)
    while True:
        tok = s.peek()
        if tok is None or tok.kind != "Operator" or tok.text not in ops:
            return left
        op = s.next().text
        right = _parse_binary(s, level + 1)
        left = Binary(op=op, left=left, right=right, pos=pos)


def _parse_unary(s: _Stream):
    tok = s.peek()
    if tok is not None and tok.kind == "Operator" and tok.text in _UNARY_OPS:
        pos = s.pos()
        op = s.next().text
        operand = _parse_unary(s)
        return Unary(op=op, operand=operand, pos=pos)
    return _parse_primary(s)


def _parse_primary(s: _Stream):
    tok = s.peek()
    if tok is None:
        raise ParseError("expected expression, found end of input", 0, 0)
    if tok.kind == "Number":
        s.next()
        return Const(text=tok.text, pos=Pos(tok.line, tok.col))
    if tok.kind == "String":
        raise UnsupportedConstructError("string literal", tok.line)
    if tok.kind == "Identifier":
        if tok.text.startswith("$"):
            raise UnsupportedConstructError("system function call", tok.line)
        s.next()
        if s.at("Punct", "("):
            raise UnsupportedConstructError("function call", tok.line)
        expr = Ref(name=tok.text, pos=Pos(tok.line, tok.col))
        while s.at("Punct", "["):
            expr = _parse_select(s, expr)
        return expr
    if tok.kind == "Punct" and tok.text == "(":
        s.next()
        expr = _parse_expr(s)
        s.expect("Punct", ")")
        while s.at("Punct", "["):
            expr = _parse_select(s, expr)
        return expr
    if tok.kind == "Punct" and tok.text == "{":
        return _parse_concat(s)
    raise ParseError(f"expected expression, found {tok.text!r}", tok.line, tok.col)


def _parse_concat(s: _Stream):
    pos = s.pos()
    s.expect("Punct", "{")
    first = _parse_expr(s)
    if s.at("Punct", "{"):
        # replication: {count{value}}
        s.next()
        value = _parse_expr(s)
        s.expect("Punct", "}")
        s.expect("Punct", "}")
        return Replicate(count=first, value=value, pos=pos)
    parts = [first]
    while s.accept("Punct", ","):
        parts.append(_parse_expr(s))
    s.expect("Punct", "}")
    return Concat(parts=parts, pos=pos)
