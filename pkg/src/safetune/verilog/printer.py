"""Canonical pretty-printer; parse(print(parse(src))) is structurally stable."""
from __future__ import annotations

from .nodes import (
    AlwaysBlock, AstModule, Begin, Binary, BlockingAssign, Case, Concat,
    Const, ContinuousAssign, If, Instance, NonBlockingAssign, Ref, Replicate,
    Select, Ternary, Unary,
)


def pretty_print(module: AstModule) -> str:
    lines = []
    reg_ports = {d.name for d in module.decls if d.kind == "reg"} & set(module.port_names())
    if module.ports:
        header_ports = []
        for port in module.ports:
            direction = port.direction or "input"
            reg = "reg " if port.name in reg_ports else ""
            header_ports.append(f"{direction} {reg}{_range_text(port.width)}{port.name}")
        lines.append(f"module {module.name}({', '.join(header_ports)});")
    else:
        lines.append(f"module {module.name};")
    port_names = set(module.port_names())
    for decl in module.decls:
        if decl.kind == "reg" and decl.name in port_names:
            continue  # already carried by the output reg port declaration
        init = f" = {print_expr(decl.init)}" if decl.init is not None else ""
        if decl.kind == "integer":
            lines.append(f"  integer {decl.name}{init};")
        else:
            lines.append(f"  {decl.kind} {_range_text(decl.width)}{decl.name}{init};")
    for item in module.items:
        lines.extend(_print_item(item, "  "))
    lines.append("endmodule")
    return "\n".join(lines) + "\n"


def _range_text(width) -> str:
    if width is None:
        return ""
    return f"[{print_expr(width.msb)}:{print_expr(width.lsb)}] "


def _print_item(item, indent: str) -> list[str]:
    if isinstance(item, ContinuousAssign):
        return [f"{indent}assign {print_expr(item.target)} = {print_expr(item.value)};"]
    if isinstance(item, AlwaysBlock):
        if item.sensitivity == "*":
            head = f"{indent}always @(*)"
        else:
            parts = [f"{it.edge} {it.signal}" if it.edge else it.signal
                     for it in item.sensitivity]
            head = f"{indent}always @({' or '.join(parts)})"
        body = _print_stmt(item.body, indent + "  ")
        return [head] + body
    if isinstance(item, Instance):
        conns = []
        for conn in item.connections:
            value = print_expr(conn.value) if conn.value is not None else ""
            conns.append(f".{conn.port}({value})" if conn.port else value)
        return [f"{indent}{item.module} {item.name}({', '.join(conns)});"]
    raise TypeError(f"unknown item {type(item).__name__}")


def _print_stmt(stmt, indent: str) -> list[str]:
    if isinstance(stmt, BlockingAssign):
        return [f"{indent}{print_expr(stmt.target)} = {print_expr(stmt.value)};"]
    if isinstance(stmt, NonBlockingAssign):
        return [f"{indent}{print_expr(stmt.target)} <= {print_expr(stmt.value)};"]
    if isinstance(stmt, Begin):
        lines = [f"{indent}begin"]
        for inner in stmt.statements:
            lines.extend(_print_stmt(inner, indent + "  "))
        lines.append(f"{indent}end")
        return lines
    if isinstance(stmt, If):
        lines = [f"{indent}if ({print_expr(stmt.cond)})"]
        lines.extend(_print_stmt(stmt.then, indent + "  "))
        if stmt.other is not None:
            lines.append(f"{indent}else")
            lines.extend(_print_stmt(stmt.other, indent + "  "))
        return lines
    if isinstance(stmt, Case):
        lines = [f"{indent}case ({print_expr(stmt.subject)})"]
        for arm in stmt.arms:
            if arm.labels:
                label = ", ".join(print_expr(l) for l in arm.labels)
            else:
                label = "default"
            lines.append(f"{indent}  {label}:")
            lines.extend(_print_stmt(arm.body, indent + "    "))
        lines.append(f"{indent}endcase")
        return lines
    raise TypeError(f"unknown statement {type(stmt).__name__}")


def print_expr(expr) -> str:
    if isinstance(expr, Ref):
        return expr.name
    if isinstance(expr, Const):
        return expr.text
    if isinstance(expr, Unary):
        return f"{expr.op}({print_expr(expr.operand)})"
    if isinstance(expr, Binary):
        return f"({print_expr(expr.left)} {expr.op} {print_expr(expr.right)})"
    if isinstance(expr, Ternary):
        return f"({print_expr(expr.cond)} ? {print_expr(expr.then)} : {print_expr(expr.other)})"
    if isinstance(expr, Concat):
        return "{" + ", ".join(print_expr(p) for p in expr.parts) + "}"
    if isinstance(expr, Replicate):
        return "{" + print_expr(expr.count) + "{" + print_expr(expr.value) + "}}"
    if isinstance(expr, Select):
        if expr.lsb is None:
            return f"{print_expr(expr.base)}[{print_expr(expr.msb)}]"
        return f"{print_expr(expr.base)}[{print_expr(expr.msb)}:{print_expr(expr.lsb)}]"
    raise TypeError(f"unknown expression {type(expr).__name__}")
