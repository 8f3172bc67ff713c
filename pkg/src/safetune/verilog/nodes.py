"""AST node types for the supported subset.

Every node carries a source position (line, col) for error reporting;
positions are excluded from equality so structural comparison survives a
pretty-print round-trip.
"""
from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class Pos:
    line: int = 0
    col: int = 0


def _pos_field():
    return field(default_factory=Pos, compare=False, repr=False)


# -- expressions -------------------------------------------------------------

@dataclass
class Ref:
    name: str
    pos: Pos = _pos_field()


@dataclass
class Const:
    text: str  # literal text as written, underscores preserved
    pos: Pos = _pos_field()


@dataclass
class Unary:
    op: str
    operand: "Expr"
    pos: Pos = _pos_field()


@dataclass
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    pos: Pos = _pos_field()


@dataclass
class Ternary:
    cond: "Expr"
    then: "Expr"
    other: "Expr"
    pos: Pos = _pos_field()


@dataclass
class Concat:
    parts: list
    pos: Pos = _pos_field()


@dataclass
class Replicate:
    count: "Expr"
    value: "Expr"
    pos: Pos = _pos_field()


@dataclass
class Select:
    base: "Expr"
    msb: "Expr"
    lsb: "Expr | None" = None  # None for a single-bit select
    pos: Pos = _pos_field()


Expr = Ref | Const | Unary | Binary | Ternary | Concat | Replicate | Select


# -- statements ---------------------------------------------------------------

@dataclass
class BlockingAssign:
    target: Expr
    value: Expr
    pos: Pos = _pos_field()


@dataclass
class NonBlockingAssign:
    target: Expr
    value: Expr
    pos: Pos = _pos_field()


@dataclass
class If:
    cond: Expr
    then: "Stmt"
    other: "Stmt | None" = None
    pos: Pos = _pos_field()


@dataclass
class CaseArm:
    labels: list  # match expressions; empty means the default arm
    body: "Stmt"
    pos: Pos = _pos_field()


@dataclass
class Case:
    subject: Expr
    arms: list
    pos: Pos = _pos_field()


@dataclass
class Begin:
    statements: list
    pos: Pos = _pos_field()


Stmt = BlockingAssign | NonBlockingAssign | If | Case | Begin


# -- module items -------------------------------------------------------------

@dataclass
class Range:
    msb: Expr
    lsb: Expr
    pos: Pos = _pos_field()


@dataclass
class Port:
    name: str
    direction: str | None  # input | output | inout; None until declared
    width: Range | None = None
    pos: Pos = _pos_field()


@dataclass
class Decl:
    name: str
    kind: str  # wire | reg | parameter | integer
    width: Range | None = None
    init: Expr | None = None
    pos: Pos = _pos_field()


@dataclass
class ContinuousAssign:
    target: Expr
    value: Expr
    pos: Pos = _pos_field()


@dataclass
class SensItem:
    edge: str | None  # posedge | negedge | None (level)
    signal: str
    pos: Pos = _pos_field()


@dataclass
class AlwaysBlock:
    sensitivity: list | str  # list of SensItem or "*"
    body: Stmt
    pos: Pos = _pos_field()

    @property
    def is_clocked(self) -> bool:
        return isinstance(self.sensitivity, list) and any(
            item.edge for item in self.sensitivity
        )


@dataclass
class Connection:
    port: str | None  # None for positional
    value: Expr | None
    pos: Pos = _pos_field()


@dataclass
class Instance:
    module: str
    name: str
    connections: list
    pos: Pos = _pos_field()


Item = ContinuousAssign | AlwaysBlock | Instance


@dataclass
class AstModule:
    name: str
    ports: list = field(default_factory=list)
    decls: list = field(default_factory=list)
    items: list = field(default_factory=list)
    pos: Pos = _pos_field()

    def port_names(self) -> list[str]:
        return [p.name for p in self.ports]

    def output_ports(self) -> list[str]:
        return [p.name for p in self.ports if p.direction == "output"]


def to_dict(node):
    """Recursive JSON-friendly dump of any AST node (debugging aid)."""
    if isinstance(node, (str, int, float, bool)) or node is None:
        return node
    if isinstance(node, list):
        return [to_dict(x) for x in node]
    if isinstance(node, Pos):
        return None
    out = {"node": type(node).__name__}
    for key, value in vars(node).items():
        if key == "pos":
            continue
        out[key] = to_dict(value)
    return out
