"""Data-flow graph extraction from a parsed module, plus node features.

Nodes are signals, per-occurrence constants, operator applications, and the
branch/select/concat structural forms. Edges run operand -> operator and
operator -> assigned signal, with dense operand indices per destination.
Always blocks are symbolically evaluated so conditional assignments lower to
Branch nodes (condition first, data sources after); a non-blocking
assignment in a clocked block marks its target registered, which is the only
way a cycle is allowed to close.

Node ordering is deterministic: declaration order first, then item order,
then left-to-right expression order.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import ResolveError, StructureError
from .verilog.lexer import parse_literal
from .verilog.nodes import (
    AlwaysBlock, AstModule, Begin, Binary, BlockingAssign, Case, Concat,
    Const, ContinuousAssign, If, Instance, NonBlockingAssign, Ref, Replicate,
    Select, Ternary, Unary,
)

KINDS = ("Signal", "Constant", "Operator", "Branch", "Select", "Concat")

OPERATOR_CLASSES = (
    "bitwise", "addsub", "muldiv", "shift", "eqneq", "relational",
    "logical", "ternary", "concat", "select", "const_compare", "other",
)

_OP_CLASS_BY_SYMBOL = {}
for _sym in ("&", "|", "^", "~", "~^", "^~", "~&", "~|"):
    _OP_CLASS_BY_SYMBOL[_sym] = "bitwise"
for _sym in ("+", "-"):
    _OP_CLASS_BY_SYMBOL[_sym] = "addsub"
for _sym in ("*", "/", "%"):
    _OP_CLASS_BY_SYMBOL[_sym] = "muldiv"
for _sym in ("<<", ">>", "<<<", ">>>"):
    _OP_CLASS_BY_SYMBOL[_sym] = "shift"
for _sym in ("==", "!="):
    _OP_CLASS_BY_SYMBOL[_sym] = "eqneq"
for _sym in ("<", "<=", ">", ">="):
    _OP_CLASS_BY_SYMBOL[_sym] = "relational"
for _sym in ("&&", "||", "!"):
    _OP_CLASS_BY_SYMBOL[_sym] = "logical"

FEATURE_DIM = len(KINDS) + len(OPERATOR_CLASSES) + 4  # 22

_CLOCK_RE = re.compile(r"^(clk|clock)", re.IGNORECASE)
_RESET_RE = re.compile(r"^(rst|reset)", re.IGNORECASE)


@dataclass
class DfgNode:
    id: int
    kind: str
    label: str
    width: int | None = None


@dataclass
class DfgEdge:
    src: int
    dst: int
    operand_index: int


@dataclass
class DataFlowGraph:
    nodes: list[DfgNode] = field(default_factory=list)
    edges: list[DfgEdge] = field(default_factory=list)
    module_name: str = ""

    def successors(self) -> list[list[int]]:
        out = [[] for _ in self.nodes]
        for edge in self.edges:
            out[edge.src].append(edge.dst)
        return out

    def predecessors(self) -> list[list[tuple[int, int]]]:
        """Per node: (operand_index, src) pairs sorted by operand index."""
        inc = [[] for _ in self.nodes]
        for edge in self.edges:
            inc[edge.dst].append((edge.operand_index, edge.src))
        for lst in inc:
            lst.sort()
        return inc

    def to_json_obj(self) -> dict:
        return {
            "module": self.module_name,
            "nodes": [{"id": n.id, "kind": n.kind, "label": n.label, "width": n.width}
                      for n in self.nodes],
            "edges": [{"src": e.src, "dst": e.dst, "operand_index": e.operand_index}
                      for e in self.edges],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), indent=2)

    def to_edge_list(self) -> str:
        return "".join(f"{e.src} {e.dst} {e.operand_index}\n" for e in self.edges)


_HOLD = object()  # "keep previous value" marker during always-block evaluation


class _Builder:
    def __init__(self, module: AstModule):
        self.module = module
        self.graph = DataFlowGraph(module_name=module.name)
        self.signal_ids: dict[str, int] = {}
        self.params: dict[str, object] = {}
        self.registered: set[str] = set()
        self.in_degree_counts: dict[int, int] = {}
        self.driven: set[str] = set()

    def new_node(self, kind: str, label: str, width=None) -> int:
        node = DfgNode(id=len(self.graph.nodes), kind=kind, label=label, width=width)
        self.graph.nodes.append(node)
        return node.id

    def add_edge(self, src: int, dst: int):
        if src == dst:
            raise StructureError(
                f"self-dependency on {self.graph.nodes[dst].label!r} in {self.module.name}")
        index = self.in_degree_counts.get(dst, 0)
        self.graph.edges.append(DfgEdge(src=src, dst=dst, operand_index=index))
        self.in_degree_counts[dst] = index + 1

    # -- declarations ---------------------------------------------------------

    def declare(self):
        for port in self.module.ports:
            if port.direction is None:
                raise ResolveError(
                    f"port {port.name!r} has no direction declaration in {self.module.name}")
            if port.name not in self.signal_ids:
                self.signal_ids[port.name] = self.new_node(
                    "Signal", port.name, self._range_width(port.width))
        for decl in self.module.decls:
            if decl.kind == "parameter":
                self.params[decl.name] = decl.init
                continue
            if decl.name not in self.signal_ids:
                self.signal_ids[decl.name] = self.new_node(
                    "Signal", decl.name, self._range_width(decl.width))

    def _range_width(self, rng) -> int | None:
        if rng is None:
            return 1
        msb = self._const_eval(rng.msb)
        lsb = self._const_eval(rng.lsb)
        if msb is None or lsb is None:
            return None
        if msb < lsb:
            raise StructureError(
                f"ascending bit range [{msb}:{lsb}] in {self.module.name}")
        return msb - lsb + 1

    def _const_eval(self, expr):
        if isinstance(expr, Const):
            return parse_literal(expr.text)[3]
        if isinstance(expr, Ref) and expr.name in self.params:
            return self._const_eval(self.params[expr.name])
        if isinstance(expr, Binary):
            left = self._const_eval(expr.left)
            right = self._const_eval(expr.right)
            if left is None or right is None:
                return None
            try:
                return {
                    "+": lambda: left + right,
                    "-": lambda: left - right,
                    "*": lambda: left * right,
                    "/": lambda: left // right,
                }[expr.op]()
            except (KeyError, ZeroDivisionError):
                return None
        return None

    # -- expressions ----------------------------------------------------------

    def eval_expr(self, expr) -> int:
        if isinstance(expr, Ref):
            if expr.name in self.signal_ids:
                return self.signal_ids[expr.name]
            if expr.name in self.params:
                init = self.params[expr.name]
                label = init.text if isinstance(init, Const) else expr.name
                return self.new_node("Constant", label)
            raise ResolveError(
                f"undeclared identifier {expr.name!r} at line {expr.pos.line}")
        if isinstance(expr, Const):
            width = parse_literal(expr.text)[0]
            return self.new_node("Constant", expr.text, width)
        if isinstance(expr, Unary):
            operand = self.eval_expr(expr.operand)
            node = self.new_node("Operator", expr.op)
            self.add_edge(operand, node)
            return node
        if isinstance(expr, Binary):
            left = self.eval_expr(expr.left)
            right = self.eval_expr(expr.right)
            node = self.new_node("Operator", expr.op)
            self.add_edge(left, node)
            self.add_edge(right, node)
            return node
        if isinstance(expr, Ternary):
            cond = self.eval_expr(expr.cond)
            then = self.eval_expr(expr.then)
            other = self.eval_expr(expr.other)
            node = self.new_node("Branch", "?:")
            self.add_edge(cond, node)
            self.add_edge(then, node)
            self.add_edge(other, node)
            return node
        if isinstance(expr, Concat):
            parts = [self.eval_expr(p) for p in expr.parts]
            node = self.new_node("Concat", "{}")
            for part in parts:
                self.add_edge(part, node)
            return node
        if isinstance(expr, Replicate):
            count = self.eval_expr(expr.count)
            value = self.eval_expr(expr.value)
            node = self.new_node("Concat", "replicate")
            self.add_edge(count, node)
            self.add_edge(value, node)
            return node
        if isinstance(expr, Select):
            base = self.eval_expr(expr.base)
            indices = [self.eval_expr(expr.msb)]
            if expr.lsb is not None:
                indices.append(self.eval_expr(expr.lsb))
            node = self.new_node("Select", "[]")
            self.add_edge(base, node)
            for idx in indices:
                self.add_edge(idx, node)
            return node
        raise TypeError(f"unknown expression {type(expr).__name__}")

    # -- drivers ---------------------------------------------------------------

    def lhs_signals(self, target) -> list[str]:
        if isinstance(target, Ref):
            return [target.name]
        if isinstance(target, Select):
            return self.lhs_signals(target.base)
        if isinstance(target, Concat):
            names = []
            for part in target.parts:
                names.extend(self.lhs_signals(part))
            return names
        raise ResolveError(f"unsupported assignment target {type(target).__name__}")

    def drive(self, name: str, value_node: int, registered: bool = False):
        if name not in self.signal_ids:
            raise ResolveError(f"assignment to undeclared signal {name!r}")
        sig = self.signal_ids[name]
        if value_node == sig:
            if registered:
                return  # explicit hold; no edge needed
            raise StructureError(f"combinational self-dependency on {name!r}")
        self.add_edge(value_node, sig)
        self.driven.add(name)

    def continuous_assign(self, item: ContinuousAssign):
        value = self.eval_expr(item.value)
        for name in self.lhs_signals(item.target):
            self.drive(name, value)

    # -- always blocks ----------------------------------------------------------

    def always_block(self, item: AlwaysBlock):
        env: dict[str, object] = {}
        nonblocking: set[str] = set()
        self._exec(item.body, env, nonblocking)
        clocked = item.is_clocked
        for name, value in env.items():
            if name not in self.signal_ids:
                raise ResolveError(f"assignment to undeclared signal {name!r}")
            registered = clocked and name in nonblocking
            if registered:
                self.registered.add(name)
            resolved = self._resolve(value, name)
            self.drive(name, resolved, registered=registered)

    def _resolve(self, value, name: str) -> int:
        return self.signal_ids[name] if value is _HOLD else value

    def _exec(self, stmt, env: dict, nonblocking: set):
        if isinstance(stmt, Begin):
            for inner in stmt.statements:
                self._exec(inner, env, nonblocking)
            return
        if isinstance(stmt, (BlockingAssign, NonBlockingAssign)):
            value = self.eval_expr(stmt.value)
            for name in self.lhs_signals(stmt.target):
                env[name] = value
                if isinstance(stmt, NonBlockingAssign):
                    nonblocking.add(name)
            return
        if isinstance(stmt, If):
            cond = self.eval_expr(stmt.cond)
            then_env = dict(env)
            self._exec(stmt.then, then_env, nonblocking)
            else_env = dict(env)
            if stmt.other is not None:
                self._exec(stmt.other, else_env, nonblocking)
            assigned = [k for k in then_env if then_env.get(k) != env.get(k, _HOLD)]
            assigned += [k for k in else_env
                         if else_env.get(k) != env.get(k, _HOLD) and k not in assigned]
            for name in assigned:
                then_v = self._resolve(then_env.get(name, env.get(name, _HOLD)), name)
                else_v = self._resolve(else_env.get(name, env.get(name, _HOLD)), name)
                if then_v == else_v:
                    env[name] = then_v
                    continue
                node = self.new_node("Branch", "if")
                self.add_edge(cond, node)
                self.add_edge(then_v, node)
                self.add_edge(else_v, node)
                env[name] = node
            return
        if isinstance(stmt, Case):
            subject = self.eval_expr(stmt.subject)
            plain_arms = [arm for arm in stmt.arms if arm.labels]
            default_arms = [arm for arm in stmt.arms if not arm.labels]
            arm_envs = []
            for arm in plain_arms + default_arms[:1]:
                arm_env = dict(env)
                self._exec(arm.body, arm_env, nonblocking)
                arm_envs.append(arm_env)
            assigned: list[str] = []
            for arm_env in arm_envs:
                for name in arm_env:
                    if arm_env.get(name) != env.get(name, _HOLD) and name not in assigned:
                        assigned.append(name)
            has_default = bool(default_arms)
            for name in assigned:
                values = []
                for arm_env in arm_envs:
                    values.append(self._resolve(arm_env.get(name, env.get(name, _HOLD)), name))
                if not has_default:
                    values.append(self._resolve(env.get(name, _HOLD), name))
                node = self.new_node("Branch", "case")
                self.add_edge(subject, node)
                for value in values:
                    self.add_edge(value, node)
                env[name] = node
            return
        raise TypeError(f"unknown statement {type(stmt).__name__}")

    # -- instances ---------------------------------------------------------------

    def instance_pass(self, instances: list[tuple[int, Instance]]):
        """Classify plain-Ref connections as instance inputs or outputs.

        A Ref with no other driver becomes an instance output; everything
        else feeds the instance. Expression connections were already
        evaluated in item order to keep node ids deterministic.
        """
        input_port_names = {p.name for p in self.module.ports if p.direction == "input"}
        for inst_node, inst in instances:
            for conn in inst.connections:
                if conn.value is None:
                    continue
                value = conn.value
                if (isinstance(value, Ref) and value.name in self.signal_ids
                        and value.name not in self.driven
                        and value.name not in input_port_names):
                    self.add_edge(inst_node, self.signal_ids[value.name])
                    self.driven.add(value.name)
                else:
                    self.add_edge(self._conn_nodes[(inst_node, id(conn))], inst_node)

    def build(self) -> DataFlowGraph:
        self.declare()
        instances: list[tuple[int, Instance]] = []
        self._conn_nodes: dict[tuple[int, int], int] = {}
        for decl in self.module.decls:
            if decl.kind != "parameter" and decl.init is not None:
                value = self.eval_expr(decl.init)
                self.drive(decl.name, value)
        for item in self.module.items:
            if isinstance(item, ContinuousAssign):
                self.continuous_assign(item)
            elif isinstance(item, AlwaysBlock):
                self.always_block(item)
            elif isinstance(item, Instance):
                conn_values = {}
                for conn in item.connections:
                    if conn.value is None:
                        continue
                    if isinstance(conn.value, Ref):
                        if conn.value.name not in self.signal_ids:
                            raise ResolveError(
                                f"undeclared identifier {conn.value.name!r} in instance {item.name}")
                        conn_values[id(conn)] = self.signal_ids[conn.value.name]
                    else:
                        conn_values[id(conn)] = self.eval_expr(conn.value)
                node = self.new_node("Operator", item.module)
                for key, value in conn_values.items():
                    self._conn_nodes[(node, key)] = value
                instances.append((node, item))
            else:
                raise TypeError(f"unknown item {type(item).__name__}")
        self.instance_pass(instances)
        self._check_cycles()
        return self.graph

    def _check_cycles(self):
        registered_ids = {self.signal_ids[name] for name in self.registered}
        succ = self.graph.successors()
        n = len(self.graph.nodes)
        color = [0] * n  # 0 unvisited, 1 on stack, 2 done
        for start in range(n):
            if color[start] or start in registered_ids:
                continue
            stack = [(start, iter(succ[start]))]
            color[start] = 1
            while stack:
                node, it = stack[-1]
                advanced = False
                for nxt in it:
                    if nxt in registered_ids:
                        continue
                    if color[nxt] == 1:
                        label = self.graph.nodes[nxt].label
                        raise StructureError(
                            f"combinational cycle through {label!r} in {self.module.name}")
                    if color[nxt] == 0:
                        color[nxt] = 1
                        stack.append((nxt, iter(succ[nxt])))
                        advanced = True
                        break
                if not advanced:
                    color[node] = 2
                    stack.pop()


def build_dfg(ast: AstModule) -> DataFlowGraph:
    """Construct the data-flow graph for a resolved module."""
    return _Builder(ast).build()


def encode_features(graph: DataFlowGraph) -> np.ndarray:
    """Per-node feature rows: kind one-hot (6), operator-class one-hot (12),
    log(1+in-degree), log(1+out-degree), clock-name flag, reset-name flag."""
    n = len(graph.nodes)
    features = np.zeros((n, FEATURE_DIM), dtype=np.float64)
    in_deg = np.zeros(n, dtype=np.int64)
    out_deg = np.zeros(n, dtype=np.int64)
    const_operand = np.zeros(n, dtype=bool)
    for edge in graph.edges:
        in_deg[edge.dst] += 1
        out_deg[edge.src] += 1
        if graph.nodes[edge.src].kind == "Constant":
            const_operand[edge.dst] = True
    for node in graph.nodes:
        row = features[node.id]
        row[KINDS.index(node.kind)] = 1.0
        op_class = None
        if node.kind == "Operator":
            op_class = _OP_CLASS_BY_SYMBOL.get(node.label, "other")
            if op_class == "eqneq" and const_operand[node.id]:
                op_class = "const_compare"
        elif node.kind == "Branch":
            op_class = "ternary"
        elif node.kind == "Concat":
            op_class = "concat"
        elif node.kind == "Select":
            op_class = "select"
        if op_class is not None:
            row[len(KINDS) + OPERATOR_CLASSES.index(op_class)] = 1.0
        base = len(KINDS) + len(OPERATOR_CLASSES)
        row[base] = math.log1p(in_deg[node.id])
        row[base + 1] = math.log1p(out_deg[node.id])
        row[base + 2] = 1.0 if _CLOCK_RE.match(node.label) else 0.0
        row[base + 3] = 1.0 if _RESET_RE.match(node.label) else 0.0
    return features
