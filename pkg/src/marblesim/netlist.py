"""The marble netlist language: parsing, validation, macro elaboration.

A netlist is line oriented; '#' starts a comment and blank lines are
ignored.  Statements:

    circuit <ident>
    input <ident> [, <ident>...]
    output <ident> [, <ident>...]
    node <ident> : junction | scalpel | hold(<k>) | const1
                 | sensor_syringe | tap | join | waste
    gate <ident> : <macro-name>
    connect <endpoint> -> <endpoint>

An endpoint is a circuit input/output name written bare, or
``<name>.<port>`` for a node or gate instance.  Junction ports are A, B and
O1..O5 (left to right); scalpels expose in/out1/out2; taps in/out/copy;
sensor_syringes and holds in/out; joins in1..inN/out; waste a single n-ary
in.  Every declared port must be wired: non-sink output ports carry exactly
one channel, input ports receive exactly one (waste accepts any number).

Elaboration inlines gate macros to a fixed point, assigns each node a firing
phase by longest-path levelization from the inputs, and repairs junctions
whose two feed paths differ in depth by inserting a hold on the shallower
side so both marbles reach the junction on the same phase.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

from .errors import MarblesimError
from .primitives import IN_PORTS, JOIN_PORT_PATTERN, OUT_PORTS, NodeKind

__all__ = [
    "Channel",
    "Circuit",
    "CircuitAst",
    "Diagnostic",
    "ElaborationError",
    "GateDecl",
    "Node",
    "NodeDecl",
    "ParseError",
    "circuit_to_ast",
    "elaborate",
    "parse",
    "print_canonical",
    "validate",
]

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_ENDPOINT = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)(?:\.([A-Za-z_][A-Za-z0-9_]*))?\Z")
_HOLD_ARG = re.compile(r"hold\s*\(\s*([0-9]+)\s*\)\Z")
_JOIN_IN = re.compile(JOIN_PORT_PATTERN + r"\Z")

_KIND_KEYWORDS = {
    "junction": NodeKind.JUNCTION,
    "scalpel": NodeKind.SCALPEL,
    "const1": NodeKind.CONST,
    "sensor_syringe": NodeKind.SYRINGE,
    "tap": NodeKind.TAP,
    "join": NodeKind.JOIN,
    "waste": NodeKind.WASTE,
}

_MACRO_EXPANSION_LIMIT = 32


class ParseError(MarblesimError):
    """Netlist text that does not parse; carries the source position."""

    def __init__(self, message: str, line: int, col: int | None = None):
        self.line = line
        self.col = col
        where = f"line {line}" if col is None else f"line {line}, col {col}"
        super().__init__(f"{where}: {message}")


class ElaborationError(MarblesimError):
    """Elaboration failed; carries the validator diagnostics if any."""

    def __init__(self, message: str, diagnostics: tuple = ()):  # type: ignore[type-arg]
        self.diagnostics = tuple(diagnostics)
        if self.diagnostics:
            detail = "; ".join(d.message for d in self.diagnostics)
            message = f"{message}: {detail}"
        super().__init__(message)


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    message: str
    line: int | None = None

    def __str__(self) -> str:
        prefix = f"line {self.line}: " if self.line else ""
        return f"{self.severity}: {prefix}{self.message}"


@dataclass(frozen=True)
class NodeDecl:
    name: str
    kind: NodeKind
    hold_phases: int = 0
    line: int = 0


@dataclass(frozen=True)
class GateDecl:
    name: str
    macro: str
    line: int = 0


@dataclass(frozen=True)
class Channel:
    """One directed channel between two ports."""

    src: str
    src_port: str
    dst: str
    dst_port: str
    line: int = 0

    def key(self) -> tuple[str, str, str, str]:
        return (self.src, self.src_port, self.dst, self.dst_port)


@dataclass(eq=False)
class CircuitAst:
    """Parsed netlist.  Node and channel order is not semantic; input and
    output declaration order is (it fixes the bit-vector layout)."""

    name: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    nodes: tuple[NodeDecl, ...] = ()
    gates: tuple[GateDecl, ...] = ()
    channels: tuple[Channel, ...] = ()

    def canonical_key(self):
        return (
            self.name, self.inputs, self.outputs,
            frozenset((n.name, n.kind, n.hold_phases) for n in self.nodes),
            frozenset((g.name, g.macro) for g in self.gates),
            frozenset(ch.key() for ch in self.channels),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CircuitAst):
            return NotImplemented
        return self.canonical_key() == other.canonical_key()

    def __hash__(self) -> int:
        return hash(self.canonical_key())


@dataclass(frozen=True)
class Node:
    name: str
    kind: NodeKind
    hold_phases: int = 0


@dataclass(eq=True)
class Circuit:
    """Elaborated, primitive-only circuit with a firing phase per node."""

    name: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    nodes: dict[str, Node]
    channels: tuple[Channel, ...]
    phases: dict[str, int]
    _out: dict[tuple[str, str], Channel] = field(
        init=False, repr=False, compare=False, default_factory=dict)
    _into: dict[tuple[str, str], list[Channel]] = field(
        init=False, repr=False, compare=False, default_factory=dict)

    def __post_init__(self) -> None:
        for ch in self.channels:
            self._out[(ch.src, ch.src_port)] = ch
            self._into.setdefault((ch.dst, ch.dst_port), []).append(ch)

    @property
    def max_phase(self) -> int:
        return max(self.phases.values(), default=0)

    def out_channel(self, node: str, port: str) -> Channel | None:
        return self._out.get((node, port))

    def channels_into(self, node: str, port: str) -> tuple[Channel, ...]:
        return tuple(self._into.get((node, port), ()))


def _split_statement(raw: str) -> str:
    return raw.split("#", 1)[0].rstrip()


def _col_of(raw: str, token: str, start: int = 0) -> int | None:
    pos = raw.find(token, start)
    return pos + 1 if pos >= 0 else None


def _parse_node_kind(spec: str, lineno: int, raw: str) -> tuple[NodeKind, int]:
    spec = spec.strip()
    m = _HOLD_ARG.fullmatch(spec)
    if m:
        k = int(m.group(1))
        if k < 1:
            raise ParseError("hold phase count must be at least 1", lineno,
                             _col_of(raw, m.group(1)))
        return NodeKind.HOLD, k
    if spec == "hold":
        raise ParseError("hold requires a phase count, e.g. hold(2)", lineno,
                         _col_of(raw, "hold"))
    if spec in _KIND_KEYWORDS:
        return _KIND_KEYWORDS[spec], 0
    raise ParseError(f"unknown node kind {spec!r}", lineno,
                     _col_of(raw, spec.split("(")[0]))


def parse(text: str) -> CircuitAst:
    """Parse netlist text into an AST.

    Connect statements may appear anywhere relative to the declarations they
    reference.  Raises :class:`ParseError` with line (and column where
    determinable) on the first problem found.
    """
    lines = text.splitlines()
    circuit_name: str | None = None
    inputs: list[str] = []
    outputs: list[str] = []
    nodes: list[NodeDecl] = []
    gates: list[GateDecl] = []
    declared: dict[str, tuple[str, int]] = {}  # name -> (category, line)

    def declare(name: str, category: str, lineno: int, raw: str) -> None:
        if not _IDENT.fullmatch(name):
            raise ParseError(f"invalid identifier {name!r}", lineno,
                             _col_of(raw, name))
        if name in declared:
            prev_cat, prev_line = declared[name]
            raise ParseError(
                f"duplicate name {name!r} (already declared as {prev_cat} "
                f"on line {prev_line})", lineno, _col_of(raw, name))
        declared[name] = (category, lineno)

    connect_stmts: list[tuple[int, str, str]] = []  # (line, raw, rest)

    for lineno, raw in enumerate(lines, start=1):
        stmt = _split_statement(raw)
        if not stmt.strip():
            continue
        keyword, _, rest = stmt.strip().partition(" ")
        rest = rest.strip()
        if circuit_name is None and keyword != "circuit":
            raise ParseError("netlist must start with a circuit declaration",
                             lineno)
        if keyword == "circuit":
            if circuit_name is not None:
                raise ParseError("duplicate circuit declaration", lineno)
            if not _IDENT.fullmatch(rest):
                raise ParseError(f"invalid circuit name {rest!r}", lineno,
                                 _col_of(raw, rest) if rest else None)
            circuit_name = rest
        elif keyword in ("input", "output"):
            if not rest:
                raise ParseError(f"{keyword} needs at least one name", lineno)
            for name in (part.strip() for part in rest.split(",")):
                declare(name, keyword, lineno, raw)
                (inputs if keyword == "input" else outputs).append(name)
        elif keyword == "node":
            name, colon, spec = rest.partition(":")
            name = name.strip()
            if not colon:
                raise ParseError("expected ':' after node name", lineno)
            declare(name, "node", lineno, raw)
            kind, hold_phases = _parse_node_kind(spec, lineno, raw)
            nodes.append(NodeDecl(name, kind, hold_phases, lineno))
        elif keyword == "gate":
            name, colon, macro = rest.partition(":")
            name = name.strip()
            macro = macro.strip()
            if not colon:
                raise ParseError("expected ':' after gate name", lineno)
            declare(name, "gate", lineno, raw)
            if not _IDENT.fullmatch(macro):
                raise ParseError(f"invalid macro name {macro!r}", lineno,
                                 _col_of(raw, macro) if macro else None)
            gates.append(GateDecl(name, macro, lineno))
        elif keyword == "connect":
            connect_stmts.append((lineno, raw, rest))
        else:
            raise ParseError(f"unknown statement {keyword!r}", lineno,
                             _col_of(raw, keyword))

    if circuit_name is None:
        raise ParseError("missing circuit declaration", len(lines) or 1)

    def endpoint(text_ep: str, lineno: int, raw: str,
                 side: str) -> tuple[str, str]:
        m = _ENDPOINT.fullmatch(text_ep)
        if not m:
            raise ParseError(f"malformed endpoint {text_ep!r}", lineno,
                             _col_of(raw, text_ep))
        name, port = m.group(1), m.group(2)
        if name not in declared:
            raise ParseError(f"unknown name {name!r}", lineno,
                             _col_of(raw, name))
        category = declared[name][0]
        if category in ("input", "output"):
            if port is not None:
                raise ParseError(
                    f"{category} {name!r} is referenced bare, without a port",
                    lineno, _col_of(raw, text_ep))
            return name, "out" if category == "input" else "in"
        if port is None:
            raise ParseError(f"{category} {name!r} needs a port on the "
                             f"{side} side", lineno, _col_of(raw, text_ep))
        return name, port

    channels: list[Channel] = []
    for lineno, raw, rest in connect_stmts:
        left, arrow, right = rest.partition("->")
        if not arrow:
            raise ParseError("expected '->' between endpoints", lineno,
                             _col_of(raw, rest) if rest else None)
        left = left.strip()
        right = right.strip()
        if not left:
            raise ParseError("expected endpoint before '->'", lineno,
                             _col_of(raw, "->"))
        if not right:
            col = _col_of(raw, "->")
            raise ParseError("expected endpoint after '->'", lineno,
                             (col + 2) if col else None)
        src, src_port = endpoint(left, lineno, raw, "source")
        dst, dst_port = endpoint(right, lineno, raw, "destination")
        channels.append(Channel(src, src_port, dst, dst_port, lineno))

    return CircuitAst(circuit_name, tuple(inputs), tuple(outputs),
                      tuple(nodes), tuple(gates), tuple(channels))


def _render_endpoint(ast: CircuitAst, name: str, port: str) -> str:
    if name in ast.inputs or name in ast.outputs:
        return name
    return f"{name}.{port}"


def print_canonical(ast: CircuitAst) -> str:
    """Render an AST in canonical form.

    Comments and layout are dropped, node and gate declarations are sorted
    by name, connect lines lexicographically; parsing the result yields a
    structurally identical AST.
    """
    out: list[str] = [f"circuit {ast.name}"]
    if ast.inputs:
        out.append("input " + ", ".join(ast.inputs))
    if ast.outputs:
        out.append("output " + ", ".join(ast.outputs))
    for nd in sorted(ast.nodes, key=lambda n: n.name):
        kind = (f"hold({nd.hold_phases})" if nd.kind is NodeKind.HOLD
                else nd.kind.value)
        out.append(f"node {nd.name} : {kind}")
    for gd in sorted(ast.gates, key=lambda g: g.name):
        out.append(f"gate {gd.name} : {gd.macro}")
    connect_lines = sorted(
        f"connect {_render_endpoint(ast, ch.src, ch.src_port)} -> "
        f"{_render_endpoint(ast, ch.dst, ch.dst_port)}"
        for ch in ast.channels)
    out.extend(connect_lines)
    return "\n".join(out) + "\n"


def _default_library() -> dict:
    from .gates import library_map
    return library_map()


def validate(ast: CircuitAst, library: dict | None = None) -> list[Diagnostic]:
    """Structural checks: port names, arity, connectivity, acyclicity.

    Returns an empty list exactly when the netlist is well formed.  Gate
    instance ports are checked against ``library`` (the built-in macro
    library by default).
    """
    lib = _default_library() if library is None else library
    diags: list[Diagnostic] = []

    def err(message: str, line: int | None = None) -> None:
        diags.append(Diagnostic("error", message, line))

    node_decls = {nd.name: nd for nd in ast.nodes}
    gate_decls = {gd.name: gd for gd in ast.gates}
    categories: dict[str, str] = {}
    for name in ast.inputs:
        categories[name] = "input"
    for name in ast.outputs:
        categories[name] = "output"
    for name in node_decls:
        categories[name] = "node"
    for name in gate_decls:
        categories[name] = "gate"

    for name in categories:
        if name in lib:
            err(f"name {name!r} is reserved (gate macro)")
    for gd in ast.gates:
        if gd.macro not in lib:
            err(f"unknown gate macro {gd.macro!r}", gd.line)

    def gate_ports(name: str) -> tuple[tuple[str, ...], tuple[str, ...]]:
        macro = lib.get(gate_decls[name].macro)
        if macro is None:
            return (), ()
        return tuple(macro.inputs), tuple(macro.outputs)

    out_use: dict[tuple[str, str], int] = {}
    in_use: dict[tuple[str, str], int] = {}
    seen_channels: dict[tuple[str, str, str, str], int] = {}

    for ch in ast.channels:
        if ch.src not in categories or ch.dst not in categories:
            missing = ch.src if ch.src not in categories else ch.dst
            err(f"unknown name {missing!r}", ch.line)
            continue
        key = ch.key()
        if key in seen_channels:
            err(f"duplicate channel {ch.src}.{ch.src_port} -> "
                f"{ch.dst}.{ch.dst_port} (first on line "
                f"{seen_channels[key]})", ch.line)
        else:
            seen_channels[key] = ch.line

        src_cat = categories[ch.src]
        if src_cat == "output":
            err(f"cannot connect from circuit output {ch.src!r}", ch.line)
        elif src_cat == "node":
            kind = node_decls[ch.src].kind
            if ch.src_port not in OUT_PORTS[kind]:
                err(f"unknown port {ch.src}.{ch.src_port} "
                    f"({kind.value} outputs: "
                    f"{', '.join(OUT_PORTS[kind]) or 'none'})", ch.line)
        elif src_cat == "gate":
            _, gouts = gate_ports(ch.src)
            if gouts and ch.src_port not in gouts:
                err(f"unknown port {ch.src}.{ch.src_port} "
                    f"(macro outputs: {', '.join(gouts)})", ch.line)
        out_use[(ch.src, ch.src_port)] = out_use.get(
            (ch.src, ch.src_port), 0) + 1

        dst_cat = categories[ch.dst]
        if dst_cat == "input":
            err(f"cannot connect into circuit input {ch.dst!r}", ch.line)
        elif dst_cat == "node":
            kind = node_decls[ch.dst].kind
            if kind is NodeKind.JOIN:
                if not _JOIN_IN.fullmatch(ch.dst_port):
                    err(f"unknown port {ch.dst}.{ch.dst_port} "
                        f"(join inputs are in1..inN)", ch.line)
            elif ch.dst_port not in IN_PORTS[kind]:
                err(f"unknown port {ch.dst}.{ch.dst_port} "
                    f"({kind.value} inputs: "
                    f"{', '.join(IN_PORTS[kind]) or 'none'})", ch.line)
        elif dst_cat == "gate":
            gins, _ = gate_ports(ch.dst)
            if gins and ch.dst_port not in gins:
                err(f"unknown port {ch.dst}.{ch.dst_port} "
                    f"(macro inputs: {', '.join(gins)})", ch.line)
        in_use[(ch.dst, ch.dst_port)] = in_use.get(
            (ch.dst, ch.dst_port), 0) + 1

    def need_out(name: str, port: str, line: int | None) -> None:
        n = out_use.get((name, port), 0)
        if n == 0:
            err(f"unconnected port {name}.{port}", line)
        elif n > 1:
            err(f"multiple channels leave {name}.{port}", line)

    def need_in(name: str, port: str, line: int | None) -> None:
        n = in_use.get((name, port), 0)
        if n == 0:
            err(f"unconnected port {name}.{port}", line)
        elif n > 1:
            err(f"multiple channels into {name}.{port}", line)

    for name in ast.inputs:
        n = out_use.get((name, "out"), 0)
        if n == 0:
            err(f"unconnected circuit input {name!r}")
        elif n > 1:
            err(f"multiple channels leave circuit input {name!r}")
    for name in ast.outputs:
        n = in_use.get((name, "in"), 0)
        if n == 0:
            err(f"unconnected circuit output {name!r}")
        elif n > 1:
            err(f"multiple channels into circuit output {name!r}")

    for nd in ast.nodes:
        for port in OUT_PORTS[nd.kind]:
            need_out(nd.name, port, nd.line)
        if nd.kind is NodeKind.WASTE:
            if in_use.get((nd.name, "in"), 0) == 0:
                err(f"unconnected port {nd.name}.in", nd.line)
        elif nd.kind is NodeKind.JOIN:
            numbered = sorted(
                int(port[2:]) for (name, port), n in in_use.items()
                if name == nd.name and _JOIN_IN.fullmatch(port))
            for (name, port), n in in_use.items():
                if name == nd.name and n > 1:
                    err(f"multiple channels into {name}.{port}", nd.line)
            if len(numbered) < 2:
                err(f"join {nd.name} needs at least two inputs", nd.line)
            elif numbered != list(range(1, len(numbered) + 1)):
                expect = list(range(1, len(numbered) + 1))
                missing = sorted(set(expect) - set(numbered))
                err(f"join {nd.name} input ports must be contiguous "
                    f"in1..in{len(numbered)} (missing "
                    f"{', '.join('in%d' % i for i in missing)})", nd.line)
        else:
            for port in IN_PORTS[nd.kind]:
                need_in(nd.name, port, nd.line)

    for gd in ast.gates:
        gins, gouts = gate_ports(gd.name)
        for port in gins:
            need_in(gd.name, port, gd.line)
        for port in gouts:
            need_out(gd.name, port, gd.line)

    # Acyclicity over the name-level graph (gate instances are opaque).
    successors: dict[str, set[str]] = {name: set() for name in categories}
    indegree: dict[str, int] = {name: 0 for name in categories}
    for ch in ast.channels:
        if ch.src not in successors or ch.dst not in successors:
            continue
        if ch.dst not in successors[ch.src]:
            successors[ch.src].add(ch.dst)
            indegree[ch.dst] += 1
    queue = sorted(name for name, deg in indegree.items() if deg == 0)
    visited = 0
    while queue:
        name = queue.pop()
        visited += 1
        for succ in successors[name]:
            indegree[succ] -= 1
            if indegree[succ] == 0:
                queue.append(succ)
        queue.sort()
    if visited != len(categories):
        stuck = sorted(name for name, deg in indegree.items() if deg > 0)
        err("cycle detected involving: " + ", ".join(stuck))

    return diags


def _expand_once(ast: CircuitAst, lib: dict) -> CircuitAst:
    """Inline every gate instance one level; inner gates survive renamed."""
    nodes: list[NodeDecl] = list(ast.nodes)
    next_gates: list[GateDecl] = []
    instance_names = {gd.name for gd in ast.gates}

    Real = tuple[str, str]
    # Pseudo endpoints are instance boundary ports awaiting splicing.
    pseudo_out: dict[Real, tuple] = {}
    work: list[tuple[tuple, tuple, int]] = []  # (src_key, dst_key, line)

    def top_key(name: str, port: str) -> tuple:
        if name in instance_names:
            return ("P", name, port)
        return ("R", name, port)

    for ch in ast.channels:
        work.append((top_key(ch.src, ch.src_port),
                     top_key(ch.dst, ch.dst_port), ch.line))

    for gd in ast.gates:
        macro = lib[gd.macro]
        mast: CircuitAst = macro.expansion
        prefix = gd.name + "."
        inner_inputs = set(mast.inputs)
        inner_outputs = set(mast.outputs)
        for nd in mast.nodes:
            nodes.append(replace(nd, name=prefix + nd.name, line=gd.line))
        for igd in mast.gates:
            next_gates.append(GateDecl(prefix + igd.name, igd.macro, gd.line))

        def inner_key(name: str, port: str, gd=gd, prefix=prefix,
                      inner_inputs=inner_inputs,
                      inner_outputs=inner_outputs) -> tuple:
            if name in inner_inputs or name in inner_outputs:
                return ("P", gd.name, name)
            return ("R", prefix + name, port)

        for ch in mast.channels:
            work.append((inner_key(ch.src, ch.src_port),
                         inner_key(ch.dst, ch.dst_port), gd.line))

    for src_key, dst_key, line in work:
        if src_key[0] == "P":
            if src_key in pseudo_out:
                raise ElaborationError(
                    f"instance port {src_key[1]}.{src_key[2]} drives "
                    "multiple channels")
            pseudo_out[src_key] = (dst_key, line)

    channels: list[Channel] = []
    for src_key, dst_key, line in work:
        if src_key[0] != "R":
            continue
        seen: set[tuple] = set()
        while dst_key[0] == "P":
            if dst_key in seen:
                raise ElaborationError(
                    f"cycle through instance port {dst_key[1]}.{dst_key[2]}")
            seen.add(dst_key)
            nxt = pseudo_out.get(dst_key)
            if nxt is None:
                raise ElaborationError(
                    f"dangling instance port {dst_key[1]}.{dst_key[2]}")
            dst_key = nxt[0]
        channels.append(Channel(src_key[1], src_key[2],
                                dst_key[1], dst_key[2], line))

    return CircuitAst(ast.name, ast.inputs, ast.outputs, tuple(nodes),
                      tuple(next_gates), tuple(channels))


def _toposort(names: list[str], channels: tuple[Channel, ...]) -> list[str]:
    successors: dict[str, set[str]] = {name: set() for name in names}
    indegree: dict[str, int] = {name: 0 for name in names}
    for ch in channels:
        if ch.dst not in successors[ch.src]:
            successors[ch.src].add(ch.dst)
            indegree[ch.dst] += 1
    order: list[str] = []
    queue = sorted(name for name, deg in indegree.items() if deg == 0)
    while queue:
        name = queue.pop()
        order.append(name)
        for succ in successors[name]:
            indegree[succ] -= 1
            if indegree[succ] == 0:
                queue.append(succ)
        queue.sort()
    if len(order) != len(names):
        raise ElaborationError("cycle detected during levelization")
    return order


def _levelize(ast: CircuitAst, *, strict: bool,
              insert_holds: bool) -> Circuit:
    nodes: dict[str, Node] = {}
    for name in ast.inputs:
        nodes[name] = Node(name, NodeKind.INPUT)
    for name in ast.outputs:
        nodes[name] = Node(name, NodeKind.OUTPUT)
    for nd in ast.nodes:
        nodes[nd.name] = Node(nd.name, nd.kind, nd.hold_phases)
    channels = [replace(ch, line=0) for ch in ast.channels]

    into: dict[tuple[str, str], Channel] = {}
    predecessors: dict[str, list[str]] = {name: [] for name in nodes}
    for ch in channels:
        predecessors[ch.dst].append(ch.src)
        into[(ch.dst, ch.dst_port)] = ch

    phases: dict[str, int] = {}
    for name in _toposort(list(nodes), tuple(channels)):
        node = nodes[name]
        if node.kind in (NodeKind.INPUT, NodeKind.CONST):
            phases[name] = 0
        elif not predecessors[name]:
            phases[name] = 0
        else:
            step = node.hold_phases if node.kind is NodeKind.HOLD else 1
            phases[name] = max(phases[p] for p in predecessors[name]) + step

    junctions = sorted(name for name, node in nodes.items()
                       if node.kind is NodeKind.JUNCTION)
    for jname in junctions:
        cha = into.get((jname, "A"))
        chb = into.get((jname, "B"))
        if cha is None or chb is None:
            continue
        pa, pb = phases[cha.src], phases[chb.src]
        if pa == pb:
            continue
        if strict:
            raise ElaborationError(
                f"junction {jname} inputs out of phase: "
                f"{cha.src} fires at {pa}, {chb.src} at {pb}")
        if not insert_holds:
            continue
        shallow = cha if pa < pb else chb
        depth = max(pa, pb)
        hold_name = f"{jname}.{shallow.dst_port}.sync"
        while hold_name in nodes:
            hold_name += "_"
        k = depth - min(pa, pb)
        nodes[hold_name] = Node(hold_name, NodeKind.HOLD, k)
        phases[hold_name] = depth
        channels.remove(shallow)
        channels.append(Channel(shallow.src, shallow.src_port,
                                hold_name, "in"))
        channels.append(Channel(hold_name, "out", jname, shallow.dst_port))

    ordered = tuple(sorted(channels, key=Channel.key))
    return Circuit(ast.name, ast.inputs, ast.outputs,
                   dict(sorted(nodes.items())), ordered,
                   dict(sorted(phases.items())))


def elaborate(ast: CircuitAst, library: dict | None = None, *,
              strict: bool = False, insert_holds: bool = True) -> Circuit:
    """Expand macros, levelize, and repair junction synchronization.

    ``strict`` turns a junction phase imbalance into an error instead of
    repairing it; ``insert_holds=False`` keeps the imbalance in the result
    (useful for exercising the timing lint and runtime hazard paths).
    Elaboration is idempotent on primitive circuits: re-elaborating an
    already balanced circuit changes nothing.
    """
    lib = _default_library() if library is None else library
    diags = [d for d in validate(ast, lib) if d.severity == "error"]
    if diags:
        raise ElaborationError("invalid netlist", tuple(diags))
    flat = ast
    for _ in range(_MACRO_EXPANSION_LIMIT):
        if not flat.gates:
            break
        flat = _expand_once(flat, lib)
    else:
        raise ElaborationError("macro expansion did not converge "
                               f"after {_MACRO_EXPANSION_LIMIT} rounds")
    diags = [d for d in validate(flat, {}) if d.severity == "error"]
    if diags:
        raise ElaborationError("elaboration produced an invalid circuit",
                               tuple(diags))
    return _levelize(flat, strict=strict, insert_holds=insert_holds)


def circuit_to_ast(circuit: Circuit) -> CircuitAst:
    """Lower an elaborated circuit back to an AST (no gate instances)."""
    decls = tuple(
        NodeDecl(node.name, node.kind, node.hold_phases)
        for node in circuit.nodes.values()
        if node.kind not in (NodeKind.INPUT, NodeKind.OUTPUT))
    return CircuitAst(circuit.name, circuit.inputs, circuit.outputs,
                      decls, (), circuit.channels)
