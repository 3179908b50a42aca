"""
GLC Actors - MolText パーサー

1行1ノードのテキスト形式（MolText）とポートグラフの相互変換、および DOT 出力。
"""

from __future__ import annotations
from collections import defaultdict
from fractions import Fraction
from typing import Dict, List, Tuple
import re

from ..exceptions import (
    ArityMismatch,
    BadScale,
    DuplicateLabelOverflow,
    GlcError,
    MolSyntaxError,
    OrientationClash,
)
from .enums import NodeType
from .graph import IN, OUT, Arrow, Endpoint, FreeEnd, Node, PortGraph, PortRef

# 行頭キーワード → (ノード種別, copier)
KIND_KEYWORDS: Dict[str, Tuple[NodeType, bool]] = {
    "L": (NodeType.LAMBDA, False),
    "A": (NodeType.APPLICATION, False),
    "FO": (NodeType.FANOUT, False),
    "FOE": (NodeType.FANOUT, True),
    "FI": (NodeType.FANIN, False),
    "D": (NodeType.DILATION, False),
    "T": (NodeType.TERMINATION, False),
    "S": (NodeType.STUB, False),
    "C": (NodeType.CORE, False),
}

DOT_SHAPES: Dict[NodeType, str] = {
    NodeType.LAMBDA: "triangle",
    NodeType.APPLICATION: "invtriangle",
    NodeType.FANOUT: "diamond",
    NodeType.FANIN: "Mdiamond",
    NodeType.DILATION: "circle",
    NodeType.TERMINATION: "square",
    NodeType.STUB: "house",
    NodeType.CORE: "doubleoctagon",
}


class MolParser:
    """MolText をパースして PortGraph を生成するクラス"""

    LINE_PATTERNS = {
        "comment": r"^\s*(#.*)?$",
        "loop": r"^\s*LOOP\s+(\d+)\s*$",
        "arrow": r"^\s*ARROW\s+(\S+)\s+(\S+)\s*$",
        "core": r"^\s*C\s+(\S+)\s+(\d+)\s+([io]+)((?:\s+\S+)*)\s*$",
        "node": r"^\s*(\S+)((?:\s+\S+)*)\s*$",
    }
    RATIONAL_PATTERN = r"^\d+(/\d+)?$"

    @classmethod
    def parse(cls, text: str) -> PortGraph:
        """MolText をパースして PortGraph を返す"""
        occurrences: Dict[str, List[Tuple[Endpoint, str, int]]] = defaultdict(list)
        g = PortGraph()
        wires: List[int] = []
        wire_ports: Dict[int, Tuple[str, str]] = {}
        loops = 0
        next_wire = -1

        def occur(label: str, endpoint: Endpoint, direction: str, line_no: int) -> None:
            occurrences[label].append((endpoint, direction, line_no))
            if len(occurrences[label]) > 2:
                raise DuplicateLabelOverflow(f"line {line_no}: label {label} occurs more than twice")

        for line_no, line in enumerate(text.splitlines(), start=1):
            if re.match(cls.LINE_PATTERNS["comment"], line):
                continue

            loop_match = re.match(cls.LINE_PATTERNS["loop"], line)
            if loop_match:
                loops += int(loop_match.group(1))
                continue

            arrow_match = re.match(cls.LINE_PATTERNS["arrow"], line)
            if arrow_match:
                # ノードを持たない配線：src 側は in、dst 側は out として扱い後で縮約する
                wire = next_wire
                next_wire -= 1
                wires.append(wire)
                wire_ports[wire] = (arrow_match.group(1), arrow_match.group(2))
                occur(arrow_match.group(1), PortRef(wire, "in"), IN, line_no)
                occur(arrow_match.group(2), PortRef(wire, "out"), OUT, line_no)
                continue

            tokens = line.split()
            keyword = tokens[0]
            if keyword not in KIND_KEYWORDS:
                raise MolSyntaxError(f"unknown node kind {keyword!r}", line_no)
            node_type, copier = KIND_KEYWORDS[keyword]

            if node_type is NodeType.CORE:
                core_match = re.match(cls.LINE_PATTERNS["core"], line)
                if not core_match:
                    raise MolSyntaxError("Core lines read 'C tag k dirs labels...'", line_no)
                tag, arity, dirs = core_match.group(1), int(core_match.group(2)), core_match.group(3)
                labels = core_match.group(4).split()
                if len(dirs) != arity or len(labels) != arity:
                    raise ArityMismatch(f"line {line_no}: Core {tag} declares {arity} ports")
                node = Node(NodeType.CORE, tag=tag, dirs=dirs)
            elif node_type is NodeType.DILATION:
                labels = tokens[1:]
                if len(labels) != 4:
                    raise ArityMismatch(f"line {line_no}: Dilation needs 3 labels and a scale")
                node = Node(NodeType.DILATION, scale=cls._parse_scale(labels.pop(), line_no))
            else:
                labels = tokens[1:]
                node = Node(node_type, copier=copier)
                if len(labels) != node.arity:
                    raise ArityMismatch(
                        f"line {line_no}: {node.name} needs {node.arity} labels, got {len(labels)}"
                    )

            node_id = g.add_node(node)
            for (role, direction), label in zip(node.ports, labels):
                occur(label, PortRef(node_id, role), direction, line_no)

        pending: List[Tuple[Endpoint, Endpoint]] = []
        for label, ends in occurrences.items():
            if len(ends) == 1:
                endpoint, direction, _ = ends[0]
                if direction == IN:
                    pending.append((FreeEnd(label), endpoint))
                else:
                    pending.append((endpoint, FreeEnd(label)))
                continue
            (first, dir1, _), (second, dir2, line_no) = ends
            if dir1 == dir2:
                raise OrientationClash(
                    f"line {line_no}: label {label} joins two {dir1}-directed ports"
                )
            pending.append((first, second) if dir1 == OUT else (second, first))

        loops += cls._contract_wires(g, pending, set(wires))
        g.loops = loops
        return g

    @classmethod
    def _parse_scale(cls, token: str, line_no: int) -> Fraction:
        if not re.match(cls.RATIONAL_PATTERN, token):
            raise BadScale(f"line {line_no}: scale {token!r} is not a positive rational")
        try:
            scale = Fraction(token)
        except (ValueError, ZeroDivisionError) as e:
            raise BadScale(f"line {line_no}: bad scale {token!r}", e)
        if scale <= 0:
            raise BadScale(f"line {line_no}: scale must be positive")
        return scale

    @staticmethod
    def _contract_wires(g: PortGraph, pending: List[Tuple[Endpoint, Endpoint]], wires: set) -> int:
        """ARROW 行の疑似ノードを縮約して矢印を確定し、生じた閉路の数を返す"""

        def is_wire(end: Endpoint) -> bool:
            return isinstance(end, PortRef) and end.node in wires

        into: Dict[int, Endpoint] = {}
        out_of: Dict[int, Endpoint] = {}
        for source, target in pending:
            if is_wire(target):
                into[target.node] = source
            if is_wire(source):
                out_of[source.node] = target
            if not is_wire(source) and not is_wire(target):
                g.connect(source, target)

        loops = 0
        done = set()
        for wire in sorted(wires, reverse=True):
            if wire in done:
                continue
            # 上流へ遡って配線鎖の始点を探す
            start = wire
            cycle = False
            while is_wire(into[start]):
                start = into[start].node
                if start == wire:
                    cycle = True
                    break
            if cycle:
                current = wire
                while current not in done:
                    done.add(current)
                    current = out_of[current].node
                loops += 1
                continue
            source = into[start]
            current = start
            while True:
                done.add(current)
                target = out_of[current]
                if not is_wire(target):
                    break
                current = target.node
            g.connect(source, target)
        return loops


def parse_mol(text: str) -> PortGraph:
    """MolText → PortGraph"""
    try:
        return MolParser.parse(text)
    except GlcError:
        raise
    except (ValueError, KeyError) as e:
        raise MolSyntaxError("malformed MolText", original_error=e)


def _canonical_labels(g: PortGraph) -> Dict[Tuple[Arrow, int], str]:
    """ノードID順・ポート順に初出の矢印へ a0, a1, ... を割り当てる"""
    labels: Dict[Arrow, str] = {}
    for node_id in sorted(g.nodes):
        for role in g.nodes[node_id].roles:
            arrow = g.arrow_at(PortRef(node_id, role))
            if arrow is not None and arrow not in labels:
                labels[arrow] = f"a{len(labels)}"
    return labels


def to_mol(g: PortGraph) -> str:
    """PortGraph → 決定的な MolText"""
    labels = _canonical_labels(g)
    lines: List[str] = []
    for node_id in sorted(g.nodes):
        node = g.nodes[node_id]
        port_labels = []
        for role in node.roles:
            arrow = g.arrow_at(PortRef(node_id, role))
            port_labels.append(labels[arrow] if arrow is not None else "?")
        if node.type is NodeType.CORE:
            lines.append(f"C {node.tag} {node.arity} {node.dirs} " + " ".join(port_labels))
        elif node.type is NodeType.DILATION:
            lines.append("D " + " ".join(port_labels) + f" {node.scale}")
        else:
            keyword = "FOE" if node.copier else node.type.value
            lines.append(keyword + " " + " ".join(port_labels))

    open_wires = sorted(
        (a for a in g.arrows if isinstance(a.source, FreeEnd) and isinstance(a.target, FreeEnd)),
        key=Arrow.key,
    )
    counter = len(labels)
    for _ in open_wires:
        lines.append(f"ARROW a{counter} a{counter + 1}")
        counter += 2
    if g.loops:
        lines.append(f"LOOP {g.loops}")
    return "\n".join(lines)


def to_dot(g: PortGraph) -> str:
    """PortGraph → DOT テキスト（自由端は点として描く）"""
    lines = ["digraph glc {", "  node [shape=point, label=\"\"];"]
    for node_id in sorted(g.nodes):
        node = g.nodes[node_id]
        lines.append(f'  n{node_id} [shape={DOT_SHAPES[node.type]}, label="{node}"];')

    def name(end: Endpoint) -> str:
        return f"n{end.node}" if isinstance(end, PortRef) else f'"free:{end.label}"'

    for arrow in g.sorted_arrows():
        attrs = []
        if isinstance(arrow.source, PortRef):
            attrs.append(f'taillabel="{arrow.source.role}"')
        if isinstance(arrow.target, PortRef):
            attrs.append(f'headlabel="{arrow.target.role}"')
        suffix = f" [{', '.join(attrs)}]" if attrs else ""
        lines.append(f"  {name(arrow.source)} -> {name(arrow.target)}{suffix};")
    if g.loops:
        lines.append(f"  // loops: {g.loops}")
    lines.append("}")
    return "\n".join(lines) + "\n"
