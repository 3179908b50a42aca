"""
GLC Actors - ポートグラフ

GLC グラフ / chemlambda 分子を表現する向き付き三価ポートグラフのデータモデル。
各ノードのポートは名前付きの役割を持ち、矢印は out 側端点から in 側端点へ向かう。
"""

from __future__ import annotations
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple, Union

from ..exceptions import ArityMismatch, BadScale
from .enums import NodeType

IN = "in"
OUT = "out"

PORT_LAYOUT: Dict[NodeType, Tuple[Tuple[str, str], ...]] = {
    NodeType.LAMBDA: (("body-in", IN), ("var-out", OUT), ("out", OUT)),
    NodeType.APPLICATION: (("fun-in", IN), ("arg-in", IN), ("out", OUT)),
    NodeType.FANOUT: (("in", IN), ("out1", OUT), ("out2", OUT)),
    NodeType.FANIN: (("in1", IN), ("in2", IN), ("out", OUT)),
    NodeType.DILATION: (("in1", IN), ("in2", IN), ("out", OUT)),
    NodeType.TERMINATION: (("in", IN),),
    NodeType.STUB: (("out", OUT),),
}

TYPE_NAMES: Dict[NodeType, str] = {
    NodeType.LAMBDA: "Lambda",
    NodeType.APPLICATION: "Application",
    NodeType.FANOUT: "FanOut",
    NodeType.FANIN: "FanIn",
    NodeType.DILATION: "Dilation",
    NodeType.TERMINATION: "Termination",
    NodeType.STUB: "Stub",
    NodeType.CORE: "Core",
}


@dataclass(frozen=True)
class Node:
    """
    グラフのノード

    Args:
        type: ノード種別
        scale: Dilation のスケール（正の有理数）
        tag: Core のタグ
        dirs: Core の各ポートの向き（"i"/"o" の文字列）
        copier: DIST 系の規則が生成した複製用 FanOut かどうか
    """

    type: NodeType
    scale: Optional[Fraction] = None
    tag: Optional[str] = None
    dirs: Optional[str] = None
    copier: bool = False

    def __post_init__(self) -> None:
        if self.type is NodeType.DILATION:
            if not isinstance(self.scale, Fraction) or self.scale <= 0:
                raise BadScale(f"Dilation scale must be a positive rational: {self.scale!r}")
        if self.type is NodeType.CORE:
            if not self.tag or not self.dirs or set(self.dirs) - {"i", "o"}:
                raise ArityMismatch(f"Core needs a tag and an i/o mask: {self.tag!r} {self.dirs!r}")
        if self.copier and self.type is not NodeType.FANOUT:
            raise ValueError("Only FanOut nodes can be copiers")

    @property
    def ports(self) -> Tuple[Tuple[str, str], ...]:
        """(役割, 向き) の組をポート順に返す"""
        if self.type is NodeType.CORE:
            return tuple(
                (f"c{i}", IN if ch == "i" else OUT) for i, ch in enumerate(self.dirs or "")
            )
        return PORT_LAYOUT[self.type]

    @property
    def roles(self) -> Tuple[str, ...]:
        return tuple(role for role, _ in self.ports)

    @property
    def arity(self) -> int:
        return len(self.ports)

    def direction(self, role: str) -> Optional[str]:
        for name, direction in self.ports:
            if name == role:
                return direction
        return None

    @property
    def name(self) -> str:
        return TYPE_NAMES[self.type]

    def __str__(self) -> str:
        if self.type is NodeType.DILATION:
            return f"Dilation({self.scale})"
        if self.type is NodeType.CORE:
            return f"Core({self.tag}, {self.arity})"
        if self.copier:
            return "FanOut*"
        return self.name


LAMBDA = Node(NodeType.LAMBDA)
APPLICATION = Node(NodeType.APPLICATION)
FANOUT = Node(NodeType.FANOUT)
COPIER = Node(NodeType.FANOUT, copier=True)
FANIN = Node(NodeType.FANIN)
TERMINATION = Node(NodeType.TERMINATION)
STUB = Node(NodeType.STUB)


@dataclass(frozen=True, order=True)
class PortRef:
    """ノードのポート"""

    node: int
    role: str

    def __str__(self) -> str:
        return f"{self.node}.{self.role}"


@dataclass(frozen=True, order=True)
class FreeEnd:
    """自由な半矢印（ラベルはグラフ内で一意）"""

    label: str

    def __str__(self) -> str:
        return f"~{self.label}"


Endpoint = Union[PortRef, FreeEnd]


def endpoint_key(endpoint: Endpoint) -> Tuple:
    """PortRef と FreeEnd を混在させて並べるためのキー"""
    if isinstance(endpoint, PortRef):
        return (0, endpoint.node, endpoint.role)
    return (1, 0, endpoint.label)


@dataclass(frozen=True)
class Arrow:
    """source（out 側）から target（in 側）への矢印"""

    source: Endpoint
    target: Endpoint

    def key(self) -> Tuple:
        return endpoint_key(self.source) + endpoint_key(self.target)

    def other(self, endpoint: Endpoint) -> Endpoint:
        return self.target if endpoint == self.source else self.source

    def __str__(self) -> str:
        return f"{self.source} -> {self.target}"


@dataclass
class Violation:
    """検証で見つかった不整合"""

    kind: str
    detail: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.detail}"


@dataclass
class ValidationReport:
    """validate の結果（違反がなければ空）"""

    violations: List[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> List[str]:
        return [v.kind for v in self.violations]

    def add(self, kind: str, detail: str) -> None:
        self.violations.append(Violation(kind, detail))

    def __len__(self) -> int:
        return len(self.violations)

    def __str__(self) -> str:
        if self.ok:
            return "valid"
        return "\n".join(str(v) for v in self.violations)


@dataclass
class PortGraph:
    """
    向き付き三価ポートグラフ

    Args:
        nodes: ノードID → ノード
        arrows: 矢印の集合
        loops: ノードを通らない閉じた矢印の数
    """

    nodes: Dict[int, Node] = field(default_factory=dict)
    arrows: Set[Arrow] = field(default_factory=set)
    loops: int = 0
    _index: Optional[Dict[Endpoint, Arrow]] = field(
        default=None, repr=False, compare=False
    )

    # 構築

    def copy(self) -> "PortGraph":
        return PortGraph(dict(self.nodes), set(self.arrows), self.loops)

    def next_id(self) -> int:
        return max(self.nodes) + 1 if self.nodes else 0

    def add_node(self, node: Node, node_id: Optional[int] = None) -> int:
        if node_id is None:
            node_id = self.next_id()
        if node_id in self.nodes:
            raise ValueError(f"Node id already used: {node_id}")
        self.nodes[node_id] = node
        self._index = None
        return node_id

    def replace_node(self, node_id: int, node: Node) -> None:
        """同じポート構成のノードに差し替える"""
        if self.nodes[node_id].ports != node.ports:
            raise ValueError("Replacement must keep the port layout")
        self.nodes[node_id] = node

    def connect(self, source: Endpoint, target: Endpoint) -> Arrow:
        arrow = Arrow(source, target)
        self.arrows.add(arrow)
        self._index = None
        return arrow

    def disconnect(self, arrow: Arrow) -> None:
        self.arrows.discard(arrow)
        self._index = None

    def remove_node(self, node_id: int) -> List[Arrow]:
        """ノードと接続する矢印を削除し、削除した矢印を返す"""
        removed = self.incident(node_id)
        for arrow in removed:
            self.arrows.discard(arrow)
        del self.nodes[node_id]
        self._index = None
        return removed

    # 参照

    def index(self) -> Dict[Endpoint, Arrow]:
        """端点 → 矢印 の索引（両端を登録）"""
        if self._index is None:
            index: Dict[Endpoint, Arrow] = {}
            for arrow in self.arrows:
                index[arrow.source] = arrow
                index[arrow.target] = arrow
            self._index = index
        return self._index

    def arrow_at(self, endpoint: Endpoint) -> Optional[Arrow]:
        return self.index().get(endpoint)

    def peer(self, endpoint: Endpoint) -> Optional[Endpoint]:
        """端点の矢印の反対側"""
        arrow = self.arrow_at(endpoint)
        return None if arrow is None else arrow.other(endpoint)

    def peer_node(self, node_id: int, role: str) -> Optional[int]:
        other = self.peer(PortRef(node_id, role))
        return other.node if isinstance(other, PortRef) else None

    def incident(self, node_id: int) -> List[Arrow]:
        node = self.nodes[node_id]
        index = self.index()
        found: List[Arrow] = []
        for role in node.roles:
            arrow = index.get(PortRef(node_id, role))
            if arrow is not None and arrow not in found:
                found.append(arrow)
        return found

    def neighbors(self, node_id: int) -> List[int]:
        result = []
        for arrow in self.incident(node_id):
            for end in (arrow.source, arrow.target):
                if isinstance(end, PortRef) and end.node != node_id and end.node not in result:
                    result.append(end.node)
        return result

    def sorted_arrows(self) -> List[Arrow]:
        return sorted(self.arrows, key=Arrow.key)

    def free_inputs(self) -> List[str]:
        """入力側自由端（矢印の source が自由端）のラベル"""
        return sorted(a.source.label for a in self.arrows if isinstance(a.source, FreeEnd))

    def free_outputs(self) -> List[str]:
        """出力側自由端（矢印の target が自由端）のラベル"""
        return sorted(a.target.label for a in self.arrows if isinstance(a.target, FreeEnd))

    def free_labels(self) -> Set[str]:
        return set(self.free_inputs()) | set(self.free_outputs())

    def fresh_label(self, stem: str = "f") -> str:
        used = self.free_labels()
        n = 0
        while f"{stem}{n}" in used:
            n += 1
        return f"{stem}{n}"

    def count(self, node_type: NodeType) -> int:
        return sum(1 for node in self.nodes.values() if node.type is node_type)

    def ids_of(self, node_type: NodeType) -> List[int]:
        return sorted(i for i, node in self.nodes.items() if node.type is node_type)

    def components(self, within: Optional[Iterable[int]] = None) -> List[FrozenSet[int]]:
        """ノード集合の連結成分（矢印を無向に辿る）を最小ID順に返す"""
        pool = set(self.nodes if within is None else within)
        seen: Set[int] = set()
        result: List[FrozenSet[int]] = []
        for start in sorted(pool):
            if start in seen:
                continue
            stack = [start]
            component = set()
            while stack:
                current = stack.pop()
                if current in component:
                    continue
                component.add(current)
                stack.extend(n for n in self.neighbors(current) if n in pool and n not in component)
            seen |= component
            result.append(frozenset(component))
        return result

    @property
    def size(self) -> int:
        return len(self.nodes)

    def validate(self) -> ValidationReport:
        return validate(self)

    def to_dict(self) -> Dict[str, object]:
        return {
            "nodes": {i: str(n) for i, n in sorted(self.nodes.items())},
            "arrows": [str(a) for a in self.sorted_arrows()],
            "loops": self.loops,
        }

    def __str__(self) -> str:
        return f"PortGraph({self.size} nodes, {len(self.arrows)} arrows, {self.loops} loops)"


def validate(g: PortGraph) -> ValidationReport:
    """PortGraph の不変条件を検査し、違反を列挙する"""
    report = ValidationReport()
    seen_ports: Dict[PortRef, int] = {}
    seen_free: Dict[str, int] = {}

    def check_end(end: Endpoint, wanted: str, arrow: Arrow) -> bool:
        if isinstance(end, FreeEnd):
            seen_free[end.label] = seen_free.get(end.label, 0) + 1
            return True
        seen_ports[end] = seen_ports.get(end, 0) + 1
        node = g.nodes.get(end.node)
        if node is None:
            report.add("unknown node", f"{arrow} refers to missing node {end.node}")
            return True
        direction = node.direction(end.role)
        if direction is None:
            report.add("unknown port", f"{arrow} refers to {node} port {end.role}")
            return True
        return direction == wanted

    for arrow in g.sorted_arrows():
        source_ok = check_end(arrow.source, OUT, arrow)
        target_ok = check_end(arrow.target, IN, arrow)
        if not (source_ok and target_ok):
            report.add("orientation", f"{arrow} does not run from an out-port to an in-port")

    for port, count in sorted(seen_ports.items()):
        if count > 1:
            report.add("duplicate endpoint", f"port {port} is used by {count} arrows")
    for label, count in sorted(seen_free.items()):
        if count > 1:
            report.add("duplicate free label", f"free label {label} occurs {count} times")

    for node_id in sorted(g.nodes):
        for role in g.nodes[node_id].roles:
            if PortRef(node_id, role) not in seen_ports:
                report.add("dangling port", f"node {node_id} ({g.nodes[node_id]}) port {role}")

    if g.loops < 0:
        report.add("negative loops", f"loops = {g.loops}")
    return report
