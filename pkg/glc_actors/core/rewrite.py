"""
GLC Actors - 書き換え規則

各規則の左辺パターン探索（find_sites）と右辺への置換（apply_move）。
局所規則は「左辺ノードのポート（穴）をどう塞ぐか」を記述した置換計画 Plan で表し、
共通の splice 処理が境界の矢印を繋ぎ直す。GLOBAL-FANOUT のみ部分グラフ複製で実装する。
"""

from __future__ import annotations
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterable, Iterator, List, Optional, Tuple, Union
import logging

from ..config import settings
from ..database import RuleCatalog
from ..exceptions import NotDetachable, RewriteError, StaleMatch
from ..models.enums import NodeType, RuleName
from ..models.graph import (
    APPLICATION,
    COPIER,
    FANIN,
    FANOUT,
    LAMBDA,
    OUT,
    STUB,
    TERMINATION,
    Arrow,
    FreeEnd,
    Node,
    PortGraph,
    PortRef,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Match:
    """
    規則の適用箇所

    Args:
        rule: 規則名
        nodes: 左辺ノードのID（パターン順）
        variant: PRUNE-FANOUT / DIST-FANOUT の対象出力（"out1" / "out2"）
        region: GLOBAL-FANOUT で複製する部分グラフ
        boundary: マッチ時点の境界矢印（古いマッチの検出用）
        kinds: マッチ時点のノード
    """

    rule: RuleName
    nodes: Tuple[int, ...]
    variant: Optional[str] = None
    region: FrozenSet[int] = frozenset()
    boundary: FrozenSet[Arrow] = field(default=frozenset(), compare=False, repr=False)
    kinds: Tuple[Node, ...] = field(default=(), compare=False, repr=False)

    @property
    def touched(self) -> Tuple[int, ...]:
        """置換で消えるノード（GLOBAL-FANOUT では複製元も含む）"""
        return self.nodes + tuple(sorted(self.region))

    def sort_key(self) -> Tuple:
        return (self.nodes, self.variant or "")

    def __str__(self) -> str:
        suffix = f"[{self.variant}]" if self.variant else ""
        return f"{self.rule.value}{suffix}@{list(self.nodes)}"


# --- 置換計画 ---


@dataclass(frozen=True)
class NewPort:
    """右辺で新しく作るノードのポート"""

    index: int
    role: str


@dataclass(frozen=True)
class Join:
    """左辺の別のポートの外側と直結する"""

    port: PortRef


@dataclass
class Plan:
    """
    局所規則の置換計画

    holes に載らない左辺ポートは行き止まりとして捨てられる。
    """

    nodes: List[Node] = field(default_factory=list)
    holes: Dict[PortRef, Union[NewPort, Join]] = field(default_factory=dict)
    wires: List[Tuple[NewPort, NewPort]] = field(default_factory=list)

    def add(self, node: Node) -> int:
        self.nodes.append(node)
        return len(self.nodes) - 1

    def wire(self, source: Tuple[int, str], target: Tuple[int, str]) -> None:
        self.wires.append((NewPort(*source), NewPort(*target)))


def _is(node_type: NodeType) -> Callable[[Node], bool]:
    return lambda node: node.type is node_type


def _is_copier(node: Node) -> bool:
    return node.type is NodeType.FANOUT and node.copier


def _is_sharing(node: Node) -> bool:
    return node.type is NodeType.FANOUT and not node.copier


# 規則名 → (上側ノード条件, 上側の出力ポート, 下側ノード条件, 下側の入力ポート, variant)
PAIR_PATTERNS: Dict[RuleName, List[Tuple[Callable, str, Callable, str, Optional[str]]]] = {
    RuleName.BETA: [(_is(NodeType.LAMBDA), "out", _is(NodeType.APPLICATION), "fun-in", None)],
    RuleName.CO_ASSOC: [(_is(NodeType.FANOUT), "out2", _is(NodeType.FANOUT), "in", None)],
    RuleName.PRUNE_APP: [(_is(NodeType.APPLICATION), "out", _is(NodeType.TERMINATION), "in", None)],
    RuleName.PRUNE_FANOUT: [
        (_is(NodeType.FANOUT), "out1", _is(NodeType.TERMINATION), "in", "out1"),
        (_is(NodeType.FANOUT), "out2", _is(NodeType.TERMINATION), "in", "out2"),
    ],
    RuleName.PRUNE_LAMBDA: [(_is(NodeType.LAMBDA), "out", _is(NodeType.TERMINATION), "in", None)],
    RuleName.PRUNE_TERM_STUB: [(_is(NodeType.STUB), "out", _is(NodeType.TERMINATION), "in", None)],
    RuleName.PRUNE_FANIN: [(_is(NodeType.FANIN), "out", _is(NodeType.TERMINATION), "in", None)],
    RuleName.FAN_IN: [(_is(NodeType.FANIN), "out", _is_copier, "in", None)],
    RuleName.DIST_APP: [(_is(NodeType.APPLICATION), "out", _is(NodeType.FANOUT), "in", None)],
    RuleName.DIST_LAMBDA: [(_is(NodeType.LAMBDA), "out", _is(NodeType.FANOUT), "in", None)],
    RuleName.DIST_FANOUT: [
        (_is_sharing, "out1", _is_copier, "in", "out1"),
        (_is_sharing, "out2", _is_copier, "in", "out2"),
    ],
    RuleName.DIST_STUB: [(_is(NodeType.STUB), "out", _is(NodeType.FANOUT), "in", None)],
}


def _boundary(g: PortGraph, nodes: Iterable[int]) -> FrozenSet[Arrow]:
    return frozenset(a for n in nodes for a in g.incident(n))


def _make_match(
    g: PortGraph,
    rule: RuleName,
    nodes: Tuple[int, ...],
    variant: Optional[str] = None,
    region: FrozenSet[int] = frozenset(),
) -> Match:
    touched = nodes + tuple(sorted(region))
    return Match(
        rule=rule,
        nodes=nodes,
        variant=variant,
        region=region,
        boundary=_boundary(g, touched),
        kinds=tuple(g.nodes[n] for n in touched),
    )


def _pair_sites(g: PortGraph, rule: RuleName) -> Iterator[Match]:
    for upper, role, lower, lower_role, variant in PAIR_PATTERNS[rule]:
        for u in sorted(g.nodes):
            if not upper(g.nodes[u]):
                continue
            target = g.peer(PortRef(u, role))
            if (
                isinstance(target, PortRef)
                and target.role == lower_role
                and target.node != u
                and lower(g.nodes[target.node])
            ):
                yield _make_match(g, rule, (u, target.node), variant)


def detachable_region(g: PortGraph, fanout: int) -> FrozenSet[int]:
    """
    FanOut の in に流れ込む部分グラフを返す

    in への矢印を切った source 側の連結成分が FanOut 自身を含まず、
    自由端も他の境界矢印も持たないときに限り切り離し可能とする。

    Raises:
        NotDetachable: 部分グラフが空、または切り離せない
    """
    node = g.nodes.get(fanout)
    if node is None or node.type is not NodeType.FANOUT:
        raise NotDetachable(f"node {fanout} is not a FanOut")
    feed = g.arrow_at(PortRef(fanout, "in"))
    if feed is None or not isinstance(feed.source, PortRef):
        raise NotDetachable(f"FanOut {fanout} is fed by a bare wire, nothing to duplicate")

    region = set()
    stack = [feed.source.node]
    while stack:
        current = stack.pop()
        if current in region:
            continue
        if current == fanout:
            raise NotDetachable(f"the subgraph feeding FanOut {fanout} reaches the FanOut itself")
        region.add(current)
        for arrow in g.incident(current):
            if arrow == feed:
                continue
            for end in (arrow.source, arrow.target):
                if isinstance(end, FreeEnd):
                    raise NotDetachable(
                        f"the subgraph feeding FanOut {fanout} has a free end {end.label}"
                    )
                if end.node not in region:
                    stack.append(end.node)
    return frozenset(region)


def _global_sites(g: PortGraph) -> Iterator[Match]:
    for f in g.ids_of(NodeType.FANOUT):
        try:
            region = detachable_region(g, f)
        except NotDetachable:
            continue
        yield _make_match(g, RuleName.GLOBAL_FANOUT, (f,), region=region)


def _co_comm_sites(g: PortGraph) -> Iterator[Match]:
    for f in g.ids_of(NodeType.FANOUT):
        yield _make_match(g, RuleName.CO_COMM, (f,))


def find_sites(g: PortGraph, rule: Union[RuleName, str]) -> List[Match]:
    """規則の全適用箇所をノードID列の辞書順で返す"""
    if isinstance(rule, str):
        rule = RuleCatalog.lookup(rule)
    if rule is RuleName.GLOBAL_FANOUT:
        found = list(_global_sites(g))
    elif rule is RuleName.CO_COMM:
        found = list(_co_comm_sites(g))
    else:
        found = list(_pair_sites(g, rule))
    return sorted(found, key=Match.sort_key)


def find_all_sites(g: PortGraph, rules: Iterable[RuleName]) -> List[Match]:
    """複数規則の適用箇所を規則の並び順に連結して返す"""
    sites: List[Match] = []
    for rule in rules:
        sites.extend(find_sites(g, rule))
    return sites


# --- 各規則の置換計画 ---


def _fan_in_crossing() -> bool:
    return settings.fan_in_wiring == "crossing"


def _plan_beta(g: PortGraph, m: Match) -> Plan:
    lam, app = m.nodes
    plan = Plan()
    plan.holes[PortRef(lam, "body-in")] = Join(PortRef(app, "out"))
    plan.holes[PortRef(app, "arg-in")] = Join(PortRef(lam, "var-out"))
    return plan


def _plan_co_comm(g: PortGraph, m: Match) -> Plan:
    (f,) = m.nodes
    plan = Plan()
    n0 = plan.add(g.nodes[f])
    plan.holes[PortRef(f, "in")] = NewPort(n0, "in")
    plan.holes[PortRef(f, "out1")] = NewPort(n0, "out2")
    plan.holes[PortRef(f, "out2")] = NewPort(n0, "out1")
    return plan


def _plan_co_assoc(g: PortGraph, m: Match) -> Plan:
    x, t = m.nodes
    plan = Plan()
    n0 = plan.add(g.nodes[x])
    n1 = plan.add(g.nodes[t])
    plan.holes[PortRef(x, "in")] = NewPort(n0, "in")
    plan.holes[PortRef(x, "out1")] = NewPort(n1, "out1")
    plan.holes[PortRef(t, "out1")] = NewPort(n1, "out2")
    plan.holes[PortRef(t, "out2")] = NewPort(n0, "out2")
    plan.wire((n0, "out1"), (n1, "in"))
    return plan


def _plan_prune_app(g: PortGraph, m: Match) -> Plan:
    app, _ = m.nodes
    plan = Plan()
    plan.holes[PortRef(app, "fun-in")] = NewPort(plan.add(TERMINATION), "in")
    plan.holes[PortRef(app, "arg-in")] = NewPort(plan.add(TERMINATION), "in")
    return plan


def _plan_prune_fanout(g: PortGraph, m: Match) -> Plan:
    f, _ = m.nodes
    survivor = "out2" if m.variant == "out1" else "out1"
    plan = Plan()
    plan.holes[PortRef(f, "in")] = Join(PortRef(f, survivor))
    return plan


def _plan_prune_lambda(g: PortGraph, m: Match) -> Plan:
    lam, _ = m.nodes
    plan = Plan()
    plan.holes[PortRef(lam, "body-in")] = NewPort(plan.add(TERMINATION), "in")
    plan.holes[PortRef(lam, "var-out")] = NewPort(plan.add(STUB), "out")
    return plan


def _plan_prune_term_stub(g: PortGraph, m: Match) -> Plan:
    return Plan()


def _plan_prune_fanin(g: PortGraph, m: Match) -> Plan:
    fi, _ = m.nodes
    plan = Plan()
    plan.holes[PortRef(fi, "in1")] = NewPort(plan.add(TERMINATION), "in")
    plan.holes[PortRef(fi, "in2")] = NewPort(plan.add(TERMINATION), "in")
    return plan


def _plan_fan_in(g: PortGraph, m: Match) -> Plan:
    fi, fo = m.nodes
    plan = Plan()
    if _fan_in_crossing():
        plan.holes[PortRef(fi, "in1")] = Join(PortRef(fo, "out2"))
        plan.holes[PortRef(fi, "in2")] = Join(PortRef(fo, "out1"))
    else:
        plan.holes[PortRef(fi, "in1")] = Join(PortRef(fo, "out1"))
        plan.holes[PortRef(fi, "in2")] = Join(PortRef(fo, "out2"))
    return plan


def _plan_dist_app(g: PortGraph, m: Match) -> Plan:
    app, fo = m.nodes
    plan = Plan()
    fun = plan.add(COPIER)
    arg = plan.add(COPIER)
    left = plan.add(APPLICATION)
    right = plan.add(APPLICATION)
    plan.holes[PortRef(app, "fun-in")] = NewPort(fun, "in")
    plan.holes[PortRef(app, "arg-in")] = NewPort(arg, "in")
    plan.holes[PortRef(fo, "out1")] = NewPort(left, "out")
    plan.holes[PortRef(fo, "out2")] = NewPort(right, "out")
    plan.wire((fun, "out1"), (left, "fun-in"))
    plan.wire((arg, "out1"), (left, "arg-in"))
    plan.wire((fun, "out2"), (right, "fun-in"))
    plan.wire((arg, "out2"), (right, "arg-in"))
    return plan


def _plan_dist_lambda(g: PortGraph, m: Match) -> Plan:
    lam, fo = m.nodes
    plan = Plan()
    body = plan.add(COPIER)
    left = plan.add(LAMBDA)
    right = plan.add(LAMBDA)
    merge = plan.add(FANIN)
    plan.holes[PortRef(lam, "body-in")] = NewPort(body, "in")
    plan.holes[PortRef(lam, "var-out")] = NewPort(merge, "out")
    plan.holes[PortRef(fo, "out1")] = NewPort(left, "out")
    plan.holes[PortRef(fo, "out2")] = NewPort(right, "out")
    plan.wire((body, "out1"), (left, "body-in"))
    plan.wire((body, "out2"), (right, "body-in"))
    # 後続の FAN-IN が変数を各複製へ戻せるよう、FanIn の入力順を配線設定に合わせる
    if _fan_in_crossing():
        plan.wire((left, "var-out"), (merge, "in2"))
        plan.wire((right, "var-out"), (merge, "in1"))
    else:
        plan.wire((left, "var-out"), (merge, "in1"))
        plan.wire((right, "var-out"), (merge, "in2"))
    return plan


def _plan_dist_fanout(g: PortGraph, m: Match) -> Plan:
    upper, copier = m.nodes
    p = m.variant or "out1"
    q = "out2" if p == "out1" else "out1"
    plan = Plan()
    source = plan.add(COPIER)
    left = plan.add(g.nodes[upper])
    right = plan.add(g.nodes[upper])
    merge = plan.add(FANIN)
    plan.holes[PortRef(upper, "in")] = NewPort(source, "in")
    plan.holes[PortRef(copier, "out1")] = NewPort(left, p)
    plan.holes[PortRef(copier, "out2")] = NewPort(right, p)
    plan.holes[PortRef(upper, q)] = NewPort(merge, "out")
    plan.wire((source, "out1"), (left, "in"))
    plan.wire((source, "out2"), (right, "in"))
    if _fan_in_crossing():
        plan.wire((left, q), (merge, "in2"))
        plan.wire((right, q), (merge, "in1"))
    else:
        plan.wire((left, q), (merge, "in1"))
        plan.wire((right, q), (merge, "in2"))
    return plan


def _plan_dist_stub(g: PortGraph, m: Match) -> Plan:
    _, fo = m.nodes
    plan = Plan()
    plan.holes[PortRef(fo, "out1")] = NewPort(plan.add(STUB), "out")
    plan.holes[PortRef(fo, "out2")] = NewPort(plan.add(STUB), "out")
    return plan


RULE_PLANS: Dict[RuleName, Callable[[PortGraph, Match], Plan]] = {
    RuleName.BETA: _plan_beta,
    RuleName.CO_COMM: _plan_co_comm,
    RuleName.CO_ASSOC: _plan_co_assoc,
    RuleName.PRUNE_APP: _plan_prune_app,
    RuleName.PRUNE_FANOUT: _plan_prune_fanout,
    RuleName.PRUNE_LAMBDA: _plan_prune_lambda,
    RuleName.PRUNE_TERM_STUB: _plan_prune_term_stub,
    RuleName.PRUNE_FANIN: _plan_prune_fanin,
    RuleName.FAN_IN: _plan_fan_in,
    RuleName.DIST_APP: _plan_dist_app,
    RuleName.DIST_LAMBDA: _plan_dist_lambda,
    RuleName.DIST_FANOUT: _plan_dist_fanout,
    RuleName.DIST_STUB: _plan_dist_stub,
}


# --- 置換の実行 ---


class _Components:
    """穴と新ポートを頂点とする union-find（辺数も数えて閉路を検出する）"""

    def __init__(self) -> None:
        self.parent: Dict[tuple, tuple] = {}
        self.edges: List[Tuple[tuple, tuple]] = []

    def find(self, x: tuple) -> tuple:
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def link(self, a: tuple, b: tuple) -> None:
        self.edges.append((a, b))
        self.parent[self.find(a)] = self.find(b)

    def groups(self) -> List[Tuple[List[tuple], int]]:
        members: Dict[tuple, List[tuple]] = {}
        for vertex in list(self.parent):
            members.setdefault(self.find(vertex), []).append(vertex)
        edge_count: Dict[tuple, int] = {}
        for a, _ in self.edges:
            root = self.find(a)
            edge_count[root] = edge_count.get(root, 0) + 1
        return [(vertices, edge_count.get(root, 0)) for root, vertices in members.items()]


def splice(g: PortGraph, lhs: Tuple[int, ...], plan: Plan) -> Tuple[PortGraph, List[int]]:
    """
    左辺ノードを取り除き、計画どおりに右辺ノードと境界を繋ぐ

    Returns:
        (新しいグラフ, 追加したノードID)
    """
    lhs_set = set(lhs)
    result = g.copy()
    base = g.next_id()
    boundary = sorted(_boundary(g, lhs), key=Arrow.key)
    for node_id in lhs:
        result.remove_node(node_id)

    uf = _Components()
    terminals = {}
    for node_id in lhs:
        for role in g.nodes[node_id].roles:
            uf.find(("hole", PortRef(node_id, role)))

    for arrow in boundary:
        source_inside = isinstance(arrow.source, PortRef) and arrow.source.node in lhs_set
        target_inside = isinstance(arrow.target, PortRef) and arrow.target.node in lhs_set
        if source_inside and target_inside:
            uf.link(("hole", arrow.source), ("hole", arrow.target))
        elif source_inside:
            terminals[("ext", arrow.target)] = (arrow.target, False)
            uf.link(("hole", arrow.source), ("ext", arrow.target))
        else:
            terminals[("ext", arrow.source)] = (arrow.source, True)
            uf.link(("hole", arrow.target), ("ext", arrow.source))

    new_ids = []
    for index, node in enumerate(plan.nodes):
        node_id = result.add_node(node, base + index)
        new_ids.append(node_id)
        for role, direction in node.ports:
            vertex = ("new", NewPort(index, role))
            uf.find(vertex)
            terminals[vertex] = (PortRef(node_id, role), direction == OUT)

    for port, fill in plan.holes.items():
        if isinstance(fill, NewPort):
            uf.link(("hole", port), ("new", fill))
        else:
            uf.link(("hole", port), ("hole", fill.port))
    for source, target in plan.wires:
        uf.link(("new", source), ("new", target))

    for vertices, edge_count in uf.groups():
        ends = [terminals[v] for v in vertices if v in terminals]
        if len(ends) == 2:
            sources = [end for end, is_source in ends if is_source]
            targets = [end for end, is_source in ends if not is_source]
            if len(sources) != 1:
                raise RewriteError(f"misoriented wire between {ends[0][0]} and {ends[1][0]}")
            result.connect(sources[0], targets[0])
        elif not ends:
            # 端を持たない成分: 閉路なら節点のないループ、道なら消える
            if edge_count >= len(vertices):
                result.loops += edge_count - len(vertices) + 1
        else:
            raise RewriteError(f"rule leaves {len(ends)} loose ends in one wire")
    return result, new_ids


def _apply_global_fanout(g: PortGraph, m: Match) -> Tuple[PortGraph, List[int]]:
    (fanout,) = m.nodes
    region = sorted(m.region)
    feed = g.arrow_at(PortRef(fanout, "in"))
    first = g.peer(PortRef(fanout, "out1"))
    second = g.peer(PortRef(fanout, "out2"))

    result = g.copy()
    result.remove_node(fanout)
    base = g.next_id()
    mapping = {old: base + i for i, old in enumerate(region)}
    for old in region:
        result.add_node(g.nodes[old], mapping[old])

    internal = _boundary(g, region) - {feed}
    for arrow in sorted(internal, key=Arrow.key):
        result.connect(
            PortRef(mapping[arrow.source.node], arrow.source.role),
            PortRef(mapping[arrow.target.node], arrow.target.role),
        )
    result.connect(feed.source, first)
    result.connect(PortRef(mapping[feed.source.node], feed.source.role), second)
    return result, [mapping[old] for old in region]


def _check_current(g: PortGraph, m: Match) -> None:
    touched = m.touched
    for node_id, kind in zip(touched, m.kinds):
        if g.nodes.get(node_id) != kind:
            raise StaleMatch(f"{m}: node {node_id} changed since matching")
    if len(m.kinds) != len(touched) or _boundary(g, touched) != m.boundary:
        raise StaleMatch(f"{m}: neighbourhood changed since matching")


def apply_move_with_ids(g: PortGraph, m: Match) -> Tuple[PortGraph, List[int]]:
    """apply_move と同じだが、追加されたノードIDも返す"""
    _check_current(g, m)
    if m.rule is RuleName.GLOBAL_FANOUT:
        result, new_ids = _apply_global_fanout(g, m)
    else:
        result, new_ids = splice(g, m.nodes, RULE_PLANS[m.rule](g, m))
    logger.debug(
        "move applied",
        extra={"rule": m.rule.value, "nodes": list(m.nodes), "new_nodes": new_ids},
    )
    return result, new_ids


def apply_move(g: PortGraph, m: Match) -> PortGraph:
    """
    マッチ箇所を右辺に置き換えた新しいグラフを返す（元のグラフは変更しない）

    Raises:
        StaleMatch: マッチ取得後にグラフが変化している
    """
    return apply_move_with_ids(g, m)[0]
