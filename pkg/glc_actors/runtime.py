"""
GLC Actors - アクターランタイム 同期版

グラフをアクターに分割し、スケジューラーに従ってアクターを1つずつ動かす。
全アクターが手詰まりで受信箱が空になった時点（静止状態）で止まり、
正本のグラフ（全アクターの部分グラフの合併）とイベントログを返す。
"""

from __future__ import annotations
from collections import deque
from typing import Dict, Iterable, List, Optional, Tuple, Union
import logging
import re

import networkx as nx

from .core.base_runtime import BaseActorRuntime, counter_node, prepare
from .exceptions import EventLimitExceeded, PartialPartition
from .lambda_sector import ROOT_LABEL, successor_term, term_to_graph
from .models.actor import ActorSystem, Event, LinkLabel
from .models.enums import Mode, Scheduler
from .models.graph import LAMBDA, APPLICATION, FreeEnd, PortGraph, PortRef
from .models.term import fresh_names

logger = logging.getLogger(__name__)


class ActorRuntime(BaseActorRuntime):
    """
    アクターランタイム（同期版）

    round-robin ではアクター名順に、動けるアクターを順番に選ぶ。
    random ではシード付き PCG64 で動けるアクターから1つ選ぶ。
    """

    def run(self) -> Tuple[PortGraph, List[Event]]:
        """
        静止状態になるまで実行する

        Raises:
            EventLimitExceeded: 最大イベント数に到達（途中のグラフとイベントを保持）
        """
        s = self.system
        while not s.quiescent():
            if len(s.events) >= self.max_events:
                logger.info("event limit reached", extra={"events": len(s.events)})
                raise EventLimitExceeded(
                    f"no quiescence within {self.max_events} events",
                    graph=s.graph.copy(),
                    events=list(s.events),
                )
            self.step(self._pick())
        logger.info(
            "actor run quiescent",
            extra={"events": len(s.events), "actors": len(s.actors), "nodes": s.graph.size},
        )
        return s.graph, s.events


# --- 分割 ---

PARTITION_LINE = r"^(\d+)\s+(\S+)$"


def parse_partition(text: str) -> Dict[int, str]:
    """
    分割ファイル（1行に "ノードID アクター名"、# 以降はコメント）を読む

    Raises:
        PartialPartition: 読めない行、または同じノードの重複
    """
    partition: Dict[int, str] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        match = re.match(PARTITION_LINE, line)
        if not match:
            raise PartialPartition(f"line {line_no}: expected 'node-id actor-name': {raw!r}")
        node_id, name = int(match.group(1)), match.group(2).lstrip(":")
        if node_id in partition:
            raise PartialPartition(f"line {line_no}: node {node_id} assigned twice")
        partition[node_id] = name
    return partition


def auto_partition(g: PortGraph, n: int) -> Dict[int, str]:
    """
    最小IDからの幅優先順（隣接ノードはID順）を n 個の連続区間に切る

    アクター名は a, b, c, ... の順に付ける。
    """
    if n < 1:
        raise ValueError(f"need at least one actor: {n}")
    order: List[int] = []
    seen = set()
    for start in sorted(g.nodes):
        if start in seen:
            continue
        seen.add(start)
        queue = deque([start])
        while queue:
            current = queue.popleft()
            order.append(current)
            for neighbor in sorted(g.neighbors(current)):
                if neighbor not in seen:
                    seen.add(neighbor)
                    queue.append(neighbor)

    names = fresh_names()
    partition: Dict[int, str] = {}
    length = len(order)
    for k in range(n):
        name = next(names)
        for node_id in order[k * length // n : (k + 1) * length // n]:
            partition[node_id] = name
    return partition


def actors_diagram(system: ActorSystem) -> nx.Graph:
    """アクターを頂点、リンクを辺（multiplicity とラベル一覧を持つ）とする無向グラフ"""
    diagram = nx.Graph()
    diagram.add_nodes_from(system.names())
    for label in sorted(system.links):
        a, b = label.pair
        if diagram.has_edge(a, b):
            diagram[a][b]["multiplicity"] += 1
            diagram[a][b]["labels"].append(str(label))
        else:
            diagram.add_edge(a, b, multiplicity=1, labels=[str(label)])
    return diagram


# --- Church 数のカウンターコア ---


def numeral_system(n: int, with_successor: bool = True) -> ActorSystem:
    """
    λf.λx.Core_n(f, x) を持つアクター :n と、それに後者関数を適用するアクター :s の系

    コアを発現し切って簡約すると Church 数 n+1（with_successor=False なら n）が読み出せる。
    """
    if n < 0:
        raise ValueError(f"counter value must be non-negative: {n}")
    g = term_to_graph(successor_term()) if with_successor else PortGraph()
    partition = {node_id: "s" for node_id in g.nodes}

    root_target = FreeEnd(ROOT_LABEL)
    if with_successor:
        root = g.arrow_at(FreeEnd(ROOT_LABEL))
        g.disconnect(root)
        app = g.add_node(APPLICATION)
        partition[app] = "s"
        g.connect(root.source, PortRef(app, "fun-in"))
        g.connect(PortRef(app, "out"), FreeEnd(ROOT_LABEL))
        root_target = PortRef(app, "arg-in")

    lam_f = g.add_node(LAMBDA)
    lam_x = g.add_node(LAMBDA)
    core = g.add_node(counter_node(n))
    g.connect(PortRef(lam_f, "out"), root_target)
    g.connect(PortRef(lam_x, "out"), PortRef(lam_f, "body-in"))
    g.connect(PortRef(lam_f, "var-out"), PortRef(core, "c0"))
    g.connect(PortRef(lam_x, "var-out"), PortRef(core, "c1"))
    g.connect(PortRef(core, "c2"), PortRef(lam_x, "body-in"))
    for node_id in (lam_f, lam_x, core):
        partition[node_id] = "n"
    return prepare(g, partition)


# --- 振る舞いの関数版 ---


def _runtime(system: ActorSystem, mode: Union[Mode, str]) -> ActorRuntime:
    return ActorRuntime(system, mode=mode)


def behavior_interaction(
    system: ActorSystem, link: LinkLabel, mode: Union[Mode, str] = Mode.GLC
) -> ActorSystem:
    """リンク越しの BETA（chemlambda では FAN-IN も）を1回行う"""
    return _runtime(system, mode).interact(link)


def behavior_name_change(
    system: ActorSystem, node_id: int, to: str, mode: Union[Mode, str] = Mode.GLC
) -> ActorSystem:
    return _runtime(system, mode).name_change(node_id, to)


def behavior_internal(
    system: ActorSystem, actor: str, budget: Optional[int] = None, mode: Union[Mode, str] = Mode.GLC
) -> ActorSystem:
    return _runtime(system, mode).internal(actor, budget)


def behavior_split(
    system: ActorSystem, actor: str, new: str, mode: Union[Mode, str] = Mode.GLC
) -> ActorSystem:
    return _runtime(system, mode).split(actor, new)


def behavior_core_express(
    system: ActorSystem, actor: str, mode: Union[Mode, str] = Mode.GLC
) -> ActorSystem:
    return _runtime(system, mode).core_express(actor)


def run(
    system: ActorSystem,
    mode: Union[Mode, str] = Mode.GLC,
    scheduler: Union[Scheduler, str] = Scheduler.ROUND_ROBIN,
    seed: Optional[int] = None,
    max_events: Optional[int] = None,
) -> Tuple[PortGraph, List[Event]]:
    """
    静止状態まで実行して (グラフ, イベントログ) を返す

    Args:
        system: prepare の結果（実行中に更新される）
        mode: glc / chemlambda
        scheduler: round-robin / random
        seed: random スケジューラーのシード
        max_events: 最大イベント数（既定は settings.max_events）
    """
    runtime = ActorRuntime(system, mode=mode, scheduler=scheduler, seed=seed, max_events=max_events)
    return runtime.run()


def run_partitioned(
    g: PortGraph,
    partition: Union[Dict[int, str], int],
    **options,
) -> Tuple[ActorSystem, PortGraph, List[Event]]:
    """prepare と run をまとめて行う（partition が整数なら auto_partition）"""
    if isinstance(partition, int):
        partition = auto_partition(g, partition)
    system = prepare(g, partition)
    graph, events = run(system, **options)
    return system, graph, events


def labels_of(events: Iterable[Event]) -> List[str]:
    """イベントログに現れたリンクラベル（重複なし、初出順）"""
    seen: Dict[str, None] = {}
    for event in events:
        for label in event.links_touched:
            seen.setdefault(label, None)
    return list(seen)
