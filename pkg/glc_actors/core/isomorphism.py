"""
GLC Actors - 同型判定

ポートグラフを networkx の有向グラフ（ノード頂点・ポート頂点・自由端頂点）に符号化し、
VF2 (DiGraphMatcher) で種別・ポート役割・向きを保存する同型を探索する。
"""

from __future__ import annotations
from collections import Counter
import logging

import networkx as nx
from networkx.algorithms import isomorphism

from ..config import settings
from ..exceptions import SizeLimitExceeded
from ..models.graph import Endpoint, PortGraph, PortRef

logger = logging.getLogger(__name__)


def _node_label(node) -> tuple:
    return ("node", node.type.value, node.scale, node.tag, node.dirs, node.copier)


def encode(g: PortGraph, match_free_labels: bool = False) -> nx.DiGraph:
    """PortGraph を頂点ラベル付き DiGraph に変換"""
    encoded = nx.DiGraph()
    for node_id, node in g.nodes.items():
        encoded.add_node(("n", node_id), label=_node_label(node))
        for role in node.roles:
            encoded.add_node(("p", node_id, role), label=("port", role))
            encoded.add_edge(("n", node_id), ("p", node_id, role))

    def vertex(end: Endpoint) -> tuple:
        if isinstance(end, PortRef):
            return ("p", end.node, end.role)
        key = ("f", end.label)
        label = ("free", end.label) if match_free_labels else ("free",)
        encoded.add_node(key, label=label)
        return key

    for arrow in g.arrows:
        encoded.add_edge(vertex(arrow.source), vertex(arrow.target))
    return encoded


def _signature(g: PortGraph) -> Counter:
    return Counter(_node_label(n) for n in g.nodes.values())


def is_isomorphic(g1: PortGraph, g2: PortGraph, match_free_labels: bool = False) -> bool:
    """
    種別・ポート役割・向き・閉路数を保存する全単射が存在するかを判定

    Args:
        match_free_labels: True のとき自由端のラベルも一致を要求する

    Raises:
        SizeLimitExceeded: ノード数が settings.iso_node_limit を超える
    """
    limit = settings.iso_node_limit
    if g1.size > limit or g2.size > limit:
        raise SizeLimitExceeded(f"isomorphism is limited to {limit} nodes ({g1.size}, {g2.size})")
    if g1.loops != g2.loops or len(g1.arrows) != len(g2.arrows):
        return False
    if _signature(g1) != _signature(g2):
        return False
    if match_free_labels and (
        g1.free_inputs() != g2.free_inputs() or g1.free_outputs() != g2.free_outputs()
    ):
        return False

    matcher = isomorphism.DiGraphMatcher(
        encode(g1, match_free_labels),
        encode(g2, match_free_labels),
        node_match=lambda a, b: a["label"] == b["label"],
    )
    result = matcher.is_isomorphic()
    logger.debug("isomorphism check", extra={"nodes": g1.size, "result": result})
    return result
