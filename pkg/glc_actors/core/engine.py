"""
GLC Actors - 簡約エンジン

規則の適用箇所を戦略（priority / random / script）に従って選び、
適用箇所がなくなるまで書き換えを繰り返す。大域 FanOut の局所エミュレーションもここで行う。
"""

from __future__ import annotations
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, List, Optional, Set, Tuple, Union
import json
import logging

import numpy as np

from ..config import settings
from ..database import RuleCatalog
from ..exceptions import NotDetachable, ScriptError, StepLimitExceeded
from ..models.enums import Mode, NodeType, RuleName, Strategy
from ..models.graph import COPIER, PortGraph
from .rewrite import Match, apply_move_with_ids, detachable_region, find_all_sites, find_sites

logger = logging.getLogger(__name__)

TRACE_FORMAT = "glc-actors/1"


@dataclass
class TraceEvent:
    """トレースの1ステップ"""

    step: int
    rule: str
    nodes: List[int]
    size: int

    def to_dict(self) -> dict:
        return {"step": self.step, "rule": self.rule, "nodes": list(self.nodes), "size": self.size}


@dataclass
class Trace:
    """
    簡約のトレース

    JSON 行として書き出すと、先頭行がヘッダー（モード・戦略・シード・乱数生成器）、
    以降が1行1イベントになる。
    """

    mode: str
    strategy: str
    seed: Optional[int] = None
    rng: str = field(default_factory=lambda: settings.rng_algorithm)
    events: List[TraceEvent] = field(default_factory=list)

    def record(self, rule: RuleName, nodes: Iterable[int], size: int) -> TraceEvent:
        event = TraceEvent(len(self.events) + 1, rule.value, list(nodes), size)
        self.events.append(event)
        return event

    def header(self) -> dict:
        return {
            "trace": TRACE_FORMAT,
            "mode": self.mode,
            "strategy": self.strategy,
            "seed": self.seed,
            "rng": self.rng,
        }

    def rules(self) -> List[str]:
        return [e.rule for e in self.events]

    def to_jsonl(self) -> str:
        lines = [json.dumps(self.header())]
        lines.extend(json.dumps(e.to_dict()) for e in self.events)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "Trace":
        rows = [json.loads(line) for line in text.splitlines() if line.strip()]
        header = rows[0]
        trace = cls(header["mode"], header["strategy"], header.get("seed"), header.get("rng", ""))
        for row in rows[1:]:
            trace.events.append(TraceEvent(row["step"], row["rule"], row["nodes"], row["size"]))
        return trace

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[TraceEvent]:
        return iter(self.events)


def make_rng(seed: Optional[int]) -> np.random.Generator:
    """トレースヘッダーに記録する PCG64 生成器"""
    return np.random.Generator(np.random.PCG64(0 if seed is None else seed))


class MatchSelector:
    """
    戦略に従って次に適用するマッチを選ぶ

    アクターランタイムからも使うため、適用箇所の絞り込み条件 allow を受け取れる。
    """

    def __init__(
        self,
        mode: Mode,
        strategy: Strategy,
        seed: Optional[int] = None,
        script: Optional[Iterable[Union[str, RuleName]]] = None,
        allow: Optional[Callable[[Match], bool]] = None,
        rules: Optional[List[RuleName]] = None,
    ):
        self.catalog = RuleCatalog()
        self.mode = mode
        self.strategy = strategy
        self.rng = make_rng(seed)
        self.script = deque(RuleCatalog.lookup(r) for r in (script or []))
        self.allow = allow
        self.rules = rules if rules is not None else self.catalog.priority_order(mode)
        self.fallback = self.catalog.fallback_order(mode) if rules is None else []

    def _sites(self, g: PortGraph, rule: RuleName) -> List[Match]:
        sites = find_sites(g, rule)
        if self.allow is not None:
            sites = [m for m in sites if self.allow(m)]
        return sites

    def next_match(self, g: PortGraph) -> Optional[Match]:
        """次のマッチ（なければ None）"""
        if self.strategy is Strategy.SCRIPT:
            if not self.script:
                return None
            rule = self.script.popleft()
            if rule not in self.catalog.enabled(self.mode):
                raise ScriptError(f"{rule.value} is not enabled in {self.mode.value} mode")
            sites = self._sites(g, rule)
            if not sites:
                raise ScriptError(f"no site for scripted rule {rule.value}")
            return sites[0]

        if self.strategy is Strategy.RANDOM:
            for rules in self._tiers(g):
                candidates = [m for rule in rules for m in self._sites(g, rule)]
                if candidates:
                    return candidates[int(self.rng.integers(len(candidates)))]
            return None

        for rules in self._tiers(g):
            for rule in rules:
                sites = self._sites(g, rule)
                if sites:
                    return sites[0]
        return None

    def _tiers(self, g: PortGraph) -> Iterator[List[RuleName]]:
        """主規則、続いて（主規則の適用箇所がグラフ全体にないときだけ）代替規則"""
        yield self.rules
        if self.fallback and not any(find_sites(g, rule) for rule in self.rules):
            yield self.fallback


def _as_enum(value, enum_type):
    return value if isinstance(value, enum_type) else enum_type(value)


def reduce(
    g: PortGraph,
    mode: Union[Mode, str] = Mode.GLC,
    strategy: Union[Strategy, str] = Strategy.PRIORITY,
    *,
    seed: Optional[int] = None,
    script: Optional[Iterable[Union[str, RuleName]]] = None,
    max_steps: Optional[int] = None,
) -> Tuple[PortGraph, Trace]:
    """
    適用箇所がなくなるまで書き換えを繰り返す

    Args:
        g: 入力グラフ（変更しない）
        mode: glc（GLOBAL-FANOUT を含む。主規則の適用箇所が尽きると FAN-IN と DIST 系で複製を続ける）/
              chemlambda（FAN-IN と DIST 系）
        strategy: priority / random / script
        seed: random 戦略のシード
        script: script 戦略で順に適用する規則名
        max_steps: 最大ステップ数（既定は settings.max_steps）

    Returns:
        (最終グラフ, トレース)

    Raises:
        StepLimitExceeded: 最大ステップ数に到達（途中結果とトレースを保持）
        ScriptError: スクリプトの規則に適用箇所がない
    """
    mode = _as_enum(mode, Mode)
    strategy = _as_enum(strategy, Strategy)
    limit = settings.max_steps if max_steps is None else max_steps
    selector = MatchSelector(mode, strategy, seed=seed, script=script)
    trace = Trace(mode.value, strategy.value, seed if strategy is Strategy.RANDOM else None)

    current = g.copy()
    while True:
        m = selector.next_match(current)
        if m is None:
            break
        if len(trace) >= limit:
            logger.info(
                "step limit reached",
                extra={"mode": mode.value, "strategy": strategy.value, "steps": len(trace)},
            )
            raise StepLimitExceeded(
                f"reduction did not finish within {limit} steps", graph=current, trace=trace
            )
        current, _ = apply_move_with_ids(current, m)
        trace.record(m.rule, m.nodes, current.size)

    logger.info(
        "reduction finished",
        extra={"mode": mode.value, "strategy": strategy.value, "steps": len(trace), "size": current.size},
    )
    return current, trace


EXCLUDED_FROM_EMULATION = (NodeType.FANIN, NodeType.DILATION, NodeType.CORE)


def emulate_global_fanout(
    g: PortGraph, site: Union[Match, int], max_steps: Optional[int] = None
) -> Tuple[PortGraph, Trace]:
    """
    GLOBAL-FANOUT を局所規則（DIST 系・FAN-IN・PRUNE-FANIN）だけで実現する

    FanOut を複製用に切り替え、複製用 FanOut と FanIn が部分グラフから消えるまで
    部分グラフ内の局所規則を適用する。

    Raises:
        NotDetachable: 部分グラフが空・切り離し不能・対象外のノードを含む、または複製が停止した
    """
    fanout = site if isinstance(site, int) else site.nodes[0]
    region: Set[int] = set(detachable_region(g, fanout))
    for node_id in sorted(region):
        if g.nodes[node_id].type in EXCLUDED_FROM_EMULATION:
            raise NotDetachable(f"cannot copy {g.nodes[node_id]} node {node_id} with local moves")

    catalog = RuleCatalog()
    limit = settings.max_steps if max_steps is None else max_steps
    current = g.copy()
    current.replace_node(fanout, COPIER)
    region.add(fanout)
    trace = Trace(Mode.CHEMLAMBDA.value, "emulate-global-fanout")

    def allow(m: Match) -> bool:
        if not set(m.nodes) <= region:
            return False
        if m.rule in (RuleName.DIST_APP, RuleName.DIST_LAMBDA, RuleName.DIST_STUB):
            return current.nodes[m.nodes[1]].copier
        return True

    def pending() -> List[int]:
        return [
            n
            for n in sorted(region)
            if current.nodes[n].copier or current.nodes[n].type is NodeType.FANIN
        ]

    while pending():
        sites = [m for m in find_all_sites(current, catalog.emulation_rules) if allow(m)]
        if not sites:
            raise NotDetachable(f"local duplication is stuck at nodes {pending()}")
        if len(trace) >= limit:
            raise StepLimitExceeded(
                f"emulation did not finish within {limit} steps", graph=current, trace=trace
            )
        m = sites[0]
        current, new_ids = apply_move_with_ids(current, m)
        region = (region - set(m.nodes)) | set(new_ids)
        trace.record(m.rule, m.nodes, current.size)

    logger.info("global fan-out emulated", extra={"fanout": fanout, "steps": len(trace)})
    return current, trace
