"""
GLC Actors - 型定義

型エイリアス、リテラル型、トレース・イベントログの JSON 行に対応する TypedDict の定義。
"""

from typing import Any, Callable, Dict, List, Optional, Protocol, Tuple, Union, runtime_checkable
from typing_extensions import Literal, TypedDict

# 基本的な型エイリアス
NodeId = int
ActorName = str
RoleName = str
PdLabel = str

ModeLiteral = Literal["glc", "chemlambda"]
StrategyLiteral = Literal["priority", "random", "script"]
SchedulerLiteral = Literal["round-robin", "random"]

RuleLiteral = Literal[
    "BETA",
    "CO-COMM",
    "CO-ASSOC",
    "PRUNE-APP",
    "PRUNE-FANOUT",
    "PRUNE-LAMBDA",
    "PRUNE-TERM-STUB",
    "PRUNE-FANIN",
    "FAN-IN",
    "DIST-APP",
    "DIST-LAMBDA",
    "DIST-FANOUT",
    "DIST-STUB",
    "GLOBAL-FANOUT",
]

# PD コードの1交点（反時計回り、入ってくる下の弧から）
PdCrossing = Tuple[PdLabel, PdLabel, PdLabel, PdLabel]

# Reidemeister 変形の適用箇所: 弧と符号、交点番号、交点番号の組、弧の組
ReidemeisterSite = Union[int, Tuple[Any, ...]]


class TraceHeaderDict(TypedDict):
    """トレースの先頭行"""

    trace: str
    mode: ModeLiteral
    strategy: str
    seed: Optional[int]
    rng: str


class TraceEventDict(TypedDict):
    """トレースの1イベント"""

    step: int
    rule: RuleLiteral
    nodes: List[NodeId]
    size: int


# アクターランタイムのイベントログ1行（キーにハイフンを含むため関数形式で定義）
EventRecordDict = TypedDict(
    "EventRecordDict",
    {
        "seq": int,
        "actor": ActorName,
        "message-kind": str,
        "payload-bits": int,
        "links-touched": List[str],
        "peer": Optional[ActorName],
        "conversation": Optional[int],
    },
)


class RackReportDict(TypedDict, total=False):
    """check_rack の結果"""

    self_distributive: bool
    involutory: bool
    right_invertible: bool
    is_rack: bool
    is_kei: bool
    counterexamples: List[Tuple[int, ...]]


@runtime_checkable
class GraphLike(Protocol):
    """ノードと矢印を持つグラフライクオブジェクトのプロトコル"""

    nodes: Dict[int, Any]
    loops: int


# 補助型
PartitionMap = Dict[NodeId, ActorName]
MatchFilter = Callable[[Any], bool]


def is_trace_event(obj: Any) -> bool:
    """TraceEventDict 型かチェック"""
    return isinstance(obj, dict) and {"step", "rule", "nodes", "size"} <= set(obj)


def is_event_record(obj: Any) -> bool:
    """EventRecordDict 型かチェック"""
    return isinstance(obj, dict) and {
        "seq",
        "actor",
        "message-kind",
        "payload-bits",
        "links-touched",
    } <= set(obj)
