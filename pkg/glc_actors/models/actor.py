"""
GLC Actors - アクターモデル

リンクラベル、メッセージ、アクター、カウンターコア、イベントログ、
およびアクター系全体（ActorSystem）のデータモデル。
"""

from __future__ import annotations
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Deque, Dict, FrozenSet, List, Optional, Set, Tuple
import json

from ..exceptions import NoCommonAddress, UnknownActor
from ..utils.types import EventRecordDict
from .enums import MessageKind
from .graph import Arrow, FreeEnd, PortGraph


@dataclass(frozen=True, order=True)
class LinkLabel:
    """
    リンクラベル <:left|:right>_index

    端点の順序は持たない（left <= right に正規化する）。index は同じ組の並行リンクを区別する。
    """

    left: str
    right: str
    index: int = 1

    def __post_init__(self) -> None:
        if self.right < self.left:
            left, right = self.right, self.left
            object.__setattr__(self, "left", left)
            object.__setattr__(self, "right", right)

    @property
    def addresses(self) -> Tuple[str, str]:
        return (self.left, self.right)

    @property
    def pair(self) -> Tuple[str, str]:
        return (self.left, self.right)

    def touches(self, name: str) -> bool:
        return name in (self.left, self.right)

    def other(self, name: str) -> str:
        """name でない側のアドレス（自己リンクなら name）"""
        if name == self.left:
            return self.right
        if name == self.right:
            return self.left
        raise NoCommonAddress(f"{self} does not involve :{name}")

    @property
    def is_self_link(self) -> bool:
        return self.left == self.right

    def __str__(self) -> str:
        return f"<:{self.left}|:{self.right}>_{self.index}"


def compose_labels(
    first: LinkLabel, second: LinkLabel, via: Optional[str] = None, index: Optional[int] = None
) -> LinkLabel:
    """
    <:f|:b> と <:b|:d> を連結して <:f|:d> を作る

    Args:
        first, second: 連結するラベル
        via: 消去するアドレス（省略時は共通アドレスのうち大きいもの）
        index: 結果の index（省略時は second の index）

    Raises:
        NoCommonAddress: 共通アドレスがない、または via が両方に含まれない
    """
    common = set(first.addresses) & set(second.addresses)
    if via is None:
        if not common:
            raise NoCommonAddress(f"{first} and {second} share no address")
        via = max(common)
    elif via not in common:
        raise NoCommonAddress(f"{first} and {second} do not meet at :{via}")
    return LinkLabel(first.other(via), second.other(via), second.index if index is None else index)


@dataclass
class Message:
    """
    アクター間のメッセージ

    Args:
        kind: メッセージ種別
        sender, receiver: 送信元・送信先アドレス
        payload: 種別ごとの内容
        bits: アドレス以外のペイロードのビット数
        conversation: 一連のやり取りの番号
    """

    kind: MessageKind
    sender: str
    receiver: str
    payload: Dict[str, Any] = field(default_factory=dict)
    bits: int = 0
    conversation: int = 0

    def links(self) -> List[str]:
        touched = []
        for key in ("link", "old", "new"):
            label = self.payload.get(key)
            if isinstance(label, LinkLabel):
                touched.append(str(label))
        for label in self.payload.get("labels", []):
            touched.append(str(label))
        return touched

    def __str__(self) -> str:
        return f"({self.sender}, {self.kind.value}, {self.receiver})"


@dataclass
class CounterCore:
    """カウンターコアの状態（Core ノードと残りの値）"""

    node: int
    value: int
    kind: str = "counter"


@dataclass
class Actor:
    """
    アクター

    ノードの所有は ActorSystem.owner が正本。アクター自身は知っているリンクラベル（links）と
    受信箱、送信中の問い合わせ、Ack 待ちの数だけを持つ。
    """

    name: str
    links: Set[LinkLabel] = field(default_factory=set)
    mailbox: Deque[Message] = field(default_factory=deque)
    core: Optional[CounterCore] = None
    probing: Set[LinkLabel] = field(default_factory=set)
    rejected: Dict[LinkLabel, int] = field(default_factory=dict)
    pending_acks: Dict[int, int] = field(default_factory=dict)
    retiring: Dict[int, Set[LinkLabel]] = field(default_factory=dict)
    idle_epoch: int = -1

    def forget(self, conversation: int) -> None:
        """Ack がそろったので古いラベルを捨てる"""
        self.retiring.pop(conversation, None)
        self.pending_acks.pop(conversation, None)

    def __str__(self) -> str:
        return f":{self.name}"


@dataclass
class Event:
    """イベントログの1行"""

    seq: int
    actor: str
    message_kind: str
    payload_bits: int
    links_touched: List[str]
    peer: Optional[str] = None
    conversation: Optional[int] = None

    def to_dict(self) -> EventRecordDict:
        return {
            "seq": self.seq,
            "actor": self.actor,
            "message-kind": self.message_kind,
            "payload-bits": self.payload_bits,
            "links-touched": list(self.links_touched),
            "peer": self.peer,
            "conversation": self.conversation,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass
class ActorSystem:
    """
    アクター系

    Args:
        graph: 全体のポートグラフ（正本）
        owner: ノードID → 所有アクター名
        actors: アクター名 → Actor
        links: リンクラベル → 矢印（異なるアクターのノードを結ぶ矢印のみ）
        counters: アクター名の組 → 最後に割り当てた index
        events: イベントログ
        epoch: グラフ・所有・ラベルが変わるたびに増える番号
    """

    graph: PortGraph
    owner: Dict[int, str] = field(default_factory=dict)
    actors: Dict[str, Actor] = field(default_factory=dict)
    links: Dict[LinkLabel, Arrow] = field(default_factory=dict)
    counters: Dict[Tuple[str, str], int] = field(default_factory=dict)
    events: List[Event] = field(default_factory=list)
    epoch: int = 0
    conversations: int = 0

    def actor(self, name: str) -> Actor:
        try:
            return self.actors[name]
        except KeyError as e:
            raise UnknownActor(f"no actor :{name}", e)

    def names(self) -> List[str]:
        return sorted(self.actors)

    def owned(self, name: str) -> List[int]:
        return sorted(n for n, o in self.owner.items() if o == name)

    def owner_of(self, endpoint) -> Optional[str]:
        if isinstance(endpoint, FreeEnd):
            return None
        return self.owner.get(endpoint.node)

    def allocate(self, a: str, b: str) -> LinkLabel:
        """組 (a, b) の次の index のラベル"""
        pair = tuple(sorted((a, b)))
        self.counters[pair] = self.counters.get(pair, 0) + 1
        return LinkLabel(pair[0], pair[1], self.counters[pair])

    def label_of(self, arrow: Arrow) -> Optional[LinkLabel]:
        for label, linked in self.links.items():
            if linked == arrow:
                return label
        return None

    def labels_at(self, name: str) -> FrozenSet[LinkLabel]:
        return frozenset(label for label in self.links if label.touches(name))

    def next_conversation(self) -> int:
        self.conversations += 1
        return self.conversations

    def quiescent(self) -> bool:
        """全受信箱が空で、全アクターが現在の epoch で手詰まり"""
        return all(
            not actor.mailbox and actor.idle_epoch == self.epoch for actor in self.actors.values()
        )

    def event_log(self) -> str:
        return "".join(event.to_json() + "\n" for event in self.events)
