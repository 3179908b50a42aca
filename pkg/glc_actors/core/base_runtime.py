"""
GLC Actors - アクターランタイム ベースクラス

同期・非同期ランタイムの共通ロジック。グラフのアクターへの分割（prepare）、
リンクラベルの割り当てと連結、5 つの振る舞い（リンク越しの相互作用・名前変更・内部簡約・
分裂・コアの発現）、メッセージ処理を含む。

グラフ・所有・リンク表は ActorSystem が正本として保持し、変更は1回の commit でまとめて反映する。
各アクターは自分の知っているラベルだけを持ち、Relabel メッセージで更新される。
"""

from __future__ import annotations
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Set, Tuple, Union
import logging

import numpy as np

from ..config import settings
from ..database import RuleCatalog
from ..exceptions import (
    ActorError,
    NameTaken,
    NoCommonLink,
    NoCore,
    NotASite,
    NotDisconnected,
    PartialPartition,
    StaleLink,
    WrongKind,
)
from ..models.actor import Actor, ActorSystem, CounterCore, Event, LinkLabel, Message, compose_labels
from ..models.enums import MessageKind, Mode, NodeType, RuleName, Scheduler, Strategy
from ..models.graph import (
    APPLICATION,
    FANOUT,
    TERMINATION,
    Arrow,
    Node,
    PortGraph,
    PortRef,
)
from .engine import MatchSelector, make_rng
from .rewrite import Match, apply_move_with_ids, find_sites

logger = logging.getLogger(__name__)

# QueryNode の種別ビット（λ / FanIn）とリンク越しに起こす規則
QUERY_KIND_BITS = {NodeType.LAMBDA: "0", NodeType.FANIN: "1"}
INTERACTION_RULES = {NodeType.LAMBDA: RuleName.BETA, NodeType.FANIN: RuleName.FAN_IN}

NAME_CHANGE_KINDS = {
    NodeType.FANOUT: MessageKind.NAME_CHANGE,
    NodeType.TERMINATION: MessageKind.PRUNE_ORDER,
}

COUNTER_DIRS = "iio"


# --- コア ---


def parse_core_tag(tag: str) -> Tuple[str, int]:
    """"counter:3" → ("counter", 3)"""
    kind, _, rest = tag.partition(":")
    if not rest:
        return kind, 0
    try:
        return kind, int(rest)
    except ValueError as e:
        raise ActorError(f"core tag {tag!r} does not end in a counter value", e)


def counter_node(value: int) -> Node:
    return Node(NodeType.CORE, tag=f"counter:{value}", dirs=COUNTER_DIRS)


def express_counter(
    g: PortGraph, core: CounterCore
) -> Tuple[PortGraph, List[int], Optional[CounterCore]]:
    """
    カウンターコアを1段発現させる

    n > 0: Core(f, x, out) → FanOut(f; fc, fu) + Application(fu, m; out) + Core_{n-1}(fc, x; m)
    n = 0: f に Termination を付け、x を out に直結してコアを消す
    """
    f_source = g.peer(PortRef(core.node, "c0"))
    x_source = g.peer(PortRef(core.node, "c1"))
    out_target = g.peer(PortRef(core.node, "c2"))
    if f_source is None or x_source is None or out_target is None:
        raise ActorError(f"core {core.node} has a dangling port")

    result = g.copy()
    base = g.next_id()
    result.remove_node(core.node)
    if core.value == 0:
        t = result.add_node(TERMINATION, base)
        result.connect(f_source, PortRef(t, "in"))
        result.connect(x_source, out_target)
        return result, [t], None

    fo = result.add_node(FANOUT, base)
    app = result.add_node(APPLICATION, base + 1)
    rest = result.add_node(counter_node(core.value - 1), base + 2)
    result.connect(f_source, PortRef(fo, "in"))
    result.connect(PortRef(fo, "out1"), PortRef(rest, "c0"))
    result.connect(PortRef(fo, "out2"), PortRef(app, "fun-in"))
    result.connect(PortRef(rest, "c2"), PortRef(app, "arg-in"))
    result.connect(PortRef(app, "out"), out_target)
    result.connect(x_source, PortRef(rest, "c1"))
    return result, [fo, app, rest], CounterCore(rest, core.value - 1, core.kind)


# コアの種別 → 発現規則
CORE_EXPRESSIONS: Dict[
    str, Callable[[PortGraph, CounterCore], Tuple[PortGraph, List[int], Optional[CounterCore]]]
] = {
    "counter": express_counter,
}


# --- 準備 ---


def prepare(g: PortGraph, partition: Dict[int, str]) -> ActorSystem:
    """
    グラフのノードをアクターに割り当て、アクター間の矢印にリンクラベルを付ける

    index は矢印の決定的な順序で組ごとに 1 から振る。

    Raises:
        PartialPartition: 分割がノードを覆っていない、または未知のノードを含む
    """
    missing = sorted(set(g.nodes) - set(partition))
    unknown = sorted(set(partition) - set(g.nodes))
    if missing or unknown:
        raise PartialPartition(f"partition misses nodes {missing} and names unknown nodes {unknown}")
    report = g.validate()
    if not report.ok:
        raise ActorError(f"cannot prepare an invalid graph: {report}")

    system = ActorSystem(graph=g.copy(), owner=dict(partition))
    for name in sorted(set(partition.values())):
        system.actors[name] = Actor(name)
    for arrow in system.graph.sorted_arrows():
        pair = _owners(system.owner, arrow)
        if pair is not None:
            system.links[system.allocate(*pair)] = arrow
    for name, actor in system.actors.items():
        actor.links = set(system.labels_at(name))

    for node_id in system.graph.ids_of(NodeType.CORE):
        actor = system.actors[system.owner[node_id]]
        if actor.core is not None:
            raise ActorError(f"actor :{actor.name} owns more than one core")
        kind, value = parse_core_tag(system.graph.nodes[node_id].tag or "")
        actor.core = CounterCore(node_id, value, kind)

    logger.info(
        "actor system prepared",
        extra={"actors": len(system.actors), "links": len(system.links), "nodes": g.size},
    )
    return system


def _owners(owner: Dict[int, str], arrow: Arrow) -> Optional[Tuple[str, str]]:
    """異なるアクターを結ぶ矢印なら (source 側, target 側) の所有者"""
    if not isinstance(arrow.source, PortRef) or not isinstance(arrow.target, PortRef):
        return None
    a, b = owner[arrow.source.node], owner[arrow.target.node]
    return None if a == b else (a, b)


# --- commit の結果 ---


@dataclass(frozen=True)
class RelabelOrder:
    """near 側の旧所有者 sender から far 側の所有者 receiver への Relabel"""

    sender: str
    receiver: str
    old: LinkLabel
    new: Optional[LinkLabel]


@dataclass
class Delta:
    """Relabel を受けないアクター自身のラベル表の差分"""

    remove: Set[LinkLabel] = field(default_factory=set)
    add: Set[LinkLabel] = field(default_factory=set)

    def labels(self) -> List[str]:
        return sorted(str(label) for label in self.remove | self.add)


@dataclass
class Commit:
    relabels: List[RelabelOrder]
    deltas: Dict[str, Delta]


class BaseActorRuntime:
    """
    アクターランタイム ベースクラス

    同期版 ActorRuntime と非同期版 AsyncActorRuntime の共通ロジックを提供する。
    """

    def __init__(
        self,
        system: ActorSystem,
        mode: Union[Mode, str] = Mode.GLC,
        scheduler: Union[Scheduler, str] = Scheduler.ROUND_ROBIN,
        seed: Optional[int] = None,
        max_events: Optional[int] = None,
    ) -> None:
        self.system = system
        self.mode = mode if isinstance(mode, Mode) else Mode(mode)
        self.scheduler = scheduler if isinstance(scheduler, Scheduler) else Scheduler(scheduler)
        self.seed = seed
        self.rng: np.random.Generator = make_rng(seed)
        self.max_events = settings.max_events if max_events is None else max_events
        self.catalog = RuleCatalog()
        self._last: Optional[str] = None
        self._pending: Dict[Tuple[int, str], Tuple[Delta, List[RelabelOrder]]] = {}
        self._outcomes: Dict[int, bool] = {}

    # メッセージとイベント

    def _send(
        self,
        kind: MessageKind,
        sender: str,
        receiver: str,
        conversation: int,
        payload: Optional[dict] = None,
        bits: int = 0,
    ) -> Message:
        message = Message(kind, sender, receiver, payload or {}, bits, conversation)
        self.system.actor(receiver).mailbox.append(message)
        logger.debug(
            "message sent",
            extra={"kind": kind.value, "sender": sender, "receiver": receiver, "conversation": conversation},
        )
        return message

    def _record(
        self,
        actor: str,
        kind: MessageKind,
        bits: int = 0,
        links: Iterable[str] = (),
        peer: Optional[str] = None,
        conversation: Optional[int] = None,
    ) -> Event:
        event = Event(
            seq=len(self.system.events) + 1,
            actor=actor,
            message_kind=kind.value,
            payload_bits=bits,
            links_touched=sorted(set(links)),
            peer=peer,
            conversation=conversation,
        )
        self.system.events.append(event)
        logger.debug(
            "event",
            extra={"seq": event.seq, "actor": actor, "message_kind": event.message_kind, "peer": peer},
        )
        return event

    # commit

    def _commit(
        self, graph: PortGraph, owner: Dict[int, str], changed: Set[int], quiet: Set[str]
    ) -> Commit:
        """
        新しいグラフと所有を正本に反映し、リンク表を作り直す

        境界の矢印の far 側端点が near 側の旧所有者以外のアクターのものなら、
        near 側の旧所有者からそのアクターへ Relabel を出す（quiet のアクターには出さない）。
        """
        s = self.system
        old_links = dict(s.links)
        old_owner = dict(s.owner)
        by_arrow = {arrow: label for label, arrow in old_links.items()}

        links: Dict[LinkLabel, Arrow] = {}
        at_endpoint: Dict[PortRef, LinkLabel] = {}
        for arrow in graph.sorted_arrows():
            pair = _owners(owner, arrow)
            if pair is None:
                continue
            label = by_arrow.get(arrow)
            if label is None or label.pair != tuple(sorted(pair)):
                label = s.allocate(*pair)
            links[label] = arrow
            at_endpoint[arrow.source] = label
            at_endpoint[arrow.target] = label

        removed = sorted(label for label in old_links if label not in links)
        added = sorted(label for label in links if label not in old_links)

        relabels: List[RelabelOrder] = []
        for label in removed:
            arrow = old_links[label]
            for far, near in ((arrow.source, arrow.target), (arrow.target, arrow.source)):
                if far.node in changed or far.node not in graph.nodes:
                    continue
                receiver, sender = owner[far.node], old_owner[near.node]
                if receiver == sender or receiver in quiet:
                    continue
                relabels.append(RelabelOrder(sender, receiver, label, at_endpoint.get(far)))

        told_old = {(r.receiver, r.old) for r in relabels}
        told_new = {(r.receiver, r.new) for r in relabels if r.new is not None}
        deltas: Dict[str, Delta] = {}
        for label in removed:
            for name in set(label.addresses):
                if (name, label) not in told_old:
                    deltas.setdefault(name, Delta()).remove.add(label)
        for label in added:
            for name in set(label.addresses):
                if (name, label) not in told_new:
                    deltas.setdefault(name, Delta()).add.add(label)

        s.graph = graph
        s.owner = owner
        s.links = links
        s.epoch += 1
        return Commit(relabels, deltas)

    def _apply_delta(self, name: str, delta: Optional[Delta], conversation: int) -> List[str]:
        if delta is None or name not in self.system.actors:
            return []
        actor = self.system.actors[name]
        actor.links -= delta.remove
        actor.links |= {label for label in delta.add if label in self.system.links}
        if delta.remove:
            actor.retiring.setdefault(conversation, set()).update(delta.remove)
        return delta.labels()

    def _dispatch(
        self, commit: Commit, conversation: int, deferred: Iterable[str] = ()
    ) -> List[str]:
        """差分を反映して Relabel を送る。deferred のアクターの分は後続メッセージの受信時に回す"""
        deferred = set(deferred)
        touched: List[str] = []
        for name in sorted(commit.deltas):
            if name in deferred:
                self._pending.setdefault((conversation, name), (Delta(), []))
                self._pending[(conversation, name)][0].remove |= commit.deltas[name].remove
                self._pending[(conversation, name)][0].add |= commit.deltas[name].add
            else:
                touched += self._apply_delta(name, commit.deltas[name], conversation)
        for order in commit.relabels:
            if order.sender in deferred:
                self._pending.setdefault((conversation, order.sender), (Delta(), []))[1].append(order)
            else:
                self._send_relabel(order, conversation)
            touched.append(str(order.old))
        return touched

    def _take_pending(self, name: str, conversation: int) -> List[str]:
        delta, orders = self._pending.pop((conversation, name), (None, []))
        touched = self._apply_delta(name, delta, conversation)
        for order in orders:
            self._send_relabel(order, conversation)
            touched.append(str(order.old))
        return touched

    def _send_relabel(self, order: RelabelOrder, conversation: int) -> None:
        bridge = None
        if order.new is not None:
            bridge = LinkLabel(order.sender, order.new.other(order.receiver), order.new.index)
        sender = self.system.actor(order.sender)
        sender.pending_acks[conversation] = sender.pending_acks.get(conversation, 0) + 1
        self._send(
            MessageKind.RELABEL,
            order.sender,
            order.receiver,
            conversation,
            {"old": order.old, "bridge": bridge},
        )

    def _commit_move(
        self,
        m: Match,
        quiet: Set[str],
        default: Optional[str] = None,
        new_owners: Optional[List[str]] = None,
    ) -> Tuple[Commit, List[int]]:
        """マッチを適用して commit する。新しいノードは new_owners（なければ default）の所有"""
        graph, new_ids = apply_move_with_ids(self.system.graph, m)
        owner = {n: o for n, o in self.system.owner.items() if n in graph.nodes}
        names = new_owners if new_owners is not None else [default] * len(new_ids)
        for node_id, name in zip(new_ids, names):
            if name is None:
                raise ActorError(f"{m} creates node {node_id} without an owner")
            owner[node_id] = name
        return self._commit(graph, owner, set(m.nodes), quiet), new_ids

    # 振る舞い 1: リンク越しの相互作用

    @staticmethod
    def _describe(node: Node, principal: bool = True) -> str:
        """種別 1 ビット + 主ポート以外の 2 ポートの向き 2 ビット + 主ポートかどうか 1 ビット"""
        others = [d for role, d in node.ports if role != "out"]
        orientation = "".join("1" if d == "out" else "0" for d in others)
        return QUERY_KIND_BITS[node.type] + orientation + ("1" if principal else "0")

    def _interaction_kinds(self) -> Tuple[NodeType, ...]:
        # glc でも複製途中の FanIn は代替規則としてリンク越しに相互作用する
        usable = self.catalog.automatic(self.mode)
        return tuple(k for k, rule in INTERACTION_RULES.items() if rule in usable)

    def _probe_target(self, actor: Actor, label: LinkLabel) -> Optional[Tuple[int, str]]:
        s = self.system
        arrow = s.links.get(label)
        if arrow is None:
            return None
        source = arrow.source
        if s.owner.get(source.node) != actor.name or source.role != "out":
            return None
        if s.graph.nodes[source.node].type not in self._interaction_kinds():
            return None
        return source.node, s.owner[arrow.target.node]

    def _query(self, actor: Actor, label: LinkLabel, node_id: int, receiver: str) -> int:
        descriptor = self._describe(self.system.graph.nodes[node_id])
        if len(descriptor) > settings.query_payload_bits_limit:
            raise ActorError(f"query payload {descriptor} exceeds the bit limit")
        conversation = self.system.next_conversation()
        actor.probing.add(label)
        self._send(
            MessageKind.QUERY_NODE,
            actor.name,
            receiver,
            conversation,
            {"link": label, "node": node_id, "descriptor": descriptor},
            bits=len(descriptor),
        )
        return conversation

    def _probe(self, actor: Actor) -> bool:
        """リンクを昇順に調べ、主ポートがリンク上にある λ（chemlambda では FanIn も）があれば問い合わせる"""
        for label in sorted(actor.links):
            if label in actor.probing or actor.rejected.get(label) == self.system.epoch:
                continue
            target = self._probe_target(actor, label)
            if target is not None:
                self._query(actor, label, *target)
                return True
        return False

    def _validate_query(self, actor: Actor, message: Message) -> Match:
        s = self.system
        label: LinkLabel = message.payload["link"]
        if label not in actor.links or label not in s.links:
            raise StaleLink(f"{label} is not current at :{actor.name}")
        arrow = s.links[label]
        if s.owner_of(arrow.source) != message.sender or s.owner_of(arrow.target) != actor.name:
            raise NotASite(f"{label} does not join :{message.sender} to :{actor.name}")
        descriptor = message.payload["descriptor"]
        kind = NodeType.LAMBDA if descriptor[0] == "0" else NodeType.FANIN
        node = s.graph.nodes[arrow.source.node]
        if node.type is not kind or arrow.source.role != "out" or descriptor[-1] != "1":
            raise NotASite(f"{label} does not carry the described {kind.name} principal port")
        rule = INTERACTION_RULES[kind]
        if rule not in self.catalog.automatic(self.mode):
            raise NotASite(f"{rule.value} is not enabled in {self.mode.value} mode")
        for m in find_sites(s.graph, rule):
            if m.nodes == (arrow.source.node, arrow.target.node):
                return m
        raise NotASite(f"{label} is not a {rule.value} site")

    def _on_query(self, actor: Actor, message: Message) -> List[str]:
        label = message.payload["link"]
        conversation = message.conversation
        try:
            m = self._validate_query(actor, message)
        except (StaleLink, NotASite) as e:
            logger.debug("query rejected", extra={"actor": actor.name, "reason": str(e)})
            self._outcomes[conversation] = False
            self._send(
                MessageKind.CONFIRM_SITE, actor.name, message.sender, conversation,
                {"link": label, "ok": False}, bits=1,
            )
            return [str(label)]

        commit, _ = self._commit_move(m, set(), default=actor.name)
        touched = self._dispatch(commit, conversation, deferred=[message.sender])
        self._outcomes[conversation] = True
        self._send(
            MessageKind.CONFIRM_SITE, actor.name, message.sender, conversation,
            {"link": label, "ok": True}, bits=1,
        )
        logger.debug(
            "interaction committed",
            extra={"rule": m.rule.value, "nodes": list(m.nodes), "actors": [message.sender, actor.name]},
        )
        return [str(label)] + touched

    def _on_confirm(self, actor: Actor, message: Message) -> List[str]:
        label = message.payload["link"]
        actor.probing.discard(label)
        if not message.payload["ok"]:
            actor.rejected[label] = self.system.epoch
            return [str(label)]
        return [str(label)] + self._take_pending(actor.name, message.conversation)

    def _on_relabel(self, actor: Actor, message: Message) -> List[str]:
        old: LinkLabel = message.payload["old"]
        bridge: Optional[LinkLabel] = message.payload["bridge"]
        actor.links.discard(old)
        touched = [str(old)]
        if bridge is not None:
            new = compose_labels(old, bridge, via=message.sender)
            if not new.is_self_link and new in self.system.links:
                actor.links.add(new)
            touched.append(str(new))
        self.system.epoch += 1
        self._send(
            MessageKind.ACK_RELABEL, actor.name, message.sender, message.conversation,
            {"old": old}, bits=1,
        )
        return touched

    def _on_ack(self, actor: Actor, message: Message) -> List[str]:
        conversation = message.conversation
        remaining = actor.pending_acks.get(conversation, 0) - 1
        if remaining <= 0:
            actor.forget(conversation)
        else:
            actor.pending_acks[conversation] = remaining
        return [str(message.payload["old"])]

    def _on_notice(self, actor: Actor, message: Message) -> List[str]:
        """NameChange / PruneOrder / CopyOrder: 受け取った側のラベル表を更新する"""
        return self._take_pending(actor.name, message.conversation)

    # 振る舞い 2: 名前変更

    def _name_change_candidate(self, actor: Actor) -> Optional[Tuple[int, str]]:
        s = self.system
        for node_id in s.owned(actor.name):
            if s.graph.nodes[node_id].type not in NAME_CHANGE_KINDS:
                continue
            upstream = s.owner_of(s.graph.peer(PortRef(node_id, "in")))
            if upstream is not None and upstream != actor.name:
                return node_id, upstream
        return None

    def _name_change(self, actor: Actor, node_id: int, to: str) -> None:
        s = self.system
        node = s.graph.nodes[node_id]
        conversation = s.next_conversation()
        owner = dict(s.owner)
        owner[node_id] = to
        commit = self._commit(s.graph, owner, {node_id}, quiet={actor.name, to})
        touched = self._dispatch(commit, conversation, deferred=[to])
        self._send(
            NAME_CHANGE_KINDS[node.type], actor.name, to, conversation,
            {"node": node_id, "labels": sorted(commit.deltas.get(to, Delta()).add)},
            bits=3 + node.arity,
        )
        logger.debug(
            "name change", extra={"actor": actor.name, "node": node_id, "to": to, "links": touched}
        )

    # 振る舞い 3: 内部簡約

    def _internal(self, actor: Actor) -> bool:
        s = self.system
        owned = set(s.owned(actor.name))
        cores = set(s.graph.ids_of(NodeType.CORE))
        selector = MatchSelector(
            self.mode,
            Strategy.PRIORITY,
            allow=lambda m: set(m.touched) <= owned and not cores & set(m.touched),
        )
        m = selector.next_match(s.graph)
        if m is None:
            return False
        conversation = s.next_conversation()
        commit, _ = self._commit_move(m, {actor.name}, default=actor.name)
        touched = self._dispatch(commit, conversation)
        self._record(actor.name, MessageKind.INTERNAL, 0, touched, None, conversation)
        logger.debug(
            "internal move",
            extra={"actor": actor.name, "rule": m.rule.value, "nodes": list(m.nodes)},
        )
        return True

    def _global_copy(self, actor: Actor) -> bool:
        """自分の FanOut が複製する部分グラフが他のアクターにまたがるとき、CopyOrder で複製する"""
        s = self.system
        if RuleName.GLOBAL_FANOUT not in self.catalog.enabled(self.mode):
            return False
        for m in find_sites(s.graph, RuleName.GLOBAL_FANOUT):
            fanout = m.nodes[0]
            if s.owner[fanout] != actor.name:
                continue
            if s.owner_of(s.graph.peer(PortRef(fanout, "in"))) != actor.name:
                continue
            region = sorted(m.region)
            if any(s.graph.nodes[n].type is NodeType.CORE for n in region):
                continue
            owners = sorted({s.owner[n] for n in region})
            if owners == [actor.name]:
                continue
            conversation = s.next_conversation()
            others = [name for name in owners if name != actor.name]
            commit, new_ids = self._commit_move(
                m, {actor.name, *owners}, new_owners=[s.owner[n] for n in region]
            )
            touched = self._dispatch(commit, conversation, deferred=others)
            copies = dict(zip(region, new_ids))
            for name in others:
                self._send(
                    MessageKind.COPY_ORDER, actor.name, name, conversation,
                    {"fanout": fanout, "copies": [copies[n] for n in region if s.owner[n] == name]},
                    bits=1,
                )
            self._record(actor.name, MessageKind.INTERNAL, 0, touched, None, conversation)
            return True
        return False

    # 振る舞い 4: 分裂

    def _split_name(self, name: str) -> str:
        k = 1
        while f"{name}.{k}" in self.system.actors:
            k += 1
        return f"{name}.{k}"

    def _split(self, actor: Actor, new: str) -> None:
        s = self.system
        components = s.graph.components(within=s.owned(actor.name))
        if len(components) < 2:
            raise NotDisconnected(f":{actor.name} owns a connected subgraph")
        if new in s.actors:
            raise NameTaken(f"actor name :{new} is already used")
        moved = set().union(*components[1:])
        spawned = Actor(new)
        s.actors[new] = spawned
        if actor.core is not None and actor.core.node in moved:
            spawned.core, actor.core = actor.core, None
        owner = dict(s.owner)
        for node_id in moved:
            owner[node_id] = new
        conversation = s.next_conversation()
        commit = self._commit(s.graph, owner, moved, quiet={actor.name, new})
        spawned.links = set()
        touched = self._dispatch(commit, conversation)
        self._record(actor.name, MessageKind.SPAWN_REQUEST, 0, touched, new, conversation)
        logger.debug("actor split", extra={"actor": actor.name, "new": new, "nodes": sorted(moved)})

    # 振る舞い 5: コアの発現

    def _expressible(self, actor: Actor) -> bool:
        return actor.core is not None and actor.core.kind in CORE_EXPRESSIONS

    def _express(self, actor: Actor) -> None:
        if actor.core is None:
            raise NoCore(f":{actor.name} has no core")
        express = CORE_EXPRESSIONS.get(actor.core.kind)
        if express is None:
            raise NoCore(f"no expression rule for core kind {actor.core.kind!r}")
        s = self.system
        core = actor.core
        graph, new_ids, rest = express(s.graph, core)
        owner = {n: o for n, o in s.owner.items() if n in graph.nodes}
        for node_id in new_ids:
            owner[node_id] = actor.name
        conversation = s.next_conversation()
        commit = self._commit(graph, owner, {core.node}, quiet={actor.name})
        actor.core = rest
        touched = self._dispatch(commit, conversation)
        self._record(actor.name, MessageKind.CORE_EXPRESS, 0, touched, None, conversation)
        logger.debug(
            "core expressed",
            extra={"actor": actor.name, "value": core.value, "remaining": None if rest is None else rest.value},
        )

    # 1 ステップ

    HANDLERS = {
        MessageKind.QUERY_NODE: "_on_query",
        MessageKind.CONFIRM_SITE: "_on_confirm",
        MessageKind.RELABEL: "_on_relabel",
        MessageKind.ACK_RELABEL: "_on_ack",
        MessageKind.NAME_CHANGE: "_on_notice",
        MessageKind.PRUNE_ORDER: "_on_notice",
        MessageKind.COPY_ORDER: "_on_notice",
    }

    def _deliver(self, actor: Actor) -> Event:
        message = actor.mailbox.popleft()
        handler = getattr(self, self.HANDLERS[message.kind])
        touched = handler(actor, message)
        return self._record(
            actor.name, message.kind, message.bits, touched, message.sender, message.conversation
        )

    def _idle(self, actor: Actor) -> bool:
        """受信箱が空のときの振る舞い（問い合わせ → 内部簡約 → 名前変更 → 複製 → 分裂 → コア発現）"""
        if self._probe(actor):
            return True
        if self._internal(actor):
            return True
        candidate = self._name_change_candidate(actor)
        if candidate is not None:
            self._name_change(actor, *candidate)
            return True
        if self._global_copy(actor):
            return True
        if len(self.system.graph.components(within=self.system.owned(actor.name))) >= 2:
            self._split(actor, self._split_name(actor.name))
            return True
        if self._expressible(actor):
            self._express(actor)
            return True
        return False

    def step(self, name: str) -> bool:
        """アクター name を1回動かす（何かしたら True）"""
        actor = self.system.actor(name)
        if actor.mailbox:
            self._deliver(actor)
            return True
        if self._idle(actor):
            return True
        actor.idle_epoch = self.system.epoch
        return False

    def _candidates(self) -> List[str]:
        s = self.system
        return [
            name
            for name in s.names()
            if s.actors[name].mailbox or s.actors[name].idle_epoch != s.epoch
        ]

    def _pick(self) -> str:
        candidates = self._candidates()
        if self.scheduler is Scheduler.RANDOM:
            return candidates[int(self.rng.integers(len(candidates)))]
        after = [name for name in candidates if self._last is not None and name > self._last]
        chosen = after[0] if after else candidates[0]
        self._last = chosen
        return chosen

    def settle(self) -> None:
        """受信箱が空になるまでメッセージだけを配送する（自発的な振る舞いはしない）"""
        s = self.system
        while True:
            busy = [name for name in s.names() if s.actors[name].mailbox]
            if not busy:
                return
            for name in busy:
                if s.actors[name].mailbox:
                    self._deliver(s.actors[name])

    # 振る舞いの直接呼び出し

    def interact(self, label: LinkLabel) -> ActorSystem:
        """
        リンク越しの相互作用を1回行う（QueryNode から AckRelabel まで）

        Raises:
            NotASite: リンクが BETA（chemlambda では FAN-IN も）のサイトではない
            StaleLink: ラベルが現在のリンク表にない、または受信側のラベルが古い
        """
        s = self.system
        if label.is_self_link:
            raise NotASite(f"{label} lies inside one actor; use the internal behavior")
        if label not in s.links:
            raise StaleLink(f"{label} is not a current link")
        actor = s.actor(s.owner_of(s.links[label].source))
        target = self._probe_target(actor, label)
        if target is None:
            raise NotASite(f"{label} does not start at a principal port that can interact")
        arrow = s.links[label]
        rule = INTERACTION_RULES[s.graph.nodes[arrow.source.node].type]
        if not any(m.nodes == (arrow.source.node, arrow.target.node) for m in find_sites(s.graph, rule)):
            raise NotASite(f"{label} is not a {rule.value} site")
        conversation = self._query(actor, label, *target)
        self.settle()
        if not self._outcomes.get(conversation):
            raise StaleLink(f"{label} was rejected by :{target[1]}")
        return s

    def name_change(self, node_id: int, to: str) -> ActorSystem:
        """
        FanOut / Termination ノードの所有を、そのノードとリンクを共有するアクターへ移す

        Raises:
            WrongKind: FanOut / Termination 以外
            NoCommonLink: ノードに to とのリンクがない
        """
        s = self.system
        if node_id not in s.owner:
            raise WrongKind(f"no node {node_id}")
        node = s.graph.nodes[node_id]
        if node.type not in NAME_CHANGE_KINDS:
            raise WrongKind(f"{node} nodes cannot change their name")
        s.actor(to)
        actor = s.actor(s.owner[node_id])
        peers = {s.owner_of(arrow.other(end)) for arrow in s.graph.incident(node_id)
                 for end in (arrow.source, arrow.target) if isinstance(end, PortRef) and end.node == node_id}
        if to == actor.name or to not in peers:
            raise NoCommonLink(f"node {node_id} has no link to :{to}")
        self._name_change(actor, node_id, to)
        self.settle()
        return s

    def internal(self, name: str, budget: Optional[int] = None) -> ActorSystem:
        """アクター内で完結する簡約を budget 回まで行う"""
        actor = self.system.actor(name)
        steps = 0
        while budget is None or steps < budget:
            if not self._internal(actor):
                break
            steps += 1
            self.settle()
        return self.system

    def split(self, name: str, new: str) -> ActorSystem:
        """
        Raises:
            NotDisconnected: 部分グラフが連結
            NameTaken: new が既に使われている
        """
        self._split(self.system.actor(name), new)
        self.settle()
        return self.system

    def core_express(self, name: str) -> ActorSystem:
        """
        Raises:
            NoCore: コアがない
        """
        self._express(self.system.actor(name))
        self.settle()
        return self.system

    # 検査

    def cache_mismatches(self) -> Dict[str, Tuple[List[str], List[str]]]:
        """各アクターのラベル表とリンク表の食い違い（欠けているもの, 余分なもの）"""
        s = self.system
        result = {}
        for name in s.names():
            actual = s.labels_at(name)
            known = s.actors[name].links
            missing = sorted(str(l) for l in actual - known)
            extra = sorted(str(l) for l in known - actual)
            if missing or extra:
                result[name] = (missing, extra)
        return result
