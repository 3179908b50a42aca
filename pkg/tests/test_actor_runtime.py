#!/usr/bin/env python3
"""アクターランタイムのテストケース"""

import unittest
import json
import sys
import os

# プロジェクトのルートをPATHに追加
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import pytest

from glc_actors import ActorRuntime, actors_diagram, auto_partition, parse_partition, prepare, reduce
from glc_actors.database import RuleCatalog
from glc_actors.exceptions import (
    ActorError,
    EventLimitExceeded,
    NameTaken,
    NoCommonLink,
    NoCore,
    NotASite,
    NotDisconnected,
    PartialPartition,
    StaleLink,
    StepLimitExceeded,
    WrongKind,
)
from glc_actors.core import is_isomorphic
from glc_actors.core.base_runtime import counter_node, express_counter
from glc_actors.lambda_sector import church_value, closed_terms, graph_to_term, normal_order, parse_term, term_to_graph
from glc_actors.models import LinkLabel, MessageKind, Mode, NodeType, alpha_equivalent, compose_labels
from glc_actors.models.actor import CounterCore
from glc_actors.models.graph import (
    APPLICATION,
    FANOUT,
    LAMBDA,
    STUB,
    TERMINATION,
    FreeEnd,
    PortGraph,
    PortRef,
)
from glc_actors.runtime import (
    behavior_core_express,
    behavior_interaction,
    behavior_name_change,
    behavior_split,
    labels_of,
    numeral_system,
    run,
    run_partitioned,
)
from glc_actors.utils.types import is_event_record


def skk_graph():
    """S K K（K の共有は FanOut 9）を手で組んだグラフと分割"""
    g = PortGraph()
    kinds = [
        LAMBDA, LAMBDA, LAMBDA, APPLICATION, APPLICATION, APPLICATION, FANOUT,
        APPLICATION, APPLICATION, FANOUT, LAMBDA, LAMBDA, TERMINATION,
    ]
    for node_id, node in enumerate(kinds):
        g.add_node(node, node_id)
    wires = [
        ((0, "out"), (7, "fun-in")),
        ((1, "out"), (0, "body-in")),
        ((0, "var-out"), (3, "fun-in")),
        ((2, "out"), (1, "body-in")),
        ((1, "var-out"), (4, "fun-in")),
        ((5, "out"), (2, "body-in")),
        ((2, "var-out"), (6, "in")),
        ((6, "out1"), (3, "arg-in")),
        ((6, "out2"), (4, "arg-in")),
        ((3, "out"), (5, "fun-in")),
        ((4, "out"), (5, "arg-in")),
        ((10, "out"), (9, "in")),
        ((11, "out"), (10, "body-in")),
        ((10, "var-out"), (11, "body-in")),
        ((11, "var-out"), (12, "in")),
        ((9, "out1"), (7, "arg-in")),
        ((9, "out2"), (8, "arg-in")),
        ((7, "out"), (8, "fun-in")),
    ]
    for source, target in wires:
        g.connect(PortRef(*source), PortRef(*target))
    g.connect(PortRef(8, "out"), FreeEnd("^"))
    partition = {0: "a", 9: "a", 7: "b", 8: "b", 10: "d", 11: "d", 12: "d"}
    partition.update({n: "c" for n in (1, 2, 3, 4, 5, 6)})
    return g, partition


def six_actor_graph():
    """λ(a) と App(b) のリンクの周りに4つのアクターが1ノードずつ"""
    g = PortGraph()
    for node_id, node in enumerate([LAMBDA, APPLICATION, STUB, TERMINATION, TERMINATION, STUB]):
        g.add_node(node, node_id)
    g.connect(PortRef(0, "out"), PortRef(1, "fun-in"))
    g.connect(PortRef(0, "var-out"), PortRef(3, "in"))
    g.connect(PortRef(2, "out"), PortRef(0, "body-in"))
    g.connect(PortRef(5, "out"), PortRef(1, "arg-in"))
    g.connect(PortRef(1, "out"), PortRef(4, "in"))
    partition = dict(zip(range(6), "abcdef"))
    return g, partition


def events_of(events, kind):
    return [e for e in events if e.message_kind == kind.value]


def edge_multiplicities(system):
    diagram = actors_diagram(system)
    return {"".join(sorted((u, v))): data["multiplicity"] for u, v, data in diagram.edges(data=True)}


def cache(system, name):
    return sorted(str(label) for label in system.actors[name].links)


def diagram_snapshot(system):
    diagram = actors_diagram(system)
    edges = {
        tuple(sorted((u, v))): (data["multiplicity"], sorted(data["labels"]))
        for u, v, data in diagram.edges(data=True)
    }
    return sorted(diagram.nodes), edges


def agreement_terms(count):
    """
    大きい順に各サイズから等間隔に選んだ閉じた項と、その逐次簡約の結果

    正規形を持ち、逐次簡約が主規則だけで終わる項に限る。
    """
    primary = {r.value for r in RuleCatalog().priority_order(Mode.GLC)}
    chosen = []
    for size in range(8, 1, -1):
        candidates = list(closed_terms(size))
        taken = 0
        for t in candidates[:: max(1, len(candidates) // 12)]:
            if len(chosen) == count or taken == 8:
                break
            if normal_order(t, max_steps=200) is None:
                continue
            try:
                final, trace = reduce(term_to_graph(t), max_steps=2000)
            except StepLimitExceeded:
                continue
            if set(trace.rules()) <= primary:
                chosen.append((t, final))
                taken += 1
    return chosen


class TestLinkLabels(unittest.TestCase):
    """リンクラベルのテスト"""

    def test_label_is_unordered(self):
        """端点の順序に依らないテスト"""
        self.assertEqual(LinkLabel("b", "a", 2), LinkLabel("a", "b", 2))
        self.assertEqual(str(LinkLabel("b", "a", 2)), "<:a|:b>_2")

    def test_compose_labels(self):
        """<:f|:b> と <:b|:d> の連結テスト"""
        composed = compose_labels(LinkLabel("f", "b", 1), LinkLabel("b", "d", 4), via="b")
        self.assertEqual(composed, LinkLabel("d", "f", 4))

    def test_compose_without_common_address(self):
        """共通アドレスのない連結のテスト"""
        with self.assertRaises(ActorError):
            compose_labels(LinkLabel("a", "b"), LinkLabel("c", "d"))


class TestPrepare(unittest.TestCase):
    """分割とラベル付けのテスト"""

    def test_initial_labels(self):
        """アクター間の矢印だけにラベルが付くテスト"""
        g, partition = skk_graph()
        system = prepare(g, partition)
        expected = {
            "<:a|:b>_1": (0, 7),
            "<:a|:c>_1": (0, 3),
            "<:a|:c>_2": (1, 0),
            "<:a|:b>_2": (9, 7),
            "<:a|:b>_3": (9, 8),
            "<:a|:d>_1": (10, 9),
        }
        actual = {str(label): (a.source.node, a.target.node) for label, a in system.links.items()}
        self.assertEqual(actual, expected)
        self.assertEqual(cache(system, "d"), ["<:a|:d>_1"])

    def test_partial_partition(self):
        """ノードを覆わない分割のテスト"""
        g, partition = skk_graph()
        del partition[12]
        with self.assertRaises(PartialPartition):
            prepare(g, partition)

    def test_unknown_node_in_partition(self):
        """存在しないノードを含む分割のテスト"""
        g, partition = skk_graph()
        partition[99] = "z"
        with self.assertRaises(PartialPartition):
            prepare(g, partition)

    def test_invalid_graph(self):
        """不正なグラフを分割しないテスト"""
        g = PortGraph()
        g.add_node(LAMBDA, 0)
        with self.assertRaises(ActorError):
            prepare(g, {0: "a"})

    def test_input_graph_not_modified(self):
        """prepare が入力グラフを変えないテスト"""
        g, partition = skk_graph()
        before = g.copy()
        system = prepare(g, partition)
        ActorRuntime(system).interact(LinkLabel("a", "b", 1))
        self.assertTrue(is_isomorphic(g, before, match_free_labels=True))


class TestInteraction(unittest.TestCase):
    """リンク越しの相互作用のテスト"""

    def setUp(self):
        """テストセットアップ"""
        g, partition = skk_graph()
        self.system = prepare(g, partition)
        self.runtime = ActorRuntime(self.system)

    def test_beta_across_link(self):
        """a と b の間の BETA のテスト"""
        self.runtime.interact(LinkLabel("a", "b", 1))
        self.assertEqual(
            sorted(str(l) for l in self.system.links),
            ["<:a|:b>_3", "<:a|:c>_3", "<:a|:d>_1", "<:b|:c>_1"],
        )
        self.assertEqual(edge_multiplicities(self.system), {"ab": 1, "ac": 1, "ad": 1, "bc": 1})

    def test_messages_of_interaction(self):
        """問い合わせ・確認・ラベル更新のメッセージ数のテスト"""
        self.runtime.interact(LinkLabel("a", "b", 1))
        events = self.system.events

        queries = events_of(events, MessageKind.QUERY_NODE)
        self.assertEqual(len(queries), 1)
        self.assertEqual(queries[0].actor, "b")
        self.assertEqual(queries[0].payload_bits, 4)
        self.assertEqual(len(events_of(events, MessageKind.CONFIRM_SITE)), 1)

        relabels = events_of(events, MessageKind.RELABEL)
        self.assertEqual(len(relabels), 3)
        self.assertEqual(sorted((e.peer, e.actor) for e in relabels), [("a", "c"), ("a", "c"), ("b", "a")])
        self.assertTrue(all(e.payload_bits == 0 for e in relabels))
        self.assertEqual(len(events_of(events, MessageKind.ACK_RELABEL)), 3)

    def test_caches_after_interaction(self):
        """各アクターのラベル表がリンク表と一致するテスト"""
        self.runtime.interact(LinkLabel("a", "b", 1))
        self.assertEqual(self.runtime.cache_mismatches(), {})
        self.assertEqual(cache(self.system, "a"), ["<:a|:b>_3", "<:a|:c>_3", "<:a|:d>_1"])
        self.assertEqual(cache(self.system, "b"), ["<:a|:b>_3", "<:b|:c>_1"])
        self.assertEqual(cache(self.system, "c"), ["<:a|:c>_3", "<:b|:c>_1"])
        self.assertEqual(cache(self.system, "d"), ["<:a|:d>_1"])

    def test_retired_labels_forgotten(self):
        """Ack がそろうと古いラベルの待ちが消えるテスト"""
        self.runtime.interact(LinkLabel("a", "b", 1))
        for actor in self.system.actors.values():
            self.assertEqual(actor.pending_acks, {})
            self.assertFalse(actor.mailbox)

    def test_interaction_graph(self):
        """相互作用後のグラフが大域的な BETA と一致するテスト"""
        from glc_actors.core import apply_move, find_sites

        g, _ = skk_graph()
        beta = [m for m in find_sites(g, "BETA") if m.nodes == (0, 7)][0]
        self.runtime.interact(LinkLabel("a", "b", 1))
        self.assertTrue(is_isomorphic(self.system.graph, apply_move(g, beta)))

    def test_not_a_site(self):
        """主ポートを持たないリンクのテスト"""
        with self.assertRaises(NotASite):
            self.runtime.interact(LinkLabel("a", "d", 1))
        with self.assertRaises(NotASite):
            self.runtime.interact(LinkLabel("a", "a", 1))

    def test_stale_link(self):
        """既に消えたラベルのテスト"""
        self.runtime.interact(LinkLabel("a", "b", 1))
        with self.assertRaises(StaleLink):
            self.runtime.interact(LinkLabel("a", "b", 1))

    def test_six_actor_beta(self):
        """周りの4アクターにラベル更新が届くテスト"""
        g, partition = six_actor_graph()
        system = prepare(g, partition)
        behavior_interaction(system, LinkLabel("a", "b", 1))
        self.assertEqual(sorted(str(l) for l in system.links), ["<:c|:e>_1", "<:d|:f>_1"])
        relabels = events_of(system.events, MessageKind.RELABEL)
        self.assertEqual(len(relabels), 4)
        self.assertEqual(sorted(e.actor for e in relabels), ["c", "d", "e", "f"])
        self.assertEqual(cache(system, "c"), ["<:c|:e>_1"])
        self.assertEqual(cache(system, "f"), ["<:d|:f>_1"])
        self.assertEqual(cache(system, "a"), [])
        self.assertEqual(cache(system, "b"), [])


class TestNameChange(unittest.TestCase):
    """名前変更のテスト"""

    def setUp(self):
        """テストセットアップ"""
        g, partition = skk_graph()
        self.system = prepare(g, partition)

    def test_fanout_moves_to_upstream_actor(self):
        """FanOut 9 を d に移すテスト"""
        behavior_name_change(self.system, 9, "d")
        self.assertEqual(self.system.owner[9], "d")
        added = sorted(str(l) for l in self.system.links if l.pair == ("b", "d"))
        self.assertEqual(added, ["<:b|:d>_1", "<:b|:d>_2"])
        self.assertEqual(edge_multiplicities(self.system), {"ab": 1, "ac": 2, "bd": 2})

    def test_name_change_messages(self):
        """NameChange と Relabel のメッセージのテスト"""
        behavior_name_change(self.system, 9, "d")
        notices = events_of(self.system.events, MessageKind.NAME_CHANGE)
        self.assertEqual(len(notices), 1)
        self.assertEqual(notices[0].actor, "d")
        self.assertEqual(notices[0].payload_bits, 6)
        relabels = events_of(self.system.events, MessageKind.RELABEL)
        self.assertEqual(sorted((e.peer, e.actor) for e in relabels), [("a", "b"), ("a", "b")])
        self.assertEqual(ActorRuntime(self.system).cache_mismatches(), {})

    def test_termination_sends_prune_order(self):
        """Termination の名前変更は PruneOrder になるテスト"""
        g, partition = skk_graph()
        partition[12] = "c"
        system = prepare(g, partition)
        behavior_name_change(system, 12, "d")
        orders = events_of(system.events, MessageKind.PRUNE_ORDER)
        self.assertEqual(len(orders), 1)
        self.assertEqual(orders[0].payload_bits, 4)

    def test_wrong_kind(self):
        """λ ノードは名前を変えられないテスト"""
        with self.assertRaises(WrongKind):
            behavior_name_change(self.system, 0, "b")

    def test_no_common_link(self):
        """リンクを共有しないアクターへの名前変更のテスト"""
        with self.assertRaises(NoCommonLink):
            behavior_name_change(self.system, 9, "c")


class TestSplitAndCore(unittest.TestCase):
    """分裂とコア発現のテスト"""

    def test_split_disconnected_actor(self):
        """非連結な部分グラフを持つアクターの分裂テスト"""
        g, partition = skk_graph()
        system = prepare(g, partition)
        behavior_split(system, "a", "a2")
        self.assertIn("a2", system.actors)
        self.assertEqual(system.owned("a"), [0])
        self.assertEqual(system.owned("a2"), [9])
        spawns = events_of(system.events, MessageKind.SPAWN_REQUEST)
        self.assertEqual(len(spawns), 1)
        self.assertEqual(spawns[0].peer, "a2")
        self.assertEqual(ActorRuntime(system).cache_mismatches(), {})

    def test_split_connected_actor(self):
        """連結な部分グラフは分裂できないテスト"""
        g, partition = skk_graph()
        system = prepare(g, partition)
        with self.assertRaises(NotDisconnected):
            behavior_split(system, "c", "c2")

    def test_split_name_taken(self):
        """既存の名前への分裂テスト"""
        g, partition = skk_graph()
        system = prepare(g, partition)
        with self.assertRaises(NameTaken):
            behavior_split(system, "a", "b")

    def test_no_core(self):
        """コアのないアクターのテスト"""
        g, partition = skk_graph()
        system = prepare(g, partition)
        with self.assertRaises(NoCore):
            behavior_core_express(system, "a")

    def test_express_counter_once(self):
        """カウンターコアの1段の発現テスト"""
        system = numeral_system(2, with_successor=False)
        behavior_core_express(system, "n")
        g = system.graph
        self.assertEqual(g.count(NodeType.FANOUT), 1)
        self.assertEqual(g.count(NodeType.APPLICATION), 1)
        self.assertEqual(g.count(NodeType.CORE), 1)
        self.assertEqual(system.actors["n"].core.value, 1)
        self.assertEqual(len(events_of(system.events, MessageKind.CORE_EXPRESS)), 1)

    def test_express_counter_zero(self):
        """値 0 のコアは Termination と直結になるテスト"""
        system = numeral_system(0, with_successor=False)
        behavior_core_express(system, "n")
        self.assertEqual(system.graph.count(NodeType.CORE), 0)
        self.assertIsNone(system.actors["n"].core)
        self.assertEqual(church_value(graph_to_term(system.graph)), 0)

    def test_express_counter_function(self):
        """express_counter が元のグラフを変えないテスト"""
        g = PortGraph()
        core = g.add_node(counter_node(3))
        g.connect(FreeEnd("f"), PortRef(core, "c0"))
        g.connect(FreeEnd("x"), PortRef(core, "c1"))
        g.connect(PortRef(core, "c2"), FreeEnd("^"))
        result, new_ids, rest = express_counter(g, CounterCore(core, 3))
        self.assertEqual(len(new_ids), 3)
        self.assertEqual(rest.value, 2)
        self.assertEqual(g.count(NodeType.CORE), 1)
        self.assertTrue(result.validate().ok)


class TestRun(unittest.TestCase):
    """静止状態までの実行テスト"""

    def assert_reads_back(self, text, graph):
        expected = normal_order(parse_term(text))
        self.assertTrue(alpha_equivalent(graph_to_term(graph), expected))

    def test_skk_reduces_to_identity(self):
        """S K K が恒等関数になるテスト"""
        g, partition = skk_graph()
        system = prepare(g, partition)
        final, events = run(system)
        self.assertTrue(is_isomorphic(final, term_to_graph(parse_term(r"\x.x"))))
        self.assertTrue(alpha_equivalent(graph_to_term(final), parse_term(r"\x.x")))
        self.assertTrue(system.quiescent())
        self.assertEqual(ActorRuntime(system).cache_mismatches(), {})

    def test_terms_with_auto_partition(self):
        """自動分割での読み出しが正規順序簡約と一致するテスト"""
        cases = [
            r"(\x.x) (\y.y)",
            r"(\x.x x) (\y.y)",
            r"(\f.\x.f (f x)) (\y.y)",
        ]
        for text in cases:
            for n in (1, 2, 3):
                with self.subTest(term=text, actors=n):
                    g = term_to_graph(parse_term(text))
                    _, final, _ = run_partitioned(g, n)
                    self.assert_reads_back(text, final)

    def test_open_lambda_copied_by_actors(self):
        """自由変数を持つ λ の複製もアクター間で進み、正規形が読み出せるテスト"""
        text = r"\a.(\b.b b) \b.a"
        for n in (1, 2, 3):
            with self.subTest(actors=n):
                _, final, _ = run_partitioned(term_to_graph(parse_term(text)), n)
                self.assert_reads_back(text, final)

    def test_random_scheduler_is_deterministic(self):
        """同じシードなら同じイベントログになるテスト"""
        logs = []
        for _ in range(2):
            g, partition = skk_graph()
            system = prepare(g, partition)
            run(system, scheduler="random", seed=7)
            logs.append(system.event_log())
        self.assertEqual(logs[0], logs[1])

    def test_random_scheduler_result(self):
        """スケジューラーに依らず同じ項になるテスト"""
        for seed in (1, 2, 3):
            with self.subTest(seed=seed):
                g, partition = skk_graph()
                final, _ = run(prepare(g, partition), scheduler="random", seed=seed)
                self.assertTrue(alpha_equivalent(graph_to_term(final), parse_term(r"\x.x")))

    def test_event_log_records(self):
        """イベントログの各行の形式テスト"""
        g, partition = skk_graph()
        system = prepare(g, partition)
        run(system)
        rows = [json.loads(line) for line in system.event_log().splitlines()]
        self.assertEqual([row["seq"] for row in rows], list(range(1, len(rows) + 1)))
        self.assertTrue(all(is_event_record(row) for row in rows))
        self.assertEqual(rows[0]["message-kind"], system.events[0].message_kind)
        self.assertTrue(all(isinstance(row["links-touched"], list) for row in rows))
        self.assertIn("<:a|:b>_1", labels_of(system.events))

    def test_event_limit(self):
        """最大イベント数に到達したときのテスト"""
        g, partition = skk_graph()
        with self.assertRaises(EventLimitExceeded) as cm:
            run(prepare(g, partition), max_events=3)
        self.assertEqual(len(cm.exception.events), 3)
        self.assertTrue(cm.exception.graph.validate().ok)

    def test_numeral_with_successor(self):
        """コア発現と後者関数で n+1 が読み出せるテスト"""
        for n in (0, 1, 2, 5):
            with self.subTest(n=n):
                system = numeral_system(n)
                final, _ = run(system)
                self.assertEqual(final.count(NodeType.CORE), 0)
                self.assertEqual(church_value(graph_to_term(final)), n + 1)

    def test_numeral_without_successor(self):
        """後者関数なしでは n が読み出せるテスト"""
        for n in (0, 3):
            with self.subTest(n=n):
                final, _ = run(numeral_system(n, with_successor=False))
                self.assertEqual(church_value(graph_to_term(final)), n)


class TestDiagramSnapshots(unittest.TestCase):
    """アクター図式（頂点とリンクの多重度・ラベル）のスナップショットテスト"""

    def test_diagram_after_beta(self):
        """a と b の間の BETA 後の図式"""
        g, partition = skk_graph()
        system = prepare(g, partition)
        behavior_interaction(system, LinkLabel("a", "b", 1))
        self.assertEqual(
            diagram_snapshot(system),
            (
                ["a", "b", "c", "d"],
                {
                    ("a", "b"): (1, ["<:a|:b>_3"]),
                    ("a", "c"): (1, ["<:a|:c>_3"]),
                    ("a", "d"): (1, ["<:a|:d>_1"]),
                    ("b", "c"): (1, ["<:b|:c>_1"]),
                },
            ),
        )

    def test_diagram_after_name_change(self):
        """FanOut 9 を d に移した後の図式"""
        g, partition = skk_graph()
        system = prepare(g, partition)
        behavior_name_change(system, 9, "d")
        self.assertEqual(
            diagram_snapshot(system),
            (
                ["a", "b", "c", "d"],
                {
                    ("a", "b"): (1, ["<:a|:b>_1"]),
                    ("a", "c"): (2, ["<:a|:c>_1", "<:a|:c>_2"]),
                    ("b", "d"): (2, ["<:b|:d>_1", "<:b|:d>_2"]),
                },
            ),
        )


class TestSequentialAgreement(unittest.TestCase):
    """アクター実行と逐次簡約の結果が一致するテスト"""

    @pytest.mark.slow
    def test_partitions_and_seeds(self):
        """30個の閉じた項 × 1/2/4 アクター × 10シードで逐次簡約と同型になるテスト"""
        terms = agreement_terms(30)
        self.assertEqual(len(terms), 30)
        for t, expected in terms:
            for n in (1, 2, 4):
                for seed in range(10):
                    with self.subTest(term=str(t), actors=n, seed=seed):
                        g = term_to_graph(t)
                        _, final, _ = run_partitioned(g, n, scheduler="random", seed=seed)
                        self.assertTrue(is_isomorphic(final, expected))


class TestPartition(unittest.TestCase):
    """分割ファイルと自動分割のテスト"""

    def test_parse_partition(self):
        """コメントと空行を含む分割ファイルのテスト"""
        text = "# skk\n0 a\n9 :a\n\n7 b  # application\n"
        self.assertEqual(parse_partition(text), {0: "a", 9: "a", 7: "b"})

    def test_parse_partition_errors(self):
        """読めない行と重複のテスト"""
        with self.assertRaises(PartialPartition):
            parse_partition("0 a b\n")
        with self.assertRaises(PartialPartition):
            parse_partition("0 a\n0 b\n")

    def test_auto_partition_covers_graph(self):
        """自動分割が全ノードを覆うテスト"""
        g, _ = skk_graph()
        partition = auto_partition(g, 4)
        self.assertEqual(sorted(partition), sorted(g.nodes))
        self.assertEqual(sorted(set(partition.values())), ["a", "b", "c", "d"])
        self.assertEqual(partition[0], "a")

    def test_auto_partition_single_actor(self):
        """1アクターへの分割ではリンクがないテスト"""
        g, _ = skk_graph()
        system = prepare(g, auto_partition(g, 1))
        self.assertEqual(system.links, {})

    def test_auto_partition_needs_actors(self):
        """アクター数 0 のテスト"""
        g, _ = skk_graph()
        with self.assertRaises(ValueError):
            auto_partition(g, 0)


if __name__ == "__main__":
    unittest.main()
