#!/usr/bin/env python3
"""書き換え規則・簡約エンジン・同型判定のテストケース"""

import unittest
import itertools
import json
import sys
import os

# プロジェクトのルートをPATHに追加
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import pytest

from glc_actors import apply_move, emulate_global_fanout, find_sites, is_isomorphic, parse_mol, reduce
from glc_actors.config import settings
from glc_actors.core.rewrite import find_all_sites
from glc_actors.core.engine import Trace, make_rng
from glc_actors.database import RuleCatalog
from glc_actors.exceptions import (
    NotDetachable,
    ScriptError,
    SizeLimitExceeded,
    StaleMatch,
    StepLimitExceeded,
)
from glc_actors.lambda_sector import ROOT_LABEL, closed_terms, graph_to_term, parse_term, term_to_graph
from glc_actors.models import Mode, NodeType, RuleName, alpha_equivalent
from glc_actors.models.graph import FANOUT, FreeEnd, PortRef
from glc_actors.utils.types import is_trace_event


def compiled(text):
    return term_to_graph(parse_term(text))


def fanout_site(t):
    """閉じた項のグラフの根を FanOut に流し込み、(グラフ, FanOut の ID) を返す"""
    g = term_to_graph(t)
    root = g.arrow_at(FreeEnd(ROOT_LABEL))
    g.disconnect(root)
    fanout = g.add_node(FANOUT)
    g.connect(root.source, PortRef(fanout, "in"))
    g.connect(PortRef(fanout, "out1"), FreeEnd("p"))
    g.connect(PortRef(fanout, "out2"), FreeEnd("q"))
    return g, fanout


def interface(g):
    return sorted(g.free_inputs()), sorted(g.free_outputs())


class TestRuleCatalog(unittest.TestCase):
    """規則カタログのテスト"""

    def setUp(self):
        """テストセットアップ"""
        self.catalog = RuleCatalog()

    def test_glc_priority(self):
        """glc モードの優先順テスト"""
        self.assertEqual(
            [r.value for r in self.catalog.priority_order(Mode.GLC)],
            ["BETA", "PRUNE-APP", "PRUNE-LAMBDA", "PRUNE-FANOUT", "PRUNE-FANIN", "PRUNE-TERM-STUB", "GLOBAL-FANOUT"],
        )

    def test_glc_fallback(self):
        """glc モードの局所複製は代替規則としてだけ使うテスト"""
        fallback = self.catalog.fallback_order(Mode.GLC)
        self.assertEqual(fallback[0], RuleName.FAN_IN)
        self.assertIn(RuleName.DIST_LAMBDA, fallback)
        self.assertNotIn(RuleName.DIST_LAMBDA, self.catalog.enabled(Mode.GLC))
        self.assertEqual(self.catalog.fallback_order(Mode.CHEMLAMBDA), [])
        self.assertEqual(self.catalog.automatic(Mode.GLC)[-len(fallback):], fallback)

    def test_chemlambda_priority(self):
        """chemlambda モードは大域規則を持たないテスト"""
        order = self.catalog.priority_order(Mode.CHEMLAMBDA)
        self.assertEqual(order[:3], [RuleName.BETA, RuleName.FAN_IN, RuleName.DIST_APP])
        self.assertNotIn(RuleName.GLOBAL_FANOUT, order)
        self.assertFalse(self.catalog.is_local(RuleName.GLOBAL_FANOUT))

    def test_scripted_only_rules(self):
        """CO-COMM と CO-ASSOC はスクリプト専用のテスト"""
        self.assertNotIn(RuleName.CO_COMM, self.catalog.priority_order(Mode.GLC))
        self.assertIn(RuleName.CO_ASSOC, self.catalog.enabled(Mode.CHEMLAMBDA))

    def test_lookup(self):
        """規則名の表記ゆれのテスト"""
        self.assertIs(RuleCatalog.lookup("dist_app"), RuleName.DIST_APP)
        self.assertIs(RuleCatalog.lookup(" Beta "), RuleName.BETA)
        with self.assertRaises(ValueError):
            RuleCatalog.lookup("ETA")


class TestMoves(unittest.TestCase):
    """個々の規則のテスト"""

    def test_beta(self):
        """恒等関数どうしの BETA のテスト"""
        g = compiled(r"(\x.x) (\y.y)")
        sites = find_sites(g, RuleName.BETA)
        self.assertEqual(len(sites), 1)
        result = apply_move(g, sites[0])
        self.assertTrue(is_isomorphic(result, compiled(r"\y.y")))
        self.assertEqual(g.size, 3)

    def test_beta_closes_loop(self):
        """BETA で節点のないループができるテスト"""
        g = parse_mol("L a a f\nA f r r")
        result = apply_move(g, find_sites(g, "BETA")[0])
        self.assertEqual(result.size, 0)
        self.assertEqual(result.loops, 1)

    def test_beta_cross_wired_pair(self):
        """λ の本体と変数を Application の出力と引数にたすき掛けした BETA のテスト"""
        # 本体入力 ← Application 出力、変数出力 → 引数入力 がそれぞれ1つの輪になる
        g = parse_mol("L e v o\nA o v e")
        result = apply_move(g, find_sites(g, "BETA")[0])
        self.assertEqual(result.size, 0)
        self.assertEqual(result.loops, 2)

        # 本体側だけがたすき掛けなら輪は1つで、変数と引数は自由端のままつながる
        g = parse_mol("L e v o\nA o d e")
        result = apply_move(g, find_sites(g, "BETA")[0])
        self.assertEqual(result.loops, 1)
        self.assertTrue(is_isomorphic(result, parse_mol("ARROW d v\nLOOP 1"), match_free_labels=True))

    def test_co_comm(self):
        """CO-COMM で出力が入れ替わるテスト"""
        g = parse_mol("FO x a b\nT a\nT b")
        result = apply_move(g, find_sites(g, "CO-COMM")[0])
        self.assertEqual(result.peer(PortRef(3, "out2")), PortRef(1, "in"))
        self.assertEqual(result.peer(PortRef(3, "out1")), PortRef(2, "in"))

    def test_co_assoc(self):
        """CO-ASSOC で FanOut の木が組み替わるテスト"""
        g = parse_mol("FO x a m\nFO m b c\nT a\nT b\nT c")
        result = apply_move(g, find_sites(g, "CO-ASSOC")[0])
        self.assertEqual(result.count(NodeType.FANOUT), 2)
        self.assertTrue(result.validate().ok)
        self.assertEqual(result.peer(PortRef(5, "out2")), PortRef(4, "in"))

    def test_prune_app(self):
        """出力を捨てられた Application のテスト"""
        final, trace = reduce(parse_mol("A f x r\nT r"))
        self.assertEqual(trace.rules(), ["PRUNE-APP"])
        self.assertEqual(final.count(NodeType.TERMINATION), 2)
        self.assertEqual(final.free_inputs(), ["f", "x"])

    def test_prune_lambda_cascade(self):
        """PRUNE-LAMBDA の後に Stub と Termination が消えるテスト"""
        final, trace = reduce(parse_mol("L b v r\nT r\nS b\nT v"))
        self.assertEqual(trace.rules(), ["PRUNE-LAMBDA", "PRUNE-TERM-STUB", "PRUNE-TERM-STUB"])
        self.assertEqual(final.size, 0)
        self.assertEqual(final.arrows, set())

    def test_prune_fanout(self):
        """片方を捨てられた FanOut は配線に戻るテスト"""
        final, _ = reduce(parse_mol("FO x a b\nT a"))
        self.assertEqual(final.size, 0)
        self.assertEqual(final.free_inputs(), ["x"])
        self.assertEqual(final.free_outputs(), ["b"])

    def test_dist_app(self):
        """DIST-APP で Application が複製されるテスト"""
        final, trace = reduce(parse_mol("A f x r\nFOE r p q"), mode="chemlambda")
        self.assertEqual(trace.rules(), ["DIST-APP"])
        self.assertEqual(final.count(NodeType.APPLICATION), 2)
        self.assertTrue(all(final.nodes[n].copier for n in final.ids_of(NodeType.FANOUT)))
        self.assertEqual(final.free_outputs(), ["p", "q"])

    def test_dist_stub(self):
        """Stub の複製は2つの Stub のテスト"""
        final, trace = reduce(parse_mol("S a\nFO a p q"), mode="chemlambda")
        self.assertEqual(trace.rules(), ["DIST-STUB"])
        self.assertEqual(final.count(NodeType.STUB), 2)

    def test_stale_match(self):
        """適用済みのマッチを再適用するテスト"""
        g = compiled(r"(\x.x) (\y.y)")
        m = find_sites(g, "BETA")[0]
        result = apply_move(g, m)
        with self.assertRaises(StaleMatch):
            apply_move(result, m)

    def test_global_fanout(self):
        """切り離し可能な部分グラフの複製テスト"""
        g = parse_mol("L a a y\nFO y p q")
        sites = find_sites(g, "GLOBAL-FANOUT")
        self.assertEqual(len(sites), 1)
        self.assertEqual(sites[0].region, frozenset({0}))
        result = apply_move(g, sites[0])
        self.assertTrue(is_isomorphic(result, parse_mol("L a a p\nL b b q"), match_free_labels=True))

    def test_global_fanout_needs_closed_region(self):
        """自由端に届く部分グラフは複製しないテスト"""
        self.assertEqual(find_sites(parse_mol("A f g y\nFO y p q"), "GLOBAL-FANOUT"), [])


class TestReduce(unittest.TestCase):
    """簡約エンジンのテスト"""

    def test_glc_self_application(self):
        """(λx.x x)(λy.y) の glc 簡約テスト"""
        final, trace = reduce(compiled(r"(\x.x x) (\y.y)"))
        self.assertEqual(trace.rules(), ["BETA", "GLOBAL-FANOUT", "BETA"])
        self.assertTrue(alpha_equivalent(graph_to_term(final), parse_term(r"\y.y")))

    def test_chemlambda_self_application(self):
        """(λx.x x)(λy.y) の chemlambda 簡約テスト"""
        final, trace = reduce(compiled(r"(\x.x x) (\y.y)"), mode=Mode.CHEMLAMBDA)
        self.assertIn("DIST-LAMBDA", trace.rules())
        self.assertIn("FAN-IN", trace.rules())
        self.assertTrue(alpha_equivalent(graph_to_term(final), parse_term(r"\y.y")))

    def test_input_not_modified(self):
        """reduce が入力グラフを変えないテスト"""
        g = compiled(r"(\x.x) (\y.y)")
        reduce(g)
        self.assertEqual(g.size, 3)

    def test_script_strategy(self):
        """script 戦略のテスト"""
        final, trace = reduce(parse_mol("FO x a b\nT a\nT b"), strategy="script", script=["CO-COMM"])
        self.assertEqual(trace.rules(), ["CO-COMM"])
        self.assertEqual(final.count(NodeType.FANOUT), 1)

    def test_script_errors(self):
        """適用箇所のない規則・無効な規則のテスト"""
        with self.assertRaises(ScriptError):
            reduce(parse_mol("L a a r"), strategy="script", script=["BETA"])
        with self.assertRaises(ScriptError):
            reduce(parse_mol("FI a b r\nFOE r p q"), strategy="script", script=["FAN-IN"])

    def test_random_strategy_reproducible(self):
        """同じシードなら同じトレースになるテスト"""
        g = compiled(r"(\f.\x.f (f x)) (\y.y)")
        _, first = reduce(g, strategy="random", seed=5)
        _, second = reduce(g, strategy="random", seed=5)
        self.assertEqual(first.to_jsonl(), second.to_jsonl())
        self.assertEqual(first.seed, 5)

    def test_trace_jsonl(self):
        """トレースの JSON 行形式テスト"""
        _, trace = reduce(compiled(r"(\x.x x) (\y.y)"))
        lines = trace.to_jsonl().splitlines()
        header = json.loads(lines[0])
        self.assertEqual(header["mode"], "glc")
        self.assertEqual(header["rng"], "PCG64")
        self.assertTrue(all(is_trace_event(json.loads(line)) for line in lines[1:]))
        self.assertEqual(Trace.from_jsonl(trace.to_jsonl()).rules(), trace.rules())

    def test_step_limit(self):
        """最大ステップ数のテスト"""
        with self.assertRaises(StepLimitExceeded) as cm:
            reduce(compiled(r"(\x.x x) (\y.y)"), max_steps=1)
        self.assertEqual(len(cm.exception.trace), 1)
        self.assertTrue(cm.exception.graph.validate().ok)

    def test_omega_does_not_finish(self):
        """停止しない項のテスト"""
        with self.assertRaises(StepLimitExceeded):
            reduce(compiled(r"(\x.x x) (\x.x x)"), max_steps=50)


class TestEmulation(unittest.TestCase):
    """大域 FanOut の局所エミュレーションのテスト"""

    def test_emulates_global_fanout(self):
        """局所規則だけで同じ複製になるテスト"""
        g = parse_mol("L a a y\nFO y p q")
        expected = apply_move(g, find_sites(g, "GLOBAL-FANOUT")[0])
        result, trace = emulate_global_fanout(g, 1)
        self.assertEqual(trace.rules(), ["DIST-LAMBDA", "FAN-IN"])
        self.assertTrue(is_isomorphic(result, expected, match_free_labels=True))

    def test_parallel_fan_in_wiring(self):
        """FAN-IN の配線設定を変えても同じ複製になるテスト"""
        previous = settings.dump()
        try:
            settings.update({"fan_in_wiring": "parallel"})
            g = parse_mol("L a a y\nFO y p q")
            result, _ = emulate_global_fanout(g, 1)
            self.assertTrue(is_isomorphic(result, parse_mol("L a a p\nL b b q")))
        finally:
            settings.load(previous)

    def test_application_copy(self):
        """Application を含む部分グラフの複製テスト"""
        g = parse_mol("L a a f\nL b b x\nA f x y\nFO y p q")
        expected = apply_move(g, find_sites(g, "GLOBAL-FANOUT")[0])
        result, _ = emulate_global_fanout(g, 3)
        self.assertTrue(is_isomorphic(result, expected))

    def test_not_detachable(self):
        """自由端から流れ込む FanOut のテスト"""
        with self.assertRaises(NotDetachable):
            emulate_global_fanout(parse_mol("FO x a b"), 0)
        with self.assertRaises(NotDetachable):
            emulate_global_fanout(parse_mol("A f g y\nFO y p q"), 1)

    def test_generated_sites(self):
        """閉じた項を FanOut に流し込んだ50以上の箇所で大域複製と一致するテスト"""
        checked = 0
        for size in range(2, 7):
            for t in closed_terms(size):
                g, fanout = fanout_site(t)
                with self.subTest(term=str(t)):
                    site = next(m for m in find_sites(g, "GLOBAL-FANOUT") if m.nodes[0] == fanout)
                    expected = apply_move(g, site)
                    result, _ = emulate_global_fanout(g, fanout)
                    self.assertTrue(is_isomorphic(result, expected, match_free_labels=True))
                checked += 1
        self.assertGreaterEqual(checked, 50)


class TestMoveProperties(unittest.TestCase):
    """書き換え規則が保つ性質のテスト"""

    def test_co_comm_is_involution(self):
        """CO-COMM を2回適用すると元に戻るテスト"""
        g = parse_mol("L a a x\nFO x p q")
        once = apply_move(g, find_sites(g, RuleName.CO_COMM)[0])
        twice = apply_move(once, find_sites(once, RuleName.CO_COMM)[0])
        self.assertFalse(is_isomorphic(once, g, match_free_labels=True))
        self.assertTrue(is_isomorphic(twice, g, match_free_labels=True))

    def test_fanout_roles_are_distinguished(self):
        """FanOut の out1 と out2 を入れ替えたグラフは同型でないテスト"""
        first = parse_mol("FO x a b\nT a")
        second = parse_mol("FO x b a\nT a")
        self.assertFalse(is_isomorphic(first, second, match_free_labels=True))

    @pytest.mark.slow
    def test_random_moves_keep_graph_valid(self):
        """無作為に選んだ1万回以上の書き換えでグラフが整合し、自由端が変わらないテスト"""
        bases = []
        for size in range(1, 7):
            for t in closed_terms(size):
                bases.append(term_to_graph(t))
                bases.append(fanout_site(t)[0])
        rng = make_rng(7)
        rules = list(RuleName)
        moves = 0
        for base in itertools.cycle(bases):
            if moves >= 10000:
                break
            g = base
            expected = interface(base)
            for _ in range(40):
                sites = find_all_sites(g, rules)
                if not sites or g.size > 60:
                    break
                m = sites[int(rng.integers(len(sites)))]
                g = apply_move(g, m)
                moves += 1
                report = g.validate()
                self.assertTrue(report.ok, f"{m.rule.value}: {report}")
                self.assertEqual(interface(g), expected, m.rule.value)


class TestIsomorphism(unittest.TestCase):
    """同型判定のテスト"""

    def test_isomorphic_ignores_ids(self):
        """ノードIDの付け方に依らないテスト"""
        first = parse_mol("L a a r\nT x")
        second = parse_mol("T x\nL b b r")
        self.assertTrue(is_isomorphic(first, second))

    def test_not_isomorphic(self):
        """異なる項のテスト"""
        self.assertFalse(is_isomorphic(compiled(r"\x.\y.x"), compiled(r"\x.\y.y")))
        self.assertFalse(is_isomorphic(parse_mol("L a a r"), parse_mol("L a a r\nLOOP 1")))

    def test_free_labels(self):
        """自由端ラベルの一致を求めるテスト"""
        self.assertTrue(is_isomorphic(parse_mol("ARROW x y"), parse_mol("ARROW p q")))
        self.assertFalse(
            is_isomorphic(parse_mol("ARROW x y"), parse_mol("ARROW p q"), match_free_labels=True)
        )

    def test_size_limit(self):
        """ノード数上限のテスト"""
        previous = settings.dump()
        try:
            settings.update({"iso_node_limit": 1})
            with self.assertRaises(SizeLimitExceeded):
                is_isomorphic(compiled(r"(\x.x) (\y.y)"), compiled(r"(\x.x) (\y.y)"))
        finally:
            settings.load(previous)


if __name__ == "__main__":
    unittest.main()
