#!/usr/bin/env python3
"""ラムダセクターのテストケース"""

import unittest
import sys
import os

# プロジェクトのルートをPATHに追加
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import pytest

from glc_actors import parse_mol, reduce
from glc_actors.core import is_isomorphic
from glc_actors.exceptions import DecorationCycle, NoUniqueRoot, NotLambdaSector, TermSyntaxError
from glc_actors.lambda_sector import (
    ROOT_LABEL,
    church_numeral,
    church_value,
    closed_terms,
    expected_node_count,
    graph_to_term,
    has_redex,
    normal_order,
    parse_term,
    successor_term,
    term_to_graph,
)
from glc_actors.models import Abs, App, NodeType, Var, alpha_equivalent, format_term


class TestTermParsing(unittest.TestCase):
    """項テキストのパースと表示のテスト"""

    def test_format_round_trip(self):
        """最小括弧の表示テスト"""
        for text in (r"\x.\y.x y z", r"(\x.x) \y.y", "f (g x)", r"x (\y.y) z"):
            with self.subTest(text=text):
                self.assertEqual(format_term(parse_term(text)), text)

    def test_multiple_binders(self):
        """複数束縛子の略記テスト"""
        self.assertEqual(parse_term(r"\x y.x"), Abs("x", Abs("y", Var("x"))))
        self.assertEqual(parse_term("λx.x"), Abs("x", Var("x")))

    def test_application_is_left_associative(self):
        """適用の左結合テスト"""
        self.assertEqual(parse_term("a b c"), App(App(Var("a"), Var("b")), Var("c")))

    def test_builtins(self):
        """組み込み項の展開テスト"""
        self.assertTrue(alpha_equivalent(parse_term("I"), parse_term(r"\x.x")))
        self.assertTrue(alpha_equivalent(parse_term("K"), parse_term(r"\a.\b.a")))
        self.assertEqual(parse_term(r"\I.I"), Abs("I", Var("I")))

    def test_syntax_errors(self):
        """構文エラーの位置テスト"""
        cases = [(r"\x x", 4), (r"(\x.x", 5), ("x $", 2), ("", 0)]
        for text, position in cases:
            with self.subTest(text=text):
                with self.assertRaises(TermSyntaxError) as cm:
                    parse_term(text)
                self.assertEqual(cm.exception.position, position)


class TestCompile(unittest.TestCase):
    """項 → グラフ変換のテスト"""

    def test_sharing(self):
        """2回使う変数は FanOut になるテスト"""
        g = term_to_graph(parse_term(r"\x.x x"))
        self.assertEqual(g.count(NodeType.LAMBDA), 1)
        self.assertEqual(g.count(NodeType.APPLICATION), 1)
        self.assertEqual(g.count(NodeType.FANOUT), 1)
        self.assertTrue(g.validate().ok)

    def test_unused_variable(self):
        """使わない変数は Termination になるテスト"""
        g = term_to_graph(parse_term(r"\x.\y.x"))
        self.assertEqual(g.count(NodeType.TERMINATION), 1)
        self.assertEqual(g.free_outputs(), [ROOT_LABEL])

    def test_free_variables(self):
        """自由変数は同名の自由端になるテスト"""
        g = term_to_graph(parse_term("f x"))
        self.assertEqual(g.free_inputs(), ["f", "x"])
        self.assertEqual(graph_to_term(g), App(Var("f"), Var("x")))

    def test_node_count(self):
        """ノード数の見積りテスト"""
        for text in ("S", "K", r"\x.x x x", "S K K", "Y"):
            with self.subTest(text=text):
                t = parse_term(text)
                self.assertEqual(term_to_graph(t).size, expected_node_count(t))
        self.assertEqual(expected_node_count(parse_term("S")), 7)


class TestReadback(unittest.TestCase):
    """グラフ → 項の読み出しテスト"""

    def test_round_trip_small_terms(self):
        """小さな閉じた項の往復テスト"""
        for size in range(1, 7):
            for t in closed_terms(size):
                with self.subTest(term=format_term(t)):
                    g = term_to_graph(t)
                    self.assertEqual(g.size, expected_node_count(t))
                    self.assertTrue(alpha_equivalent(graph_to_term(g), t))

    def test_round_trip_named_terms(self):
        """組み込み項と Church 数の往復テスト"""
        for t in (parse_term("S"), parse_term("Y"), church_numeral(3), successor_term()):
            with self.subTest(term=format_term(t)):
                self.assertTrue(alpha_equivalent(graph_to_term(term_to_graph(t)), t))

    def test_not_lambda_sector(self):
        """FanIn を含むグラフのテスト"""
        with self.assertRaises(NotLambdaSector):
            graph_to_term(parse_mol("FI a b r"))

    def test_escaped_variable(self):
        """変数が束縛の外へ出るグラフのテスト"""
        with self.assertRaises(NotLambdaSector):
            graph_to_term(parse_mol("L b v r\nA r v s"))

    def test_no_unique_root(self):
        """出力が2つあるグラフのテスト"""
        with self.assertRaises(NoUniqueRoot):
            graph_to_term(parse_mol("L a a r\nL b b s"))

    def test_loops_do_not_decorate(self):
        """節点のないループを含むグラフのテスト"""
        with self.assertRaises(DecorationCycle):
            graph_to_term(parse_mol("L a a r\nLOOP 1"))


class TestNormalOrder(unittest.TestCase):
    """項レベルの正規順序簡約のテスト"""

    def test_skk(self):
        """S K K は恒等関数のテスト"""
        self.assertTrue(alpha_equivalent(normal_order(parse_term("S K K")), parse_term(r"\x.x")))

    def test_omega_gives_up(self):
        """停止しない項のテスト"""
        self.assertIsNone(normal_order(parse_term(r"(\x.x x) (\x.x x)"), max_steps=20))

    def test_successor(self):
        """後者関数のテスト"""
        result = normal_order(App(successor_term(), church_numeral(2)))
        self.assertEqual(church_value(result), 3)

    def test_church_value(self):
        """Church 数の読み取りテスト"""
        self.assertEqual(church_value(church_numeral(0)), 0)
        self.assertEqual(church_value(parse_term(r"\g.\y.g (g y)")), 2)
        self.assertIsNone(church_value(parse_term(r"\x.x")))
        with self.assertRaises(ValueError):
            church_numeral(-1)

    def test_has_redex(self):
        """β-redex の有無テスト"""
        self.assertTrue(has_redex(parse_term(r"\z.(\x.x) z")))
        self.assertFalse(has_redex(parse_term(r"\x.x x")))

    def test_closed_term_counts(self):
        """閉じた項の個数テスト"""
        self.assertEqual([len(list(closed_terms(n))) for n in range(1, 6)], [0, 1, 2, 4, 13])


class TestGraphReduction(unittest.TestCase):
    """グラフ簡約と正規順序簡約の一致テスト"""

    TERMS = [
        "S K K",
        r"(\x.x x) (\y.y)",
        r"(\f.\x.f (f x)) (\y.y)",
        r"(\x.\y.x) (\z.z) (\w.w w)",
        r"(\n.\f.\x.f (n f x)) (\g.\y.g y)",
    ]

    def test_glc_matches_normal_order(self):
        """glc モードの結果が正規形と一致するテスト"""
        for text in self.TERMS:
            with self.subTest(term=text):
                t = parse_term(text)
                final, _ = reduce(term_to_graph(t))
                self.assertTrue(alpha_equivalent(graph_to_term(final), normal_order(t)))

    def test_chemlambda_matches_normal_order(self):
        """chemlambda モードの結果が正規形と一致するテスト"""
        for text in ("S K K", r"(\x.x x) (\y.y)"):
            with self.subTest(term=text):
                t = parse_term(text)
                final, _ = reduce(term_to_graph(t), mode="chemlambda")
                self.assertTrue(alpha_equivalent(graph_to_term(final), normal_order(t)))

    def test_open_lambda_is_copied_locally(self):
        """自由変数を持つ λ の複製は glc でも局所規則で続くテスト"""
        t = parse_term(r"\a.(\b.b b) \b.a")
        final, trace = reduce(term_to_graph(t))
        self.assertIn("DIST-LAMBDA", trace.rules())
        self.assertNotIn("GLOBAL-FANOUT", trace.rules())
        self.assertTrue(alpha_equivalent(graph_to_term(final), parse_term(r"\a.a")))

    @pytest.mark.slow
    def test_glc_matches_normal_order_exhaustively(self):
        """大きさ 8 以下の全ての閉じた項で glc の結果が正規形と一致するテスト"""
        checked = 0
        for size in range(1, 9):
            for t in closed_terms(size):
                expected = normal_order(t, max_steps=500)
                if expected is None:
                    continue
                with self.subTest(term=format_term(t)):
                    final, _ = reduce(term_to_graph(t), max_steps=5000)
                    self.assertTrue(alpha_equivalent(graph_to_term(final), expected))
                checked += 1
        self.assertGreater(checked, 500)

    def test_chemlambda_random_skk(self):
        """chemlambda の random 戦略で S K K がどのシードでも I になるテスト"""
        identity = term_to_graph(parse_term(r"\x.x"))
        g = term_to_graph(parse_term("S K K"))
        for seed in range(100):
            with self.subTest(seed=seed):
                final, _ = reduce(g, mode="chemlambda", strategy="random", seed=seed)
                self.assertTrue(is_isomorphic(final, identity))


if __name__ == "__main__":
    unittest.main()
