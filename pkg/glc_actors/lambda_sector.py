"""
GLC Actors - ラムダセクター

ラムダ項と GLC グラフの相互変換。項 → グラフは構文木の直訳（変数の共有は左櫛形の FanOut 列）、
グラフ → 項はデコレーションの局所伝播による読み出しで、簡約とは独立した処理になる。
"""

from __future__ import annotations
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Set
import logging

from .exceptions import DecorationCycle, NoUniqueRoot, NotLambdaSector, TermSyntaxError
from .models.enums import NodeType
from .models.graph import (
    APPLICATION,
    FANOUT,
    LAMBDA,
    TERMINATION,
    Endpoint,
    FreeEnd,
    PortGraph,
    PortRef,
)
from .models.term import (
    Abs,
    App,
    DeBruijn,
    Term,
    TermParser,
    Var,
    fresh_names,
    free_variables,
    from_de_bruijn,
    term_size,
    to_de_bruijn,
    variable_uses,
)

logger = logging.getLogger(__name__)

ROOT_LABEL = "^"

FORBIDDEN_IN_SECTOR = (NodeType.FANIN, NodeType.DILATION, NodeType.CORE, NodeType.STUB)


def parse_term(text: str) -> Term:
    """
    ラムダ項テキストをパース

    Raises:
        TermSyntaxError: 構文エラー（位置付き）
    """
    try:
        return TermParser.parse(text)
    except RecursionError as e:
        raise TermSyntaxError("term is nested too deeply", 0) from e


# --- 項 → グラフ ---


@dataclass
class _Binder:
    """変数の供給元と、出現位置（入力ポート）の一覧"""

    source: Endpoint
    uses: List[Endpoint] = field(default_factory=list)


def _share(g: PortGraph, binder: _Binder) -> None:
    uses = binder.uses
    if not uses:
        t = g.add_node(TERMINATION)
        g.connect(binder.source, PortRef(t, "in"))
        return
    if len(uses) == 1:
        g.connect(binder.source, uses[0])
        return
    # 左櫛形: F1(in, out1 → F2, out2 → use_k), ..., 最深の FanOut が use_1 と use_2 を受け持つ
    source = binder.source
    for k in range(len(uses), 1, -1):
        f = g.add_node(FANOUT)
        g.connect(source, PortRef(f, "in"))
        g.connect(PortRef(f, "out2"), uses[k - 1])
        source = PortRef(f, "out1")
    g.connect(source, uses[0])


def term_to_graph(t: Term) -> PortGraph:
    """
    ラムダ項を GLC グラフに変換

    抽象 → Lambda、適用 → Application。変数の k 回の出現は k-1 個の FanOut、
    未使用の変数は Termination になる。自由変数は同名の自由端、根は自由端 "^"。
    """
    g = PortGraph()
    free: Dict[str, _Binder] = {}

    def build(term: Term, target: Endpoint, env: Dict[str, _Binder]) -> None:
        if isinstance(term, Var):
            binder = env.get(term.name)
            if binder is None:
                binder = free.setdefault(term.name, _Binder(FreeEnd(term.name)))
            binder.uses.append(target)
        elif isinstance(term, Abs):
            lam = g.add_node(LAMBDA)
            g.connect(PortRef(lam, "out"), target)
            binder = _Binder(PortRef(lam, "var-out"))
            build(term.body, PortRef(lam, "body-in"), {**env, term.binder: binder})
            _share(g, binder)
        else:
            app = g.add_node(APPLICATION)
            g.connect(PortRef(app, "out"), target)
            build(term.fun, PortRef(app, "fun-in"), env)
            build(term.arg, PortRef(app, "arg-in"), env)

    build(t, FreeEnd(ROOT_LABEL), {})
    for name in sorted(free):
        _share(g, free[name])
    logger.debug("term compiled", extra={"nodes": g.size, "free": sorted(free)})
    return g


# --- グラフ → 項 ---


@dataclass
class Decoration:
    """
    矢印（source 側端点で識別）へのラムダ項の割り当て

    Lambda の var-out には Lambda ごとに新しい変数名を与える。
    """

    graph: PortGraph
    names: Dict[int, str] = field(default_factory=dict)
    terms: Dict[Endpoint, Term] = field(default_factory=dict)
    _active: Set[Endpoint] = field(default_factory=set)

    def __post_init__(self) -> None:
        pool = fresh_names(frozenset(self.graph.free_inputs()))
        for lam in self.graph.ids_of(NodeType.LAMBDA):
            self.names[lam] = next(pool)

    def _source_of(self, port: PortRef) -> Endpoint:
        arrow = self.graph.arrow_at(port)
        if arrow is None:
            raise NotLambdaSector(f"port {port} is not connected")
        return arrow.source

    def term_at(self, source: Endpoint) -> Term:
        """source から出る矢印のデコレーション"""
        if source in self.terms:
            return self.terms[source]
        if source in self._active:
            raise DecorationCycle(f"decoration does not stabilize around {source}")
        self._active.add(source)
        try:
            term = self._decorate(source)
        finally:
            self._active.discard(source)
        self.terms[source] = term
        return term

    def _decorate(self, source: Endpoint) -> Term:
        if isinstance(source, FreeEnd):
            return Var(source.label)
        node = self.graph.nodes[source.node]
        if node.type is NodeType.LAMBDA:
            if source.role == "var-out":
                return Var(self.names[source.node])
            body = self.term_at(self._source_of(PortRef(source.node, "body-in")))
            return Abs(self.names[source.node], body)
        if node.type is NodeType.APPLICATION:
            fun = self.term_at(self._source_of(PortRef(source.node, "fun-in")))
            arg = self.term_at(self._source_of(PortRef(source.node, "arg-in")))
            return App(fun, arg)
        if node.type is NodeType.FANOUT:
            return self.term_at(self._source_of(PortRef(source.node, "in")))
        raise NotLambdaSector(f"{node} does not produce a term")


def graph_to_term(g: PortGraph) -> Term:
    """
    デコレーション伝播でグラフから項を読み出す

    Raises:
        NotLambdaSector: FanIn / Dilation / Core / Stub を含む、または変数が束縛の外に出る
        NoUniqueRoot: 出力側の自由端が1つではない
        DecorationCycle: 伝播が安定しない（節点のないループを含む場合も）
    """
    for node_id in sorted(g.nodes):
        if g.nodes[node_id].type in FORBIDDEN_IN_SECTOR:
            raise NotLambdaSector(f"node {node_id} is a {g.nodes[node_id].name}")
    if g.loops:
        raise DecorationCycle(f"graph has {g.loops} node-free loops")
    outputs = [a for a in g.sorted_arrows() if isinstance(a.target, FreeEnd)]
    if len(outputs) != 1:
        raise NoUniqueRoot(f"expected one output free end, found {len(outputs)}")

    decoration = Decoration(g)
    term = decoration.term_at(outputs[0].source)
    escaped = free_variables(term) & set(decoration.names.values())
    if escaped:
        raise NotLambdaSector(f"variables escape their binders: {sorted(escaped)}")
    return term


# --- 項レベルの正規順序簡約（独立した検証用） ---


def _shift(db: DeBruijn, amount: int, cutoff: int = 0) -> DeBruijn:
    if isinstance(db, int):
        return db + amount if db >= cutoff else db
    if db[0] == "free":
        return db
    if db[0] == "lam":
        return ("lam", _shift(db[1], amount, cutoff + 1))
    return ("app", _shift(db[1], amount, cutoff), _shift(db[2], amount, cutoff))


def _substitute(db: DeBruijn, index: int, value: DeBruijn) -> DeBruijn:
    if isinstance(db, int):
        return value if db == index else db
    if db[0] == "free":
        return db
    if db[0] == "lam":
        return ("lam", _substitute(db[1], index + 1, _shift(value, 1)))
    return ("app", _substitute(db[1], index, value), _substitute(db[2], index, value))


def _beta(body: DeBruijn, arg: DeBruijn) -> DeBruijn:
    return _shift(_substitute(body, 0, _shift(arg, 1)), -1)


def _step(db: DeBruijn) -> Optional[DeBruijn]:
    """最左最外の redex を1つ簡約（正規形なら None）"""
    if isinstance(db, int) or db[0] == "free":
        return None
    if db[0] == "lam":
        inner = _step(db[1])
        return None if inner is None else ("lam", inner)
    fun, arg = db[1], db[2]
    if not isinstance(fun, int) and fun[0] == "lam":
        return _beta(fun[1], arg)
    reduced = _step(fun)
    if reduced is not None:
        return ("app", reduced, arg)
    reduced = _step(arg)
    return None if reduced is None else ("app", fun, reduced)


def _db_size(db: DeBruijn) -> int:
    if isinstance(db, int) or db[0] == "free":
        return 1
    return 1 + sum(_db_size(part) for part in db[1:])


def normal_order(t: Term, max_steps: int = 500, max_size: int = 20000) -> Optional[Term]:
    """
    正規順序で正規形まで簡約する

    max_steps 回以内に正規形に達しない（または項が max_size を超える）ときは None。
    """
    db = to_de_bruijn(t)
    for _ in range(max_steps + 1):
        reduced = _step(db)
        if reduced is None:
            return from_de_bruijn(db)
        db = reduced
        if _db_size(db) > max_size:
            return None
    return None


def has_redex(t: Term) -> bool:
    """β-redex を含むか"""
    return _step(to_de_bruijn(t)) is not None


# --- Church 数 ---


def church_numeral(n: int) -> Term:
    """λf.λx.f (f ... (f x))"""
    if n < 0:
        raise ValueError(f"Church numerals are non-negative: {n}")
    body: Term = Var("x")
    for _ in range(n):
        body = App(Var("f"), body)
    return Abs("f", Abs("x", body))


def successor_term() -> Term:
    """λn.λf.λx.f (n f x)"""
    return parse_term(r"\n.\f.\x.f (n f x)")


def church_value(t: Term) -> Optional[int]:
    """Church 数として読めるならその値"""
    db = to_de_bruijn(t)
    if isinstance(db, int) or db[0] != "lam" or isinstance(db[1], int) or db[1][0] != "lam":
        return None
    body = db[1][1]
    n = 0
    while not isinstance(body, int):
        if body[0] != "app" or body[1] != 1:
            return None
        body = body[2]
        n += 1
    return n if body == 0 else None


# --- 項の列挙 ---


def closed_terms(size: int) -> Iterator[Term]:
    """
    ちょうど size 個の構成子を持つ閉じた項を de Bruijn 順に列挙する

    束縛子は深さ順の名前（a, b, ...）になる。
    """

    def shapes(n: int, depth: int) -> Iterator[DeBruijn]:
        if n == 1:
            yield from range(depth)
            return
        for body in shapes(n - 1, depth + 1):
            yield ("lam", body)
        for left in range(1, n - 1):
            for fun in shapes(left, depth):
                for arg in shapes(n - 1 - left, depth):
                    yield ("app", fun, arg)

    for db in shapes(size, 0):
        yield from_de_bruijn(db)


def expected_node_count(t: Term) -> int:
    """term_to_graph が作るノード数（閉じた項）"""
    total = 0

    def walk(term: Term) -> None:
        nonlocal total
        if isinstance(term, Abs):
            uses = variable_uses(term.body, term.binder)
            total += 1 + (uses - 1 if uses >= 2 else 1 if uses == 0 else 0)
            walk(term.body)
        elif isinstance(term, App):
            total += 1
            walk(term.fun)
            walk(term.arg)

    walk(t)
    return total


__all__ = [
    "ROOT_LABEL",
    "Decoration",
    "parse_term",
    "term_to_graph",
    "graph_to_term",
    "normal_order",
    "has_redex",
    "church_numeral",
    "church_value",
    "successor_term",
    "closed_terms",
    "expected_node_count",
    "term_size",
]
