"""
GLC Actors - 結び目セクター

PD コードの図式に対する Kauffman ブラケット（スケイン展開と状態和）、Reidemeister 変形、
交点関係式の抽出、ラック公理の検査、交点の GLC 符号化。
"""

from __future__ import annotations
from collections import deque
from itertools import permutations, product
from typing import Dict, List, Optional, Sequence, Tuple, Union
import logging

from networkx.utils import UnionFind

from .config import settings
from .exceptions import (
    HasFreeEnds,
    KnotError,
    NoSuchSite,
    OrientationError,
    TooManyCrossings,
    UnlabeledArc,
)
from .models.enums import ReidemeisterMove
from .models.graph import APPLICATION, FANOUT, Endpoint, FreeEnd, PortGraph, PortRef
from .models.knot import (
    Crossing,
    KnotDiagram,
    PdParser,
    Product,
    RackReport,
    RackTable,
    ReidemeisterResult,
    Relation,
    substitute_expr,
)
from .models.polynomial import DELTA, LaurentPolynomial
from .models.term import fresh_names

logger = logging.getLogger(__name__)

A = LaurentPolynomial.monomial(1)
A_INVERSE = LaurentPolynomial.monomial(-1)

# 平滑化で結ぶスロットの組
A_SMOOTHING = ((0, 1), (2, 3))
B_SMOOTHING = ((0, 3), (1, 2))

REGULAR_MOVES = (ReidemeisterMove.R2, ReidemeisterMove.R2_PLUS, ReidemeisterMove.R3)

UNLABELED = ("", "?")


def parse_pd(text: str) -> KnotDiagram:
    """
    PD テキストをパース

    Raises:
        PdSyntaxError: 項目が読めない
        ArcCountError: 弧ラベルの出現回数が 2 でない
    """
    return PdParser.parse(text)


# --- ブラケット ---


def _loop_value(loops: int) -> LaurentPolynomial:
    return DELTA ** (loops - 1) if loops > 0 else LaurentPolynomial.constant(1)


def _smoothen(
    crossing: Crossing, rest: Sequence[Crossing], pairs: Tuple[Tuple[int, int], ...]
) -> Tuple[List[Crossing], int]:
    """交点を平滑化し、残りの交点と閉じた輪の数を返す"""
    labels = list(crossing.labels)
    remaining = list(rest)
    closed = 0
    for p, q in pairs:
        x, y = labels[p], labels[q]
        if x == y:
            closed += 1
            continue
        labels = [x if label == y else label for label in labels]
        remaining = [c.renamed(y, x) for c in remaining]
    return remaining, closed


def bracket(d: KnotDiagram) -> LaurentPolynomial:
    """
    スケイン展開によるブラケット多項式

    ⟨X⟩ = A⟨A 平滑化⟩ + A⁻¹⟨B 平滑化⟩、交点がなくなった状態は δ^(輪の数 - 1)。
    交点も輪もない空の図式は 1 とする。

    Raises:
        HasFreeEnds: タングル（自由端あり）
    """
    if d.ends:
        raise HasFreeEnds(f"bracket needs a closed diagram, found free ends {list(d.ends)}")
    if not d.crossings and not d.loops:
        logger.info("empty diagram, bracket taken as 1")

    total = LaurentPolynomial()
    stack = deque([(LaurentPolynomial.constant(1), list(d.crossings), d.loops)])
    while stack:
        coeff, crossings, loops = stack.pop()
        if not crossings:
            total = total + coeff * _loop_value(loops)
            continue
        crossing, rest = crossings[0], crossings[1:]
        remaining, closed = _smoothen(crossing, rest, A_SMOOTHING)
        stack.append((coeff * A, remaining, loops + closed))
        remaining, closed = _smoothen(crossing, rest, B_SMOOTHING)
        stack.append((coeff * A_INVERSE, remaining, loops + closed))
    logger.debug("bracket computed", extra={"crossings": d.size, "bracket": str(total)})
    return total


def state_sum(d: KnotDiagram) -> LaurentPolynomial:
    """
    全 2ⁿ 状態の和 Σ A^(#A - #B) δ^(輪の数 - 1)

    輪の数は状態ごとに弧ラベルの Union-Find で数える。

    Raises:
        HasFreeEnds: タングル
        TooManyCrossings: 交点数が settings.state_sum_max_crossings を超える
    """
    if d.ends:
        raise HasFreeEnds(f"state sum needs a closed diagram, found free ends {list(d.ends)}")
    limit = settings.state_sum_max_crossings
    if d.size > limit:
        raise TooManyCrossings(f"{d.size} crossings exceed the state-sum limit {limit}")

    labels = d.labels()
    total = LaurentPolynomial()
    for state in product((0, 1), repeat=d.size):
        arcs = UnionFind(labels)
        for crossing, smoothing in zip(d.crossings, state):
            for p, q in B_SMOOTHING if smoothing else A_SMOOTHING:
                arcs.union(crossing[p], crossing[q])
        loops = len({arcs[label] for label in labels}) + d.loops
        exponent = state.count(0) - state.count(1)
        total = total + LaurentPolynomial.monomial(exponent) * _loop_value(loops)
    logger.debug("state sum computed", extra={"crossings": d.size, "states": 2 ** d.size})
    return total


def mirror(d: KnotDiagram) -> KnotDiagram:
    """全交点の上下を入れ替えた図式（X[a,b,c,d] → X[b,c,d,a]）"""
    return KnotDiagram(tuple(c.rotated(1) for c in d.crossings), d.ends, d.loops)


def disjoint_union(d1: KnotDiagram, d2: KnotDiagram) -> KnotDiagram:
    """d2 の弧ラベルを d1 と重ならないよう付け替えて並べる"""
    labels = d2.labels()
    mapping = dict(zip(labels, d1.fresh_labels(len(labels))))
    crossings = tuple(Crossing(tuple(mapping[l] for l in c.labels)) for c in d2.crossings)
    ends = tuple(mapping[l] for l in d2.ends)
    return KnotDiagram(d1.crossings + crossings, d1.ends + ends, d1.loops + d2.loops)


# --- Reidemeister 変形 ---


class _Editor:
    """図式の書き換え作業用（交点はラベルのリスト）"""

    def __init__(self, d: KnotDiagram):
        self.source = d
        self.crossings: List[Optional[List[str]]] = [list(c.labels) for c in d.crossings]
        self.ends: List[str] = list(d.ends)
        self.loops = d.loops
        # 図式に残るラベルは常に代表元
        self.arcs = UnionFind()

    def rename(self, old: str, new: str) -> None:
        for labels in self.crossings:
            if labels is not None:
                labels[:] = [new if l == old else l for l in labels]
        self.ends = [new if l == old else l for l in self.ends]

    def replace_last(self, old: str, new: str) -> None:
        """最後の出現（交点順、次に自由端）を new に置き換える"""
        for k in range(len(self.ends) - 1, -1, -1):
            if self.ends[k] == old:
                self.ends[k] = new
                return
        for labels in reversed(self.crossings):
            if labels is None:
                continue
            for slot in range(3, -1, -1):
                if labels[slot] == old:
                    labels[slot] = new
                    return
        raise NoSuchSite(f"arc {old} does not occur in the diagram")

    def join(self, x: str, y: str) -> None:
        """
        弧 x と y をつなぐ（同じ弧なら輪が1つ閉じる）

        先のつなぎで付け替えられたラベルも現在の名前に解決してから比べる。
        """
        x, y = self.arcs[x], self.arcs[y]
        if x == y:
            self.loops += 1
            return
        self.arcs.union(x, y)
        root = self.arcs[x]
        self.rename(y if root == x else x, root)

    def build(self) -> KnotDiagram:
        crossings = tuple(Crossing(tuple(c)) for c in self.crossings if c is not None)
        return KnotDiagram(crossings, tuple(self.ends), self.loops)


def _crossing_at(d: KnotDiagram, index) -> Crossing:
    if not isinstance(index, int) or not 0 <= index < d.size:
        raise NoSuchSite(f"no crossing {index!r} in a diagram with {d.size} crossings")
    return d.crossings[index]


def _r1_add(d: KnotDiagram, site) -> KnotDiagram:
    try:
        arc, sign = site
    except (TypeError, ValueError):
        raise NoSuchSite(f"R1+ site must be (arc, ±1): {site!r}")
    if sign not in (1, -1):
        raise NoSuchSite(f"curl sign must be +1 or -1: {sign!r}")
    editor = _Editor(d)
    if arc is None:
        if not d.loops:
            raise NoSuchSite("no standalone loop to curl")
        l, m = d.fresh_labels(2)
        editor.loops -= 1
        editor.crossings.append([l, l, m, m] if sign > 0 else [m, l, l, m])
        return editor.build()
    if arc not in d.labels():
        raise NoSuchSite(f"arc {arc} does not occur in the diagram")
    l, fresh = d.fresh_labels(2)
    editor.replace_last(arc, fresh)
    editor.crossings.append([l, l, arc, fresh] if sign > 0 else [arc, l, l, fresh])
    return editor.build()


def _curl_slot(c: Crossing) -> Optional[int]:
    for k in range(4):
        if c[k] == c[(k + 1) % 4]:
            return k
    return None


def _r1_remove(d: KnotDiagram, site) -> KnotDiagram:
    crossing = _crossing_at(d, site)
    k = _curl_slot(crossing)
    if k is None:
        raise NoSuchSite(f"crossing {site} ({crossing}) is not a curl")
    editor = _Editor(d)
    editor.crossings[site] = None
    editor.join(crossing[(k + 2) % 4], crossing[(k + 3) % 4])
    return editor.build()


def _smoothing_of(p: int, q: int) -> str:
    pair = tuple(sorted((p, q)))
    return "A" if pair in ((0, 1), (2, 3)) else "B"


def _r2_pair(ci: Crossing, cj: Crossing) -> Optional[Tuple[str, str, str, str]]:
    """打ち消し合う交点対なら (下の外側弧 i, j, 上の外側弧 i, j)"""
    for pu_i in (0, 2):
        for pu_j in (0, 2):
            if ci[pu_i] != cj[pu_j]:
                continue
            for pv_i in (1, 3):
                for pv_j in (1, 3):
                    if ci[pv_i] != cj[pv_j]:
                        continue
                    if _smoothing_of(pu_i, pv_i) == _smoothing_of(pu_j, pv_j):
                        continue
                    return (ci[2 - pu_i], cj[2 - pu_j], ci[4 - pv_i], cj[4 - pv_j])
    return None


def _r2_remove(d: KnotDiagram, site) -> KnotDiagram:
    try:
        i, j = site
    except (TypeError, ValueError):
        raise NoSuchSite(f"R2 site must be a pair of crossings: {site!r}")
    if i == j:
        raise NoSuchSite("R2 needs two different crossings")
    found = _r2_pair(_crossing_at(d, i), _crossing_at(d, j))
    if found is None:
        raise NoSuchSite(f"crossings {i} and {j} do not cancel")
    under_i, under_j, over_i, over_j = found
    editor = _Editor(d)
    editor.crossings[i] = None
    editor.crossings[j] = None
    editor.join(under_i, under_j)
    editor.join(over_i, over_j)
    return editor.build()


def _r2_add(d: KnotDiagram, site) -> KnotDiagram:
    try:
        under, over = site
    except (TypeError, ValueError):
        raise NoSuchSite(f"R2+ site must be (under arc, over arc): {site!r}")
    labels = d.labels()
    if under == over or under not in labels or over not in labels:
        raise NoSuchSite(f"R2+ needs two different arcs of the diagram: {site!r}")
    u, v, under_out, over_out = d.fresh_labels(4)
    editor = _Editor(d)
    editor.replace_last(under, under_out)
    editor.replace_last(over, over_out)
    editor.crossings.append([under, over, u, v])
    editor.crossings.append([u, over_out, under_out, v])
    return editor.build()


R3_VARIABLES = ("b0", "m0", "b1", "m1", "t2", "b2", "t1", "m2", "t0")


def _r3_bind(p: Crossing, q: Crossing, r: Crossing) -> Optional[Dict[str, str]]:
    b0, m0, b1, m1 = p.labels
    if q[0] != b1 or r[0] != m1 or r[1] != q[3]:
        return None
    binding = dict(zip(R3_VARIABLES, (b0, m0, b1, m1, q[1], q[2], q[3], r[2], r[3])))
    if len(set(binding.values())) != len(R3_VARIABLES):
        return None
    return binding


def _r3_match(d: KnotDiagram, site) -> Tuple[Tuple[int, int, int], Dict[str, str], bool]:
    try:
        indices = tuple(site)
    except TypeError:
        raise NoSuchSite(f"R3 site must be three crossings: {site!r}")
    if len(indices) != 3 or len(set(indices)) != 3:
        raise NoSuchSite(f"R3 site must be three different crossings: {site!r}")
    crossings = {i: _crossing_at(d, i) for i in indices}
    for order in permutations(indices):
        for mirrored in (False, True):
            for turns in product((0, 2), repeat=3):
                views = []
                for index, turn in zip(order, turns):
                    view = crossings[index].rotated(turn)
                    views.append(view.reversed() if mirrored else view)
                binding = _r3_bind(*views)
                if binding is not None:
                    return order, binding, mirrored
    raise NoSuchSite(f"crossings {indices} do not form a triangle")


def _r3_move(d: KnotDiagram, site) -> KnotDiagram:
    (i, j, k), v, mirrored = _r3_match(d, site)
    b1, m1, t1 = d.fresh_labels(3)
    after = (
        (i, [b1, m1, v["b2"], v["m2"]]),
        (j, [v["b0"], t1, b1, v["t0"]]),
        (k, [v["m0"], v["t2"], m1, t1]),
    )
    editor = _Editor(d)
    for index, labels in after:
        crossing = Crossing(tuple(labels))
        editor.crossings[index] = list((crossing.reversed() if mirrored else crossing).labels)
    return editor.build()


_MOVES = {
    ReidemeisterMove.R1_PLUS: _r1_add,
    ReidemeisterMove.R1_MINUS: _r1_remove,
    ReidemeisterMove.R2: _r2_remove,
    ReidemeisterMove.R2_PLUS: _r2_add,
    ReidemeisterMove.R3: _r3_move,
}


def apply_reidemeister(
    d: KnotDiagram, move: Union[ReidemeisterMove, str], site
) -> ReidemeisterResult:
    """
    Reidemeister 変形を適用する

    Args:
        d: 図式
        move: R1+（site = (弧, ±1)、弧 None は単独の輪）/ R1-（site = 交点番号）/
              R2（site = (i, j)）/ R2+（site = (下の弧, 上の弧)）/ R3（site = (i, j, k)）
        site: 適用箇所

    Returns:
        新しい図式と、正則イソトピーを保つか（R2・R3 は True、R1 は False）

    Raises:
        NoSuchSite: 適用箇所が変形のパターンに合わない
    """
    move = move if isinstance(move, ReidemeisterMove) else ReidemeisterMove(move)
    result = _MOVES[move](d, site)
    logger.debug(
        "reidemeister move applied",
        extra={"move": move.value, "site": repr(site), "crossings": result.size},
    )
    return ReidemeisterResult(result, move in REGULAR_MOVES)


def reidemeister_sites(d: KnotDiagram, move: Union[ReidemeisterMove, str]) -> List:
    """変形を適用できる箇所の一覧（決定的な順序）"""
    move = move if isinstance(move, ReidemeisterMove) else ReidemeisterMove(move)
    labels = d.labels()
    if move is ReidemeisterMove.R1_PLUS:
        sites = [(arc, sign) for arc in labels for sign in (1, -1)]
        return sites + ([(None, 1), (None, -1)] if d.loops else [])
    if move is ReidemeisterMove.R1_MINUS:
        return [i for i, c in enumerate(d.crossings) if _curl_slot(c) is not None]
    if move is ReidemeisterMove.R2_PLUS:
        return [(e, f) for e in labels for f in labels if e != f]
    if move is ReidemeisterMove.R2:
        return [
            (i, j)
            for i in range(d.size)
            for j in range(i + 1, d.size)
            if _r2_pair(d.crossings[i], d.crossings[j]) is not None
        ]
    sites = []
    for i in range(d.size):
        for j in range(i + 1, d.size):
            for k in range(j + 1, d.size):
                try:
                    _r3_match(d, (i, j, k))
                except NoSuchSite:
                    continue
                sites.append((i, j, k))
    return sites


# --- 関係式 ---


def over_arcs(d: KnotDiagram) -> Dict[str, str]:
    """弧ラベル → 上の弧（b〜d でつながる弧の和）の名前（初出順に a, b, c, ...）"""
    labels = d.labels()
    arcs = UnionFind(labels)
    for crossing in d.crossings:
        arcs.union(crossing[1], crossing[3])
    pool = fresh_names()
    names: Dict[object, str] = {}
    result: Dict[str, str] = {}
    for label in labels:
        root = arcs[label]
        if root not in names:
            names[root] = next(pool)
        result[label] = names[root]
    return result


def extract_relations(d: KnotDiagram) -> List[Relation]:
    """
    交点ごとの関係式 出る下の弧 = 入る下の弧 · 上の弧

    Raises:
        UnlabeledArc: ラベルのない弧がある
    """
    for crossing in d.crossings:
        if any(label in UNLABELED for label in crossing.labels):
            raise UnlabeledArc(f"crossing {crossing} has an unlabeled arc")
    names = over_arcs(d)
    return [
        Relation(names[c[2]], Product(names[c[0]], names[c[1]])) for c in d.crossings
    ]


def substitute(relations: Sequence[Relation], name: str) -> List[Relation]:
    """name を定義する関係式を他の関係式の右辺に代入する"""
    rule = next((r for r in relations if r.lhs == name), None)
    if rule is None:
        raise KnotError(f"no relation defines {name}")
    return [
        Relation(r.lhs, substitute_expr(r.rhs, name, rule.rhs)) for r in relations if r is not rule
    ]


# --- ラック ---


def check_rack(t: RackTable) -> RackReport:
    """
    全列挙で (ab)c = (ac)(bc) と (ab)b = a を検査する

    右からの積 x ↦ x·b がすべて全単射であることも調べ、自己分配的かつ右可逆ならラックとする。
    """
    op = t.op
    counterexamples: List[Tuple[str, Tuple]] = []
    self_distributive = True
    for a, b, c in product(t.elements, repeat=3):
        if op(op(a, b), c) != op(op(a, c), op(b, c)):
            self_distributive = False
            counterexamples.append(("self-distributive", (a, b, c)))
    involutory = True
    for a, b in product(t.elements, repeat=2):
        if op(op(a, b), b) != a:
            involutory = False
            counterexamples.append(("involutory", (a, b)))
    right_invertible = True
    for b in t.elements:
        if len({op(a, b) for a in t.elements}) != len(t.elements):
            right_invertible = False
            counterexamples.append(("right-invertible", (b,)))
    return RackReport(self_distributive, involutory, right_invertible, counterexamples)


# --- GLC 符号化 ---

CROSSING_ENDS = ("over_in", "over_out", "under_in", "under_out")


def _crossing_gadget(g: PortGraph, sign: int) -> Dict[str, PortRef]:
    """FanOut で上の弧を分岐し、Application で下の弧に作用させる"""
    fanout = g.add_node(FANOUT)
    app = g.add_node(APPLICATION)
    operand, operator = ("fun-in", "arg-in") if sign > 0 else ("arg-in", "fun-in")
    g.connect(PortRef(fanout, "out2"), PortRef(app, operator))
    return {
        "over_in": PortRef(fanout, "in"),
        "over_out": PortRef(fanout, "out1"),
        "under_in": PortRef(app, operand),
        "under_out": PortRef(app, "out"),
    }


def crossing_to_glc(sign: int = 1, virtual: bool = False) -> PortGraph:
    """
    1つの交点を 4 つの自由端を持つ GLC 断片に符号化する

    正の交点は under · over、負の交点は over · under。仮想交点はノードのない 2 本の矢印。
    """
    if sign not in (1, -1):
        raise ValueError(f"crossing sign must be +1 or -1: {sign!r}")
    g = PortGraph()
    if virtual:
        g.connect(FreeEnd("over_in"), FreeEnd("over_out"))
        g.connect(FreeEnd("under_in"), FreeEnd("under_out"))
        return g
    ports = _crossing_gadget(g, sign)
    g.connect(FreeEnd("over_in"), ports["over_in"])
    g.connect(ports["over_out"], FreeEnd("over_out"))
    g.connect(FreeEnd("under_in"), ports["under_in"])
    g.connect(ports["under_out"], FreeEnd("under_out"))
    return g


def orient(d: KnotDiagram) -> Dict[Tuple[int, int], bool]:
    """
    各スロットで弧が交点に入るか（True）出るか（False）

    下の弧は a で入り c で出る。上の弧の向きは伝播で決め、決まらない成分は
    最初の未定スロット b を入りとする。

    Raises:
        OrientationError: 弧の両端がともに入り（または出）になる
    """
    occurrences: Dict[str, List[Tuple[int, int]]] = {}
    for i, crossing in enumerate(d.crossings):
        for slot in range(4):
            occurrences.setdefault(crossing[slot], []).append((i, slot))
    heads: Dict[Tuple[int, int], bool] = {}
    queue: deque = deque()

    def assign(position: Tuple[int, int], head: bool) -> None:
        known = heads.get(position)
        if known is None:
            heads[position] = head
            queue.append(position)
        elif known != head:
            i, slot = position
            raise OrientationError(
                f"arc {d.crossings[i][slot]} cannot be oriented consistently at crossing {i}"
            )

    for i in range(d.size):
        assign((i, 0), True)
        assign((i, 2), False)
    while True:
        while queue:
            i, slot = queue.popleft()
            head = heads[(i, slot)]
            for other in occurrences[d.crossings[i][slot]]:
                if other != (i, slot):
                    assign(other, not head)
            if slot in (1, 3):
                assign((i, 4 - slot), not head)
        pending = [i for i in range(d.size) if (i, 1) not in heads]
        if not pending:
            return heads
        assign((pending[0], 1), True)


def diagram_to_glc(d: KnotDiagram) -> PortGraph:
    """
    図式の各交点を GLC 断片に置き換えて弧でつなぐ

    交点の符号は上の弧が d から入れば正。タングルの自由端は同名の自由端になる。
    """
    heads = orient(d)
    g = PortGraph()
    ports: Dict[Tuple[int, int], PortRef] = {}
    for i in range(d.size):
        sign = 1 if heads[(i, 3)] else -1
        gadget = _crossing_gadget(g, sign)
        over_in, over_out = (3, 1) if sign > 0 else (1, 3)
        ports[(i, 0)] = gadget["under_in"]
        ports[(i, 2)] = gadget["under_out"]
        ports[(i, over_in)] = gadget["over_in"]
        ports[(i, over_out)] = gadget["over_out"]

    for label in d.labels():
        positions = d.occurrences(label)
        if not positions:
            g.connect(FreeEnd(label), FreeEnd(f"{label}'"))
            continue
        tails = [p for p in positions if not heads[p]]
        targets = [p for p in positions if heads[p]]
        source: Endpoint = ports[tails[0]] if tails else FreeEnd(label)
        target: Endpoint = ports[targets[0]] if targets else FreeEnd(label)
        g.connect(source, target)
    g.loops += d.loops
    logger.debug("diagram encoded", extra={"crossings": d.size, "nodes": g.size})
    return g


__all__ = [
    "parse_pd",
    "bracket",
    "state_sum",
    "mirror",
    "disjoint_union",
    "apply_reidemeister",
    "reidemeister_sites",
    "over_arcs",
    "extract_relations",
    "substitute",
    "check_rack",
    "crossing_to_glc",
    "orient",
    "diagram_to_glc",
]
