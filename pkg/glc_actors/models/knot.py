"""
GLC Actors - 結び目図式モデル

PD コード（X[a,b,c,d] は入ってくる下の弧から反時計回り）による非向き付きリンク・タングル図式、
交点関係式、ラック演算表のデータモデルと PD テキストのパーサー。
"""

from __future__ import annotations
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Sequence, Tuple, Union
import re

from ..exceptions import ArcCountError, PdSyntaxError

UNDER_SLOTS = (0, 2)
OVER_SLOTS = (1, 3)


@dataclass(frozen=True)
class Crossing:
    """交点 X[a,b,c,d]（a: 入る下の弧、b,d: 上の弧、c: 出る下の弧）"""

    labels: Tuple[str, str, str, str]

    def __post_init__(self) -> None:
        if len(self.labels) != 4:
            raise PdSyntaxError(f"a crossing has 4 arcs: {self.labels!r}")

    def __getitem__(self, slot: int) -> str:
        return self.labels[slot]

    def rotated(self, steps: int) -> "Crossing":
        """入口を steps 個ずらした同じ交点（2 回転は同じ交点を逆向きから読んだもの）"""
        k = steps % 4
        return Crossing(self.labels[k:] + self.labels[:k])

    def reversed(self) -> "Crossing":
        """[a,d,c,b]: 鏡像側の読み方"""
        a, b, c, d = self.labels
        return Crossing((a, d, c, b))

    def renamed(self, old: str, new: str) -> "Crossing":
        return Crossing(tuple(new if label == old else label for label in self.labels))

    def __str__(self) -> str:
        return "X[" + ",".join(self.labels) + "]"


@dataclass(frozen=True)
class KnotDiagram:
    """
    結び目・リンク・タングルの図式

    Args:
        crossings: 交点の列
        ends: タングルの自由端の弧ラベル（リンクでは空）
        loops: 交点を持たない単独の輪の数
    """

    crossings: Tuple[Crossing, ...] = ()
    ends: Tuple[str, ...] = ()
    loops: int = 0

    def __post_init__(self) -> None:
        if self.loops < 0:
            raise ArcCountError(f"negative loop count: {self.loops}")
        counts = self.label_counts()
        wrong = sorted(label for label, n in counts.items() if n != 2)
        if wrong:
            detail = ", ".join(f"{label}×{counts[label]}" for label in wrong)
            raise ArcCountError(f"each arc label must occur exactly twice: {detail}")

    def label_counts(self) -> Counter:
        counts: Counter = Counter()
        for crossing in self.crossings:
            counts.update(crossing.labels)
        counts.update(self.ends)
        return counts

    def labels(self) -> List[str]:
        """初出順の弧ラベル"""
        seen: Dict[str, None] = {}
        for crossing in self.crossings:
            for label in crossing.labels:
                seen.setdefault(label, None)
        for label in self.ends:
            seen.setdefault(label, None)
        return list(seen)

    def occurrences(self, label: str) -> List[Tuple[int, int]]:
        """(交点番号, スロット) の列"""
        return [
            (i, slot)
            for i, crossing in enumerate(self.crossings)
            for slot in range(4)
            if crossing[slot] == label
        ]

    def fresh_labels(self, k: int) -> List[str]:
        """最大の数値ラベルより後ろの未使用の整数ラベル"""
        used = set(self.labels())
        numeric = [int(label) for label in used if label.isdigit()]
        candidate = max(numeric, default=0) + 1
        fresh: List[str] = []
        while len(fresh) < k:
            if str(candidate) not in used:
                fresh.append(str(candidate))
            candidate += 1
        return fresh

    @property
    def size(self) -> int:
        return len(self.crossings)

    @property
    def is_closed(self) -> bool:
        return not self.ends

    def __str__(self) -> str:
        items = [str(c) for c in self.crossings] + ["O"] * self.loops
        if self.ends:
            items.append("ends[" + ",".join(self.ends) + "]")
        return " ".join(items)


class PdParser:
    """PD テキスト（X[...] / O / ends[...] を空白区切り）をパースするクラス"""

    PD_PATTERNS = {
        "crossing": r"^X\[([^\]]*)\]$",
        "loop": r"^O$",
        "ends": r"^ends\[([^\]]*)\]$",
    }

    @classmethod
    def _labels(cls, body: str, token: str) -> List[str]:
        labels = [part.strip() for part in body.split(",")] if body.strip() else []
        if any(not label for label in labels):
            raise PdSyntaxError(f"empty arc label in {token!r}")
        return labels

    @classmethod
    def parse(cls, text: str) -> KnotDiagram:
        """PD テキストをパースして KnotDiagram を返す"""
        crossings: List[Crossing] = []
        ends: List[str] = []
        loops = 0
        for token in re.findall(r"\S+\[[^\]]*\]|\S+", text):
            crossing_match = re.match(cls.PD_PATTERNS["crossing"], token)
            if crossing_match:
                labels = cls._labels(crossing_match.group(1), token)
                if len(labels) != 4:
                    raise PdSyntaxError(f"{token!r} does not list 4 arcs")
                crossings.append(Crossing(tuple(labels)))
                continue
            if re.match(cls.PD_PATTERNS["loop"], token):
                loops += 1
                continue
            ends_match = re.match(cls.PD_PATTERNS["ends"], token)
            if ends_match:
                ends.extend(cls._labels(ends_match.group(1), token))
                continue
            raise PdSyntaxError(f"unexpected PD item {token!r}")
        return KnotDiagram(tuple(crossings), tuple(ends), loops)


# --- 関係式 ---


@dataclass(frozen=True)
class Product:
    """自由な非結合的代数の積 (left right)"""

    left: "Expr"
    right: "Expr"


Expr = Union[str, Product]


def format_expr(expr: Expr, top: bool = True) -> str:
    if isinstance(expr, str):
        return expr
    text = f"{format_expr(expr.left, False)} {format_expr(expr.right, False)}"
    return text if top else f"({text})"


def substitute_expr(expr: Expr, name: str, value: Expr) -> Expr:
    if isinstance(expr, str):
        return value if expr == name else expr
    return Product(substitute_expr(expr.left, name, value), substitute_expr(expr.right, name, value))


@dataclass(frozen=True)
class Relation:
    """交点の関係式 lhs = rhs（出る下の弧 = 入る下の弧 · 上の弧）"""

    lhs: str
    rhs: Expr

    def __str__(self) -> str:
        return f"{self.lhs} = {format_expr(self.rhs)}"


# --- ラック ---


@dataclass
class RackTable:
    """
    有限集合上の二項演算表

    Args:
        elements: 台集合
        table: (x, y) → x·y
    """

    elements: Tuple[Any, ...]
    table: Dict[Tuple[Any, Any], Any]

    def __post_init__(self) -> None:
        self.elements = tuple(self.elements)
        members = set(self.elements)
        for x in self.elements:
            for y in self.elements:
                if (x, y) not in self.table:
                    raise ValueError(f"operation table is not total: missing {x!r}·{y!r}")
                if self.table[(x, y)] not in members:
                    raise ValueError(f"{x!r}·{y!r} leaves the set")

    @classmethod
    def from_operation(cls, elements: Iterable[Any], operation: Callable[[Any, Any], Any]) -> "RackTable":
        items = tuple(elements)
        return cls(items, {(x, y): operation(x, y) for x in items for y in items})

    def op(self, x: Any, y: Any) -> Any:
        return self.table[(x, y)]


@dataclass
class RackReport:
    """check_rack の結果"""

    self_distributive: bool
    involutory: bool
    right_invertible: bool
    counterexamples: List[Tuple[str, Tuple[Any, ...]]] = field(default_factory=list)

    @property
    def is_rack(self) -> bool:
        return self.self_distributive and self.right_invertible

    @property
    def is_kei(self) -> bool:
        return self.is_rack and self.involutory

    def to_dict(self) -> Dict[str, Any]:
        return {
            "self_distributive": self.self_distributive,
            "involutory": self.involutory,
            "right_invertible": self.right_invertible,
            "is_rack": self.is_rack,
            "is_kei": self.is_kei,
            "counterexamples": [list(values) for _, values in self.counterexamples],
        }


@dataclass(frozen=True)
class ReidemeisterResult:
    """Reidemeister 変形の結果と、正則イソトピーを保つかどうか"""

    diagram: KnotDiagram
    regular: bool


def crossing_signature(crossings: Sequence[Crossing]) -> Tuple[str, ...]:
    return tuple(str(c) for c in crossings)
