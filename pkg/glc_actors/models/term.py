"""
GLC Actors - ラムダ項

型なしラムダ項（変数・抽象・適用）、最小括弧での表示、de Bruijn 変換による α 同値判定、
および項テキストのパーサー。
"""

from __future__ import annotations
from dataclasses import dataclass
from itertools import count
from typing import Dict, FrozenSet, Iterator, List, Optional, Tuple, Union
import re

from ..exceptions import TermSyntaxError


@dataclass(frozen=True)
class Var:
    """変数"""

    name: str

    def __str__(self) -> str:
        return format_term(self)


@dataclass(frozen=True)
class Abs:
    """抽象 λbinder.body"""

    binder: str
    body: "Term"

    def __str__(self) -> str:
        return format_term(self)


@dataclass(frozen=True)
class App:
    """適用 (fun arg)"""

    fun: "Term"
    arg: "Term"

    def __str__(self) -> str:
        return format_term(self)


Term = Union[Var, Abs, App]

# de Bruijn 表現: 束縛変数は int、自由変数は ("free", name)
DeBruijn = Union[int, Tuple]


def format_term(t: Term, tail: bool = True) -> str:
    """最小限の括弧で表示（λ は `\\`）。tail は右端の位置かどうか"""
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Abs):
        text = f"\\{t.binder}.{format_term(t.body, True)}"
        return text if tail else f"({text})"
    fun = format_term(t.fun, False)
    if isinstance(t.arg, App):
        arg = f"({format_term(t.arg, True)})"
    else:
        arg = format_term(t.arg, tail)
    return f"{fun} {arg}"


def term_size(t: Term) -> int:
    """変数・抽象・適用の総数"""
    if isinstance(t, Var):
        return 1
    if isinstance(t, Abs):
        return 1 + term_size(t.body)
    return 1 + term_size(t.fun) + term_size(t.arg)


def free_variables(t: Term) -> FrozenSet[str]:
    if isinstance(t, Var):
        return frozenset([t.name])
    if isinstance(t, Abs):
        return free_variables(t.body) - {t.binder}
    return free_variables(t.fun) | free_variables(t.arg)


def count_nodes(t: Term) -> Tuple[int, int]:
    """(抽象の数, 適用の数)"""
    if isinstance(t, Var):
        return 0, 0
    if isinstance(t, Abs):
        abstractions, applications = count_nodes(t.body)
        return abstractions + 1, applications
    f_abs, f_app = count_nodes(t.fun)
    a_abs, a_app = count_nodes(t.arg)
    return f_abs + a_abs, f_app + a_app + 1


def variable_uses(t: Term, name: str) -> int:
    """自由な出現 name の数"""
    if isinstance(t, Var):
        return 1 if t.name == name else 0
    if isinstance(t, Abs):
        return 0 if t.binder == name else variable_uses(t.body, name)
    return variable_uses(t.fun, name) + variable_uses(t.arg, name)


def to_de_bruijn(t: Term, env: Tuple[str, ...] = ()) -> DeBruijn:
    """名前付き項 → de Bruijn 表現"""
    if isinstance(t, Var):
        for index, name in enumerate(reversed(env)):
            if name == t.name:
                return index
        return ("free", t.name)
    if isinstance(t, Abs):
        return ("lam", to_de_bruijn(t.body, env + (t.binder,)))
    return ("app", to_de_bruijn(t.fun, env), to_de_bruijn(t.arg, env))


def fresh_names(avoid: FrozenSet[str] = frozenset()) -> Iterator[str]:
    """a, b, ..., z, a1, b1, ... の順に avoid 以外の名前を生成"""
    letters = "abcdefghijklmnopqrstuvwxyz"
    for round_no in count():
        suffix = "" if round_no == 0 else str(round_no)
        for letter in letters:
            name = letter + suffix
            if name not in avoid:
                yield name


def _db_free(db: DeBruijn) -> FrozenSet[str]:
    if isinstance(db, int):
        return frozenset()
    if db[0] == "free":
        return frozenset([db[1]])
    if db[0] == "lam":
        return _db_free(db[1])
    return _db_free(db[1]) | _db_free(db[2])


def from_de_bruijn(db: DeBruijn) -> Term:
    """de Bruijn 表現 → 名前付き項（束縛子は深さ順に a, b, ...）"""
    pool = fresh_names(_db_free(db))
    depth_names: List[str] = []

    def name_at(depth: int) -> str:
        while len(depth_names) <= depth:
            depth_names.append(next(pool))
        return depth_names[depth]

    def build(node: DeBruijn, env: List[str]) -> Term:
        if isinstance(node, int):
            return Var(env[len(env) - 1 - node])
        if node[0] == "free":
            return Var(node[1])
        if node[0] == "lam":
            binder = name_at(len(env))
            return Abs(binder, build(node[1], env + [binder]))
        return App(build(node[1], env), build(node[2], env))

    return build(db, [])


def alpha_equivalent(a: Term, b: Term) -> bool:
    """束縛変数の名前を除いて等しいか"""
    return to_de_bruijn(a) == to_de_bruijn(b)


class TermParser:
    """ラムダ項テキストをパースするクラス（適用は左結合、抽象は右端まで）"""

    TOKEN_PATTERNS = {
        "space": r"\s+",
        "lambda": r"\\|λ",
        "dot": r"\.",
        "lparen": r"\(",
        "rparen": r"\)",
        "ident": r"[A-Za-z_][A-Za-z0-9_']*",
    }

    # 自由な出現のときだけ展開する組み込み項
    BUILTINS: Dict[str, str] = {
        "S": r"\x.\y.\z.x z (y z)",
        "K": r"\x.\y.x",
        "I": r"\x.x",
        "Y": r"\f.(\x.f (x x)) (\x.f (x x))",
    }

    @classmethod
    def tokenize(cls, text: str) -> List[Tuple[str, str, int]]:
        tokens = []
        position = 0
        while position < len(text):
            for kind, pattern in cls.TOKEN_PATTERNS.items():
                match = re.compile(pattern).match(text, position)
                if match:
                    if kind != "space":
                        tokens.append((kind, match.group(0), position))
                    position = match.end()
                    break
            else:
                raise TermSyntaxError(f"unexpected character {text[position]!r}", position)
        tokens.append(("end", "", len(text)))
        return tokens

    @classmethod
    def parse(cls, text: str) -> Term:
        """テキストをパースして Term を返す（組み込み項は展開済み）"""
        tokens = cls.tokenize(text)
        state = {"i": 0}

        def peek() -> Tuple[str, str, int]:
            return tokens[state["i"]]

        def take(kind: str) -> Tuple[str, str, int]:
            token = peek()
            if token[0] != kind:
                found = "end of input" if token[0] == "end" else repr(token[1])
                raise TermSyntaxError(f"expected {kind}, found {found}", token[2])
            state["i"] += 1
            return token

        def parse_abstraction(bound: FrozenSet[str]) -> Term:
            take("lambda")
            binders = [take("ident")[1]]
            while peek()[0] == "ident":
                binders.append(take("ident")[1])
            take("dot")
            body = parse_application(bound | set(binders))
            for binder in reversed(binders):
                body = Abs(binder, body)
            return body

        def parse_atom(bound: FrozenSet[str]) -> Optional[Term]:
            kind, value, _ = peek()
            if kind == "ident":
                state["i"] += 1
                if value in cls.BUILTINS and value not in bound:
                    return cls.parse(cls.BUILTINS[value])
                return Var(value)
            if kind == "lparen":
                take("lparen")
                inner = parse_application(bound)
                take("rparen")
                return inner
            if kind == "lambda":
                return parse_abstraction(bound)
            return None

        def parse_application(bound: FrozenSet[str]) -> Term:
            first = parse_atom(bound)
            if first is None:
                token = peek()
                found = "end of input" if token[0] == "end" else repr(token[1])
                raise TermSyntaxError(f"expected a term, found {found}", token[2])
            result = first
            while True:
                nxt = parse_atom(bound)
                if nxt is None:
                    return result
                result = App(result, nxt)

        term = parse_application(frozenset())
        take("end")
        return term
