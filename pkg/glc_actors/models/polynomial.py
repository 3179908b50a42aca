"""
GLC Actors - Laurent 多項式

変数 A の整数係数 Laurent 多項式（疎表現: 指数 → 係数）。
ブラケット多項式の値として使い、表示形式は降べきの "A^7 - A^3 - A^-5"。
"""

from __future__ import annotations
from typing import Dict, Iterator, Mapping, Tuple, Union
import re

import sympy as sp

from ..exceptions import PdSyntaxError

A_SYMBOL = sp.Symbol("A")


class LaurentPolynomial:
    """
    整数係数 Laurent 多項式

    係数 0 の項は保持しない。演算はすべて新しいオブジェクトを返す。
    """

    __slots__ = ("_terms",)

    TERM_PATTERN = r"^(\d*)(A(?:\^(-?\d+))?)?$"
    SIGNED_TERM_PATTERN = r"([+-]?)(\d+A(?:\^-?\d+)?|A(?:\^-?\d+)?|\d+)"

    def __init__(self, terms: Mapping[int, int] = None):
        self._terms: Dict[int, int] = {
            int(e): int(c) for e, c in (terms or {}).items() if c != 0
        }

    @classmethod
    def constant(cls, value: int) -> "LaurentPolynomial":
        return cls({0: value})

    @classmethod
    def monomial(cls, exponent: int, coefficient: int = 1) -> "LaurentPolynomial":
        return cls({exponent: coefficient})

    # 参照

    @property
    def terms(self) -> Dict[int, int]:
        return dict(self._terms)

    def coefficient(self, exponent: int) -> int:
        return self._terms.get(exponent, 0)

    def is_zero(self) -> bool:
        return not self._terms

    def degree_span(self) -> Tuple[int, int]:
        """(最小指数, 最大指数)"""
        if not self._terms:
            return (0, 0)
        return (min(self._terms), max(self._terms))

    def __iter__(self) -> Iterator[Tuple[int, int]]:
        return iter(sorted(self._terms.items(), reverse=True))

    # 演算

    def _coerce(self, other: Union["LaurentPolynomial", int]) -> "LaurentPolynomial":
        if isinstance(other, LaurentPolynomial):
            return other
        if isinstance(other, int):
            return LaurentPolynomial.constant(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        result = dict(self._terms)
        for e, c in other._terms.items():
            result[e] = result.get(e, 0) + c
        return LaurentPolynomial(result)

    __radd__ = __add__

    def __neg__(self) -> "LaurentPolynomial":
        return LaurentPolynomial({e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        result: Dict[int, int] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                result[e1 + e2] = result.get(e1 + e2, 0) + c1 * c2
        return LaurentPolynomial(result)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "LaurentPolynomial":
        if n < 0:
            if len(self._terms) != 1:
                raise ValueError("Only monomials have Laurent inverses")
            ((e, c),) = self._terms.items()
            if abs(c) != 1:
                raise ValueError("Only unit monomials have integer inverses")
            return LaurentPolynomial({e * n: c ** (-n)})
        result = LaurentPolynomial.constant(1)
        for _ in range(n):
            result = result * self
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = LaurentPolynomial.constant(other)
        if not isinstance(other, LaurentPolynomial):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def invert_variable(self) -> "LaurentPolynomial":
        """A ↦ A⁻¹（鏡像のブラケット）"""
        return LaurentPolynomial({-e: c for e, c in self._terms.items()})

    def evaluate(self, value) -> object:
        return sum(c * value**e for e, c in self._terms.items())

    # 変換

    def to_sympy(self) -> sp.Expr:
        return sp.Add(*[c * A_SYMBOL**e for e, c in self._terms.items()])

    @classmethod
    def from_sympy(cls, expr: sp.Expr) -> "LaurentPolynomial":
        terms: Dict[int, int] = {}
        for term in sp.Add.make_args(sp.expand(expr)):
            coefficient, exponent = term.as_coeff_exponent(A_SYMBOL)
            terms[int(exponent)] = terms.get(int(exponent), 0) + int(coefficient)
        return cls(terms)

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for e, c in self:
            magnitude = abs(c)
            if e == 0:
                body = str(magnitude)
            else:
                power = "A" if e == 1 else f"A^{e}"
                body = power if magnitude == 1 else f"{magnitude}{power}"
            if not parts:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append(f"+ {body}" if c > 0 else f"- {body}")
        return " ".join(parts)

    def __repr__(self) -> str:
        return f"LaurentPolynomial({self})"

    @classmethod
    def parse(cls, text: str) -> "LaurentPolynomial":
        """__str__ の表示形式を読み戻す"""
        compact = text.replace(" ", "")
        if compact in ("", "0"):
            return cls()
        terms: Dict[int, int] = {}
        position = 0
        while position < len(compact):
            found = re.compile(cls.SIGNED_TERM_PATTERN).match(compact, position)
            if not found or (position > 0 and not found.group(1)):
                raise PdSyntaxError(f"cannot read polynomial {text!r} at {position}")
            position = found.end()
            sign, body = found.group(1), found.group(2)
            match = re.match(cls.TERM_PATTERN, body)
            if not match or (not match.group(1) and not match.group(2)):
                raise PdSyntaxError(f"cannot read polynomial term {body!r}")
            coefficient = int(match.group(1)) if match.group(1) else 1
            if match.group(2):
                exponent = int(match.group(3)) if match.group(3) else 1
            else:
                exponent = 0
            value = -coefficient if sign == "-" else coefficient
            terms[exponent] = terms.get(exponent, 0) + value
        return cls(terms)


# ループ値 δ = -A^2 - A^-2
DELTA = LaurentPolynomial({2: -1, -2: -1})
