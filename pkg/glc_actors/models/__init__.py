"""
GLC Actors - データモデル

ポートグラフ、ラムダ項、結び目図式、多項式、アクターのデータクラスと列挙型の定義。
"""

from .enums import MessageKind, Mode, NodeType, PortRole, ReidemeisterMove, RuleName, Scheduler, Strategy
from .graph import Arrow, FreeEnd, Node, PortGraph, PortRef, ValidationReport
from .mol_parser import MolParser, parse_mol, to_dot, to_mol
from .term import Abs, App, Var, alpha_equivalent, format_term
from .polynomial import DELTA, LaurentPolynomial
from .knot import Crossing, KnotDiagram, PdParser, RackReport, RackTable, Relation
from .actor import Actor, ActorSystem, CounterCore, Event, LinkLabel, Message, compose_labels

__all__ = [
    "NodeType",
    "PortRole",
    "RuleName",
    "Mode",
    "Strategy",
    "Scheduler",
    "MessageKind",
    "ReidemeisterMove",
    "Node",
    "PortRef",
    "FreeEnd",
    "Arrow",
    "PortGraph",
    "ValidationReport",
    "MolParser",
    "parse_mol",
    "to_mol",
    "to_dot",
    "Var",
    "Abs",
    "App",
    "format_term",
    "alpha_equivalent",
    "LaurentPolynomial",
    "DELTA",
    "Crossing",
    "KnotDiagram",
    "PdParser",
    "Relation",
    "RackTable",
    "RackReport",
    "LinkLabel",
    "Message",
    "Actor",
    "CounterCore",
    "Event",
    "ActorSystem",
    "compose_labels",
]
