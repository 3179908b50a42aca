"""
GLC Actors

グラフィックラムダ計算（GLC）と chemlambda のグラフ書き換え、ラムダセクター、
アクターモデルによる分散簡約、結び目図式のブラケット多項式を扱うライブラリ。
"""

__version__ = "0.1.0"
__author__ = "らいとん"
__email__ = "raitosongwe@gmail.com"
__license__ = "MIT"

from .config import settings
from .core import apply_move, emulate_global_fanout, find_sites, is_isomorphic, prepare, reduce
from .runtime import ActorRuntime, actors_diagram, auto_partition, numeral_system, parse_partition, run
from .async_runtime import AsyncActorRuntime
from .lambda_sector import graph_to_term, parse_term, term_to_graph
from .knot_sector import bracket, extract_relations, parse_pd, state_sum
from .models import (
    ActorSystem,
    LaurentPolynomial,
    LinkLabel,
    Mode,
    NodeType,
    PortGraph,
    RuleName,
    compose_labels,
    parse_mol,
    to_mol,
)
from .exceptions import GlcError

__all__ = [
    "settings",
    "PortGraph",
    "NodeType",
    "RuleName",
    "Mode",
    "parse_mol",
    "to_mol",
    "find_sites",
    "apply_move",
    "reduce",
    "emulate_global_fanout",
    "is_isomorphic",
    "parse_term",
    "term_to_graph",
    "graph_to_term",
    "ActorSystem",
    "LinkLabel",
    "compose_labels",
    "prepare",
    "run",
    "ActorRuntime",
    "AsyncActorRuntime",
    "actors_diagram",
    "auto_partition",
    "parse_partition",
    "numeral_system",
    "LaurentPolynomial",
    "parse_pd",
    "bracket",
    "state_sum",
    "extract_relations",
    "GlcError",
]
