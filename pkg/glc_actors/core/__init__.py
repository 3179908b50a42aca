"""
GLC Actors のコア機能（書き換え・簡約・同型判定・アクターランタイム基盤）
"""

from .base_runtime import BaseActorRuntime, prepare
from .engine import Trace, emulate_global_fanout, reduce
from .isomorphism import is_isomorphic
from .rewrite import Match, apply_move, find_sites

__all__ = [
    "BaseActorRuntime",
    "prepare",
    "reduce",
    "Trace",
    "emulate_global_fanout",
    "is_isomorphic",
    "Match",
    "find_sites",
    "apply_move",
]
