"""
GLC Actors - 例外クラス

グラフ処理・書き換え・ラムダ項・アクター・結び目の各セクターで使用する例外クラスの定義。
"""

from __future__ import annotations
from typing import Any, List, Optional


class GlcError(Exception):
    """ライブラリ共通の基底例外"""

    def __init__(self, message: str, original_error: Optional[Exception] = None):
        super().__init__(message)
        self.original_error = original_error

    def __str__(self) -> str:
        if self.original_error:
            return f"{super().__str__()} (Original: {self.original_error})"
        return super().__str__()


# --- graph-core ---


class GraphError(GlcError):
    """ポートグラフ関連のエラー"""

    pass


class MolSyntaxError(GraphError):
    """MolText の構文エラー（未知の種別など）"""

    def __init__(self, message: str, line: int = 0, original_error: Exception = None):
        super().__init__(f"line {line}: {message}" if line else message, original_error)
        self.line = line


class DuplicateLabelOverflow(GraphError):
    """ラベルが3回以上出現した"""

    pass


class ArityMismatch(GraphError):
    """ポート数がノード種別と一致しない"""

    pass


class OrientationClash(GraphError):
    """同じラベルを持つ2つの端点の向きが矛盾している"""

    pass


class BadScale(GraphError):
    """Dilation のスケールが正の有理数ではない"""

    pass


class SizeLimitExceeded(GraphError):
    """同型判定のノード数上限を超えた"""

    pass


# --- rewrite-engine ---


class RewriteError(GlcError):
    """書き換えエンジンのエラー"""

    pass


class StaleMatch(RewriteError):
    """マッチ取得後にグラフが変化している"""

    pass


class NotDetachable(RewriteError):
    """FanOut に流れ込む部分グラフが切り離し可能ではない"""

    pass


class ScriptError(RewriteError):
    """スクリプト戦略で指定された規則の適用箇所が存在しない"""

    pass


class StepLimitExceeded(RewriteError):
    """最大ステップ数に到達した（途中結果を保持）"""

    def __init__(self, message: str, graph: Any = None, trace: Any = None):
        super().__init__(message)
        self.graph = graph
        self.trace = trace


# --- lambda-sector ---


class LambdaError(GlcError):
    """ラムダ項セクターのエラー"""

    pass


class TermSyntaxError(LambdaError):
    """ラムダ項の構文エラー（位置付き）"""

    def __init__(self, message: str, position: int = 0):
        super().__init__(f"{message} at position {position}")
        self.position = position


class NotLambdaSector(LambdaError):
    """ラムダセクター外のノードまたは構造を含む"""

    pass


class NoUniqueRoot(LambdaError):
    """出力側の自由端が一意でない"""

    pass


class DecorationCycle(LambdaError):
    """デコレーション伝播が安定しない"""

    pass


# --- actor-runtime ---


class ActorError(GlcError):
    """アクターランタイムのエラー"""

    pass


class PartialPartition(ActorError):
    """分割がグラフの全ノードを覆っていない"""

    pass


class NotASite(ActorError):
    """リンク越しの反応サイトではない"""

    pass


class StaleLink(ActorError):
    """リンクラベルが既に更新されている"""

    pass


class WrongKind(ActorError):
    """名前変更できないノード種別"""

    pass


class NoCommonLink(ActorError):
    """送信先アクターと共有するリンクがない"""

    pass


class NotDisconnected(ActorError):
    """アクターの部分グラフが連結している"""

    pass


class NameTaken(ActorError):
    """既に使用されているアクター名"""

    pass


class NoCore(ActorError):
    """アクターがコアを持っていない"""

    pass


class UnknownActor(ActorError):
    """存在しないアクター名"""

    pass


class NoCommonAddress(ActorError):
    """連結するラベルに共通アドレスがない"""

    pass


class EventLimitExceeded(ActorError):
    """最大イベント数に到達した（途中状態を保持）"""

    def __init__(self, message: str, graph: Any = None, events: Optional[List[Any]] = None):
        super().__init__(message)
        self.graph = graph
        self.events = events or []


# --- knot-sector ---


class KnotError(GlcError):
    """結び目セクターのエラー"""

    pass


class PdSyntaxError(KnotError):
    """PD コードの構文エラー"""

    pass


class ArcCountError(KnotError):
    """弧ラベルの出現回数が2回ではない"""

    pass


class HasFreeEnds(KnotError):
    """自由端を持つタングル図式にはブラケットを定義しない"""

    pass


class TooManyCrossings(KnotError):
    """状態和の交点数上限を超えた"""

    pass


class NoSuchSite(KnotError):
    """Reidemeister 変形の適用箇所ではない"""

    pass


class UnlabeledArc(KnotError):
    """ラベルのない弧が存在する"""

    pass


class OrientationError(KnotError):
    """弧の向きを一貫して定められない"""

    pass
