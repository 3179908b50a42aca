"""
GLC Actors - 列挙型定義

ノード種別・ポート役割・書き換え規則・実行モード・メッセージ種別の定義。
"""

from enum import Enum


class NodeType(Enum):
    """ノード種別（値は MolText の行頭キーワード）"""

    LAMBDA = "L"
    APPLICATION = "A"
    FANOUT = "FO"
    FANIN = "FI"
    DILATION = "D"
    TERMINATION = "T"
    STUB = "S"
    CORE = "C"


class PortRole(str, Enum):
    """ポート役割"""

    # Lambda
    BODY_IN = "body-in"
    VAR_OUT = "var-out"
    OUT = "out"

    # Application
    FUN_IN = "fun-in"
    ARG_IN = "arg-in"

    # FanOut / Termination
    IN = "in"
    OUT1 = "out1"
    OUT2 = "out2"

    # FanIn / Dilation
    IN1 = "in1"
    IN2 = "in2"


class RuleName(Enum):
    """書き換え規則名"""

    BETA = "BETA"
    CO_COMM = "CO-COMM"
    CO_ASSOC = "CO-ASSOC"
    PRUNE_APP = "PRUNE-APP"
    PRUNE_FANOUT = "PRUNE-FANOUT"
    PRUNE_LAMBDA = "PRUNE-LAMBDA"
    PRUNE_TERM_STUB = "PRUNE-TERM-STUB"
    PRUNE_FANIN = "PRUNE-FANIN"
    FAN_IN = "FAN-IN"
    DIST_APP = "DIST-APP"
    DIST_LAMBDA = "DIST-LAMBDA"
    DIST_FANOUT = "DIST-FANOUT"
    DIST_STUB = "DIST-STUB"
    GLOBAL_FANOUT = "GLOBAL-FANOUT"


class Mode(Enum):
    """規則集合"""

    GLC = "glc"
    CHEMLAMBDA = "chemlambda"


class Strategy(Enum):
    """簡約戦略"""

    PRIORITY = "priority"
    RANDOM = "random"
    SCRIPT = "script"


class Scheduler(Enum):
    """アクター実行のスケジューラ"""

    ROUND_ROBIN = "round-robin"
    RANDOM = "random"


class MessageKind(Enum):
    """アクター間メッセージ種別（イベントログにも使用）"""

    QUERY_NODE = "QueryNode"
    CONFIRM_SITE = "ConfirmSite"
    RELABEL = "Relabel"
    ACK_RELABEL = "AckRelabel"
    NAME_CHANGE = "NameChange"
    PRUNE_ORDER = "PruneOrder"
    SPAWN_REQUEST = "SpawnRequest"
    CORE_EXPRESS = "CoreExpress"
    COPY_ORDER = "CopyOrder"
    INTERNAL = "Internal"


class ReidemeisterMove(Enum):
    """Reidemeister 変形"""

    R1_PLUS = "R1+"
    R1_MINUS = "R1-"
    R2 = "R2"
    R2_PLUS = "R2+"
    R3 = "R3"
