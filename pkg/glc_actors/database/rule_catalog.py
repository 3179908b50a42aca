"""
GLC Actors - 書き換え規則カタログ

各規則の局所性・左辺ノード数・説明と、モード別の有効規則集合および優先順位を管理する。

使用例:
    catalog = RuleCatalog()
    for rule in catalog.priority_order(Mode.GLC):
        ...
"""

from typing import Dict, List, Tuple, Union

from ..models.enums import Mode, RuleName


class RuleCatalog:
    """
    書き換え規則カタログ

    規則ごとの性質（局所/大域、左辺のノード数、説明）と、
    glc / chemlambda それぞれで自動戦略が使う規則の優先順位を保持する。
    """

    def __init__(self):
        """カタログ初期化: 規則表・モード別集合・優先順位を構築"""
        self._init_rule_table()
        self._init_mode_sets()

    def _init_rule_table(self):
        """規則名 → (局所性, 左辺ノード数, 説明)"""
        self.rule_table: Dict[RuleName, Tuple[str, int, str]] = {
            RuleName.BETA: ("local", 2, "Lambda と Application の対を消去し境界の2本を繋ぎ直す"),
            RuleName.CO_COMM: ("local", 1, "FanOut の2出力を入れ替える"),
            RuleName.CO_ASSOC: ("local", 2, "連なった2つの FanOut を組み替える"),
            RuleName.PRUNE_APP: ("local", 2, "出力を捨てられた Application を2つの Termination にする"),
            RuleName.PRUNE_FANOUT: ("local", 2, "片方の出力を捨てられた FanOut を配線に戻す"),
            RuleName.PRUNE_LAMBDA: ("local", 2, "出力を捨てられた Lambda を Termination と Stub にする"),
            RuleName.PRUNE_TERM_STUB: ("local", 2, "Stub と Termination が対消滅する"),
            RuleName.PRUNE_FANIN: ("local", 2, "出力を捨てられた FanIn を2つの Termination にする"),
            RuleName.FAN_IN: ("local", 2, "FanIn と複製 FanOut が対消滅し交差配線になる"),
            RuleName.DIST_APP: ("local", 2, "複製 FanOut を Application の入力側へ押し上げる"),
            RuleName.DIST_LAMBDA: ("local", 2, "複製 FanOut を Lambda の本体側へ押し上げる"),
            RuleName.DIST_FANOUT: ("local", 2, "複製 FanOut を共有 FanOut の入力側へ押し上げる"),
            RuleName.DIST_STUB: ("local", 2, "Stub の複製は2つの Stub"),
            RuleName.GLOBAL_FANOUT: ("global", 1, "切り離し可能な部分グラフを丸ごと複製する"),
        }

    def _init_mode_sets(self):
        """モード別の有効規則（自動戦略の優先順）"""
        pruning = [
            RuleName.PRUNE_APP,
            RuleName.PRUNE_LAMBDA,
            RuleName.PRUNE_FANOUT,
            RuleName.PRUNE_FANIN,
            RuleName.PRUNE_TERM_STUB,
        ]
        self.mode_priorities: Dict[Mode, List[RuleName]] = {
            Mode.GLC: [RuleName.BETA] + pruning + [RuleName.GLOBAL_FANOUT],
            Mode.CHEMLAMBDA: [
                RuleName.BETA,
                RuleName.FAN_IN,
                RuleName.DIST_APP,
                RuleName.DIST_LAMBDA,
                RuleName.DIST_FANOUT,
                RuleName.DIST_STUB,
            ]
            + pruning,
        }
        # glc で主規則の適用箇所が尽きたときだけ使う局所複製（自由変数を持つ部分グラフの複製）
        self.fallback_rules: Dict[Mode, List[RuleName]] = {
            Mode.GLC: [
                RuleName.FAN_IN,
                RuleName.DIST_APP,
                RuleName.DIST_LAMBDA,
                RuleName.DIST_FANOUT,
                RuleName.DIST_STUB,
            ],
            Mode.CHEMLAMBDA: [],
        }
        # 可逆な規則はスクリプトでのみ使う
        self.scripted_only = [RuleName.CO_COMM, RuleName.CO_ASSOC]

        # 大域複製の局所エミュレーションで使う規則
        self.emulation_rules: List[RuleName] = [
            RuleName.FAN_IN,
            RuleName.DIST_APP,
            RuleName.DIST_LAMBDA,
            RuleName.DIST_FANOUT,
            RuleName.DIST_STUB,
            RuleName.PRUNE_FANIN,
        ]

    def priority_order(self, mode: Mode) -> List[RuleName]:
        """自動戦略が試す規則を優先順で返す"""
        return list(self.mode_priorities[mode])

    def fallback_order(self, mode: Mode) -> List[RuleName]:
        """主規則がどこにも適用できないときに試す規則"""
        return list(self.fallback_rules[mode])

    def automatic(self, mode: Mode) -> List[RuleName]:
        """自動戦略が使いうる全規則（主規則と代替規則）"""
        return self.priority_order(mode) + self.fallback_order(mode)

    def enabled(self, mode: Mode) -> List[RuleName]:
        """モードで利用可能な全規則（スクリプト専用を含む）"""
        return self.priority_order(mode) + self.scripted_only

    def is_local(self, rule: RuleName) -> bool:
        return self.rule_table[rule][0] == "local"

    def lhs_size(self, rule: RuleName) -> int:
        return self.rule_table[rule][1]

    def describe(self, rule: RuleName) -> str:
        return self.rule_table[rule][2]

    @staticmethod
    def lookup(name: Union[str, RuleName]) -> RuleName:
        """'DIST-APP' / 'dist_app' などの表記から規則名を得る"""
        if isinstance(name, RuleName):
            return name
        normalized = name.strip().upper().replace("_", "-")
        for rule in RuleName:
            if rule.value == normalized:
                return rule
        raise ValueError(f"Unknown rule: {name}")
