"""
GLC Actors - 設定

ライブラリ全体で共有する調整可能なパラメータ。
`settings.dump()` で退避し、`settings.update({...})` で一時変更、`settings.load(dump)` で復元する。
"""

from __future__ import annotations
from dataclasses import dataclass, fields, asdict
from typing import Any, Dict

FAN_IN_WIRINGS = ("crossing", "parallel")


@dataclass
class Settings:
    """
    実行時設定

    Args:
        iso_node_limit: 同型判定を許可する最大ノード数
        max_steps: reduce の既定最大ステップ数
        max_events: アクター実行の既定最大イベント数
        state_sum_max_crossings: 状態和で列挙する最大交点数
        fan_in_wiring: FAN-IN の配線（crossing: i1→o2, i2→o1 / parallel: i1→o1, i2→o2）
        rng_algorithm: トレースヘッダーに記録する乱数生成器の識別子
        query_payload_bits_limit: QueryNode のペイロード上限ビット数
    """

    iso_node_limit: int = 200
    max_steps: int = 10000
    max_events: int = 100000
    state_sum_max_crossings: int = 24
    fan_in_wiring: str = "crossing"
    rng_algorithm: str = "PCG64"
    query_payload_bits_limit: int = 6

    def __post_init__(self) -> None:
        self._validate()

    def _validate(self) -> None:
        if self.fan_in_wiring not in FAN_IN_WIRINGS:
            raise ValueError(f"Invalid fan_in_wiring: {self.fan_in_wiring}")
        for name in ("iso_node_limit", "max_steps", "max_events", "state_sum_max_crossings"):
            if not isinstance(getattr(self, name), int) or getattr(self, name) < 0:
                raise ValueError(f"Invalid {name}: {getattr(self, name)}")

    def dump(self) -> Dict[str, Any]:
        """現在の設定を辞書で返す"""
        return asdict(self)

    def update(self, values: Dict[str, Any]) -> None:
        """指定キーのみ上書き（未知のキーは ValueError）"""
        known = {f.name for f in fields(self)}
        unknown = set(values) - known
        if unknown:
            raise ValueError(f"Unknown settings: {sorted(unknown)}")
        previous = self.dump()
        for key, value in values.items():
            setattr(self, key, value)
        try:
            self._validate()
        except ValueError:
            self.load(previous)
            raise

    def load(self, values: Dict[str, Any]) -> None:
        """dump() の結果から設定を復元"""
        self.update(values)

    def reset(self) -> None:
        """既定値に戻す"""
        self.load(asdict(Settings()))


settings = Settings()
