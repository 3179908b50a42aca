"""
書き換え規則カタログ機能
"""

from .rule_catalog import RuleCatalog

__all__ = [
    "RuleCatalog",
]
