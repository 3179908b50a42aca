#!/usr/bin/env python3
"""pytest を使わずに unittest でテストを実行するランナー"""

import argparse
import unittest
import sys
import os

# プロジェクトのルートをPATHに追加
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


def iter_tests(suite):
    for test in suite:
        if isinstance(test, unittest.TestSuite):
            yield from iter_tests(test)
        else:
            yield test


def is_slow(test):
    """@pytest.mark.slow の付いたテストか"""
    method = getattr(test, getattr(test, "_testMethodName", ""), None)
    return any(mark.name == "slow" for mark in getattr(method, "pytestmark", []))


def main(argv=None):
    parser = argparse.ArgumentParser(description="glc_actors のテストを実行する")
    parser.add_argument("--module", "-m", help="モジュール名（例: tests.test_rewrite）だけを実行")
    parser.add_argument("--fast", action="store_true", help="slow マークのテストを除く")
    args = parser.parse_args(argv)

    loader = unittest.TestLoader()
    if args.module:
        suite = loader.loadTestsFromName(args.module)
    else:
        suite = loader.discover(os.path.dirname(os.path.abspath(__file__)), pattern="test_*.py")
    if args.fast:
        suite = unittest.TestSuite(t for t in iter_tests(suite) if not is_slow(t))

    result = unittest.TextTestRunner(verbosity=2).run(suite)
    return 0 if result.wasSuccessful() else 1


if __name__ == "__main__":
    sys.exit(main())
