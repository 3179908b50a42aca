"""
GLC Actors - コマンドラインインターフェース

サブコマンド compile / reduce / actors / knot / export-dot。
各サブコマンドはライブラリ関数の薄いラッパーで、終了コードは
0: 成功、1: ドメインエラー、2: 使い方の誤り（argparse）。
"""

from __future__ import annotations
from typing import List, Optional, Sequence
import argparse
import logging
import sys

from . import __version__
from .core.base_runtime import prepare
from .core.engine import reduce
from .exceptions import EventLimitExceeded, GlcError, StepLimitExceeded
from .knot_sector import bracket, extract_relations, parse_pd, state_sum
from .lambda_sector import graph_to_term, parse_term, term_to_graph
from .models.enums import Mode, Scheduler, Strategy
from .models.graph import PortGraph
from .models.mol_parser import parse_mol, to_dot, to_mol
from .models.term import format_term
from .runtime import auto_partition, parse_partition, run

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DOMAIN_ERROR = 1


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as f:
        return f.read()


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def _mol_text(g: PortGraph) -> str:
    text = to_mol(g)
    return text + "\n" if text else text


def _report_loops(g: PortGraph, always: bool) -> None:
    """ノードを持たない輪の数は捨てずに末尾の要約行で知らせる"""
    if g.loops or always:
        sys.stderr.write(f"# loops: {g.loops}\n")


# --- サブコマンド ---


def cmd_compile(args: argparse.Namespace) -> int:
    g = term_to_graph(parse_term(args.term))
    _write(args.output, _mol_text(g))
    return EXIT_OK


def cmd_reduce(args: argparse.Namespace) -> int:
    g = parse_mol(_read(args.mol))
    status = EXIT_OK
    try:
        final, trace = reduce(
            g,
            mode=args.mode,
            strategy=args.strategy,
            seed=args.seed,
            script=args.script.split(",") if args.script else None,
            max_steps=args.max_steps,
        )
    except StepLimitExceeded as e:
        sys.stderr.write(f"error: {e}\n")
        final, trace, status = e.graph, e.trace, EXIT_DOMAIN_ERROR

    if args.trace and trace is not None:
        _write(args.trace, trace.to_jsonl())
    if args.readback:
        if args.output:
            _write(args.output, _mol_text(final))
        try:
            sys.stdout.write(format_term(graph_to_term(final)) + "\n")
        except GlcError as e:
            sys.stdout.write(f"{type(e).__name__}: {e}\n")
    else:
        _write(args.output, _mol_text(final))
    _report_loops(final, args.loops)
    return status


def cmd_actors(args: argparse.Namespace) -> int:
    g = parse_mol(_read(args.mol))
    if args.partition:
        partition = parse_partition(_read(args.partition))
    else:
        partition = auto_partition(g, args.auto)
    system = prepare(g, partition)
    status = EXIT_OK
    try:
        final, _ = run(
            system,
            mode=args.mode,
            scheduler=args.scheduler,
            seed=args.seed,
            max_events=args.max_events,
        )
    except EventLimitExceeded as e:
        sys.stderr.write(f"error: {e}\n")
        final, status = e.graph, EXIT_DOMAIN_ERROR

    if args.log:
        _write(args.log, system.event_log())
    _write(args.output, _mol_text(final))
    _report_loops(final, args.loops)
    return status


def cmd_knot(args: argparse.Namespace) -> int:
    diagram = parse_pd(_read(args.pd))
    if args.relations:
        lines = [str(relation) for relation in extract_relations(diagram)]
    elif args.state_sum:
        lines = [str(state_sum(diagram))]
    else:
        lines = [str(bracket(diagram))]
    sys.stdout.write("".join(line + "\n" for line in lines))
    return EXIT_OK


def cmd_export_dot(args: argparse.Namespace) -> int:
    g = parse_mol(_read(args.mol))
    _write(args.output, to_dot(g))
    return EXIT_OK


# --- パーサー ---


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="glc-actors",
        description="GLC / chemlambda グラフ書き換えとアクター簡約、結び目ブラケット",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--verbose", "-v", action="count", default=0, help="ログ出力（-vv で DEBUG）")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="ラムダ項を mol に変換")
    p.add_argument("term", help="ラムダ項（例: \"\\x.x\"）")
    p.add_argument("-o", "--output", help="出力 mol ファイル（既定は標準出力）")
    p.set_defaults(handler=cmd_compile)

    p = sub.add_parser("reduce", help="mol グラフを簡約")
    p.add_argument("mol")
    p.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.GLC.value)
    p.add_argument("--strategy", choices=[s.value for s in Strategy], default=Strategy.PRIORITY.value)
    p.add_argument("--seed", type=int)
    p.add_argument("--script", help="script 戦略の規則名（カンマ区切り）")
    p.add_argument("--max-steps", type=int)
    p.add_argument("--trace", help="トレース（JSON lines）の出力先")
    p.add_argument("--readback", action="store_true", help="最終グラフをラムダ項として表示")
    p.add_argument("--loops", action="store_true", help="輪の数を常に表示")
    p.add_argument("-o", "--output")
    p.set_defaults(handler=cmd_reduce)

    p = sub.add_parser("actors", help="アクター系として実行")
    p.add_argument("mol")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--partition", help="分割ファイル（ノードID アクター名）")
    group.add_argument("--auto", type=int, help="幅優先順で N 個のアクターに分割")
    p.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.GLC.value)
    p.add_argument(
        "--scheduler", choices=[s.value for s in Scheduler], default=Scheduler.ROUND_ROBIN.value
    )
    p.add_argument("--seed", type=int)
    p.add_argument("--max-events", type=int)
    p.add_argument("--log", help="イベントログ（JSON lines）の出力先")
    p.add_argument("--loops", action="store_true")
    p.add_argument("-o", "--output")
    p.set_defaults(handler=cmd_actors)

    p = sub.add_parser("knot", help="PD 図式の不変量")
    p.add_argument("pd")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--bracket", action="store_true")
    group.add_argument("--state-sum", action="store_true")
    group.add_argument("--relations", action="store_true")
    p.set_defaults(handler=cmd_knot)

    p = sub.add_parser("export-dot", help="mol グラフを DOT に変換")
    p.add_argument("mol")
    p.add_argument("-o", "--output")
    p.set_defaults(handler=cmd_export_dot)
    return parser


def _check(parser: argparse.ArgumentParser, args: argparse.Namespace) -> None:
    """作業を始める前の値の検査（誤りは終了コード 2）"""
    if getattr(args, "auto", None) is not None and args.auto < 1:
        parser.error("--auto needs a positive actor count")
    for name in ("max_steps", "max_events"):
        value = getattr(args, name, None)
        if value is not None and value < 0:
            parser.error(f"--{name.replace('_', '-')} must be non-negative")
    if getattr(args, "strategy", None) == Strategy.SCRIPT.value and not args.script:
        parser.error("--strategy script needs --script")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _check(parser, args)
    level = logging.WARNING
    if args.verbose == 1:
        level = logging.INFO
    elif args.verbose >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s")

    try:
        return args.handler(args)
    except GlcError as e:
        logger.debug("command failed", exc_info=True)
        sys.stderr.write(f"error: {type(e).__name__}: {e}\n")
        return EXIT_DOMAIN_ERROR
    except OSError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_DOMAIN_ERROR


__all__: List[str] = ["main", "build_parser"]
