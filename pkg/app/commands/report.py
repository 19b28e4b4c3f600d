import argparse

from app.fedsim.reporting import format_table, read_summary_json


def register(subparsers: argparse._SubParsersAction) -> None:
    p = subparsers.add_parser("report", help="Pretty-print a summary JSON written by `run`")
    p.add_argument("summary", help="path to summary.json")
    p.set_defaults(handler=cmd_report)


def cmd_report(args: argparse.Namespace) -> int:
    print(format_table(read_summary_json(args.summary)))
    return 0
