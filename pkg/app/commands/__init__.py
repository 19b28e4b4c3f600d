import argparse

from . import bench, gen_data, report, run

# Mounted subcommands, in --help order
COMMANDS = (gen_data, run, bench, report)


def register_all(subparsers: argparse._SubParsersAction) -> None:
    for module in COMMANDS:
        module.register(subparsers)
