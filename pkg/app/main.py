import argparse
import logging
import sys

from pydantic import ValidationError

from app.commands import register_all
from app.config import ConfigError, settings
from app.utils.log import configure_logging

logger = logging.getLogger("app")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


# -----------------------------------------------------------------------------
# CLI application
# -----------------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zkfedboost",
        description="Federated gradient boosting with proof-checked gradient statistics",
    )
    parser.add_argument("--log-level", default=None, help=f"override LOG_LEVEL (default {settings.log_level})")
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="{gen-data,run,bench,report}")
    register_all(subparsers)
    return parser


# -----------------------------------------------------------------------------
# Entry point (errors -> exit codes)
# -----------------------------------------------------------------------------
def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    configure_logging(args.log_level or settings.log_level)
    try:
        return args.handler(args)
    except (ConfigError, ValidationError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_FAILURE
    except (ValueError, OSError, RuntimeError) as e:
        logger.error("%s failed: %s", args.command, e)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
