import argparse
import logging

from app.ingestion.dataset import generate_synthetic, write_csv

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    p = subparsers.add_parser("gen-data", help="Write a synthetic binary-classification CSV")
    p.add_argument("--rows", type=int, required=True, help="number of rows")
    p.add_argument("--seed", type=int, required=True, help="generator seed")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--features", type=int, default=10, help="feature count (>= 2, default 10)")
    p.add_argument("--noise", type=float, default=0.05, help="label flip rate (default 0.05)")
    p.set_defaults(handler=cmd_gen_data)


def cmd_gen_data(args: argparse.Namespace) -> int:
    ds = generate_synthetic(args.rows, args.features, args.noise, args.seed)
    write_csv(ds, args.out)
    logger.info("wrote %d rows x %d features to %s", ds.n_rows, ds.n_features, args.out)
    return 0
