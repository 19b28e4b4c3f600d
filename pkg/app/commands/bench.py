import argparse
import csv
import logging
import sys

from app.config import settings
from app.crypto.snark import bench_prove_verify
from app.dependencies import get_loss_spec
from app.schemas import BenchRow

logger = logging.getLogger(__name__)

DEFAULT_SIZES = (8, 16, 32)


def register(subparsers: argparse._SubParsersAction) -> None:
    p = subparsers.add_parser("bench", help="Median prove/verify wall-clock per circuit size")
    p.add_argument("--sizes", type=int, nargs="+", default=list(DEFAULT_SIZES), help="instances per circuit (default 8 16 32)")
    p.add_argument("--iterations", type=int, default=None, help=f"samples per size (default {settings.bench_iterations})")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p.set_defaults(handler=cmd_bench)


def run_bench(sizes: list[int], iterations: int, seed: int) -> list[BenchRow]:
    loss = get_loss_spec()
    rows = []
    for n in sizes:
        params = loss.circuit_params(n)
        prove_ms, verify_ms = bench_prove_verify(params, iterations, seed)
        rows.append(BenchRow(n_instances=n, constraints=params.constraint_count(), prove_ms=prove_ms, verify_ms=verify_ms))
        logger.info("bench n=%d constraints=%d prove=%.1fms verify=%.2fms", n, rows[-1].constraints, prove_ms, verify_ms)
    return rows


def write_bench_csv(rows: list[BenchRow], fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["n_instances", "constraints", "prove_ms", "verify_ms"])
    for r in rows:
        writer.writerow([r.n_instances, r.constraints, f"{r.prove_ms:.3f}", f"{r.verify_ms:.3f}"])


def cmd_bench(args: argparse.Namespace) -> int:
    iterations = args.iterations if args.iterations is not None else settings.bench_iterations
    rows = run_bench(args.sizes, iterations, args.seed)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            write_bench_csv(rows, fh)
    else:
        write_bench_csv(rows, sys.stdout)
    return 0
