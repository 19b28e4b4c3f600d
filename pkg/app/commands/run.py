"""
`run`: load an experiment JSON (default: app/experiment.json), apply flag
overrides, simulate every requested defense and write

    <dir>/rounds.csv           per-round lines
    <dir>/summary.json         one record per defense
    <dir>/model_<defense>.json optional, output.write_models
"""
import argparse
import logging
import pathlib
from typing import Any

from app.boosting.model_io import ensemble_to_json
from app.config import load_experiment_config
from app.fedsim.reporting import format_table, write_rounds_csv, write_summary_json
from app.fedsim.simulation import run_experiment
from app.schemas import ExperimentConfig

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    p = subparsers.add_parser(
        "run",
        help="Run the federated experiment",
        description="Flags override values from the config file; see ExperimentConfig for every field and default.",
    )
    p.add_argument("config", nargs="?", default=None, help="experiment JSON (default: app/experiment.json or EXPERIMENT_FILE)")
    p.add_argument("--defense", choices=["none", "median", "zkp", "all"])
    p.add_argument("--seed", type=int)
    p.add_argument("--nodes", type=int, dest="n_nodes")
    p.add_argument("--byzantine-fraction", type=float)
    p.add_argument("--rounds", type=int)
    p.add_argument("--depth", type=int)
    p.add_argument("--bins", type=int)
    p.add_argument("--kappa", type=float)
    p.add_argument("--alpha", type=float, dest="dirichlet_alpha")
    p.add_argument("--threads", type=int, help="worker threads; 1 = reference sequential schedule, 0 = all cores")
    p.add_argument("--partitions", type=int, dest="queue_partitions")
    p.add_argument("--data", default=None, help="CSV dataset instead of synthetic data")
    p.add_argument("--out-dir", default=None)
    p.add_argument("--write-models", action="store_true", default=None)
    p.add_argument("--no-timing", action="store_true", default=None, help="write every *_ms value as 0.0")
    p.set_defaults(handler=cmd_run)


_TOP_LEVEL = (
    "defense", "seed", "n_nodes", "byzantine_fraction", "rounds", "depth", "bins",
    "kappa", "dirichlet_alpha", "threads", "queue_partitions",
)


def overrides_from_args(args: argparse.Namespace) -> dict[str, Any]:
    out: dict[str, Any] = {k: getattr(args, k) for k in _TOP_LEVEL if getattr(args, k, None) is not None}
    if args.data:
        out["dataset"] = {"source": "csv", "path": args.data}
    output: dict[str, Any] = {}
    if args.out_dir:
        output["dir"] = args.out_dir
    if args.write_models:
        output["write_models"] = True
    if args.no_timing:
        output["record_timing"] = False
    if output:
        out["output"] = output
    return out


def execute(config: ExperimentConfig) -> str:
    """Run and write every output file; returns the printed table."""
    result = run_experiment(config)
    out_dir = pathlib.Path(config.output.dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_rounds_csv(out_dir / config.output.rounds_csv, result.reports)
    write_summary_json(out_dir / config.output.summary_json, result.summary)
    if config.output.write_models:
        for name, ensemble in result.ensembles.items():
            (out_dir / f"model_{name}.json").write_text(ensemble_to_json(ensemble, result.edges), encoding="utf-8")
    logger.info("results written to %s", out_dir)
    return format_table(result.summary)


def cmd_run(args: argparse.Namespace) -> int:
    config = load_experiment_config(args.config, overrides_from_args(args))
    print(execute(config))
    return 0
