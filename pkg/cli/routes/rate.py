import argparse

from cli.controllers.config_loader import load_config
from cli.controllers.rate_controller import run_rate
from cli.models.experiment import ExperimentConfig
from cli.routes.common import add_common_arguments
from core.config import get_worker_count
from core.exceptions import EXIT_OK


def register(subparsers) -> None:
    parser = subparsers.add_parser("rate", help="Monte Carlo sweep over ell and log-log rate fit")
    add_common_arguments(parser)
    parser.set_defaults(handler=rate)


def rate(args: argparse.Namespace) -> int:
    """
    Run the ell sweep of an experiment config.
    Writes rates.csv, fit.json and manifest.json; --dry-run prints the
    resolved config and the predicted exponent instead.
    """
    cfg = load_config(args.config, ExperimentConfig, seed=args.seed)
    run_rate(cfg, workers=get_worker_count(args.workers), out=args.out, dry_run=args.dry_run)
    return EXIT_OK
