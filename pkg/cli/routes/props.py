import argparse

from cli.controllers.config_loader import load_config
from cli.controllers.props_controller import run_props
from cli.models.experiment import PropsConfig
from cli.routes.common import add_common_arguments
from core.exceptions import EXIT_OK
from services.properties import SUITES


def register(subparsers) -> None:
    parser = subparsers.add_parser("props", help="run a deterministic property suite")
    parser.add_argument("selector", choices=sorted(SUITES), help="property suite to run")
    add_common_arguments(parser, config_required=False)
    parser.set_defaults(handler=props)


def props(args: argparse.Namespace) -> int:
    """
    Run one property suite; the optional config holds a seed and keyword
    overrides for the suite.
    """
    if args.config:
        cfg = load_config(args.config, PropsConfig, seed=args.seed)
    else:
        cfg = PropsConfig(seed=args.seed or 0)
    run_props(args.selector, cfg, out=args.out, dry_run=args.dry_run)
    return EXIT_OK
