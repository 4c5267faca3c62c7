import argparse

from cli.controllers.config_loader import load_config
from cli.controllers.noise_controller import validate_noise
from cli.models.experiment import NoiseValidationConfig
from cli.routes.common import add_common_arguments
from core.exceptions import EXIT_OK


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        "noise-validate",
        help="check covariance, kappa, divergence and orthogonality of the lattice noise",
    )
    add_common_arguments(parser)
    parser.set_defaults(handler=noise_validate)


def noise_validate(args: argparse.Namespace) -> int:
    """
    Validate the noise spectra named in the config.
    Writes noise_report.json and manifest.json into the output directory.
    """
    cfg = load_config(args.config, NoiseValidationConfig, seed=args.seed)
    validate_noise(cfg, out=args.out, dry_run=args.dry_run)
    return EXIT_OK
