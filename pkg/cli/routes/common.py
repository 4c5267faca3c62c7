import argparse

from core.config import settings


def add_common_arguments(parser: argparse.ArgumentParser, config_required: bool = True) -> None:
    """Flags shared by every subcommand"""
    parser.add_argument("--config", required=config_required, help="JSON config file")
    parser.add_argument("--out", default=None, help=f"output directory (default: {settings.OUTPUT_DIR})")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed (unsigned 64-bit)")
    parser.add_argument("--workers", type=int, default=None, help="worker processes (default: logical cores)")
    parser.add_argument("--dry-run", action="store_true", help="validate the config and print what would run")
    parser.add_argument("--log-level", default=None, help=f"logging level (default: {settings.LOG_LEVEL})")
