import inspect
import logging
from typing import Optional

from cli.controllers.manifest import finish_manifest, now
from cli.models.experiment import PropsConfig
from cli.models.results import PropertyReport, RunManifest
from core.config import settings
from core.exceptions import ConfigError, PropertyFailure
from core.storage import get_output_dir, write_json
from services.properties import SEEDLESS, SUITES, run_suite

logger = logging.getLogger(__name__)


def report_name(selector: str) -> str:
    return f"props_{selector}.json"


def suite_parameters(selector: str, cfg: PropsConfig) -> dict:
    """Defaults of the suite merged with the configured overrides"""
    if selector not in SUITES:
        raise ConfigError(f"unknown property suite {selector!r}; valid: {', '.join(sorted(SUITES))}")
    signature = inspect.signature(SUITES[selector])
    resolved = {name: p.default for name, p in signature.parameters.items() if p.default is not inspect.Parameter.empty}
    resolved.update(cfg.parameters)
    if selector not in SEEDLESS:
        resolved["seed"] = cfg.seed
    return resolved


def run_props(selector: str, cfg: PropsConfig, out: Optional[str] = None, dry_run: bool = False) -> Optional[PropertyReport]:
    """
    Run one property suite and write its report

    Raises:
        ConfigError: unknown selector or parameter
        PropertyFailure: a gated check failed (the report is written first)
    """
    if dry_run:
        for name, value in suite_parameters(selector, cfg).items():
            print(f"{name}: {value!r}")
        return None

    manifest = RunManifest(
        command=f"props {selector}",
        config=cfg.dict(),
        seed=cfg.seed,
        started_at=now(),
        code_version=settings.APP_VERSION,
    )
    report = run_suite(selector, seed=cfg.seed, parameters=cfg.parameters)

    out_dir = get_output_dir(out)
    path = write_json(out_dir / report_name(selector), report.dict())
    finish_manifest(manifest, out_dir, [path])
    logger.info("wrote %s", path)
    if not report.passed:
        failed = ", ".join(f"{c.name} (value {c.value:.4g}, bound {c.bound})" for c in report.failures())
        raise PropertyFailure(f"{selector}: {failed}")
    return report
