import logging
from pathlib import Path
from typing import List, Optional

from cli.controllers.manifest import finish_manifest, now
from cli.models.experiment import ExperimentConfig
from cli.models.results import EstimateRow, RunManifest
from core.config import settings
from core.storage import get_output_dir, write_csv, write_json
from services.experiments import (
    RateExperiment,
    check_hypotheses,
    enforce_gates,
    predicted_exponent,
    run_rate_experiment,
    sup_route_exponent,
)

logger = logging.getLogger(__name__)

RATES_NAME = "rates.csv"
FIT_NAME = "fit.json"
RATES_HEADER = ("ell", "estimate", "stderr", "bound_rhs")
Z_HEADER = ("z_estimate", "z_stderr")


def estimate_rows(experiment: RateExperiment) -> List[EstimateRow]:
    return [
        EstimateRow(
            ell=e.ell,
            estimate=e.estimate,
            stderr=e.stderr,
            bound_rhs=experiment.rhs[e.ell],
            z_estimate=e.z_estimate,
            z_stderr=e.z_stderr,
            max_identity_defect=e.max_identity_defect,
        )
        for e in experiment.estimates
    ]


def write_rates(path: Path, rows: List[EstimateRow], with_convolution: bool) -> Path:
    header = RATES_HEADER + (Z_HEADER if with_convolution else ())
    table = []
    for row in rows:
        values = [row.ell, row.estimate, row.stderr, row.bound_rhs]
        if with_convolution:
            values += [row.z_estimate, row.z_stderr]
        table.append(values)
    return write_csv(path, header, table)


def fit_payload(cfg: ExperimentConfig, experiment: RateExperiment, rows: List[EstimateRow]) -> dict:
    payload = experiment.fit.dict()
    payload.update(
        config=cfg.echo(),
        code_version=settings.APP_VERSION,
        dealias=cfg.dealias,
        estimates=[row.dict() for row in rows],
        gates=experiment.gates.dict(),
        convolution=[report.dict() for report in experiment.convolution],
        l_doubling=experiment.doubling.dict() if experiment.doubling else None,
        domain_margin=experiment.domain_margin,
        diagnostics=[path for e in experiment.estimates for path in e.artifacts],
    )
    return payload


def describe(cfg: ExperimentConfig) -> None:
    """Print what a run would do; all defaults are explicit in the echoed config"""
    check_hypotheses(cfg)
    print(f"predicted_exponent: {predicted_exponent(cfg):.6f}")
    sup = sup_route_exponent(cfg)
    if sup is not None:
        print(f"sup_route_exponent: {sup:.6f}")
    print(f"moment: {cfg.moment:g}, steps: {cfg.steps}, paths per ell: {cfg.samples}")
    print(cfg.json(by_alias=True, indent=2))


def run_rate(cfg: ExperimentConfig, workers: int = 1, out: Optional[str] = None, dry_run: bool = False) -> Optional[RateExperiment]:
    """
    Run the ell sweep and write rates.csv, fit.json and manifest.json

    Args:
        cfg: experiment config
        workers: worker processes for the Monte Carlo paths
        out: output directory
        dry_run: only check the hypotheses and print the resolved config

    Returns:
        The experiment, or None on a dry run

    Raises:
        ParameterOutOfRange: the parameters leave the admissible windows
        GateFailure: a statistical gate missed (artifacts are written first)
    """
    if dry_run:
        describe(cfg)
        return None

    manifest = RunManifest(
        command="rate",
        config=cfg.echo(),
        seed=cfg.seed,
        started_at=now(),
        code_version=settings.APP_VERSION,
        workers=workers,
        dealias=cfg.dealias,
    )
    out_dir = get_output_dir(out)
    experiment = run_rate_experiment(cfg, workers=workers, out_dir=str(out_dir))

    rows = estimate_rows(experiment)
    rates = write_rates(out_dir / RATES_NAME, rows, with_convolution=cfg.equation == "transport")
    fit = write_json(out_dir / FIT_NAME, fit_payload(cfg, experiment, rows))
    diagnostics = [Path(p) for e in experiment.estimates for p in e.artifacts]
    finish_manifest(manifest, out_dir, [rates, fit] + diagnostics)
    logger.info("wrote %s and %s", rates, fit)

    enforce_gates(experiment)
    return experiment
