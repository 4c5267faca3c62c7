import logging
import math
from typing import List, Optional

import numpy as np

from cli.controllers.manifest import finish_manifest, now
from cli.models.covariance import CovarianceSpec
from cli.models.experiment import NoiseValidationConfig
from cli.models.results import NoiseReport, PropertyCheck, RunManifest, SpectrumReport
from core.config import settings
from core.exceptions import GateFailure
from core.storage import get_output_dir, write_json
from services.grid_fourier import Grid
from services.noise import (
    NoiseBasis,
    analytic_covariance,
    build_basis,
    empirical_covariance,
    kappa,
    mollify,
    orthogonality_defect,
    sample_increment,
    temporal_correlation,
)
from services.rng import SeedCoords

logger = logging.getLogger(__name__)

REPORT_NAME = "noise_report.json"
ROTATION = np.array([[0.0, -1.0], [1.0, 0.0]])


def _check(name: str, value: float, bound: float, detail: str = "") -> PropertyCheck:
    return PropertyCheck(name=name, passed=bool(value <= bound), value=float(value), bound=float(bound), detail=detail)


def _covariance_checks(basis: NoiseBasis, cfg: NoiseValidationConfig) -> List[PropertyCheck]:
    """Entrywise deviation from the analytic lattice covariance, relative to Q_grid(0) = 2 kappa_grid"""
    scale = 2.0 * basis.kappa_grid
    checks = []
    for z in cfg.displacements:
        estimate = empirical_covariance(basis, cfg.samples, z, seed=cfg.seed, base_points_per_axis=cfg.base_points_per_axis)
        deviation = estimate.relative_error(scale)
        checks.append(_check(f"covariance-z={z}", deviation, cfg.covariance_tolerance, detail=f"{cfg.samples} samples"))
    return checks


def _isotropy(basis: NoiseBasis, displacements) -> float:
    """max |R Q(z) R^T - Q(R z)| for the quarter turn, relative to 2 kappa_grid"""
    worst = 0.0
    for z in displacements:
        z = np.asarray(z, dtype=np.float64)
        rotated = ROTATION @ analytic_covariance(basis, z) @ ROTATION.T
        worst = max(worst, float(np.max(np.abs(rotated - analytic_covariance(basis, ROTATION @ z)))))
    return worst / (2.0 * basis.kappa_grid)


def validate_spectrum(spec: CovarianceSpec, grid: Grid, cfg: NoiseValidationConfig) -> SpectrumReport:
    """
    Run the noise checks for one spectrum

    Args:
        spec: spectral density to realise on the lattice
        grid: lattice
        cfg: sample sizes and tolerances

    Returns:
        Report with one check per property
    """
    basis = build_basis(spec, grid)
    analytic = kappa(spec)
    relative = abs(basis.kappa_grid - analytic) / analytic if analytic > 0 else abs(basis.kappa_grid)
    checks = [_check("kappa", relative, cfg.kappa_tolerance, detail=f"kappa_grid={basis.kappa_grid:.6f}, kappa={analytic:.6f}")]

    if not basis.is_empty:
        divergence = max(
            sample_increment(basis, 1.0, SeedCoords(cfg.seed, m, 0)).divergence_defect()
            for m in range(cfg.divergence_samples)
        )
        orthogonality = orthogonality_defect(basis)
        checks += [
            _check("divergence", divergence, settings.DIVERGENCE_TOLERANCE, detail=f"{cfg.divergence_samples} increments"),
            _check("orthogonality-diagonal", orthogonality.diagonal_defect, 1e-10),
            _check("orthogonality-off-diagonal", orthogonality.off_diagonal, 1e-10),
            _check("isotropy", _isotropy(basis, cfg.displacements), 1e-12) if grid.dim == 2 else None,
            _check("white-in-time", temporal_correlation(basis, cfg.samples, cfg.seed), 3.0 / math.sqrt(cfg.samples)),
        ]
        checks += _covariance_checks(basis, cfg)
    checks = [c for c in checks if c is not None]

    mollified_kappa = None
    if cfg.n_mol is not None:
        mollified_kappa = kappa(mollify(spec, cfg.n_mol))
        checks.append(_check("mollified-kappa", mollified_kappa, analytic, detail=f"n_mol={cfg.n_mol:g}"))

    report = SpectrumReport(
        label=spec.label(),
        n_modes=basis.n_modes,
        kappa=analytic,
        kappa_grid=basis.kappa_grid,
        kappa_relative_error=relative,
        mollified_kappa=mollified_kappa,
        checks=checks,
    )
    logger.info("%s: %d modes, kappa_grid %.6f (kappa %.6f), %s", report.label, report.n_modes, report.kappa_grid,
                analytic, "ok" if report.passed else "FAILED")
    return report


def validate_noise(cfg: NoiseValidationConfig, out: Optional[str] = None, dry_run: bool = False) -> Optional[NoiseReport]:
    """
    Validate every configured spectrum and write noise_report.json.

    Raises:
        UnresolvedSpectrum: a spectrum does not fit on the lattice
        GateFailure: some check failed (the report is written first)
    """
    grid = Grid(cfg.dim, cfg.L, cfg.N)
    spectra = cfg.all_spectra()
    if dry_run:
        for spec in spectra:
            print(f"{spec.label()}: kappa = {kappa(spec):.6f}")
        print(cfg.json(by_alias=True, indent=2))
        return None

    manifest = RunManifest(
        command="noise-validate",
        config=cfg.dict(by_alias=True),
        seed=cfg.seed,
        started_at=now(),
        code_version=settings.APP_VERSION,
    )
    reports = [validate_spectrum(spec, grid, cfg) for spec in spectra]
    report = NoiseReport(grid=grid.describe(), samples=cfg.samples, seed=cfg.seed, spectra=reports, passed=all(r.passed for r in reports))

    out_dir = get_output_dir(out)
    path = write_json(out_dir / REPORT_NAME, report.dict())
    finish_manifest(manifest, out_dir, [path])
    logger.info("wrote %s", path)
    if not report.passed:
        failed = [f"{r.label}/{c.name}" for r in reports for c in r.checks if c.gated and not c.passed]
        raise GateFailure(f"noise checks failed: {', '.join(failed)}")
    return report
