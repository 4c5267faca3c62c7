"""
Initial data families and random test fields.

The singular profile |x - x0|^-beta lies in L^p but not in L^2 for
beta in (d/2, d/p). The grid cannot hold the singularity, so the value is
capped at the average of |x|^-beta over one grid cell centred on it.
"""
import logging
import math
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import quad

from cli.models.experiment import InitialDataConfig
from core import cache
from core.exceptions import ParameterOutOfRange
from services.grid_fourier import (
    Grid,
    ScalarField,
    SpectralField,
    dealias_mask,
    drop_nyquist,
    forward_transform,
    inverse_transform,
)

logger = logging.getLogger(__name__)


def bump_profile(radius: np.ndarray, support: float) -> np.ndarray:
    """exp(1 - 1/(1 - (r/R)^2)) inside r < R, 0 outside; equals 1 at r = 0"""
    s = np.asarray(radius, dtype=np.float64) / support
    inside = s < 1.0
    safe = np.where(inside, s, 0.0)
    return np.where(inside, np.exp(1.0 - 1.0 / (1.0 - safe * safe)), 0.0)


def cell_average_cap(grid: Grid, beta: float) -> float:
    """Average of |x|^-beta over the cell [-h/2, h/2]^d"""
    h = grid.spacing
    if grid.dim == 1:
        if beta >= 1.0:
            raise ParameterOutOfRange(f"|x|^-beta is not integrable near 0 in d=1 for beta={beta}")
        return (h / 2.0) ** (-beta) / (1.0 - beta)
    if beta >= 2.0:
        raise ParameterOutOfRange(f"|x|^-beta is not integrable near 0 in d=2 for beta={beta}")
    # eight congruent triangles; radial integral done in closed form
    angular, _ = quad(lambda theta: (h / (2.0 * math.cos(theta))) ** (2.0 - beta), 0.0, math.pi / 4.0)
    return 8.0 * angular / ((2.0 - beta) * h * h)


def smooth_bump(grid: Grid, support: float, center: Optional[Sequence[float]] = None, amplitude: float = 1.0) -> ScalarField:
    return ScalarField(grid, amplitude * bump_profile(grid.radius(center), support))


def singular_profile(
    grid: Grid,
    beta: float,
    support: float,
    center: Optional[Sequence[float]] = None,
    amplitude: float = 1.0,
) -> ScalarField:
    r = grid.radius(center)
    cap = cell_average_cap(grid, beta)
    with np.errstate(divide="ignore"):
        power = np.where(r > 0, r, 1.0) ** (-beta)
    power = np.where(r > 0, np.minimum(power, cap), cap)
    return ScalarField(grid, amplitude * power * bump_profile(r, support))


def _profile(cfg: InitialDataConfig, grid: Grid, p: float, center) -> ScalarField:
    if cfg.kind == "bump":
        return smooth_bump(grid, cfg.radius, center, cfg.amplitude)
    beta = cfg.resolved_beta(grid.dim, p)
    if not grid.dim / 2.0 < beta < grid.dim / p:
        raise ParameterOutOfRange(f"singular profile needs beta in ({grid.dim / 2.0:g}, {grid.dim / p:g}), got {beta:g}")
    return singular_profile(grid, beta, cfg.radius, center, cfg.amplitude)


def dipole(cfg: InitialDataConfig, grid: Grid, p: float) -> ScalarField:
    """profile(x - x0) - profile(x + x0) with x0 on the first axis; mean zero up to round-off, which is removed"""
    offset = np.zeros(grid.dim)
    offset[0] = cfg.resolved_offset()
    plus = _profile(cfg, grid, p, offset)
    minus = _profile(cfg, grid, p, -offset)
    values = plus.values - minus.values
    return ScalarField(grid, values - np.mean(values))


def initial_field(cfg: InitialDataConfig, grid: Grid, p: float, equation: str) -> ScalarField:
    """
    Memoised per process; the key covers everything the field depends on.
    Vorticity data loses its Nyquist rows, which the velocity cannot carry.
    """
    key = cache.fingerprint({"initial": cfg.dict(), "grid": grid.describe(), "p": p, "equation": equation})

    def build():
        if equation == "euler":
            omega = dipole(cfg, grid, p)
            return inverse_transform(SpectralField(grid, drop_nyquist(forward_transform(omega).coeffs, grid)))
        center = np.asarray(cfg.center, dtype=np.float64) if cfg.center is not None else None
        return _profile(cfg, grid, p, center)

    return cache.get_or_build(cache.INITIAL_PREFIX, key, build)


def support_radius(cfg: InitialDataConfig, equation: str) -> float:
    """Radius of a ball around the origin holding the initial support"""
    reach = cfg.radius
    if equation == "euler":
        reach += cfg.resolved_offset()
    elif cfg.center is not None:
        reach += float(np.linalg.norm(cfg.center))
    return reach


def domain_margin(box_length: float, reach: float, kappa: float, T: float, speed: float = 0.0) -> float:
    """L/2 minus (support radius + 4 sqrt(kappa T) + T max|u|); negative means the box is too small"""
    return box_length / 2.0 - (reach + 4.0 * math.sqrt(kappa * T) + T * speed)


def random_band_limited(
    grid: Grid,
    rng: np.random.Generator,
    cutoff: Optional[float] = None,
    mean_zero: bool = True,
    exclude_nyquist: bool = True,
) -> ScalarField:
    """
    Real random field with Gaussian coefficients on |j_i| <= cutoff.
    The cutoff defaults to the 2/3-rule band.
    """
    coeffs = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    if cutoff is None:
        keep = dealias_mask(grid).coeffs > 0
    else:
        keep = np.ones(grid.shape, dtype=bool)
        for j in grid.lattice_indices:
            keep &= np.abs(j) <= cutoff
    if exclude_nyquist:
        keep &= grid.nyquist_free
    coeffs = np.where(keep, coeffs, 0.0)
    axes = tuple(range(grid.dim))
    mirrored = np.roll(np.flip(coeffs, axis=axes), 1, axis=axes)
    coeffs = 0.5 * (coeffs + np.conj(mirrored))
    if mean_zero:
        coeffs[grid.zero_index] = 0.0
    return inverse_transform(SpectralField(grid, coeffs))
