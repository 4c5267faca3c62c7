"""
Fourier-side Sobolev norms, Lebesgue norms and the fractional Laplacian.

Homogeneous norms drop the zero lattice mode; inhomogeneous norms weight with
<xi> = (1 + |xi|^2)^(1/2) and keep it. Spectral sums go through np.sum on
contiguous arrays (pairwise summation), so results do not depend on workers.
"""
import logging
import math
from typing import NamedTuple

import numpy as np

from cli.models.experiment import NormSpec
from core import cache
from core.config import settings
from core.exceptions import MeanNotZero, ParameterOutOfRange
from services.grid_fourier import Grid, ScalarField, SpectralField, forward_transform, inverse_transform

logger = logging.getLogger(__name__)


def sobolev_weights(grid: Grid, order: float, homogeneous: bool) -> np.ndarray:
    """|xi|^{2s} (zero mode removed) or <xi>^{2s}, memoised per process"""
    key = f"{grid.dim}:{grid.box_length!r}:{grid.points_per_dim}:{order!r}:{homogeneous}"

    def build():
        if homogeneous:
            k2 = grid.k_squared.copy()
            k2[grid.zero_index] = 1.0
            weights = k2 ** order
            weights[grid.zero_index] = 0.0
            return weights
        return (1.0 + grid.k_squared) ** order

    return cache.get_or_build(cache.NORM_PREFIX, key, build)


def mean_tolerance(f: ScalarField) -> float:
    """Admissible |mean| for negative-order homogeneous norms: tol * ||f||_1 / L^d"""
    return settings.MEAN_TOLERANCE * lebesgue_norm(f, 1.0) / f.grid.volume


def ensure_mean_zero(f: ScalarField, what: str = "field") -> None:
    mean = f.mean()
    if abs(mean) > mean_tolerance(f):
        raise MeanNotZero(f"{what} has mean {mean:.3e}; homogeneous negative-order norms need mean zero")


def spectral_sobolev_norm(F: SpectralField, order: float, homogeneous: bool) -> float:
    """Sobolev norm straight from coefficients; no admissibility check"""
    grid = F.grid
    weights = sobolev_weights(grid, order, homogeneous)
    power = F.coeffs.real ** 2 + F.coeffs.imag ** 2
    return math.sqrt(float(np.sum(weights * power)) * grid.spectral_cell)


def sobolev_norm(f: ScalarField, spec: NormSpec) -> float:
    if spec.kind == "lebesgue":
        return lebesgue_norm(f, spec.index)
    if spec.homogeneous and spec.index < 0:
        ensure_mean_zero(f)
    return spectral_sobolev_norm(forward_transform(f), spec.index, spec.homogeneous)


def lebesgue_norm(f: ScalarField, p: float) -> float:
    p = float(p)
    if not p >= 1.0:
        raise ParameterOutOfRange(f"Lebesgue exponent must lie in [1, inf], got {p}")
    magnitude = np.abs(f.values)
    if math.isinf(p):
        return float(np.max(magnitude))
    if p == 1.0:
        return float(np.sum(magnitude)) * f.grid.cell_volume
    return (float(np.sum(magnitude ** p)) * f.grid.cell_volume) ** (1.0 / p)


def fractional_laplacian(f: ScalarField, alpha: float) -> ScalarField:
    """Lambda^alpha = (-Delta)^{alpha/2} as the multiplier |xi|^alpha; the zero mode maps to 0"""
    if alpha < 0:
        ensure_mean_zero(f)
    grid = f.grid
    F = forward_transform(f)
    multiplier = sobolev_weights(grid, alpha / 2.0, True)
    return inverse_transform(SpectralField(grid, F.coeffs * multiplier))


class InterpolationReport(NamedTuple):
    lhs: float
    rhs: float
    ratio: float
    theta: float
    constant: float


def interpolation_theta(gamma: float, alpha: float, beta: float) -> float:
    if not 0 < gamma < alpha < beta:
        raise ParameterOutOfRange(f"interpolation needs 0 < gamma < alpha < beta, got ({gamma}, {alpha}, {beta})")
    return (beta - alpha) / (beta - gamma)


def interpolation_constant(gamma: float, alpha: float, beta: float) -> float:
    """
    Constant of the split at |xi| = 1.

    Above the split |xi|^{-2 gamma} <= 2^gamma <xi>^{-2 gamma}; below it
    <xi>^{2 gamma theta/(1-theta)} <= 2^{gamma theta/(1-theta)}. Hoelder then gives
    lhs^2 <= 2^{gamma theta} A^{2 theta} (B_low^c + B_high^c) with c = 2(1 - theta),
    and B_low^c + B_high^c <= max(1, 2^{1-c}) (B_low + B_high)^c.
    """
    theta = interpolation_theta(gamma, alpha, beta)
    c = 2.0 * (1.0 - theta)
    return 2.0 ** (gamma * theta / 2.0) * math.sqrt(max(1.0, 2.0 ** (1.0 - c)))


def interpolation_check(f: ScalarField, gamma: float, alpha: float, beta: float) -> InterpolationReport:
    """
    ||f||_{H-dot^{-alpha}} against
    ||f||_{H^{-gamma}}^theta (||f||_{H-dot^{-beta-s}} + ||f||_{H-dot^{-beta}})^{1-theta},
    alpha = theta*gamma + (1-theta)*beta, s = theta*gamma/(1-theta).
    """
    theta = interpolation_theta(gamma, alpha, beta)
    constant = interpolation_constant(gamma, alpha, beta)
    ensure_mean_zero(f)
    F = forward_transform(f)
    shift = theta * gamma / (1.0 - theta)
    lhs = spectral_sobolev_norm(F, -alpha, True)
    low = spectral_sobolev_norm(F, -gamma, False)
    high = spectral_sobolev_norm(F, -beta - shift, True) + spectral_sobolev_norm(F, -beta, True)
    rhs = low ** theta * high ** (1.0 - theta)
    ratio = lhs / rhs if rhs > 0 else 0.0
    return InterpolationReport(lhs, rhs, ratio, theta, constant)
