"""
Homogeneous, isotropic, divergence-free Gaussian noise built from a radial
spectral density g.

The lattice realisation keeps one representative j of every Hermitian pair
{j, -j} and attaches a cos and a sin mode to it. Each mode carries one lattice
cell of spectral mass, a_j^2 = int_{cell_j} g(|xi|) dxi ~ g(|xi_j|) * (2*pi/L)^d,
and a polarization e_j perpendicular to xi_j:

    dW(x) = sum_modes a_j * e_j * sqrt(2) * {cos, sin}(xi_j . x) * sqrt(dt) * Z_mode

so that E[dW(x) (x) dW(y)] / dt = sum_modes a_j^2 e_j (x) e_j cos(xi_j . (x - y)).
"""
import logging
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import List, NamedTuple, Optional, Tuple

import numpy as np
from scipy import special
from scipy.integrate import IntegrationWarning, quad
from scipy.optimize import minimize_scalar

from cli.models.covariance import CovarianceSpec
from core import cache
from core.config import settings
from core.exceptions import ParameterOutOfRange, QuadratureFailure, UnresolvedSpectrum
from core.storage import read_table
from services.grid_fourier import (
    Grid,
    ScalarField,
    SpectralField,
    VectorField,
    divergence_hat,
    forward_transform,
    inverse_transform,
)
from services.rng import SeedCoords, standard_normals

logger = logging.getLogger(__name__)

# midpoint refinement per axis when integrating g over one lattice cell
CELL_SUBDIVISIONS = 16


# ---------------------------------------------------------------------------
# Radial densities
# ---------------------------------------------------------------------------

def sphere_area(dim: int) -> float:
    """Surface measure of the unit sphere S^{d-1}; 2 for d=1, 2*pi for d=2"""
    return 2.0 * math.pi ** (dim / 2.0) / special.gamma(dim / 2.0)


def kraichnan_closed_form(dim: int, lam: float) -> float:
    return lam / (sphere_area(dim) * (1.0 - 2.0 ** (-lam)))


@lru_cache(maxsize=64)
def kraichnan_normalization(dim: int, lam: float) -> float:
    """
    Constant c making the Kraichnan density a unit-mass spectrum.
    It does not depend on ell, so it is computed once at ell = 1.
    """
    shell = _quad(lambda rho: rho ** (-1.0 - lam), 1.0, 2.0)
    return 1.0 / (sphere_area(dim) * shell)


def _table(spec: CovarianceSpec) -> Tuple[np.ndarray, np.ndarray]:
    if spec.points is not None:
        table = np.asarray(spec.points, dtype=np.float64)
    else:
        table = cache.get_or_build(cache.TABLE_PREFIX, spec.table_path, lambda: read_table(spec.table_path))
        if np.any(table[:, 1] < 0) or np.any(np.diff(table[:, 0]) <= 0):
            raise ParameterOutOfRange(f"table {spec.table_path} needs increasing radii and non-negative values")
    return table[:, 0], table[:, 1]


def density(spec: CovarianceSpec, radius) -> np.ndarray:
    """Evaluate g at |xi| = radius (array or scalar)"""
    rho = np.asarray(radius, dtype=np.float64)
    if spec.family == "kraichnan":
        c = kraichnan_normalization(spec.dim, spec.lam)
        inside = (rho >= 1.0 / spec.ell) & (rho <= 2.0 / spec.ell)
        safe = np.where(inside, rho, 1.0)
        return np.where(inside, c * spec.ell ** (-spec.lam) * safe ** (-(spec.dim + spec.lam)), 0.0)
    if spec.family == "band":
        inside = (rho >= spec.a) & (rho <= spec.b)
        return np.where(inside, spec.height, 0.0)
    if spec.family == "tabulated":
        radii, values = _table(spec)
        return np.interp(rho, radii, values, left=0.0, right=0.0)
    return density(spec.base, rho) * np.exp(-rho * rho / spec.n_mol)


def support(spec: CovarianceSpec) -> Optional[Tuple[float, float]]:
    """Radial interval containing {g > 0}, or None when g vanishes identically"""
    if spec.family == "kraichnan":
        return 1.0 / spec.ell, 2.0 / spec.ell
    if spec.family == "band":
        return (spec.a, spec.b) if spec.height > 0 else None
    if spec.family == "tabulated":
        radii, values = _table(spec)
        positive = np.nonzero(values > 0)[0]
        if positive.size == 0:
            return None
        first = max(positive[0] - 1, 0)
        last = min(positive[-1] + 1, radii.size - 1)
        return float(radii[first]), float(radii[last])
    return support(spec.base)


def _breakpoints(spec: CovarianceSpec, lo: float, hi: float) -> List[float]:
    """Interior kinks of the density, where the radial integral is split"""
    base = spec
    while base.family == "mollified":
        base = base.base
    if base.family != "tabulated":
        return [lo, hi]
    radii, _ = _table(base)
    inner = [float(r) for r in radii if lo < r < hi]
    return [lo] + inner + [hi]


def _quad(integrand, lo: float, hi: float) -> float:
    rtol = settings.QUADRATURE_RTOL
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            value, error = quad(integrand, lo, hi, epsabs=0.0, epsrel=rtol, limit=200)
        except IntegrationWarning as exc:
            raise QuadratureFailure(f"radial quadrature on [{lo:g}, {hi:g}] did not converge: {exc}")
    if error > max(rtol * abs(value), 1e-300):
        raise QuadratureFailure(f"radial quadrature error {error:.3e} exceeds tolerance for value {value:.6e}")
    return value


def _radial_integral(spec: CovarianceSpec, power: float) -> float:
    """sigma_{d-1} * int g(rho)^power * rho^{d-1} drho over the support"""
    interval = support(spec)
    if interval is None:
        return 0.0
    lo, hi = interval
    edges = _breakpoints(spec, lo, hi)
    d = spec.dim

    def integrand(rho):
        return float(density(spec, rho)) ** power * rho ** (d - 1)

    total = math.fsum(_quad(integrand, a, b) for a, b in zip(edges, edges[1:]))
    return sphere_area(d) * total


def _sup_density(spec: CovarianceSpec) -> float:
    interval = support(spec)
    if interval is None:
        return 0.0
    if spec.family == "kraichnan":
        return kraichnan_normalization(spec.dim, spec.lam) * spec.ell ** spec.dim
    if spec.family == "band":
        return float(spec.height)
    if spec.family == "tabulated":
        return float(np.max(_table(spec)[1]))
    lo, hi = interval
    radii = np.unique(np.concatenate([np.linspace(lo, hi, 4097), _breakpoints(spec, lo, hi)]))
    values = density(spec, radii)
    k = int(np.argmax(values))
    left, right = radii[max(k - 1, 0)], radii[min(k + 1, radii.size - 1)]
    if right > left:
        refined = minimize_scalar(lambda rho: -float(density(spec, rho)), bounds=(left, right), method="bounded")
        return float(max(values[k], -refined.fun))
    return float(values[k])


def spectral_norm(spec: CovarianceSpec, r: float) -> float:
    """
    ||g||_{L^r(R^d)} by radial quadrature; r = inf gives sup g.
    Used as the scalar proxy for ||Q_hat||_r since P_xi has unit operator norm.
    """
    r = float(r)
    if not r >= 1.0:
        raise ParameterOutOfRange(f"spectral norm exponent must be >= 1, got {r}")
    if math.isinf(r):
        return _sup_density(spec)
    return _radial_integral(spec, r) ** (1.0 / r)


def kappa(spec: CovarianceSpec) -> float:
    """Eddy diffusivity: Q(0) = 2*kappa*I_d gives kappa = (d-1)/(2d) * ||g||_1"""
    d = spec.dim
    return (d - 1) / (2.0 * d) * spectral_norm(spec, 1.0)


def mollify(spec: CovarianceSpec, n_mol: float) -> CovarianceSpec:
    if not n_mol > 0:
        raise ParameterOutOfRange(f"mollification parameter must be positive, got {n_mol}")
    return CovarianceSpec(family="mollified", base=spec, n_mol=n_mol)


# ---------------------------------------------------------------------------
# Lattice basis
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class NoiseBasis:
    grid: Grid
    indices: np.ndarray  # (R, d) lattice indices of the pair representatives
    wavevectors: np.ndarray  # (R, d)
    polarizations: np.ndarray  # (R, d), unit, orthogonal to wavevectors
    amplitudes: np.ndarray  # (R,)
    plus_flat: np.ndarray  # flat array positions of +j
    minus_flat: np.ndarray  # flat array positions of -j
    kappa_grid: float
    label: str = ""

    @property
    def n_pairs(self) -> int:
        return int(self.amplitudes.size)

    @property
    def n_modes(self) -> int:
        return 2 * self.n_pairs

    @property
    def is_empty(self) -> bool:
        return self.n_pairs == 0

    @property
    def max_wavenumber(self) -> float:
        if self.is_empty:
            return 0.0
        return float(np.max(np.sqrt(np.sum(self.wavevectors ** 2, axis=1))))

    @classmethod
    def empty(cls, grid: Grid, label: str = "zero") -> "NoiseBasis":
        d = grid.dim
        return cls(
            grid=grid,
            indices=np.zeros((0, d), dtype=np.int64),
            wavevectors=np.zeros((0, d)),
            polarizations=np.zeros((0, d)),
            amplitudes=np.zeros(0),
            plus_flat=np.zeros(0, dtype=np.int64),
            minus_flat=np.zeros(0, dtype=np.int64),
            kappa_grid=0.0,
            label=label,
        )


def cell_mass(spec: CovarianceSpec, wavevectors: np.ndarray, dk: float) -> np.ndarray:
    """
    Spectral mass of g over the lattice cell centred on each wavevector,
    by a CELL_SUBDIVISIONS^2 midpoint rule. Support edges that pass through
    lattice points then count with the fraction of the cell they cover.
    """
    s = CELL_SUBDIVISIONS
    offsets = ((np.arange(s) + 0.5) / s - 0.5) * dk
    o1, o2 = np.meshgrid(offsets, offsets, indexing="ij")
    points = wavevectors[:, None, :] + np.stack([o1.ravel(), o2.ravel()], axis=1)[None]
    values = density(spec, np.sqrt(np.sum(points ** 2, axis=2)))
    return np.mean(values, axis=1) * dk ** wavevectors.shape[1]


def build_basis(spec: CovarianceSpec, grid: Grid) -> NoiseBasis:
    """
    Lattice-mode basis for the density on the grid.

    Raises:
        UnresolvedSpectrum: the largest lattice wavenumber is below the support of g
    """
    if spec.dim != grid.dim:
        raise ParameterOutOfRange(f"spectrum dimension {spec.dim} does not match grid dimension {grid.dim}")
    interval = support(spec)
    if interval is not None and interval[1] > grid.max_wavenumber * (1.0 + 1e-12):
        raise UnresolvedSpectrum(
            f"{spec.label()} reaches |xi| = {interval[1]:g} but the grid resolves only up to {grid.max_wavenumber:g}"
        )
    if interval is None or grid.dim == 1:
        # no direction orthogonal to xi in one dimension
        return NoiseBasis.empty(grid, label=spec.label())

    j1, j2 = grid.lattice_indices
    nyquist = -(grid.points_per_dim // 2)
    representative = (j1 > 0) | ((j1 == 0) & (j2 > 0))
    representative &= (j1 != nyquist) & (j2 != nyquist)
    lo, hi = interval
    reach = grid.dk * math.sqrt(2.0) / 2.0
    candidates = representative & (grid.k_norm >= lo - reach) & (grid.k_norm <= hi + reach)

    where = np.nonzero(candidates)
    wavevectors = grid.dk * np.stack([j1[where], j2[where]], axis=1).astype(np.float64)
    mass = cell_mass(spec, wavevectors, grid.dk)
    keep = mass > 0
    where = tuple(w[keep] for w in where)
    indices = np.stack([j1[where], j2[where]], axis=1)
    wavevectors = wavevectors[keep]
    k_norm = grid.k_norm[where]
    polarizations = np.stack([-wavevectors[:, 1] / k_norm, wavevectors[:, 0] / k_norm], axis=1)
    amplitudes = np.sqrt(mass[keep])

    n = grid.points_per_dim
    plus_flat = np.ravel_multi_index(where, grid.shape)
    minus_flat = np.ravel_multi_index(tuple((-idx) % n for idx in where), grid.shape)

    # each representative carries a cos and a sin mode
    kappa_grid = float(np.sum(2.0 * amplitudes ** 2 * np.sum(polarizations ** 2, axis=1))) / (2.0 * grid.dim)
    basis = NoiseBasis(
        grid=grid,
        indices=indices,
        wavevectors=wavevectors,
        polarizations=polarizations,
        amplitudes=amplitudes,
        plus_flat=plus_flat,
        minus_flat=minus_flat,
        kappa_grid=kappa_grid,
        label=spec.label(),
    )
    logger.debug("basis %s on %s: %d modes, kappa_grid=%.6f", basis.label, grid.describe(), basis.n_modes, kappa_grid)
    return basis


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

@dataclass
class NoiseIncrement:
    grid: Grid
    dW: VectorField
    dt: float
    seed_coords: SeedCoords
    coeffs: Tuple[np.ndarray, ...] = ()

    def max_speed(self) -> float:
        return float(np.max(self.dW.magnitude()))

    def divergence_defect(self) -> float:
        """max |xi . dW_hat| relative to max |dW|, from a fresh transform of the real field"""
        scale = self.max_speed()
        if scale == 0.0:
            return 0.0
        div = divergence_hat(self.grid, tuple(forward_transform(c).coeffs for c in self.dW.components))
        return float(np.max(np.abs(div))) / scale


def _lattice_amplitudes(basis: NoiseBasis, normals: np.ndarray) -> np.ndarray:
    """Complex amplitude of e^{i xi_j . x} for every representative, per unit dt"""
    cos_draws, sin_draws = normals[0::2], normals[1::2]
    return (math.sqrt(2.0) / 2.0) * basis.amplitudes * (cos_draws - 1j * sin_draws)


def sample_increment(basis: NoiseBasis, dt: float, seed_coords: SeedCoords) -> NoiseIncrement:
    if not dt > 0:
        raise ParameterOutOfRange(f"time step must be positive, got {dt}")
    grid = basis.grid
    if basis.is_empty:
        return NoiseIncrement(grid, VectorField.zeros(grid), dt, seed_coords, tuple(np.zeros(grid.shape, complex) for _ in range(grid.dim)))

    normals = standard_normals(seed_coords, basis.n_modes)
    to_spectral = grid.volume / (2.0 * math.pi) ** (grid.dim / 2.0)
    amplitude = math.sqrt(dt) * to_spectral * _lattice_amplitudes(basis, normals)

    coeffs = []
    components = []
    for i in range(grid.dim):
        flat = np.zeros(grid.points_per_dim ** grid.dim, dtype=np.complex128)
        values = amplitude * basis.polarizations[:, i]
        flat[basis.plus_flat] = values
        flat[basis.minus_flat] = np.conj(values)
        c = flat.reshape(grid.shape)
        coeffs.append(c)
        components.append(inverse_transform(SpectralField(grid, c)))
    return NoiseIncrement(grid, VectorField(grid, tuple(components)), dt, seed_coords, tuple(coeffs))


def point_values(basis: NoiseBasis, points: np.ndarray) -> np.ndarray:
    """
    Mode fields a * e * sqrt(2) * {cos, sin}(xi . x) at arbitrary points.

    Returns:
        array (n_modes, P, d) ordered like the normal draws
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    phase = basis.wavevectors @ points.T  # (R, P)
    weight = math.sqrt(2.0) * basis.amplitudes[:, None]
    out = np.empty((basis.n_modes, points.shape[0], basis.grid.dim))
    out[0::2] = (weight * np.cos(phase))[:, :, None] * basis.polarizations[:, None, :]
    out[1::2] = (weight * np.sin(phase))[:, :, None] * basis.polarizations[:, None, :]
    return out


# ---------------------------------------------------------------------------
# Statistics
# ---------------------------------------------------------------------------

class CovarianceEstimate(NamedTuple):
    empirical: np.ndarray
    analytic: np.ndarray
    samples: int
    base_points: int

    def relative_error(self, scale: float) -> float:
        """Largest entrywise deviation over scale; the raw deviation when scale is 0"""
        deviation = float(np.max(np.abs(self.empirical - self.analytic)))
        return deviation / scale if scale > 0.0 else deviation


class OrthogonalityReport(NamedTuple):
    diagonal_defect: float
    cross_defect: float
    leakage: float

    @property
    def off_diagonal(self) -> float:
        return max(self.cross_defect, self.leakage)


def analytic_covariance(basis: NoiseBasis, displacement) -> np.ndarray:
    """Q_grid(z) = sum_modes a^2 e (x) e cos(xi . z)"""
    d = basis.grid.dim
    if basis.is_empty:
        return np.zeros((d, d))
    z = np.asarray(displacement, dtype=np.float64).reshape(d)
    weights = 2.0 * basis.amplitudes ** 2 * np.cos(basis.wavevectors @ z)
    return (basis.polarizations * weights[:, None]).T @ basis.polarizations


def base_point_lattice(grid: Grid, per_axis: int) -> np.ndarray:
    """per_axis^d points spread evenly over the box"""
    axis = -0.5 * grid.box_length + grid.box_length * np.arange(per_axis) / per_axis
    mesh = np.meshgrid(*([axis] * grid.dim), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _normal_matrix(basis: NoiseBasis, samples: int, seed: int, step: int) -> np.ndarray:
    return np.stack([standard_normals(SeedCoords(seed, m, step), basis.n_modes) for m in range(samples)])


def empirical_covariance(
    basis: NoiseBasis,
    samples: int,
    displacement,
    seed: int = 0,
    base_points_per_axis: int = 8,
) -> CovarianceEstimate:
    """
    Monte Carlo estimate of E[dW(x) (x) dW(y)] / dt for x - y = displacement.

    The draws are the same ones sample_increment uses for (seed, m, step 0).
    Homogeneity lets the estimate average over a lattice of base points x.
    """
    if samples < 2:
        raise ParameterOutOfRange(f"empirical covariance needs at least 2 samples, got {samples}")
    d = basis.grid.dim
    z = np.asarray(displacement, dtype=np.float64).reshape(d)
    analytic = analytic_covariance(basis, z)
    points = base_point_lattice(basis.grid, base_points_per_axis)
    if basis.is_empty:
        return CovarianceEstimate(np.zeros((d, d)), analytic, samples, len(points))

    normals = _normal_matrix(basis, samples, seed, 0)
    at_x = point_values(basis, points).reshape(basis.n_modes, -1)
    at_y = point_values(basis, points - z).reshape(basis.n_modes, -1)
    vx = (normals @ at_x).reshape(samples, len(points), d)
    vy = (normals @ at_y).reshape(samples, len(points), d)
    empirical = np.einsum("mpi,mpj->ij", vx, vy) / (samples * len(points))
    return CovarianceEstimate(empirical, analytic, samples, len(points))


def temporal_correlation(basis: NoiseBasis, samples: int, seed: int = 0) -> float:
    """Largest |correlation| between increments of consecutive steps at the origin"""
    if basis.is_empty or samples < 2:
        return 0.0
    origin = np.zeros((1, basis.grid.dim))
    fields = point_values(basis, origin).reshape(basis.n_modes, -1)
    first = _normal_matrix(basis, samples, seed, 0) @ fields
    second = _normal_matrix(basis, samples, seed, 1) @ fields
    worst = 0.0
    for i in range(basis.grid.dim):
        rho = np.corrcoef(first[:, i], second[:, i])[0, 1]
        worst = max(worst, abs(float(rho)))
    return worst


def orthogonality_defect(basis: NoiseBasis) -> OrthogonalityReport:
    """
    Discrete Fourier orthogonality of the mode family.

    Every mode field is built on the grid from its closed form and transformed;
    lattice amplitudes c_k(j) then satisfy
        sum_k c_k(j) (x) conj(c_k(j)) = a_j^2 P_xi,
        sum_k c_k(j) (x) conj(c_k(-j)) = 0,
    and each c_k vanishes away from +-j_k. Defects are relative to max a^2.
    """
    if basis.is_empty:
        return OrthogonalityReport(0.0, 0.0, 0.0)
    grid = basis.grid
    d = grid.dim
    to_amplitude = (2.0 * math.pi) ** (d / 2.0) / grid.volume
    scale = float(np.max(basis.amplitudes ** 2))
    diagonal = 0.0
    cross = 0.0
    leakage = 0.0
    for r in range(basis.n_pairs):
        xi = basis.wavevectors[r]
        e = basis.polarizations[r]
        a = basis.amplitudes[r]
        argument = sum(x * k for x, k in zip(grid.coordinates, xi))
        projection = np.eye(d) - np.outer(xi, xi) / float(xi @ xi)
        diag_plus = np.zeros((d, d), dtype=np.complex128)
        diag_minus = np.zeros((d, d), dtype=np.complex128)
        cross_sum = np.zeros((d, d), dtype=np.complex128)
        for profile in (np.cos(argument), np.sin(argument)):
            scalar = ScalarField(grid, math.sqrt(2.0) * a * profile)
            amplitudes = forward_transform(scalar).coeffs.ravel() * to_amplitude
            plus = amplitudes[basis.plus_flat[r]] * e
            minus = amplitudes[basis.minus_flat[r]] * e
            diag_plus += np.outer(plus, np.conj(plus))
            diag_minus += np.outer(minus, np.conj(minus))
            cross_sum += np.outer(plus, np.conj(minus))
            rest = np.abs(amplitudes)
            rest[[basis.plus_flat[r], basis.minus_flat[r]]] = 0.0
            leakage = max(leakage, float(np.max(rest)) / a)
        target = a * a * projection
        diagonal = max(diagonal, float(np.max(np.abs(diag_plus - target))) / scale)
        diagonal = max(diagonal, float(np.max(np.abs(diag_minus - target))) / scale)
        cross = max(cross, float(np.max(np.abs(cross_sum))) / scale)
    return OrthogonalityReport(diagonal, cross, leakage)
