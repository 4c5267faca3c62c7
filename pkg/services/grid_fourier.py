"""
Periodic-box discretization of R^d (d in {1, 2}) and discrete Fourier
transforms calibrated to the symmetric (2*pi)^(-d/2) convention.

Grid points sit at x = -L/2 + i*h on every axis, so the box is centred at the
origin. With this placement the phase e^{-i x0.xi_j} is exactly (-1)^{sum j}.

Parseval on the grid:  h^d * sum_x |f(x)|^2 == (2*pi/L)^d * sum_j |f_hat(j)|^2.
"""
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Tuple

import numpy as np
from scipy import fft as sp_fft

from core.config import settings
from core.exceptions import HermitianViolation, NonFiniteField, ParameterOutOfRange

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Grid:
    dim: int
    box_length: float
    points_per_dim: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ParameterOutOfRange(f"grid dimension must be 1 or 2, got {self.dim}")
        if not self.box_length > 0:
            raise ParameterOutOfRange(f"box length must be positive, got {self.box_length}")
        if self.points_per_dim < 4 or self.points_per_dim % 2:
            raise ParameterOutOfRange(f"points per dimension must be even and >= 4, got {self.points_per_dim}")

    def __getstate__(self):
        # cached lattice arrays are rebuilt on demand after unpickling
        return {"dim": self.dim, "box_length": self.box_length, "points_per_dim": self.points_per_dim}

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.points_per_dim,) * self.dim

    @property
    def spacing(self) -> float:
        return self.box_length / self.points_per_dim

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.dim

    @property
    def volume(self) -> float:
        return self.box_length ** self.dim

    @property
    def dk(self) -> float:
        return 2.0 * np.pi / self.box_length

    @property
    def spectral_cell(self) -> float:
        """Spectral measure of one lattice cell, (2*pi/L)^d"""
        return self.dk ** self.dim

    @property
    def max_wavenumber(self) -> float:
        return self.dk * (self.points_per_dim // 2)

    @property
    def transform_scale(self) -> float:
        return (2.0 * np.pi) ** (-self.dim / 2.0) * self.cell_volume

    @property
    def zero_index(self) -> Tuple[int, ...]:
        return (0,) * self.dim

    @cached_property
    def lattice_indices(self) -> Tuple[np.ndarray, ...]:
        n = self.points_per_dim
        j = np.rint(np.fft.fftfreq(n, d=1.0 / n)).astype(np.int64)
        return tuple(np.meshgrid(*([j] * self.dim), indexing="ij"))

    @cached_property
    def wavenumbers(self) -> Tuple[np.ndarray, ...]:
        return tuple(self.dk * j.astype(np.float64) for j in self.lattice_indices)

    @cached_property
    def derivative_wavenumbers(self) -> Tuple[np.ndarray, ...]:
        """Wavenumbers with the Nyquist index zeroed, so odd derivatives stay Hermitian"""
        nyquist = -(self.points_per_dim // 2)
        return tuple(np.where(j == nyquist, 0.0, xi) for j, xi in zip(self.lattice_indices, self.wavenumbers))

    @cached_property
    def nyquist_free(self) -> np.ndarray:
        """True where no index sits at -N/2"""
        nyquist = -(self.points_per_dim // 2)
        keep = np.ones(self.shape, dtype=bool)
        for j in self.lattice_indices:
            keep &= j != nyquist
        return keep

    @cached_property
    def k_squared(self) -> np.ndarray:
        return sum(xi * xi for xi in self.wavenumbers)

    @cached_property
    def k_norm(self) -> np.ndarray:
        return np.sqrt(self.k_squared)

    @cached_property
    def phase(self) -> np.ndarray:
        parity = sum(self.lattice_indices) % 2
        return np.where(parity == 0, 1.0, -1.0)

    @cached_property
    def coordinates(self) -> Tuple[np.ndarray, ...]:
        axis = -0.5 * self.box_length + self.spacing * np.arange(self.points_per_dim)
        return tuple(np.meshgrid(*([axis] * self.dim), indexing="ij"))

    def radius(self, center=None) -> np.ndarray:
        """Periodic (minimum image) distance from a point of the box"""
        center = np.zeros(self.dim) if center is None else np.asarray(center, dtype=np.float64)
        squared = np.zeros(self.shape)
        for x, c in zip(self.coordinates, center):
            delta = x - c
            delta -= self.box_length * np.round(delta / self.box_length)
            squared += delta * delta
        return np.sqrt(squared)

    def describe(self) -> dict:
        return {"dim": self.dim, "L": self.box_length, "N": self.points_per_dim}


@dataclass
class ScalarField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != self.grid.shape:
            raise ValueError(f"field shape {values.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(values)):
            raise NonFiniteField("field contains non-finite values")
        self.values = values

    def mean(self) -> float:
        return float(np.mean(self.values))

    @classmethod
    def zeros(cls, grid: Grid) -> "ScalarField":
        return cls(grid, np.zeros(grid.shape))


@dataclass
class SpectralField:
    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        if self.coeffs.shape != self.grid.shape:
            raise ValueError(f"coefficient shape {self.coeffs.shape} does not match grid {self.grid.shape}")

    def __mul__(self, other: "SpectralField") -> "SpectralField":
        return SpectralField(self.grid, self.coeffs * other.coeffs)

    def mean(self) -> float:
        """Real-space mean recovered from the zero mode"""
        grid = self.grid
        return float(np.real(self.coeffs[grid.zero_index]) * (2.0 * np.pi) ** (grid.dim / 2.0) / grid.volume)


@dataclass
class VectorField:
    grid: Grid
    components: Tuple[ScalarField, ...]

    def __post_init__(self):
        self.components = tuple(self.components)
        if len(self.components) != self.grid.dim:
            raise ValueError(f"expected {self.grid.dim} components, got {len(self.components)}")
        for component in self.components:
            if component.grid != self.grid:
                raise ValueError("all components must share the same grid")

    def as_array(self) -> np.ndarray:
        return np.stack([c.values for c in self.components])

    def magnitude(self) -> np.ndarray:
        return np.sqrt(np.sum(self.as_array() ** 2, axis=0))

    @classmethod
    def zeros(cls, grid: Grid) -> "VectorField":
        return cls(grid, tuple(ScalarField.zeros(grid) for _ in range(grid.dim)))


def forward_transform(f: ScalarField) -> SpectralField:
    """
    Quadrature of the continuous transform:
    coeffs(j) = (2*pi)^{-d/2} * h^d * sum_x e^{-i x.xi_j} f(x)
    """
    grid = f.grid
    raw = sp_fft.fftn(f.values, workers=settings.FFT_THREADS)
    return SpectralField(grid, grid.transform_scale * grid.phase * raw)


def hermitian_defect(F: SpectralField) -> float:
    """max_j |coeffs(-j) - conj(coeffs(j))|"""
    axes = tuple(range(F.grid.dim))
    mirrored = np.roll(np.flip(F.coeffs, axis=axes), 1, axis=axes)
    return float(np.max(np.abs(mirrored - np.conj(F.coeffs))))


def inverse_transform(F: SpectralField) -> ScalarField:
    grid = F.grid
    scale = float(np.max(np.abs(F.coeffs)))
    if scale > 0.0:
        defect = hermitian_defect(F)
        if defect > settings.HERMITIAN_TOLERANCE * scale:
            raise HermitianViolation(f"Hermitian defect {defect:.3e} exceeds tolerance (max coefficient {scale:.3e})")
    raw = sp_fft.ifftn(F.coeffs * grid.phase, workers=settings.FFT_THREADS)
    return ScalarField(grid, np.real(raw) / grid.transform_scale)


def heat_multiplier(grid: Grid, kappa: float, t: float) -> SpectralField:
    """Diagonal multiplier e^{-kappa |xi|^2 t}, the heat semigroup on the lattice"""
    if kappa < 0 or t < 0:
        raise ParameterOutOfRange(f"heat multiplier needs kappa >= 0 and t >= 0, got kappa={kappa}, t={t}")
    return SpectralField(grid, np.exp(-kappa * t * grid.k_squared))


def dealias_mask(grid: Grid) -> SpectralField:
    """2/3 rule: keep modes with |j_i| <= N/3 in every coordinate"""
    cutoff = grid.points_per_dim / 3.0
    keep = np.ones(grid.shape, dtype=bool)
    for j in grid.lattice_indices:
        keep &= np.abs(j) <= cutoff
    return SpectralField(grid, keep.astype(np.float64))


def drop_nyquist(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    """
    Zero every coefficient on a Nyquist row. The result stays Hermitian, and
    the lattice derivatives act on it without loss.
    """
    return np.where(grid.nyquist_free, coeffs, 0.0)


def gradient_hat(F: SpectralField) -> Tuple[np.ndarray, ...]:
    return tuple(1j * xi * F.coeffs for xi in F.grid.derivative_wavenumbers)


def gradient(f: ScalarField) -> VectorField:
    F = forward_transform(f)
    return VectorField(f.grid, tuple(inverse_transform(SpectralField(f.grid, c)) for c in gradient_hat(F)))


def divergence_hat(grid: Grid, components_hat: Tuple[np.ndarray, ...]) -> np.ndarray:
    return sum(1j * xi * c for xi, c in zip(grid.derivative_wavenumbers, components_hat))


def curl_hat(grid: Grid, components_hat: Tuple[np.ndarray, ...]) -> np.ndarray:
    """Scalar curl d1 u2 - d2 u1 of a planar field"""
    if grid.dim != 2:
        raise ParameterOutOfRange("curl is defined for d=2 only")
    xi1, xi2 = grid.derivative_wavenumbers
    return 1j * xi1 * components_hat[1] - 1j * xi2 * components_hat[0]
