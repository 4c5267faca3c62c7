"""
Independent reference implementations for small grids.

Nothing here goes through scipy.fft or the lattice phase shortcut: transforms
are explicit sums of e^{-i x.xi} over the grid coordinates, operators are
dense matrices, and noise increments are evaluated from the mode formula at
the grid points. Meant for 8x8 grids.
"""
import math
from typing import Tuple

import numpy as np

from cli.models.experiment import SolverConfig
from services.grid_fourier import Grid
from services.noise import NoiseBasis, point_values
from services.rng import SeedCoords, standard_normals


def _points(grid: Grid) -> np.ndarray:
    return np.stack([x.ravel() for x in grid.coordinates], axis=1)


def _frequencies(grid: Grid, derivative: bool = False) -> np.ndarray:
    source = grid.derivative_wavenumbers if derivative else grid.wavenumbers
    return np.stack([xi.ravel() for xi in source], axis=1)


def brute_force_dft(values: np.ndarray, grid: Grid) -> np.ndarray:
    """coeffs(j) = (2 pi)^{-d/2} h^d sum_x e^{-i x.xi_j} f(x), one wavenumber at a time"""
    points = _points(grid)
    flat = np.asarray(values, dtype=np.float64).ravel()
    frequencies = _frequencies(grid)
    scale = (2.0 * math.pi) ** (-grid.dim / 2.0) * grid.cell_volume
    out = np.empty(frequencies.shape[0], dtype=np.complex128)
    for k, xi in enumerate(frequencies):
        out[k] = scale * np.sum(np.exp(-1j * (points @ xi)) * flat)
    return out.reshape(grid.shape)


def dense_dft_matrix(grid: Grid) -> np.ndarray:
    points = _points(grid)
    frequencies = _frequencies(grid)
    scale = (2.0 * math.pi) ** (-grid.dim / 2.0) * grid.cell_volume
    return scale * np.exp(-1j * (frequencies @ points.T))


def dense_operator(grid: Grid, multiplier: np.ndarray) -> np.ndarray:
    """Real-space matrix of the Fourier multiplier: F^{-1} diag(m) F"""
    forward = dense_dft_matrix(grid)
    return np.linalg.solve(forward, multiplier.ravel()[:, None] * forward)


def dense_derivatives(grid: Grid) -> Tuple[np.ndarray, ...]:
    frequencies = _frequencies(grid, derivative=True)
    return tuple(dense_operator(grid, 1j * frequencies[:, i]) for i in range(grid.dim))


def dense_heat(grid: Grid, kappa: float, dt: float) -> np.ndarray:
    k2 = np.sum(_frequencies(grid) ** 2, axis=1)
    return dense_operator(grid, np.exp(-kappa * dt * k2))


def dense_dealias(grid: Grid) -> np.ndarray:
    cutoff = grid.points_per_dim / 3.0
    indices = np.stack([j.ravel() for j in grid.lattice_indices], axis=1)
    keep = np.all(np.abs(indices) <= cutoff, axis=1).astype(np.float64)
    return dense_operator(grid, keep)


def dense_increment(basis: NoiseBasis, dt: float, coords: SeedCoords) -> np.ndarray:
    """dW at the grid points, (N^d, d), summed mode by mode"""
    grid = basis.grid
    if basis.is_empty:
        return np.zeros((grid.points_per_dim ** grid.dim, grid.dim))
    normals = standard_normals(coords, basis.n_modes)
    fields = point_values(basis, _points(grid))
    return math.sqrt(dt) * np.tensordot(normals, fields, axes=(0, 0))


def _advance(grid: Grid, values: np.ndarray, velocity: np.ndarray, cfg: SolverConfig) -> np.ndarray:
    f = values.ravel()
    derivatives = dense_derivatives(grid)
    product = sum(velocity[:, i] * (derivatives[i] @ f) for i in range(grid.dim))
    if cfg.dealias:
        product = dense_dealias(grid) @ product
    updated = dense_heat(grid, cfg.kappa, cfg.dt) @ (f - product)
    return np.real(updated).reshape(grid.shape)


def dense_transport_step(values: np.ndarray, basis: NoiseBasis, cfg: SolverConfig, coords: SeedCoords) -> np.ndarray:
    grid = basis.grid
    return _advance(grid, values, dense_increment(basis, cfg.dt, coords), cfg)


def dense_velocity(grid: Grid, omega: np.ndarray) -> np.ndarray:
    frequencies = _frequencies(grid, derivative=True)
    k2 = np.sum(_frequencies(grid) ** 2, axis=1)
    inverse = np.where(k2 > 0, 1.0 / np.where(k2 > 0, k2, 1.0), 0.0)
    u1 = dense_operator(grid, 1j * frequencies[:, 1] * inverse) @ omega.ravel()
    u2 = dense_operator(grid, -1j * frequencies[:, 0] * inverse) @ omega.ravel()
    return np.real(np.stack([u1, u2], axis=1))


def dense_nyquist_projection(grid: Grid, values: np.ndarray) -> np.ndarray:
    keep = grid.nyquist_free.astype(np.float64)
    return np.real(dense_operator(grid, keep) @ np.asarray(values).ravel()).reshape(grid.shape)


def dense_euler_step(omega: np.ndarray, basis: NoiseBasis, cfg: SolverConfig, coords: SeedCoords) -> np.ndarray:
    grid = basis.grid
    omega = dense_nyquist_projection(grid, omega)
    velocity = cfg.dt * dense_velocity(grid, omega) + dense_increment(basis, cfg.dt, coords)
    return dense_nyquist_projection(grid, _advance(grid, omega, velocity, cfg))


def dense_nse_step(omega: np.ndarray, grid: Grid, cfg: SolverConfig) -> np.ndarray:
    omega = dense_nyquist_projection(grid, omega)
    return dense_nyquist_projection(grid, _advance(grid, omega, cfg.dt * dense_velocity(grid, omega), cfg))


def direct_sobolev_norm(values: np.ndarray, grid: Grid, order: float, homogeneous: bool) -> float:
    coeffs = brute_force_dft(values, grid).ravel()
    frequencies = _frequencies(grid)
    terms = []
    for c, xi in zip(coeffs, frequencies):
        k2 = float(xi @ xi)
        if homogeneous:
            if k2 == 0.0:
                continue
            weight = k2 ** order
        else:
            weight = (1.0 + k2) ** order
        terms.append(weight * abs(c) ** 2)
    return math.sqrt(math.fsum(terms) * grid.spectral_cell)


def direct_lebesgue_norm(values: np.ndarray, grid: Grid, p: float) -> float:
    flat = np.abs(np.asarray(values, dtype=np.float64).ravel())
    if math.isinf(p):
        return float(max(flat))
    return (math.fsum(v ** p for v in flat) * grid.cell_volume) ** (1.0 / p)


def relative_gap(a: np.ndarray, b: np.ndarray) -> float:
    scale = float(np.max(np.abs(b)))
    gap = float(np.max(np.abs(np.asarray(a) - np.asarray(b))))
    return gap / scale if scale > 0 else gap
