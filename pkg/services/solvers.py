"""
Exponential Euler-Maruyama integrators.

Every update has the form  X_{n+1} = H * (X_n - A_n)  with H = e^{kappa Delta dt}
applied exactly as a lattice multiplier and A_n the advection product formed in
real space at the start of the step (Ito evaluation point):

    transport  A = dW . grad f
    euler      A = (dt u + dW) . grad omega,   u = Biot-Savart(omega)
    nse        A = (dt u) . grad omega

The heat companion and the stochastic convolution use the same H, which makes
f - fbar - Z vanish up to round-off at every step.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import numpy as np

from cli.models.experiment import SolverConfig
from core import cache
from core.config import settings
from core.exceptions import (
    CflViolation,
    KappaMismatch,
    MassDefect,
    NonzeroMeanVorticity,
    ParameterOutOfRange,
)
from services.grid_fourier import (
    Grid,
    ScalarField,
    SpectralField,
    VectorField,
    dealias_mask,
    drop_nyquist,
    forward_transform,
    gradient_hat,
    heat_multiplier,
    inverse_transform,
)
from services.noise import NoiseBasis, NoiseIncrement, sample_increment
from services.norms import lebesgue_norm, spectral_sobolev_norm
from services.rng import SeedCoords

logger = logging.getLogger(__name__)


@dataclass
class PathState:
    grid: Grid
    time: float
    step: int
    f_hat: np.ndarray
    fbar_hat: np.ndarray
    Z_hat: np.ndarray
    initial_mean: float
    mass_scale: float
    diagnostics: List[Dict[str, float]] = field(default_factory=list)

    @classmethod
    def start(cls, f0: ScalarField) -> "PathState":
        """f and fbar both start at f0 (sharing coefficients until the first step); Z starts at 0"""
        F = forward_transform(f0)
        return cls(
            grid=f0.grid,
            time=0.0,
            step=0,
            f_hat=F.coeffs,
            fbar_hat=F.coeffs,
            Z_hat=np.zeros_like(F.coeffs),
            initial_mean=F.mean(),
            mass_scale=lebesgue_norm(f0, 1.0) / f0.grid.volume,
        )

    @property
    def f(self) -> ScalarField:
        return inverse_transform(SpectralField(self.grid, self.f_hat))

    @property
    def fbar(self) -> ScalarField:
        return inverse_transform(SpectralField(self.grid, self.fbar_hat))

    @property
    def Z(self) -> ScalarField:
        return inverse_transform(SpectralField(self.grid, self.Z_hat))

    def error_hat(self) -> SpectralField:
        return SpectralField(self.grid, self.f_hat - self.fbar_hat)


def _multiplier(grid: Grid, kappa: float, dt: float) -> np.ndarray:
    key = f"{grid.dim}:{grid.box_length!r}:{grid.points_per_dim}:{kappa!r}:{dt!r}"
    return cache.get_or_build(cache.MULTIPLIER_PREFIX, key, lambda: heat_multiplier(grid, kappa, dt).coeffs)


def _mask(grid: Grid, dealias: bool) -> Optional[np.ndarray]:
    if not dealias:
        return None
    key = f"dealias:{grid.dim}:{grid.box_length!r}:{grid.points_per_dim}"
    return cache.get_or_build(cache.MULTIPLIER_PREFIX, key, lambda: dealias_mask(grid).coeffs)


def _advection_hat(grid: Grid, field_hat: np.ndarray, velocity: Tuple[np.ndarray, ...], mask) -> np.ndarray:
    """Transform of velocity . grad(field), product formed on the grid"""
    grads = gradient_hat(SpectralField(grid, field_hat))
    product = sum(v * inverse_transform(SpectralField(grid, g)).values for v, g in zip(velocity, grads))
    product_hat = forward_transform(ScalarField(grid, product)).coeffs
    if mask is not None:
        product_hat = product_hat * mask
    return product_hat


def check_kappa(basis: NoiseBasis, cfg: SolverConfig) -> None:
    """The Ito corrector kappa*Delta must be the one the noise induces"""
    if basis.is_empty:
        return
    if abs(cfg.kappa - basis.kappa_grid) > 1e-12 * max(1.0, basis.kappa_grid):
        raise KappaMismatch(f"solver kappa {cfg.kappa!r} differs from noise kappa_grid {basis.kappa_grid!r}")


def check_noise_cfl(increment: NoiseIncrement, basis: NoiseBasis) -> None:
    """
    Raises:
        CflViolation: one increment moves the finest noise mode by more than NOISE_CFL_LIMIT wavelengths
    """
    if basis.is_empty:
        return
    courant = increment.max_speed() * basis.max_wavenumber / (2.0 * math.pi)
    if courant > settings.NOISE_CFL_LIMIT:
        raise CflViolation(
            f"noise increment displaces {courant:.3f} wavelengths of its finest mode in one step "
            f"(limit {settings.NOISE_CFL_LIMIT}); reduce dt"
        )


def check_drift_cfl(grid: Grid, speed: float, dt: float) -> None:
    """Advective Courant number dt max|u| / h against CFL_LIMIT"""
    courant = dt * speed * grid.points_per_dim / grid.box_length
    if courant > settings.CFL_LIMIT:
        raise CflViolation(f"advective Courant number {courant:.3f} exceeds {settings.CFL_LIMIT}; reduce dt")


def _check_mass(state: PathState) -> None:
    tolerance = settings.MEAN_TOLERANCE * state.mass_scale
    for name, coeffs in (("f", state.f_hat), ("fbar", state.fbar_hat)):
        drift = SpectralField(state.grid, coeffs).mean() - state.initial_mean
        if abs(drift) > tolerance:
            raise MassDefect(f"mean of {name} drifted by {drift:.3e} after step {state.step} (tolerance {tolerance:.3e})")


def accumulate_convolution(state: PathState, contribution: SpectralField, multiplier: SpectralField) -> PathState:
    """Z_{n+1} = H (Z_n - dW . grad f_n)"""
    return replace(state, Z_hat=multiplier.coeffs * (state.Z_hat - contribution.coeffs))


def step_transport(
    state: PathState,
    basis: NoiseBasis,
    cfg: SolverConfig,
    seed_coords: SeedCoords,
    increment: Optional[NoiseIncrement] = None,
) -> PathState:
    """
    One exponential Euler step of stochastic transport, with its heat
    companion and the stochastic convolution

    Args:
        state: path state after step n
        basis: lattice noise basis
        cfg: kappa, dt and dealiasing
        seed_coords: stream of the step's normals
        increment: precomputed increment, sampled from seed_coords when None

    Returns:
        The state after step n + 1

    Raises:
        KappaMismatch: cfg.kappa is not the basis kappa_grid
        CflViolation: the increment is too large for dt
        MassDefect: the mean of f or fbar drifted
    """
    check_kappa(basis, cfg)
    grid = state.grid
    if increment is None:
        increment = sample_increment(basis, cfg.dt, seed_coords)
    check_noise_cfl(increment, basis)
    H = _multiplier(grid, cfg.kappa, cfg.dt)

    if basis.is_empty:
        contribution = np.zeros_like(state.f_hat)
    else:
        velocity = tuple(c.values for c in increment.dW.components)
        contribution = _advection_hat(grid, state.f_hat, velocity, _mask(grid, cfg.dealias))

    advanced = replace(
        state,
        time=(state.step + 1) * cfg.dt,
        step=state.step + 1,
        f_hat=H * (state.f_hat - contribution),
        fbar_hat=H * state.fbar_hat,
    )
    advanced = accumulate_convolution(advanced, SpectralField(grid, contribution), SpectralField(grid, H))
    _check_mass(advanced)
    return advanced


def solve_heat(f0: ScalarField, cfg: SolverConfig, t: float) -> ScalarField:
    """Exact e^{kappa Delta t} f0 on the lattice"""
    if not 0.0 <= t <= cfg.T * (1.0 + 1e-12):
        raise ParameterOutOfRange(f"heat solve time {t} outside [0, {cfg.T}]")
    F = forward_transform(f0)
    return inverse_transform(F * heat_multiplier(f0.grid, cfg.kappa, t))


def velocity_hat(grid: Grid, omega_hat: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    u_hat = i xi_perp omega_hat / |xi|^2 with xi_perp = (xi_2, -xi_1).

    omega_hat must be free of Nyquist rows (see drop_nyquist); on those rows the
    lattice derivative vanishes and curl u could not return omega.
    """
    k2 = grid.k_squared.copy()
    k2[grid.zero_index] = 1.0
    inverse = 1.0 / k2
    inverse[grid.zero_index] = 0.0
    xi1, xi2 = grid.derivative_wavenumbers
    return 1j * xi2 * omega_hat * inverse, -1j * xi1 * omega_hat * inverse


def biot_savart(omega: ScalarField) -> VectorField:
    """
    Divergence-free velocity whose curl is omega with its Nyquist rows removed.

    Args:
        omega: planar vorticity with zero mean

    Returns:
        u = K * omega, one ScalarField per component

    Raises:
        NonzeroMeanVorticity: omega has net circulation
    """
    grid = omega.grid
    if grid.dim != 2:
        raise ParameterOutOfRange("Biot-Savart inversion needs d = 2")
    mean = omega.mean()
    tolerance = settings.MEAN_TOLERANCE * lebesgue_norm(omega, 1.0) / grid.volume
    if abs(mean) > tolerance:
        raise NonzeroMeanVorticity(f"vorticity has mean {mean:.3e}; the velocity exists only for zero total vorticity")
    u1, u2 = velocity_hat(grid, drop_nyquist(forward_transform(omega).coeffs, grid))
    return VectorField(grid, (inverse_transform(SpectralField(grid, u1)), inverse_transform(SpectralField(grid, u2))))


def _vorticity_update(grid: Grid, omega_hat: np.ndarray, noise: Tuple[np.ndarray, ...], cfg: SolverConfig) -> np.ndarray:
    """H (omega - (dt u + noise) . grad omega), u from the Nyquist-free omega"""
    omega_hat = drop_nyquist(omega_hat, grid)
    u = tuple(inverse_transform(SpectralField(grid, c)).values for c in velocity_hat(grid, omega_hat))
    speed = float(np.max(np.sqrt(u[0] ** 2 + u[1] ** 2)))
    check_drift_cfl(grid, speed, cfg.dt)
    velocity = tuple(cfg.dt * ui + wi for ui, wi in zip(u, noise))
    contribution = _advection_hat(grid, omega_hat, velocity, _mask(grid, cfg.dealias))
    return drop_nyquist(_multiplier(grid, cfg.kappa, cfg.dt) * (omega_hat - contribution), grid)


def _zero_noise(grid: Grid) -> Tuple[np.ndarray, ...]:
    return tuple(np.zeros(grid.shape) for _ in range(grid.dim))


def step_euler(
    state: PathState,
    basis: NoiseBasis,
    cfg: SolverConfig,
    seed_coords: SeedCoords,
    increment: Optional[NoiseIncrement] = None,
) -> PathState:
    """Stochastic vorticity step for f; the NSE companion fbar advances alongside"""
    grid = state.grid
    if grid.dim != 2:
        raise ParameterOutOfRange("the vorticity equations need d = 2")
    check_kappa(basis, cfg)
    if increment is None:
        increment = sample_increment(basis, cfg.dt, seed_coords)
    check_noise_cfl(increment, basis)
    noise = tuple(c.values for c in increment.dW.components)

    advanced = replace(
        state,
        time=(state.step + 1) * cfg.dt,
        step=state.step + 1,
        f_hat=_vorticity_update(grid, state.f_hat, noise, cfg),
        fbar_hat=_vorticity_update(grid, state.fbar_hat, _zero_noise(grid), cfg),
    )
    _check_mass(advanced)
    return advanced


def step_nse(state: PathState, cfg: SolverConfig) -> PathState:
    """Deterministic vorticity step; f and fbar are both NSE solutions"""
    grid = state.grid
    if grid.dim != 2:
        raise ParameterOutOfRange("the vorticity equations need d = 2")
    f_hat = _vorticity_update(grid, state.f_hat, _zero_noise(grid), cfg)
    if state.fbar_hat is state.f_hat:
        fbar_hat = f_hat
    else:
        fbar_hat = _vorticity_update(grid, state.fbar_hat, _zero_noise(grid), cfg)
    advanced = replace(state, time=(state.step + 1) * cfg.dt, step=state.step + 1, f_hat=f_hat, fbar_hat=fbar_hat)
    _check_mass(advanced)
    return advanced


def mild_identity_defect(state: PathState) -> float:
    """||f - fbar - Z||_2 via Parseval"""
    residual = SpectralField(state.grid, state.f_hat - state.fbar_hat - state.Z_hat)
    return spectral_sobolev_norm(residual, 0.0, False)
