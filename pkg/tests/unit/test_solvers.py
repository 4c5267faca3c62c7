import math

import numpy as np
import pytest

from cli.models.covariance import CovarianceSpec
from cli.models.experiment import SolverConfig
from core.exceptions import CflViolation, KappaMismatch, NonzeroMeanVorticity, ParameterOutOfRange
from services import oracles
from services.grid_fourier import Grid, ScalarField, curl_hat, divergence_hat, drop_nyquist, forward_transform
from services.initial_data import random_band_limited, smooth_bump
from services.noise import NoiseBasis, build_basis
from services.norms import lebesgue_norm
from services.rng import SeedCoords, property_generator
from services.solvers import (
    PathState,
    biot_savart,
    check_drift_cfl,
    mild_identity_defect,
    solve_heat,
    step_euler,
    step_nse,
    step_transport,
)

TWO_PI = 2.0 * math.pi


@pytest.fixture
def grid():
    return Grid(2, TWO_PI, 32)


@pytest.fixture
def basis(grid):
    return build_basis(CovarianceSpec.kraichnan(0.5), grid)


class TestTransportStep:
    """Unit tests for the stochastic transport integrator"""

    def test_mild_identity_holds(self, grid, basis):
        """Test f - fbar - Z == 0 after every step"""
        f0 = smooth_bump(grid, 1.0)
        cfg = SolverConfig(kappa=basis.kappa_grid, dt=2e-3, T=0.04)
        state = PathState.start(f0)
        scale = lebesgue_norm(f0, 2.0)
        for n in range(cfg.steps):
            state = step_transport(state, basis, cfg, SeedCoords(1, 0, n))
            assert mild_identity_defect(state) <= 1e-10 * scale
        assert state.step == cfg.steps
        assert state.time == pytest.approx(cfg.T)

    def test_mass_is_conserved(self, grid, basis):
        """Test that the mean of f does not move"""
        f0 = smooth_bump(grid, 1.0)
        cfg = SolverConfig(kappa=basis.kappa_grid, dt=2e-3, T=0.02)
        state = PathState.start(f0)
        for n in range(cfg.steps):
            state = step_transport(state, basis, cfg, SeedCoords(2, 0, n))
        assert state.f.mean() == pytest.approx(f0.mean(), abs=1e-12)

    def test_zero_noise_is_heat_flow(self, grid):
        """Test that without modes f follows the heat semigroup exactly"""
        f0 = smooth_bump(grid, 1.0)
        cfg = SolverConfig(kappa=0.25, dt=1e-2, T=0.05)
        state = PathState.start(f0)
        for n in range(cfg.steps):
            state = step_transport(state, NoiseBasis.empty(grid), cfg, SeedCoords(0, 0, n))
        assert np.max(np.abs(state.Z_hat)) == 0.0
        heat = solve_heat(f0, cfg, cfg.T)
        assert np.max(np.abs(state.f.values - heat.values)) < 1e-12

    def test_matches_dense_reference(self):
        """Test one step against dense matrices on an 8x8 grid"""
        small = Grid(2, TWO_PI, 8)
        basis = build_basis(CovarianceSpec.band(0.9, 3.0, height=0.1), small)
        f = random_band_limited(small, property_generator(3), cutoff=3, mean_zero=False)
        cfg = SolverConfig(kappa=basis.kappa_grid, dt=1e-2, T=1e-2)
        coords = SeedCoords(5, 0, 0)
        spectral = step_transport(PathState.start(f), basis, cfg, coords).f.values
        dense = oracles.dense_transport_step(f.values, basis, cfg, coords)
        assert oracles.relative_gap(spectral, dense) < 1e-12

    def test_kappa_mismatch(self, grid, basis):
        """Test that a solver kappa other than kappa_grid is refused"""
        cfg = SolverConfig(kappa=0.3, dt=1e-3, T=1e-2)
        with pytest.raises(KappaMismatch):
            step_transport(PathState.start(smooth_bump(grid, 1.0)), basis, cfg, SeedCoords(0, 0, 0))

    def test_noise_cfl(self, grid, basis, mocker):
        """Test that an increment moving too far in one step is refused"""
        mocker.patch("services.solvers.settings.NOISE_CFL_LIMIT", 1e-6)
        cfg = SolverConfig(kappa=basis.kappa_grid, dt=1e-3, T=1e-2)
        with pytest.raises(CflViolation):
            step_transport(PathState.start(smooth_bump(grid, 1.0)), basis, cfg, SeedCoords(0, 0, 0))


class TestBiotSavart:
    """Unit tests for the velocity of a planar vorticity"""

    def test_shear(self, grid):
        """Test u = (sin x2, 0) for omega = -cos x2"""
        x2 = grid.coordinates[1]
        u = biot_savart(ScalarField(grid, -np.cos(x2)))
        assert np.max(np.abs(u.components[0].values - np.sin(x2))) < 1e-12
        assert np.max(np.abs(u.components[1].values)) < 1e-12

    @pytest.mark.parametrize("N,L,seed", [
        (16, TWO_PI, 1),
        (32, TWO_PI, 2),
        (32, 4.0, 3),       # box length off 2 pi
        (64, 10.0, 4),
    ])
    def test_random_vorticity(self, N, L, seed):
        """Test div u = 0 and curl u = omega for white-noise vorticity, Nyquist rows included"""
        grid = Grid(2, L, N)
        values = property_generator(seed).standard_normal(grid.shape)
        omega = ScalarField(grid, values - np.mean(values))
        u_hat = tuple(forward_transform(c).coeffs for c in biot_savart(omega).components)
        omega_hat = drop_nyquist(forward_transform(omega).coeffs, grid)
        scale = np.linalg.norm(omega_hat)
        assert np.linalg.norm(divergence_hat(grid, u_hat)) <= 1e-10 * scale
        assert np.linalg.norm(curl_hat(grid, u_hat) - omega_hat) <= 1e-10 * scale

    def test_band_limited_vorticity_is_inverted_exactly(self, grid):
        """Test curl u = omega with no projection when omega has no Nyquist content"""
        omega = random_band_limited(grid, property_generator(6), cutoff=grid.points_per_dim // 2 - 1)
        omega_hat = forward_transform(omega).coeffs
        u_hat = tuple(forward_transform(c).coeffs for c in biot_savart(omega).components)
        assert np.linalg.norm(curl_hat(grid, u_hat) - omega_hat) <= 1e-10 * np.linalg.norm(omega_hat)

    @pytest.mark.parametrize("mean", [
        1.0,
        -0.25,
        1e-6,   # still far above round-off
    ])
    def test_needs_mean_zero(self, grid, mean):
        """Test NonzeroMeanVorticity for a vorticity with net circulation"""
        omega = random_band_limited(grid, property_generator(7), cutoff=4)
        with pytest.raises(NonzeroMeanVorticity):
            biot_savart(ScalarField(grid, omega.values + mean))


class TestVorticitySteps:
    """Unit tests for Euler and Navier-Stokes steps"""

    def test_evolved_vorticity_stays_nyquist_free(self, grid):
        """Test that a step without dealiasing leaves no Nyquist rows for the next velocity"""
        values = property_generator(8).standard_normal(grid.shape)
        omega = ScalarField(grid, values - np.mean(values))
        cfg = SolverConfig(kappa=0.25, dt=1e-3, T=1e-2, dealias=False)
        state = PathState.start(omega)
        for _ in range(3):
            state = step_nse(state, cfg)
            assert np.all(state.f_hat[~grid.nyquist_free] == 0.0)
        u_hat = tuple(forward_transform(c).coeffs for c in biot_savart(state.f).components)
        assert np.linalg.norm(curl_hat(grid, u_hat) - state.f_hat) <= 1e-10 * np.linalg.norm(state.f_hat)

    def test_euler_without_noise_is_nse(self, grid):
        """Test that an empty basis reduces the Euler step to the NSE step"""
        omega = random_band_limited(grid, property_generator(9), cutoff=5)
        cfg = SolverConfig(kappa=0.25, dt=1e-2, T=1e-2)
        coords = SeedCoords(0, 0, 0)
        euler = step_euler(PathState.start(omega), NoiseBasis.empty(grid), cfg, coords)
        nse = step_nse(PathState.start(omega), cfg)
        assert np.max(np.abs(euler.f.values - nse.f.values)) <= 1e-14

    def test_euler_companion_is_nse(self, grid, basis):
        """Test that fbar of an Euler path follows the deterministic equation"""
        omega = random_band_limited(grid, property_generator(10), cutoff=5)
        cfg = SolverConfig(kappa=basis.kappa_grid, dt=1e-2, T=1e-2)
        euler = step_euler(PathState.start(omega), basis, cfg, SeedCoords(0, 0, 0))
        nse = step_nse(PathState.start(omega), cfg)
        assert np.max(np.abs(euler.fbar.values - nse.f.values)) <= 1e-14

    def test_euler_matches_dense_reference(self):
        """Test one Euler step against dense matrices on an 8x8 grid"""
        small = Grid(2, TWO_PI, 8)
        basis = build_basis(CovarianceSpec.band(0.9, 3.0, height=0.1), small)
        omega = random_band_limited(small, property_generator(11), cutoff=3)
        cfg = SolverConfig(kappa=basis.kappa_grid, dt=1e-2, T=1e-2)
        coords = SeedCoords(5, 0, 0)
        spectral = step_euler(PathState.start(omega), basis, cfg, coords).f.values
        dense = oracles.dense_euler_step(omega.values, basis, cfg, coords)
        assert oracles.relative_gap(spectral, dense) < 1e-12

    def test_vorticity_needs_two_dimensions(self):
        """Test that the vorticity steps refuse d = 1"""
        line = Grid(1, TWO_PI, 16)
        cfg = SolverConfig(kappa=0.25, dt=1e-2, T=1e-2)
        with pytest.raises(ParameterOutOfRange):
            step_nse(PathState.start(ScalarField.zeros(line)), cfg)

    def test_drift_cfl(self, grid):
        """Test the advective Courant check"""
        check_drift_cfl(grid, speed=1.0, dt=1e-2)
        with pytest.raises(CflViolation):
            check_drift_cfl(grid, speed=100.0, dt=1e-2)

    def test_solve_heat_rejects_time_past_horizon(self, grid):
        """Test that t must lie in [0, T]"""
        cfg = SolverConfig(kappa=0.25, dt=1e-2, T=0.1)
        with pytest.raises(ParameterOutOfRange):
            solve_heat(smooth_bump(grid, 1.0), cfg, 0.5)
