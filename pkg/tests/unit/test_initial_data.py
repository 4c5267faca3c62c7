import math

import numpy as np
import pytest

from cli.models.experiment import InitialDataConfig
from core.exceptions import ParameterOutOfRange
from services.grid_fourier import Grid, forward_transform, hermitian_defect
from services.initial_data import (
    bump_profile,
    cell_average_cap,
    dipole,
    domain_margin,
    initial_field,
    random_band_limited,
    singular_profile,
    support_radius,
)
from services.rng import property_generator

TWO_PI = 2.0 * math.pi


class TestProfiles:
    """Unit tests for the initial data families"""

    def test_bump_profile(self):
        """Test bump == 1 at the centre and 0 outside its radius"""
        values = bump_profile(np.array([0.0, 0.5, 1.0, 2.0]), 1.0)
        assert values[0] == pytest.approx(1.0)
        assert 0.0 < values[1] < 1.0
        assert values[2] == 0.0 and values[3] == 0.0

    def test_cell_average_cap_exceeds_corner_value(self):
        """Test that the cap lies above |x|^-beta at the cell corner"""
        grid = Grid(2, TWO_PI, 64)
        h = grid.spacing
        cap = cell_average_cap(grid, 1.2)
        assert cap > (h / math.sqrt(2.0)) ** -1.2

    @pytest.mark.parametrize("dim,beta", [(1, 1.0), (2, 2.0)])
    def test_cap_rejects_non_integrable(self, dim, beta):
        """Test that the singularity must be locally integrable"""
        with pytest.raises(ParameterOutOfRange):
            cell_average_cap(Grid(dim, TWO_PI, 16), beta)

    def test_singular_profile_is_finite_and_capped(self):
        """Test that the singular field peaks at the cell-average cap"""
        grid = Grid(2, TWO_PI, 64)
        f = singular_profile(grid, 1.2, 1.0)
        assert np.max(f.values) == pytest.approx(cell_average_cap(grid, 1.2))

    def test_singular_beta_window(self):
        """Test ParameterOutOfRange for beta outside (d/2, d/p)"""
        grid = Grid(2, TWO_PI, 32)
        with pytest.raises(ParameterOutOfRange):
            initial_field(InitialDataConfig(kind="singular", beta=1.5), grid, 1.5, "transport")

    def test_default_beta_is_mid_window(self):
        """Test beta defaults to the middle of (d/2, d/p)"""
        assert InitialDataConfig().resolved_beta(2, 1.6) == pytest.approx(0.5 * (1.0 + 1.25))

    def test_dipole_has_zero_mean(self):
        """Test the antisymmetric pair used for vorticity runs"""
        grid = Grid(2, TWO_PI, 64)
        omega = dipole(InitialDataConfig(kind="singular", radius=0.5), grid, 1.6)
        assert abs(omega.mean()) < 1e-14
        assert np.max(omega.values) == pytest.approx(-np.min(omega.values))

    def test_vorticity_data_is_nyquist_free(self):
        """Test that euler initial data carries nothing the velocity would drop"""
        grid = Grid(2, TWO_PI, 64)
        cfg = InitialDataConfig(kind="singular", radius=0.5)
        omega = initial_field(cfg, grid, 1.6, "euler")
        coeffs = forward_transform(omega).coeffs
        assert np.max(np.abs(coeffs[~grid.nyquist_free])) < 1e-12 * np.max(np.abs(coeffs))
        assert abs(omega.mean()) < 1e-14

    def test_initial_field_is_memoised(self):
        """Test that the same config returns the cached field"""
        grid = Grid(2, TWO_PI, 32)
        cfg = InitialDataConfig(kind="bump")
        assert initial_field(cfg, grid, 1.5, "transport") is initial_field(cfg, grid, 1.5, "transport")


class TestRandomFields:
    """Unit tests for random band-limited fields"""

    def test_real_and_band_limited(self):
        """Test Hermitian coefficients confined to the cutoff"""
        grid = Grid(2, TWO_PI, 32)
        f = random_band_limited(grid, property_generator(1), cutoff=4)
        F = forward_transform(f)
        outside = np.zeros(grid.shape, dtype=bool)
        for j in grid.lattice_indices:
            outside |= np.abs(j) > 4
        assert np.max(np.abs(F.coeffs[outside])) < 1e-12
        assert hermitian_defect(F) < 1e-12
        assert abs(f.mean()) < 1e-14


class TestDomainMargin:
    """Unit tests for the box-size diagnostic"""

    def test_margin(self):
        """Test L/2 - (R + 4 sqrt(kappa T) + T max|u|)"""
        assert domain_margin(TWO_PI, 1.0, 0.25, 1.0, 0.5) == pytest.approx(math.pi - 1.0 - 2.0 - 0.5)

    def test_support_radius(self):
        """Test that the dipole offset widens the support"""
        cfg = InitialDataConfig(radius=0.5)
        assert support_radius(cfg, "transport") == 0.5
        assert support_radius(cfg, "euler") == pytest.approx(0.5 + 0.625)
