import math

import numpy as np
import pytest

from cli.models.covariance import CovarianceSpec
from core.exceptions import ParameterOutOfRange, UnresolvedSpectrum
from services import oracles
from services.grid_fourier import Grid
from services.noise import (
    CovarianceEstimate,
    analytic_covariance,
    build_basis,
    density,
    empirical_covariance,
    kappa,
    kraichnan_closed_form,
    kraichnan_normalization,
    mollify,
    orthogonality_defect,
    sample_increment,
    spectral_norm,
    support,
    temporal_correlation,
)
from services.rng import SeedCoords

TWO_PI = 2.0 * math.pi


class TestSpectralDensities:
    """Unit tests for radial densities and their norms"""

    @pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
    def test_kraichnan_normalization_closed_form(self, lam):
        """Test quadrature normalization against lambda / (2 pi (1 - 2^-lambda))"""
        assert kraichnan_normalization(2, lam) == pytest.approx(kraichnan_closed_form(2, lam), rel=1e-8)

    @pytest.mark.parametrize("ell", [0.4, 0.1, 0.05])
    def test_kraichnan_unit_mass(self, ell):
        """Test ||g_ell||_1 == 1 and kappa == 1/4 in d = 2"""
        spec = CovarianceSpec.kraichnan(ell)
        assert spectral_norm(spec, 1.0) == pytest.approx(1.0, rel=1e-7)
        assert kappa(spec) == pytest.approx(0.25, rel=1e-7)

    def test_kraichnan_lr_scaling(self):
        """Test ||g_ell||_r proportional to ell^{d(r-1)/r}"""
        r = 3.0
        ratio = spectral_norm(CovarianceSpec.kraichnan(0.1), r) / spectral_norm(CovarianceSpec.kraichnan(0.2), r)
        assert ratio == pytest.approx(0.5 ** (2.0 * (r - 1.0) / r), rel=1e-6)

    def test_kraichnan_sup(self):
        """Test sup g_ell == c ell^d"""
        spec = CovarianceSpec.kraichnan(0.2)
        assert spectral_norm(spec, math.inf) == pytest.approx(kraichnan_normalization(2, 1.0) * 0.04)

    def test_band_density_and_norms(self):
        """Test a flat band: ||g||_1 = height * annulus area"""
        spec = CovarianceSpec.band(1.0, 2.0, height=0.5)
        assert float(density(spec, 1.5)) == 0.5
        assert float(density(spec, 2.5)) == 0.0
        assert spectral_norm(spec, 1.0) == pytest.approx(0.5 * math.pi * 3.0, rel=1e-7)
        assert spectral_norm(spec, math.inf) == 0.5

    def test_tabulated_interpolation(self):
        """Test linear interpolation and zero outside the table"""
        spec = CovarianceSpec.tabulated([[1.0, 0.0], [2.0, 2.0], [3.0, 0.0]])
        assert float(density(spec, 1.5)) == pytest.approx(1.0)
        assert float(density(spec, 3.5)) == 0.0
        assert support(spec) == (1.0, 3.0)

    def test_mollified_kappa_is_smaller(self):
        """Test that mollification only removes spectral mass, also when nested"""
        spec = CovarianceSpec.kraichnan(0.2)
        once = mollify(spec, 50.0)
        twice = mollify(once, 50.0)
        assert kappa(twice) < kappa(once) < kappa(spec)

    def test_mollify_rejects_nonpositive(self):
        """Test that n_mol must be positive"""
        with pytest.raises(ParameterOutOfRange):
            mollify(CovarianceSpec.kraichnan(0.2), 0.0)

    def test_spectral_norm_rejects_small_exponent(self):
        """Test that r < 1 is refused"""
        with pytest.raises(ParameterOutOfRange):
            spectral_norm(CovarianceSpec.kraichnan(0.2), 0.5)


class TestNoiseBasis:
    """Unit tests for the lattice mode basis"""

    @pytest.mark.parametrize("ell", [0.2, 0.1])
    def test_kappa_grid_near_quarter(self, ell):
        """Test kappa_grid for the Kraichnan family on the 256 lattice"""
        basis = build_basis(CovarianceSpec.kraichnan(ell), Grid(2, TWO_PI, 256))
        assert 0.245 <= basis.kappa_grid <= 0.255

    def test_unresolved_spectrum(self):
        """Test that a band beyond the lattice is refused"""
        with pytest.raises(UnresolvedSpectrum):
            build_basis(CovarianceSpec.kraichnan(0.1), Grid(2, TWO_PI, 16))

    def test_one_dimension_is_empty(self):
        """Test that d = 1 has no divergence-free modes"""
        basis = build_basis(CovarianceSpec.band(1.0, 2.0, dim=1), Grid(1, TWO_PI, 16))
        assert basis.is_empty
        assert basis.kappa_grid == 0.0
        increment = sample_increment(basis, 0.1, SeedCoords(0, 0, 0))
        assert np.all(increment.dW.as_array() == 0.0)

    def test_zero_band_is_empty(self):
        """Test that a zero-height band gives no modes"""
        assert build_basis(CovarianceSpec.band(1.0, 2.0, height=0.0), Grid(2, TWO_PI, 16)).is_empty

    def test_polarizations_are_divergence_free(self):
        """Test e_j perpendicular to xi_j and of unit length"""
        basis = build_basis(CovarianceSpec.kraichnan(0.5), Grid(2, TWO_PI, 32))
        dots = np.sum(basis.polarizations * basis.wavevectors, axis=1)
        assert np.max(np.abs(dots)) < 1e-14
        assert np.allclose(np.sum(basis.polarizations ** 2, axis=1), 1.0)

    def test_one_representative_per_pair(self):
        """Test that no index appears together with its negative"""
        basis = build_basis(CovarianceSpec.kraichnan(0.5), Grid(2, TWO_PI, 32))
        indices = {tuple(j) for j in basis.indices.tolist()}
        assert all((-a, -b) not in indices for a, b in indices)
        assert basis.n_modes == 2 * len(indices)

    def test_orthogonality(self):
        """Test discrete orthogonality of the mode family"""
        report = orthogonality_defect(build_basis(CovarianceSpec.kraichnan(0.5), Grid(2, TWO_PI, 32)))
        assert report.diagonal_defect < 1e-10
        assert report.off_diagonal < 1e-10

    def test_analytic_covariance_at_origin(self):
        """Test Q_grid(0) == 2 kappa_grid I"""
        basis = build_basis(CovarianceSpec.kraichnan(0.2), Grid(2, TWO_PI, 64))
        q0 = analytic_covariance(basis, [0.0, 0.0])
        assert np.allclose(q0, 2.0 * basis.kappa_grid * np.eye(2), atol=1e-12)


class TestSampling:
    """Unit tests for noise increments and their statistics"""

    @pytest.fixture
    def basis(self):
        return build_basis(CovarianceSpec.kraichnan(0.5), Grid(2, TWO_PI, 32))

    def test_increment_is_divergence_free(self, basis):
        """Test xi . dW_hat == 0 up to round-off"""
        increment = sample_increment(basis, 0.01, SeedCoords(3, 0, 0))
        assert increment.divergence_defect() < 1e-10

    def test_increment_matches_mode_sum(self, basis):
        """Test the FFT increment against the mode formula at the grid points"""
        coords = SeedCoords(3, 1, 2)
        increment = sample_increment(basis, 0.01, coords)
        direct = oracles.dense_increment(basis, 0.01, coords)
        fft_values = increment.dW.as_array().reshape(2, -1).T
        assert oracles.relative_gap(fft_values, direct) < 1e-12

    def test_increment_is_reproducible(self, basis):
        """Test that a fixed (seed, sample, step) fixes the increment"""
        a = sample_increment(basis, 0.01, SeedCoords(3, 0, 5)).dW.as_array()
        b = sample_increment(basis, 0.01, SeedCoords(3, 0, 5)).dW.as_array()
        assert np.array_equal(a, b)

    def test_rejects_nonpositive_dt(self, basis):
        """Test that dt must be positive"""
        with pytest.raises(ParameterOutOfRange):
            sample_increment(basis, 0.0, SeedCoords(0, 0, 0))

    @pytest.mark.parametrize("z", [[0.0, 0.0], [0.3, -0.2]])
    def test_empirical_covariance(self, basis, z):
        """Test the Monte Carlo covariance against the analytic lattice sum"""
        estimate = empirical_covariance(basis, 4000, z, seed=1)
        assert estimate.relative_error(2.0 * basis.kappa_grid) < 0.1

    def test_relative_error_scale(self):
        """Test the deviation is divided by the scale, and left raw for a zero scale"""
        estimate = CovarianceEstimate(np.array([[1.0, 0.0], [0.0, 1.5]]), np.eye(2), samples=10, base_points=4)
        assert estimate.relative_error(2.0) == pytest.approx(0.25)
        assert estimate.relative_error(0.0) == pytest.approx(0.5)

    def test_white_in_time(self, basis):
        """Test that consecutive steps are uncorrelated"""
        assert temporal_correlation(basis, 4000, seed=2) < 4.0 / math.sqrt(4000)
