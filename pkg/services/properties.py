"""
Deterministic property suites run by `props <selector>`.

Each suite returns a PropertyReport; a check with gated=False is reported but
does not decide the verdict. Random inputs come from the PROPERTY stream of the
counter-based generator, so a suite is reproducible from its seed.
"""
import inspect
import logging
import math
from typing import Callable, Dict, Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from cli.models.covariance import CovarianceSpec
from cli.models.experiment import TWO_PI, InitialDataConfig, NormSpec, SolverConfig
from cli.models.results import PropertyCheck, PropertyReport
from core.exceptions import ConfigError, HermitianViolation, ParameterOutOfRange
from services import oracles
from services.grid_fourier import (
    Grid,
    ScalarField,
    SpectralField,
    curl_hat,
    dealias_mask,
    divergence_hat,
    drop_nyquist,
    forward_transform,
    gradient,
    gradient_hat,
    heat_multiplier,
    inverse_transform,
)
from services.initial_data import initial_field, random_band_limited
from services.noise import (
    NoiseBasis,
    build_basis,
    kappa as noise_kappa,
    kraichnan_closed_form,
    kraichnan_normalization,
    sample_increment,
    spectral_norm,
)
from services.norms import (
    fractional_laplacian,
    interpolation_check,
    interpolation_constant,
    interpolation_theta,
    lebesgue_norm,
    sobolev_norm,
    spectral_sobolev_norm,
)
from services.rng import SeedCoords, property_generator
from services.solvers import PathState, biot_savart, mild_identity_defect, step_euler, step_nse, step_transport

logger = logging.getLogger(__name__)


def _at_most(name: str, value: float, bound: float, gated: bool = True, detail: str = "") -> PropertyCheck:
    return PropertyCheck(name=name, passed=bool(value <= bound), value=float(value), bound=float(bound), gated=gated, detail=detail)


# ---------------------------------------------------------------------------
# Heat semigroup
# ---------------------------------------------------------------------------

def smoothing_constant(kappa_: float, rho: float) -> float:
    """sup_s s^{rho/2} e^{-s} kappa^{-rho/2} = (rho/(2 kappa))^{rho/2} e^{-rho/2}"""
    return (rho / (2.0 * kappa_)) ** (rho / 2.0) * math.exp(-rho / 2.0)


def continuity_constant(kappa_: float, rho: float) -> float:
    """kappa^{rho/2} sup_s (1 - e^{-s}) s^{-rho/2}; the sup is 1 at rho = 2 (s -> 0)"""
    if not 0.0 < rho <= 2.0:
        raise ParameterOutOfRange(f"continuity constant needs rho in (0, 2], got {rho}")
    if rho == 2.0:
        return kappa_
    best = minimize_scalar(
        lambda log_s: -(-math.expm1(-math.exp(log_s))) * math.exp(-rho * log_s / 2.0),
        bounds=(-20.0, 10.0),
        method="bounded",
        options={"xatol": 1e-10},
    )
    return kappa_ ** (rho / 2.0) * -best.fun


def heat_smoothing(
    seed: int = 0,
    samples: int = 100,
    N: int = 32,
    L: float = TWO_PI,
    kappa: float = 0.25,
    rhos: Sequence[float] = (0.5, 1.0),
    orders: Sequence[float] = (-1.2, 0.0, 0.5),
    times: int = 13,
    margin: float = 1e-6,
) -> PropertyReport:
    """
    Smoothing ||e^{kappa Delta t} u||_{H^{a+rho}} t^{rho/2} / ||u||_{H^a} and continuity
    ||(I - e^{kappa Delta t}) u||_{H^{a-rho}} / (t^{rho/2} ||u||_{H^a}) on random
    band-limited fields over t in [1e-3, 1], against the closed-form suprema.
    """
    grid = Grid(2, L, N)
    rng = property_generator(seed, 1)
    t_grid = np.logspace(-3.0, 0.0, times)
    k2 = grid.k_squared
    bracket = 1.0 + k2
    nonzero = k2 > 0
    safe_k2 = np.where(nonzero, k2, 1.0)
    heat = np.exp(-kappa * t_grid[:, None, None] * k2[None])

    worst: Dict[str, float] = {}
    for _ in range(samples):
        u = random_band_limited(grid, rng, mean_zero=False)
        F = forward_transform(u).coeffs
        power = (F.real ** 2 + F.imag ** 2) * bracket ** rng.uniform(-2.0, 1.0)
        for rho in rhos:
            c_smooth = smoothing_constant(kappa, rho)
            c_cont = continuity_constant(kappa, rho)
            t_rho = t_grid ** (rho / 2.0)
            for order in orders:
                w_in = bracket ** order
                w_hom = np.where(nonzero, safe_k2 ** order, 0.0)
                den_in = float(np.sum(w_in * power))
                den_hom = float(np.sum(w_hom * power))

                smooth_in = np.sqrt(np.sum(w_in * bracket ** rho * heat ** 2 * power, axis=(1, 2)) / den_in) * t_rho
                bound_in = np.sqrt(t_grid ** rho + c_smooth ** 2)
                smooth_hom = np.sqrt(np.sum(w_hom * safe_k2 ** rho * heat ** 2 * power, axis=(1, 2)) / den_hom) * t_rho
                cont = np.sqrt(np.sum(w_in * bracket ** -rho * (1.0 - heat) ** 2 * power, axis=(1, 2)) / den_in) / t_rho

                for name, ratio in (
                    (f"smoothing-inhomogeneous-rho{rho:g}", float(np.max(smooth_in / bound_in))),
                    (f"smoothing-homogeneous-rho{rho:g}", float(np.max(smooth_hom)) / c_smooth),
                    (f"continuity-rho{rho:g}", float(np.max(cont)) / c_cont),
                ):
                    worst[name] = max(worst.get(name, 0.0), ratio)

    checks = [_at_most(name, value, 1.0 + margin, detail="max ratio / closed-form bound") for name, value in sorted(worst.items())]
    params = {"seed": seed, "samples": samples, "N": N, "L": L, "kappa": kappa, "rhos": list(rhos), "orders": list(orders)}
    return PropertyReport.from_checks("heat-smoothing", checks, params)


# ---------------------------------------------------------------------------
# Interpolation
# ---------------------------------------------------------------------------

def interpolation(
    seed: int = 0,
    samples: int = 1000,
    N: int = 32,
    L: float = 20.0,
    gamma: float = 0.4,
    alpha: float = 0.8,
    beta: float = 1.2,
    margin: float = 1e-6,
) -> PropertyReport:
    """
    Mixed interpolation inequality on random mean-zero fields with random
    spectral tilt. The box is larger than 2*pi so lattice modes fall on both
    sides of |xi| = 1.
    """
    grid = Grid(2, L, N)
    rng = property_generator(seed, 2)
    theta = interpolation_theta(gamma, alpha, beta)
    constant = interpolation_constant(gamma, alpha, beta)

    worst = 0.0
    for _ in range(samples):
        f = fractional_laplacian(random_band_limited(grid, rng), rng.uniform(-1.5, 1.5))
        worst = max(worst, interpolation_check(f, gamma, alpha, beta).ratio)

    # one cosine mode above |xi| = 1: closed form for the ratio
    j = int(math.ceil(1.0 / grid.dk))
    xi = j * grid.dk
    mode = ScalarField(grid, np.cos(xi * grid.coordinates[0]))
    single = interpolation_check(mode, gamma, alpha, beta)
    shift = theta * gamma / (1.0 - theta)
    closed = xi ** -alpha / ((1.0 + xi * xi) ** (-gamma * theta / 2.0) * (xi ** (-beta - shift) + xi ** -beta) ** (1.0 - theta))
    zero = interpolation_check(ScalarField.zeros(grid), gamma, alpha, beta)

    checks = [
        _at_most("random-fields", worst, constant * (1.0 + margin), detail=f"theta={theta:.4f}"),
        _at_most("random-fields-loose-constant", worst, 2.0 ** (theta * gamma / (1.0 - theta)) * (1.0 + margin)),
        _at_most("single-mode-at-most-one", single.ratio, 1.0 + 1e-12, detail=f"|xi|={xi:.4f}"),
        _at_most("single-mode-closed-form", abs(single.ratio - closed) / closed, 1e-10),
        _at_most("zero-field", zero.ratio, 0.0),
    ]
    params = {"seed": seed, "samples": samples, "N": N, "L": L, "gamma": gamma, "alpha": alpha, "beta": beta}
    return PropertyReport.from_checks("interp", checks, params)


# ---------------------------------------------------------------------------
# Deterministic Navier-Stokes
# ---------------------------------------------------------------------------

def _gradient_lp(grid: Grid, omega_hat: np.ndarray, p: float) -> float:
    components = [inverse_transform(SpectralField(grid, g)).values for g in gradient_hat(SpectralField(grid, omega_hat))]
    return lebesgue_norm(ScalarField(grid, np.sqrt(sum(c * c for c in components))), p)


def _quartile_trend(times: np.ndarray, values: np.ndarray, horizon: float) -> float:
    """max over the last quarter of the horizon / max over the first quarter"""
    first = values[times <= 0.25 * horizon]
    last = values[times >= 0.75 * horizon]
    return float(np.max(last) / np.max(first))


def _enstrophy_balance(N: int, kappa_: float, dt: float, steps: int) -> PropertyCheck:
    """Taylor-Green vorticity: d/dt ||w||_2^2 = -2 kappa ||grad w||_2^2, by finite differences"""
    grid = Grid(2, TWO_PI, N)
    x1, x2 = grid.coordinates
    state = PathState.start(ScalarField(grid, np.cos(x1) * np.cos(x2)))
    cfg = SolverConfig(kappa=kappa_, dt=dt, T=dt * steps)
    worst = 0.0
    monotone = True
    for _ in range(steps):
        before = spectral_sobolev_norm(SpectralField(grid, state.f_hat), 0.0, False) ** 2
        dissipation = 2.0 * kappa_ * spectral_sobolev_norm(SpectralField(grid, state.f_hat), 1.0, True) ** 2
        state = step_nse(state, cfg)
        after = spectral_sobolev_norm(SpectralField(grid, state.f_hat), 0.0, False) ** 2
        monotone &= after < before
        rate = (after - before) / dt
        worst = max(worst, abs(rate + dissipation) / dissipation)
    return PropertyCheck(
        name="enstrophy-balance",
        passed=monotone and worst <= 10.0 * kappa_ * dt,
        value=worst,
        bound=10.0 * kappa_ * dt,
        detail="relative gap of the finite-difference enstrophy rate; decay must be monotone",
    )


def nse_bounds(
    seed: int = 0,
    N: int = 256,
    L: float = TWO_PI,
    T: float = 1.0,
    p: float = 1.6,
    kappa: float = 0.25,
    radius: float = 0.25,
    dt: Optional[float] = None,
    records: int = 64,
) -> PropertyReport:
    """
    A priori bounds for Navier-Stokes from a singular dipole in L^p:
    ||w_t||_p stays below ||w_0||_p, t^{1/2} ||grad w_t||_p shows no growth,
    and t^{1/p - 1/r} ||w_t||_r is reported for r = 2, 4.
    """
    grid = Grid(2, L, N)
    omega0 = initial_field(InitialDataConfig(kind="singular", radius=radius), grid, p, "euler")
    speed = float(np.max(biot_savart(omega0).magnitude()))
    if dt is None:
        dt = min(2e-3, 0.25 * L / (N * max(speed, 1e-12)))
    steps = int(math.ceil(T / dt))
    dt = T / steps
    cfg = SolverConfig(kappa=kappa, dt=dt, T=T)
    stride = max(1, steps // records)
    logger.info("nse-bounds: N=%d, dt=%.3e, %d steps, initial max|u|=%.3f", N, dt, steps, speed)

    norm0 = lebesgue_norm(omega0, p)
    state = PathState.start(omega0)
    times, lp, smoothing, decay2, decay4 = [], [], [], [], []
    for _ in range(steps):
        state = step_nse(state, cfg)
        if state.step % stride and state.step != steps:
            continue
        omega = state.f
        t = state.time
        times.append(t)
        lp.append(lebesgue_norm(omega, p) / norm0)
        smoothing.append(math.sqrt(t) * _gradient_lp(grid, state.f_hat, p) / norm0)
        decay2.append(t ** (1.0 / p - 0.5) * lebesgue_norm(omega, 2.0) / norm0)
        decay4.append(t ** (1.0 / p - 0.25) * lebesgue_norm(omega, 4.0) / norm0)

    times = np.asarray(times)
    checks = [
        _at_most("lp-nonincrease", max(lp), 1.02),
        _at_most("gradient-smoothing-trend", _quartile_trend(times, np.asarray(smoothing), T), 1.2,
                 detail=f"sup t^1/2 ||grad w||_p / ||w0||_p = {max(smoothing):.4f}"),
        _at_most("lp-l2-decay-trend", _quartile_trend(times, np.asarray(decay2), T), 1.2, gated=False,
                 detail=f"sup = {max(decay2):.4f}"),
        _at_most("lp-l4-decay-trend", _quartile_trend(times, np.asarray(decay4), T), 1.2, gated=False,
                 detail=f"sup = {max(decay4):.4f}"),
        _enstrophy_balance(64, kappa, 1e-3, 100),
    ]
    params = {"N": N, "L": L, "T": T, "p": p, "kappa": kappa, "radius": radius, "dt": dt}
    return PropertyReport.from_checks("nse-bounds", checks, params)


# ---------------------------------------------------------------------------
# Transport paths
# ---------------------------------------------------------------------------

def _max_lp_deviation(grid: Grid, basis: NoiseBasis, f0: ScalarField, p: float, cfg: SolverConfig, seed: int, sample: int) -> float:
    norm0 = lebesgue_norm(f0, p)
    state = PathState.start(f0)
    worst = 0.0
    for n in range(cfg.steps):
        state = step_transport(state, basis, cfg, SeedCoords(seed, sample, n))
        worst = max(worst, abs(lebesgue_norm(state.f, p) / norm0 - 1.0))
    return worst


def lp_conservation(
    seed: int = 0,
    N: int = 128,
    L: float = TWO_PI,
    p: float = 1.5,
    ell: float = 0.2,
    T: float = 0.25,
    dts: Sequence[float] = (4e-3, 1e-3),
    samples: int = 32,
    kind: str = "bump",
    radius: float = 1.0,
) -> PropertyReport:
    """
    Sup-in-time deviation of ||f_t||_p / ||f_0||_p from 1 at a coarse and a fine dt,
    averaged over paths. Order one half predicts a factor 2 for dt / 4.
    """
    if len(dts) != 2:
        raise ParameterOutOfRange("lp-conservation takes exactly two time steps, coarse then fine")
    grid = Grid(2, L, N)
    basis = build_basis(CovarianceSpec.kraichnan(ell=ell), grid)
    f0 = initial_field(InitialDataConfig(kind=kind, radius=radius), grid, p, "transport")
    deviations = []
    for dt in dts:
        cfg = SolverConfig(kappa=basis.kappa_grid, dt=dt, T=T)
        deviations.append(float(np.mean([_max_lp_deviation(grid, basis, f0, p, cfg, seed, m) for m in range(samples)])))
    coarse, fine = deviations
    ratio = coarse / fine if fine > 0 else math.inf
    checks = [
        _at_most("coarse-deviation", coarse, 0.05, detail=f"dt={dts[0]:g}"),
        PropertyCheck(
            name="refinement-ratio",
            passed=bool(1.4 <= ratio <= 2.6),
            value=ratio,
            bound=2.6,
            detail=f"deviation {coarse:.3e} at dt={dts[0]:g}, {fine:.3e} at dt={dts[1]:g}; expected in [1.4, 2.6]",
        ),
    ]
    params = {"seed": seed, "N": N, "p": p, "ell": ell, "T": T, "dts": list(dts), "samples": samples, "kind": kind}
    return PropertyReport.from_checks("lp-conservation", checks, params)


def mild_identity(
    seed: int = 0,
    N: int = 32,
    L: float = TWO_PI,
    ell: float = 0.5,
    p: float = 1.5,
    dt: float = 2e-3,
    steps: int = 50,
    samples: int = 4,
) -> PropertyReport:
    """f - fbar - Z = 0 at every step; Z after one step against its unrolled definition"""
    grid = Grid(2, L, N)
    basis = build_basis(CovarianceSpec.kraichnan(ell=ell), grid)
    f0 = initial_field(InitialDataConfig(kind="singular"), grid, p, "transport")
    cfg = SolverConfig(kappa=basis.kappa_grid, dt=dt, T=dt * steps)
    scale = lebesgue_norm(f0, 2.0)

    worst = 0.0
    for m in range(samples):
        state = PathState.start(f0)
        for n in range(steps):
            state = step_transport(state, basis, cfg, SeedCoords(seed, m, n))
            worst = max(worst, mild_identity_defect(state) / scale)

    coords = SeedCoords(seed, 0, 0)
    increment = sample_increment(basis, dt, coords)
    first = step_transport(PathState.start(f0), basis, cfg, coords, increment)
    grad = gradient(f0)
    product = sum(w.values * g.values for w, g in zip(increment.dW.components, grad.components))
    direct = -heat_multiplier(grid, cfg.kappa, dt).coeffs * dealias_mask(grid).coeffs * forward_transform(ScalarField(grid, product)).coeffs

    empty = NoiseBasis.empty(grid)
    quiet = step_transport(PathState.start(f0), empty, cfg, coords)
    checks = [
        _at_most("identity-defect", worst, 1e-10, detail="max ||f - fbar - Z||_2 / ||f0||_2"),
        _at_most("first-step-convolution", oracles.relative_gap(first.Z_hat, direct), 1e-12),
        _at_most("zero-noise", float(np.max(np.abs(quiet.Z_hat))) + float(np.max(np.abs(quiet.f_hat - quiet.fbar_hat))), 0.0),
    ]
    params = {"seed": seed, "N": N, "ell": ell, "p": p, "dt": dt, "steps": steps, "samples": samples}
    return PropertyReport.from_checks("mild-identity", checks, params)


# ---------------------------------------------------------------------------
# Oracles and spectra
# ---------------------------------------------------------------------------

def dense_oracle(seed: int = 0, N: int = 8, L: float = TWO_PI, dt: float = 1e-2, tolerance: float = 1e-12) -> PropertyReport:
    """One step of every solver and every norm against the dense reference on a small grid"""
    grid = Grid(2, L, N)
    rng = property_generator(seed, 6)
    f = random_band_limited(grid, rng, cutoff=N // 2 - 1, mean_zero=False)
    omega = random_band_limited(grid, rng, cutoff=N // 2 - 1)
    coords = SeedCoords(seed, 0, 0)
    checks = [
        _at_most("forward-transform", oracles.relative_gap(forward_transform(f).coeffs, oracles.brute_force_dft(f.values, grid)), tolerance),
        _at_most(
            "inverse-transform",
            oracles.relative_gap(
                inverse_transform(forward_transform(f)).values,
                np.real(np.linalg.solve(oracles.dense_dft_matrix(grid), forward_transform(f).coeffs.ravel())).reshape(grid.shape),
            ),
            tolerance,
        ),
    ]

    spectra = {
        "single-shell": CovarianceSpec.band(a=0.9, b=1.1, height=0.1),
        "band": CovarianceSpec.band(a=0.9, b=3.0, height=0.1),
    }
    for label, spec in spectra.items():
        basis = build_basis(spec, grid)
        cfg = SolverConfig(kappa=basis.kappa_grid, dt=dt, T=dt)
        spectral = step_transport(PathState.start(f), basis, cfg, coords).f.values
        checks.append(_at_most(f"transport-{label}", oracles.relative_gap(spectral, oracles.dense_transport_step(f.values, basis, cfg, coords)), tolerance))
        spectral = step_euler(PathState.start(omega), basis, cfg, coords).f.values
        checks.append(_at_most(f"euler-{label}", oracles.relative_gap(spectral, oracles.dense_euler_step(omega.values, basis, cfg, coords)), tolerance))

    cfg = SolverConfig(kappa=0.25, dt=dt, T=dt)
    nse = step_nse(PathState.start(omega), cfg).f.values
    checks.append(_at_most("nse", oracles.relative_gap(nse, oracles.dense_nse_step(omega.values, grid, cfg)), tolerance))
    degenerate = step_euler(PathState.start(omega), NoiseBasis.empty(grid), cfg, coords).f.values
    checks.append(_at_most("euler-without-noise-is-nse", float(np.max(np.abs(degenerate - nse))), 1e-14))

    for order, homogeneous in ((-1.0, True), (0.5, True), (-0.7, False), (1.0, False)):
        kind = "homogeneous_sobolev" if homogeneous else "inhomogeneous_sobolev"
        value = sobolev_norm(omega, NormSpec(kind=kind, index=order))
        direct = oracles.direct_sobolev_norm(omega.values, grid, order, homogeneous)
        checks.append(_at_most(f"{kind}-{order:g}", abs(value - direct) / direct, tolerance))
    for p in (1.0, 1.5, 2.0, math.inf):
        value = lebesgue_norm(f, p)
        direct = oracles.direct_lebesgue_norm(f.values, grid, p)
        checks.append(_at_most(f"lebesgue-{p:g}", abs(value - direct) / direct, tolerance))
    return PropertyReport.from_checks("dense-oracle", checks, {"seed": seed, "N": N, "L": L, "dt": dt})


def kraichnan_scaling(
    ells: Sequence[float] = (0.4, 0.2, 0.1, 0.05),
    r: float = 3.0,
    lam: float = 1.0,
    dim: int = 2,
) -> PropertyReport:
    """Unit mass, kappa = (d-1)/(2d), and the ell^{d(r-1)/r} law of ||g_ell||_r"""
    specs = [CovarianceSpec.kraichnan(ell=ell, lam=lam, dim=dim) for ell in ells]
    masses = [spectral_norm(s, 1.0) for s in specs]
    slope = float(np.polyfit(np.log(ells), np.log([spectral_norm(s, r) for s in specs]), 1)[0])
    expected = dim * (r - 1.0) / r
    closed = kraichnan_closed_form(dim, lam)
    sup_ratios = [spectral_norm(s, math.inf) / (closed * s.ell ** dim) for s in specs]
    checks = [
        _at_most("unit-mass", max(abs(m - 1.0) for m in masses), 1e-8),
        _at_most("lr-slope", abs(slope - expected) / expected, 0.01, detail=f"slope {slope:.6f}, expected {expected:.6f}"),
        _at_most("normalization-closed-form", abs(kraichnan_normalization(dim, lam) / closed - 1.0), 1e-8),
        _at_most("sup-scaling", max(abs(v - 1.0) for v in sup_ratios), 1e-8),
        _at_most("kappa", max(abs(noise_kappa(s) - (dim - 1) / (2.0 * dim)) for s in specs), 1e-8),
    ]
    return PropertyReport.from_checks("kraichnan-scaling", checks, {"ells": list(ells), "r": r, "lambda": lam, "d": dim})


def fourier(seed: int = 0, N: int = 32, L: float = TWO_PI) -> PropertyReport:
    grid = Grid(2, L, N)
    rng = property_generator(seed, 8)
    f = ScalarField(grid, rng.standard_normal(grid.shape))
    F = forward_transform(f)
    physical = grid.cell_volume * float(np.sum(f.values ** 2))
    spectral = grid.spectral_cell * float(np.sum(np.abs(F.coeffs) ** 2))

    j = 3
    xi = j * grid.dk
    mode = forward_transform(ScalarField(grid, np.cos(xi * grid.coordinates[0])))
    expected = grid.volume / (2.0 * (2.0 * math.pi))
    plus = mode.coeffs[j, 0]
    minus = mode.coeffs[-j, 0]

    sine = ScalarField(grid, np.sin(xi * grid.coordinates[0]))
    derivative = gradient(sine).components[0].values

    heat_split = heat_multiplier(grid, 0.3, 0.2).coeffs * heat_multiplier(grid, 0.3, 0.5).coeffs
    mask = dealias_mask(grid).coeffs

    omega = ScalarField(grid, f.values - f.mean())
    u_hat = tuple(forward_transform(c).coeffs for c in biot_savart(omega).components)
    omega_hat = drop_nyquist(forward_transform(omega).coeffs, grid)
    scale = float(np.linalg.norm(omega_hat))
    divergence = float(np.linalg.norm(divergence_hat(grid, u_hat))) / scale
    curl = float(np.linalg.norm(curl_hat(grid, u_hat) - omega_hat)) / scale

    broken = np.zeros(grid.shape, dtype=np.complex128)
    broken[1, 2] = 1.0
    try:
        inverse_transform(SpectralField(grid, broken))
        caught = False
    except HermitianViolation:
        caught = True

    checks = [
        _at_most("parseval", abs(physical - spectral) / physical, 1e-10),
        _at_most("round-trip", oracles.relative_gap(inverse_transform(F).values, f.values), 1e-12),
        _at_most("single-cosine", max(abs(plus - expected), abs(minus - expected)) / expected, 1e-12),
        _at_most("derivative", float(np.max(np.abs(derivative - xi * np.cos(xi * grid.coordinates[0])))) / xi, 1e-12),
        _at_most("heat-semigroup", float(np.max(np.abs(heat_split - heat_multiplier(grid, 0.3, 0.7).coeffs))), 1e-14),
        _at_most("dealias-idempotent", float(np.max(np.abs(mask * mask - mask))), 0.0),
        _at_most("biot-savart-divergence", divergence, 1e-10),
        _at_most("biot-savart-curl", curl, 1e-10),
        PropertyCheck(name="hermitian-violation-detected", passed=caught, value=float(caught), bound=1.0),
    ]
    return PropertyReport.from_checks("fourier", checks, {"seed": seed, "N": N, "L": L})


SUITES: Dict[str, Callable[..., PropertyReport]] = {
    "heat-smoothing": heat_smoothing,
    "interp": interpolation,
    "nse-bounds": nse_bounds,
    "lp-conservation": lp_conservation,
    "mild-identity": mild_identity,
    "dense-oracle": dense_oracle,
    "kraichnan-scaling": kraichnan_scaling,
    "fourier": fourier,
}

SEEDLESS = {"kraichnan-scaling"}


def run_suite(name: str, seed: int = 0, parameters: Optional[Dict] = None) -> PropertyReport:
    """
    Run one suite by selector.

    Raises:
        ConfigError: unknown selector or a parameter the suite does not take
    """
    if name not in SUITES:
        raise ConfigError(f"unknown property suite {name!r}; valid: {', '.join(sorted(SUITES))}")
    kwargs = dict(parameters or {})
    if name not in SEEDLESS:
        kwargs.setdefault("seed", seed)
    suite = SUITES[name]
    try:
        inspect.signature(suite).bind(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {name}: {exc}")
    report = suite(**kwargs)
    for check in report.checks:
        log = logger.info if check.passed or not check.gated else logger.warning
        log("%s/%s: %s (value %.4g, bound %s)", name, check.name, "ok" if check.passed else "FAIL", check.value,
            "-" if check.bound is None else f"{check.bound:.4g}")
    return report
