import math
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field, root_validator, validator

from cli.models.covariance import CovarianceSpec
from utils.validators import validate_lebesgue_exponent

TWO_PI = 2.0 * math.pi
MAX_SEED = (1 << 64) - 1


class NormSpec(BaseModel):
    """Sobolev order (may be negative) or Lebesgue exponent, with the norm family"""

    kind: Literal["homogeneous_sobolev", "inhomogeneous_sobolev", "lebesgue"]
    index: float

    @root_validator(skip_on_failure=True)
    def lebesgue_exponent(cls, values):
        if values["kind"] == "lebesgue" and not values["index"] >= 1.0:
            raise ValueError("Lebesgue exponent must lie in [1, inf]")
        return values

    @property
    def homogeneous(self) -> bool:
        return self.kind == "homogeneous_sobolev"


class SolverConfig(BaseModel):
    kappa: float = Field(..., ge=0)
    dt: float = Field(..., gt=0)
    T: float = Field(..., gt=0)
    dealias: bool = True
    scheme: Literal["exponential_euler"] = "exponential_euler"

    @root_validator(skip_on_failure=True)
    def step_fits_horizon(cls, values):
        if values["dt"] > values["T"]:
            raise ValueError("dt must not exceed T")
        return values

    @property
    def steps(self) -> int:
        return max(int(round(self.T / self.dt)), 1)


class InitialDataConfig(BaseModel):
    """
    bump:     smooth compactly supported exp(1 - 1/(1 - (r/R)^2))
    singular: |x - x0|^-beta times the bump, capped at its cell average
    Euler runs use the antisymmetric pair profile(x - x0) - profile(x + x0).
    """

    kind: Literal["bump", "singular"] = "singular"
    radius: float = Field(1.0, gt=0)
    beta: Optional[float] = None
    center: Optional[List[float]] = None
    amplitude: float = 1.0
    dipole_offset: Optional[float] = None

    def resolved_beta(self, dim: int, p: float) -> float:
        """Singularity strength; defaults to the middle of (d/2, d/p)"""
        if self.beta is not None:
            return self.beta
        return 0.5 * (dim / 2.0 + dim / p)

    def resolved_offset(self) -> float:
        return self.dipole_offset if self.dipole_offset is not None else 1.25 * self.radius


class ExperimentConfig(BaseModel):
    equation: Literal["transport", "euler"]
    d: int = 2
    L: float = Field(TWO_PI, gt=0)
    N: int
    p: float
    alpha: float
    q: Optional[float] = None
    T: float = Field(..., gt=0)
    dt: float = Field(..., gt=0)
    ell_grid: List[float]
    lam: float = Field(1.0, alias="lambda", gt=0)
    samples: int = Field(..., ge=1)
    seed: int = 0
    norm_kind: Literal["homogeneous", "inhomogeneous"] = "homogeneous"
    epsilon: float = Field(0.01, gt=0)
    dealias: bool = True
    initial: InitialDataConfig = InitialDataConfig()
    l_doubling: bool = False
    enforce_statistical_gates: bool = True
    diagnostics_paths: int = Field(0, ge=0)
    snapshot_paths: int = Field(0, ge=0)
    snapshot_every: int = Field(0, ge=0)
    sup_route_delta: Optional[float] = None

    class Config:
        allow_population_by_field_name = True

    @validator("d")
    def dim_supported(cls, v):
        if v not in (1, 2):
            raise ValueError("d must be 1 or 2")
        return v

    @validator("N")
    def grid_points_even(cls, v):
        if v < 4 or v % 2:
            raise ValueError("N must be even and at least 4")
        return v

    @validator("p")
    def lebesgue_window(cls, v):
        if not validate_lebesgue_exponent(v):
            raise ValueError("p must lie in (1, 2]")
        return v

    @validator("q")
    def moment_order(cls, v):
        if v is not None and v < 1.0:
            raise ValueError("q must be at least 1")
        return v

    @validator("ell_grid")
    def ell_values(cls, v):
        if not v:
            raise ValueError("ell_grid must not be empty")
        if any(ell <= 0 for ell in v):
            raise ValueError("every ell must be positive")
        if len(set(v)) != len(v):
            raise ValueError("ell values must be distinct")
        return v

    @validator("seed")
    def seed_range(cls, v):
        if not 0 <= v <= MAX_SEED:
            raise ValueError("seed must be an unsigned 64-bit integer")
        return v

    @root_validator(skip_on_failure=True)
    def step_fits_horizon(cls, values):
        if values["dt"] > values["T"]:
            raise ValueError("dt must not exceed T")
        return values

    @property
    def conjugate_exponent(self) -> float:
        return self.p / (self.p - 1.0)

    @property
    def noise_exponent(self) -> float:
        """r = p / (2 - p), the Lebesgue index of the noise spectrum in the bounds"""
        return math.inf if self.p == 2.0 else self.p / (2.0 - self.p)

    @property
    def moment(self) -> float:
        if self.q is not None:
            return self.q
        if self.equation == "transport":
            return 2.0
        return float(math.ceil(self.conjugate_exponent) + 1)

    @property
    def steps(self) -> int:
        return max(int(round(self.T / self.dt)), 1)

    def norm_spec(self) -> NormSpec:
        kind = "homogeneous_sobolev" if self.norm_kind == "homogeneous" else "inhomogeneous_sobolev"
        return NormSpec(kind=kind, index=-self.alpha)

    def spectrum(self, ell: float) -> CovarianceSpec:
        return CovarianceSpec.kraichnan(ell=ell, lam=self.lam, dim=self.d)

    def solver_config(self, kappa: float) -> SolverConfig:
        return SolverConfig(kappa=kappa, dt=self.dt, T=self.T, dealias=self.dealias)

    def doubled(self) -> "ExperimentConfig":
        """Same physics on a box twice as large at the same resolution"""
        return self.copy(update={"L": 2.0 * self.L, "N": 2 * self.N})

    def echo(self) -> Dict[str, Any]:
        return self.dict(by_alias=True)


class NoiseValidationConfig(BaseModel):
    dim: int = 2
    L: float = Field(TWO_PI, gt=0)
    N: int = 256
    spectra: List[CovarianceSpec] = []
    ell_grid: List[float] = []
    lam: float = Field(1.0, alias="lambda", gt=0)
    samples: int = Field(2000, ge=2)
    seed: int = 0
    n_mol: Optional[float] = None
    base_points_per_axis: int = Field(8, ge=1)
    divergence_samples: int = Field(64, ge=1)
    displacements: List[List[float]] = [[0.0, 0.0], [0.1, 0.05]]
    kappa_tolerance: float = Field(0.02, gt=0)
    covariance_tolerance: float = Field(0.05, gt=0)

    class Config:
        allow_population_by_field_name = True

    @validator("N")
    def grid_points_even(cls, v):
        if v < 4 or v % 2:
            raise ValueError("N must be even and at least 4")
        return v

    @validator("seed")
    def seed_range(cls, v):
        if not 0 <= v <= MAX_SEED:
            raise ValueError("seed must be an unsigned 64-bit integer")
        return v

    @root_validator(skip_on_failure=True)
    def some_spectrum(cls, values):
        if not values["spectra"] and not values["ell_grid"]:
            raise ValueError("give at least one spectrum or an ell_grid")
        if any(spec.dim != values["dim"] for spec in values["spectra"]):
            raise ValueError("every spectrum must match the grid dimension")
        if any(len(z) != values["dim"] for z in values["displacements"]):
            raise ValueError("displacements must have one entry per dimension")
        return values

    def all_spectra(self) -> List[CovarianceSpec]:
        kraichnan = [CovarianceSpec.kraichnan(ell=ell, lam=self.lam, dim=self.dim) for ell in self.ell_grid]
        return list(self.spectra) + kraichnan


class PropsConfig(BaseModel):
    """Keyword overrides handed to a property suite"""

    seed: int = 0
    parameters: Dict[str, Any] = {}
