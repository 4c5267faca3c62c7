import math
from datetime import datetime
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, root_validator, validator


class RateFit(BaseModel):
    ell_values: List[float]
    error_estimates: List[float]
    stderrs: List[float]
    slope: float
    intercept: float
    slope_ci: Tuple[float, float]
    ci_method: str
    predicted_exponent: float
    sup_route_exponent: Optional[float] = None
    route: str
    bound_powers: Tuple[float, float]
    bound_rhs: List[float]
    implied_constants: List[float]
    bound_constant: float
    constant_spread: float
    moment: float

    @validator("error_estimates", each_item=True)
    def estimate_nonnegative(cls, v):
        if v < 0 or not math.isfinite(v):
            raise ValueError("error estimates must be finite and nonnegative")
        return v

    @root_validator(skip_on_failure=True)
    def interval_contains_slope(cls, values):
        lo, hi = values["slope_ci"]
        if not lo <= values["slope"] <= hi:
            raise ValueError("slope_ci must contain the slope")
        return values


class EstimateRow(BaseModel):
    ell: float
    estimate: float
    stderr: float
    bound_rhs: float
    z_estimate: Optional[float] = None
    z_stderr: Optional[float] = None
    max_identity_defect: Optional[float] = None


class ConvolutionReport(BaseModel):
    ell: float
    max_defect: float
    tolerance: float
    z_estimate: float
    z_stderr: float
    z_bound_ratio: float


class LDoublingReport(BaseModel):
    ell: float
    baseline: float
    doubled: float
    relative_change: float
    passed: bool


class GateReport(BaseModel):
    """Statistical gates of a rate run; a gate that does not apply is None"""

    monotone: List[bool] = []
    slope_ok: Optional[bool] = None
    slope_floor: Optional[float] = None
    constants_ok: Optional[bool] = None
    l_doubling_ok: Optional[bool] = None
    enforced: bool = True

    @property
    def statistical_passed(self) -> bool:
        return all(self.monotone) and self.slope_ok is not False and self.constants_ok is not False


class PropertyCheck(BaseModel):
    name: str
    passed: bool
    value: float
    bound: Optional[float] = None
    gated: bool = True
    detail: str = ""


class PropertyReport(BaseModel):
    suite: str
    passed: bool
    checks: List[PropertyCheck]
    parameters: Dict[str, Any] = {}

    @classmethod
    def from_checks(cls, suite: str, checks: List[PropertyCheck], parameters: Optional[Dict[str, Any]] = None) -> "PropertyReport":
        passed = all(c.passed for c in checks if c.gated)
        return cls(suite=suite, passed=passed, checks=checks, parameters=parameters or {})

    def failures(self) -> List[PropertyCheck]:
        return [c for c in self.checks if c.gated and not c.passed]


class SpectrumReport(BaseModel):
    label: str
    n_modes: int
    kappa: float
    kappa_grid: float
    kappa_relative_error: float
    mollified_kappa: Optional[float] = None
    checks: List[PropertyCheck]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.gated)


class NoiseReport(BaseModel):
    grid: Dict[str, Any]
    samples: int
    seed: int
    spectra: List[SpectrumReport]
    passed: bool


class RunManifest(BaseModel):
    command: str
    config: Dict[str, Any]
    seed: int
    started_at: datetime
    finished_at: Optional[datetime] = None
    artifacts: List[str] = []
    code_version: str
    workers: int = 1
    dealias: Optional[bool] = None
