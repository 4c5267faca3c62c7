from typing import List, Literal, Optional

from pydantic import BaseModel, Field, root_validator, validator

FAMILIES = ("kraichnan", "band", "tabulated", "mollified")


class CovarianceSpec(BaseModel):
    """
    Radial spectral density g(|xi|) of the noise covariance.

    kraichnan: g = c * ell^-lambda * |xi|^-(d+lambda) on [1/ell, 2/ell]
    band:      g = height on [a, b]
    tabulated: piecewise linear through (|xi|, g) points, zero outside the table
    mollified: base density times exp(-|xi|^2 / n_mol)
    """

    family: Literal["kraichnan", "band", "tabulated", "mollified"]
    dim: int = 2
    ell: Optional[float] = None
    lam: Optional[float] = Field(None, alias="lambda")
    a: Optional[float] = None
    b: Optional[float] = None
    height: Optional[float] = None
    table_path: Optional[str] = None
    points: Optional[List[List[float]]] = None
    base: Optional["CovarianceSpec"] = None
    n_mol: Optional[float] = None

    class Config:
        allow_population_by_field_name = True
        allow_mutation = False

    @validator("dim")
    def dim_supported(cls, v):
        if v not in (1, 2):
            raise ValueError("dim must be 1 or 2")
        return v

    @root_validator(skip_on_failure=True)
    def family_fields(cls, values):
        family = values.get("family")
        if family == "kraichnan":
            if values.get("ell") is None or values["ell"] <= 0:
                raise ValueError("kraichnan spectrum needs ell > 0")
            if values.get("lam") is None:
                values["lam"] = 1.0
            if values["lam"] <= 0:
                raise ValueError("kraichnan spectrum needs lambda > 0")
        elif family == "band":
            a, b, height = values.get("a"), values.get("b"), values.get("height")
            if a is None or b is None or not 0 <= a < b:
                raise ValueError("band spectrum needs 0 <= a < b")
            if height is None:
                values["height"] = 1.0
            elif height < 0:
                raise ValueError("band height must be non-negative")
        elif family == "tabulated":
            if values.get("table_path") is None and values.get("points") is None:
                raise ValueError("tabulated spectrum needs table_path or points")
            points = values.get("points")
            if points is not None:
                if len(points) < 2 or any(len(row) != 2 for row in points):
                    raise ValueError("points must be at least two (|xi|, g) pairs")
                radii = [row[0] for row in points]
                if any(r < 0 for r in radii) or any(r1 >= r2 for r1, r2 in zip(radii, radii[1:])):
                    raise ValueError("tabulated radii must be non-negative and strictly increasing")
                if any(row[1] < 0 for row in points):
                    raise ValueError("tabulated density must be non-negative")
        elif family == "mollified":
            base = values.get("base")
            if base is None:
                raise ValueError("mollified spectrum needs a base spectrum")
            if values.get("n_mol") is None or values["n_mol"] <= 0:
                raise ValueError("mollified spectrum needs n_mol > 0")
            values["dim"] = base.dim
        return values

    @classmethod
    def kraichnan(cls, ell: float, lam: float = 1.0, dim: int = 2) -> "CovarianceSpec":
        return cls(family="kraichnan", ell=ell, lam=lam, dim=dim)

    @classmethod
    def band(cls, a: float, b: float, height: float = 1.0, dim: int = 2) -> "CovarianceSpec":
        return cls(family="band", a=a, b=b, height=height, dim=dim)

    @classmethod
    def tabulated(cls, points: List[List[float]], dim: int = 2) -> "CovarianceSpec":
        return cls(family="tabulated", points=points, dim=dim)

    def label(self) -> str:
        if self.family == "kraichnan":
            return f"kraichnan(ell={self.ell:g}, lambda={self.lam:g})"
        if self.family == "band":
            return f"band({self.a:g}, {self.b:g}, height={self.height:g})"
        if self.family == "tabulated":
            return f"tabulated({self.table_path or len(self.points)})"
        return f"mollified({self.base.label()}, n_mol={self.n_mol:g})"


CovarianceSpec.update_forward_refs()
