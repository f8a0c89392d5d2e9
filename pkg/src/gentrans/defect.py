"""Transversality defects and the stratum of a point.

For a family F and a point p = (x, a) with F(p) on Z::

    delta_family = ell - dim(image dF_p + T Z)
    delta_slice  = ell - dim(image d(F_a)_x + T Z)

where the slice map F_a only sees the x-columns of the Jacobian.  Off Z
both defects are 0.
"""

from __future__ import annotations

from dataclasses import dataclass

from .geometry import (
    GeometryError,
    ParamFamily,
    PointXA,
    SubmanifoldSpec,
    contains,
    membership_margin,
    on_submanifold,
    tangent_of_Z,
)
from .linalg import EXACT, Matrix, ScalarBackend, dim_span_union
from .sampling import SamplingPlan

__all__ = [
    "DomainError",
    "Stratum",
    "DefectReport",
    "jacobian_family",
    "delta_family",
    "delta_slice",
    "is_transverse_at",
    "classify",
    "delta_sup_estimate",
]


class DomainError(GeometryError):
    """The point is not in the family's open domain U."""


@dataclass(frozen=True)
class Stratum:
    tag: str  # NotOnZ | Transverse | W | Wtilde
    rho: int | None = None

    def __str__(self) -> str:
        return f"Wtilde({self.rho})" if self.tag == "Wtilde" else self.tag

    @classmethod
    def parse(cls, text: str) -> "Stratum":
        if text.startswith("Wtilde(") and text.endswith(")"):
            return cls("Wtilde", int(text[7:-1]))
        if text in ("NotOnZ", "Transverse", "W"):
            return cls(text)
        raise ValueError(f"unknown stratum {text!r}")


NOT_ON_Z = Stratum("NotOnZ")
TRANSVERSE = Stratum("Transverse")
W = Stratum("W")


@dataclass(frozen=True)
class DefectReport:
    point: PointXA
    value: tuple
    on_z: bool
    delta_family: int
    delta_slice: int
    sum_dim_family: int | None
    sum_dim_slice: int | None
    stratum: Stratum
    mather_hypothesis: bool
    margin: float

    def as_dict(self) -> dict:
        return {
            "point": [str(v) for v in self.point.coords],
            "value": [str(v) for v in self.value],
            "on_z": self.on_z,
            "delta_family": self.delta_family,
            "delta_slice": self.delta_slice,
            "sum_dim_family": self.sum_dim_family,
            "sum_dim_slice": self.sum_dim_slice,
            "stratum": str(self.stratum),
            "mather_hypothesis": self.mather_hypothesis,
            "margin": self.margin,
        }


def _require_domain(F: ParamFamily, p: PointXA, backend: ScalarBackend) -> None:
    if len(p.x) != F.n or len(p.a) != F.m:
        raise DomainError(f"point arity {len(p.x)}+{len(p.a)}, expected {F.n}+{F.m}")
    if not contains(F.domain, p, backend):
        raise DomainError(f"point {p} is outside the domain U")


def jacobian_family(F: ParamFamily, p: PointXA, backend: ScalarBackend = EXACT) -> Matrix:
    """ell x (n+m) Jacobian, columns x1..xn, a1..am."""
    p = p.coerce(backend)
    _require_domain(F, p, backend)
    return F.jacobian(p, backend)


def _defects(F, Z, p, backend):
    """(on_z, value, dim_family, dim_slice); dims are None off Z."""
    value = F.value(p, backend)
    if not on_submanifold(Z, value, backend):
        return False, value, None, None
    J = F.jacobian(p, backend)
    T = tangent_of_Z(Z, value, backend).columns
    dim_fam = dim_span_union(J, T, backend)
    dim_sl = dim_span_union(J.select_cols(range(F.n)), T, backend)
    return True, value, dim_fam, dim_sl


def delta_family(F: ParamFamily, Z: SubmanifoldSpec, p: PointXA,
                 backend: ScalarBackend = EXACT) -> int:
    """Defect of the whole family at (x, a)."""
    return classify(F, Z, p, backend).delta_family


def delta_slice(F: ParamFamily, Z: SubmanifoldSpec, p: PointXA,
                backend: ScalarBackend = EXACT) -> int:
    """Defect of x -> F(x, a) at x."""
    return classify(F, Z, p, backend).delta_slice


def is_transverse_at(map_kind: str, F: ParamFamily, Z: SubmanifoldSpec, p: PointXA,
                     backend: ScalarBackend = EXACT) -> bool:
    if map_kind not in ("family", "slice"):
        raise ValueError("map_kind must be 'family' or 'slice'")
    rep = classify(F, Z, p, backend)
    return (rep.delta_family if map_kind == "family" else rep.delta_slice) == 0


def _stratum(on_z: bool, d_fam: int, d_sl: int) -> Stratum:
    if not on_z:
        return NOT_ON_Z
    if d_sl == 0:
        return TRANSVERSE
    if d_sl == d_fam:
        return W
    if d_sl > d_fam:
        return Stratum("Wtilde", d_fam)
    # impossible: the slice image is contained in the family image
    raise AssertionError(f"slice defect {d_sl} below family defect {d_fam}")


def classify(F: ParamFamily, Z: SubmanifoldSpec, p: PointXA,
             backend: ScalarBackend = EXACT) -> DefectReport:
    """Both defects, the stratum, and the Mather-hypothesis flag at ``p``."""
    if Z.ell != F.ell:
        raise GeometryError(f"Z lives in R^{Z.ell} but F maps to R^{F.ell}")
    p = p.coerce(backend)
    _require_domain(F, p, backend)
    on_z, value, dim_fam, dim_sl = _defects(F, Z, p, backend)
    if on_z:
        d_fam, d_sl = F.ell - dim_fam, F.ell - dim_sl
    else:
        d_fam = d_sl = 0
    return DefectReport(
        point=p,
        value=value,
        on_z=on_z,
        delta_family=d_fam,
        delta_slice=d_sl,
        sum_dim_family=dim_fam,
        sum_dim_slice=dim_sl,
        stratum=_stratum(on_z, d_fam, d_sl),
        mather_hypothesis=(d_sl == 0 or d_fam < d_sl),
        margin=membership_margin(Z, value, backend),
    )


def delta_sup_estimate(F: ParamFamily, Z: SubmanifoldSpec, plan: SamplingPlan,
                       backend: ScalarBackend = EXACT) -> int:
    """Largest family defect seen over the plan's samples.

    This is only a lower bound for the supremum over all of U: the plan
    covers a bounded box with finitely many points.
    """
    best = 0
    for p in plan.points():
        p = p.coerce(backend)
        if contains(F.domain, p, backend):
            best = max(best, classify(F, Z, p, backend).delta_family)
    return best
