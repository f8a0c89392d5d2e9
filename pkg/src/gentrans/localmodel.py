"""Local models around a point where F meets a slice submanifold Z.

Given a base point (x0, a0) with F(x0, a0) on Z and family defect rho, build

* an enlarged slice Z~ of dimension q + rho containing Z near F(x0, a0),
* a box U~ around the base on which F is transverse to Z~,

and check on samples that F(U~) meets Z only inside Z~ and that passing from
Z to Z~ lowers the slice defect by at most rho.

Three cases, by q = dim Z and the rank of the normal block JF2 (rows of the
zeroed coordinates):

``Q0``            q = 0; keep ell - rho independent rows of JF.
``Q_POS_FULL``    q > 0 and rank JF2 = 0; Z~ is the whole chart.
``Q_POS_PARTIAL`` q > 0 and rank JF2 > 0; keep ell - q - rho independent
                  rows of JF2.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from fractions import Fraction

from .defect import classify, jacobian_family
from .geometry import (
    DomainSpec,
    GeometryError,
    ParamFamily,
    PointXA,
    SubmanifoldSpec,
    contains,
    on_submanifold,
)
from .linalg import EXACT, Matrix, ScalarBackend, independent_rows, rank
from .sampling import SamplingPlan

__all__ = [
    "LocalModelError",
    "LocalModel",
    "LocalVerification",
    "build_local_model",
    "verify_local_model",
    "local_grid_plan",
    "Q0",
    "Q_POS_FULL",
    "Q_POS_PARTIAL",
]

Q0 = "Q0"
Q_POS_FULL = "Q_POS_FULL"
Q_POS_PARTIAL = "Q_POS_PARTIAL"

MAX_SHRINK = 50


class LocalModelError(GeometryError):
    pass


@dataclass(frozen=True)
class LocalVerification:
    properties: dict          # "1".."4" -> bool
    counterexamples: dict     # "1".."4" -> PointXA | None
    block_identity: bool
    samples: int
    samples_on_z: int
    samples_on_ztilde: int

    @property
    def passed(self) -> bool:
        return all(self.properties.values()) and self.block_identity

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "properties": {k: self.properties[k] for k in sorted(self.properties)},
            "counterexamples": {
                k: (None if v is None else [str(c) for c in v.coords])
                for k, v in sorted(self.counterexamples.items())
            },
            "block_identity": self.block_identity,
            "samples": self.samples,
            "samples_on_z": self.samples_on_z,
            "samples_on_ztilde": self.samples_on_ztilde,
        }


@dataclass(frozen=True)
class LocalModel:
    base: PointXA
    rho: int
    q: int
    case_tag: str
    row_permutation: tuple   # 0-based: free rows, kept rows, remaining zeroed rows
    pivot_rows: tuple        # 0-based rows kept as equations of Z~
    ztilde: SubmanifoldSpec
    utilde: DomainSpec
    radius: Fraction
    verification: LocalVerification | None = field(default=None, compare=False)

    @property
    def dim_ztilde(self) -> int:
        return self.ztilde.q

    def as_dict(self) -> dict:
        return {
            "base": [str(v) for v in self.base.coords],
            "case": self.case_tag,
            "q": self.q,
            "rho": self.rho,
            "dim_ztilde": self.dim_ztilde,
            "ztilde_zeroed": list(self.ztilde.zeroed),
            "row_permutation": [i + 1 for i in self.row_permutation],
            "pivot_rows": [i + 1 for i in self.pivot_rows],
            "utilde_box": [[str(lo), str(hi)] for lo, hi in self.utilde.box],
            "radius": str(self.radius),
            "verification": None if self.verification is None else self.verification.as_dict(),
        }


def _box_around(center, h, U_box) -> tuple:
    return tuple((max(c - h, lo), min(c + h, hi)) for c, (lo, hi) in zip(center, U_box))


def _check_points(box, center, per_axis: int) -> list[tuple]:
    axes = [[lo + (hi - lo) * Fraction(j + 1, per_axis + 1) for j in range(per_axis)]
            for lo, hi in box]
    pts = list(itertools.product(*axes))
    pts.append(tuple(center))
    return pts


def build_local_model(F: ParamFamily, Z: SubmanifoldSpec, base: PointXA,
                      backend: ScalarBackend = EXACT, *,
                      radius: Fraction = Fraction(1), check_per_axis: int = 3) -> LocalModel:
    """Construct (Z~, U~) at ``base``; see the module docstring for the cases.

    U~ starts as the box of half-width ``radius`` (clipped to U) and is
    halved until the rank condition on the kept rows holds at a
    ``check_per_axis ** (n+m)`` grid, at most ``MAX_SHRINK`` times.  That
    grid is the one ``local_grid_plan(model, check_per_axis)`` samples, so
    pass the verification count here to check rank on the verified points.
    """
    if Z.kind != "slice":
        raise LocalModelError("local models need Z in slice form at the base point")
    base_b = base.coerce(backend)
    J = jacobian_family(F, base_b, backend)
    value = F.value(base_b, backend)
    if not on_submanifold(Z, value, backend):
        raise LocalModelError(f"F(base) = {tuple(map(str, value))} is not on Z")
    ell, q = F.ell, Z.q
    rho = classify(F, Z, base_b, backend).delta_family
    if rho >= ell:
        raise LocalModelError(
            f"family defect at base equals ell={ell}: dF vanishes there and no rows can be kept"
        )

    zeroed0 = [i - 1 for i in Z.zeroed]
    free0 = [i for i in range(ell) if i not in zeroed0]
    if q == 0:
        case = Q0
        kept = independent_rows(J, backend)
        if len(kept) != ell - rho:
            raise AssertionError("rank of JF disagrees with the computed defect")
        perm = tuple(kept) + tuple(i for i in range(ell) if i not in kept)
    else:
        J2 = J.select_rows(zeroed0)
        r2 = rank(J2, backend)
        if r2 != ell - q - rho:
            raise AssertionError("rank of JF2 disagrees with the computed defect")
        if r2 == 0:
            case, kept = Q_POS_FULL, []
            perm = tuple(free0) + tuple(zeroed0)
        else:
            case = Q_POS_PARTIAL
            kept = [zeroed0[k] for k in independent_rows(J2, backend)]
            perm = tuple(free0) + tuple(kept) + tuple(i for i in zeroed0 if i not in kept)
    ztilde = SubmanifoldSpec(ell, "slice", tuple(sorted(i + 1 for i in kept)), (), Z.constraints)

    center = base.coerce(EXACT).coords
    h = Fraction(radius)
    for _ in range(MAX_SHRINK + 1):
        box = _box_around(center, h, F.domain.box)
        if _rank_stable(F, box, center, kept, backend, check_per_axis):
            break
        h /= 2
    else:
        raise LocalModelError(f"no rank-stable box found after {MAX_SHRINK} halvings")

    return LocalModel(
        base=PointXA.of(center, F.n),
        rho=rho,
        q=q,
        case_tag=case,
        row_permutation=perm,
        pivot_rows=tuple(kept),
        ztilde=ztilde,
        utilde=DomainSpec(box, F.domain.predicates),
        radius=h,
    )


def _rank_stable(F, box, center, kept, backend, per_axis) -> bool:
    n = F.n
    for c in _check_points(box, center, per_axis):
        p = PointXA.of(c, n).coerce(backend)
        if not contains(F.domain, p, backend):
            return False
        if kept and rank(F.jacobian(p, backend).select_rows(kept), backend) < len(kept):
            return False
    return True


def local_grid_plan(model: LocalModel, count: int = 21) -> SamplingPlan:
    """``count`` interior points per axis of U~, the base included when it is the box centre."""
    n = len(model.base.x)
    inset = []
    for lo, hi in model.utilde.box:
        w = (hi - lo) / (count + 1)
        inset.append((lo + w, hi - w))
    return SamplingPlan(
        x_box=tuple(inset[:n]), a_box=tuple(inset[n:]),
        x_count=count, a_count=count, special_points=False,
    )


def _block_matrix(J: Matrix, model: LocalModel, backend) -> Matrix:
    """[JF | T Z~] with rows in the model's permuted order."""
    ell = J.rows
    one, zero = (Fraction(1), Fraction(0)) if backend.exact else (1.0, 0.0)
    Jp = J.select_rows(model.row_permutation)
    zeroed0 = {i - 1 for i in model.ztilde.zeroed}
    free_pos = [k for k, i in enumerate(model.row_permutation) if i not in zeroed0]
    E = Matrix.from_columns([[one if r == k else zero for r in range(ell)] for k in free_pos], ell)
    return Jp.hstack(E)


def verify_local_model(model: LocalModel, F: ParamFamily, Z: SubmanifoldSpec,
                       plan: SamplingPlan, backend: ScalarBackend = EXACT) -> LocalVerification:
    """Check the four local-model properties at every plan sample inside U~.

    Failures are reported as data (first counterexample per property), never raised.
    """
    props = {"1": model.dim_ztilde == Z.q + model.rho, "2": True, "3": True, "4": True}
    cex: dict = {"1": None if props["1"] else model.base, "2": None, "3": None, "4": None}
    block_ok = True
    ell, q, rho = F.ell, model.q, model.rho
    kept = list(model.pivot_rows)
    n_samples = n_z = n_zt = 0

    def fail(key, p):
        if props[key]:
            props[key] = False
            cex[key] = p

    for p in plan.points():
        p = p.coerce(backend)
        if not contains(model.utilde, p, backend):
            continue
        n_samples += 1
        value = F.value(p, backend)
        J = F.jacobian(p, backend)
        in_z = on_submanifold(Z, value, backend)
        in_zt = on_submanifold(model.ztilde, value, backend)
        n_z += in_z
        n_zt += in_zt

        if in_z and not in_zt:
            fail("2", p)

        M = _block_matrix(J, model, backend)
        rank_m = rank(M, backend)
        if model.case_tag != Q_POS_FULL:
            extra = q + rho if model.case_tag == Q_POS_PARTIAL else rho
            if rank_m != rank(J.select_rows(kept), backend) + extra:
                block_ok = False

        if in_zt:
            d_tilde = classify(F, model.ztilde, p, backend).delta_family
            if rank_m != ell or d_tilde != 0:
                fail("3", p)

        d_z = classify(F, Z, p, backend).delta_slice
        d_zt = classify(F, model.ztilde, p, backend).delta_slice
        if d_z - d_zt > rho:
            fail("4", p)

    return LocalVerification(props, cex, block_ok, n_samples, n_z, n_zt)


def attach(model: LocalModel, verification: LocalVerification) -> LocalModel:
    return replace(model, verification=verification)
