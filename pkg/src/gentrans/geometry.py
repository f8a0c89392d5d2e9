"""Scenario data model: the family, the submanifold Z, the open domain U."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

from .expr import Expr, Var, check_backend, derive, evaluate, to_str, variables
from .linalg import EXACT, Matrix, ScalarBackend, kernel_basis, rank

__all__ = [
    "GeometryError",
    "RegularityError",
    "DomainSpec",
    "ParamFamily",
    "SubmanifoldSpec",
    "PointXA",
    "TangentBasis",
    "contains",
    "on_submanifold",
    "tangent_of_Z",
    "membership_margin",
    "INF",
]

INF = math.inf


class GeometryError(ValueError):
    pass


class RegularityError(GeometryError):
    """Level-set Jacobian is rank deficient: not a submanifold point."""


def _check_vars(e: Expr, allowed: dict[str, int], where: str) -> None:
    for v in variables(e):
        if v.cls not in allowed:
            raise GeometryError(f"{where}: variable {v.name} not allowed here")
        if v.index > allowed[v.cls]:
            raise GeometryError(
                f"{where}: variable {v.name} out of range (dimension {allowed[v.cls]})"
            )


@dataclass(frozen=True)
class PointXA:
    x: tuple
    a: tuple

    @classmethod
    def of(cls, coords: Sequence, n: int) -> "PointXA":
        coords = tuple(coords)
        return cls(coords[:n], coords[n:])

    @property
    def coords(self) -> tuple:
        return self.x + self.a

    def env(self) -> dict[str, object]:
        env = {f"x{i + 1}": v for i, v in enumerate(self.x)}
        env.update({f"a{i + 1}": v for i, v in enumerate(self.a)})
        return env

    def coerce(self, backend: ScalarBackend) -> "PointXA":
        return PointXA(tuple(map(backend.coerce, self.x)), tuple(map(backend.coerce, self.a)))

    def __str__(self) -> str:
        return "(" + ", ".join(str(v) for v in self.coords) + ")"


@dataclass(frozen=True)
class DomainSpec:
    """Open set: a box (bounds may be infinite) cut down by ``predicate > 0``."""

    box: tuple  # ((lo, hi), ...) over x1..xn, a1..am
    predicates: tuple = ()

    def __post_init__(self):
        for i, (lo, hi) in enumerate(self.box):
            if not lo < hi:
                raise GeometryError(f"domain box coordinate {i + 1}: need lower < upper")

    @classmethod
    def unbounded(cls, dim: int) -> "DomainSpec":
        return cls(((-INF, INF),) * dim)


@dataclass(frozen=True)
class ParamFamily:
    """F: U subset of R^n x R^m -> R^ell, given by ``ell`` component expressions."""

    n: int
    m: int
    ell: int
    components: tuple
    domain: DomainSpec
    declared_r: float = INF  # positive integer or INF

    def __post_init__(self):
        if min(self.n, self.m, self.ell) < 1:
            raise GeometryError("n, m and ell must all be >= 1")
        if len(self.components) != self.ell:
            raise GeometryError(f"expected {self.ell} components, got {len(self.components)}")
        if len(self.domain.box) != self.n + self.m:
            raise GeometryError(
                f"domain box has {len(self.domain.box)} intervals, expected n+m={self.n + self.m}"
            )
        if not (self.declared_r == INF or (float(self.declared_r).is_integer() and self.declared_r >= 1)):
            raise GeometryError("declared r must be a positive integer or inf")
        allowed = {"x": self.n, "a": self.m}
        for i, c in enumerate(self.components):
            _check_vars(c, allowed, f"F{i + 1}")
        for i, p in enumerate(self.domain.predicates):
            _check_vars(p, allowed, f"domain predicate {i + 1}")

    @property
    def columns(self) -> list[Var]:
        return [Var("x", i + 1) for i in range(self.n)] + [Var("a", i + 1) for i in range(self.m)]

    @cached_property
    def jacobian_exprs(self) -> tuple:
        return tuple(tuple(derive(c, v) for v in self.columns) for c in self.components)

    def check_backend(self, backend: ScalarBackend) -> None:
        for c in self.components + self.domain.predicates:
            check_backend(c, backend)

    def value(self, p: PointXA, backend: ScalarBackend = EXACT) -> tuple:
        env = p.env()
        return tuple(evaluate(c, env, backend) for c in self.components)

    def jacobian(self, p: PointXA, backend: ScalarBackend = EXACT) -> Matrix:
        env = p.env()
        return Matrix.from_rows(
            [[evaluate(d, env, backend) for d in row] for row in self.jacobian_exprs],
            self.n + self.m,
        )


@dataclass(frozen=True)
class SubmanifoldSpec:
    """Z as a coordinate slice ``{y_i = 0, i in zeroed}`` or a level set ``{g = 0}``.

    Both forms may be restricted further by open constraints ``c(y) > 0``.
    """

    ell: int
    kind: str = "slice"
    zeroed: tuple = ()
    g: tuple = ()
    constraints: tuple = ()

    def __post_init__(self):
        if self.kind not in ("slice", "levelset"):
            raise GeometryError(f"unknown submanifold kind {self.kind!r}")
        allowed = {"y": self.ell}
        if self.kind == "slice":
            if self.g:
                raise GeometryError("slice submanifold takes no level-set equations")
            if len(set(self.zeroed)) != len(self.zeroed) or tuple(sorted(self.zeroed)) != tuple(self.zeroed):
                raise GeometryError("zeroed indices must be strictly increasing")
            if any(not 1 <= i <= self.ell for i in self.zeroed):
                raise GeometryError(f"zeroed indices must lie in 1..{self.ell}")
        else:
            if self.zeroed:
                raise GeometryError("level-set submanifold takes no zeroed indices")
            if not 1 <= len(self.g) <= self.ell:
                raise GeometryError(f"level set needs between 1 and {self.ell} equations")
            for i, e in enumerate(self.g):
                _check_vars(e, allowed, f"g{i + 1}")
        for i, e in enumerate(self.constraints):
            _check_vars(e, allowed, f"constraint {i + 1}")

    @property
    def q(self) -> int:
        """Dimension of Z (derived, never supplied)."""
        return self.ell - (len(self.zeroed) if self.kind == "slice" else len(self.g))

    @property
    def codim(self) -> int:
        return self.ell - self.q

    @cached_property
    def g_jacobian_exprs(self) -> tuple:
        ys = [Var("y", i + 1) for i in range(self.ell)]
        return tuple(tuple(derive(e, v) for v in ys) for e in self.g)

    def check_backend(self, backend: ScalarBackend) -> None:
        for e in self.g + self.constraints:
            check_backend(e, backend)

    def describe(self) -> str:
        if self.kind == "slice":
            eqs = ", ".join(f"y{i}=0" for i in self.zeroed) or "open"
        else:
            eqs = ", ".join(f"{to_str(e)}=0" for e in self.g)
        cons = "; ".join(f"{to_str(c)}>0" for c in self.constraints)
        return f"{{{eqs}}}" + (f" with {cons}" if cons else "")


@dataclass(frozen=True)
class TangentBasis:
    ambient_dim: int
    columns: Matrix = field(repr=False)

    @property
    def dim(self) -> int:
        return self.columns.cols


def _y_env(y: Sequence) -> dict[str, object]:
    return {f"y{i + 1}": v for i, v in enumerate(y)}


def contains(U: DomainSpec, p: PointXA, backend: ScalarBackend = EXACT) -> bool:
    """Strictly inside the box and every predicate positive."""
    coords = p.coords
    if len(coords) != len(U.box):
        raise GeometryError(f"point has {len(coords)} coordinates, domain expects {len(U.box)}")
    for v, (lo, hi) in zip(coords, U.box):
        if not lo < v < hi:
            return False
    env = p.env()
    return all(backend.is_positive(evaluate(c, env, backend)) for c in U.predicates)


def _equations(Z: SubmanifoldSpec, y: Sequence, backend: ScalarBackend) -> list:
    if Z.kind == "slice":
        return [y[i - 1] for i in Z.zeroed]
    env = _y_env(y)
    return [evaluate(e, env, backend) for e in Z.g]


def on_submanifold(Z: SubmanifoldSpec, y: Sequence, backend: ScalarBackend = EXACT) -> bool:
    """Whether ``y`` lies on Z.

    Under the float backend equations count as satisfied within ``mem_tol``
    and constraints only fail below ``-mem_tol``: borderline points resolve
    to "on Z", which is the conservative side for defect detection.
    """
    if len(y) != Z.ell:
        raise GeometryError(f"point has {len(y)} coordinates, Z lives in R^{Z.ell}")
    if not all(backend.is_zero(v) for v in _equations(Z, y, backend)):
        return False
    env = _y_env(y)
    if backend.exact:
        return all(evaluate(c, env, backend) > 0 for c in Z.constraints)
    return all(evaluate(c, env, backend) > -backend.mem_tol for c in Z.constraints)


def membership_margin(Z: SubmanifoldSpec, y: Sequence, backend: ScalarBackend = EXACT) -> float:
    """Distance (in equation/constraint value) from flipping the membership decision.

    Satisfied equations contribute nothing; violated ones contribute their
    magnitude, constraints contribute their magnitude.  ``inf`` if neither
    applies.
    """
    vals = [abs(v) for v in _equations(Z, y, backend) if not backend.is_zero(v)]
    env = _y_env(y)
    vals += [abs(evaluate(c, env, backend)) for c in Z.constraints]
    return float(min(vals)) if vals else INF


def tangent_of_Z(Z: SubmanifoldSpec, y: Sequence, backend: ScalarBackend = EXACT) -> TangentBasis:
    """Basis of T_y Z (``q`` columns); assumes ``y`` is on Z."""
    ell = Z.ell
    if Z.kind == "slice":
        one, zero = (Fraction(1), Fraction(0)) if backend.exact else (1.0, 0.0)
        free = [i for i in range(ell) if i + 1 not in Z.zeroed]
        cols = [[one if r == j else zero for r in range(ell)] for j in free]
        return TangentBasis(ell, Matrix.from_columns(cols, ell))
    env = _y_env(y)
    Jg = Matrix.from_rows(
        [[evaluate(d, env, backend) for d in row] for row in Z.g_jacobian_exprs], ell
    )
    if rank(Jg, backend) < len(Z.g):
        raise RegularityError(
            f"level-set Jacobian has rank < {len(Z.g)} at y={tuple(map(str, y))}"
        )
    return TangentBasis(ell, kernel_basis(Jg, backend))


def normal_rows(Z: SubmanifoldSpec, y: Sequence, backend: ScalarBackend = EXACT) -> Matrix:
    """Rows spanning the annihilator of T_y Z (one per equation)."""
    ell = Z.ell
    if Z.kind == "slice":
        one, zero = (Fraction(1), Fraction(0)) if backend.exact else (1.0, 0.0)
        return Matrix.from_rows(
            [[one if c == i - 1 else zero for c in range(ell)] for i in Z.zeroed], ell
        )
    env = _y_env(y)
    return Matrix.from_rows(
        [[evaluate(d, env, backend) for d in row] for row in Z.g_jacobian_exprs], ell
    )
