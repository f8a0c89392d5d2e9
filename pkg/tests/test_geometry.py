from fractions import Fraction

import pytest

from gentrans.expr import parse
from gentrans.geometry import (
    INF, DomainSpec, GeometryError, ParamFamily, PointXA, RegularityError, SubmanifoldSpec,
    contains, membership_margin, on_submanifold, tangent_of_Z,
)
from gentrans.linalg import EXACT, FLOAT, Matrix, rank


def _family(*components, n=1, m=1, box=None, predicates=()):
    box = box or ((-INF, INF),) * (n + m)
    return ParamFamily(n, m, len(components), tuple(parse(c) for c in components),
                       DomainSpec(box, tuple(parse(p) for p in predicates)))


def test_contains_box_is_open():
    U = DomainSpec(((Fraction(-1), Fraction(1)), (Fraction(0), Fraction(2))))
    assert contains(U, PointXA((Fraction(0),), (Fraction(1),)))
    assert not contains(U, PointXA((Fraction(1),), (Fraction(1),)))
    assert not contains(U, PointXA((Fraction(0),), (Fraction(0),)))


def test_contains_predicate():
    U = DomainSpec(((-INF, INF), (-INF, INF)), (parse("1 - x1^2 - a1^2"),))
    assert contains(U, PointXA((Fraction(1, 2),), (Fraction(1, 2),)))
    assert not contains(U, PointXA((Fraction(1),), (Fraction(0),)))


def test_contains_arity():
    with pytest.raises(GeometryError):
        contains(DomainSpec.unbounded(2), PointXA((0,), ()))


def test_on_submanifold_slice():
    Z = SubmanifoldSpec(3, zeroed=(2, 3), constraints=(parse("y1"), parse("1 - y1")))
    assert on_submanifold(Z, (Fraction(1, 2), 0, 0))
    assert not on_submanifold(Z, (Fraction(1, 2), 0, Fraction(1, 10)))
    assert not on_submanifold(Z, (0, 0, 0))   # constraint y1 > 0 is strict
    assert not on_submanifold(Z, (Fraction(3, 2), 0, 0))


def test_on_submanifold_levelset_float():
    Z = SubmanifoldSpec(2, kind="levelset", g=(parse("y1^2 + y2^2 - 1"),))
    assert on_submanifold(Z, (1.0, 0.0), FLOAT)
    assert on_submanifold(Z, (1.0 + 1e-11, 0.0), FLOAT)
    assert not on_submanifold(Z, (Fraction(1) + Fraction(1, 10**11), Fraction(0)), EXACT)
    assert not on_submanifold(Z, (1.1, 0.0), FLOAT)


def test_float_membership_borderline_resolves_on_z():
    Z = SubmanifoldSpec(1, zeroed=(), constraints=(parse("y1"),))
    assert on_submanifold(Z, (-1e-12,), FLOAT)
    assert not on_submanifold(Z, (-1e-6,), FLOAT)
    assert membership_margin(Z, (-1e-12,), FLOAT) == pytest.approx(1e-12)


def test_membership_margin():
    Z = SubmanifoldSpec(2, zeroed=(1,))
    assert membership_margin(Z, (0, 5)) == INF
    assert membership_margin(Z, (Fraction(1, 4), 5)) == 0.25


def test_tangent_of_circle():
    Z = SubmanifoldSpec(2, kind="levelset", g=(parse("y1^2 + y2^2 - 1"),))
    T = tangent_of_Z(Z, (Fraction(1), Fraction(0)))
    assert T.dim == 1
    col = T.columns.column(0)
    assert col[0] == 0 and col[1] != 0
    # span equals span{(0, 1)}
    assert rank(T.columns.hstack(Matrix.from_columns([[0, 1]], 2))) == 1


def test_tangent_of_slice():
    Z = SubmanifoldSpec(3, zeroed=(2,))
    T = tangent_of_Z(Z, (0, 0, 0))
    assert T.dim == Z.q == 2
    assert T.columns.to_rows() == [[1, 0], [0, 0], [0, 1]]


def test_singular_levelset_raises():
    Z = SubmanifoldSpec(2, kind="levelset", g=(parse("y1^2"),))
    with pytest.raises(RegularityError):
        tangent_of_Z(Z, (Fraction(0), Fraction(3)))


def test_family_variable_validation():
    with pytest.raises(GeometryError, match="x2"):
        _family("x2 + a1")
    with pytest.raises(GeometryError, match="y1"):
        _family("y1")
    with pytest.raises(GeometryError, match="components"):
        ParamFamily(1, 1, 2, (parse("x1"),), DomainSpec.unbounded(2))
    with pytest.raises(GeometryError):
        _family("x1", box=((Fraction(1), Fraction(0)), (-INF, INF)))


def test_submanifold_validation():
    with pytest.raises(GeometryError):
        SubmanifoldSpec(2, zeroed=(3,))
    with pytest.raises(GeometryError):
        SubmanifoldSpec(2, zeroed=(2, 1))
    with pytest.raises(GeometryError):
        SubmanifoldSpec(2, kind="levelset")
    with pytest.raises(GeometryError, match="y3"):
        SubmanifoldSpec(2, kind="levelset", g=(parse("y3"),))
    assert SubmanifoldSpec(3, zeroed=(2, 3)).q == 1


def test_jacobian_layout():
    F = _family("x1*a1", "x1 + 2*a1")
    J = F.jacobian(PointXA((Fraction(3),), (Fraction(5),)))
    assert J.to_rows() == [[5, 3], [1, 2]]
