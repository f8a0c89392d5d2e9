from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gentrans.defect import (
    NOT_ON_Z, TRANSVERSE, W, DomainError, Stratum, classify, delta_family, delta_slice,
    delta_sup_estimate, is_transverse_at, jacobian_family,
)
from gentrans.expr import Const, Mul, parse
from gentrans.geometry import INF, DomainSpec, GeometryError, ParamFamily, PointXA, SubmanifoldSpec
from gentrans.linalg import FLOAT
from gentrans.sampling import SamplingPlan
from gentrans.scenario import BUILTINS, builtin, load_scenario


def P(x, a):
    return PointXA((Fraction(x),), (Fraction(a),))


def family(*components, n=1, m=1, box=None):
    box = box or ((-INF, INF),) * (n + m)
    return ParamFamily(n, m, len(components), tuple(parse(c) for c in components), DomainSpec(box))


def test_jacobian_example2():
    scn = builtin("example2")
    J = jacobian_family(scn.family, P("1/2", 2))
    # d/dx a^2 x^2 = 2 a^2 x, d/da = 2 a x^2
    assert J.to_rows() == [[4, 1]]


def test_outside_domain(data_dir):
    scn = load_scenario(data_dir / "circle_float.scn")
    with pytest.raises(DomainError):
        jacobian_family(scn.family, P(3, 0), FLOAT)    # predicate 4 - x^2 fails
    with pytest.raises(DomainError):
        classify(scn.family, scn.z, P(0, 1), FLOAT)    # a outside (-1/2, 1/2)


def test_example1_every_point_in_w():
    scn = builtin("example1")
    for x, a in [(0, 0), ("1/3", "-2/7"), (-1, 1)]:
        rep = classify(scn.family, scn.z, P(x, a))
        assert (rep.stratum, rep.delta_family, rep.delta_slice) == (W, 1, 1)
        assert not rep.mather_hypothesis


def test_example2_cases():
    scn = builtin("example2")
    F, Z = scn.family, scn.z
    assert delta_family(F, Z, P(0, "1/2")) == 1
    assert delta_slice(F, Z, P(0, "1/2")) == 1
    assert classify(F, Z, P("1/2", "1/2")).stratum == NOT_ON_Z
    assert classify(F, Z, P("1/2", 0)).stratum == W


def test_example3_wtilde():
    scn = builtin("example3")
    F, Z = scn.family, scn.z
    rep = classify(F, Z, P("1/2", 0))
    assert str(rep.stratum) == "Wtilde(1)"
    assert (rep.delta_family, rep.delta_slice) == (1, 2)
    assert rep.mather_hypothesis
    assert classify(F, Z, P(0, 0)).stratum == NOT_ON_Z   # y1 > 0 is strict
    assert classify(F, Z, P("1/2", "1/10")).stratum == NOT_ON_Z


def test_transverse_point():
    F = family("x1 - a1")
    Z = SubmanifoldSpec(1, zeroed=(1,))
    rep = classify(F, Z, P(1, 1))
    assert rep.stratum == TRANSVERSE and rep.delta_slice == 0
    assert is_transverse_at("family", F, Z, P(1, 1))
    assert is_transverse_at("slice", F, Z, P(1, 1))
    with pytest.raises(ValueError):
        is_transverse_at("both", F, Z, P(1, 1))


def test_only_family_transverse():
    # F = a: the family is transverse to {0}, no slice is
    F = family("a1")
    Z = SubmanifoldSpec(1, zeroed=(1,))
    assert is_transverse_at("family", F, Z, P(3, 0))
    assert not is_transverse_at("slice", F, Z, P(3, 0))
    assert str(classify(F, Z, P(3, 0)).stratum) == "Wtilde(0)"


def test_stratum_parse_round_trip():
    for s in ("NotOnZ", "Transverse", "W", "Wtilde(0)", "Wtilde(3)"):
        assert str(Stratum.parse(s)) == s
    with pytest.raises(ValueError):
        Stratum.parse("Wtilde")


def test_sup_estimate():
    scn = builtin("example1")
    plan = SamplingPlan(scn.plan.x_box, scn.plan.a_box, 5, 5)
    assert delta_sup_estimate(scn.family, scn.z, plan) == 1
    scn = builtin("example3")
    assert delta_sup_estimate(scn.family, scn.z, scn.plan) == 0
    full = SamplingPlan(((Fraction(-1), Fraction(2)),), ((Fraction(-1, 10), Fraction(1, 10)),), 7, 3)
    assert delta_sup_estimate(scn.family, scn.z, full) == 1


def test_float_borderline_on_z():
    F = family("x1*a1")
    Z = SubmanifoldSpec(1, zeroed=(1,))
    rep = classify(F, Z, PointXA((1e-6,), (1e-6,)), FLOAT)
    assert rep.on_z and rep.margin == INF
    assert not classify(F, Z, PointXA((1e-3,), (1e-3,)), FLOAT).on_z


def test_ell_mismatch():
    with pytest.raises(GeometryError):
        classify(family("x1"), SubmanifoldSpec(2, zeroed=(1,)), P(0, 0))


# -- properties ----------------------------------------------------------------

coords = st.fractions(min_value=-2, max_value=2, max_denominator=5)
snapped = st.one_of(st.just(Fraction(0)), coords)


@given(st.sampled_from(BUILTINS), snapped, snapped)
@settings(max_examples=200)
def test_defect_bounds(name, x, a):
    scn = builtin(name)
    p = P(x, a)
    if not scn.family.domain.box[0][0] < x < scn.family.domain.box[0][1] or \
            not scn.family.domain.box[1][0] < a < scn.family.domain.box[1][1]:
        return
    rep = classify(scn.family, scn.z, p)
    ell, q = scn.family.ell, scn.z.q
    assert 0 <= rep.delta_family <= rep.delta_slice <= ell - q
    if not rep.on_z:
        assert rep.delta_family == rep.delta_slice == 0


@given(st.integers(-3, 3).filter(bool), coords, coords)
def test_scaling_invariance(c, x, a):
    # defects depend only on the image of dF, not on a nonzero rescaling of F
    F = family("x1^2 - a1", "x1*a1")
    G = ParamFamily(1, 1, 2, tuple(Mul(Const(Fraction(c)), e) for e in F.components), F.domain)
    Z = SubmanifoldSpec(2, zeroed=(1,))
    r1, r2 = classify(F, Z, P(x, a)), classify(G, Z, P(x, a))
    assert (r1.delta_family, r1.delta_slice, r1.stratum) == (r2.delta_family, r2.delta_slice, r2.stratum)
