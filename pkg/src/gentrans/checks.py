"""Closed-form expectations for the built-in scenarios.

Each checker returns ``(label, ok, detail)`` triples; the CLI's
``examples --check`` prints them.
"""

from __future__ import annotations

from fractions import Fraction

from .defect import classify
from .genericity import projection_regularity, scan
from .geometry import PointXA
from .localmodel import Q_POS_PARTIAL, build_local_model, local_grid_plan, verify_local_model
from .sampling import axis_grid
from .scenario import builtin


def _grid(resolution: int):
    axis = axis_grid(Fraction(-1), Fraction(1), resolution)
    return [(x, a) for a in axis for x in axis]


def _count_mismatch(scn, expect, resolution):
    bad = 0
    first = None
    for x, a in _grid(resolution):
        rep = classify(scn.family, scn.z, PointXA((x,), (a,)), scn.backend)
        got = (str(rep.stratum), rep.delta_family, rep.delta_slice)
        if got != expect(x, a):
            bad += 1
            first = first or ((x, a), got)
    return bad, first


def _detail(bad, first) -> str:
    if not bad:
        return "0 mismatches"
    (x, a), got = first
    return f"{bad} mismatches, first at ({x}, {a}): {got}"


def _scan_check(scn, alpha, beta):
    rep = scan(scn.family, scn.z, scn.plan, scn.backend)
    ok = (rep.verdict_alpha, rep.verdict_beta) == (alpha, beta) and rep.star_identity
    return ("scan verdicts", ok,
            f"alpha={rep.verdict_alpha} beta={rep.verdict_beta} identity={rep.star_identity}")


def check_example1(resolution: int = 21):
    scn = builtin("example1")
    bad, first = _count_mismatch(scn, lambda x, a: ("W", 1, 1), resolution)
    return [("every point in W with both defects 1", bad == 0, _detail(bad, first)),
            _scan_check(scn, "fails", "fails")]


def check_example2(resolution: int = 21):
    scn = builtin("example2")

    def expect(x, a):
        return ("W", 1, 1) if a * x == 0 else ("NotOnZ", 0, 0)

    bad, first = _count_mismatch(scn, expect, resolution)
    return [("W exactly where ax = 0", bad == 0, _detail(bad, first)),
            _scan_check(scn, "fails", "fails")]


def check_example3(resolution: int = 21):
    scn = builtin("example3")
    F, Z, B = scn.family, scn.z, scn.backend

    def expect(x, a):
        return ("Wtilde(1)", 1, 2) if a == 0 and 0 < x < 1 else ("NotOnZ", 0, 0)

    bad, first = _count_mismatch(scn, expect, resolution)
    out = [("defects 1/2 on (0,1) x {0}, W empty", bad == 0, _detail(bad, first))]

    witnesses = [classify(F, Z, PointXA((Fraction(1, k),), (Fraction(0),)), B).delta_family
                 for k in (2, 10, 100, 1000)]
    at_origin = classify(F, Z, PointXA((Fraction(0),), (Fraction(0),)), B).delta_family
    out.append(("defect-1 set accumulates at (0,0) outside it",
                witnesses == [1, 1, 1, 1] and at_origin == 0,
                f"defects at (1/k,0): {witnesses}; at (0,0): {at_origin}"))

    model = build_local_model(F, Z, PointXA((Fraction(1, 2),), (Fraction(0),)), B,
                              check_per_axis=resolution)
    ver = verify_local_model(model, F, Z, local_grid_plan(model, resolution), B)
    out.append(("local model at (1/2,0)",
                model.case_tag == Q_POS_PARTIAL and model.ztilde.zeroed == (2,) and ver.passed,
                f"case={model.case_tag} zeroed={model.ztilde.zeroed} verified={ver.passed}"))
    out.append(_scan_check(scn, "holds", "holds"))
    return out


def check_parabola(resolution: int = 21):
    scn = builtin("parabola")
    critical = []
    for t in axis_grid(Fraction(-1), Fraction(1), resolution):
        p = PointXA((t,), (t * t,))
        if projection_regularity(scn.family, scn.z, p, scn.backend) == "critical":
            critical.append(t)
    return [("projection critical only at (0,0)", critical == [0], f"critical t: {[str(t) for t in critical]}"),
            _scan_check(scn, "holds", "holds")]


CHECKS = {
    "example1": check_example1,
    "example2": check_example2,
    "example3": check_example3,
    "parabola": check_parabola,
}
