"""Sampling evidence for generic transversality of a family.

``scan`` classifies every sampled (x, a) and aggregates per parameter a:

* a is flagged W if some sampled x puts (x, a) in W(F, Z),
* a is flagged Wtilde if some sampled x has slice defect > family defect,
* a is flagged non-transverse if some sampled x has positive slice defect.

The non-transverse flags are exactly the union of the other two (every
positive slice defect is either equal to or larger than the family defect),
and the report checks that identity on the sample indices.

All verdicts are empirical: "holds" means no witness among the samples.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .defect import DefectReport, DomainError, classify
from .geometry import (
    INF,
    GeometryError,
    ParamFamily,
    PointXA,
    SubmanifoldSpec,
    contains,
    normal_rows,
)
from .linalg import EXACT, Matrix, ScalarBackend, kernel_basis, rank
from .sampling import SamplingPlan

__all__ = [
    "GenericityReport",
    "scan",
    "preimage_tangent",
    "projection_regularity",
    "r_bound",
    "HOLDS",
    "FAILS",
    "INCONCLUSIVE",
]

HOLDS, FAILS, INCONCLUSIVE = "holds", "fails", "inconclusive"


@dataclass(frozen=True)
class GenericityReport:
    a_samples: int
    x_samples: int
    a_evaluated: int
    points_in_domain: int
    flagged_W: tuple
    flagged_Wtilde: tuple
    flagged_nontransverse: tuple
    freq_pi2_W: Fraction
    freq_pi2_Wtilde: Fraction
    freq_nontransverse_slice: Fraction
    delta_sup_est: int
    declared_r: float
    r_bound: int
    r_satisfied: bool
    verdict_alpha: str
    verdict_beta: str
    agreement: bool
    star_identity: bool
    table: tuple = field(default=(), compare=False, repr=False)

    def as_dict(self) -> dict:
        def frac(v: Fraction) -> str:
            return str(v)

        return {
            "empirical": True,
            "a_samples": self.a_samples,
            "x_samples": self.x_samples,
            "a_evaluated": self.a_evaluated,
            "points_in_domain": self.points_in_domain,
            "freq_pi2_W": frac(self.freq_pi2_W),
            "freq_pi2_Wtilde": frac(self.freq_pi2_Wtilde),
            "freq_nontransverse_slice": frac(self.freq_nontransverse_slice),
            "delta_sup_est": self.delta_sup_est,
            "r_condition": {
                "bound": self.r_bound,
                "declared_r": "inf" if self.declared_r == INF else int(self.declared_r),
                "satisfied": self.r_satisfied,
            },
            "verdict_alpha": self.verdict_alpha,
            "verdict_beta": self.verdict_beta,
            "agreement": self.agreement,
            "star_identity": self.star_identity,
            "flagged_W": list(self.flagged_W),
            "flagged_Wtilde": list(self.flagged_Wtilde),
            "flagged_nontransverse": list(self.flagged_nontransverse),
        }


def r_bound(n: int, q: int, ell: int, delta_sup: int) -> int:
    """max{dim X + dim Z - dim Y + delta, 0}; the family needs C^r with r above this."""
    return max(n + q - ell + delta_sup, 0)


def _scan_slice(F, Z, xs, a, backend, keep):
    has_w = has_wt = has_nt = False
    best = 0
    inside = 0
    rows = []
    for x in xs:
        p = PointXA(x, a).coerce(backend)
        if not contains(F.domain, p, backend):
            continue
        inside += 1
        rep = classify(F, Z, p, backend)
        best = max(best, rep.delta_family)
        tag = rep.stratum.tag
        has_w |= tag == "W"
        has_wt |= tag == "Wtilde"
        has_nt |= rep.delta_slice > 0
        if keep:
            rows.append(rep)
    return has_w, has_wt, has_nt, best, inside, rows


def _scan_slice_star(args):
    return _scan_slice(*args)


def scan(F: ParamFamily, Z: SubmanifoldSpec, plan: SamplingPlan,
         backend: ScalarBackend = EXACT, *, jobs: int = 1,
         keep_table: bool = False) -> GenericityReport:
    """Classify the plan's samples and render the (alpha)/(beta) verdicts.

    Results are keyed by sample index, so ``jobs > 1`` (process pool over
    parameter samples) gives the same report as a serial run.
    """
    a_list = plan.a_samples()
    xs = plan.x_samples()
    tasks = [(F, Z, xs, a, backend, keep_table) for a in a_list]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_scan_slice_star, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        results = [_scan_slice(*t) for t in tasks]

    w_idx, wt_idx, nt_idx = [], [], []
    best = 0
    in_domain = 0
    evaluated = 0
    table: list[DefectReport] = []
    for i, (hw, hwt, hnt, b, inside, rows) in enumerate(results):
        if hw:
            w_idx.append(i)
        if hwt:
            wt_idx.append(i)
        if hnt:
            nt_idx.append(i)
        best = max(best, b)
        in_domain += inside
        evaluated += inside > 0
        table.extend(rows)

    def freq(idx):
        return Fraction(len(idx), evaluated) if evaluated else Fraction(0)

    f_w, f_wt, f_nt = freq(w_idx), freq(wt_idx), freq(nt_idx)
    if evaluated == 0:
        v_alpha = v_beta = INCONCLUSIVE
    else:
        v_alpha = HOLDS if f_w <= plan.eps_alpha else FAILS
        v_beta = HOLDS if f_nt <= plan.eps_beta else FAILS
    bound = r_bound(F.n, Z.q, F.ell, best)
    return GenericityReport(
        a_samples=len(a_list),
        x_samples=len(xs),
        a_evaluated=evaluated,
        points_in_domain=in_domain,
        flagged_W=tuple(w_idx),
        flagged_Wtilde=tuple(wt_idx),
        flagged_nontransverse=tuple(nt_idx),
        freq_pi2_W=f_w,
        freq_pi2_Wtilde=f_wt,
        freq_nontransverse_slice=f_nt,
        delta_sup_est=best,
        declared_r=F.declared_r,
        r_bound=bound,
        r_satisfied=F.declared_r > bound,
        verdict_alpha=v_alpha,
        verdict_beta=v_beta,
        agreement=v_alpha == v_beta,
        star_identity=set(nt_idx) == set(w_idx) | set(wt_idx),
        table=tuple(table),
    )


def preimage_tangent(F: ParamFamily, Z: SubmanifoldSpec, p: PointXA,
                     backend: ScalarBackend = EXACT) -> Matrix:
    """Basis of the tangent space of F^{-1}(Z) at a transverse point ``p``.

    Computed as ker(N . JF(p)) with the rows of N spanning the annihilator of
    T Z.  Has n + m - (ell - q) columns.
    """
    rep = classify(F, Z, p, backend)
    if not rep.on_z:
        raise DomainError(f"F{rep.point} is not on Z")
    if rep.delta_family != 0:
        raise GeometryError(
            f"F is not transverse to Z at {rep.point} (family defect {rep.delta_family})"
        )
    J = F.jacobian(rep.point, backend)
    K = kernel_basis(normal_rows(Z, rep.value, backend) @ J, backend)
    expected = F.n + F.m - (F.ell - Z.q)
    if K.cols != expected:
        raise AssertionError(f"preimage tangent has dimension {K.cols}, expected {expected}")
    return K


def projection_regularity(F: ParamFamily, Z: SubmanifoldSpec, p: PointXA,
                          backend: ScalarBackend = EXACT) -> str:
    """``"regular"`` if the a-projection restricted to F^{-1}(Z) is submersive at p."""
    K = preimage_tangent(F, Z, p, backend)
    proj = K.select_rows(range(F.n, F.n + F.m))
    return "regular" if rank(proj, backend) == F.m else "critical"
