"""Command-line entry point.

Exit codes: 0 success, 1 domain/validation errors and failed checks,
2 usage errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from fractions import Fraction
from pathlib import Path

from .defect import classify, delta_sup_estimate
from .expr import EvaluationError
from .genericity import preimage_tangent, projection_regularity, scan
from .geometry import GeometryError, PointXA
from .linalg import ScalarBackend
from .localmodel import attach, build_local_model, local_grid_plan, verify_local_model
from .scenario import (
    BUILTINS,
    RunRecord,
    RunWriteError,
    ScenarioError,
    builtin,
    default_timestamp,
    dump_scenario,
    load_scenario,
    write_run,
)

OUT_ENV = "GENTRANS_OUT_DIR"

SUBCOMMANDS = ("delta", "classify", "scan", "local-model", "verify-local",
               "regularity", "examples", "sup")


class UsageError(Exception):
    pass


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (list, tuple)):
        return ", ".join(_fmt(x) for x in v)
    if v is None:
        return "-"
    return str(v)


def _print_pairs(pairs) -> None:
    for k, v in pairs:
        print(f"{k}: {_fmt(v)}")


def _parse_point(text: str, n: int, m: int) -> PointXA:
    parts = [t.strip() for t in text.split(",")]
    if len(parts) != n + m:
        raise UsageError(f"--point: arity {n + m} expected (n={n}, m={m}), got {len(parts)}")
    try:
        coords = [Fraction(t) for t in parts]
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"--point: malformed coordinate in {text!r}") from None
    return PointXA.of(coords, n)


def _load(args):
    scn = builtin(args.builtin) if args.builtin else load_scenario(args.scenario)
    plan = scn.plan
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "x_count", None) is not None:
        overrides["x_count"] = args.x_count
    if getattr(args, "a_count", None) is not None:
        overrides["a_count"] = args.a_count
    if getattr(args, "mode", None) is not None:
        overrides["mode"] = args.mode
    if overrides:
        plan = dataclasses.replace(plan, **overrides)
    backend = scn.backend
    if args.backend is not None and args.backend != backend.kind:
        backend = ScalarBackend(args.backend)
        scn.family.check_backend(backend)
        scn.z.check_backend(backend)
    return dataclasses.replace(scn, plan=plan, backend=backend)


def _out_dir(args, scn) -> Path:
    if args.out:
        return Path(args.out)
    return Path(os.environ.get(OUT_ENV, "runs")) / scn.name


# -- subcommands -----------------------------------------------------------


def cmd_delta(args) -> int:
    scn = _load(args)
    p = _parse_point(args.point, scn.family.n, scn.family.m)
    rep = classify(scn.family, scn.z, p, scn.backend)
    _print_pairs([("delta_family", rep.delta_family), ("delta_slice", rep.delta_slice)])
    return 0


def cmd_classify(args) -> int:
    scn = _load(args)
    p = _parse_point(args.point, scn.family.n, scn.family.m)
    _print_pairs(classify(scn.family, scn.z, p, scn.backend).as_dict().items())
    return 0


def cmd_sup(args) -> int:
    scn = _load(args)
    est = delta_sup_estimate(scn.family, scn.z, scn.plan, scn.backend)
    box = [f"[{lo}, {hi}]" for lo, hi in scn.plan.x_box + scn.plan.a_box]
    _print_pairs([("delta_sup_lower_bound", est), ("sampling_box", " x ".join(box))])
    return 0


def cmd_scan(args) -> int:
    scn = _load(args)
    rep = scan(scn.family, scn.z, scn.plan, scn.backend, jobs=args.jobs, keep_table=True)
    record = RunRecord(scn, "scan", genericity=rep, defect_table=rep.table,
                       timestamp=default_timestamp())
    path = write_run(record, _out_dir(args, scn))
    d = rep.as_dict()
    _print_pairs([(k, d[k]) for k in ("freq_pi2_W", "freq_pi2_Wtilde", "freq_nontransverse_slice",
                                      "delta_sup_est", "verdict_alpha", "verdict_beta",
                                      "agreement", "star_identity")])
    _print_pairs([("r_bound", rep.r_bound), ("r_satisfied", rep.r_satisfied), ("manifest", path)])
    return 0


def _local(args, verify: bool) -> int:
    scn = _load(args)
    p = _parse_point(args.point, scn.family.n, scn.family.m)
    # check rank stability on the same grid that verification samples
    per_axis = args.grid if verify else 3
    model = build_local_model(scn.family, scn.z, p, scn.backend, check_per_axis=per_axis)
    ok = True
    if verify:
        ver = verify_local_model(model, scn.family, scn.z, local_grid_plan(model, args.grid),
                                 scn.backend)
        model = attach(model, ver)
        ok = ver.passed
    d = model.as_dict()
    ver_d = d.pop("verification")
    _print_pairs(d.items())
    if ver_d is not None:
        _print_pairs([(f"property_{k}", v) for k, v in ver_d["properties"].items()])
        _print_pairs([("block_identity", ver_d["block_identity"]),
                      ("samples", ver_d["samples"]), ("verified", ver_d["passed"])])
        for k, c in ver_d["counterexamples"].items():
            if c is not None:
                print(f"counterexample_{k}: {_fmt(c)}")
    if args.out:
        write_run(RunRecord(scn, "local-model", local_models=(model,),
                            timestamp=default_timestamp()), args.out)
    return 0 if ok else 1


def cmd_local_model(args) -> int:
    return _local(args, args.verify)


def cmd_verify_local(args) -> int:
    return _local(args, True)


def cmd_regularity(args) -> int:
    scn = _load(args)
    p = _parse_point(args.point, scn.family.n, scn.family.m)
    K = preimage_tangent(scn.family, scn.z, p, scn.backend)
    verdict = projection_regularity(scn.family, scn.z, p, scn.backend)
    cols = ["(" + ", ".join(str(v) for v in K.column(j)) + ")" for j in range(K.cols)]
    _print_pairs([("preimage_dim", K.cols),
                  ("expected_dim", scn.family.n + scn.family.m - (scn.family.ell - scn.z.q)),
                  ("tangent_basis", "; ".join(cols) or "-"),
                  ("projection", verdict)])
    return 0


def cmd_examples(args) -> int:
    if args.name is None:
        for name in BUILTINS:
            print(name)
        return 0
    if not args.check:
        sys.stdout.write(dump_scenario(builtin(args.name)))
        return 0
    from .checks import CHECKS

    ok_all = True
    for label, ok, detail in CHECKS[args.name](args.resolution):
        ok_all &= ok
        print(f"[{'PASS' if ok else 'FAIL'}] {args.name}: {label} ({detail})")
    return 0 if ok_all else 1


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gentrans",
        description="Transversality defects, strata and generic-transversality evidence.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_args(p):
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--scenario", type=Path, help="scenario file")
        src.add_argument("--builtin", choices=BUILTINS, help="packaged scenario")
        p.add_argument("--backend", choices=["exact", "float"], default=None,
                       help="override the scenario backend")

    def plan_args(p):
        p.add_argument("--seed", type=int)
        p.add_argument("--x-count", type=int)
        p.add_argument("--a-count", type=int)
        p.add_argument("--mode", choices=["grid", "monte_carlo"])

    for name, fn, help_ in (("delta", cmd_delta, "both defects at a point"),
                            ("classify", cmd_classify, "full defect report at a point"),
                            ("regularity", cmd_regularity,
                             "preimage tangent and projection regularity at a point")):
        p = sub.add_parser(name, help=help_)
        scenario_args(p)
        p.add_argument("--point", required=True, help="x1,..,xn,a1,..,am (rationals allowed)")
        p.set_defaults(func=fn)

    p = sub.add_parser("scan", help="sample the plan and write a run record")
    scenario_args(p)
    plan_args(p)
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./runs, /<name>)")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("sup", help="sampled lower bound for the supremum of the family defect")
    scenario_args(p)
    plan_args(p)
    p.set_defaults(func=cmd_sup)

    for name, fn, help_ in (("local-model", cmd_local_model, "build a local model at a point"),
                            ("verify-local", cmd_verify_local, "build and verify a local model")):
        p = sub.add_parser(name, help=help_)
        scenario_args(p)
        p.add_argument("--point", required=True)
        p.add_argument("--grid", type=int, default=21, help="verification points per axis")
        p.add_argument("--out", help="also write the model to this run directory")
        if name == "local-model":
            p.add_argument("--verify", action="store_true")
        p.set_defaults(func=fn)

    p = sub.add_parser("examples", help="list, print or check the built-in scenarios")
    p.add_argument("--name", choices=BUILTINS)
    p.add_argument("--check", action="store_true")
    p.add_argument("--resolution", type=int, default=21)
    p.set_defaults(func=cmd_examples)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)   # exits 2 on usage errors
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"gentrans {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (ScenarioError, GeometryError, EvaluationError, ValueError) as exc:
        # DomainError and LocalModelError are GeometryErrors
        print(f"gentrans {args.command}: {exc}", file=sys.stderr)
        return 1
    except RunWriteError as exc:
        print(f"gentrans {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
