"""Scenario files, the built-in examples, and run output.

A scenario is an INI-style text file::

    [scenario]
    name = example3

    [dims]
    n = 1
    m = 1
    ell = 3
    r = inf

    [family]
    F1 = x1
    F2 = a1
    F3 = 0

    [domain]                 # optional, default unbounded
    x1 = -inf, inf
    predicates = 1 - x1^2    # ';'-separated, each required > 0

    [z]
    kind = slice             # or levelset with  g = expr; expr
    zeroed = 2, 3
    constraints = y1; 1 - y1

    [plan]
    seed = 0
    mode = grid              # or monte_carlo
    x1 = -1, 2
    a1 = 1/10, 1
    x_count = 31
    a_count = 19
    eps_alpha = 0
    eps_beta = 0

    [backend]
    kind = exact             # or float with rank_tol / mem_tol

Numbers are exact rationals (``p/q`` or decimals).
"""

from __future__ import annotations

import configparser
import csv
import hashlib
import io
import json
import os
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

from . import __version__
from .expr import ExprError, ParseError, parse, to_str
from .geometry import INF, DomainSpec, GeometryError, ParamFamily, SubmanifoldSpec
from .linalg import ScalarBackend
from .sampling import SamplingPlan

__all__ = [
    "ScenarioError",
    "RunWriteError",
    "Scenario",
    "RunRecord",
    "load_scenario",
    "load_scenario_text",
    "dump_scenario",
    "content_hash",
    "builtin",
    "BUILTINS",
    "write_run",
]

BUILTINS = ("example1", "example2", "example3", "parabola")

_SECTIONS = {
    "scenario": {"name"},
    "dims": {"n", "m", "ell", "r"},
    "family": None,   # F1..Fell
    "domain": None,   # per-variable bounds + predicates
    "z": {"kind", "zeroed", "g", "constraints"},
    "plan": None,     # per-variable bounds + fixed keys
    "backend": {"kind", "rank_tol", "mem_tol"},
}
_PLAN_KEYS = {"seed", "mode", "x_count", "a_count", "eps_alpha", "eps_beta"}


class ScenarioError(ValueError):
    pass


class RunWriteError(OSError):
    pass


@dataclass(frozen=True)
class Scenario:
    name: str
    family: ParamFamily
    z: SubmanifoldSpec
    plan: SamplingPlan
    backend: ScalarBackend


# -- parsing helpers -------------------------------------------------------


def _rational(text: str, where: str) -> Fraction:
    t = text.strip()
    try:
        if t.startswith("-"):
            return -_rational(t[1:], where)
        if "/" in t:
            p, q = t.split("/")
            return Fraction(int(p), int(q))
        return Fraction(t)
    except (ValueError, ZeroDivisionError):
        raise ScenarioError(f"{where}: malformed number {text!r}") from None


def _bound(text: str, where: str):
    t = text.strip()
    if t in ("inf", "+inf"):
        return INF
    if t == "-inf":
        return -INF
    return _rational(t, where)


def _interval(text: str, where: str, finite: bool = False) -> tuple:
    parts = text.split(",")
    if len(parts) != 2:
        raise ScenarioError(f"{where}: expected 'lower, upper', got {text!r}")
    lo, hi = (_bound(p, where) for p in parts)
    if finite and (lo in (INF, -INF) or hi in (INF, -INF)):
        raise ScenarioError(f"{where}: sampling boxes must be bounded")
    return lo, hi


def _int(text: str, where: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise ScenarioError(f"{where}: expected an integer, got {text!r}") from None


def _expr(text: str, where: str):
    try:
        return parse(text)
    except ParseError as exc:
        raise ScenarioError(f"{where}: {exc}") from None


def _expr_list(text: str, where: str) -> tuple:
    items = [t for t in (s.strip() for s in text.split(";")) if t]
    return tuple(_expr(t, f"{where}[{i + 1}]") for i, t in enumerate(items))


def _var_names(n: int, m: int) -> list[str]:
    return [f"x{i + 1}" for i in range(n)] + [f"a{i + 1}" for i in range(m)]


# -- loading ---------------------------------------------------------------


def load_scenario_text(text: str, source: str = "<string>") -> Scenario:
    """Parse and fully validate scenario text; errors name the offending field."""
    cp = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#",), empty_lines_in_values=False
    )
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ScenarioError(f"{source}: parse error: {exc}") from None

    for sec in cp.sections():
        if sec not in _SECTIONS:
            raise ScenarioError(f"{source}: unknown section [{sec}]")
        allowed = _SECTIONS[sec]
        if allowed is not None:
            for key in cp[sec]:
                if key not in allowed:
                    raise ScenarioError(f"{source}: [{sec}] unknown key {key!r}")
    for sec in ("dims", "family", "z", "plan"):
        if not cp.has_section(sec):
            raise ScenarioError(f"{source}: missing section [{sec}]")

    def get(sec, key, default=None):
        if cp.has_option(sec, key):
            return cp[sec][key]
        if default is None:
            raise ScenarioError(f"{source}: [{sec}] missing key {key!r}")
        return default

    def w(sec, key):
        return f"{source}: [{sec}] {key}"

    name = get("scenario", "name", Path(source).stem) if cp.has_section("scenario") else Path(source).stem
    n = _int(get("dims", "n"), w("dims", "n"))
    m = _int(get("dims", "m"), w("dims", "m"))
    ell = _int(get("dims", "ell"), w("dims", "ell"))
    r_text = get("dims", "r", "inf").strip()
    r = INF if r_text == "inf" else _int(r_text, w("dims", "r"))
    names = _var_names(n, m)

    # backend first: expression validation depends on it
    kind = get("backend", "kind", "exact").strip() if cp.has_section("backend") else "exact"
    try:
        if kind == "float":
            backend = ScalarBackend(
                "float",
                float(get("backend", "rank_tol", "1e-10")),
                float(get("backend", "mem_tol", "1e-9")),
            )
        else:
            backend = ScalarBackend(kind)
    except ValueError as exc:
        raise ScenarioError(f"{w('backend', 'kind')}: {exc}") from None

    fam_keys = [f"F{i + 1}" for i in range(ell)]
    for key in cp["family"]:
        if key not in fam_keys:
            raise ScenarioError(f"{w('family', key)}: unexpected component (ell={ell})")
    components = tuple(_expr(get("family", k), w("family", k)) for k in fam_keys)

    box = []
    preds: tuple = ()
    if cp.has_section("domain"):
        for key in cp["domain"]:
            if key != "predicates" and key not in names:
                raise ScenarioError(f"{w('domain', key)}: unknown variable")
        for v in names:
            box.append(_interval(get("domain", v, "-inf, inf"), w("domain", v)))
        preds = _expr_list(get("domain", "predicates", " "), w("domain", "predicates"))
    else:
        box = [(-INF, INF)] * (n + m)

    try:
        domain = DomainSpec(tuple(box), preds)
        family = ParamFamily(n, m, ell, components, domain, r)
    except GeometryError as exc:
        raise ScenarioError(f"{source}: [family]/[domain]: {exc}") from None

    zkind = get("z", "kind").strip()
    try:
        if zkind == "slice":
            zeroed_text = get("z", "zeroed", " ")
            zeroed = tuple(_int(t, w("z", "zeroed")) for t in zeroed_text.split(",") if t.strip())
            z = SubmanifoldSpec(ell, "slice", zeroed, (),
                                _expr_list(get("z", "constraints", " "), w("z", "constraints")))
        elif zkind == "levelset":
            g = _expr_list(get("z", "g", " "), w("z", "g"))
            if not g:
                raise ScenarioError(f"{w('z', 'g')}: level set needs at least one equation (q = ell forbidden)")
            z = SubmanifoldSpec(ell, "levelset", (), g,
                                _expr_list(get("z", "constraints", " "), w("z", "constraints")))
        else:
            raise ScenarioError(f"{w('z', 'kind')}: expected slice or levelset, got {zkind!r}")
    except GeometryError as exc:
        raise ScenarioError(f"{source}: [z]: {exc}") from None

    for key in cp["plan"]:
        if key not in _PLAN_KEYS and key not in names:
            raise ScenarioError(f"{w('plan', key)}: unknown key")
    pbox = [_interval(get("plan", v), w("plan", v), finite=True) for v in names]
    for v, (lo, hi), (ulo, uhi) in zip(names, pbox, box):
        if lo < ulo or hi > uhi:
            raise ScenarioError(f"{w('plan', v)}: sampling box leaves the domain box")
    try:
        plan = SamplingPlan(
            x_box=tuple(pbox[:n]),
            a_box=tuple(pbox[n:]),
            x_count=_int(get("plan", "x_count", "21"), w("plan", "x_count")),
            a_count=_int(get("plan", "a_count", "21"), w("plan", "a_count")),
            seed=_int(get("plan", "seed", "0"), w("plan", "seed")),
            mode=get("plan", "mode", "grid").strip(),
            eps_alpha=_rational(get("plan", "eps_alpha", "0"), w("plan", "eps_alpha")),
            eps_beta=_rational(get("plan", "eps_beta", "0"), w("plan", "eps_beta")),
        )
    except ValueError as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"{source}: [plan]: {exc}") from None

    try:
        family.check_backend(backend)
        z.check_backend(backend)
    except ExprError as exc:
        raise ScenarioError(f"{w('backend', 'kind')}: {exc}") from None

    return Scenario(name.strip(), family, z, plan, backend)


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"{path}: cannot read scenario: {exc.strerror}") from None
    return load_scenario_text(text, str(path))


def builtin(name: str) -> Scenario:
    """One of the packaged scenarios, loaded through the ordinary loader."""
    if name not in BUILTINS:
        raise ScenarioError(f"unknown builtin {name!r}; choose from {', '.join(BUILTINS)}")
    text = resources.files("gentrans").joinpath("scenarios", f"{name}.scn").read_text("utf-8")
    return load_scenario_text(text, f"{name}.scn")


# -- canonical form --------------------------------------------------------


def _fmt_bound(v) -> str:
    if v == INF:
        return "inf"
    if v == -INF:
        return "-inf"
    return str(v)


def dump_scenario(s: Scenario) -> str:
    """Canonical text; ``load_scenario_text(dump_scenario(s)) == s``."""
    F, Z, P, B = s.family, s.z, s.plan, s.backend
    names = _var_names(F.n, F.m)
    out = ["[scenario]", f"name = {s.name}", "",
           "[dims]", f"n = {F.n}", f"m = {F.m}", f"ell = {F.ell}",
           f"r = {'inf' if F.declared_r == INF else int(F.declared_r)}", "",
           "[family]"]
    out += [f"F{i + 1} = {to_str(c)}" for i, c in enumerate(F.components)]
    out += ["", "[domain]"]
    out += [f"{v} = {_fmt_bound(lo)}, {_fmt_bound(hi)}" for v, (lo, hi) in zip(names, F.domain.box)]
    out += [f"predicates = {'; '.join(to_str(e) for e in F.domain.predicates)}", "", "[z]",
            f"kind = {Z.kind}"]
    if Z.kind == "slice":
        out.append(f"zeroed = {', '.join(str(i) for i in Z.zeroed)}")
    else:
        out.append(f"g = {'; '.join(to_str(e) for e in Z.g)}")
    out += [f"constraints = {'; '.join(to_str(e) for e in Z.constraints)}", "", "[plan]",
            f"seed = {P.seed}", f"mode = {P.mode}"]
    out += [f"{v} = {lo}, {hi}" for v, (lo, hi) in zip(names, P.x_box + P.a_box)]
    out += [f"x_count = {P.x_count}", f"a_count = {P.a_count}",
            f"eps_alpha = {P.eps_alpha}", f"eps_beta = {P.eps_beta}", "", "[backend]",
            f"kind = {B.kind}"]
    if not B.exact:
        out += [f"rank_tol = {B.rank_tol!r}", f"mem_tol = {B.mem_tol!r}"]
    return "\n".join(line.rstrip() for line in out) + "\n"


def content_hash(s: Scenario) -> str:
    return hashlib.sha256(dump_scenario(s).encode("utf-8")).hexdigest()


# -- runs ------------------------------------------------------------------


@dataclass(frozen=True)
class RunRecord:
    """Everything a run writes.  ``timestamp`` is None unless supplied, so
    identical inputs give identical bytes."""

    scenario: Scenario
    command: str
    genericity: object = None          # GenericityReport
    defect_table: tuple = ()           # DefectReports
    local_models: tuple = ()           # LocalModels
    tool_version: str = __version__
    timestamp: str | None = field(default=None)

    @property
    def scenario_hash(self) -> str:
        return content_hash(self.scenario)


def default_timestamp() -> str | None:
    """UTC time from SOURCE_DATE_EPOCH, the reproducible-builds convention."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if not epoch:
        return None
    from datetime import datetime, timezone

    return datetime.fromtimestamp(int(epoch), tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _defects_csv(table, n: int, m: int) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(_var_names(n, m) + ["on_z", "delta_family", "delta_slice", "stratum"])
    for rep in table:
        wr.writerow([str(v) for v in rep.point.coords]
                    + [int(rep.on_z), rep.delta_family, rep.delta_slice, str(rep.stratum)])
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def write_run(record: RunRecord, out_dir) -> Path:
    """Write manifest and reports under ``out_dir``; returns the manifest path.

    Output is a pure function of ``record``, so re-running overwrites with
    identical bytes.
    """
    out = Path(out_dir)
    files: dict[str, str] = {"scenario.scn": dump_scenario(record.scenario)}
    if record.genericity is not None:
        files["genericity.json"] = _json(record.genericity.as_dict())
    if record.defect_table:
        F = record.scenario.family
        files["defects.csv"] = _defects_csv(record.defect_table, F.n, F.m)
    if record.local_models:
        files["local_models.json"] = _json([lm.as_dict() for lm in record.local_models])
    manifest = {
        "scenario": record.scenario.name,
        "scenario_hash": record.scenario_hash,
        "command": record.command,
        "tool_version": record.tool_version,
        "timestamp": record.timestamp,
        "files": {
            name: hashlib.sha256(body.encode("utf-8")).hexdigest()
            for name, body in sorted(files.items())
        },
    }
    files["manifest.json"] = _json(manifest)
    try:
        out.mkdir(parents=True, exist_ok=True)
        for name, body in files.items():
            (out / name).write_text(body, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise RunWriteError(f"cannot write run to directory {out}: {exc.strerror or exc}") from None
    return out / "manifest.json"
