"""Batch front-end: classification, atlases, foliations, K-fixtures, indices.

Subcommands mirror the library suites; reports are machine-readable (JSON
is emitted with sorted keys, so identical configs give identical bytes)
and exit codes follow a fixed contract: 0 all checks passed, 2 a check
failed, 3 the input could not be used.  ORBITON_SEED overrides any --seed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Optional, Sequence

import numpy as np

from . import classify as _classify
from . import coadjoint as _coadjoint
from . import families as _families
from . import fredholm as _fredholm
from . import kindex as _kindex
from . import lie_core as _lie_core
from . import orbit_atlas as _atlas

__all__ = ["main", "ParseError", "InputError", "RunConfig"]

EXIT_OK = 0
EXIT_CHECK_FAILED = 2
EXIT_INPUT_ERROR = 3

_DEFAULT_TOLERANCES = {
    "membership": 1e-8,
    "tangency": 1e-6,
}

# Aliases whose structure tensors equal a normal-form family member, so
# atlas and foliation runs accept them directly.
_ALIAS_FAMILY = {"real-diamond": "g442", "aff-c": "g424"}

_LADDER = ((6.0, 1024), (8.0, 2048))
_FULL_LADDER = ((6.0, 1024), (8.0, 2048), (10.0, 4096))


class ParseError(Exception):
    """Input file exists but cannot be parsed."""


class InputError(Exception):
    """Unusable configuration or input data."""


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); keep 2 for checks
        raise _UsageError(message)


class RunConfig:
    """Resolved invocation: command, input, seed, tolerances, output."""

    def __init__(self, command: str, args: argparse.Namespace):
        self.command = command
        self.input_path = getattr(args, "input", None)
        env_seed = os.environ.get("ORBITON_SEED")
        if env_seed is not None:
            try:
                self.seed = int(env_seed)
            except ValueError:
                raise InputError(
                    f"ORBITON_SEED must be an integer, got {env_seed!r}")
        else:
            self.seed = int(getattr(args, "seed", 0))
        self.tolerances = dict(_DEFAULT_TOLERANCES)
        for item in getattr(args, "tol", None) or []:
            key, _, value = item.partition("=")
            if key not in self.tolerances:
                raise InputError(
                    f"unknown tolerance {key!r}; known: "
                    f"{sorted(self.tolerances)}")
            try:
                self.tolerances[key] = float(value)
            except ValueError:
                raise InputError(f"bad tolerance value in {item!r}")
        self.output_path = getattr(args, "output", None)
        self.format = getattr(args, "format", None)
        self.args = args


def _resolve_family(name: str) -> str:
    if name in _families.FAMILIES:
        return name
    if name in _ALIAS_FAMILY:
        return _ALIAS_FAMILY[name]
    raise InputError(
        f"{name!r} is not a normal-form family; known: "
        f"{sorted(_families.FAMILIES)} plus aliases "
        f"{sorted(_ALIAS_FAMILY)}")


def _parse_floats(text: str, label: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise InputError(f"bad {label}: {text!r} (expected comma floats)")


def _load_algebra(cfg: RunConfig):
    name = getattr(cfg.args, "builtin", None)
    if name is not None:
        try:
            return _families.builtin(name), f"builtin:{name}"
        except KeyError as exc:
            raise InputError(exc.args[0])
    if cfg.input_path is None:
        raise InputError("provide an input JSON path or --builtin NAME")
    # The positional input doubles as a builtin name; an existing file
    # always wins.
    if not os.path.exists(cfg.input_path):
        try:
            return (_families.builtin(cfg.input_path),
                    f"builtin:{cfg.input_path}")
        except KeyError:
            pass
    try:
        with open(cfg.input_path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {cfg.input_path}: {exc}")
    try:
        json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{cfg.input_path}: {exc}")
    try:
        return (_lie_core.load_algebra_json(text),
                str(cfg.input_path))
    except (_lie_core.LieAlgebraError, KeyError, TypeError,
            ValueError) as exc:
        raise InputError(f"{cfg.input_path}: not a valid algebra: {exc}")


# ---------------------------------------------------------------------------
# classify
# ---------------------------------------------------------------------------

def run_classify(cfg: RunConfig):
    g, source = _load_algebra(cfg)
    report = {
        "schema": 1,
        "command": "classify",
        "source": source,
        "dim": g.dim,
        "md4": None,
        "md_bar": None,
        "status": "ok",
    }
    code = EXIT_OK
    if g.dim == 4:
        try:
            label = _classify.classify_md4(g, seed=cfg.seed)
        except (_classify.NotSolvableError,
                _classify.DegenerateJordanError) as exc:
            report["md4"] = {"error": type(exc).__name__, "detail": str(exc)}
            report["status"] = "fail"
            return report, EXIT_CHECK_FAILED
        report["md4"] = label.to_json()
        report["decomposable"] = label.decomposition is not None
        if label.family == "NotMD4":
            report["status"] = "fail"
            code = EXIT_CHECK_FAILED
        else:
            exp_ok, _ = _classify.is_exponential(g, seed=cfg.seed)
            report["exponential"] = bool(exp_ok)
    bar = _classify.classify_md_bar(g, seed=cfg.seed)
    report["md_bar"] = bar.to_json()
    return report, code


def _text_classify(report: dict) -> str:
    lines = [f"source: {report['source']}", f"dim: {report['dim']}"]
    md4 = report.get("md4")
    if md4:
        if "error" in md4:
            lines.append(f"md4: {md4['error']} ({md4['detail']})")
        else:
            lines.append(f"family: {md4['family']}")
            if md4.get("params"):
                lines.append("params: " + ", ".join(
                    f"{p:.12g}" for p in md4["params"]))
            if report.get("decomposable"):
                lines.append("decomposable: true")
            if "exponential" in report:
                lines.append(
                    f"exponential: {str(report['exponential']).lower()}")
    lines.append(f"md_bar: {report['md_bar']['tag']}")
    lines.append(f"status: {report['status']}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# atlas
# ---------------------------------------------------------------------------

def _cloud_with_residuals(g, family, params, F, model, n_points, seed,
                          labels=("x", "y", "z", "t")):
    count = 1 if model.kind == "Point" else max(n_points, 1)
    sample = _coadjoint.sample_orbit(g, F, count, seed=seed)
    residuals = [_atlas.orbit_membership(model, p) for p in sample.points]
    return sample.to_csv(labels=labels), float(max(residuals))


def run_atlas(cfg: RunConfig):
    args = cfg.args
    family = _resolve_family(args.family)
    params = (_parse_floats(args.params, "--params") if args.params
              else _families.default_params(family))
    try:
        g = _families.build_family(family, *params)
    except (KeyError, ValueError) as exc:
        raise InputError(str(exc))
    tol = cfg.tolerances["membership"]
    rng = np.random.default_rng(cfg.seed)
    report = {
        "schema": 1,
        "command": "atlas",
        "family": family,
        "params": [float(p) for p in params],
        "samples_per_base": args.samples,
        "strata": [],
    }
    worst = 0.0
    if args.base:
        F = _parse_floats(args.base, "--base")
        if len(F) != 4:
            raise InputError("--base needs exactly 4 coordinates")
        stratum = _atlas.stratum_of(family, F, params)
        model = _atlas.orbit_model(family, F, params)
        csv_text, res = _cloud_with_residuals(
            g, family, params, np.array(F), model, args.samples, cfg.seed)
        worst = res
        report["strata"].append({
            "name": stratum,
            "bases": [{
                "model": model.to_json(),
                "orbit_dimension": _coadjoint.orbit_dimension(g, F),
                "max_residual": res,
                "cloud_csv": csv_text,
            }],
        })
    else:
        for stratum in _atlas.strata_names(family, params):
            entry = {"name": stratum, "bases": []}
            for _ in range(args.bases):
                F = _atlas.random_base(family, stratum, rng, params)
                model = _atlas.orbit_model(family, F, params)
                csv_text, res = _cloud_with_residuals(
                    g, family, params, F, model, args.samples,
                    int(rng.integers(2 ** 31)))
                worst = max(worst, res)
                entry["bases"].append({
                    "model": model.to_json(),
                    "orbit_dimension": _coadjoint.orbit_dimension(g, F),
                    "max_residual": res,
                    "cloud_csv": csv_text,
                })
            report["strata"].append(entry)
    report["max_residual"] = worst
    report["membership_tolerance"] = tol
    passed = worst < tol
    report["status"] = "ok" if passed else "fail"
    return report, EXIT_OK if passed else EXIT_CHECK_FAILED


def _text_atlas(report: dict) -> str:
    lines = [f"family: {report['family']}"]
    if report["params"]:
        lines.append(
            "params: " + ", ".join(f"{p:.12g}" for p in report["params"]))
    for entry in report["strata"]:
        kinds = {b["model"]["kind"] for b in entry["bases"]}
        res = max(b["max_residual"] for b in entry["bases"])
        lines.append(f"stratum {entry['name']}: {len(entry['bases'])} "
                     f"base(s), kind {'/'.join(sorted(kinds))}, "
                     f"max residual {res:.3e}")
    lines.append(f"max_residual: {report['max_residual']:.3e}")
    lines.append(f"status: {report['status']}")
    return "\n".join(lines) + "\n"


def _write_atlas_csvs(report: dict, output_path: str) -> list:
    stem, _ = os.path.splitext(output_path)
    written = []
    for entry in report["strata"]:
        for idx, base in enumerate(entry["bases"]):
            csv_text = base.get("cloud_csv")
            if not csv_text:
                continue
            path = f"{stem}_{report['family']}_{entry['name']}_{idx}.csv"
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(csv_text)
            written.append(path)
    return written


# ---------------------------------------------------------------------------
# foliation
# ---------------------------------------------------------------------------

def run_foliation(cfg: RunConfig):
    args = cfg.args
    names = ([_resolve_family(args.family)] if args.family
             else list(_families.FAMILY_ORDER))
    tol = cfg.tolerances["tangency"]
    rng = np.random.default_rng(cfg.seed)
    rows = []
    all_ok = True
    for name in names:
        params = _families.default_params(name)
        spec = _atlas.distribution_spec(name, params)
        g = _families.build_family(name, *params)
        expected = spec.generic_rank
        worst_tan = 0.0
        rank_ok = True
        generic = [s for s in _atlas.strata_names(name, params)
                   if s != "fixed-points"]
        per_stratum = max(1, args.points // (20 * len(generic)))
        for stratum in generic:
            for _ in range(20):
                F = _atlas.random_base(name, stratum, rng, params)
                sample = _coadjoint.sample_orbit(
                    g, F, per_stratum, seed=int(rng.integers(2 ** 31)))
                for p in sample.points:
                    if _atlas.distribution_rank_at(spec, p) != expected:
                        rank_ok = False
                worst_tan = max(worst_tan,
                                _atlas.check_tangency(spec, sample, g))
        ok = rank_ok and worst_tan < tol
        all_ok = all_ok and ok
        rows.append({
            "family": name,
            "system": spec.system,
            "generic_rank": expected,
            "rank_ok": rank_ok,
            "max_tangency_residual": worst_tan,
            "status": "ok" if ok else "fail",
        })
    report = {
        "schema": 1,
        "command": "foliation",
        "tangency_tolerance": tol,
        "families": rows,
        "status": "ok" if all_ok else "fail",
    }
    return report, EXIT_OK if all_ok else EXIT_CHECK_FAILED


def _text_foliation(report: dict) -> str:
    lines = []
    for row in report["families"]:
        verdict = "PASS" if row["status"] == "ok" else "FAIL"
        lines.append(
            f"{row['family']} ({row['system']}): rank {row['generic_rank']}"
            f" {'ok' if row['rank_ok'] else 'WRONG'},"
            f" tangency {row['max_tangency_residual']:.3e}: {verdict}")
    lines.append(f"status: {report['status']}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# kindex
# ---------------------------------------------------------------------------

def _kindex_checks(grid: int) -> list:
    checks = []

    def add(name, fn):
        try:
            ok, detail = fn()
        except _kindex.NonIntegerResult as exc:
            ok, detail = False, f"{exc}; hint: increase --grid"
        except _kindex.KIndexError as exc:
            ok, detail = False, str(exc)
        checks.append({"name": name, "pass": bool(ok), "detail": detail})

    def winding_u_plus():
        w = _kindex.winding_number(_kindex.u_plus_loop(), grid=grid)
        return (w.integer == 1 and abs(w.raw - 1.0) < 1e-6,
                f"winding {w.integer}, raw off by {abs(w.raw - 1.0):.2e}")

    add("winding_u_plus", winding_u_plus)

    def idempotent():
        fx = _kindex.load_fixture("lifts")["idempotent"]
        pts = [(p * math.pi, r) for p in fx["phi_grid_over_pi"]
               for r in fx["r_grid"]]
        res = _kindex.idempotent_residual(_kindex.idempotent_p, pts)
        return res < 1e-12, f"residual {res:.2e}"

    add("idempotent_p", idempotent)

    def delta0_half_line():
        d = _kindex.delta0_via_winding(_kindex.half_line_lift_loops(),
                                       grid=grid)
        want = _kindex.hexagon("gamma1").maps[2].matrix
        return (d.matrix == want,
                "matrix matches" if d.matrix == want
                else f"got {d.matrix}, want {want}")

    add("delta0_half_line", delta0_half_line)

    def delta0_gamma4():
        d = _kindex.delta0_via_winding(_kindex.vertex_lift_loops(),
                                       grid=grid)
        want = _kindex.hexagon("gamma4").maps[2].matrix
        return (d.matrix == want,
                "matrix matches" if d.matrix == want
                else f"got {d.matrix}, want {want}")

    add("delta0_gamma4", delta0_gamma4)

    def vertex_windings():
        loops = _kindex.vertex_lift_loops()[0]
        w_first = _kindex.winding_number(loops[0], grid=grid).integer
        w_last = _kindex.winding_number(loops[-1], grid=grid).integer
        return ((w_first, w_last) == (-1, 1),
                f"first {w_first}, last {w_last}")

    add("vertex_lift_windings", vertex_windings)

    for name in _kindex.hexagon_names():
        def exactness(name=name):
            res = _kindex.six_term_check(_kindex.hexagon(name))
            bad = [k for k, v in res["exact_at"].items() if not v]
            return (res["all_exact"],
                    "exact" if res["all_exact"] else f"fails at {bad}")

        add(f"six_term_{name}", exactness)

    def table():
        pt = _kindex.k_table("point")
        s1 = _kindex.k_table("S1")
        ok = (str(pt.k0) == "Z" and pt.k1.is_zero
              and str(s1.k0) == "Z" and str(s1.k1) == "Z")
        return ok, "spot values as expected"

    add("k_table", table)
    return checks


def run_kindex(cfg: RunConfig):
    args = cfg.args
    case = args.case
    if case == "affR":
        pair = _fredholm.index_pair(6.0, 1024)
        indices = (pair[1].index, pair[2].index)
        ok = indices == (1, 1)
        report = {
            "schema": 1,
            "command": "kindex",
            "case": "affR",
            "index_pair": list(indices),
            "summary": f"index ({indices[0]},{indices[1]})",
            "checks": [{
                "name": "affR_index",
                "pass": ok,
                "detail": f"index ({indices[0]},{indices[1]})",
            }],
            "status": "ok" if ok else "fail",
        }
        return report, EXIT_OK if ok else EXIT_CHECK_FAILED
    checks = _kindex_checks(args.grid)
    if case is not None:
        wanted = [c for c in checks
                  if c["name"] == case or c["name"] == f"six_term_{case}"]
        if not wanted:
            raise InputError(
                f"unknown case {case!r}; cases: "
                f"{[c['name'] for c in checks]} or affR")
        checks = wanted
    all_ok = all(c["pass"] for c in checks)
    report = {
        "schema": 1,
        "command": "kindex",
        "grid": args.grid,
        "checks": checks,
        "status": "ok" if all_ok else "fail",
    }
    return report, EXIT_OK if all_ok else EXIT_CHECK_FAILED


def _text_kindex(report: dict) -> str:
    lines = []
    if "summary" in report:
        lines.append(f"affR: {report['summary']}")
    for c in report.get("checks", []):
        verdict = "PASS" if c["pass"] else "FAIL"
        lines.append(f"{c['name']}: {verdict} ({c['detail']})")
    lines.append(f"status: {report['status']}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# fredholm
# ---------------------------------------------------------------------------

def _fredholm_single(which: int, L: float, N: int) -> dict:
    grid = _fredholm.build_grid(L, N)
    op = _fredholm.assemble_operator(which, grid)
    result = _fredholm.numerical_index(op)
    oracle = _fredholm.ode_kernel_oracle(grid)
    parity = _fredholm.parity_check(result.ker_vectors, which)
    cosine = (_fredholm.kernel_cosine(grid, result.ker_vectors[0],
                                      oracle.f, which)
              if result.ker_vectors else None)
    entry = {
        "which": which,
        "L": L,
        "N": N,
        "result": result.to_json(),
        "parity_residuals": [p.residual for p in parity],
        "parity_ok": all(p.ok for p in parity),
        "oracle": oracle.to_json(),
        "oracle_cosine": cosine,
    }
    entry["ok"] = (entry["parity_ok"]
                   and (cosine is None or cosine > 0.999))
    return entry


def run_fredholm(cfg: RunConfig):
    args = cfg.args
    which_list = [args.which] if args.which else [1, 2]
    ladder = list(_FULL_LADDER if args.full_ladder else _LADDER)
    main_rung = (float(args.L), int(args.N))
    if main_rung not in ladder:
        ladder.append(main_rung)
    report = {
        "schema": 1,
        "command": "fredholm",
        "operators": [],
        "convergence": [],
        "warnings": [],
        "status": "ok",
    }
    if args.N < 256:
        report["warnings"].append(
            f"N={args.N} is coarse; indices are indicative only")
    code = EXIT_OK
    indices = {}
    try:
        for which in which_list:
            entry = _fredholm_single(which, *main_rung)
            report["operators"].append(entry)
            indices[which] = entry["result"]["index"]
            if not entry["ok"]:
                code = EXIT_CHECK_FAILED
            for (L, N) in ladder:
                if (L, N) == main_rung:
                    row = entry["result"]
                else:
                    grid = _fredholm.build_grid(L, N)
                    row = _fredholm.numerical_index(
                        _fredholm.assemble_operator(which, grid)).to_json()
                report["convergence"].append({
                    "which": which, "L": L, "N": N,
                    "dim_ker": row["dim_ker"],
                    "dim_coker": row["dim_coker"],
                    "index": row["index"],
                    "gap_ratio": row["gap_ratio"],
                })
    except (_fredholm.GapTooSmall, _fredholm.AsymptoticMismatch) as exc:
        report["error"] = {"type": type(exc).__name__, "detail": str(exc),
                           "suggestion": "double N and rerun"}
        report["status"] = "fail"
        return report, EXIT_CHECK_FAILED
    ladder_ok = True
    for which in which_list:
        rows = [r for r in report["convergence"] if r["which"] == which]
        if len({(r["dim_ker"], r["dim_coker"]) for r in rows}) > 1:
            ladder_ok = False
    if not ladder_ok:
        report["warnings"].append("index varies across the ladder")
        code = EXIT_CHECK_FAILED
    if len(which_list) == 2:
        report["index_pair"] = [indices[1], indices[2]]
        report["summary"] = f"index ({indices[1]},{indices[2]})"
    report["status"] = "ok" if code == EXIT_OK else "fail"
    return report, code


def _text_fredholm(report: dict) -> str:
    lines = []
    if "error" in report:
        err = report["error"]
        lines.append(f"error: {err['type']}: {err['detail']}")
        lines.append(f"suggestion: {err['suggestion']}")
    for entry in report.get("operators", []):
        r = entry["result"]
        gap = r["gap_ratio"]
        lines.append(
            f"S{entry['which']} (L={entry['L']:g},N={entry['N']}): "
            f"ker {r['dim_ker']} coker {r['dim_coker']} index {r['index']}"
            f" gap {gap:.3g}" if gap is not None else
            f"S{entry['which']}: ker {r['dim_ker']} coker {r['dim_coker']}")
        if entry["oracle_cosine"] is not None:
            lines.append(f"  parity {max(entry['parity_residuals']):.2e}, "
                         f"oracle cosine {entry['oracle_cosine']:.6f}")
    for row in report.get("convergence", []):
        lines.append(
            f"  ladder S{row['which']} (L={row['L']:g},N={row['N']}): "
            f"({row['dim_ker']},{row['dim_coker']})")
    if "summary" in report:
        lines.append(report["summary"])
    for w in report.get("warnings", []):
        lines.append(f"warning: {w}")
    lines.append(f"status: {report['status']}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# all
# ---------------------------------------------------------------------------

def run_all(cfg: RunConfig):
    rng_seed = cfg.seed
    suites = {}
    code = EXIT_OK

    verdicts = []
    for name in _families.FAMILY_ORDER:
        g = _families.build_family(name)
        label = _classify.classify_md4(g, seed=rng_seed)
        verdicts.append({"family": name, "got": label.family,
                         "ok": label.family == name})
    bar = {
        "aff-r": _classify.classify_md_bar(_families.aff_r()).tag,
        "aff-c": _classify.classify_md_bar(_families.aff_c()).tag,
        "h3": _classify.classify_md_bar(_families.heisenberg3()).tag,
    }
    classify_ok = (all(v["ok"] for v in verdicts)
                   and bar == {"aff-r": "AffR", "aff-c": "AffC",
                               "h3": "NotMDBar"})
    suites["classify"] = {"families": verdicts, "md_bar": bar,
                          "status": "ok" if classify_ok else "fail"}

    atlas_worst = 0.0
    rng = np.random.default_rng(rng_seed)
    for name in _families.FAMILY_ORDER:
        params = _families.default_params(name)
        g = _families.build_family(name, *params)
        for stratum in _atlas.strata_names(name, params):
            for _ in range(2):
                F = _atlas.random_base(name, stratum, rng, params)
                model = _atlas.orbit_model(name, F, params)
                _, res = _cloud_with_residuals(
                    g, name, params, F, model, 50,
                    int(rng.integers(2 ** 31)))
                atlas_worst = max(atlas_worst, res)
    atlas_ok = atlas_worst < cfg.tolerances["membership"]
    suites["atlas"] = {"max_residual": atlas_worst,
                       "status": "ok" if atlas_ok else "fail"}

    fol_cfg = RunConfig("foliation", argparse.Namespace(
        family=None, points=100, seed=rng_seed, tol=None, output=None,
        format=None))
    fol_cfg.tolerances = cfg.tolerances
    fol_report, fol_code = run_foliation(fol_cfg)
    suites["foliation"] = {"status": fol_report["status"]}

    kin_cfg = RunConfig("kindex", argparse.Namespace(
        grid=4001, case=None, seed=rng_seed, tol=None, output=None,
        format=None))
    kin_report, kin_code = run_kindex(kin_cfg)
    suites["kindex"] = {"status": kin_report["status"],
                        "checks": kin_report["checks"]}

    pair = _fredholm.index_pair(6.0, 1024)
    fred_ok = (pair[1].dim_ker, pair[1].dim_coker,
               pair[2].dim_ker, pair[2].dim_coker) == (1, 0, 1, 0)
    suites["fredholm"] = {
        "L": 6.0, "N": 1024,
        "index_pair": [pair[1].index, pair[2].index],
        "status": "ok" if fred_ok else "fail",
    }

    for sub in suites.values():
        if sub["status"] != "ok":
            code = EXIT_CHECK_FAILED
    report = {
        "schema": 1,
        "command": "all",
        "suites": suites,
        "status": "ok" if code == EXIT_OK else "fail",
    }
    return report, code


def _text_all(report: dict) -> str:
    lines = []
    for name, sub in report["suites"].items():
        verdict = "PASS" if sub["status"] == "ok" else "FAIL"
        extra = ""
        if name == "atlas":
            extra = f" (max residual {sub['max_residual']:.3e})"
        if name == "fredholm":
            pair = sub["index_pair"]
            extra = f" (index ({pair[0]},{pair[1]}))"
        lines.append(f"{name}: {verdict}{extra}")
    lines.append(f"status: {report['status']}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# plumbing
# ---------------------------------------------------------------------------

_TEXT_RENDERERS = {
    "classify": _text_classify,
    "atlas": _text_atlas,
    "foliation": _text_foliation,
    "kindex": _text_kindex,
    "fredholm": _text_fredholm,
    "all": _text_all,
}

_RUNNERS = {
    "classify": run_classify,
    "atlas": run_atlas,
    "foliation": run_foliation,
    "kindex": run_kindex,
    "fredholm": run_fredholm,
    "all": run_all,
}

_DEFAULT_FORMAT = {
    "classify": "json",
    "atlas": "json",
    "foliation": "text",
    "kindex": "text",
    "fredholm": "json",
    "all": "json",
}


def _render(cfg: RunConfig, report: dict) -> str:
    fmt = cfg.format or _DEFAULT_FORMAT[cfg.command]
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2,
                          allow_nan=False) + "\n"
    if fmt == "text":
        return _TEXT_RENDERERS[cfg.command](report)
    if fmt == "csv":
        if cfg.command != "atlas":
            raise InputError("csv output is only available for atlas runs")
        parts = [base["cloud_csv"]
                 for entry in report["strata"] for base in entry["bases"]
                 if base.get("cloud_csv")]
        if not parts:
            raise InputError("no point clouds sampled; pass --samples")
        return "".join(parts)
    raise InputError(f"unknown format {fmt!r}")


def build_parser() -> _Parser:
    parser = _Parser(prog="orbiton",
                     description="coadjoint-orbit and index toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--output", default=None,
                       help="write the report to this path")
        p.add_argument("--format", choices=("json", "csv", "text"),
                       default=None)
        p.add_argument("--tol", action="append", metavar="NAME=VALUE",
                       help="override a tolerance "
                            f"(known: {sorted(_DEFAULT_TOLERANCES)})")

    p = sub.add_parser("classify", help="identify an algebra")
    p.add_argument("input", nargs="?", default=None,
                   help="path to an algebra JSON file")
    p.add_argument("--builtin", default=None,
                   help="builtin registry name instead of a file")
    common(p)

    p = sub.add_parser("atlas", help="orbit models and point clouds")
    p.add_argument("--family", required=True,
                   help="normal-form family name or alias")
    p.add_argument("--params", default=None, help="comma floats")
    p.add_argument("--base", default=None,
                   help="one functional, comma floats (else random bases)")
    p.add_argument("--bases", type=int, default=3,
                   help="random bases per stratum")
    p.add_argument("--samples", type=int, default=200,
                   help="orbit points per base")
    common(p)

    p = sub.add_parser("foliation", help="distribution rank and tangency")
    p.add_argument("--family", default=None)
    p.add_argument("--points", type=int, default=200)
    common(p)

    p = sub.add_parser("kindex", help="K-theory fixture checks")
    p.add_argument("--grid", type=int, default=4001,
                   help="winding-number grid size")
    p.add_argument("--case", default=None,
                   help="run one named check, or 'affR'")
    common(p)

    p = sub.add_parser("fredholm", help="numerical Fredholm indices")
    p.add_argument("--which", type=int, choices=(1, 2), default=None)
    p.add_argument("--L", type=float, default=8.0)
    p.add_argument("--N", type=int, default=2048)
    p.add_argument("--full-ladder", action="store_true",
                   help="include the (10,4096) rung")
    common(p)

    p = sub.add_parser("all", help="run every suite")
    common(p)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"orbiton: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    try:
        cfg = RunConfig(args.command, args)
        report, code = _RUNNERS[args.command](cfg)
        text = _render(cfg, report)
    except (InputError, ParseError) as exc:
        print(f"orbiton: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except (_fredholm.BadParams, _fredholm.GridTooCoarse) as exc:
        print(f"orbiton: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8") as fh:
            fh.write(text)
        if cfg.command == "atlas" and (cfg.format or "json") == "json":
            _write_atlas_csvs(report, cfg.output_path)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
