"""Command-line entry point: verify, soliton, evolve, report, demo.

Exit status: 0 success, 2 verification or drift mismatch, 3 kinematic or box
error, 4 numerical failure during evolution, 1 bad input.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from fractions import Fraction
from importlib import resources
from typing import Dict, List, Optional, Sequence

import numpy as np

EXIT_OK, EXIT_INPUT, EXIT_MISMATCH, EXIT_KINEMATIC, EXIT_NUMERIC = 0, 1, 2, 3, 4


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INPUT):
        super().__init__(message)
        self.code = code


def _fmt(x: float) -> str:
    return "%.17g" % x


def _dump_json(obj, path: Optional[str] = None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True, default=str) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        _write_text(path, text)


def _write_text(path: str, text: str) -> None:
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)
    tmp = path + ".tmp"
    with open(tmp, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _write_csv(path: str, header: Sequence[str], rows) -> None:
    lines = [",".join(header)]
    lines += [",".join(_fmt(float(v)) for v in row) for row in rows]
    _write_text(path, "\n".join(lines) + "\n")


def _pair(text: str, conv, name: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"{name} expects two comma-separated values, got {text!r}")
    try:
        return conv(parts[0]), conv(parts[1])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"{name}: {exc}") from None


def _sigma2_arg(text: str):
    if text == "symbolic":
        return None
    if text in ("1", "+1", "-1"):
        return int(text)
    raise argparse.ArgumentTypeError("sigma2 must be 1, -1 or symbolic")


def _sign_arg(text: str) -> int:
    if text in ("1", "+1", "-1"):
        return int(text)
    raise argparse.ArgumentTypeError("gb-sign must be 1 or -1")


# ----------------------------------------------------------------------------
# verify


def read_extra(path: str):
    """Entries ``(conslaw NAME T X Y Q)`` or ``(symmetry NAME P)``; ``;`` starts a comment."""
    from .jetalgebra import SexprError
    from .jetalgebra.sexpr import build, parse_tree

    with open(path) as fh:
        lines = [ln.split(";", 1)[0] for ln in fh]
    text = "\n".join(lines).strip()
    if not text:
        return []
    try:
        forms = parse_tree("(" + text + ")")
    except SexprError as exc:
        raise CliError(f"{path}: {exc}") from None
    out = []
    for form in forms:
        if not isinstance(form, list) or len(form) < 2 or not isinstance(form[1], str):
            raise CliError(f"{path}: each entry must be (conslaw NAME T X Y Q) or (symmetry NAME P)")
        head, name, args = form[0], form[1], form[2:]
        try:
            if head == "conslaw" and len(args) == 4:
                out.append(("conslaw", name, [build(a) for a in args]))
            elif head == "symmetry" and len(args) == 1:
                out.append(("symmetry", name, [build(args[0])]))
            else:
                raise CliError(f"{path}: malformed entry {name!r}")
        except SexprError as exc:
            raise CliError(f"{path}: entry {name!r}: {exc}") from None
    return out


def cmd_verify(args) -> int:
    from .catalog import verify_all, verify_user_entry
    from .models import make_model

    rep = verify_all(args.model, args.p, args.sigma2, args.gb_sign,
                     include_errata=not args.no_errata)
    doc = rep.to_json()
    ok = rep.ok
    if args.extra:
        model = make_model(args.model, args.p, args.sigma2, args.gb_sign)
        extra = []
        for kind, name, exprs in read_extra(args.extra):
            if kind == "conslaw":
                e = verify_user_entry(model, name, *exprs)
            else:
                e = verify_user_entry(model, name, P=exprs[0])
            extra.append(e.to_json())
            if not (e.verified and e.matches_expectation):
                ok = False
                print(f"MISMATCH {name}: witness {e.witness}", file=sys.stderr)
        doc["extra"] = extra
        doc["ok"] = ok
    for e in rep.entries:
        if not e.matches_expectation:
            print(f"MISMATCH {e.name}: witness {e.witness}", file=sys.stderr)
    _dump_json(doc, args.json)
    return EXIT_OK if ok else EXIT_MISMATCH


# ----------------------------------------------------------------------------
# soliton


def _soliton_params(kind, p, mu, nu, sigma2, gb_sign):
    from .soliton import SolitonParams

    try:
        return SolitonParams(kind, p, mu, nu, sigma2, gb_sign)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _build_profile(params):
    from .soliton import KinematicError, build_profile

    try:
        return build_profile(params)
    except KinematicError as exc:
        raise CliError(f"kinematic condition fails: {exc}", EXIT_KINEMATIC) from None


def _profile_summary(params, profile) -> dict:
    from .soliton import first_integral_values, ode_residual, ode_residual_scale

    xi = np.linspace(-20 / profile.B, 20 / profile.B, 4001)
    r = ode_residual(params, profile, xi)
    c1, c2 = first_integral_values(params, profile, xi)
    return {
        "A": profile.A, "B": profile.B, "kappa": params.kappa, "theta": params.theta,
        "speed": params.speed,
        "ode_residual_rel": float(np.max(np.abs(r)) / ode_residual_scale(params, profile, xi)),
        "max_abs_C1": float(np.max(np.abs(c1))), "max_abs_C2": float(np.max(np.abs(c2))),
    }


def _sample(params, profile, grid, tail_eps):
    from .soliton import BoxTooSmallError, sample_field

    try:
        return sample_field(params, grid, 0.0, tail_eps, profile)
    except BoxTooSmallError as exc:
        raise CliError(str(exc), EXIT_KINEMATIC) from None


def _grid(nx, ny, Lx, Ly):
    from .spectral.grid import GridSpec

    try:
        return GridSpec(int(nx), int(ny), float(Lx), float(Ly))
    except ValueError as exc:
        raise CliError(str(exc)) from None


def cmd_soliton(args) -> int:
    from .soliton import profile_table, sample_rate
    from .spectral.grid import write_field

    params = _soliton_params(args.model, args.p, args.mu, args.nu, args.sigma2, args.gb_sign)
    profile = _build_profile(params)
    summary = _profile_summary(params, profile)
    if args.out:
        grid = _grid(*args.grid, *args.box)
        f = _sample(params, profile, grid, args.tail_eps)
        write_field(args.out, f)
        summary["tail"] = f.meta["tail"]
        summary["field"] = args.out
        if args.model == "gb2d":
            rate_path = args.out_rate or _rate_path(args.out)
            write_field(rate_path, sample_rate(params, grid, 0.0, profile), params.model_descriptor())
            summary["rate_field"] = rate_path
    if args.profile_csv:
        xi = np.linspace(-20 / profile.B, 20 / profile.B, args.profile_points)
        _write_csv(args.profile_csv, ("xi", "U", "px", "py", "e"), profile_table(params, profile, xi))
        summary["profile_csv"] = args.profile_csv
    _dump_json(summary)
    return EXIT_OK if summary["ode_residual_rel"] < 1e-10 else EXIT_MISMATCH


def _rate_path(path: str) -> str:
    root, ext = os.path.splitext(path)
    return f"{root}_ut{ext or '.bin'}"


# ----------------------------------------------------------------------------
# config


def load_schema() -> dict:
    text = resources.files("kpsoliton").joinpath("schema/run_config.schema.json").read_text()
    return json.loads(text)


def load_config(path: str) -> dict:
    import jsonschema

    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read config {path}: {exc}") from None
    try:
        jsonschema.validate(cfg, load_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(x) for x in exc.absolute_path) or "<root>"
        raise CliError(f"invalid config at {where}: {exc.message}") from None
    return cfg


def _perturbation(grid, amplitude: float, seed: int, modes: int) -> np.ndarray:
    """Seeded smooth noise with zero x-mean on every y-line."""
    rng = np.random.default_rng(seed)
    X, Y = grid.mesh()
    out = np.zeros(grid.shape)
    for jx in range(1, modes + 1):
        for jy in range(-modes, modes + 1):
            a, ph = rng.normal(), rng.uniform(0, 2 * math.pi)
            out += a * np.cos(2 * math.pi * (jx * X / grid.Lx + jy * Y / grid.Ly) + ph)
    m = float(np.max(np.abs(out)))
    return amplitude * out / m if m else out


def _check_power_admissible(p: Fraction, perturbed: bool, gb_sign) -> None:
    if p.denominator % 2 == 0 and perturbed:
        raise CliError(f"p = {p} has an even denominator; perturbed runs may produce u < 0 "
                       "where u^p has no real value")


def run_evolution(cfg: dict, out_dir: str, log=None) -> dict:
    """Evolve the configured soliton; writes CSV, snapshots and the run JSON."""
    from .diagnostics import csv_columns, csv_row, drift_report
    from .models import GB2D, make_model
    from .soliton import sample_rate
    from .spectral.grid import Field2D, write_field
    from .spectral.solver import (
        IndeterminateSpeed, SolverBlowup, evolve, gb_growth_rate, gb_safe_horizon, init_gb,
        init_gkp, measure_speed,
    )

    m, g, s, t = cfg["model"], cfg["grid"], cfg["soliton"], cfg["time"]
    out = cfg.get("output", {})
    p = Fraction(str(m["p"]))
    model = make_model(m["model"], p, m["sigma2"], m.get("gb_sign"))
    pert = cfg.get("perturbation", {"amplitude": 0.0, "seed": cfg.get("seed", 0)})
    _check_power_admissible(p, pert["amplitude"] > 0, m.get("gb_sign"))
    params = _soliton_params(m["model"], p, s["mu"], s["nu"], m["sigma2"], m.get("gb_sign"))
    profile = _build_profile(params)
    grid = _grid(g["nx"], g["ny"], g["Lx"], g["Ly"])
    u0 = _sample(params, profile, grid, s.get("tail_eps", 1e-10))
    if pert["amplitude"] > 0:
        u0 = Field2D(grid, u0.data + _perturbation(grid, pert["amplitude"], pert["seed"],
                                                    pert.get("modes", 3)), 0.0, u0.meta)
    dt = t.get("dt", "auto")
    cfl = t.get("cfl", 0.25)
    advisory = None
    if model.kind == GB2D:
        st = init_gb(model, u0, sample_rate(params, grid, 0.0, profile), dt=dt, cfl=cfl)
        rate = gb_growth_rate(grid, model.sigma2, model.gb_sign)
        if rate > 0:
            advisory = (f"linear growth rate {rate:.4g} on retained modes; round-off grows by "
                        f"1e10 after t = {gb_safe_horizon(grid, model.sigma2, model.gb_sign):.4g}")
    else:
        st = init_gkp(model, u0, dt=dt, cfl=cfl)
    if log:
        log(f"dt = {st.dt:.6g} ({st.dt_source})")
        if advisory:
            log("advisory: " + advisory)
    t0 = time.perf_counter()
    try:
        res = evolve(st, float(t["t_final"]), float(t["snapshot_every"]))
    except SolverBlowup as exc:
        raise CliError(str(exc), EXIT_NUMERIC) from None
    if log:
        log(f"evolved to t = {res.state.time:.6g} in {res.state.steps} steps "
            f"({time.perf_counter() - t0:.2f} s)")
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, out.get("diagnostics_csv", "diagnostics.csv"))
    _write_csv(csv_path, csv_columns(model.kind), (csv_row(q, model.kind) for q in res.series))
    snaps = []
    if out.get("snapshots", True):
        sdir = os.path.join(out_dir, "snapshots")
        os.makedirs(sdir, exist_ok=True)
        for i, f in enumerate(res.snapshots):
            path = os.path.join(sdir, f"u_{i:04d}.bin")
            write_field(path, f, model.descriptor())
            snaps.append(os.path.relpath(path, out_dir))
        for i, f in enumerate(res.rates):
            write_field(os.path.join(sdir, f"ut_{i:04d}.bin"), f, model.descriptor())
    series = _series_from_rows(csv_columns(model.kind), [csv_row(q, model.kind) for q in res.series])
    try:
        sp = measure_speed(res.snapshots)
        speed = {"c": sp.c, "theta": sp.theta, "nu": sp.nu, "mu": sp.mu, "crest_rms": sp.crest_rms,
                 "c_expected": params.speed, "theta_expected": params.theta,
                 "rel_error": abs(sp.c - params.speed) / abs(params.speed) if params.speed else None}
    except IndeterminateSpeed as exc:
        speed = {"indeterminate": str(exc)}
    run = {
        "config": cfg, "dt": st.dt, "dt_source": st.dt_source, "steps": res.state.steps,
        "t_final": res.state.time, "diagnostics_csv": os.path.relpath(csv_path, out_dir),
        "snapshots": snaps, "speed": speed, "drift": drift_report(series, model.kind),
        "profile": _profile_summary(params, profile),
    }
    if advisory:
        run["advisory"] = advisory
    _dump_json(run, os.path.join(out_dir, out.get("report_json", "run.json")))
    return run


def cmd_evolve(args) -> int:
    cfg = load_config(args.config)
    out_dir = args.out_dir or cfg.get("output", {}).get("dir", "run_out")
    run = run_evolution(cfg, out_dir, log=lambda s: print(s, file=sys.stderr))
    _dump_json({"out_dir": out_dir, "speed": run["speed"], "drift": run["drift"],
                "dt": run["dt"], "dt_source": run["dt_source"]})
    return EXIT_OK


# ----------------------------------------------------------------------------
# report


def _series_from_rows(header: Sequence[str], rows) -> Dict[str, List[float]]:
    cols: Dict[str, List[float]] = {h: [] for h in header}
    for row in rows:
        for h, v in zip(header, row):
            cols[h].append(float(v))
    return cols


def read_series(path: str) -> Dict[str, List[float]]:
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        try:
            header = next(rd)
        except StopIteration:
            raise CliError(f"{path}: empty file") from None
        rows = [r for r in rd if r]
    from .diagnostics import GB_COLUMNS, GKP_COLUMNS

    if tuple(header) not in (GKP_COLUMNS, GB_COLUMNS):
        raise CliError(f"{path}: unexpected header {','.join(header)}")
    try:
        return _series_from_rows(header, rows)
    except ValueError as exc:
        raise CliError(f"{path}: {exc}") from None


def build_report(series: Dict[str, List[float]], sigma2: int = 1,
                 tol: Optional[Dict[str, float]] = None, moments: bool = False) -> dict:
    """Drift verdict. The gB moment law needs data localized in y, so it is graded only when
    ``moments`` is set; otherwise it is reported with ``pass: None``."""
    from .diagnostics import drift_report, gb_moment_dynamics

    kind = "gb2d" if "a" in series else "gkp"
    if len(series["time"]) < 2:
        raise CliError("need at least two samples")
    verdict = drift_report(series, kind, tol)
    if kind == "gb2d" and len(series["time"]) >= 5:
        mr = gb_moment_dynamics(series["time"], series["a"], series["a1"], series["a2"], sigma2)
        verdict["moments"] = dict(mr.to_json(), **{"pass": mr.ok() if moments else None})
    return {"model": kind, "samples": len(series["time"]), "verdict": verdict,
            "pass": all(v["pass"] is not False for v in verdict.values())}


def cmd_report(args) -> int:
    series = read_series(args.csv)
    tol = {}
    for item in args.tol or []:
        k, _, v = item.partition("=")
        try:
            tol[k] = float(v)
        except ValueError:
            raise CliError(f"bad --tol {item!r}") from None
    doc = build_report(series, args.sigma2, tol, args.moments)
    if args.gnuplot:
        names = [k for k in doc["verdict"] if k in series]
        rows = []
        for i, ti in enumerate(series["time"]):
            row = [ti]
            for n in names:
                v0 = series[n][0]
                row.append((series[n][i] - v0) / v0 if v0 else series[n][i] - v0)
            rows.append(row)
        _write_csv(args.gnuplot, ["time"] + [f"{n}_rel" for n in names], rows)
    _dump_json(doc, args.json)
    return EXIT_OK if doc["pass"] else EXIT_MISMATCH


# ----------------------------------------------------------------------------
# demo


DEMO_CONFIG = {
    "model": {"model": "gkp", "p": 1, "sigma2": 1},
    "grid": {"nx": 512, "ny": 128, "Lx": 80.0, "Ly": 40.0},
    "soliton": {"mu": 0.0, "nu": 1.0},
    "time": {"dt": "auto", "t_final": 5.0, "snapshot_every": 0.5},
    "output": {"snapshots": False},
    "seed": 0,
}


def cmd_demo(args) -> int:
    cfg = json.loads(json.dumps(DEMO_CONFIG))
    if args.quick:
        cfg["grid"].update(nx=256, ny=16)
        cfg["time"]["t_final"] = 2.0
    out_dir = args.out_dir
    os.makedirs(out_dir, exist_ok=True)
    _dump_json(cfg, os.path.join(out_dir, "config.json"))
    run = run_evolution(cfg, out_dir, log=lambda s: print(s, file=sys.stderr))
    rep = build_report(read_series(os.path.join(out_dir, run["diagnostics_csv"])))
    speed_ok = run["speed"].get("rel_error") is not None and run["speed"]["rel_error"] < 0.01
    checks = {
        "ode_residual": run["profile"]["ode_residual_rel"] < 1e-10,
        "speed_within_1pct": speed_ok,
        "drift": rep["pass"],
    }
    _dump_json({"checks": checks, "speed": run["speed"], "drift": rep["verdict"], "out_dir": out_dir})
    return EXIT_OK if all(checks.values()) else EXIT_MISMATCH


# ----------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="kpsoliton",
        description="Symbolic verification and pseudospectral simulation of gKP and 2D gB line solitons.",
        epilog="Exit status: 0 ok, 2 mismatch, 3 kinematic or box error, 4 numerical failure, "
               "1 bad input.  SLTN_THREADS caps FFT worker threads.")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="check every registered symmetry and conservation law")
    v.add_argument("--model", choices=("gkp", "gb2d"), required=True)
    v.add_argument("--p", default="symbolic", help="'symbolic' or a rational such as 1, 2, 3/2")
    v.add_argument("--sigma2", type=_sigma2_arg, default=None,
                   help="1, -1 or symbolic (default: symbolic)")
    v.add_argument("--gb-sign", type=_sign_arg, default=None,
                   help="fix the sign of the fourth-order gB term (default: symbolic)")
    v.add_argument("--no-errata", action="store_true", help="skip corrected variants of failing entries")
    v.add_argument("--extra", metavar="FILE",
                   help="s-expression file of (conslaw NAME T X Y Q) / (symmetry NAME P) entries")
    v.add_argument("--json", metavar="FILE", help="write the report here instead of stdout")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("soliton", help="build an exact line soliton, check it, sample it")
    s.add_argument("--model", choices=("gkp", "gb2d"), required=True)
    s.add_argument("--p", default="1")
    s.add_argument("--mu", type=float, default=0.0)
    s.add_argument("--nu", type=float, required=True)
    s.add_argument("--sigma2", type=_sign_arg, default=1)
    s.add_argument("--gb-sign", type=_sign_arg, default=None)
    s.add_argument("--box", type=lambda x: _pair(x, float, "--box"), default=(80.0, 40.0),
                   metavar="LX,LY")
    s.add_argument("--grid", type=lambda x: _pair(x, int, "--grid"), default=(512, 128),
                   metavar="NX,NY")
    s.add_argument("--tail-eps", type=float, default=1e-10)
    s.add_argument("--out", metavar="FIELD.bin", help="write u sampled on the grid")
    s.add_argument("--out-rate", metavar="FIELD.bin", help="gB: where to write u_t")
    s.add_argument("--profile-csv", metavar="FILE", help="write xi,U,px,py,e")
    s.add_argument("--profile-points", type=int, default=2001)
    s.set_defaults(func=cmd_soliton)

    e = sub.add_parser("evolve", help="evolve a configured soliton and record diagnostics")
    e.add_argument("--config", required=True, metavar="CONFIG.json")
    e.add_argument("--out-dir", metavar="DIR")
    e.set_defaults(func=cmd_evolve)

    r = sub.add_parser("report", help="drift verdict for a diagnostics CSV")
    r.add_argument("--csv", required=True)
    r.add_argument("--sigma2", type=_sign_arg, default=1, help="gB moment law sign")
    r.add_argument("--moments", action="store_true",
                   help="gB: grade the amplitude-moment law (valid for pulses localized in y)")
    r.add_argument("--tol", action="append", metavar="NAME=VALUE", help="override a drift tolerance")
    r.add_argument("--json", metavar="FILE")
    r.add_argument("--gnuplot", metavar="FILE", help="also write relative drifts per sample")
    r.set_defaults(func=cmd_report)

    d = sub.add_parser("demo", help="gKP p=1 soliton: profile check, T=5 run, speed and drift")
    d.add_argument("--out-dir", default="demo_out")
    d.add_argument("--quick", action="store_true", help="smaller grid and T=2")
    d.set_defaults(func=cmd_demo)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
