"""Command-line front end: ``clifftorsion {check,solve,evolve,action}``.

Configuration files are flat ``key = value`` lists (an optional ``[run]``
header is accepted). Every key can also be set with ``--override key=value``.
"""
from __future__ import annotations

import argparse
import configparser
import json
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import action as act
from . import dynamics as dyn
from . import geometry as geo
from . import io as snap
from . import torsion as tor
from .clifford import Signature, SignatureError
from .spinor import build_gamma

SCHEMA_VERSION = 1

DEFAULTS: dict[str, str] = {
    "preset": "flat",
    "dims": "4,4,4,4",
    "h": "0.5",
    "p": "4",
    "q": "0",
    "eps": "1",
    "fd_order": "2",
    "radius": "1.0",
    "conformal_amplitude": "0.1",
    "form": "rescaled",
    "g": "0.1",
    "method": "newton",
    "tol": "1e-8",
    "max_iter": "10000",
    "step": "1.0",
    "seed": "0",
    "A_init": "zero",
    "A_scale": "0.3",
    "psi_init": "zero",
    "psi_scale": "0.5",
    "dt": "0.2",
    "steps": "200",
    "record_every": "1",
    "snapshot_every": "0",
    "wave_amplitude": "0.01",
    "wave_mode": "1",
}

KEY_HELP = {
    "preset": "chart preset: flat, conformal, sphere2",
    "dims": "lattice extents, comma separated (one per dimension)",
    "h": "lattice spacing",
    "p": "number of positive metric directions",
    "q": "number of negative metric directions",
    "eps": "Clifford sign convention, +1 or -1",
    "fd_order": "finite-difference order for curvature (2 or 4)",
    "radius": "sphere2 radius",
    "conformal_amplitude": "amplitude of the conformal factor",
    "form": "action normalization: canonical or rescaled",
    "g": "coupling constant (rescaled form)",
    "method": "static solver: gradient_descent, nonlinear_cg, fixed_point, newton",
    "tol": "residual tolerance",
    "max_iter": "iteration cap",
    "step": "initial step length",
    "seed": "seed for every random initialization",
    "A_init": "zero, random, random_constant, pure_gradient, plane_wave or a snapshot path",
    "A_scale": "amplitude of random torsion potentials",
    "psi_init": "zero, constant, random or a snapshot path",
    "psi_scale": "amplitude of spinor presets",
    "dt": "wave time step",
    "steps": "number of wave steps",
    "record_every": "energy log stride",
    "snapshot_every": "trajectory snapshot stride (0 disables)",
    "wave_amplitude": "plane-wave amplitude",
    "wave_mode": "plane-wave mode number along axis 0",
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    raw: dict
    chart: geo.MetricChart
    sig: Signature
    form: str
    g: float
    solver: dyn.SolverConfig
    seed: int

    def resolved(self) -> dict:
        return dict(sorted(self.raw.items()))


def read_config(path: str | None, overrides: list[str], seed: int | None) -> dict:
    raw = dict(DEFAULTS)
    errors = []
    if path:
        text = Path(path).read_text()
        if not text.lstrip().startswith("["):
            text = "[run]\n" + text
        cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
        cp.optionxform = str
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from None
        for section in cp.sections():
            raw.update(cp[section])
    for ov in overrides:
        if "=" not in ov:
            errors.append(f"override {ov!r} is not key=value")
            continue
        k, v = ov.split("=", 1)
        raw[k.strip()] = v.strip()
    if seed is not None:
        raw["seed"] = str(seed)
    unknown = sorted(set(raw) - set(DEFAULTS))
    if unknown:
        errors.append(f"unknown keys: {', '.join(unknown)}")
    if errors:
        raise ConfigError("\n".join(errors))
    return raw


def validate(raw: dict) -> RunConfig:
    """Check every key, collecting all problems into a single report."""
    errors: list[str] = []

    def num(key, cast=float, check=None, msg=""):
        try:
            v = cast(raw[key])
        except (TypeError, ValueError):
            errors.append(f"{key}: cannot read {raw[key]!r} as {cast.__name__}")
            return None
        if check is not None and not check(v):
            errors.append(f"{key}: {msg} (got {v})")
            return None
        return v

    p = num("p", int, lambda v: v >= 0, "must be non-negative")
    q = num("q", int, lambda v: v >= 0, "must be non-negative")
    eps = num("eps", int, lambda v: v in (1, -1), "must be +1 or -1")
    h = num("h", float, lambda v: v > 0, "must be positive")
    g = num("g", float, lambda v: v > 0, "must be positive")
    tol = num("tol", float, lambda v: v > 0, "must be positive")
    max_iter = num("max_iter", int, lambda v: v >= 1, "must be at least 1")
    step = num("step", float, lambda v: v > 0, "must be positive")
    seed = num("seed", int, lambda v: v >= 0, "must be non-negative")
    fd = num("fd_order", int, lambda v: v in (2, 4), "must be 2 or 4")
    for key in ("dt", "A_scale", "psi_scale", "radius", "wave_amplitude"):
        num(key, float, lambda v: v >= 0, "must be non-negative")
    for key in ("steps", "record_every", "wave_mode", "snapshot_every"):
        num(key, int, lambda v: v >= 0, "must be non-negative")
    num("conformal_amplitude", float)
    if raw["form"] not in act.FORMS:
        errors.append(f"form: must be one of {act.FORMS}")
    if raw["method"] not in dyn.METHODS:
        errors.append(f"method: must be one of {dyn.METHODS}")
    if raw["preset"] not in geo.PRESETS:
        errors.append(f"preset: must be one of {geo.PRESETS}")
    try:
        dims = tuple(int(x) for x in raw["dims"].split(","))
    except ValueError:
        errors.append(f"dims: cannot read {raw['dims']!r} as comma-separated integers")
        dims = None
    sig = None
    if None not in (p, q, eps):
        try:
            sig = Signature(p, q, eps)
            probs = sig.problems()
            if probs:
                errors.append("signature: " + "; ".join(probs) + " (spinor geometry needs n even and s = p - q != 1 mod 4)")
                sig = None
        except SignatureError as exc:
            errors.append(f"signature: {exc}")
            sig = None
    if sig is not None and dims is not None:
        if len(dims) != sig.n:
            errors.append(f"dims: need {sig.n} extents for n = {sig.n}, got {len(dims)}")
        elif any(L < 1 for L in dims):
            errors.append("dims: extents must be positive")
    if errors:
        raise ConfigError("invalid configuration:\n  " + "\n  ".join(errors))
    params = {"fd_order": fd}
    if raw["preset"] == "conformal":
        params["amplitude"] = float(raw["conformal_amplitude"])
    if raw["preset"] == "sphere2":
        params["radius"] = float(raw["radius"])
    try:
        chart = geo.build_chart(raw["preset"], dims, h, sig, **params)
    except (ValueError, SignatureError) as exc:
        raise ConfigError(f"invalid configuration:\n  chart: {exc}") from None
    solver = dyn.SolverConfig(method=raw["method"], tol=tol, max_iter=max_iter, step=step, seed=seed)
    return RunConfig(raw, chart, sig, raw["form"], g, solver, seed)


# initial data

def initial_A(cfg: RunConfig, rng: np.random.Generator) -> np.ndarray:
    ch = cfg.chart
    n = ch.n
    kind = cfg.raw["A_init"]
    scale = float(cfg.raw["A_scale"])
    shape = ch.dims + (n, n, n)
    if kind == "zero":
        return np.zeros(shape)
    if kind == "random":
        return tor.random_potential(ch, rng, scale).data.copy()
    if kind == "random_constant":
        raw = rng.normal(size=(n, n, n)) * scale
        return np.broadcast_to(0.5 * (raw - np.swapaxes(raw, -1, -2)), shape).copy()
    if kind == "pure_gradient":
        chi = rng.normal(size=ch.dims) * scale
        A = np.zeros(shape)
        for mu in range(n):
            dchi = geo.dfwd(chi, mu, ch.h[mu])
            A[..., mu, 0, 1] = dchi
            A[..., mu, 1, 0] = -dchi
        return A
    if kind == "plane_wave":
        return dyn.plane_wave(ch, float(cfg.raw["wave_amplitude"]), int(cfg.raw["wave_mode"]))
    A = snap.load_snapshot(kind, shape, "torsion_potential")
    tor._check_antisym(A, -1, -2, f"snapshot {kind}")
    return A


def initial_psi(cfg: RunConfig, rng: np.random.Generator) -> np.ndarray | None:
    ch = cfg.chart
    d = 2 ** (ch.n // 2)
    kind = cfg.raw["psi_init"]
    scale = float(cfg.raw["psi_scale"])
    shape = ch.dims + (d, ch.n)
    if kind == "zero":
        return None
    if kind == "constant":
        site = rng.normal(size=(d, ch.n)) + 1j * rng.normal(size=(d, ch.n))
        return np.broadcast_to(scale * site, shape).copy()
    if kind == "random":
        return scale * (rng.normal(size=shape) + 1j * rng.normal(size=shape))
    return snap.load_snapshot(kind, shape, "twisted_spinor")


def load_initial(cfg: RunConfig):
    """Validate and build all initial data before any computation."""
    rng = np.random.default_rng(cfg.seed)
    try:
        A = initial_A(cfg, rng)
        psi = initial_psi(cfg, rng)
    except (snap.SnapshotError, tor.AntisymmetryError) as exc:
        raise ConfigError(f"invalid initial data:\n  {exc}") from None
    return A, psi


# output helpers

def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, indent=1, default=_jsonable) + "\n")


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, tuple):
        return list(x)
    raise TypeError(f"not serializable: {type(x)}")


def write_manifest(out: Path, command: str, cfg: RunConfig) -> None:
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "manifest.json", {"schema_version": SCHEMA_VERSION, "command": command, "config": cfg.resolved()})


def _breakdown_dict(b: act.ActionBreakdown) -> dict:
    return json.loads(b.to_json())


# check battery

def run_checks(cfg: RunConfig) -> list[dict]:
    from . import checks

    return checks.battery(cfg.chart, cfg.sig, cfg.form, cfg.g, cfg.seed)


# commands

def cmd_check(cfg: RunConfig, out: Path | None) -> int:
    rows = run_checks(cfg)
    ok = all(r["passed"] for r in rows)
    report = {"schema_version": SCHEMA_VERSION, "passed": ok, "identities": rows}
    text = json.dumps(report, sort_keys=True, indent=1, default=_jsonable)
    if out is not None:
        write_manifest(out, "check", cfg)
        (out / "report.json").write_text(text + "\n")
    print(text)
    return 0 if ok else 1


def cmd_action(cfg: RunConfig, out: Path | None) -> int:
    A, psi = load_initial(cfg)
    gamma = build_gamma(cfg.sig)
    b = act.total_action(A, psi, cfg.chart, gamma, cfg.form, cfg.g)
    d = _breakdown_dict(b)
    if out is not None:
        write_manifest(out, "action", cfg)
        _write_json(out / "action.json", d)
    print(json.dumps(d, sort_keys=True))
    return 0


def cmd_solve(cfg: RunConfig, out: Path) -> int:
    A0, psi = load_initial(cfg)
    gamma = build_gamma(cfg.sig)
    write_manifest(out, "solve", cfg)
    try:
        res = dyn.solve_static(A0, psi, cfg.chart, gamma, cfg.g, cfg.solver, cfg.form)
    except dyn.SolverDivergence as exc:
        print(f"solver aborted: {exc}", file=sys.stderr)
        return 3
    (out / "residuals.csv").write_text("\n".join(res.csv_rows()) + "\n")
    snap.save_snapshot(out / "A", res.A, "torsion_potential", cfg.chart.dims)
    if psi is not None:
        snap.save_snapshot(out / "psi", psi, "twisted_spinor", cfg.chart.dims)
    b = act.total_action(res.A, psi, cfg.chart, gamma, cfg.form, cfg.g)
    d = _breakdown_dict(b)
    d.update({"converged": res.converged, "final_residual": res.residual, "iterations": len(res.history) - 1,
              "message": res.message})
    _write_json(out / "action.json", d)
    print(json.dumps(d, sort_keys=True))
    return 0 if res.converged else 2


def cmd_evolve(cfg: RunConfig, out: Path) -> int:
    dt = float(cfg.raw["dt"])
    if not 0 < dt <= dyn.cfl_limit(cfg.chart):
        raise ConfigError(
            f"invalid configuration:\n  dt: {dt} violates the stability bound dt <= h/sqrt(n) = {dyn.cfl_limit(cfg.chart):.6g}"
        )
    if cfg.sig.q != 0 or not cfg.chart.is_flat:
        raise ConfigError("invalid configuration:\n  evolve: wave evolution needs a flat Euclidean chart")
    A0, psi = load_initial(cfg)
    write_manifest(out, "evolve", cfg)
    every = int(cfg.raw["snapshot_every"])
    st = dyn.init_wave(A0, None, cfg.chart, dt)
    st.psi = psi

    def cb(i, s):
        if every and i % every == 0:
            snap.save_snapshot(out / "trajectory" / f"A_{i:06d}", s.A, "torsion_potential", cfg.chart.dims)

    if every:
        snap.save_snapshot(out / "trajectory" / "A_000000", st.A, "torsion_potential", cfg.chart.dims)
    dyn.run_wave(st, int(cfg.raw["steps"]), max(1, int(cfg.raw["record_every"])), cb)
    rows = ["t,energy,max_abs_A"] + [f"{t!r},{e!r},{m!r}" for t, e, m in st.energy_log]
    (out / "energy.csv").write_text("\n".join(rows) + "\n")
    E = np.array([e for _, e, _ in st.energy_log])
    drift = float(np.max(np.abs(E - E[0])) / abs(E[0])) if E[0] != 0 else float(np.max(np.abs(E)))
    summary = {"schema_version": SCHEMA_VERSION, "steps": int(cfg.raw["steps"]), "dt": dt, "energy_initial": float(E[0]),
               "energy_relative_drift": drift}
    _write_json(out / "summary.json", summary)
    print(json.dumps(summary, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    keys = "\n".join(f"  {k:<20} {KEY_HELP[k]} (default {DEFAULTS[k]})" for k in DEFAULTS)
    ap = argparse.ArgumentParser(
        prog="clifftorsion",
        description="Lattice experiments with Dirac operators of simple type and dynamical torsion.",
        epilog="configuration keys:\n" + keys,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = ap.add_subparsers(dest="command", required=True)
    for name, hlp in [
        ("check", "run the identity battery and report residuals"),
        ("solve", "solve the static torsion equation"),
        ("evolve", "evolve the linearized torsion wave equation"),
        ("action", "evaluate the total action on initial data"),
    ]:
        sp = sub.add_parser(name, help=hlp)
        sp.add_argument("--config", help="flat key = value configuration file")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--seed", type=int, help="override the seed")
        sp.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = validate(read_config(args.config, args.override, args.seed))
        out = Path(args.out) if args.out else None
        if args.command in ("solve", "evolve") and out is None:
            out = Path(f"runs/{args.command}")
        if args.command == "check":
            return cmd_check(cfg, out)
        if args.command == "action":
            return cmd_action(cfg, out)
        if args.command == "solve":
            return cmd_solve(cfg, out)
        return cmd_evolve(cfg, out)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 64


if __name__ == "__main__":
    raise SystemExit(main())
