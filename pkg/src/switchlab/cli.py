"""Command-line entry point.

Exit codes: 0 when every verdict passes, 1 when some identity fails, 2 on
input errors (bad arguments, missing or malformed files).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field
from typing import Optional

from .errors import SwitchlabError, UsageError

COMMANDS = ("verify-root", "verify-rost", "verify-symmetry", "verify-core", "rectangle",
            "interpolate", "kernel", "simulate", "scale", "suite")
FIXTURE_IDENTITY = {"verify-root": "root", "verify-rost": "rost", "verify-symmetry": "symmetry",
                    "verify-core": "core", "rectangle": "rectangle", "interpolate": "root"}


@dataclass
class RunConfig:
    command: str
    fixture: Optional[str] = None
    suite: Optional[str] = None
    config: Optional[str] = None
    mode: str = "exact"
    tol: Optional[float] = None
    seed: int = 0
    n: int = 10000
    out: Optional[str] = None
    csv: Optional[str] = None
    deterministic: bool = False
    d: int = 1
    radius: int = 4
    variant: str = "F"
    Ns: list = field(default_factory=lambda: [4, 16, 64, 256])
    negative_control: bool = False
    verbose: int = 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="switchlab", description="Exact switching-identity laboratory for lattice walks.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--fixture", help="fixture JSON file")
    p.add_argument("--suite", help="suite JSON file (default: bundled suite)")
    p.add_argument("--config", help="scaling study JSON (lambda, mu, T, x, Ns)")
    p.add_argument("--mode", choices=("exact", "approx"), default="exact")
    p.add_argument("--tol", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.add_argument("--csv", help="also write a CSV export here")
    p.add_argument("--deterministic", action="store_true", help="omit timestamps from reports")
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--radius", type=int, default=4)
    p.add_argument("--variant", choices=("F", "F_tau", "F_tau_sigma", "F_tilde"), default="F")
    p.add_argument("--Ns", default="4,16,64,256", help="comma-separated refinements for scale")
    p.add_argument("--negative-control", action="store_true", help=argparse.SUPPRESS)
    p.add_argument("-v", "--verbose", action="count", default=0)
    return p


def parse(args) -> RunConfig:
    ns = _parser().parse_args(args)
    try:
        Ns = [int(v) for v in ns.Ns.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"bad --Ns value {ns.Ns!r}") from exc
    cfg = RunConfig(ns.command, ns.fixture, ns.suite, ns.config, ns.mode, ns.tol, ns.seed, ns.n,
                    ns.out, ns.csv, ns.deterministic, ns.d, ns.radius, ns.variant, Ns,
                    ns.negative_control, ns.verbose)
    if cfg.command in FIXTURE_IDENTITY or cfg.command == "simulate":
        if not cfg.fixture:
            raise UsageError(f"{cfg.command} needs --fixture")
    for path in (cfg.fixture, cfg.suite, cfg.config):
        if path is not None and not os.path.exists(path):
            raise UsageError(f"no such file: {path}")
    if cfg.n < 1:
        raise UsageError("--n must be positive")
    if cfg.command in FIXTURE_IDENTITY and cfg.mode != "exact":
        raise UsageError("identity commands run in exact mode")
    return cfg


def _read_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _load_fixture(cfg: RunConfig) -> dict:
    from .fixtures import load_fixture

    obj = _read_json(cfg.fixture)
    want = FIXTURE_IDENTITY.get(cfg.command)
    if want is not None:
        obj.setdefault("identity", want)
        if obj["identity"] != want:
            raise UsageError(f"{cfg.command} expects a {want} fixture, got {obj['identity']}")
    try:
        return load_fixture(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed fixture: {exc}") from exc


def _write(cfg: RunConfig, payload: dict, csv_text: Optional[str] = None):
    if not cfg.deterministic:
        payload["generated"] = time.strftime("%Y-%m-%dT%H:%M:%S")
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if cfg.csv and csv_text is not None:
        with open(cfg.csv, "w") as fh:
            fh.write(csv_text)


def _summary_csv(reports: list) -> str:
    lines = ["identity,fixture,residual,verdict"]
    for r in reports:
        lines.append(f"{r['identity']},{r['metadata'].get('fixture', '')},{r['residual']},{r['verdict']}")
    return "\n".join(lines) + "\n"


def _run_identity(cfg: RunConfig) -> int:
    from .runner import run_fixture

    f = _load_fixture(cfg)
    rep = run_fixture(f, corrupt=cfg.negative_control).to_json()
    _write(cfg, {"command": cfg.command, "reports": [rep], "verdict": rep["verdict"]}, _summary_csv([rep]))
    return 0 if rep["verdict"] == "pass" else 1


def _run_interpolate(cfg: RunConfig) -> int:
    from .identities import compute_interpolation
    from .numeric import format_scalar

    f = _load_fixture(cfg)
    rules = f.get("rules") or [None]
    sigmas = f.get("sigmas") or [None]
    seq = compute_interpolation(cfg.variant, f["lambda"], f["y"], f["barrier"], f["T"],
                                rule=rules[0], sigma=sigmas[0])
    drops = [a - b for a, b in zip(seq, seq[1:])]
    ok = all(v <= 0 for v in drops)
    if cfg.variant == "F":
        ok = ok and all(v == seq[0] for v in seq)
    payload = {"command": "interpolate", "variant": cfg.variant,
               "values": [format_scalar(v) for v in seq], "verdict": "pass" if ok else "fail"}
    csv_text = "s,value\n" + "".join(f"{s},{format_scalar(v)}\n" for s, v in enumerate(seq))
    _write(cfg, payload, csv_text)
    return 0 if ok else 1


def _run_kernel(cfg: RunConfig) -> int:
    from .kernel import kernel_canonical, kernel_synthetic
    from .lattice import box
    from .numeric import format_scalar

    if cfg.mode == "exact":
        if cfg.d == 1 and cfg.radius < 2:
            raise UsageError("--radius must be at least 2")
        k = kernel_synthetic(cfg.d, cfg.radius)
        interior = [z for z in box(cfg.d, cfg.radius - 1)]
        worst = max(abs(k.laplace_residual(z)) for z in interior)
        ok = worst == 0
    else:
        k = kernel_canonical(cfg.d, cfg.radius, tol=cfg.tol if cfg.tol is not None else 1e-3)
        worst = max(k.errors.values()) if k.errors else 0.0
        ok = True
    payload = {"command": "kernel", "d": cfg.d, "radius": cfg.radius, "flavor": k.flavor,
               "valid_radius": k.valid_radius, "max_residual_or_error": format_scalar(worst),
               "verdict": "pass" if ok else "fail",
               "sample": {str(list(z)): format_scalar(k.value(z))
                          for z in [(0,) * cfg.d, (1,) + (0,) * (cfg.d - 1), (1,) * cfg.d]
                          if k.covers(z)}}
    _write(cfg, payload, k.to_csv(cfg.radius if k.radius is None else None))
    return 0 if ok else 1


def _run_simulate(cfg: RunConfig) -> int:
    from .montecarlo import estimate_identity

    f = _load_fixture(cfg)
    lhs, rhs = estimate_identity(f, cfg.seed, cfg.n)
    ok = lhs.within(4.0) and rhs.within(4.0)
    _write(cfg, {"command": "simulate", "identity": f["identity"], "lhs": lhs.to_json(),
                 "rhs": rhs.to_json(), "verdict": "pass" if ok else "fail"})
    return 0 if ok else 1


def _run_scale(cfg: RunConfig) -> int:
    from fractions import Fraction

    from .scaling import ContinuumSpec, cauchy_trend, convergence_table, dirac_spec, table_csv, uniform_spec

    if cfg.config:
        obj = _read_json(cfg.config)
        lam = ContinuumSpec.from_json(obj["lambda"])
        mu = ContinuumSpec.from_json(obj["mu"])
        T, x = Fraction(str(obj.get("T", 1))), Fraction(str(obj.get("x", 0)))
        Ns = obj.get("Ns", cfg.Ns)
    else:
        lam, mu, T, x, Ns = dirac_spec(0), uniform_spec(-1, 1), Fraction(1), Fraction(0), cfg.Ns
    rows = convergence_table(lam, mu, T, x, Ns)
    ok = all(r.residual == 0 for r in rows) and cauchy_trend(rows)
    _write(cfg, {"command": "scale", "rows": [r.to_json() for r in rows],
                 "cauchy_trend": cauchy_trend(rows), "verdict": "pass" if ok else "fail"},
           table_csv(rows))
    return 0 if ok else 1


def _run_suite(cfg: RunConfig) -> int:
    from .fixtures import load_suite
    from .runner import run_suite

    try:
        fixtures = load_suite(cfg.suite)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed suite: {exc}") from exc
    reports = run_suite(fixtures, corrupt=cfg.negative_control)
    ok = all(r["verdict"] == "pass" for r in reports)
    _write(cfg, {"command": "suite", "reports": reports, "verdict": "pass" if ok else "fail"},
           _summary_csv(reports))
    return 0 if ok else 1


def execute(cfg: RunConfig) -> int:
    if cfg.command in FIXTURE_IDENTITY and cfg.command != "interpolate":
        return _run_identity(cfg)
    handler = {"interpolate": _run_interpolate, "kernel": _run_kernel, "simulate": _run_simulate,
               "scale": _run_scale, "suite": _run_suite}[cfg.command]
    return handler(cfg)


def main(argv=None) -> int:
    try:
        cfg = parse(sys.argv[1:] if argv is None else argv)
        return execute(cfg)
    except UsageError as exc:
        print(f"switchlab: error: {exc}", file=sys.stderr)
        return 2
    except SwitchlabError as exc:
        print(f"switchlab: input error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
