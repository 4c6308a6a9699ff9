"""Dispatch fixtures to their verifiers and run suites with deterministic ordering."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Optional

from . import identities as ids
from .kernel import kernel_synthetic, verify_compensator


def thread_cap() -> int:
    """Worker count from ``SWITCHLAB_THREADS`` (default 1, i.e. in-process)."""
    try:
        return max(1, int(os.environ.get("SWITCHLAB_THREADS", "1")))
    except ValueError:
        return 1


def run_fixture(f: dict, k=None, corrupt: bool = False) -> ids.IdentityReport:
    """Run the check named by ``f["identity"]``; ``corrupt`` is a negative-control hook."""
    kind = f["identity"]
    T = f.get("T")
    if kind == "rectangle":
        rep = ids.verify_switch_rectangle(f["x"], f["y"], f["a"], f["b"], T)
        if corrupt:
            rep = ids.IdentityReport.equality(rep.name, rep.lhs + 1, rep.rhs)
    elif kind == "core":
        rep = ids.verify_core(f["x"], f["y"], T, k, d=f.get("d", 1))
    elif kind == "root":
        rep = ids.verify_root_identity(f["lambda"], f["barrier"], f["y"], T, k, corrupt=corrupt)
    elif kind == "rost":
        rep = ids.verify_rost_identity(f["lambda"], f["barrier"], f["x"], T, k)
    elif kind == "symmetry":
        rep = ids.verify_symmetry(f["x"], f["y"], T, f["barrier"], f.get("sigmas", []), k)
    elif kind == "replacement":
        rep = ids.verify_replacement(f["barrier"], f["lambda"], T, k)
    elif kind == "monotone":
        rep = ids.verify_monotone(f["lambda"], f["barrier"], f["y"], T, f.get("rules", []), k,
                                  sigmas=f.get("sigmas", []))
    elif kind == "compensator":
        kk = k or kernel_synthetic(f.get("d", 1), int(f["radius"]))
        rep = verify_compensator(kk, f["w"], int(f["n"]))
    else:
        raise ValueError(f"unknown identity {kind!r}")
    if corrupt and kind not in ("rectangle", "root"):
        rep.residual = rep.residual + 1
    rep.metadata.setdefault("fixture", f.get("name", kind))
    return rep


def _run_one(args):
    f, corrupt = args
    return run_fixture(f, corrupt=corrupt).to_json()


def run_suite(fixtures: list, corrupt: bool = False, workers: Optional[int] = None) -> list:
    """Report JSON objects in fixture order, optionally across worker processes."""
    workers = workers or thread_cap()
    jobs = [(f, corrupt) for f in fixtures]
    if workers == 1 or len(jobs) < 2:
        return [_run_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_run_one, jobs))
