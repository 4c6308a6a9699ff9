"""Random and bundled fixtures, plus their JSON encoding.

A fixture is a dict with an ``identity`` key naming the check and the inputs
that check needs. ``load_fixture`` turns JSON objects into live values
(measures, barriers, rules); ``dump_fixture`` goes the other way.
"""
from __future__ import annotations

import json
import random
from fractions import Fraction
from importlib import resources
from typing import Optional

from .barriers import ROOT, ROST, Barrier, barrier_from_json, make_barrier
from .lattice import as_point, box
from .measures import LatticeMeasure, make_measure, measure_from_json
from .numeric import INF
from .stopping import StoppingRule

IDENTITIES = ("rectangle", "core", "root", "rost", "symmetry", "replacement", "monotone",
              "compensator")


# -- random generators ------------------------------------------------------------

def _sites(rng: random.Random, d: int, half: int, count: int) -> list:
    pts = list(box(d, half))
    return rng.sample(pts, min(count, len(pts)))


def random_measure(rng: random.Random, d: int = 1, half: int = 3, max_atoms: int = 5,
                   dyadic: bool = False) -> LatticeMeasure:
    n = rng.randint(1, max_atoms)
    pts = _sites(rng, d, half, n)
    if dyadic:
        # Weights k / 2^j obtained by repeated halving of one unit.
        weights = [Fraction(1)]
        while len(weights) < len(pts):
            i = rng.randrange(len(weights))
            w = weights.pop(i)
            weights += [w / 2, w / 2]
    else:
        raw = [rng.randint(1, 6) for _ in pts]
        weights = [Fraction(r, sum(raw)) for r in raw]
    return make_measure(d, list(zip(pts, weights)))


def _grow(rng: random.Random, d: int, half: int, anchors: list, count: int) -> dict:
    """Connected site set grown from ``anchors`` inside the box; maps site -> parent (None for anchors)."""
    from .lattice import neighbors, supnorm

    parent = {a: None for a in anchors}
    frontier = list(anchors)
    while len(parent) < count and frontier:
        m = rng.choice(frontier)
        options = [n for n in neighbors(m) if n not in parent and supnorm(n) <= half]
        if not options:
            frontier.remove(m)
            continue
        n = rng.choice(options)
        parent[n] = m
        frontier.append(n)
    return parent


def random_root_barrier(rng: random.Random, d: int = 1, half: int = 8, max_entry: int = 12,
                        p_inf: float = 0.3, max_sites: Optional[int] = None, anchors=None) -> Barrier:
    """Random Root barrier; with ``anchors`` the sites form a region grown from them, anchors moving first."""
    limit = max_sites if max_sites is not None else (2 * half + 1) ** d
    if anchors:
        anchors = [as_point(a, d) for a in anchors]
        sites = list(_grow(rng, d, max(half, max(max(abs(c) for c in a) for a in anchors)),
                           anchors, rng.randint(len(anchors), max(limit, len(anchors)))))
    else:
        sites = _sites(rng, d, half, rng.randint(0, limit))
    entries = {}
    for m in sites:
        low = 1 if anchors and m in anchors else 0
        entries[m] = INF if rng.random() < p_inf else rng.randint(low, max(low, max_entry))
    return make_barrier(ROOT, d, entries)


def random_rost_barrier(rng: random.Random, d: int = 1, half: int = 8, max_entry: int = 12,
                        max_sites: Optional[int] = None, anchors=None) -> Barrier:
    """Random Rost barrier; with ``anchors`` the region is grown from them with l = 0 there.

    Entry times then drift upward away from the anchors, so the walk leaves
    the anchors at once and reaches outer sites only later.
    """
    limit = max_sites if max_sites is not None else (2 * half + 1) ** d
    if not anchors:
        entries = {m: rng.randint(0, max_entry) for m in _sites(rng, d, half, rng.randint(0, limit))}
        return make_barrier(ROST, d, entries)
    anchors = [as_point(a, d) for a in anchors]
    grown = _grow(rng, d, max(half, max(max(abs(c) for c in a) for a in anchors)), anchors,
                  rng.randint(len(anchors), max(limit, len(anchors))))
    entries = {}
    for m, par in grown.items():  # insertion order puts parents first
        entries[m] = 0 if par is None else min(max_entry, max(0, entries[par] + rng.randint(-1, 3)))
    return make_barrier(ROST, d, entries)


def random_rule(rng: random.Random, start, T: int, d: int = 1, p: float = 0.3) -> StoppingRule:
    """Markov rule stopping on a random subset of the cells reachable from ``start``."""
    start = as_point(start, d)
    cells = []
    for t in range(T):
        for off in box(d, t):
            if sum(abs(c) for c in off) <= t and sum(off) % 2 == t % 2 and rng.random() < p:
                cells.append((t, tuple(s + o for s, o in zip(start, off))))
    return StoppingRule.from_set(cells, T, d, description=f"random cells p={p}")


def rule_cells(rule: StoppingRule, start, d: int) -> list:
    """Explicit stop cells of a rule on the cells reachable from ``start`` before T."""
    start = as_point(start, d)
    out = []
    for t in range(rule.T):
        for off in box(d, t):
            if sum(abs(c) for c in off) <= t and sum(off) % 2 == t % 2:
                m = tuple(s + o for s, o in zip(start, off))
                if rule.stop(t, m):
                    out.append((t, m))
    return out


# -- JSON ---------------------------------------------------------------------------

def _rule_to_json(rule: StoppingRule, start, d: int) -> dict:
    return {"T": rule.T, "cells": [[t, list(m)] for t, m in rule_cells(rule, start, d)]}


def _rule_from_json(obj: dict, d: int) -> StoppingRule:
    return StoppingRule.from_set([(c[0], c[1]) for c in obj["cells"]], int(obj["T"]), d)


def load_fixture(obj: dict) -> dict:
    """Parse a fixture JSON object into live values."""
    f = dict(obj)
    if f.get("identity") not in IDENTITIES:
        raise ValueError(f"unknown identity {f.get('identity')!r}")
    if "lambda" in f:
        f["lambda"] = measure_from_json(f["lambda"])
    if "barrier" in f:
        f["barrier"] = barrier_from_json(f["barrier"])
    d = f["lambda"].d if "lambda" in f else (f["barrier"].d if "barrier" in f else int(f.get("d", 1)))
    f["d"] = d
    for key in ("rules", "sigmas"):
        if key in f:
            f[key] = [_rule_from_json(r, d) for r in f[key]]
    return f


def dump_fixture(f: dict) -> dict:
    out = {}
    d = f.get("d", 1)
    for key, v in f.items():
        if isinstance(v, (LatticeMeasure, Barrier)):
            out[key] = v.to_json()
        elif key in ("rules", "sigmas"):
            start = f["x"] if key == "sigmas" else f["y"]
            out[key] = [_rule_to_json(r, start, d) for r in v]
        elif isinstance(v, tuple):
            out[key] = list(v)
        else:
            out[key] = v
    return out


def load_suite(path: Optional[str] = None) -> list:
    """Fixtures from a suite JSON file, or the bundled suite when ``path`` is None."""
    if path is None:
        text = resources.files("switchlab").joinpath("data/suite.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    obj = json.loads(text)
    items = obj["fixtures"] if isinstance(obj, dict) else obj
    return [load_fixture(o) for o in items]


# -- suite generation -----------------------------------------------------------------

def worked_barrier() -> Barrier:
    return make_barrier(ROOT, 1, {0: INF, -1: 1, 1: 1})


def sharpness_barrier() -> Barrier:
    """Root barrier on which the horizon-T and unbounded potentials differ at a late site."""
    return make_barrier(ROOT, 1, {0: INF, -1: 2, 1: 2})


def random_suite(seed: int = 0, per_kind: int = 3) -> list:
    """A small mixed fixture list, used for the bundled suite."""
    from .measures import dirac

    rng = random.Random(seed)
    out = [
        {"identity": "rectangle", "name": "rectangle-hand", "x": 1, "y": -1, "a": -2, "b": 2, "T": 2},
        {"identity": "core", "name": "core-hand", "x": [0], "y": [0], "T": 2, "d": 1},
        {"identity": "root", "name": "worked", "lambda": dirac(0), "barrier": worked_barrier(),
         "y": [0], "T": 1, "d": 1},
        {"identity": "replacement", "name": "sharpness", "lambda": dirac(0),
         "barrier": sharpness_barrier(), "T": 1, "d": 1},
        {"identity": "rost", "name": "rost-hand", "lambda": dirac(0),
         "barrier": make_barrier(ROST, 1, {0: 0}), "x": [1], "T": 1, "d": 1},
        {"identity": "compensator", "name": "compensator-d2", "d": 2, "radius": 6, "w": [1, 1], "n": 3},
    ]
    for i in range(per_kind):
        T = rng.randint(1, 6)
        lam = random_measure(rng, 1, 2)
        b = random_root_barrier(rng, 1, 4, 6, anchors=list(lam.atoms))
        y = [rng.randint(-3, 3)]
        out.append({"identity": "root", "name": f"root-{i}", "lambda": lam, "barrier": b,
                    "y": y, "T": T, "d": 1})
        out.append({"identity": "monotone", "name": f"monotone-{i}", "lambda": lam, "barrier": b,
                    "y": y, "T": T, "d": 1,
                    "rules": [random_rule(rng, y, T, 1) for _ in range(3)]})
        rb = random_rost_barrier(rng, 1, 4, 6, anchors=list(lam.atoms))
        x = [rng.randint(-3, 3)]
        out.append({"identity": "rost", "name": f"rost-{i}", "lambda": lam, "barrier": rb,
                    "x": x, "T": T, "d": 1})
        ys = [rng.randint(-3, 3)]
        out.append({"identity": "symmetry", "name": f"symmetry-{i}",
                    "barrier": random_rost_barrier(rng, 1, 4, 6, anchors=[ys]), "x": x, "y": ys, "T": T, "d": 1,
                    "sigmas": [random_rule(rng, x, T, 1) for _ in range(3)]})
        a = -rng.randint(1, 5)
        bb = rng.randint(1, 5)
        out.append({"identity": "rectangle", "name": f"rectangle-{i}", "x": rng.randint(a + 1, bb - 1),
                    "y": rng.randint(a + 1, bb - 1), "a": a, "b": bb, "T": rng.randint(0, 8)})
        out.append({"identity": "core", "name": f"core-{i}", "x": [rng.randint(-3, 3)],
                    "y": [rng.randint(-3, 3)], "T": rng.randint(0, 8), "d": 1})
    lam2 = make_measure(2, [((0, 0), 1)])
    b2 = make_barrier(ROOT, 2, {(0, 0): INF, (1, 0): 1, (-1, 0): 1, (0, 1): 1, (0, -1): 1})
    out.append({"identity": "root", "name": "root-d2", "lambda": lam2, "barrier": b2,
                "y": [0, 0], "T": 1, "d": 2})
    return out
