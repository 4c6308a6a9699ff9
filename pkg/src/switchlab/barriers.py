"""Root and Rost space-time stopping regions encoded by per-site entry times.

Root: the walk continues at (t, m) iff ``t < r(m)``; unlisted sites use the
default ``r = 0``, i.e. they are stopped at every time t >= 0.
Rost: the walk continues at (t, m) iff ``t >= l(m)``; unlisted sites use the
default ``l = inf``, so they are never part of the continuation region.

Entry times may be negative or infinite. Negative values only arise from
time reflection, which maps a Rost region onto a Root-type region that is
also queried at negative times.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Union

from .errors import UnboundedContinuation, WrongKind
from .lattice import as_point, check_dim
from .numeric import INF, format_time, parse_time

ROOT = "root"
ROST = "rost"

Time = Union[int, float]


@dataclass(frozen=True)
class Barrier:
    kind: str
    d: int
    entries: Mapping[tuple, Time]
    default: Time

    def entry(self, m) -> Time:
        return self.entries.get(m, self.default)

    def is_continuation(self, t: int, m) -> bool:
        e = self.entries.get(m, self.default)
        if self.kind == ROOT:
            return t < e
        return t >= e

    def homogeneous_sites(self) -> set:
        """Sites in the continuation region at all large times."""
        if self.kind == ROOT:
            return {m for m, e in self.entries.items() if e == INF}
        return {m for m, e in self.entries.items() if e < INF}

    def settle_time(self) -> int:
        """First time after which the continuation region no longer changes."""
        finite = [e for e in self.entries.values() if not math.isinf(e)]
        return max([0] + [int(e) for e in finite])

    def is_bounded(self) -> bool:
        """Continuation region eventually confined to finitely many sites."""
        if self.kind == ROOT:
            return self.default <= 0
        return self.default == INF

    @property
    def sites(self) -> list:
        return sorted(self.entries)

    def to_json(self) -> dict:
        out = {"kind": self.kind, "d": self.d,
               "entries": [{"m": list(m), "t": format_time(t)} for m, t in sorted(self.entries.items())]}
        if self.default != _DEFAULTS[self.kind]:
            out["default"] = format_time(self.default)
        return out

    def __repr__(self):
        body = ", ".join(f"{m if self.d > 1 else m[0]}:{format_time(t)}"
                         for m, t in sorted(self.entries.items()))
        return f"Barrier({self.kind}, d={self.d}, {{{body}}})"


_DEFAULTS = {ROOT: 0, ROST: INF}


def make_barrier(kind: str, d: int, entries, default: Time | None = None) -> Barrier:
    """Validated barrier from ``{site: entry_time}`` (or pairs).

    Entry times are non-negative integers or ``inf``. A Root barrier with a
    positive default, or a Rost barrier with a finite default, would keep
    infinitely many sites alive and is rejected.
    """
    kind = kind.lower()
    if kind not in _DEFAULTS:
        raise WrongKind(f"unknown barrier kind {kind!r}")
    check_dim(d)
    if isinstance(entries, Mapping):
        entries = entries.items()
    parsed = {}
    for m, t in entries:
        t = parse_time(t)
        if t < 0:
            raise ValueError(f"negative entry time {t} at {m}")
        parsed[as_point(m, d)] = t
    if default is None:
        default = _DEFAULTS[kind]
    b = Barrier(kind, d, parsed, default)
    if not b.is_bounded():
        raise UnboundedContinuation(f"{kind} barrier with default {default} is unbounded")
    return b


def barrier_from_json(obj: Mapping) -> Barrier:
    d = int(obj["d"])
    entries = [(e["m"], e["t"]) for e in obj.get("entries", [])]
    default = parse_time(obj["default"]) if "default" in obj else None
    return make_barrier(obj["kind"], d, entries, default)


def _flip(t: Time, horizon: int) -> Time:
    if math.isinf(t):
        return -t
    return horizon + 1 - t


def reflect(b: Barrier, horizon: int) -> Barrier:
    """Time reflection ``(t, m) -> (horizon - t, m)`` of the continuation set.

    A Rost region becomes a Root-type region and vice versa: with
    ``r(m) = horizon + 1 - l(m)`` we have ``horizon - t >= l(m)`` iff
    ``t < r(m)``. Applying it twice with the same horizon is the identity.
    """
    kind = ROOT if b.kind == ROST else ROST
    entries = {m: _flip(t, horizon) for m, t in b.entries.items()}
    return Barrier(kind, b.d, entries, _flip(b.default, horizon))
