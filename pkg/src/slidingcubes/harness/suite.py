"""Batch runs over generated instances with per-instance verification rows."""
from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

from ..compactify import compactify
from ..lattice import OpCounter, coordinate_sum, is_compact_configuration
from ..moves import verify_trace
from ..reconfigure import reconfigure
from .accounting import MoveAccounting
from .generate import InstanceSpec, generate, parse_dims


@dataclass
class SuiteRow:
    key: str
    family: str
    n: int
    sigma: int
    moves: int
    budget: int
    ratio: float
    amortized: float | None
    verified: bool
    failed_index: int | None = None
    compact: bool | None = None
    max_outside: int = 0
    seconds: float = 0.0
    error: str | None = None


@dataclass
class SuiteReport:
    rows: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.verified and r.error is None for r in self.rows)

    def failures(self) -> list:
        return [r for r in self.rows if not r.verified or r.error is not None]

    def to_json(self) -> str:
        return json.dumps({"ok": self.ok, "rows": [asdict(r) for r in self.rows]}, indent=1)

    def summary(self) -> str:
        if not self.rows:
            return "empty suite"
        worst = max(self.rows, key=lambda r: r.ratio)
        lines = [f"{'instance':40s} {'n':>5s} {'moves':>7s} {'ratio':>6s} {'q/move':>7s}  ok"]
        for r in self.rows:
            amort = f"{r.amortized:7.1f}" if r.amortized is not None else "      -"
            flag = "yes" if r.verified and r.error is None else f"NO ({r.error or r.failed_index})"
            lines.append(f"{r.key:40s} {r.n:5d} {r.moves:7d} {r.ratio:6.3f} {amort}  {flag}")
        lines.append(f"{len(self.rows)} instances, {len(self.failures())} failed, worst ratio {worst.ratio:.3f} ({worst.key})")
        return "\n".join(lines)


def expand_specs(doc: dict) -> list:
    """Suite file contents -> list of (InstanceSpec, target InstanceSpec or None)."""
    out = []
    for item in doc.get("instances", []):
        out.append((_spec(item), _spec(item["to"]) if "to" in item else None))
    fams = doc.get("families", [])
    for fam in fams:
        for n in doc.get("sizes", [None]):
            for seed in doc.get("seeds", [0]):
                out.append((InstanceSpec(fam, n, None, seed), None))
    return out


def _spec(item: dict) -> InstanceSpec:
    dims = item.get("dims")
    if isinstance(dims, str):
        dims = parse_dims(dims)
    elif dims is not None:
        dims = tuple(dims)
    return InstanceSpec(item["family"], item.get("n"), dims, item.get("seed", 0), item.get("path"))


def run_instance(spec: InstanceSpec, target: InstanceSpec | None = None, tamper=None) -> SuiteRow:
    """Run one instance; ``tamper`` may rewrite the trace before verification."""
    t0 = time.perf_counter()
    key = spec.key() if target is None else f"{spec.key()}->{target.key()}"
    try:
        initial = generate(spec)
        counter = OpCounter()
        if target is None:
            goal = None
            trace = compactify(initial, counter=counter).trace
        else:
            goal = generate(target)
            trace = reconfigure(initial, goal, counter=counter).trace()
        if tamper is not None:
            trace = tamper(trace)
        rep = verify_trace(initial, trace, expected_final=goal)
        acc = MoveAccounting.for_trace(initial, trace, counter, goal)
        compact = is_compact_configuration(rep.final) if goal is None else None
        ok = rep.ok and (compact is not False) and acc.within_budget()
        return SuiteRow(
            key, spec.family, len(initial), coordinate_sum(initial), len(trace), acc.budget,
            round(acc.ratio, 4), round(acc.amortized, 2) if acc.amortized else None, ok,
            rep.failed_index, compact, rep.max_outside or 0, round(time.perf_counter() - t0, 3),
        )
    except Exception as exc:  # a crashing instance is a failed row, not a crashed suite
        return SuiteRow(key, spec.family, spec.n or 0, 0, 0, 0, 0.0, None, False,
                        seconds=round(time.perf_counter() - t0, 3), error=f"{type(exc).__name__}: {exc}")


def _run_pair(args):
    return run_instance(*args)


def run_suite(specs, workers: int = 1, tamper=None) -> SuiteReport:
    """Run every (spec, target) pair; rows come back sorted by instance key."""
    pairs = [(s, None) if isinstance(s, InstanceSpec) else tuple(s) for s in specs]
    if workers > 1 and tamper is None:
        with ProcessPoolExecutor(workers) as pool:
            rows = list(pool.map(_run_pair, pairs))
    else:
        rows = [run_instance(s, t, tamper) for s, t in pairs]
    rows.sort(key=lambda r: r.key)
    return SuiteReport(rows)


def load_suite(path) -> list:
    with open(path) as fh:
        return expand_specs(json.load(fh))
