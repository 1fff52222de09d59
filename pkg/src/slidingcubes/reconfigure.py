"""Compact-to-compact reconfiguration and the end-to-end plan C1 -> D -> D' -> C2."""
from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field

from .compactify import compactify
from .lattice import (
    Configuration, ConfigurationError, OpCounter, coordinate_sum, is_compact_configuration,
    is_connected, l1, l1_dist,
)
from .moves import Move, Trace, apply_move, move_targets

FORWARD = "---forward---"
BRIDGE = "---bridge---"
BACKWARD = "---backward---"


class ReconfigureError(RuntimeError):
    """A walk between two compact configurations could not be found."""


def _up(c, i):
    return (c[0] + (i == 0), c[1] + (i == 1), c[2] + (i == 2))


def _down(c, i):
    return (c[0] - (i == 0), c[1] - (i == 1), c[2] - (i == 2))


def _cells(config) -> set:
    return set(config.raw()) if isinstance(config, Configuration) else set(config)


def _is_maximal(c, union) -> bool:
    return all(_up(c, i) not in union for i in range(3))


def _is_ready(c, occ) -> bool:
    return all(c[i] == 0 or _down(c, i) in occ for i in range(3))


def _lex_key(c):
    return (c[2], c[1], c[0])


def find_m1(D, D_prime):
    """The domination-maximal cell of D - D' that is largest in (z, y, x) order."""
    d, dp = _cells(D), _cells(D_prime)
    union = d | dp
    cands = [c for c in d - dp if _is_maximal(c, union)]
    if not cands:
        raise ConfigurationError("D - D' has no maximal cell (inputs equal or not compact)")
    return max(cands, key=_lex_key)


def find_m2(D, D_prime):
    """The cell of D' - D with every lower neighbour in D; smallest L1, then smallest cell."""
    d, dp = _cells(D), _cells(D_prime)
    cands = [c for c in dp - d if _is_ready(c, d)]
    if not cands:
        raise ConfigurationError("D' - D has no supported cell (inputs equal or not compact)")
    return min(cands, key=lambda c: (l1(c), c))


def monotone_surface_path(config, src, dst, node_cap: int = 100000):
    """Moves taking the module at ``src`` to ``dst``, each step closer to ``dst``.

    Depth-first over distance-decreasing moves, convex transitions (two units
    closer) first, with dead cells remembered.  Returns None if no monotone
    path exists; the backbone is not checked (callers move modules whose
    removal keeps the rest connected).
    """
    if src == dst:
        return []
    dead = set()
    stack = [(src, iter(_monotone_steps(config, src, src, dst)))]
    path = []
    expanded = 0
    while stack:
        c, it = stack[-1]
        step = next(it, None)
        if step is None:
            dead.add(c)
            stack.pop()
            if path:
                path.pop()
            continue
        kind, b, pivot = step
        if b in dead:
            continue
        path.append(Move(kind, c, b, pivot, "c2c", "payload"))
        if b == dst:
            return path
        expanded += 1
        if expanded > node_cap:
            return None
        stack.append((b, iter(_monotone_steps(config, b, src, dst))))
    return None


def _monotone_steps(config, c, src, dst):
    here = l1_dist(c, dst)
    steps = [t for t in move_targets(config, c, exclude=src) if l1_dist(t[1], dst) < here]
    steps.sort(key=lambda t: (l1_dist(t[1], dst), t[1]))
    return steps


def shortest_surface_path(config, src, dst, node_cap: int = 200000):
    """Breadth-first shortest move sequence from ``src`` to ``dst`` (fallback)."""
    prev = {src: None}
    todo = deque([src])
    while todo and len(prev) < node_cap:
        c = todo.popleft()
        if c == dst:
            out = []
            while prev[c] is not None:
                kind, pivot, p = prev[c]
                out.append(Move(kind, p, c, pivot, "c2c", "payload"))
                c = p
            return out[::-1]
        for kind, b, pivot in move_targets(config, c, exclude=src):
            if b not in prev and min(b) >= 0:
                prev[b] = (kind, pivot, c)
                todo.append(b)
    return None


@dataclass
class CompactStep:
    m1: tuple
    m2: tuple
    moves: int
    monotone: bool


def reconfigure_compact(D, D_prime, counter: OpCounter | None = None, check: bool = False,
                        steps: list | None = None) -> Trace:
    """Move modules of D - D' one at a time into D' - D, keeping everything compact.

    Each round takes the highest domination-maximal module m1 of D - D' and
    walks it over the surface to the lowest cell m2 of D' - D whose lower
    neighbours are all occupied.  Both choices come from heaps updated
    locally, so a round costs O(1) lookups plus the walk.  With ``check`` the
    configuration is scanned for compactness after every round.
    """
    d_cells, dp = _cells(D), _cells(D_prime)
    if len(d_cells) != len(dp):
        raise ConfigurationError(f"module counts differ: {len(d_cells)} vs {len(dp)}")
    for name, cells in (("D", d_cells), ("D'", dp)):
        if cells and min(min(c) for c in cells) < 0:
            raise ConfigurationError(f"{name} leaves the nonnegative orthant")
        if not is_compact_configuration(cells):
            raise ConfigurationError(f"{name} is not compact")
    config = Configuration(d_cells, counter)
    trace = Trace()
    union = d_cells | dp
    out_heap = []  # (-z, -y, -x) over maximal cells of D - D'
    in_heap = []   # (l1, cell) over ready cells of D' - D
    for c in d_cells - dp:
        if _is_maximal(c, union):
            heapq.heappush(out_heap, (tuple(-v for v in _lex_key(c)), c))
    for c in dp - d_cells:
        if _is_ready(c, d_cells):
            heapq.heappush(in_heap, (l1(c), c))
    cnt = config.counter
    cnt.queries += 2 * len(union)
    while out_heap:
        _, m1 = heapq.heappop(out_heap)
        _, m2 = heapq.heappop(in_heap)
        path = monotone_surface_path(config, m1, m2)
        monotone = path is not None
        if path is None:
            path = shortest_surface_path(config, m1, m2)
        if path is None or len(path) > l1(m1) + l1(m2):
            raise ReconfigureError(f"no walk of length <= |m1|+|m2| from {m1} to {m2}")
        for mv in path:
            # the rest is D - {m1}, compact and therefore connected
            apply_move(config, mv, assume_backbone=True)
            trace.append(mv)
        if steps is not None:
            steps.append(CompactStep(m1, m2, len(path), monotone))
        union.discard(m1)
        for i in range(3):
            low = _down(m1, i)
            cnt.queries += 4
            if low in config and low not in dp and _is_maximal(low, union):
                heapq.heappush(out_heap, (tuple(-v for v in _lex_key(low)), low))
            high = _up(m2, i)
            cnt.queries += 4
            if high in dp and high not in config and _is_ready(high, config):
                heapq.heappush(in_heap, (l1(high), high))
        if check and not is_compact_configuration(config):
            raise ReconfigureError(f"not compact after moving {m1} to {m2}")
    if in_heap:
        raise ReconfigureError("targets left over")
    return trace


@dataclass
class ReconfigPlan:
    forward: Trace = field(default_factory=Trace)
    bridge: Trace = field(default_factory=Trace)
    backward: Trace = field(default_factory=Trace)
    n: int = 0
    sigma1: int = 0
    sigma2: int = 0

    def trace(self) -> Trace:
        return Trace(self.forward.moves + self.bridge.moves + self.backward.moves)

    @property
    def total(self) -> int:
        return len(self.forward) + len(self.bridge) + len(self.backward)

    def budget(self, slack: int = 2, extra: int = 1000) -> int:
        return slack * (18 * (self.sigma1 + self.sigma2) + 120 * self.n) + extra

    def to_text(self) -> str:
        parts = []
        for header, tr in ((FORWARD, self.forward), (BRIDGE, self.bridge), (BACKWARD, self.backward)):
            parts.append(header)
            parts.extend(mv.to_line() for mv in tr.moves)
        return "\n".join(parts) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ReconfigPlan":
        plan = cls()
        section = None
        for raw in text.splitlines():
            line = raw.strip()
            if line in (FORWARD, BRIDGE, BACKWARD):
                section = {FORWARD: plan.forward, BRIDGE: plan.bridge, BACKWARD: plan.backward}[line]
                continue
            if not line or line.startswith("#"):
                continue
            if section is None:
                raise ValueError("move before the first section header")
            section.append(Move.from_line(line))
        return plan


def reconfigure(C1, C2, counter: OpCounter | None = None) -> ReconfigPlan:
    """Plan C1 -> C2: compactify C1, bridge the compact shapes, undo C2's compactification."""
    c1, c2 = _cells(C1), _cells(C2)
    if len(c1) != len(c2):
        raise ConfigurationError(f"module counts differ: {len(c1)} vs {len(c2)}")
    for name, cells in (("C1", c1), ("C2", c2)):
        if not is_connected(cells):
            raise ConfigurationError(f"{name} is not connected")
    counter = counter if counter is not None else OpCounter()
    first = compactify(Configuration(c1), counter=counter)
    second = compactify(Configuration(c2), counter=counter)
    bridge = reconfigure_compact(first.config, second.config, counter=counter)
    return ReconfigPlan(
        forward=first.trace,
        bridge=bridge,
        backward=second.trace.reversed(),
        n=len(c1),
        sigma1=coordinate_sum(c1),
        sigma2=coordinate_sum(c2),
    )


def read_plan(path) -> ReconfigPlan:
    with open(path) as fh:
        return ReconfigPlan.from_text(fh.read())


def write_plan(path, plan: ReconfigPlan):
    with open(path, "w") as fh:
        fh.write(plan.to_text())
