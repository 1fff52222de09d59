"""Single-module surface walks: one module travels while the rest stays put."""
from __future__ import annotations

import heapq
from collections import Counter
from dataclasses import dataclass, field

from .lattice import is_removable, l1_dist
from .moves import Move, _UNITS, move_targets

# walks explore at most this many cells before giving up
DEFAULT_NODE_CAP = 20000


@dataclass
class Box:
    """Inclusive bounds a walker may use, plus the inner box it should avoid leaving."""
    lo: tuple
    hi: tuple
    inner_lo: tuple | None = None
    inner_hi: tuple | None = None
    allow_outside: bool = True

    def admits(self, c) -> bool:
        for i in range(3):
            if c[i] < self.lo[i] or c[i] > self.hi[i]:
                return False
        if not self.allow_outside and self.inner_lo is not None:
            for i in range(3):
                if c[i] < self.inner_lo[i] or c[i] > self.inner_hi[i]:
                    return False
        return True

    def outside_inner(self, c) -> bool:
        if self.inner_lo is None:
            return False
        return any(c[i] < self.inner_lo[i] or c[i] > self.inner_hi[i] for i in range(3))


def window_box(lo, hi, allow_outside=True, floor=-1) -> Box:
    """The inner box [lo, hi] inflated by one, never below ``floor``."""
    return Box(
        tuple(max(floor, v - 1) for v in lo), tuple(v + 1 for v in hi),
        tuple(lo), tuple(hi), allow_outside,
    )


@dataclass
class FaceVisits:
    """How often a walker rested against each (module, direction) face."""
    counts: Counter = field(default_factory=Counter)

    def record(self, config, cell, exclude=None):
        for d in _UNITS:
            nb = (cell[0] + d[0], cell[1] + d[1], cell[2] + d[2])
            if nb != exclude and nb in config:
                self.counts[(nb, d)] += 1

    def bottom_visits(self) -> Counter:
        # walker resting on a module's top face
        return Counter({k[0]: v for k, v in self.counts.items() if k[1] == (0, 0, -1)})

    def max_visits(self) -> int:
        return max(self.counts.values(), default=0)


def _h(c, goals) -> int:
    return min(l1_dist(c, g) for g in goals)


def plan_walk(config, src, targets, box: Box | None = None, avoid=frozenset(),
              node_cap: int = DEFAULT_NODE_CAP, step_filter=None, check_removable=True,
              phase: str = "c2c", actor: str = "payload"):
    """Shortest-ish move sequence bringing the module at ``src`` to one of ``targets``.

    The other modules stay fixed, so the plan is valid as long as they stay
    connected without ``src`` (checked here unless ``check_removable`` is False).
    Returns a list of moves, ``[]`` if ``src`` is already a target, or None.
    ``step_filter(a, b)`` may veto individual steps.
    """
    goals = set(targets)
    if src in goals:
        return []
    goals = {g for g in goals if g not in config and g not in avoid and (box is None or box.admits(g))}
    if not goals:
        return None
    if check_removable and not is_removable(config, src):
        return None
    small = len(goals) <= 24
    h0 = _h(src, goals) if small else 0
    start = (h0, 0, src)
    heap = [start]
    parent = {src: None}
    dist = {src: 0}
    expanded = 0
    while heap:
        _, g, c = heapq.heappop(heap)
        if g > dist.get(c, g):
            continue
        if c in goals:
            out = []
            while parent[c] is not None:
                (kind, pivot), prev = parent[c]
                out.append(Move(kind, prev, c, pivot, phase, actor))
                c = prev
            out.reverse()
            return out
        expanded += 1
        if expanded > node_cap:
            return None
        for kind, b, pivot in move_targets(config, c, exclude=src):
            if b in avoid or (box is not None and not box.admits(b)):
                continue
            if step_filter is not None and not step_filter(c, b):
                continue
            ng = g + 1
            if ng < dist.get(b, 1 << 60):
                dist[b] = ng
                parent[b] = ((kind, pivot), c)
                hb = _h(b, goals) if small else 0
                # weight 2 over the admissible ceil(L1/2) bound keeps paths short
                heapq.heappush(heap, (ng + hb, ng, b))
    return None


def bounded_walk(config, src, is_goal, max_len: int, box: Box | None = None,
                 phase: str = "fix", actor: str = "payload"):
    """Breadth-first: fewest moves taking ``src`` to a cell with ``is_goal``, at most ``max_len``.

    Returns the move list or None.  ``src`` must be removable (checked).
    """
    if not is_removable(config, src):
        return None
    prev = {src: None}
    frontier = [src]
    for _ in range(max_len):
        nxt = []
        for c in frontier:
            for kind, b, pivot in move_targets(config, c, exclude=src):
                if b in prev or (box is not None and not box.admits(b)):
                    continue
                prev[b] = (kind, pivot, c)
                if is_goal(b):
                    out = []
                    while prev[b] is not None:
                        kind, pivot, a = prev[b]
                        out.append(Move(kind, a, b, pivot, phase, actor))
                        b = a
                    return out[::-1]
                nxt.append(b)
        frontier = nxt
    return None


def reachable_cells(config, src, box: Box | None = None, avoid=frozenset(), node_cap: int = DEFAULT_NODE_CAP):
    """Every cell the module at ``src`` can reach alone (including ``src``)."""
    seen = {src}
    stack = [src]
    while stack and len(seen) < node_cap:
        c = stack.pop()
        for _, b, _ in move_targets(config, c, exclude=src):
            if b in seen or b in avoid or (box is not None and not box.admits(b)):
                continue
            seen.add(b)
            stack.append(b)
    return seen
