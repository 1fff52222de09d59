"""Brute-force shortest reconfiguration and a second, hand-written move checker.

The checker below deliberately shares no code with ``slidingcubes.moves``:
it re-derives legality from the raw cell set with its own connectivity
search, so engine and oracle disagreeing means one of them is wrong.
"""
from __future__ import annotations

import itertools
import random
from collections import deque
from dataclasses import dataclass

from ..lattice import Configuration
from ..moves import CONVEX, SLIDE, Trace, enumerate_moves

FOUND = "found"
UNREACHABLE = "unreachable"   # every state within max_moves explored, target absent
BUDGET = "budget"             # state cap hit before the search finished
MAX_ORACLE_N = 5
MAX_ORACLE_SIDE = 5


class OracleInputError(ValueError):
    pass


def _connected(cells) -> bool:
    cells = set(cells)
    if not cells:
        return True
    start = next(iter(cells))
    seen = {start}
    todo = [start]
    while todo:
        x, y, z = todo.pop()
        for nb in ((x + 1, y, z), (x - 1, y, z), (x, y + 1, z), (x, y - 1, z), (x, y, z + 1), (x, y, z - 1)):
            if nb in cells and nb not in seen:
                seen.add(nb)
                todo.append(nb)
    return len(seen) == len(cells)


def independent_move_ok(cells, src, dst, pivot=None) -> bool:
    """Is src -> dst a legal slide or convex transition in ``cells``?"""
    cells = set(cells)
    if src not in cells or dst in cells:
        return False
    delta = [dst[i] - src[i] for i in range(3)]
    moved = [i for i in range(3) if delta[i] != 0]
    if any(abs(delta[i]) != 1 for i in moved) or len(moved) not in (1, 2):
        return False
    rest = cells - {src}
    if not _connected(rest):
        return False
    if len(moved) == 1:
        if pivot is not None:
            return False
        axis = moved[0]
        for other in range(3):
            if other == axis:
                continue
            for sign in (1, -1):
                off = [0, 0, 0]
                off[other] = sign
                a = (src[0] + off[0], src[1] + off[1], src[2] + off[2])
                b = (dst[0] + off[0], dst[1] + off[1], dst[2] + off[2])
                if a in rest and b in rest:
                    return True
        return False
    i, j = moved
    w1 = list(src)
    w1[i] = dst[i]
    w2 = list(src)
    w2[j] = dst[j]
    w1, w2 = tuple(w1), tuple(w2)
    if (w1 in rest) == (w2 in rest):
        return False
    actual = w1 if w1 in rest else w2
    return pivot is None or pivot == actual


def independent_moves(cells, m) -> set:
    """All (dst, pivot) pairs the hand-written predicate accepts for module ``m``."""
    out = set()
    for d in itertools.product((-1, 0, 1), repeat=3):
        k = sum(v != 0 for v in d)
        if k not in (1, 2):
            continue
        dst = (m[0] + d[0], m[1] + d[1], m[2] + d[2])
        if not independent_move_ok(cells, m, dst):
            continue
        pivot = None
        if k == 2:
            for i in range(3):
                if d[i]:
                    w = list(m)
                    w[i] = dst[i]
                    if tuple(w) in cells:
                        pivot = tuple(w)
        out.add((dst, pivot))
    return out


def engine_moves(cells, m) -> set:
    return {(mv.dst, mv.pivot) for mv in enumerate_moves(Configuration(cells), m)}


def check_trace_independently(initial, trace: Trace):
    """(ok, first bad index or None, final cells) using only the hand-written predicate."""
    cells = set(initial)
    for i, mv in enumerate(trace.moves):
        pivot = mv.pivot if mv.kind == CONVEX else None
        if not independent_move_ok(cells, mv.src, mv.dst, pivot):
            return False, i, cells
        if (mv.kind == SLIDE) != (sum(a != b for a, b in zip(mv.src, mv.dst)) == 1):
            return False, i, cells
        cells.remove(mv.src)
        cells.add(mv.dst)
    return True, None, cells


@dataclass
class OracleResult:
    status: str
    trace: Trace | None = None
    states: int = 0

    @property
    def distance(self) -> int | None:
        return len(self.trace) if self.trace is not None else None


def _key(cells) -> tuple:
    return tuple(sorted(cells))


def oracle_bfs(C1, C2, max_moves: int = 12, state_cap: int = 2_000_000) -> OracleResult:
    """Shortest move sequence from C1 to C2 by exhaustive breadth-first search.

    States are sorted cell tuples in absolute coordinates.  Every expanded
    move is produced by the engine and re-checked by the independent
    predicate; a disagreement raises AssertionError.
    """
    a, b = set(C1), set(C2)
    if len(a) != len(b):
        raise OracleInputError("configurations differ in size")
    if len(a) > MAX_ORACLE_N:
        raise OracleInputError(f"oracle handles at most {MAX_ORACLE_N} modules")
    for cells in (a, b):
        if cells and max(max(c) - min(c) for c in zip(*cells)) >= MAX_ORACLE_SIDE:
            raise OracleInputError(f"configuration exceeds a {MAX_ORACLE_SIDE}-cube")
    start, goal = _key(a), _key(b)
    if start == goal:
        return OracleResult(FOUND, Trace(), 1)
    prev = {start: None}
    frontier = deque([(start, 0)])
    capped = False
    while frontier:
        state, depth = frontier.popleft()
        if depth >= max_moves:
            continue
        cells = set(state)
        for m in state:
            for mv in enumerate_moves(Configuration(cells), m):
                pivot = mv.pivot if mv.kind == CONVEX else None
                if not independent_move_ok(cells, mv.src, mv.dst, pivot):
                    raise AssertionError(f"engine move {mv} rejected by the independent check")
                nxt = _key((cells - {mv.src}) | {mv.dst})
                if nxt in prev:
                    continue
                prev[nxt] = (state, mv)
                if nxt == goal:
                    moves = []
                    s = nxt
                    while prev[s] is not None:
                        s, step = prev[s]
                        moves.append(step)
                    return OracleResult(FOUND, Trace(moves[::-1]), len(prev))
                if len(prev) >= state_cap:
                    capped = True
                    break
                frontier.append((nxt, depth + 1))
            if capped:
                break
        if capped:
            break
    return OracleResult(BUDGET if capped else UNREACHABLE, None, len(prev))


def connected_configurations(n: int, side: int):
    """Every connected n-cell subset of the cube [0, side)^3, sorted."""
    cells = [(x, y, z) for x in range(side) for y in range(side) for z in range(side)]
    level = {frozenset([c]) for c in cells}
    for _ in range(n - 1):
        nxt = set()
        for s in level:
            for c in s:
                x, y, z = c
                for nb in ((x + 1, y, z), (x - 1, y, z), (x, y + 1, z), (x, y - 1, z), (x, y, z + 1), (x, y, z - 1)):
                    if nb not in s and all(0 <= v < side for v in nb):
                        nxt.add(s | {nb})
        level = nxt
    return sorted(tuple(sorted(s)) for s in level)


def sample_move_agreement(pairs: int = 100_000, seed: int = 0, max_n: int = 8, side: int = 4):
    """Compare engine and independent move sets on random connected configurations.

    Every module of a sample contributes 18 (configuration, move) pairs (all
    face and edge neighbours).  Returns (pairs checked, list of disagreements).
    """
    rng = random.Random(seed)
    checked = 0
    bad = []
    while checked < pairs:
        n = rng.randint(1, max_n)
        cells = {(rng.randrange(side), rng.randrange(side), rng.randrange(side))}
        while len(cells) < n:
            x, y, z = rng.choice(sorted(cells))
            d = rng.choice(((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)))
            c = (x + d[0], y + d[1], z + d[2])
            if all(0 <= v < side for v in c):
                cells.add(c)
        for m in sorted(cells):
            eng = engine_moves(cells, m)
            ind = independent_moves(cells, m)
            if eng != ind:
                bad.append((tuple(sorted(cells)), m, eng ^ ind))
            checked += 18
    return checked, bad


__all__ = [
    "oracle_bfs", "OracleResult", "independent_move_ok", "independent_moves", "engine_moves",
    "check_trace_independently", "connected_configurations", "sample_move_agreement",
    "FOUND", "UNREACHABLE", "BUDGET", "OracleInputError",
]
