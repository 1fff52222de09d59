"""The six helper modules: harvesting, parking above a cluster, advancing."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .lattice import build_slice_graph, is_removable, l1_dist, outer_boundary_modules
from .moves import Trace
from .state import Runner

SQUAD_SIZE = 6
STRAIGHT = "straight2"
BEND = "bend34"
TRANSIT = "transit"


class HarvestStall(RuntimeError):
    """No movable boundary module could reach the staging block."""


class TransitError(RuntimeError):
    """The squad could not be brought to the requested cluster."""


@dataclass
class MusketeerSquad:
    members: list = field(default_factory=list)
    formation: str = TRANSIT

    def __len__(self):
        return len(self.members)


def block_cells(corner, long_axis: int):
    """A 2x3x1 block at ``corner``'s level, three long along ``long_axis``."""
    lx, ly = (3, 2) if long_axis == 0 else (2, 3)
    x0, y0, z = corner
    return [(x0 + i, y0 + j, z) for i in range(lx) for j in range(ly)]


def _bfs_order(cells, start):
    cells = set(cells)
    order = [start]
    seen = {start}
    todo = deque([start])
    while todo:
        c = todo.popleft()
        x, y, z = c
        for nb in sorted(((x + 1, y, z), (x - 1, y, z), (x, y + 1, z), (x, y - 1, z))):
            if nb in cells and nb not in seen:
                seen.add(nb)
                order.append(nb)
                todo.append(nb)
    return order


def staging_block(runner: Runner):
    """Six empty cells resting on the highest cluster, in fill order.

    Anchored above the lexicographically smallest module of the highest
    cluster; among the 2x3 placements covering that cell, the one with the
    most cells resting on modules wins, then the one inside the box.
    """
    occ = runner.payload()
    cells = list(occ)
    top = max(c[2] for c in cells)
    anchor = min(c for c in cells if c[2] == top)
    a = (anchor[0], anchor[1], top + 1)
    box = runner.box_for(anchor)
    best = None
    for long_axis in (0, 1):
        lx, ly = (3, 2) if long_axis == 0 else (2, 3)
        for dx in range(lx):
            for dy in range(ly):
                blk = block_cells((a[0] - dx, a[1] - dy, a[2]), long_axis)
                if any(c in runner.config for c in blk):
                    continue
                if box is not None and not all(box.admits(c) for c in blk):
                    continue
                support = sum((c[0], c[1], c[2] - 1) in runner.config for c in blk)
                inner = 0
                if runner.inner is not None:
                    lo, hi = runner.inner
                    inner = sum(lo[0] <= c[0] <= hi[0] and lo[1] <= c[1] <= hi[1] for c in blk)
                key = (-support, -inner, sorted(blk))
                if best is None or key < best[0]:
                    best = (key, blk)
    if best is None:
        return None, anchor
    return _bfs_order(best[1], a), anchor


def _candidates(runner: Runner, slot, exclude):
    boundary = outer_boundary_modules(runner.config.raw())
    squad = set(runner.squad)
    out = [c for c in boundary if c not in squad and c not in exclude]
    out.sort(key=lambda c: (-c[2], l1_dist(c, slot), c))
    return out


def harvest_musketeers(runner: Runner, k: int = SQUAD_SIZE, max_tries: int = 40) -> MusketeerSquad:
    """Gather ``k`` movable boundary modules into a block above the top cluster."""
    if len(runner.config) < k + 1:
        raise HarvestStall(f"need at least {k + 1} modules, have {len(runner.config)}")
    slots, anchor = staging_block(runner)
    if slots is None:
        raise HarvestStall("no room for the staging block")
    for slot in slots[:k]:
        if not fill_slot(runner, slot, exclude={anchor}, max_tries=max_tries):
            raise HarvestStall(f"no module could reach staging cell {slot}")
    return MusketeerSquad(list(runner.squad), STRAIGHT)


def fill_slot(runner: Runner, slot, exclude=frozenset(), max_tries: int = 40, phase: str = "harvest") -> bool:
    tried = 0
    for c in _candidates(runner, slot, exclude):
        if tried >= max_tries:
            break
        if not is_removable(runner.config, c):
            continue
        tried += 1
        if runner.walk(c, [slot], phase, "musketeer"):
            runner.squad.append(slot)
            return True
    return False


def park_slots(runner: Runner, cluster, up=(0, 0, 1), k: int = SQUAD_SIZE):
    """Up to ``k`` cells just above ``cluster`` (offset ``up``), connected, fill order."""
    cluster = set(cluster)
    raw = runner.config.raw()
    squad = set(runner.squad)
    box = runner.box_for(next(iter(cluster)))

    def free(c):
        return (c not in raw or c in squad) and (box is None or box.admits(c))

    above = sorted((c[0] + up[0], c[1] + up[1], c[2] + up[2]) for c in cluster)
    above = [c for c in above if free(c)]
    if not above:
        return []
    base = set(above)

    def layer_ok(nb):
        return nb in base or up[2] != 0 or nb[2] in (-1, 0, 1)

    # cells over the cluster first, component by component, then spill sideways
    order = []
    seen = set()
    for start in above:
        if start in seen or len(order) >= k:
            continue
        seen.add(start)
        todo = deque([start])
        while todo and len(order) < k:
            c = todo.popleft()
            order.append(c)
            for nb in sorted(_nbs6(c)):
                if nb in base and nb not in seen:
                    seen.add(nb)
                    todo.append(nb)
    todo = deque(order)
    while todo and len(order) < k:
        c = todo.popleft()
        for nb in sorted(_nbs6(c)):
            if len(order) >= k:
                break
            if nb in seen or not free(nb) or not layer_ok(nb):
                continue
            seen.add(nb)
            order.append(nb)
            todo.append(nb)
    return order[:k]


def _nbs6(c):
    x, y, z = c
    return [(x + 1, y, z), (x - 1, y, z), (x, y + 1, z), (x, y - 1, z), (x, y, z + 1), (x, y, z - 1)]


def transit_musketeers(runner: Runner, cluster, up=(0, 0, 1), phase: str = "transit") -> Trace:
    """Re-park the squad next to ``cluster``; members that cannot reach stay put."""
    start = runner.mark()
    slots = park_slots(runner, cluster, up)
    if not slots:
        return Trace(runner.trace.moves[start:])
    targets = [s for s in slots if s not in runner.squad]
    idle = [m for m in runner.squad if m not in slots]
    for slot in targets:
        if not idle:
            break
        idle.sort(key=lambda m: (l1_dist(m, slot), m))
        for m in idle:
            if runner.walk(m, [slot], phase, "musketeer"):
                idle.remove(m)
                break
    return Trace(runner.trace.moves[start:])


def advance_formation(runner: Runner, target_cells, phase: str = "lower") -> Trace:
    """Move squad members into ``target_cells``, nearest member first (members already there stay)."""
    start = runner.mark()
    targets = [c for c in target_cells if c not in runner.squad]
    for slot in targets:
        movable = [m for m in runner.squad if m not in target_cells]
        movable.sort(key=lambda m: (l1_dist(m, slot), m))
        for m in movable:
            if runner.walk(m, [slot], phase, "musketeer"):
                break
        else:
            raise TransitError(f"formation cell {slot} unreachable")
    return Trace(runner.trace.moves[start:])


def squad_cluster(runner: Runner, graph):
    """Index of the payload cluster the squad rests on, if any."""
    for m in sorted(runner.squad):
        below = (m[0], m[1], m[2] - 1)
        if below in graph.cluster_of:
            return graph.cluster_of[below]
    return None


def highest_cluster(graph):
    return max(range(len(graph)), key=lambda i: (graph.level(i), [-v for v in min(graph.cells(i))]))


__all__ = [
    "MusketeerSquad", "HarvestStall", "TransitError", "harvest_musketeers", "transit_musketeers",
    "advance_formation", "park_slots", "staging_block", "block_cells", "squad_cluster",
    "build_slice_graph", "fill_slot", "highest_cluster",
]
