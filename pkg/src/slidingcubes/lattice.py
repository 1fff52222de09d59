"""Lattice model: cells, configurations, connectivity, domination, slice graph.

Cells are plain ``(x, y, z)`` integer tuples; a cell names the unit cube whose
corner closest to the origin sits at those coordinates.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator

Cell = tuple  # (x, y, z)

AXES = ((1, 0, 0), (0, 1, 0), (0, 0, 1))
DIRS = ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1))

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
MASK64 = 0xFFFFFFFFFFFFFFFF


class ConfigurationError(ValueError):
    """Malformed or inadmissible configuration."""


def add(c, d):
    return (c[0] + d[0], c[1] + d[1], c[2] + d[2])


def sub(c, d):
    return (c[0] - d[0], c[1] - d[1], c[2] - d[2])


def neighbors(c):
    x, y, z = c
    return ((x + 1, y, z), (x - 1, y, z), (x, y + 1, z),
            (x, y - 1, z), (x, y, z + 1), (x, y, z - 1))


def l1(c) -> int:
    return abs(c[0]) + abs(c[1]) + abs(c[2])


def l1_dist(a, b) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1]) + abs(a[2] - b[2])


def adjacent(a, b) -> bool:
    return l1_dist(a, b) == 1


@dataclass
class OpCounter:
    """Counts elementary occupancy queries and updates."""
    queries: int = 0
    updates: int = 0

    @property
    def total(self) -> int:
        return self.queries + self.updates

    def reset(self):
        self.queries = 0
        self.updates = 0


class Configuration:
    """Mutable set of occupied cells with per-slice indices and op counters.

    Membership tests go through ``in`` and are counted; iteration is not.
    """

    def __init__(self, cells: Iterable = (), counter: OpCounter | None = None):
        self._cells: set = set()
        self._slices: dict[int, set] = {}
        self.counter = counter if counter is not None else OpCounter()
        for c in cells:
            c = tuple(int(v) for v in c)
            if c in self._cells:
                raise ConfigurationError(f"duplicate cell {c}")
            self._insert(c)
        self.version = 0

    def _insert(self, c):
        self._cells.add(c)
        self._slices.setdefault(c[2], set()).add(c)

    def _delete(self, c):
        self._cells.remove(c)
        s = self._slices[c[2]]
        s.remove(c)
        if not s:
            del self._slices[c[2]]

    def __contains__(self, c) -> bool:
        self.counter.queries += 1
        return c in self._cells

    def __iter__(self) -> Iterator:
        return iter(self._cells)

    def __len__(self) -> int:
        return len(self._cells)

    def __eq__(self, other) -> bool:
        if isinstance(other, Configuration):
            return self._cells == other._cells
        return NotImplemented

    def __repr__(self) -> str:
        return f"Configuration(n={len(self._cells)}, cells={sorted(self._cells)[:6]}...)"

    @property
    def n(self) -> int:
        return len(self._cells)

    @property
    def cells(self) -> frozenset:
        return frozenset(self._cells)

    def raw(self) -> set:
        """The underlying cell set; lookups through it are not counted."""
        return self._cells

    def has(self, c) -> bool:
        return c in self

    def add(self, c):
        if c in self._cells:
            raise ConfigurationError(f"cell {c} already occupied")
        self.counter.updates += 1
        self._insert(c)
        self.version += 1

    def remove(self, c):
        if c not in self._cells:
            raise ConfigurationError(f"cell {c} is empty")
        self.counter.updates += 1
        self._delete(c)
        self.version += 1

    def move(self, src, dst):
        """Relocate one module without any validity check."""
        self.remove(src)
        self.add(dst)

    def copy(self, counter: OpCounter | None = None) -> "Configuration":
        out = Configuration.__new__(Configuration)
        out._cells = set(self._cells)
        out._slices = {z: set(s) for z, s in self._slices.items()}
        out.counter = counter if counter is not None else OpCounter()
        out.version = 0
        return out

    def slice_at(self, z) -> frozenset:
        return frozenset(self._slices.get(z, ()))

    def z_levels(self) -> list:
        return sorted(self._slices)

    def bbox(self):
        """((xmin, ymin, zmin), (xmax, ymax, zmax)) or None when empty."""
        if not self._cells:
            return None
        xs, ys, zs = zip(*self._cells)
        return (min(xs), min(ys), min(zs)), (max(xs), max(ys), max(zs))

    def sorted_cells(self) -> list:
        return sorted(self._cells)

    def digest(self) -> str:
        return digest_cells(self._cells)


def digest_cells(cells: Iterable) -> str:
    """64-bit FNV-1a over the sorted ``x y z`` serialization."""
    h = FNV_OFFSET
    for c in sorted(cells):
        for b in f"{c[0]} {c[1]} {c[2]}\n".encode():
            h ^= b
            h = (h * FNV_PRIME) & MASK64
    return f"{h:016x}"


def _occupied_set(config) -> set:
    if isinstance(config, Configuration):
        return config._cells
    return set(config)


# ---------------------------------------------------------------- connectivity

def is_connected(config) -> bool:
    cells = _occupied_set(config)
    if not cells:
        return True
    start = next(iter(cells))
    seen = {start}
    todo = [start]
    while todo:
        c = todo.pop()
        for nb in neighbors(c):
            if nb in cells and nb not in seen:
                seen.add(nb)
                todo.append(nb)
    return len(seen) == len(cells)


def components(cells: Iterable) -> list:
    cells = set(cells)
    out = []
    while cells:
        start = cells.pop()
        comp = {start}
        todo = [start]
        while todo:
            c = todo.pop()
            for nb in neighbors(c):
                if nb in cells:
                    cells.remove(nb)
                    comp.add(nb)
                    todo.append(nb)
        out.append(comp)
    return out


def articulation_cells(config) -> set:
    """Cut vertices of the face-adjacency graph (iterative Tarjan)."""
    cells = _occupied_set(config)
    if not is_connected(cells):
        raise ConfigurationError("articulation_cells requires a connected configuration")
    if len(cells) <= 2:
        return set()
    root = min(cells)
    disc = {root: 0}
    low = {root: 0}
    cut = set()
    root_children = 0
    t = 1
    stack = [(root, None, iter(neighbors(root)))]
    while stack:
        c, parent, it = stack[-1]
        advanced = False
        for nb in it:
            if nb not in cells or nb == parent:
                continue
            if nb in disc:
                low[c] = min(low[c], disc[nb])
            else:
                disc[nb] = low[nb] = t
                t += 1
                stack.append((nb, c, iter(neighbors(nb))))
                advanced = True
                break
        if advanced:
            continue
        stack.pop()
        if parent is not None:
            low[parent] = min(low[parent], low[c])
            if parent == root:
                root_children += 1
            elif low[c] >= disc[parent]:
                cut.add(parent)
    if root_children > 1:
        cut.add(root)
    return cut


def is_removable(config: Configuration, cell, budget: int | None = None) -> bool:
    """True iff removing ``cell`` leaves the remaining modules connected.

    Runs one BFS per occupied neighbour in lock-step and stops as soon as all
    searches have merged or one of them is exhausted, so the cost is bounded by
    the smaller side of any cut.  With ``budget`` set, gives up (returning
    False) after that many expansions; a True answer is always exact.
    """
    nbs = [nb for nb in neighbors(cell) if nb in config]
    if len(nbs) <= 1:
        return True
    owner = {nb: i for i, nb in enumerate(nbs)}
    parent = list(range(len(nbs)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    groups = len(nbs)
    frontiers = [deque([nb]) for nb in nbs]
    expansions = 0
    while True:
        for i, fr in enumerate(frontiers):
            if not fr:
                continue
            c = fr.popleft()
            expansions += 1
            if budget is not None and expansions > budget:
                return False
            for nb in neighbors(c):
                if nb == cell or nb not in config:
                    continue
                o = owner.get(nb)
                if o is None:
                    owner[nb] = i
                    fr.append(nb)
                    continue
                a, b = find(o), find(i)
                if a != b:
                    parent[a] = b
                    groups -= 1
                    if groups == 1:
                        return True
        # a group whose frontiers are all empty is a closed side of a cut
        alive: dict = {}
        for i, fr in enumerate(frontiers):
            r = find(i)
            alive[r] = alive.get(r, False) or bool(fr)
        if not all(alive.values()):
            return False


# ------------------------------------------------------------------ domination

def dominates(c, d) -> bool:
    return 0 <= d[0] <= c[0] and 0 <= d[1] <= c[1] and 0 <= d[2] <= c[2]


def dominated_cells(c) -> Iterator:
    for x in range(c[0] + 1):
        for y in range(c[1] + 1):
            for z in range(c[2] + 1):
                yield (x, y, z)


def is_compact_module(config, m) -> bool:
    if min(m) < 0:
        return False
    return all(d in config for d in dominated_cells(m))


def is_quasi_compact_module(config, m) -> bool:
    if min(m) < 0:
        return False
    for d in dominated_cells(m):
        if d[0] == m[0] and d[1] == m[1] and d[2] < m[2]:
            continue
        if d not in config:
            return False
    return True


def compact_check(occ, c, memo: dict | None = None) -> bool:
    """Memoised compactness of cell ``c`` in the set-like ``occ``.

    Uses the local rule: c is compact iff it is occupied and each lower
    neighbour along an axis where c is positive is compact.
    """
    if memo is None:
        memo = {}
    if c in memo:
        return memo[c]
    if min(c) < 0:
        return False
    stack = [c]
    while stack:
        cur = stack[-1]
        if cur in memo:
            stack.pop()
            continue
        if cur not in occ:
            memo[cur] = False
            stack.pop()
            continue
        pending = False
        ok = True
        for i in range(3):
            if cur[i] == 0:
                continue
            low = (cur[0] - (i == 0), cur[1] - (i == 1), cur[2] - (i == 2))
            f = memo.get(low)
            if f is None:
                stack.append(low)
                pending = True
            elif not f:
                ok = False
        if pending and ok:
            continue
        memo[cur] = ok
        stack.pop()
    return memo[c]


def quasi_compact_check(occ, c, axis: int = 2, memo: dict | None = None) -> bool:
    """c occupied and compact lower neighbours along the two other axes."""
    if min(c) < 0 or c not in occ:
        return False
    if memo is None:
        memo = {}
    for i in range(3):
        if i == axis or c[i] == 0:
            continue
        low = (c[0] - (i == 0), c[1] - (i == 1), c[2] - (i == 2))
        if not compact_check(occ, low, memo):
            return False
    return True


def is_compact_configuration(config) -> bool:
    return all(flag for flag in compactness_flags(config).values())


def compactness_flags(config, exclude=frozenset()) -> dict:
    """Map each occupied cell to whether it is compact.

    A module is compact iff each lower face-neighbour (in every axis where its
    coordinate is positive) is occupied and compact, so one sweep in order of
    increasing coordinate sum settles all flags.  Cells in ``exclude`` are
    treated as empty.
    """
    cells = [c for c in _occupied_set(config) if c not in exclude]
    cells.sort(key=l1)
    occ = set(cells)
    flags: dict = {}
    for c in cells:
        if min(c) < 0:
            flags[c] = False
            continue
        ok = True
        for i in range(3):
            if c[i] > 0:
                lower = list(c)
                lower[i] -= 1
                lower = tuple(lower)
                if lower not in occ or not flags[lower]:
                    ok = False
                    break
        flags[c] = ok
    return flags


def quasi_compact_flags(config, axis: int = 2, exclude=frozenset(), compact=None) -> dict:
    """Quasi-compactness relative to ``axis`` (2 = the usual vertical one).

    A module is quasi-compact iff the lower neighbours along the two other
    axes are occupied and compact.
    """
    if compact is None:
        compact = compactness_flags(config, exclude)
    out = {}
    for c in compact:
        if min(c) < 0:
            out[c] = False
            continue
        ok = True
        for i in range(3):
            if i == axis or c[i] == 0:
                continue
            lower = list(c)
            lower[i] -= 1
            if not compact.get(tuple(lower), False):
                ok = False
                break
        out[c] = ok
    return out


# ---------------------------------------------------------------- outer boundary

def outer_boundary_modules(config) -> set:
    """Modules with a face on the unbounded component of the complement."""
    cells = _occupied_set(config)
    if not cells:
        return set()
    xs, ys, zs = zip(*cells)
    lo = (min(xs) - 1, min(ys) - 1, min(zs) - 1)
    hi = (max(xs) + 1, max(ys) + 1, max(zs) + 1)
    start = lo
    seen = {start}
    todo = [start]
    touched = set()
    while todo:
        c = todo.pop()
        for nb in neighbors(c):
            if not (lo[0] <= nb[0] <= hi[0] and lo[1] <= nb[1] <= hi[1] and lo[2] <= nb[2] <= hi[2]):
                continue
            if nb in cells:
                touched.add(nb)
            elif nb not in seen:
                seen.add(nb)
                todo.append(nb)
    return touched


def coordinate_sum(config) -> int:
    total = 0
    for c in _occupied_set(config):
        if min(c) < 0:
            raise ConfigurationError(f"negative coordinate in {c}")
        total += c[0] + c[1] + c[2]
    return total


# ------------------------------------------------------------------ slice graph

@dataclass
class SliceGraph:
    """Clusters (connected components of each slice) and their vertical links."""
    clusters: list = field(default_factory=list)  # list of (level, frozenset)
    edges: set = field(default_factory=set)       # {(i, j)} with i < j
    cluster_of: dict = field(default_factory=dict)
    axis: int = 2

    def level(self, i) -> int:
        return self.clusters[i][0]

    def cells(self, i) -> frozenset:
        return self.clusters[i][1]

    def adjacency(self) -> dict:
        adj = {i: set() for i in range(len(self.clusters))}
        for i, j in self.edges:
            adj[i].add(j)
            adj[j].add(i)
        return adj

    def __len__(self) -> int:
        return len(self.clusters)


def build_slice_graph(config, axis: int = 2, exclude=frozenset(), restrict=None) -> SliceGraph:
    """Slice graph along ``axis``; ``restrict`` optionally filters cells."""
    cells = {c for c in _occupied_set(config) if c not in exclude}
    if restrict is not None:
        cells = {c for c in cells if restrict(c)}
    by_level: dict = {}
    for c in cells:
        by_level.setdefault(c[axis], set()).add(c)
    g = SliceGraph(axis=axis)
    for level in sorted(by_level):
        layer = by_level[level]
        for comp in sorted(_planar_components(layer, axis), key=min):
            idx = len(g.clusters)
            g.clusters.append((level, frozenset(comp)))
            for c in comp:
                g.cluster_of[c] = idx
    step = [0, 0, 0]
    step[axis] = 1
    step = tuple(step)
    for c, i in g.cluster_of.items():
        up = add(c, step)
        j = g.cluster_of.get(up)
        if j is not None and j != i:
            g.edges.add((min(i, j), max(i, j)))
    return g


def _planar_components(layer: set, axis: int) -> list:
    layer = set(layer)
    out = []
    while layer:
        start = layer.pop()
        comp = {start}
        todo = [start]
        while todo:
            c = todo.pop()
            for d in DIRS:
                if d[axis] != 0:
                    continue
                nb = add(c, d)
                if nb in layer:
                    layer.remove(nb)
                    comp.add(nb)
                    todo.append(nb)
        out.append(comp)
    return out


# ------------------------------------------------------------------------ I/O

def parse_configuration(text: str) -> Configuration:
    cells = []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ConfigurationError(f"line {lineno}: expected 'x y z', got {raw!r}")
        try:
            c = tuple(int(p) for p in parts)
        except ValueError as exc:
            raise ConfigurationError(f"line {lineno}: {exc}") from None
        if c in seen:
            raise ConfigurationError(f"line {lineno}: duplicate cell {c}")
        seen.add(c)
        cells.append(c)
    return Configuration(cells)


def format_configuration(config, comment: str | None = None) -> str:
    lines = []
    if comment:
        lines.append(f"# {comment}")
    lines.extend(f"{x} {y} {z}" for x, y, z in sorted(_occupied_set(config)))
    return "\n".join(lines) + "\n"


def read_configuration(path) -> Configuration:
    with open(path) as fh:
        return parse_configuration(fh.read())


def write_configuration(path, config, comment: str | None = None):
    with open(path, "w") as fh:
        fh.write(format_configuration(config, comment))
