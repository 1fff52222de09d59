"""Lowering the non-quasi-compact modules of one cluster by a single level."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .lattice import is_removable, l1_dist
from .moves import SLIDE, Move, validate_move
from .state import Runner

UP = {2: (0, 0, 1), 1: (0, 1, 0), 0: (1, 0, 0)}


def _step(c, axis, sign=-1):
    return tuple(c[i] + (sign if i == axis else 0) for i in range(3))


def _layer_neighbors(c, axis):
    for i in range(3):
        if i == axis:
            continue
        for s in (-1, 1):
            yield tuple(c[j] + (s if j == i else 0) for j in range(3))


@dataclass
class ClusterTree:
    nodes: set
    parent: dict
    root: tuple
    post_order: list
    terminals: frozenset = frozenset()
    axis: int = 2

    def children(self, c):
        return sorted(k for k, v in self.parent.items() if v == c)

    def degree(self, c) -> int:
        return len(self.children(c)) + (self.parent.get(c) is not None)

    def leaves(self):
        return [c for c in self.post_order if not self.children(c)]

    def path_to_root(self, c):
        out = [c]
        while self.parent.get(out[-1]) is not None:
            out.append(self.parent[out[-1]])
        return out

    def __len__(self):
        return len(self.nodes)


def build_cluster_tree(cluster, terminals, axis: int = 2, prefer=None) -> ClusterTree:
    """Steiner tree of ``terminals`` inside ``cluster`` by repeated nearest attachment.

    Starting from the smallest terminal, the nearest unattached terminal (grid
    distance through cluster cells) is joined by a shortest path until all are
    connected.  ``prefer`` marks cells that are cheaper to route through.
    """
    cluster = set(cluster)
    terminals = set(terminals)
    if not terminals:
        raise ValueError("no terminals")
    if not terminals <= cluster:
        raise ValueError("terminals must lie in the cluster")
    root = min(terminals)
    nodes = {root}
    parent = {root: None}
    remaining = terminals - nodes
    while remaining:
        # multi-source BFS from the current tree
        prev = {c: None for c in nodes}
        todo = deque(sorted(nodes))
        hit = None
        while todo:
            c = todo.popleft()
            if c in remaining:
                hit = c
                break
            nbs = sorted(_layer_neighbors(c, axis), key=lambda n: (prefer is not None and n not in prefer, n))
            for nb in nbs:
                if nb in cluster and nb not in prev:
                    prev[nb] = c
                    todo.append(nb)
        if hit is None:
            raise ValueError("terminals are not connected inside the cluster")
        c = hit
        while c not in nodes:
            p = prev[c]
            parent[c] = p
            nodes.add(c)
            c = p
        remaining -= nodes
    kids: dict = {}
    for c, p in parent.items():
        if p is not None:
            kids.setdefault(p, []).append(c)
    post = []
    stack = [(root, False)]
    while stack:
        c, done = stack.pop()
        if done:
            post.append(c)
            continue
        stack.append((c, True))
        for k in sorted(kids.get(c, []), reverse=True):
            stack.append((k, False))
    return ClusterTree(nodes, parent, root, post, frozenset(terminals), axis)


@dataclass
class LowerReport:
    lowered: list = field(default_factory=list)    # cells filled one level down
    stragglers: list = field(default_factory=list)
    unlowered: list = field(default_factory=list)  # below was empty but unreachable
    moves: int = 0
    helper_fills: int = 0

    @property
    def ell(self) -> int:
        return len(self.lowered)

    @property
    def s(self) -> int:
        return len(self.stragglers)


def lower_cluster(runner: Runner, tree: ClusterTree, phase: str = "lower", max_sources: int = 8) -> LowerReport:
    """Lower every tree module whose cell below is empty, in post order.

    A module that can slide straight down does so.  Otherwise a helper (a
    released, already-processed module or a squad member) walks into the
    cell below, and the module stays behind as a processed module until it
    is free to serve as the next helper.  Modules with an occupied cell below
    become stragglers.
    """
    axis = tree.axis
    rep = LowerReport()
    start = runner.mark()
    processed = []  # occupied tree cells whose cell below is now filled
    for p in tree.post_order:
        if p not in runner.config or p in runner.squad:
            continue
        below = _step(p, axis)
        if below in runner.config:
            rep.stragglers.append(p)
            continue
        mv = Move(SLIDE, p, below, phase=phase, actor="payload")
        if validate_move(runner.config, mv) is None:
            runner.apply(mv, assume_backbone=True)
            rep.lowered.append(below)
            continue
        if _helper_fill(runner, below, processed, phase, max_sources):
            rep.helper_fills += 1
            rep.lowered.append(below)
            processed.append(p)
        else:
            rep.unlowered.append(p)
    # processed modules left over: hand them to the squad, or they are stragglers
    for p in list(processed):
        if p in runner.config and p not in runner.squad:
            rep.stragglers.append(p)
    rep.moves = len(runner.trace) - start
    return rep


def _helper_fill(runner: Runner, below, processed, phase, max_sources) -> bool:
    sources = []
    for c in processed:
        if c in runner.config and c not in runner.squad:
            sources.append((l1_dist(c, below), 0, c))
    for m in runner.squad:
        sources.append((l1_dist(m, below), 1, m))
    sources.sort()
    for _, kind, c in sources[:max_sources]:
        if kind == 0 and not is_removable(runner.config, c):
            continue
        actor = "payload" if kind == 0 else "musketeer"
        if runner.walk(c, [below], phase, actor):
            if kind == 0:
                processed.remove(c)
            else:
                runner.squad.remove(below)
            return True
    return False


def assign_stragglers_to_leaves(tree: ClusterTree, stragglers, free_leaves):
    """Greedy matching of stragglers to leaves with pairwise disjoint tree paths.

    Leaves are taken deepest first; a straggler is matched to a leaf when the
    tree path between them avoids every path already claimed.
    """
    depth = {c: len(tree.path_to_root(c)) for c in tree.nodes}
    leaves = sorted(free_leaves, key=lambda c: (-depth.get(c, 0), c))
    used: set = set()
    out = {}
    for s in sorted(stragglers):
        for leaf in leaves:
            if leaf in out.values():
                continue
            path = tree_path(tree, s, leaf)
            if path is None or used & set(path):
                continue
            out[s] = leaf
            used |= set(path)
            break
    return out


def tree_path(tree: ClusterTree, a, b):
    if a not in tree.nodes or b not in tree.nodes:
        return None
    pa = tree.path_to_root(a)
    pb = tree.path_to_root(b)
    sb = set(pb)
    for i, c in enumerate(pa):
        if c in sb:
            j = pb.index(c)
            return pa[: i + 1] + list(reversed(pb[:j]))
    return None


def relocate_stragglers_along_tree(runner: Runner, tree: ClusterTree, stragglers, phase: str = "lower") -> dict:
    """Send stragglers to the empty cells below leaves, along disjoint tree paths.

    Returns {straggler: destination} for every straggler that moved.
    """
    axis = tree.axis
    free_leaves = [l for l in tree.leaves() if _step(l, axis) not in runner.config]
    match = assign_stragglers_to_leaves(tree, [s for s in stragglers if s in runner.config], free_leaves)
    moved = {}
    for s, leaf in sorted(match.items()):
        dst = _step(leaf, axis)
        corridor = set(tree_path(tree, s, leaf))
        lower = {_step(c, axis) for c in corridor}
        band = corridor | lower | {_step(c, axis, 1) for c in corridor}
        # one cell of room on either side so the walker can get around the path's ends
        allowed = band | {nb for c in band for nb in _layer_neighbors(c, axis)}

        def along(a, b, allowed=allowed):
            return b in allowed

        if runner.walk(s, [dst], phase, "payload", step_filter=along):
            moved[s] = dst
    return moved
