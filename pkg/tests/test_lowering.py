import itertools
import random

import pytest
from hypothesis import given, strategies as st

from slidingcubes.harness.accounting import SLACK, lowering_bound
from slidingcubes.lattice import Configuration, is_connected
from slidingcubes.lowering import (
    assign_stragglers_to_leaves, build_cluster_tree, lower_cluster, relocate_stragglers_along_tree, tree_path,
)
from slidingcubes.moves import verify_trace
from slidingcubes.state import Runner

CORRIDOR = {(x, 0, 1) for x in range(6)}
SQUAD = [(x, y, 2) for x in range(3) for y in range(2)]


def _lower(cells, cluster, terminals, squad=()):
    start = set(cells) | set(squad)
    runner = Runner(Configuration(start))
    runner.squad = list(squad)
    tree = build_cluster_tree(cluster, terminals)
    rep = lower_cluster(runner, tree)
    return start, runner, tree, rep


# ------------------------------------------------------------------ trees

def test_single_terminal_tree():
    t = build_cluster_tree({(0, 0, 0), (1, 0, 0)}, {(1, 0, 0)})
    assert t.nodes == {(1, 0, 0)} and t.root == (1, 0, 0) and t.post_order == [(1, 0, 0)]


def test_path_cluster_is_its_own_tree():
    path = {(x, 0, 3) for x in range(5)}
    t = build_cluster_tree(path, path)
    assert t.nodes == path and t.root == (0, 0, 3)
    assert t.post_order == [(4, 0, 3), (3, 0, 3), (2, 0, 3), (1, 0, 3), (0, 0, 3)]
    assert t.leaves() == [(4, 0, 3)]


def test_corridor_cells_become_steiner_nodes():
    blobs = {(0, 0, 0), (0, 1, 0), (4, 0, 0), (4, 1, 0)}
    corridor = {(x, 0, 0) for x in range(1, 4)}
    t = build_cluster_tree(blobs | corridor | {(2, 1, 0)}, {(0, 1, 0), (4, 1, 0)})
    assert corridor <= t.nodes and (2, 1, 0) not in t.nodes


def test_terminals_outside_cluster_rejected():
    with pytest.raises(ValueError):
        build_cluster_tree({(0, 0, 0)}, {(1, 0, 0)})


def _grid_clusters():
    # connected planar clusters of up to 9 cells inside a 3x3 window
    cells = [(x, y, 0) for x in range(3) for y in range(3)]
    return st.sets(st.sampled_from(cells), min_size=2, max_size=9).filter(is_connected)


def _min_steiner_size(cluster, terminals):
    others = sorted(set(cluster) - set(terminals))
    for extra in range(len(others) + 1):
        for add in itertools.combinations(others, extra):
            if is_connected(set(terminals) | set(add)):
                return len(terminals) + extra
    raise AssertionError("unreachable")


@given(_grid_clusters(), st.data())
def test_tree_is_within_twice_the_optimum(cluster, data):
    terminals = data.draw(st.sets(st.sampled_from(sorted(cluster)), min_size=1))
    t = build_cluster_tree(cluster, terminals)
    assert set(terminals) <= t.nodes <= set(cluster)
    assert is_connected(t.nodes)
    assert len(t.parent) == len(t.nodes) and sorted(t.post_order) == sorted(t.nodes)
    assert max(t.degree(c) for c in t.nodes) <= 4
    assert len(t.nodes) <= 2 * _min_steiner_size(cluster, terminals)
    # children come before parents
    pos = {c: i for i, c in enumerate(t.post_order)}
    assert all(p is None or pos[c] < pos[p] for c, p in t.parent.items())


# ------------------------------------------------------------------ lowering

def test_overhang_drops_without_the_squad():
    start, runner, _, rep = _lower({(0, 0, 0), (1, 0, 0), (1, 0, 1), (2, 0, 1)},
                                   {(1, 0, 1), (2, 0, 1)}, {(2, 0, 1)})
    assert rep.lowered == [(2, 0, 0)] and rep.moves <= 4
    assert set(runner.trace.actor_counts()) == {"payload"}
    assert verify_trace(start, runner.trace).ok


def test_corridor_of_five_within_budget():
    terminals = {(x, 0, 1) for x in range(1, 6)}
    start, runner, _, rep = _lower({(0, 0, 0)} | CORRIDOR, CORRIDOR, terminals, SQUAD)
    assert sorted(rep.lowered) == [(x, 0, 0) for x in range(1, 6)]
    assert rep.moves <= 17 * 5 + 13 * rep.s
    assert rep.moves <= SLACK * lowering_bound(rep.ell, rep.s)
    assert set(runner.trace.phase_counts()) == {"lower"}
    rep_v = verify_trace(start, runner.trace)
    assert rep_v.ok


def test_occupied_below_makes_a_straggler():
    cells = {(0, 0, 0), (1, 0, 0), (0, 0, 1), (1, 0, 1)}
    start, runner, _, rep = _lower(cells, {(0, 0, 1), (1, 0, 1)}, {(1, 0, 1)})
    assert rep.stragglers == [(1, 0, 1)] and rep.moves == 0 and not rep.lowered


@pytest.mark.parametrize("seed", range(6))
def test_random_overhangs_within_budget(seed):
    # a plank at z=1 resting on a few pillars, squad parked on top
    rng = random.Random(seed)
    plank = {(x, y, 1) for x in range(5) for y in range(2)}
    pillars = {(0, 0, 0)} | {(x, y, 0) for x, y in itertools.product(range(5), range(2)) if rng.random() < 0.3}
    terminals = {c for c in plank if (c[0], c[1], 0) not in pillars}
    if not terminals:
        return
    squad = [(x, y, 2) for x in range(3) for y in range(2)]
    start, runner, _, rep = _lower(pillars | plank, plank, terminals, squad)
    assert verify_trace(start, runner.trace).ok
    assert rep.moves <= SLACK * lowering_bound(rep.ell, rep.s)
    assert is_connected(runner.config.cells)


# ------------------------------------------------------------------ stragglers

def test_no_stragglers_means_no_moves():
    runner = Runner(Configuration({(0, 0, 0), (0, 0, 1)}))
    t = build_cluster_tree({(0, 0, 1)}, {(0, 0, 1)})
    assert relocate_stragglers_along_tree(runner, t, []) == {}
    assert len(runner.trace) == 0


def test_root_straggler_walks_to_far_leaf():
    # path tree rooted at the pillar end; the leaf end has nothing below it
    cells = {(0, 0, 0), (1, 0, 0)} | {(x, 0, 1) for x in range(4)}
    t = build_cluster_tree({(x, 0, 1) for x in range(4)}, {(0, 0, 1), (3, 0, 1)})
    runner = Runner(Configuration(cells))
    moved = relocate_stragglers_along_tree(runner, t, [(0, 0, 1)])
    assert moved == {(0, 0, 1): (3, 0, 0)}
    assert verify_trace(cells, runner.trace).ok


def test_leaf_assignment_uses_disjoint_paths():
    # a plus-shaped tree: centre with four arms of length two
    arms = [(d[0] * k, d[1] * k, 0) for d in ((1, 0), (-1, 0), (0, 1), (0, -1)) for k in (1, 2)]
    nodes = {(0, 0, 0)} | set(arms)
    t = build_cluster_tree(nodes, nodes)
    leaves = t.leaves()
    assert len(leaves) == 3  # the root sits at the end of one arm
    stragglers = [(0, 0, 0), (1, 0, 0)]
    match = assign_stragglers_to_leaves(t, stragglers, leaves)
    paths = [set(tree_path(t, s, l)) for s, l in match.items()]
    assert len(match) >= 1
    for a, b in itertools.combinations(paths, 2):
        assert not (a & b)
