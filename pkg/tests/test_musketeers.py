import pytest
from hypothesis import given

from conftest import polycubes
from slidingcubes.compactify import compactify
from slidingcubes.harness.accounting import SLACK, MoveAccounting, harvest_bound, musketeer_bound
from slidingcubes.harness.generate import InstanceSpec, generate
from slidingcubes.lattice import Configuration, build_slice_graph, is_connected
from slidingcubes.moves import Trace, verify_trace
from slidingcubes.musketeers import (
    SQUAD_SIZE, HarvestStall, TransitError, advance_formation, block_cells, harvest_musketeers, park_slots,
    staging_block, transit_musketeers,
)
from slidingcubes.paths import bounded_walk, plan_walk, reachable_cells, window_box
from slidingcubes.state import Runner


def box(a, b, c):
    return {(x, y, z) for x in range(a) for y in range(b) for z in range(c)}


def _harvest(cells):
    start = set(cells)
    runner = Runner(Configuration(cells))
    squad = harvest_musketeers(runner)
    return start, runner, squad


# ------------------------------------------------------------------ walks

def test_plan_walk_on_a_flat_floor():
    floor = box(4, 1, 1) | {(0, 0, 1)}
    plan = plan_walk(Configuration(floor), (0, 0, 1), [(3, 0, 1)])
    assert [mv.dst for mv in plan] == [(1, 0, 1), (2, 0, 1), (3, 0, 1)]


def test_plan_walk_trivial_and_impossible():
    c = Configuration({(0, 0, 0), (1, 0, 0), (2, 0, 0)})
    assert plan_walk(c, (2, 0, 0), [(2, 0, 0)]) == []
    assert plan_walk(c, (1, 0, 0), [(1, 1, 0)]) is None  # articulate walker
    assert plan_walk(c, (2, 0, 0), [(0, 0, 0)]) is None  # occupied goal


def test_walk_respects_box():
    floor = box(4, 1, 1) | {(0, 0, 1)}
    b = window_box((0, 0, 0), (3, 0, 1))
    plan = plan_walk(Configuration(floor), (0, 0, 1), [(3, 0, 1)], b)
    assert all(b.admits(mv.dst) for mv in plan)


def test_bounded_walk_limits_length():
    floor = box(5, 1, 1) | {(0, 0, 1)}
    c = Configuration(floor)
    assert bounded_walk(c, (0, 0, 1), lambda x: x == (4, 0, 1), 3) is None
    assert len(bounded_walk(c, (0, 0, 1), lambda x: x == (4, 0, 1), 4)) == 4


@given(polycubes(min_n=3, max_n=12, side=4))
def test_planned_walks_replay(cells):
    config = Configuration(cells)
    movable = [c for c in sorted(cells) if is_connected(set(cells) - {c})]
    src = movable[-1]
    reach = reachable_cells(config, src) - {src}
    if not reach:
        return
    goal = min(reach)
    plan = plan_walk(config, src, [goal])
    assert plan is not None
    end = set(cells) - {src} | {goal}
    assert verify_trace(cells, Trace(plan), expected_final=end, check_window=False).ok


def test_runner_undo_restores_state():
    runner = Runner(Configuration(box(4, 1, 1) | {(0, 0, 1)}))
    before = runner.config.cells
    mark = runner.mark()
    assert runner.walk((0, 0, 1), [(3, 0, 1)], "fix")
    assert runner.config.cells != before
    runner.undo(mark)
    assert runner.config.cells == before and len(runner.trace) == 0


# ------------------------------------------------------------------ harvesting

def test_block_cells_shape():
    assert sorted(block_cells((0, 0, 5), 0)) == sorted((x, y, 5) for x in range(3) for y in range(2))
    assert sorted(block_cells((0, 0, 5), 1)) == sorted((x, y, 5) for x in range(2) for y in range(3))


def test_staging_block_rests_on_top():
    runner = Runner(Configuration(box(4, 4, 2)))
    slots, anchor = staging_block(runner)
    assert anchor == (0, 0, 1)
    assert len(slots) == 6 and all(c[2] == 2 for c in slots)
    assert all((c[0], c[1], 1) in runner.config for c in slots)


@pytest.mark.parametrize("cells", [box(4, 4, 4), box(8, 8, 1), {(0, 0, z) for z in range(7)}],
                         ids=["cube4", "plate8", "tower7"])
def test_harvest_gathers_six(cells):
    start, runner, squad = _harvest(cells)
    assert len(squad) == SQUAD_SIZE and set(squad.members) == set(runner.squad)
    assert len(runner.config) == len(start)
    assert is_connected(runner.payload_cells())
    assert is_connected(set(squad.members))
    assert verify_trace(start, runner.trace).ok
    assert set(runner.trace.phase_counts()) == {"harvest"}
    assert len(runner.trace) <= SLACK * harvest_bound(len(start)) + 500


def test_harvest_needs_seven_modules():
    with pytest.raises(HarvestStall):
        _harvest(box(2, 3, 1))


def test_harvest_face_visits_stay_bounded():
    _, runner, _ = _harvest(box(4, 4, 4))
    assert runner.visits.max_visits() <= SLACK * 4 * SQUAD_SIZE


# ------------------------------------------------------------------ formation and transit

def _corridor_runner():
    floor = box(10, 2, 1)
    squad = [(x, y, 1) for x in range(3) for y in range(2)]
    runner = Runner(Configuration(floor | set(squad)), inner=((0, 0, 0), (9, 1, 2)))
    runner.squad = list(squad)
    return runner


def test_advance_one_step_along_straight_corridor():
    runner = _corridor_runner()
    tr = advance_formation(runner, [(x, y, 1) for x in range(1, 4) for y in range(2)])
    assert len(tr) == 6
    assert sorted(runner.squad) == sorted((x, y, 1) for x in range(1, 4) for y in range(2))
    assert set(tr.actor_counts()) == {"musketeer"}


def test_advance_in_place_is_free():
    runner = _corridor_runner()
    assert len(advance_formation(runner, list(runner.squad))) == 0


def test_advance_into_unreachable_cell_raises():
    runner = _corridor_runner()
    with pytest.raises(TransitError):
        advance_formation(runner, [(50, 50, 50)])


def test_transit_to_current_cluster_is_empty():
    runner = _corridor_runner()
    floor = box(3, 2, 1)
    assert park_slots(runner, floor) == sorted(runner.squad)
    assert len(transit_musketeers(runner, floor)) == 0


def test_transit_moves_squad_over_target_cluster():
    runner = _corridor_runner()
    target = {(x, y, 0) for x in range(7, 10) for y in range(2)}
    tr = transit_musketeers(runner, target)
    assert sorted(runner.squad) == sorted((x, y, 1) for x in range(7, 10) for y in range(2))
    assert verify_trace(_corridor_runner().config.cells, tr).ok
    assert len(tr) <= SLACK * musketeer_bound(len(runner.config))


def test_squad_moves_within_budget_on_a_tree():
    cells = generate(InstanceSpec("random_tree_polycube", 60, None, 1))
    res = compactify(cells)
    acc = MoveAccounting.for_trace(cells, res.trace)
    assert acc.musketeers_within_budget()


def test_park_slots_over_highest_cluster():
    cells = box(3, 3, 1) | {(0, 0, 1)}
    runner = Runner(Configuration(cells))
    g = build_slice_graph(cells)
    top = [i for i in range(len(g)) if g.level(i) == 1][0]
    slots = park_slots(runner, g.cells(top))
    assert slots[0] == (0, 0, 2) and len(slots) == 6
    assert all(c not in runner.config for c in slots)
