"""Acceptance gate: one test per criterion, each recording a PASS/FAIL line.

The lines are printed in a summary section at the end of the run (see conftest).
"""
import random
import time

import pytest

from conftest import ACCEPTANCE_LINES
from slidingcubes.compactify import compactify
from slidingcubes.fix import TUNNEL, fix, is_fixable
from slidingcubes.harness.accounting import MoveAccounting
from slidingcubes.harness.generate import random_compact, random_tree_polycube, solid_cuboid
from slidingcubes.harness.oracle import check_trace_independently, connected_configurations, sample_move_agreement
from slidingcubes.lattice import (
    Configuration, OpCounter, coordinate_sum, is_compact_configuration, is_connected, l1, l1_dist,
    quasi_compact_check,
)
from slidingcubes.moves import Trace, apply_move, enumerate_moves, replay, verify_trace
from slidingcubes.reconfigure import reconfigure, reconfigure_compact
from slidingcubes.state import Runner

pytestmark = pytest.mark.slow

SIZES = (10, 30, 100, 200)
SEEDS = range(50)


def record(num, ok, detail):
    line = f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[num] = line
    print(line)


def _prefixes_connected(initial, trace):
    cells = set(initial)
    for i, mv in enumerate(trace.moves):
        cells.remove(mv.src)
        cells.add(mv.dst)
        if not is_connected(cells):
            return i
    return None


def _run(n, seed):
    c = random_tree_polycube(n, seed)
    t0 = time.perf_counter()
    res = compactify(c)
    secs = time.perf_counter() - t0
    rep = verify_trace(c, res.trace)
    acc = MoveAccounting.for_trace(c, res.trace)
    goal = random_tree_polycube(n, (seed + 1) % len(SEEDS))
    plan = reconfigure(c, goal)
    full = verify_trace(c, plan.trace(), expected_final=goal)
    return {
        "key": f"tree n={n} seed={seed}",
        "n": n,
        "seconds": secs,
        "valid": rep.failed_index is None,
        "disconnected_at": _prefixes_connected(c, res.trace),
        "compact": is_compact_configuration(rep.final),
        "moves": len(res.trace),
        "budget": acc.budget,
        "ratio": acc.ratio,
        "plan_ok": full.failed_index is None and bool(full.final_match),
        "plan_total": plan.total,
        "plan_budget": plan.budget(),
        "window": [rep.window_ok, full.window_ok],
        "max_outside": max(rep.max_outside, full.max_outside),
    }


@pytest.fixture(scope="module")
def suite():
    return [_run(n, s) for n in SIZES for s in SEEDS]


def test_criterion_1_validity(suite):
    bad = [r["key"] for r in suite if not r["valid"] or r["disconnected_at"] is not None]
    secs = sum(r["seconds"] for r in suite)
    record(1, not bad and len(suite) == 200,
           f"{len(suite)} compactify traces valid with every prefix connected; {len(bad)} failures; "
           f"compactify time {secs:.1f} s")
    assert not bad


def test_criterion_2_compactness(suite):
    bad = [r["key"] for r in suite if not r["compact"]]
    record(2, not bad, f"{len(suite) - len(bad)}/{len(suite)} outputs compact")
    assert not bad


def test_criterion_3_budgets(suite):
    over = [r["key"] for r in suite if r["moves"] > r["budget"]]
    plan_over = [r["key"] for r in suite if not r["plan_ok"] or r["plan_total"] > r["plan_budget"]]
    worst = max(suite, key=lambda r: r["ratio"])
    plan_worst = max(r["plan_total"] / r["plan_budget"] for r in suite)
    for r in suite:
        print(f"  {r['key']:22s} moves {r['moves']:6d} budget {r['budget']:7d} ratio {r['ratio']:.4f}  "
              f"reconfigure {r['plan_total']:6d}/{r['plan_budget']}")
    record(3, not over and not plan_over,
           f"compactify worst ratio {worst['ratio']:.4f} ({worst['key']}); "
           f"reconfigure worst total/budget {plan_worst:.4f}; {len(over) + len(plan_over)} over budget")
    assert not over and not plan_over


def _straggler_instance(rng):
    base = set(random_compact(rng.randint(8, 60), rng.randrange(10 ** 9)))
    ms = sorted(c for c in base if min(c) >= 1)
    if not ms:
        return None
    m = rng.choice(ms)
    col = rng.choice([(m[0] - 1, m[1]), (m[0], m[1] - 1)])
    cells = base - {(col[0], col[1], rng.randrange(m[2]))}
    if not is_connected(cells):
        return None
    return cells, m


def test_criterion_4_fix_exactness():
    rng = random.Random(4)
    runs = tunnels = 0
    bad = []
    while runs < 1000:
        inst = _straggler_instance(rng)
        if inst is None:
            continue
        cells, m = inst
        runner = Runner(Configuration(cells))
        if not is_fixable(runner.payload(), m):
            continue
        runs += 1
        plan = fix(runner, m)
        if not verify_trace(cells, runner.trace).ok:
            bad.append((sorted(cells), m, "invalid trace"))
        if plan.mode == TUNNEL:
            tunnels += 1
            if plan.n_moves > l1_dist(m, plan.target) + 2:
                bad.append((sorted(cells), m, "tunnel over bound"))
        if not (plan.final[2] < m[2] or quasi_compact_check(runner.payload(), plan.final)):
            bad.append((sorted(cells), m, "dichotomy"))
    record(4, not bad, f"{runs} fix invocations ({tunnels} tunnel); {len(bad)} violations")
    assert not bad, bad[:3]


def test_criterion_5_compact_to_compact():
    rng = random.Random(5)
    bad = []
    worst = 0.0
    for _ in range(50):
        n = rng.randint(2, 100)
        d, dp = random_compact(n, rng.randrange(10 ** 9)).cells, random_compact(n, rng.randrange(10 ** 9)).cells
        steps = []
        tr = reconfigure_compact(d, dp, steps=steps)
        bound = sum(l1(c) for c in d) + sum(l1(c) for c in dp)
        if bound:
            worst = max(worst, len(tr) / bound)
        if len(tr) > bound or not verify_trace(d, tr, expected_final=dp).ok:
            bad.append((n, "bound or validity"))
        cells, i = set(d), 0
        for s in steps:
            for mv in tr.moves[i:i + s.moves]:
                cells.remove(mv.src)
                cells.add(mv.dst)
            i += s.moves
            if not is_compact_configuration(cells):
                bad.append((n, "not compact after an iteration"))
                break
    record(5, not bad, f"50 compact pairs within sum of coordinate sums (worst ratio {worst:.3f}); {len(bad)} failures")
    assert not bad


def test_criterion_6_oracle_equivalence():
    confs = connected_configurations(3, 4)
    bad = []
    for i, a in enumerate(confs):
        b = set(confs[(i + 1) % len(confs)])
        plan = reconfigure(set(a), b)
        ok, _, final = check_trace_independently(set(a), plan.trace())
        if not ok or final != b:
            bad.append(a)
    checked, disagreements = sample_move_agreement(pairs=100_000, seed=6)
    ok = not bad and not disagreements and len(confs) == 528 and checked >= 10 ** 5
    record(6, ok, f"{len(confs)} configurations reconfigured cyclically, {len(bad)} failures; "
                  f"{checked} sampled (configuration, move) pairs, {len(disagreements)} disagreements")
    assert ok


def test_criterion_7_amortized_cost():
    ratios = {}
    for k in (4, 6, 8, 10):
        counter = OpCounter()
        cube = solid_cuboid(k, k, k)
        slab = {(i % (k * k), i // (k * k), 0) for i in range(k ** 3)}
        plan = reconfigure(cube, slab, counter=counter)
        assert verify_trace(cube.cells, plan.trace(), expected_final=slab).ok
        ratios[k ** 3] = (counter.queries + counter.updates) / plan.total
    ok = ratios[1000] <= 1.5 * ratios[64]
    record(7, ok, "ops per move " + ", ".join(f"n={n}: {r:.2f}" for n, r in ratios.items())
           + f"; n=1000 / n=64 = {ratios[1000] / ratios[64]:.3f}")
    assert ok


def test_criterion_8_in_place_window(suite):
    bad = [r["key"] for r in suite if not all(r["window"])]
    worst = max(r["max_outside"] for r in suite)
    record(8, not bad, f"{2 * len(suite)} traces inside the inflated joint box, "
                       f"at most {worst} modules outside; {len(bad)} violations")
    assert not bad


def test_criterion_9_reversibility():
    rng = random.Random(9)
    bad = 0
    total_moves = 0
    for _ in range(1000):
        start = set(random_tree_polycube(rng.randint(2, 25), rng.randrange(10 ** 9)))
        config = Configuration(start)
        tr = Trace()
        for _ in range(rng.randint(1, 40)):
            opts = [mv for m in sorted(config.cells) for mv in enumerate_moves(config, m)]
            if not opts:
                break
            mv = rng.choice(opts)
            apply_move(config, mv)
            tr.append(mv)
        total_moves += len(tr)
        back = replay(config.cells, tr.reversed())
        if back.cells != start:
            bad += 1
    record(9, bad == 0, f"1000 random traces ({total_moves} moves) reversed and replayed; {bad} mismatches")
    assert bad == 0
