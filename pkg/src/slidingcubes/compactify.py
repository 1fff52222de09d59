"""Turning an arbitrary connected configuration into a compact one."""
from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field

from .fix import FixError, fix, is_fixable, planar_fix
from .lattice import (
    Configuration, ConfigurationError, OpCounter, build_slice_graph, compact_check,
    compactness_flags, is_compact_configuration, is_connected, l1, quasi_compact_check,
)
from .lattice import is_removable
from .lowering import build_cluster_tree, lower_cluster
from .paths import reachable_cells
from .moves import SLIDE, Move, Trace, validate_move
from .musketeers import (
    SQUAD_SIZE, HarvestStall, harvest_musketeers, park_slots, transit_musketeers,
)
from .state import Runner

log = logging.getLogger(__name__)

STATS_HEADER = "iter,cluster_z,terminals,tree,lowered,stragglers,moves_by_phase"


class CompactifyStall(RuntimeError):
    """No rule applies although the configuration is not yet compact."""


@dataclass
class IterationStats:
    iteration: int
    cluster_z: int
    terminals: int
    tree: int
    lowered: int
    stragglers: int
    moves_by_phase: Counter

    def csv(self) -> str:
        phases = ";".join(f"{k}={v}" for k, v in sorted(self.moves_by_phase.items()))
        return f"{self.iteration},{self.cluster_z},{self.terminals},{self.tree},{self.lowered},{self.stragglers},{phases}"


@dataclass
class CompactifyResult:
    config: Configuration
    trace: Trace
    stats: list = field(default_factory=list)
    fallback_steps: int = 0
    fix_failures: int = 0
    harvested: bool = False
    visits: object = None

    @property
    def moves(self) -> int:
        return len(self.trace)

    def stats_text(self) -> str:
        return "\n".join([STATS_HEADER] + [s.csv() for s in self.stats]) + "\n"


# ----------------------------------------------------------------- predicates

def _step(c, axis, sign=-1):
    return tuple(c[i] + (sign if i == axis else 0) for i in range(3))


def non_quasi_compact(occ, axis: int = 2, restrict=None, memo=None) -> set:
    """Modules off the bottom level (along ``axis``) that are not quasi-compact."""
    if memo is None:
        memo = {}
    out = set()
    for c in occ:
        if c[axis] <= 0 or (restrict is not None and not restrict(c)):
            continue
        if not quasi_compact_check(occ, c, axis, memo):
            out.add(c)
    return out


def is_extremal(graph, i, occ, nonqc, axis: int = 2, memo=None) -> bool:
    cells = graph.cells(i)
    if not any(c in nonqc for c in cells):
        return False
    for c in cells:
        up = _step(c, axis, 1)
        if up in graph.cluster_of and up in nonqc:
            return False
    return True


def select_extremal(graph, occ, nonqc, start=None, axis: int = 2):
    """First extremal cluster met by a DFS from ``start`` that climbs first."""
    if len(graph) == 0:
        return None
    adj = graph.adjacency()
    if start is None:
        start = max(range(len(graph)), key=lambda i: (graph.level(i), tuple(-v for v in min(graph.cells(i)))))
    seen = {start}
    stack = [start]
    while stack:
        i = stack.pop()
        if is_extremal(graph, i, occ, nonqc, axis):
            return i
        lvl = graph.level(i)
        nbs = [j for j in adj[i] if j not in seen]
        # pushed last = visited first: upward links, then smallest cell
        nbs.sort(key=lambda j: (graph.level(j) > lvl, tuple(-v for v in min(graph.cells(j)))))
        for j in nbs:
            seen.add(j)
            stack.append(j)
    cands = [i for i in range(len(graph)) if is_extremal(graph, i, occ, nonqc, axis)]
    if not cands:
        return None
    return max(cands, key=lambda i: (graph.level(i), tuple(-v for v in min(graph.cells(i)))))


# ---------------------------------------------------------------- simple passes

def slide_down_pass(runner: Runner, axis: int = 2, restrict=None, phase: str = "slide_down") -> Trace:
    """Slide every module whose cell below (along ``axis``) is empty down, top first."""
    start = runner.mark()
    changed = True
    while changed:
        changed = False
        occ = runner.payload()
        cells = [c for c in occ if c[axis] > 0 and (restrict is None or restrict(c))]
        other = [i for i in range(3) if i != axis]
        cells.sort(key=lambda c: (-c[axis], -(c[other[0]] + c[other[1]]), c))
        for c in cells:
            cur = c
            while cur[axis] > 0:
                below = _step(cur, axis)
                if below in runner.config:
                    break
                mv = Move(SLIDE, cur, below, phase=phase, actor="payload")
                if validate_move(runner.config, mv) is not None:
                    break
                runner.apply(mv, assume_backbone=True)
                cur = below
                changed = True
    return Trace(runner.trace.moves[start:])


def addable_cells(occ, inner=None, memo=None, hidden=()) -> set:
    """Empty cells whose every strictly dominated cell is occupied."""
    if memo is None:
        memo = {}
    cells = set(occ)
    flags = compactness_flags(cells)
    out = set()
    if (0, 0, 0) not in cells:
        out.add((0, 0, 0))
    for c, ok in flags.items():
        if not ok:
            continue
        for i in range(3):
            t = _step(c, i, 1)
            if t in cells or t in out:
                continue
            good = True
            for j in range(3):
                if t[j] > 0:
                    low = _step(t, j)
                    if not flags.get(low, False):
                        good = False
                        break
            if good:
                out.add(t)
    if inner is not None:
        lo, hi = inner
        out = {t for t in out if all(0 <= t[i] <= hi[i] for i in range(3))}
    return {t for t in out if t not in hidden}


def relocate_step(runner: Runner, phase: str = "fix", limit: int = 24) -> bool:
    """Move one module to an addable cell of smaller coordinate sum.

    The fallback that guarantees progress: the payload coordinate sum drops
    strictly with every successful call.
    """
    occ = runner.payload()
    cells = set(occ)
    flags = compactness_flags(cells)
    targets = addable_cells(cells, runner.inner, hidden=set(runner.squad))
    tmin = min((l1(t) for t in targets), default=0)
    loose = sorted((c for c in cells if not flags[c] and l1(c) > tmin), key=lambda c: (-l1(c), c))
    tops = sorted(
        (c for c in cells if flags[c] and l1(c) > tmin + 1
         and all(_step(c, i, 1) not in cells for i in range(3))),
        key=lambda c: (-l1(c), c),
    )
    squad = sorted(runner.squad, key=lambda c: (-l1(c), c))
    tried = 0
    for m in squad + loose + tops:
        if tried >= limit:
            break
        if not is_removable(runner.config, m):
            continue
        tried += 1
        reach = reachable_cells(runner.config, m, runner.box_for(m))
        reach.discard(m)
        goal = [t for t in reach if t in targets and l1(t) < l1(m) and all(_step(t, i) != m for i in range(3))]
        if not goal:
            # no addable cell in reach: settle for the lowest reachable cell
            goal = [t for t in reach if min(t) >= 0 and l1(t) < l1(m)]
            if not goal:
                continue
            best = min(l1(t) for t in goal)
            goal = [t for t in goal if l1(t) == best]
        else:
            best = min(l1(t) for t in goal)
            goal = [t for t in goal if l1(t) == best]
        if runner.walk(m, sorted(goal)[:24], phase, "payload"):
            dst = runner.trace.moves[-1].dst
            if dst in runner.squad:
                runner.squad.remove(dst)
            return True
    return False


def walk_down(runner: Runner, m, phase: str = "fix") -> bool:
    """Last resort for a straggler: walk it to a dominated empty cell.

    Accepted targets keep the fix contract: a lower level, or a cell whose
    strictly dominated cells are all occupied.
    """
    occ = runner.payload()
    memo: dict = {}
    raw = runner.config.raw()
    targets = set()
    for x in range(m[0] + 1):
        for y in range(m[1] + 1):
            for z in range(m[2] + 1):
                c = (x, y, z)
                if c == m or c in raw:
                    continue
                if z < m[2]:
                    targets.add(c)
                elif all(c[i] == 0 or (_step(c, i) != m and compact_check(occ, _step(c, i), memo))
                         for i in range(3)):
                    targets.add(c)
    if not targets:
        return False
    near = sorted(targets, key=lambda t: (l1(m) - l1(t), t))[:24]
    return runner.walk(m, near, phase, "payload") or runner.walk(m, targets, phase, "payload")


def retire_squad(runner: Runner, phase: str = "c2c") -> int:
    """Drop squad members into the smallest addable cells; returns how many stuck."""
    stuck = 0
    for m in sorted(runner.squad, key=lambda c: (-l1(c), c)):
        others = set(runner.squad) - {m}
        occ = {c for c in runner.config.raw() if c not in others and c != m}
        targets = addable_cells(occ, runner.inner)
        targets.discard(m)
        targets = {t for t in targets if t not in runner.config.raw()}
        ranked = sorted(targets, key=lambda t: (l1(t), t))
        ok = False
        for chunk in (ranked[:4], ranked):
            if chunk and runner.walk(m, chunk, phase, "payload"):
                ok = True
                break
        if ok:
            runner.squad.remove(runner.trace.moves[-1].dst)
        elif m in runner.squad and compact_check(set(runner.config.raw()) - others, m):
            runner.squad.remove(m)
        else:
            stuck += 1
    return stuck


# ------------------------------------------------------------------ main loop

def _melt(runner: Runner, result: CompactifyResult, axis: int, restrict, phase_lower: str,
          max_iterations: int):
    seen = set()
    it = 0
    while it < max_iterations:
        occ = runner.payload()
        memo: dict = {}
        nonqc = non_quasi_compact(occ, axis, restrict, memo)
        if not nonqc:
            return True
        key = (frozenset(occ), frozenset(runner.squad))
        if key in seen:
            if relocate_step(runner):
                result.fallback_steps += 1
                it += 1
                continue
            return False
        seen.add(key)
        cells = [c for c in occ if restrict is None or restrict(c)]
        graph = build_slice_graph(cells, axis=axis)
        start = None
        for m in runner.squad:
            below = _step(m, axis)
            if below in graph.cluster_of:
                start = graph.cluster_of[below]
                break
        s = select_extremal(graph, occ, nonqc, start, axis)
        if s is None:
            return False
        cluster = graph.cells(s)
        level = graph.level(s)
        mark = runner.mark()
        if runner.squad:
            transit_musketeers(runner, cluster)
        terminals = [c for c in cluster if c in nonqc]
        tree = build_cluster_tree(cluster, terminals, axis, prefer=set(cluster) - set(terminals))
        rep = lower_cluster(runner, tree, phase_lower)
        _return_to_squad(runner, tree)
        stragglers = sorted(set(rep.stragglers) | set(rep.unlowered), key=lambda c: (l1(c), c))
        for m in stragglers:
            occ = runner.payload()
            if m not in occ or quasi_compact_check(occ, m, axis):
                continue
            try:
                if axis == 2:
                    if is_fixable(occ, m):
                        fix(runner, m, phase="fix", check_fixable=False)
                    elif not walk_down(runner, m):
                        result.fix_failures += 1
                else:
                    planar_fix(runner, m)
            except FixError as exc:
                log.debug("fix fell back: %s", exc)
                if not walk_down(runner, m):
                    result.fix_failures += 1
        phases = Counter(mv.phase for mv in runner.trace.moves[mark:])
        result.stats.append(IterationStats(
            len(result.stats), level, len(terminals), len(tree), rep.ell, len(stragglers), phases,
        ))
        it += 1
    return False


def _return_to_squad(runner: Runner, tree):
    """Processed modules that are free again rejoin the squad (roles swap)."""
    if len(runner.squad) >= SQUAD_SIZE:
        return
    axis = tree.axis
    for p in sorted(tree.nodes):
        if len(runner.squad) >= SQUAD_SIZE:
            break
        # the payload view changes as walkers join the squad
        if p not in runner.config or p in runner.squad or _step(p, axis) not in runner.config:
            continue
        if quasi_compact_check(runner.payload(), p, axis):
            continue
        slots = [s for s in park_slots(runner, tree.nodes) if s not in runner.config]
        if slots and runner.walk(p, slots, "lower", "musketeer"):
            dst = runner.trace.moves[-1].dst
            if dst not in runner.squad:
                runner.squad.append(dst)


def compactify(config, max_iterations: int | None = None, counter: OpCounter | None = None,
               use_squad: bool = True) -> CompactifyResult:
    """Compact ``config`` (left untouched); returns the final state and the trace."""
    work = config.copy(counter) if isinstance(config, Configuration) else Configuration(config, counter)
    if len(work) and min(min(c) for c in work.raw()) < 0:
        raise ConfigurationError("input must lie in the nonnegative orthant")
    if not is_connected(work):
        raise ConfigurationError("input is disconnected")
    result = CompactifyResult(work, Trace(initial_hash=work.digest()))
    if len(work) == 0 or is_compact_configuration(work):
        return result
    hi = work.bbox()[1]
    runner = Runner(work, result.trace, inner=((0, 0, 0), hi))
    n = len(work)
    cap = max_iterations if max_iterations is not None else 10 * n + 100
    if use_squad and n >= SQUAD_SIZE + 1:
        try:
            harvest_musketeers(runner)
            result.harvested = True
        except HarvestStall as exc:
            log.info("harvest stalled (%s); continuing without a full squad", exc)
    _melt(runner, result, 2, None, "lower", cap)
    slide_down_pass(runner)
    flat = lambda c: c[2] == 0  # noqa: E731
    _melt(runner, result, 1, flat, "planar", cap)
    slide_down_pass(runner, axis=1, restrict=flat, phase="planar")
    retire_squad(runner)
    guard = 0
    while not is_compact_configuration(work):
        if runner.squad:
            if retire_squad(runner) == 0:
                continue  # every member found a cell; re-test compactness
        if not relocate_step(runner):
            raise CompactifyStall(f"stuck after {len(result.trace)} moves")
        result.fallback_steps += 1
        guard += 1
        if guard > 50 * n + 1000:
            raise CompactifyStall("fallback did not converge")
    result.visits = runner.visits
    return result
