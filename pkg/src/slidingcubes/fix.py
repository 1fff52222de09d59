"""Resolving stragglers: push toward the origin, escape sideways, or tunnel."""
from __future__ import annotations

from dataclasses import dataclass, field

from .lattice import compact_check, l1, l1_dist, quasi_compact_check
from .moves import SLIDE, InvalidMove, Move, enumerate_moves
from .paths import bounded_walk
from .state import Runner

MONOTONE = "monotone"
ESCAPE = "boundary_escape"
TUNNEL = "tunnel"
COLUMN_SHIFT = "column_shift"
SHORT_WALK = "short_walk"
NOOP = "noop"


class FixError(RuntimeError):
    """Fix was asked to handle a module it cannot (precondition failure)."""


@dataclass
class FixPlan:
    straggler: tuple
    target: tuple | None = None
    mode: str = NOOP
    chain: list = field(default_factory=list)
    final: tuple | None = None
    queries: int = 0

    @property
    def n_moves(self) -> int:
        return len(self.chain)

    def bound(self) -> int | None:
        """The move budget ``|m - p|_1 + 2`` for the chosen target."""
        if self.target is None:
            return None
        return l1_dist(self.straggler, self.target) + 2


@dataclass
class SearchCount:
    queries: int = 0


def square_region(m):
    for i in range(m[0] + 1):
        for j in range(m[1] + 1):
            yield (m[0] - i, m[1] - j, m[2])


def square_region_full(occ, m) -> bool:
    return all(c in occ for c in square_region(m))


def _layer_cluster(occ, m) -> set:
    comp = {m}
    todo = [m]
    while todo:
        c = todo.pop()
        x, y, z = c
        for nb in ((x + 1, y, z), (x - 1, y, z), (x, y + 1, z), (x, y - 1, z)):
            if nb not in comp and nb in occ:
                comp.add(nb)
                todo.append(nb)
    return comp


def is_fixable(occ, m, memo=None) -> bool:
    """Every same-cluster module in the square below-left of m (m excluded) is quasi-compact."""
    if memo is None:
        memo = {}
    cluster = _layer_cluster(occ, m)
    for c in square_region(m):
        if c == m or c not in cluster:
            continue
        if not quasi_compact_check(occ, c, 2, memo):
            return False
    return True


def find_target_p(occ, m, count: SearchCount | None = None):
    """Closest empty dominated cell in column (x-1, y, .) or (x, y-1, .).

    The two columns are searched alternately level by level, x-column first,
    so the search stops at the first (closest) hit.  Returns None when both
    columns are full.
    """
    if count is None:
        count = SearchCount()
    x, y, z = m
    cols = []
    if x > 0:
        cols.append((x - 1, y))
    if y > 0:
        cols.append((x, y - 1))
    for h in range(z - 1, -1, -1):
        for cx, cy in cols:
            count.queries += 1
            if (cx, cy, h) not in occ:
                return (cx, cy, h)
    return None


def _monotone_moves(config, m):
    out = []
    for mv in enumerate_moves(config, m):
        d = mv.dst
        if min(d) < 0:
            continue
        if all(d[i] <= m[i] for i in range(3)):
            out.append(mv)
    # prefer going down, then larger drop toward the origin
    out.sort(key=lambda mv: (mv.dst[2], l1(mv.dst), mv.dst))
    return out


def fix(runner: Runner, m, phase: str = "fix", check_fixable: bool = True) -> FixPlan:
    """Resolve the straggler at ``m``.

    Afterwards the module has a smaller z or is quasi-compact (with respect to
    the non-squad modules).  On failure the state is rolled back and FixError
    is raised.
    """
    occ = runner.payload()
    if m not in occ:
        raise FixError(f"{m} is not a payload module")
    plan = FixPlan(m)
    if quasi_compact_check(occ, m):
        plan.final = m
        return plan
    if check_fixable and not is_fixable(occ, m):
        raise FixError(f"{m} is not fixable")
    mark = runner.mark()
    try:
        _fix_inner(runner, m, plan, phase)
    except FixError:
        runner.undo(mark)
        raise
    plan.chain = runner.trace.moves[mark:]
    final = plan.final
    if not (final[2] < m[2] or quasi_compact_check(runner.payload(), final)):
        runner.undo(mark)
        raise FixError(f"fix of {m} ended at {final} without progress")
    return plan


def _fix_inner(runner: Runner, m, plan: FixPlan, phase: str):
    cur = m
    z0 = m[2]
    while True:
        cands = _monotone_moves(runner.config, cur)
        if not cands:
            break
        mv = cands[0].tagged(phase, "payload")
        runner.apply(mv)
        plan.mode = MONOTONE
        cur = mv.dst
        if cur[2] < z0 or quasi_compact_check(runner.payload(), cur):
            plan.final = cur
            plan.target = cur
            return
    occ = runner.payload()
    memo: dict = {}
    if cur[0] == 0 or cur[1] == 0:
        if compact_check(occ, cur, memo):
            raise FixError(f"{cur} is compact but not quasi-compact")
        targets = _escape_targets(runner, cur, memo)
        bound = cur

        def inside(a, b):
            return b[0] <= bound[0] and b[1] <= bound[1] and b[2] <= bound[2]

        if not targets or not runner.walk(cur, targets, phase, "payload", step_filter=inside):
            raise FixError(f"no escape route from {cur}")
        plan.mode = ESCAPE
        plan.final = runner.trace.moves[-1].dst
        plan.target = plan.final
        return
    tunnel(runner, cur, plan, phase)


def _escape_targets(runner, m, memo):
    occ = runner.payload()
    out = set()
    for x in range(m[0] + 1):
        for y in range(m[1] + 1):
            for z in range(m[2] + 1):
                c = (x, y, z)
                if c == m or c in runner.config:
                    continue
                if z < m[2]:
                    out.add(c)
                    continue
                ok = True
                for i in range(3):
                    if c[i] > 0:
                        low = (c[0] - (i == 0), c[1] - (i == 1), c[2] - (i == 2))
                        if low == m or not compact_check(occ, low, memo):
                            ok = False
                            break
                if ok:
                    out.add(c)
    return out


def tunnel(runner: Runner, m, plan: FixPlan | None = None, phase: str = "fix") -> FixPlan:
    """Fill the closest dominated hole beside m by a chain of slides, vacating m.

    First choice, exactly ``|m - p|_1 + 2`` moves: q -> p, the column above q
    slides down, then the module beside m steps diagonally back and m takes
    its place.  When that chain would cut off modules resting on top of the
    q column, p's own column slides down one step instead and m follows
    (``|m - p|_1`` moves).
    """
    if plan is None:
        plan = FixPlan(m)
    occ = runner.payload()
    x, y, z = m
    for c in ((x - 1, y, z), (x, y - 1, z), (x - 1, y - 1, z)):
        if c not in occ:
            raise FixError(f"tunnel needs {c} occupied")
    count = SearchCount()
    p = find_target_p(occ, m, count)
    plan.queries = count.queries
    if p is None:
        raise FixError(f"no dominated hole beside {m}")
    if p[0] == x - 1:
        q = (p[0], p[1] - 1, p[2])
    else:
        q = (p[0] - 1, p[1], p[2])
    side = (p[0], p[1], z)
    chain = [Move(SLIDE, q, p)]
    for i in range(1, z - q[2] + 1):
        chain.append(Move(SLIDE, (q[0], q[1], q[2] + i), (q[0], q[1], q[2] + i - 1)))
    chain.append(Move(SLIDE, side, (x - 1, y - 1, z)))
    chain.append(Move(SLIDE, m, side))
    shift = [Move(SLIDE, (p[0], p[1], h + 1), (p[0], p[1], h)) for h in range(p[2], z)]
    shift.append(Move(SLIDE, m, side))
    last = None
    for variant, moves in ((TUNNEL, chain), (COLUMN_SHIFT, shift)):
        mark = runner.mark()
        try:
            for mv in moves:
                runner.apply(mv.tagged(phase, "payload"))
        except InvalidMove as exc:
            runner.undo(mark)
            last = exc
            continue
        plan.mode = variant
        plan.target = p
        plan.final = side
        return plan
    walk = _short_walk(runner, m, l1_dist(m, p) + 2, phase)
    if walk is None:
        raise FixError(f"tunnel step failed: {last}")
    runner.apply_chain(walk)
    plan.mode = SHORT_WALK
    plan.target = p
    plan.final = walk[-1].dst
    return plan


def _short_walk(runner: Runner, m, max_len: int, phase: str):
    rest = runner.payload_cells() - {m}
    memo: dict = {}

    def goal(c):
        if min(c) < 0:
            return False
        if c[2] < m[2]:
            return True
        # m would be quasi-compact here: lower x and y neighbours compact
        return all(c[i] == 0 or compact_check(rest, (c[0] - (i == 0), c[1] - (i == 1), c[2]), memo)
                   for i in (0, 1))

    return bounded_walk(runner.config, m, goal, max_len, runner.box_for(m), phase, "payload")


def fix_trace(config, m, **kw):
    """Run fix on a private runner over ``config`` (mutated) and return its trace."""
    runner = Runner(config)
    fix(runner, m, **kw)
    return runner.trace


def planar_fix(runner: Runner, m, phase: str = "planar") -> FixPlan:
    """In-plane straggler: walk it to a dominated empty cell of slice z=0.

    The walk may use the planes z=1 and z=-1 and never increases x or y.
    """
    occ = runner.payload()
    plan = FixPlan(m)
    if quasi_compact_check(occ, m, 1):
        plan.final = m
        return plan
    memo: dict = {}
    targets = set()
    for x in range(m[0] + 1):
        for y in range(m[1] + 1):
            c = (x, y, 0)
            if c == m or c in runner.config:
                continue
            if y < m[1]:
                targets.add(c)
                continue
            if x == 0 or compact_check(occ, (x - 1, y, 0), memo):
                targets.add(c)

    def inside(a, b):
        return b[0] <= m[0] and b[1] <= m[1] and -1 <= b[2] <= 1

    mark = runner.mark()
    if not targets or not runner.walk(m, targets, phase, "payload", step_filter=inside):
        raise FixError(f"no in-plane route for {m}")
    plan.chain = runner.trace.moves[mark:]
    plan.mode = ESCAPE
    plan.final = plan.target = plan.chain[-1].dst
    return plan
