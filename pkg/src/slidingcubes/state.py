"""Mutable run state shared by the compaction phases: configuration, trace, window."""
from __future__ import annotations

from dataclasses import dataclass, field

from .lattice import Configuration
from .moves import MAX_OUTSIDE, InvalidMove, Move, Trace, validate_move
from .paths import DEFAULT_NODE_CAP, Box, FaceVisits, plan_walk, window_box


class Occupancy:
    """Set-like view of a configuration with some cells hidden (the squad)."""

    def __init__(self, config, hidden=()):
        self.config = config
        self.hidden = set(hidden)

    def __contains__(self, c) -> bool:
        return c not in self.hidden and c in self.config

    def __iter__(self):
        return (c for c in self.config if c not in self.hidden)

    def __len__(self) -> int:
        return sum(1 for _ in self)


@dataclass
class Runner:
    """Applies validated moves to one configuration and records them.

    ``squad`` holds the cells currently playing the helper role; it follows
    its members as they move.  ``inner`` is the box modules should stay in,
    walkers may step one cell beyond it while few others are out there.
    """
    config: Configuration
    trace: Trace = field(default_factory=Trace)
    inner: tuple | None = None
    squad: list = field(default_factory=list)
    strict: bool = True
    node_cap: int = DEFAULT_NODE_CAP
    visits: FaceVisits = field(default_factory=FaceVisits)

    def __post_init__(self):
        if not self.trace.initial_hash:
            self.trace.initial_hash = self.config.digest()
        if self.inner is None and len(self.config):
            self.inner = self.config.bbox()
        self.outside = sum(1 for c in self.config if self._is_outside(c))

    def _is_outside(self, c) -> bool:
        if self.inner is None:
            return False
        lo, hi = self.inner
        return any(c[i] < lo[i] or c[i] > hi[i] for i in range(3))

    # --------------------------------------------------------------- moves

    def apply(self, mv: Move, assume_backbone: bool = False):
        if self.strict:
            v = validate_move(self.config, mv, assume_backbone)
            if v is not None:
                raise InvalidMove(mv, v, len(self.trace))
        self.config.move(mv.src, mv.dst)
        self.outside += self._is_outside(mv.dst) - self._is_outside(mv.src)
        self.trace.append(mv)
        if mv.src in self.squad:
            self.squad[self.squad.index(mv.src)] = mv.dst

    def apply_chain(self, moves):
        """Apply a single walker's moves; only the first needs the backbone test."""
        for i, mv in enumerate(moves):
            self.apply(mv, assume_backbone=i > 0)

    def mark(self) -> int:
        return len(self.trace)

    def undo(self, mark: int):
        """Roll back every move recorded after ``mark``."""
        while len(self.trace) > mark:
            mv = self.trace.moves.pop()
            self.config.move(mv.dst, mv.src)
            self.outside += self._is_outside(mv.src) - self._is_outside(mv.dst)
            if mv.dst in self.squad:
                self.squad[self.squad.index(mv.dst)] = mv.src

    # --------------------------------------------------------------- walking

    def box_for(self, walker) -> Box | None:
        if self.inner is None:
            return None
        others = self.outside - self._is_outside(walker)
        return window_box(*self.inner, allow_outside=others < MAX_OUTSIDE)

    def walk(self, src, targets, phase: str, actor: str = "payload", avoid=frozenset(),
             node_cap: int | None = None, step_filter=None) -> bool:
        """Move the module at ``src`` to one of ``targets``; False if no route."""
        plan = plan_walk(
            self.config, src, targets, self.box_for(src), avoid,
            node_cap or self.node_cap, step_filter, True, phase, actor,
        )
        if plan is None:
            return False
        self.apply_chain(plan)
        if actor == "musketeer":
            raw = self.config.raw()
            for mv in plan[:-1]:
                self.visits.record(raw, mv.dst, exclude=None)
        return True

    def payload(self) -> Occupancy:
        return Occupancy(self.config, self.squad)

    def payload_cells(self) -> set:
        squad = set(self.squad)
        return {c for c in self.config.cells if c not in squad}
