"""Move budgets, per-phase tallies and the queries-per-move ratio."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from ..lattice import OpCounter, coordinate_sum
from ..moves import Trace

SLACK = 2
COMPACTIFY_EXTRA = 500
RECONFIGURE_EXTRA = 1000
MUSKETEER_EXTRA = 500


def compactify_bound(sigma: int, n: int) -> int:
    return 17 * sigma + 60 * n


def reconfigure_bound(sigma1: int, sigma2: int, n: int) -> int:
    return 18 * (sigma1 + sigma2) + 120 * n


def lowering_bound(ell: int, s: int) -> int:
    return 17 * ell + 13 * s


def harvest_bound(n: int, k: int = 6) -> int:
    return 4 * k * n


def musketeer_bound(n: int) -> int:
    return 36 * n


@dataclass
class MoveAccounting:
    n: int
    sigma1: int
    sigma2: int = 0
    moves: int = 0
    phases: Counter = field(default_factory=Counter)
    actors: Counter = field(default_factory=Counter)
    queries: int = 0
    updates: int = 0
    kind: str = "compactify"

    @classmethod
    def for_trace(cls, initial, trace: Trace, counter: OpCounter | None = None, target=None):
        acc = cls(
            n=len(initial),
            sigma1=coordinate_sum(initial),
            sigma2=coordinate_sum(target) if target is not None else 0,
            moves=len(trace),
            phases=trace.phase_counts(),
            actors=trace.actor_counts(),
            kind="compactify" if target is None else "reconfigure",
        )
        if counter is not None:
            acc.queries, acc.updates = counter.queries, counter.updates
        return acc

    @property
    def bound(self) -> int:
        if self.kind == "compactify":
            return compactify_bound(self.sigma1, self.n)
        return reconfigure_bound(self.sigma1, self.sigma2, self.n)

    @property
    def budget(self) -> int:
        extra = COMPACTIFY_EXTRA if self.kind == "compactify" else RECONFIGURE_EXTRA
        return SLACK * self.bound + extra

    @property
    def ratio(self) -> float:
        """Moves over the budget; at most 1 means within budget."""
        return self.moves / self.budget if self.budget else 0.0

    @property
    def amortized(self) -> float | None:
        """Counted queries and updates per move."""
        if not self.moves:
            return None
        return (self.queries + self.updates) / self.moves

    @property
    def musketeer_moves(self) -> int:
        return self.actors.get("musketeer", 0)

    def musketeers_within_budget(self) -> bool:
        return self.musketeer_moves <= SLACK * musketeer_bound(self.n) + MUSKETEER_EXTRA

    def consistent(self) -> bool:
        return sum(self.phases.values()) == self.moves

    def within_budget(self) -> bool:
        return self.moves <= self.budget
