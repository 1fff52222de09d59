"""Slides and convex transitions: validation, application, traces, replay."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

from .lattice import (
    Configuration, ConfigurationError, add, digest_cells, is_removable, l1_dist,
    neighbors,
)

SLIDE = "slide"
CONVEX = "convex"

PHASES = ("harvest", "transit", "lower", "fix", "slide_down", "planar", "c2c")
ACTORS = ("musketeer", "payload")

# window constants for the in-place check
WINDOW_INFLATION = 1
MAX_OUTSIDE = 8

# unit vector pairs spanning the 12 edge-neighbour offsets
_PERP_PAIRS = []
for _i in range(3):
    for _j in range(_i + 1, 3):
        for _si in (1, -1):
            for _sj in (1, -1):
                d1 = [0, 0, 0]
                d2 = [0, 0, 0]
                d1[_i] = _si
                d2[_j] = _sj
                _PERP_PAIRS.append((tuple(d1), tuple(d2)))
_UNITS = ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1))
# the same 12 pairs as indices into _UNITS
_PAIR_IDX = tuple((_UNITS.index(d1), _UNITS.index(d2)) for d1, d2 in _PERP_PAIRS)


@dataclass(frozen=True)
class Move:
    kind: str
    src: tuple
    dst: tuple
    pivot: tuple | None = None
    phase: str = "c2c"
    actor: str = "payload"

    def inverse(self) -> "Move":
        return Move(self.kind, self.dst, self.src, self.pivot, self.phase, self.actor)

    def tagged(self, phase=None, actor=None) -> "Move":
        return Move(self.kind, self.src, self.dst, self.pivot,
                    phase or self.phase, actor or self.actor)

    def to_line(self, tags: bool = True) -> str:
        s = "{} {} {} {} -> {} {} {}".format("S" if self.kind == SLIDE else "C", *self.src, *self.dst)
        if self.kind == CONVEX:
            s += " @ {} {} {}".format(*self.pivot)
        if tags:
            s += f" | phase={self.phase} actor={self.actor}"
        return s

    @classmethod
    def from_line(cls, line: str) -> "Move":
        body, _, tagpart = line.partition("|")
        phase, actor = "c2c", "payload"
        for tok in tagpart.split():
            key, _, val = tok.partition("=")
            if key == "phase":
                phase = val
            elif key == "actor":
                actor = val
        parts = body.split()
        try:
            kind = parts[0]
            src = tuple(int(v) for v in parts[1:4])
            if parts[4] != "->":
                raise ValueError
            dst = tuple(int(v) for v in parts[5:8])
            pivot = None
            if kind == "C":
                if parts[8] != "@":
                    raise ValueError
                pivot = tuple(int(v) for v in parts[9:12])
                if len(pivot) != 3 or len(parts) != 12:
                    raise ValueError
            elif kind != "S" or len(parts) != 8:
                raise ValueError
        except (ValueError, IndexError):
            raise ValueError(f"malformed move line {line!r}") from None
        return cls(SLIDE if kind == "S" else CONVEX, src, dst, pivot, phase, actor)


@dataclass(frozen=True)
class Violation:
    clause: str  # backbone | target-occupied | no-support | d-occupied | geometry
    detail: str = ""

    def __str__(self):
        return f"{self.clause}: {self.detail}" if self.detail else self.clause


class InvalidMove(ValueError):
    def __init__(self, move: Move, violation: Violation, index: int | None = None):
        self.move = move
        self.violation = violation
        self.index = index
        where = f" at index {index}" if index is not None else ""
        super().__init__(f"invalid move{where} {move.to_line(False)}: {violation}")


@dataclass
class Trace:
    moves: list = field(default_factory=list)
    initial_hash: str = ""

    def __len__(self):
        return len(self.moves)

    def __iter__(self):
        return iter(self.moves)

    def append(self, mv: Move):
        self.moves.append(mv)

    def extend(self, moves: Iterable):
        self.moves.extend(moves)

    def phase_counts(self) -> Counter:
        return Counter(mv.phase for mv in self.moves)

    def actor_counts(self) -> Counter:
        return Counter(mv.actor for mv in self.moves)

    def reversed(self, initial_hash: str = "") -> "Trace":
        return Trace([mv.inverse() for mv in reversed(self.moves)], initial_hash)

    def digest(self) -> str:
        return _digest_text("\n".join(mv.to_line() for mv in self.moves))

    def to_text(self) -> str:
        lines = [f"#initial {self.initial_hash}"]
        lines.extend(mv.to_line() for mv in self.moves)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Trace":
        tr = cls()
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#initial"):
                tr.initial_hash = line[len("#initial"):].strip()
                continue
            if line.startswith("#"):
                continue
            tr.append(Move.from_line(line))
        return tr


def _digest_text(text: str) -> str:
    h = 0xCBF29CE484222325
    for b in text.encode():
        h ^= b
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return f"{h:016x}"


# ------------------------------------------------------------------ validation

def classify(src, dst) -> str | None:
    diff = [abs(a - b) for a, b in zip(src, dst)]
    if sorted(diff) == [0, 0, 1]:
        return SLIDE
    if sorted(diff) == [0, 1, 1]:
        return CONVEX
    return None


def slide_supported(occupied, src, dst, exclude=None) -> bool:
    """Is there an occupied pair a' ~ src, b' ~ dst with a' ~ b'?"""
    d = tuple(b - a for a, b in zip(src, dst))
    for e in _UNITS:
        if e[0] * d[0] + e[1] * d[1] + e[2] * d[2] != 0:
            continue
        a2 = add(src, e)
        if a2 == exclude or a2 not in occupied:
            continue
        b2 = add(dst, e)
        if b2 != exclude and b2 in occupied:
            return True
    return False


def edge_cells(src, dst):
    """The two cells other than src/dst that contain the shared edge."""
    out = []
    for i in range(3):
        if src[i] != dst[i]:
            c = list(src)
            c[i] = dst[i]
            out.append(tuple(c))
    return out


def validate_move(config, mv: Move, assume_backbone: bool = False) -> Violation | None:
    """Return None if ``mv`` is legal in ``config``, else the failed clause.

    ``assume_backbone`` skips the connectivity test when the caller already
    knows the other modules form a connected set.
    """
    src, dst = mv.src, mv.dst
    if src not in config:
        return Violation("geometry", f"source {src} is empty")
    kind = classify(src, dst)
    if kind is None or kind != mv.kind:
        return Violation("geometry", f"{src} -> {dst} is not a {mv.kind}")
    if kind == CONVEX:
        cands = edge_cells(src, dst)
        if mv.pivot not in cands:
            return Violation("geometry", f"pivot {mv.pivot} is not adjacent to both cells")
    elif mv.pivot is not None:
        return Violation("geometry", "slides take no pivot")
    if not assume_backbone and not is_removable(config, src):
        return Violation("backbone", f"{src} is articulate")
    if dst in config:
        return Violation("target-occupied", f"{dst} is occupied")
    if kind == SLIDE:
        if not slide_supported(config, src, dst, exclude=src):
            return Violation("no-support", "no adjacent occupied pair a', b'")
        return None
    other = cands[1] if cands[0] == mv.pivot else cands[0]
    if mv.pivot not in config:
        return Violation("no-support", f"pivot {mv.pivot} is empty")
    if other in config:
        return Violation("d-occupied", f"edge cell {other} is occupied")
    return None


def apply_move(config: Configuration, mv: Move, assume_backbone: bool = False) -> Configuration:
    """Validate and perform ``mv`` in place; the configuration is untouched on error."""
    v = validate_move(config, mv, assume_backbone)
    if v is not None:
        raise InvalidMove(mv, v)
    config.move(mv.src, mv.dst)
    return config


def move_targets(occupied, a, exclude=None):
    """Free-space-valid moves of a module at ``a`` as (kind, dst, pivot) triples.

    Looks at the 6 face and 12 edge neighbours once each.  Membership tests
    go to the raw set and are charged to the configuration's counter in bulk.
    """
    raw = occupied.raw() if isinstance(occupied, Configuration) else occupied
    ax, ay, az = a
    nb = [(ax + d[0], ay + d[1], az + d[2]) for d in _UNITS]
    full = [c != exclude and c in raw for c in nb]
    slide_ok = [False] * 6
    out = []
    for i, j in _PAIR_IDX:
        di, dj = _UNITS[i], _UNITS[j]
        b = (ax + di[0] + dj[0], ay + di[1] + dj[1], az + di[2] + dj[2])
        if b != exclude and b in raw:
            # the diagonal cell backs a slide into either edge cell
            if full[j]:
                slide_ok[i] = True
            if full[i]:
                slide_ok[j] = True
            continue
        if full[i] != full[j]:
            out.append((CONVEX, b, nb[i] if full[i] else nb[j]))
    if isinstance(occupied, Configuration):
        occupied.counter.queries += 18
    slides = [(SLIDE, nb[i], None) for i in range(6) if slide_ok[i] and not full[i]]
    slides.sort(key=lambda t: t[1])
    out.sort(key=lambda t: t[1])
    return slides + out


def candidate_moves(occupied, a, exclude=None):
    """All free-space-valid moves for a module at ``a`` (backbone not checked).

    ``exclude`` is a cell treated as empty (the walker's own origin when the
    walker has already been lifted out of the occupancy set).
    """
    return [Move(k, a, b, p) for k, b, p in move_targets(occupied, a, exclude)]


def enumerate_moves(config, m) -> list:
    """Every legal move of the module at ``m``: slides first, each group by target."""
    if m not in config:
        raise ConfigurationError(f"{m} is empty")
    if not is_removable(config, m):
        return []
    return candidate_moves(config, m, exclude=m)


def is_movable(config, m) -> bool:
    return bool(enumerate_moves(config, m))


# ----------------------------------------------------------------- verification

@dataclass
class VerifyReport:
    ok: bool
    n_moves: int
    failed_index: int | None = None
    violation: Violation | None = None
    final: Configuration | None = None
    final_match: bool | None = None
    window_ok: bool | None = None
    window_index: int | None = None
    max_outside: int = 0
    phase_counts: dict = field(default_factory=dict)

    def summary(self) -> str:
        if self.failed_index is not None:
            return f"FAIL at move {self.failed_index}: {self.violation}"
        bits = [f"{self.n_moves} moves valid"]
        if self.final_match is not None:
            bits.append("final matches" if self.final_match else "final MISMATCH")
        if self.window_ok is not None:
            bits.append(f"in-place {'ok' if self.window_ok else 'VIOLATED'} (max outside {self.max_outside})")
        return "; ".join(bits)


def joint_window(a, b, inflation: int = WINDOW_INFLATION):
    cells = list(a) + list(b)
    xs, ys, zs = zip(*cells)
    return (min(xs), min(ys), min(zs)), (max(xs), max(ys), max(zs))


def _outside(c, lo, hi, pad=0) -> bool:
    return any(c[i] < lo[i] - pad or c[i] > hi[i] + pad for i in range(3))


def verify_trace(initial, trace: Trace, expected_final=None, check_window: bool = True) -> VerifyReport:
    """Replay ``trace`` from ``initial``, re-validating every move.

    Also checks that every prefix stays inside the joint bounding box of the
    initial and final configurations inflated by one, with at most
    ``MAX_OUTSIDE`` modules strictly outside that box.
    """
    config = Configuration(initial)
    report = VerifyReport(ok=True, n_moves=len(trace))
    for i, mv in enumerate(trace.moves):
        v = validate_move(config, mv)
        if v is not None:
            report.ok = False
            report.failed_index = i
            report.violation = v
            report.final = config
            return report
        config.move(mv.src, mv.dst)
    report.final = config
    report.phase_counts = dict(trace.phase_counts())
    if expected_final is not None:
        report.final_match = config.cells == frozenset(expected_final)
        report.ok = report.ok and report.final_match
    if check_window and len(config):
        lo, hi = joint_window(initial, config)
        report.window_ok, report.window_index, report.max_outside = check_in_place(initial, trace, lo, hi)
        report.ok = report.ok and report.window_ok
    return report


def check_in_place(initial, trace: Trace, lo, hi):
    """(ok, first failing prefix index or None, max modules outside the box)."""
    cells = set(initial)
    outside = sum(1 for c in cells if _outside(c, lo, hi))
    worst = outside
    bad = None
    if outside > MAX_OUTSIDE or any(_outside(c, lo, hi, WINDOW_INFLATION) for c in cells):
        bad = -1
    for i, mv in enumerate(trace.moves):
        cells.remove(mv.src)
        cells.add(mv.dst)
        outside += _outside(mv.dst, lo, hi) - _outside(mv.src, lo, hi)
        worst = max(worst, outside)
        if bad is None and (outside > MAX_OUTSIDE or _outside(mv.dst, lo, hi, WINDOW_INFLATION)):
            bad = i
    return bad is None, bad, worst


def replay(initial, trace: Trace, validate: bool = True) -> Configuration:
    config = Configuration(initial)
    for i, mv in enumerate(trace.moves):
        if validate:
            v = validate_move(config, mv)
            if v is not None:
                raise InvalidMove(mv, v, i)
        config.move(mv.src, mv.dst)
    return config


def read_trace(path) -> Trace:
    with open(path) as fh:
        return Trace.from_text(fh.read())


def write_trace(path, trace: Trace):
    with open(path, "w") as fh:
        fh.write(trace.to_text())


def moves_are_adjacent(mv: Move) -> bool:
    return l1_dist(mv.src, mv.dst) in (1, 2) and mv.src != mv.dst


__all__ = [
    "Move", "Trace", "Violation", "InvalidMove", "VerifyReport", "SLIDE", "CONVEX",
    "validate_move", "apply_move", "enumerate_moves", "candidate_moves", "verify_trace",
    "replay", "read_trace", "write_trace", "check_in_place", "joint_window", "neighbors",
    "slide_supported", "edge_cells", "classify", "is_movable", "digest_cells",
]
