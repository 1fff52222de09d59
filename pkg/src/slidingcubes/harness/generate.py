"""Instance families used by the tests, the suite and the demos."""
from __future__ import annotations

import math
import random
from dataclasses import dataclass

from ..lattice import Configuration, ConfigurationError, neighbors, read_configuration

FAMILIES = ("solid_cuboid", "cube_skeleton", "random_tree_polycube", "tower", "plate", "file")


@dataclass(frozen=True)
class InstanceSpec:
    family: str
    n: int | None = None
    dims: tuple | None = None
    seed: int = 0
    path: str | None = None

    def key(self) -> str:
        dims = "x".join(map(str, self.dims)) if self.dims else "-"
        return f"{self.family}:{self.n}:{dims}:{self.seed}"


def parse_dims(text: str) -> tuple:
    try:
        dims = tuple(int(v) for v in text.lower().split("x"))
    except ValueError:
        raise ConfigurationError(f"bad dims {text!r}") from None
    if len(dims) != 3 or min(dims) < 1:
        raise ConfigurationError(f"dims must be three positive integers, got {text!r}")
    return dims


def solid_cuboid(a: int, b: int, c: int) -> Configuration:
    return Configuration((x, y, z) for x in range(a) for y in range(b) for z in range(c))


def skeleton_size(e: int) -> int:
    return 12 * (e - 1) + 8


def cube_skeleton(e: int) -> Configuration:
    """The edges of the cube [0, e]^3: cells with at least two extreme coordinates."""
    if e < 1:
        raise ConfigurationError("edge length must be positive")
    cells = []
    for x in range(e + 1):
        for y in range(e + 1):
            for z in range(e + 1):
                if sum(v in (0, e) for v in (x, y, z)) >= 2:
                    cells.append((x, y, z))
    return Configuration(cells)


def tower(n: int) -> Configuration:
    return Configuration((0, 0, z) for z in range(n))


def plate(n: int | None = None, dims=None) -> Configuration:
    if dims is None:
        side = max(1, math.isqrt(n))
        while n % side:
            side -= 1
        dims = (n // side, side, 1)
    return solid_cuboid(*dims)


def random_tree_polycube(n: int, seed: int = 0) -> Configuration:
    """Grow a tree-like polycube from the origin.

    Each step adds a random empty nonnegative cell that touches exactly one
    module, so the adjacency graph stays a tree.
    """
    if n < 1:
        raise ConfigurationError("n must be positive")
    rng = random.Random(seed)
    cells = {(0, 0, 0)}
    frontier = set(c for c in neighbors((0, 0, 0)) if min(c) >= 0)
    while len(cells) < n:
        if not frontier:
            raise ConfigurationError("tree growth got stuck")
        cand = rng.choice(sorted(frontier))
        frontier.discard(cand)
        if cand in cells or sum(nb in cells for nb in neighbors(cand)) != 1:
            continue
        cells.add(cand)
        for nb in neighbors(cand):
            if min(nb) >= 0 and nb not in cells:
                frontier.add(nb)
    return Configuration(cells)


def random_compact(n: int, seed: int = 0, dims=None) -> Configuration:
    """A random down-closed set of ``n`` cells, built by adding addable cells."""
    rng = random.Random(seed)
    cells = {(0, 0, 0)}
    addable = {(1, 0, 0), (0, 1, 0), (0, 0, 1)}
    while len(cells) < n:
        t = rng.choice(sorted(addable))
        addable.discard(t)
        cells.add(t)
        for i in range(3):
            u = list(t)
            u[i] += 1
            u = tuple(u)
            if dims is not None and u[i] >= dims[i]:
                continue
            if all(u[j] == 0 or tuple(u[k] - (k == j) for k in range(3)) in cells for j in range(3)):
                addable.add(u)
    return Configuration(cells)


def generate(spec: InstanceSpec) -> Configuration:
    fam = spec.family
    if fam == "solid_cuboid":
        if spec.dims is None:
            if spec.n is None:
                raise ConfigurationError("solid_cuboid needs dims or n")
            e = round(spec.n ** (1 / 3))
            if e ** 3 != spec.n:
                raise ConfigurationError(f"n={spec.n} is not a cube; give dims")
            return solid_cuboid(e, e, e)
        out = solid_cuboid(*spec.dims)
    elif fam == "cube_skeleton":
        if spec.dims is not None:
            e = spec.dims[0]
        else:
            e = (spec.n - 8) // 12 + 1 if spec.n is not None else 0
            if spec.n is None or skeleton_size(e) != spec.n:
                raise ConfigurationError(f"no cube skeleton has {spec.n} cells")
        out = cube_skeleton(e)
    elif fam == "random_tree_polycube":
        out = random_tree_polycube(spec.n, spec.seed)
    elif fam == "tower":
        out = tower(spec.n)
    elif fam == "plate":
        out = plate(spec.n, spec.dims)
    elif fam == "file":
        return read_configuration(spec.path)
    else:
        raise ConfigurationError(f"unknown family {fam!r}")
    if spec.n is not None and len(out) != spec.n:
        raise ConfigurationError(f"{fam} with dims {spec.dims} has {len(out)} cells, not {spec.n}")
    return out
