"""Compactify a random tree polycube and print how the moves break down."""
import sys

from slidingcubes.compactify import compactify
from slidingcubes.harness.accounting import MoveAccounting
from slidingcubes.harness.generate import random_tree_polycube
from slidingcubes.lattice import OpCounter, is_compact_configuration
from slidingcubes.moves import verify_trace

n = int(sys.argv[1]) if len(sys.argv) > 1 else 100
seed = int(sys.argv[2]) if len(sys.argv) > 2 else 0

cells = random_tree_polycube(n, seed)
counter = OpCounter()
res = compactify(cells, counter=counter)
rep = verify_trace(cells, res.trace)
acc = MoveAccounting.for_trace(cells, res.trace, counter)

print(f"tree n={n} seed={seed}, bbox {cells.bbox()}")
print(f"{len(res.trace)} moves, budget {acc.budget}, ratio {acc.ratio:.4f}")
print("by phase:", dict(res.trace.phase_counts()))
print("by actor:", dict(res.trace.actor_counts()))
print("verifier:", rep.summary())
print("compact:", is_compact_configuration(rep.final), "final bbox", rep.final.bbox())
