"""Reconfigure a solid 8x8x8 cube into the skeleton of an edge-43 cube (both 512 modules).

Takes one to two minutes.
"""
import time

from slidingcubes.harness.generate import cube_skeleton, solid_cuboid
from slidingcubes.moves import verify_trace
from slidingcubes.reconfigure import reconfigure

cube, skel = solid_cuboid(8, 8, 8), cube_skeleton(43)
assert len(cube) == len(skel) == 512

t0 = time.perf_counter()
plan = reconfigure(cube, skel)
print(f"planned in {time.perf_counter() - t0:.1f} s")
print(f"forward {len(plan.forward)}, bridge {len(plan.bridge)}, backward {len(plan.backward)}, "
      f"total {plan.total} (budget {plan.budget()})")
rep = verify_trace(cube, plan.trace(), expected_final=skel)
print("verifier:", rep.summary())
