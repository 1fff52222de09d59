"""Compare planned move counts with exact shortest paths on every 3-module pair from a fixed start."""
from collections import Counter

from slidingcubes.harness.oracle import connected_configurations, oracle_bfs
from slidingcubes.reconfigure import reconfigure

start = {(0, 0, 0), (1, 0, 0), (1, 1, 0)}
gaps = Counter()
for target in connected_configurations(3, 3):
    plan = reconfigure(start, set(target))
    best = oracle_bfs(start, set(target))
    gaps[plan.total - best.distance] += 1

print("planned minus optimal -> number of targets")
for gap, count in sorted(gaps.items()):
    print(f"{gap:4d} {count:5d}")
