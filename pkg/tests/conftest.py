import os

from hypothesis import HealthCheck, settings, strategies as st

# deterministic by default so the suite is reproducible; set HYPOTHESIS_PROFILE=explore to vary
settings.register_profile(
    "default", deadline=None, derandomize=True, max_examples=200,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.register_profile("explore", deadline=None, max_examples=1000)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

FACES = ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1))


@st.composite
def polycubes(draw, min_n=1, max_n=12, side=4):
    """Connected cell sets inside [0, side)^3, grown one face-neighbour at a time."""
    n = draw(st.integers(min_n, max_n))
    start = tuple(draw(st.integers(0, side - 1)) for _ in range(3))
    cells = {start}
    while len(cells) < n:
        frontier = sorted({
            (c[0] + d[0], c[1] + d[1], c[2] + d[2])
            for c in cells for d in FACES
        } - cells)
        frontier = [c for c in frontier if all(0 <= v < side for v in c)]
        if not frontier:
            break
        cells.add(draw(st.sampled_from(frontier)))
    return frozenset(cells)


@st.composite
def compact_sets(draw, min_n=1, max_n=30):
    """Down-closed cell sets containing the origin."""
    n = draw(st.integers(min_n, max_n))
    cells = {(0, 0, 0)}
    while len(cells) < n:
        addable = sorted(
            t for c in cells for t in ((c[0] + 1, c[1], c[2]), (c[0], c[1] + 1, c[2]), (c[0], c[1], c[2] + 1))
            if t not in cells and all(t[i] == 0 or tuple(t[j] - (j == i) for j in range(3)) in cells for i in range(3))
        )
        cells.add(draw(st.sampled_from(addable)))
    return frozenset(cells)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
