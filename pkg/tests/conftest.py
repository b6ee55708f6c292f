import numpy as np
from hypothesis import strategies as st

from relfuse.bsp import BetaStacyProcess, DiscreteCdf, LifetimeSample
from relfuse.fusion import moments_of
from relfuse.rbd import RbdNode


@st.composite
def grids(draw, min_points=1, max_points=8):
    n = draw(st.integers(min_points, max_points))
    raw = draw(
        st.lists(
            st.floats(0.01, 50.0, allow_nan=False, allow_infinity=False),
            min_size=n,
            max_size=n,
        )
    )
    grid = np.unique(np.round(np.asarray(raw), 6))
    grid = grid[grid > 0.0]
    if grid.size < min_points:
        extra = np.arange(1.0, min_points - grid.size + 1.0)
        grid = np.unique(np.concatenate([grid, grid.max() + extra if grid.size else extra]))
    return grid


@st.composite
def bsp_processes(draw, min_points=1, max_points=8, allow_terminal=True, min_precision=1e-3):
    grid = draw(grids(min_points, max_points))
    n = grid.size
    raw = draw(st.lists(st.floats(1e-4, 1.0), min_size=n, max_size=n))
    values = np.sort(np.asarray(raw))
    if allow_terminal and draw(st.booleans()):
        values[-1] = 1.0
    else:
        values = np.minimum(values, 0.999)
    precs = draw(st.lists(st.floats(min_precision, 100.0), min_size=n, max_size=n))
    return BetaStacyProcess(DiscreteCdf(grid, values), np.asarray(precs))


@st.composite
def moment_curves(draw, **kwargs):
    return moments_of(draw(bsp_processes(**kwargs)))


@st.composite
def censored_samples(draw, min_size=1, max_size=30, force_failure=True):
    n = draw(st.integers(min_size, max_size))
    times = draw(st.lists(st.floats(0.01, 40.0), min_size=n, max_size=n))
    events = draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    if force_failure and sum(events) == 0:
        events[0] = 1
    return [LifetimeSample(round(t, 4), e) for t, e in zip(times, events)]


_IDENT = st.from_regex(r"[a-z][a-z0-9_]{0,8}", fullmatch=True).filter(
    lambda s: s not in ("series", "parallel")
)


@st.composite
def rbd_trees(draw, max_depth=3):
    names = iter(draw(st.permutations([f"c{i}" for i in range(64)])))

    def build(depth):
        if depth >= max_depth or draw(st.booleans()):
            node = RbdNode("component", id=next(names))
        else:
            kind = draw(st.sampled_from(["series", "parallel"]))
            count = draw(st.integers(2, 3))
            node = RbdNode(kind, children=tuple(build(depth + 1) for _ in range(count)))
        if draw(st.integers(0, 3)) == 0 and node.kind != "component":
            node = RbdNode(node.kind, label=f"g{next(names)}", children=node.children)
        return node

    return build(0)
