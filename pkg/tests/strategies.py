"""Hypothesis strategies for small random graphs."""

import numpy as np
from hypothesis import strategies as st

from qws.cayley import CirculantSpec, CubelikeSpec
from qws.graph import Graph


@st.composite
def simple_graphs(draw, min_n: int = 2, max_n: int = 8) -> Graph:
    n = draw(st.integers(min_n, max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    present = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    w = np.zeros((n, n))
    for (u, v), on in zip(pairs, present):
        if on:
            w[u, v] = w[v, u] = 1.0
    return Graph(w, meta=f"hyp:{n}")


@st.composite
def weighted_graphs(draw, min_n: int = 2, max_n: int = 6) -> Graph:
    x = draw(simple_graphs(min_n, max_n))
    n = x.n
    weights = draw(
        st.lists(st.floats(0.25, 2.0, allow_nan=False), min_size=n * n, max_size=n * n)
    )
    w = np.triu(x.weights * np.array(weights).reshape(n, n), 1)
    loops = draw(st.lists(st.floats(-1.0, 1.0, allow_nan=False), min_size=n, max_size=n))
    return Graph(w + w.T, np.array(loops), meta=f"hypw:{n}")


times = st.floats(0.0, 20.0, allow_nan=False, allow_infinity=False)


@st.composite
def bipartite_graphs(draw, max_part: int = 4):
    """A simple bipartite graph together with the bipartition it was drawn on."""
    a = draw(st.integers(1, max_part))
    b = draw(st.integers(1, max_part))
    present = draw(st.lists(st.booleans(), min_size=a * b, max_size=a * b))
    w = np.zeros((a + b, a + b))
    for k, on in enumerate(present):
        if on:
            u, v = divmod(k, b)
            w[u, a + v] = w[a + v, u] = 1.0
    return Graph(w, meta=f"hypb:{a},{b}"), (list(range(a)), list(range(a, a + b)))


@st.composite
def circulant_specs(draw, min_n: int = 3, max_n: int = 12, odd: bool = False) -> CirculantSpec:
    n = draw(st.integers(min_n, max_n).filter(lambda k: k % 2 == 1 or not odd))
    half = draw(st.sets(st.integers(1, n // 2), min_size=1))
    return CirculantSpec(n=n, C=tuple(half | {n - s for s in half}))


@st.composite
def cubelike_specs(draw, max_d: int = 4, max_size: int = 5) -> CubelikeSpec:
    d = draw(st.integers(1, max_d))
    top = (1 << d) - 1
    c = draw(st.sets(st.integers(1, top), min_size=1, max_size=min(max_size, top)))
    return CubelikeSpec(d=d, C=tuple(c))
