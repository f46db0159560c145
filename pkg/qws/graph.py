"""Graph model, named constructors, products, joins and complements."""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from graphviz import Graph as Dot

from qws import metadata
from qws.errors import GraphError

logger = logging.getLogger(__name__)

Bipartition = Tuple[List[int], List[int]]


@dataclass(frozen=True, eq=False)
class Graph:
    """A finite undirected graph with real edge weights and optional loops.

    ``weights`` holds the off-diagonal weights and must be exactly symmetric;
    loop weights live in ``diagonal``. Both arrays are read-only.
    """

    weights: np.ndarray
    diagonal: np.ndarray = field(default=None)  # type: ignore[assignment]
    meta: str = ""

    def __post_init__(self) -> None:
        w = np.array(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise GraphError(f"Weight matrix must be square, got shape {w.shape}")
        n = w.shape[0]
        if n < 1:
            raise GraphError("A graph needs at least one vertex")
        if np.any(np.diag(w) != 0):
            raise GraphError("Loops go in the diagonal vector, not the weight matrix")
        if not np.array_equal(w, w.T):
            raise GraphError("Weight matrix is not symmetric")
        if self.diagonal is None:
            d = np.zeros(n)
        else:
            d = np.array(self.diagonal, dtype=float).reshape(-1)
            if d.shape != (n,):
                raise GraphError(f"Diagonal must have length {n}, got {d.shape[0]}")
        w.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "diagonal", d)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return np.array_equal(self.weights, other.weights) and np.array_equal(
            self.diagonal, other.diagonal
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        tag = f" {self.meta}" if self.meta else ""
        return f"<Graph{tag} n={self.n} m={self.edge_count()}>"

    @property
    def n(self) -> int:
        return int(self.weights.shape[0])

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: Sequence[Tuple],
        loops: Optional[Dict[int, float]] = None,
        meta: str = "",
    ) -> "Graph":
        """Create a graph from ``(u, v)`` or ``(u, v, w)`` tuples."""
        w = np.zeros((n, n))
        for edge in edges:
            u, v = int(edge[0]), int(edge[1])
            weight = float(edge[2]) if len(edge) > 2 else 1.0
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"Edge ({u}, {v}) out of range for {n} vertices")
            if u == v:
                raise GraphError(f"Loop at {u} must be given as a loop weight")
            w[u, v] = w[v, u] = weight
        d = np.zeros(n)
        for u, weight in (loops or {}).items():
            d[int(u)] = float(weight)
        return cls(w, d, meta)

    @classmethod
    def from_networkx(cls, g: nx.Graph, meta: str = "") -> "Graph":
        """Create a graph from a networkx graph with nodes relabelled 0..n-1 in sorted order."""
        nodes = sorted(g.nodes())
        a = nx.to_numpy_array(g, nodelist=nodes, weight="weight")
        d = np.diag(a).copy()
        np.fill_diagonal(a, 0.0)
        return cls(a, d, meta)

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        for u, v, w in self.edges():
            g.add_edge(u, v, weight=w)
        return g

    def edges(self) -> List[Tuple[int, int, float]]:
        us, vs = np.nonzero(np.triu(self.weights))
        return [(int(u), int(v), float(self.weights[u, v])) for u, v in zip(us, vs)]

    def edge_count(self) -> int:
        return int(np.count_nonzero(np.triu(self.weights)))

    def hamiltonian(self, kind: str = "adjacency") -> np.ndarray:
        """Return the walk Hamiltonian.

        Args:
            kind: ``adjacency`` (W + diag), ``laplacian`` (D - W) or ``signless`` (D + W),
                where D holds the weighted degrees.

        Returns:
            A fresh symmetric float matrix.
        """
        if kind == "adjacency":
            return self.weights + np.diag(self.diagonal)
        deg = np.diag(self.degrees())
        if kind == "laplacian":
            return deg - self.weights
        if kind == "signless":
            return deg + self.weights
        raise GraphError(f"Unknown Hamiltonian kind: {kind}")

    def degrees(self) -> np.ndarray:
        return self.weights.sum(axis=1)

    def support(self) -> np.ndarray:
        return self.weights != 0

    def is_simple(self) -> bool:
        return bool(np.all(np.isin(self.weights, (0.0, 1.0))) and not np.any(self.diagonal))

    def is_integral(self) -> bool:
        """True when every weight and loop weight is an integer."""
        a = self.hamiltonian("adjacency")
        return bool(np.all(a == np.round(a)))

    def regular_degree(self) -> Optional[float]:
        """Common row sum of the adjacency matrix, or None if rows differ."""
        rows = self.hamiltonian("adjacency").sum(axis=1)
        if np.all(rows == rows[0]):
            return float(rows[0])
        return None

    def is_regular(self) -> bool:
        return self.regular_degree() is not None

    def components(self) -> List[List[int]]:
        comps = [sorted(c) for c in nx.connected_components(self.to_networkx())]
        return sorted(comps, key=lambda c: c[0])

    def is_connected(self) -> bool:
        return len(self.components()) == 1

    def distances(self, u: int) -> np.ndarray:
        """Hop distances from ``u`` on the support; unreachable vertices get -1."""
        self._check_vertex(u)
        lengths = nx.single_source_shortest_path_length(self.to_networkx(), u)
        dist = np.full(self.n, -1, dtype=int)
        for v, k in lengths.items():
            dist[v] = k
        return dist

    def bipartition(self) -> Optional[Bipartition]:
        """A 2-colouring of the support as two sorted vertex lists, or None."""
        g = self.to_networkx()
        if not nx.is_bipartite(g):
            return None
        colour = nx.bipartite.color(g)
        first = sorted(v for v, c in colour.items() if c == 1)
        second = sorted(v for v, c in colour.items() if c == 0)
        return first, second

    def is_bipartite(self) -> bool:
        return self.bipartition() is not None and not np.any(self.diagonal)

    def _check_vertex(self, u: int) -> None:
        if not 0 <= u < self.n:
            raise GraphError(f"Vertex {u} out of range for {self.n} vertices")

    def to_graphviz(
        self,
        highlight: Sequence[int] = (),
        cells: Optional[Sequence[Sequence[int]]] = None,
    ) -> Dot:
        """Build a Graphviz graph, colouring highlighted vertices or partition cells."""
        dot = Dot(comment=self.meta or "qws graph")
        dot.attr("node", shape="circle", style="filled")
        fill: Dict[int, str] = {}
        if cells:
            for i, cell in enumerate(cells):
                for v in cell:
                    fill[v] = metadata.get_cell_color(i)
        for v in highlight:
            fill[v] = metadata.get_vertex_color("transfer")
        for v in range(self.n):
            label = str(v)
            if self.diagonal[v]:
                label = f"{v}\n({self.diagonal[v]:g})"
            dot.node(
                f"v{v}",
                label=label,
                fillcolor=fill.get(v, metadata.get_vertex_color("default")),
            )
        for u, v, w in self.edges():
            dot.edge(f"v{u}", f"v{v}", label=None if w == 1.0 else f"{w:.4g}")
        return dot

    def render_svg(self, output_path: str, **kwargs) -> str:
        """Render SVG visualization to the given output path."""
        dot = self.to_graphviz(**kwargs)
        dot.format = "svg"
        return dot.render(filename=output_path, cleanup=True)


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise GraphError(message)


def path(n: int) -> Graph:
    _require(n >= 1, f"path needs n >= 1, got {n}")
    return Graph.from_networkx(nx.path_graph(n), meta=f"path:{n}")


def cycle(n: int) -> Graph:
    _require(n >= 3, f"cycle needs n >= 3, got {n}")
    return Graph.from_networkx(nx.cycle_graph(n), meta=f"cycle:{n}")


def complete(n: int) -> Graph:
    _require(n >= 1, f"complete needs n >= 1, got {n}")
    return Graph.from_networkx(nx.complete_graph(n), meta=f"complete:{n}")


def empty(n: int) -> Graph:
    _require(n >= 1, f"empty needs n >= 1, got {n}")
    return Graph(np.zeros((n, n)), meta=f"empty:{n}")


def cube(d: int) -> Graph:
    """The d-cube, vertex x adjacent to x with one bit flipped; bit d-1 is the first factor."""
    _require(d >= 1, f"cube needs d >= 1, got {d}")
    g = cartesian_power(path(2), d)
    return Graph(g.weights, g.diagonal, meta=f"cube:{d}")


def folded_cube(d: int) -> Graph:
    """The d-cube with every vertex also joined to its antipode (the folded (d+1)-cube)."""
    _require(d >= 2, f"folded cube needs d >= 2, got {d}")
    w = cube(d).weights.copy()
    mask = (1 << d) - 1
    for x in range(1 << d):
        w[x, x ^ mask] = 1.0
    return Graph(w, meta=f"folded:{d}")


def cocktail_party(k: int) -> Graph:
    """K_{2k} minus the perfect matching {i, i + k}."""
    _require(k >= 1, f"cocktail party needs k >= 1, got {k}")
    n = 2 * k
    w = np.ones((n, n)) - np.eye(n)
    for i in range(k):
        w[i, i + k] = w[i + k, i] = 0.0
    return Graph(w, meta=f"cocktail:{k}")


def petersen() -> Graph:
    return Graph.from_networkx(nx.petersen_graph(), meta="petersen")


def weighted_path(d: int) -> Graph:
    """Path on d+1 vertices with edge k weighted sqrt(k (d + 1 - k)).

    This is the normalized distance quotient of the d-cube; it has perfect state
    transfer between its ends at pi/2.
    """
    _require(d >= 1, f"weighted path needs d >= 1, got {d}")
    edges = [(k - 1, k, np.sqrt(k * (d + 1 - k))) for k in range(1, d + 1)]
    return Graph.from_edges(d + 1, edges, meta=f"weighted_path:{d}")


def disjoint_union(*graphs: Graph) -> Graph:
    _require(len(graphs) >= 1, "disjoint union needs at least one graph")
    n = sum(g.n for g in graphs)
    w = np.zeros((n, n))
    offset = 0
    for g in graphs:
        w[offset : offset + g.n, offset : offset + g.n] = g.weights
        offset += g.n
    d = np.concatenate([g.diagonal for g in graphs])
    return Graph(w, d, meta="union(" + ",".join(g.meta for g in graphs) + ")")


def _from_full(a: np.ndarray, meta: str) -> Graph:
    d = np.diag(a).copy()
    w = a - np.diag(d)
    return Graph(w, d, meta)


def cartesian_product(x: Graph, y: Graph) -> Graph:
    """X □ Y with vertex (a, b) at index a * |V(Y)| + b."""
    a = np.kron(x.hamiltonian(), np.eye(y.n)) + np.kron(np.eye(x.n), y.hamiltonian())
    return _from_full(a, f"cartesian({x.meta},{y.meta})")


def cartesian_power(x: Graph, d: int) -> Graph:
    _require(d >= 1, f"Cartesian power needs d >= 1, got {d}")
    g = x
    for _ in range(d - 1):
        g = cartesian_product(g, x)
    return Graph(g.weights, g.diagonal, meta=f"power({x.meta},{d})")


def direct_product(x: Graph, y: Graph) -> Graph:
    """X × Y, adjacency A(X) ⊗ A(Y)."""
    a = np.kron(x.hamiltonian(), y.hamiltonian())
    return _from_full(a, f"direct({x.meta},{y.meta})")


def join(x: Graph, y: Graph) -> Graph:
    """X + Y: the disjoint union with every vertex of X joined to every vertex of Y."""
    n = x.n + y.n
    w = np.ones((n, n))
    w[: x.n, : x.n] = x.weights
    w[x.n :, x.n :] = y.weights
    d = np.concatenate([x.diagonal, y.diagonal])
    return Graph(w, d, meta=f"join({x.meta},{y.meta})")


def complement(x: Graph) -> Graph:
    _require(x.is_simple(), "complement is defined for simple graphs only")
    w = np.ones((x.n, x.n)) - np.eye(x.n) - x.weights
    return Graph(w, meta=f"complement({x.meta})")


def bipartite_complement(x: Graph, bipartition: Optional[Bipartition] = None) -> Graph:
    """Complement of E(X) within the complete bipartite graph on the given bipartition."""
    _require(x.is_simple(), "bipartite complement is defined for simple graphs only")
    if bipartition is None:
        bipartition = x.bipartition()
        _require(bipartition is not None, "graph is not bipartite")
    first, second = (list(p) for p in bipartition)  # type: ignore[union-attr]
    _require(
        sorted(first + second) == list(range(x.n)),
        "bipartition must cover every vertex exactly once",
    )
    sub = x.weights[np.ix_(first, first)]
    _require(not sub.any(), "first part of the bipartition is not independent")
    sub = x.weights[np.ix_(second, second)]
    _require(not sub.any(), "second part of the bipartition is not independent")
    w = np.zeros((x.n, x.n))
    for u in first:
        for v in second:
            if x.weights[u, v] == 0:
                w[u, v] = w[v, u] = 1.0
    return Graph(w, meta=f"bipcomplement({x.meta})")


CONSTRUCTORS: Dict[str, Tuple[int, Callable[..., Graph]]] = {
    "path": (1, path),
    "cycle": (1, cycle),
    "complete": (1, complete),
    "empty": (1, empty),
    "cube": (1, cube),
    "folded": (1, folded_cube),
    "cocktail": (1, cocktail_party),
    "petersen": (0, petersen),
    "weighted_path": (1, weighted_path),
}


def build_named(kind: str, params: Sequence[int] = ()) -> Graph:
    """Build a named graph such as ``build_named("cube", [3])``.

    Raises:
        GraphError: For an unknown kind or invalid parameters.
    """
    if kind not in CONSTRUCTORS:
        raise GraphError(f"Unknown graph kind: {kind}")
    arity, ctor = CONSTRUCTORS[kind]
    if len(params) != arity:
        raise GraphError(f"{kind} takes {arity} parameter(s), got {len(params)}")
    return ctor(*(int(p) for p in params))
