"""Vertex partitions: equitable refinement, distance partitions, quotients and automorphisms."""

import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

import numpy as np

from qws.errors import GraphError, PreconditionError, SearchBudgetExceeded
from qws.graph import Graph

logger = logging.getLogger(__name__)

EQUITABLE_TOL = 1e-10
# Weighted neighbour sums are compared after rounding to this many decimals.
SIGNATURE_DECIMALS = 9
AUTOMORPHISM_LIMIT_N = 16
AUTOMORPHISM_BUDGET = 200_000

Permutation = Tuple[int, ...]


@dataclass(frozen=True)
class VertexPartition:
    """Ordered cells covering ``range(n)`` without overlap."""

    cells: Tuple[Tuple[int, ...], ...]
    n: int

    def __post_init__(self) -> None:
        cells = tuple(tuple(sorted(int(v) for v in cell)) for cell in self.cells)
        if any(len(cell) == 0 for cell in cells):
            raise GraphError("Partition cells must be non-empty")
        flat = sorted(v for cell in cells for v in cell)
        if flat != list(range(self.n)):
            raise GraphError("Partition cells must be disjoint and cover every vertex")
        object.__setattr__(self, "cells", cells)

    @classmethod
    def from_cells(cls, cells: Sequence[Sequence[int]], n: Optional[int] = None) -> "VertexPartition":
        if n is None:
            n = sum(len(c) for c in cells)
        return cls(tuple(tuple(c) for c in cells), n)

    @classmethod
    def trivial(cls, n: int) -> "VertexPartition":
        return cls((tuple(range(n)),), n)

    @classmethod
    def discrete(cls, n: int) -> "VertexPartition":
        return cls(tuple((v,) for v in range(n)), n)

    @classmethod
    def isolating(cls, n: int, u: int) -> "VertexPartition":
        """The partition {{u}, V minus u}."""
        rest = tuple(v for v in range(n) if v != u)
        return cls(((u,), rest) if rest else ((u,),), n)

    @classmethod
    def from_colors(cls, colors: Sequence[int]) -> "VertexPartition":
        """Group vertices by colour; cells are ordered by their smallest vertex."""
        groups: Dict[int, List[int]] = {}
        for v, c in enumerate(colors):
            groups.setdefault(c, []).append(v)
        cells = sorted(groups.values(), key=lambda cell: cell[0])
        return cls(tuple(tuple(c) for c in cells), len(colors))

    def __len__(self) -> int:
        return len(self.cells)

    @property
    def sizes(self) -> Tuple[int, ...]:
        return tuple(len(c) for c in self.cells)

    def cell_index(self, v: int) -> int:
        for i, cell in enumerate(self.cells):
            if v in cell:
                return i
        raise GraphError(f"Vertex {v} not in partition")

    def colors(self) -> List[int]:
        colors = [0] * self.n
        for i, cell in enumerate(self.cells):
            for v in cell:
                colors[v] = i
        return colors

    def is_discrete(self) -> bool:
        return len(self.cells) == self.n

    def as_sets(self) -> FrozenSet[FrozenSet[int]]:
        """The cells with their order forgotten."""
        return frozenset(frozenset(c) for c in self.cells)

    def same_cells(self, other: "VertexPartition") -> bool:
        return self.as_sets() == other.as_sets()

    def refines(self, other: "VertexPartition") -> bool:
        """True when every cell of ``self`` lies inside a cell of ``other``."""
        colors = other.colors()
        return all(len({colors[v] for v in cell}) == 1 for cell in self.cells)

    def indicator(self) -> np.ndarray:
        """The n × |π| 0/1 characteristic matrix."""
        p = np.zeros((self.n, len(self.cells)))
        for i, cell in enumerate(self.cells):
            p[list(cell), i] = 1.0
        return p

    def characteristic(self) -> np.ndarray:
        """The normalized characteristic matrix Q, with QᵀQ = I."""
        return self.indicator() / np.sqrt(np.array(self.sizes, dtype=float))


@dataclass(frozen=True)
class QuotientMatrix:
    """Quotient B of a Hamiltonian over an equitable partition, with AQ = QB."""

    B: np.ndarray
    partition: VertexPartition
    normalized: bool = True

    def to_graph(self) -> Graph:
        """The weighted quotient graph; only meaningful for a normalized (symmetric) B."""
        if not self.normalized:
            raise PreconditionError("Only normalized quotients are symmetric")
        b = (self.B + self.B.T) / 2
        d = np.diag(b).copy()
        return Graph(b - np.diag(d), d, meta="quotient")


def is_equitable(
    x: Graph, partition: VertexPartition, hamiltonian: str = "adjacency", tol: float = EQUITABLE_TOL
) -> bool:
    """True when A commutes with QQᵀ for the normalized characteristic matrix Q."""
    if partition.n != x.n:
        raise GraphError(f"Partition covers {partition.n} vertices, graph has {x.n}")
    a = x.hamiltonian(hamiltonian)
    q = partition.characteristic()
    proj = q @ q.T
    return bool(np.max(np.abs(a @ proj - proj @ a)) <= tol)


def quotient(
    x: Graph,
    partition: VertexPartition,
    normalized: bool = True,
    hamiltonian: str = "adjacency",
) -> QuotientMatrix:
    """Quotient matrix of an equitable partition.

    Args:
        x: The graph.
        partition: An equitable partition of its vertices.
        normalized: Return QᵀAQ (symmetric) when True; otherwise the cell-count
            matrix whose (i, j) entry is the weight a vertex of cell i sends into cell j.
        hamiltonian: Which Hamiltonian to take the quotient of.

    Raises:
        PreconditionError: If the partition is not equitable.
    """
    if not is_equitable(x, partition, hamiltonian):
        raise PreconditionError("Quotient requested for a non-equitable partition")
    a = x.hamiltonian(hamiltonian)
    if normalized:
        q = partition.characteristic()
        b = q.T @ a @ q
    else:
        p = partition.indicator()
        b = (p.T @ a @ p) / np.array(partition.sizes, dtype=float)[:, None]
    return QuotientMatrix(B=b, partition=partition, normalized=normalized)


def _signature(a: np.ndarray, u: int, cells: Sequence[Sequence[int]]) -> Tuple[float, ...]:
    return tuple(round(float(a[u, list(cell)].sum()), SIGNATURE_DECIMALS) + 0.0 for cell in cells)


def coarsest_equitable_refinement(
    x: Graph, seed: Optional[VertexPartition] = None, hamiltonian: str = "adjacency"
) -> VertexPartition:
    """Split cells by weighted neighbour-count signatures until stable.

    A split cell keeps its position; its parts are ordered by signature.
    """
    if seed is None:
        seed = VertexPartition.trivial(x.n)
    if seed.n != x.n:
        raise GraphError(f"Seed partition covers {seed.n} vertices, graph has {x.n}")
    a = x.hamiltonian(hamiltonian)
    cells: List[Tuple[int, ...]] = list(seed.cells)
    rounds = 0
    while True:
        rounds += 1
        refined: List[Tuple[int, ...]] = []
        for cell in cells:
            groups: Dict[Tuple[float, ...], List[int]] = {}
            for u in cell:
                groups.setdefault(_signature(a, u, cells), []).append(u)
            for sig in sorted(groups):
                refined.append(tuple(groups[sig]))
        if len(refined) == len(cells):
            break
        cells = refined
    logger.debug("equitable refinement stable after %d rounds with %d cells", rounds, len(cells))
    return VertexPartition(tuple(cells), x.n)


def distance_partition(x: Graph, u: int) -> VertexPartition:
    """Cells of vertices at distance 0, 1, 2, ... from ``u``; unreachable vertices last."""
    dist = x.distances(u)
    cells: List[Tuple[int, ...]] = []
    for k in range(int(dist.max()) + 1):
        cells.append(tuple(int(v) for v in np.flatnonzero(dist == k)))
    unreachable = tuple(int(v) for v in np.flatnonzero(dist < 0))
    if unreachable:
        cells.append(unreachable)
    return VertexPartition(tuple(cells), x.n)


def is_distance_regular(x: Graph) -> bool:
    """Regular, connected and every distance partition equitable."""
    if not x.is_regular() or not x.is_connected():
        return False
    return all(is_equitable(x, distance_partition(x, u)) for u in range(x.n))


def automorphisms(
    x: Graph, limit_n: int = AUTOMORPHISM_LIMIT_N, budget: int = AUTOMORPHISM_BUDGET
) -> List[Permutation]:
    """All permutations p with A[p(i), p(j)] = A[i, j], by backtracking.

    Candidate images are restricted to vertices of the same stable refinement colour.

    Raises:
        PreconditionError: If the graph has more than ``limit_n`` vertices.
        SearchBudgetExceeded: If more than ``budget`` search nodes are visited.
    """
    n = x.n
    if n > limit_n:
        raise PreconditionError(f"Automorphism search is limited to {limit_n} vertices, got {n}")
    a = x.hamiltonian()
    colors = coarsest_equitable_refinement(x).colors()
    image = [-1] * n
    used = [False] * n
    found: List[Permutation] = []
    visited = 0

    def extend(v: int) -> None:
        nonlocal visited
        if v == n:
            found.append(tuple(image))
            return
        for w in range(n):
            if used[w] or colors[w] != colors[v] or a[w, w] != a[v, v]:
                continue
            if any(a[v, y] != a[w, image[y]] for y in range(v)):
                continue
            visited += 1
            if visited > budget:
                raise SearchBudgetExceeded(f"Automorphism search exceeded {budget} nodes")
            image[v] = w
            used[w] = True
            extend(v + 1)
            used[w] = False
            image[v] = -1

    extend(0)
    logger.debug("found %d automorphisms after %d search nodes", len(found), visited)
    return found


def automorphisms_fixing(x: Graph, u: int, **kwargs) -> List[Permutation]:
    """The stabilizer of ``u`` in the automorphism group."""
    return [p for p in automorphisms(x, **kwargs) if p[u] == u]


def orbit_partition(perms: Sequence[Permutation], n: int) -> VertexPartition:
    """Orbits of the group generated by ``perms``."""
    parent = list(range(n))

    def find(v: int) -> int:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for p in perms:
        for v in range(n):
            ra, rb = find(v), find(p[v])
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    return VertexPartition.from_colors([find(v) for v in range(n)])


def is_vertex_transitive(x: Graph) -> bool:
    return len(orbit_partition(automorphisms(x), x.n)) == 1


def stabilizers_equal(x: Graph, u: int, v: int) -> bool:
    """Whether the automorphisms fixing ``u`` are exactly those fixing ``v``."""
    perms = automorphisms(x)
    fix_u: Set[Permutation] = {p for p in perms if p[u] == u}
    fix_v: Set[Permutation] = {p for p in perms if p[v] == v}
    return fix_u == fix_v
