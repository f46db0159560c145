"""Spectral decompositions, transition matrices and eigenvalue classification."""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
from scipy.optimize import minimize_scalar

from qws import arith
from qws.errors import ExactArithmeticLimit, NumericalFailure, PreconditionError
from qws.graph import Graph

logger = logging.getLogger(__name__)

DEFAULT_CLUSTER_TOL = 1e-8
DEFAULT_SUPPORT_TOL = 1e-8
CLASSIFY_TOL = 1e-7
TAYLOR_DEGREE = 18


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Distinct eigenvalues θ_r (descending) with their orthogonal projections E_r."""

    thetas: np.ndarray
    idempotents: np.ndarray  # shape (m, n, n)
    multiplicities: Tuple[int, ...]
    cluster_tol: float
    matrix: np.ndarray
    hamiltonian: str = "adjacency"

    @property
    def n(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def m(self) -> int:
        return len(self.thetas)

    @property
    def spectral_radius(self) -> float:
        return float(np.max(np.abs(self.thetas)))

    def project(self, r: int, x: np.ndarray) -> np.ndarray:
        """E_r x."""
        return self.idempotents[r] @ x

    def vertex_projections(self, u: int) -> np.ndarray:
        """Array whose row r is E_r e_u."""
        return self.idempotents[:, :, u]

    def reconstruct(self) -> np.ndarray:
        return np.tensordot(self.thetas, self.idempotents, axes=1)

    def residuals(self) -> Dict[str, float]:
        """Max-norm residuals of resolution of identity, orthogonality and reconstruction."""
        eye = np.eye(self.n)
        total = self.idempotents.sum(axis=0)
        ortho = 0.0
        for r in range(self.m):
            for s in range(self.m):
                prod = self.idempotents[r] @ self.idempotents[s]
                target = self.idempotents[r] if r == s else 0.0
                ortho = max(ortho, float(np.max(np.abs(prod - target))))
        return {
            "identity": float(np.max(np.abs(total - eye))),
            "orthogonality": ortho,
            "reconstruction": float(np.max(np.abs(self.reconstruct() - self.matrix))),
            "symmetry": float(
                max(np.max(np.abs(e - e.T)) for e in self.idempotents) if self.m else 0.0
            ),
        }


def _cluster(values: np.ndarray, tol: float) -> List[List[int]]:
    """Group ascending eigenvalue indices whose consecutive gaps are at most ``tol``."""
    clusters: List[List[int]] = [[0]]
    for i in range(1, len(values)):
        if values[i] - values[i - 1] <= tol:
            clusters[-1].append(i)
        else:
            clusters.append([i])
    return clusters


def decompose_matrix(
    a: np.ndarray, cluster_tol: float = DEFAULT_CLUSTER_TOL, hamiltonian: str = "adjacency"
) -> SpectralDecomposition:
    """Spectral decomposition of a real symmetric matrix.

    Eigenvalues merge into one θ_r when consecutive gaps are at most
    ``cluster_tol * (1 + spectral radius)``.

    Raises:
        NumericalFailure: If the eigensolver does not converge.
    """
    a = np.asarray(a, dtype=float)
    try:
        values, vectors = scipy.linalg.eigh(a)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NumericalFailure(f"Eigensolver failed: {e}") from e
    radius = float(np.max(np.abs(values))) if len(values) else 0.0
    clusters = _cluster(values, cluster_tol * (1.0 + radius))
    thetas = []
    projections = []
    mults = []
    for idx in reversed(clusters):
        v = vectors[:, idx]
        e = v @ v.T
        projections.append((e + e.T) / 2)
        thetas.append(float(np.mean(values[idx])))
        mults.append(len(idx))
    logger.debug("decomposed %dx%d matrix into %d eigenvalues", a.shape[0], a.shape[0], len(thetas))
    matrix = a.copy()
    matrix.setflags(write=False)
    return SpectralDecomposition(
        thetas=np.array(thetas),
        idempotents=np.array(projections),
        multiplicities=tuple(mults),
        cluster_tol=cluster_tol,
        matrix=matrix,
        hamiltonian=hamiltonian,
    )


def decompose(
    x: Graph, hamiltonian: str = "adjacency", cluster_tol: float = DEFAULT_CLUSTER_TOL
) -> SpectralDecomposition:
    """Spectral decomposition of the chosen Hamiltonian of ``x``."""
    return decompose_matrix(x.hamiltonian(hamiltonian), cluster_tol, hamiltonian)


def lagrange_idempotents(decomp: SpectralDecomposition) -> List[np.ndarray]:
    """E_r = p_r(A) with p_r(t) = prod_{s != r} (t - θ_s) / (θ_r - θ_s)."""
    a = decomp.matrix
    eye = np.eye(decomp.n)
    out = []
    for r, theta_r in enumerate(decomp.thetas):
        p = eye.copy()
        for s, theta_s in enumerate(decomp.thetas):
            if s != r:
                p = p @ (a - theta_s * eye) / (theta_r - theta_s)
        out.append(p)
    return out


# Kept under the operation's name as well.
idempotents_via_lagrange = lagrange_idempotents


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """H(t) = exp(itA)."""

    t: float
    U: np.ndarray

    @property
    def n(self) -> int:
        return int(self.U.shape[0])

    def column(self, u: int) -> np.ndarray:
        return self.U[:, u]

    def entry(self, u: int, v: int) -> complex:
        return complex(self.U[u, v])

    def is_unitary(self, tol: float = 1e-9) -> bool:
        return bool(np.max(np.abs(self.U @ self.U.conj().T - np.eye(self.n))) <= tol)

    def is_symmetric(self, tol: float = 1e-9) -> bool:
        return bool(np.max(np.abs(self.U - self.U.T)) <= tol)

    def distance(self, other: Union["TransitionMatrix", np.ndarray]) -> float:
        """Max-norm distance to another matrix."""
        m = other.U if isinstance(other, TransitionMatrix) else other
        return float(np.max(np.abs(self.U - m)))


def transition(decomp: SpectralDecomposition, t: float) -> TransitionMatrix:
    """H(t) = sum_r exp(i θ_r t) E_r."""
    phases = np.exp(1j * decomp.thetas * t)
    return TransitionMatrix(t=float(t), U=np.tensordot(phases, decomp.idempotents, axes=1))


def transition_column(decomp: SpectralDecomposition, u: int, t: float) -> np.ndarray:
    """H(t) e_u without forming the whole matrix."""
    phases = np.exp(1j * decomp.thetas * t)
    return phases @ decomp.vertex_projections(u)


def transition_batch(decomp: SpectralDecomposition, times: np.ndarray) -> np.ndarray:
    """H(t) for many times at once, shape (len(times), n, n)."""
    phases = np.exp(1j * np.outer(times, decomp.thetas))
    return np.tensordot(phases, decomp.idempotents, axes=1)


def matrix_exp_i(a: np.ndarray, t: float, degree: int = TAYLOR_DEGREE) -> np.ndarray:
    """exp(itA) by a truncated Taylor series after scaling, followed by repeated squaring."""
    m = 1j * t * np.asarray(a, dtype=complex)
    n = m.shape[0]
    norm = float(np.max(np.sum(np.abs(m), axis=1))) if n else 0.0
    squarings = max(0, int(math.ceil(math.log2(norm / 0.5)))) if norm > 0.5 else 0
    sm = m / 2.0**squarings
    coeffs = [1.0]
    for k in range(degree):
        coeffs.append(coeffs[-1] / (k + 1))
    em = np.eye(n, dtype=complex) * coeffs[degree]
    for k in range(degree - 1, -1, -1):
        em = sm @ em
        em += np.eye(n) * coeffs[k]
    for _ in range(squarings):
        em = em @ em
    return em


def transition_oracle(x: Union[Graph, np.ndarray], t: float, hamiltonian: str = "adjacency") -> TransitionMatrix:
    """H(t) computed independently of any eigensolver."""
    a = x.hamiltonian(hamiltonian) if isinstance(x, Graph) else np.asarray(x, dtype=float)
    return TransitionMatrix(t=float(t), U=matrix_exp_i(a, t))


def eigenvalue_support(
    decomp: SpectralDecomposition, x: np.ndarray, tol: float = DEFAULT_SUPPORT_TOL
) -> Tuple[int, ...]:
    """Indices r with ||E_r x|| > tol * ||x||.

    Raises:
        PreconditionError: For the zero vector.
    """
    x = np.asarray(x, dtype=float)
    norm = float(np.linalg.norm(x))
    if norm == 0.0:
        raise PreconditionError("eigenvalue support of the zero vector")
    norms = np.linalg.norm(np.tensordot(decomp.idempotents, x, axes=1), axis=1)
    return tuple(int(r) for r in np.flatnonzero(norms > tol * norm))


def vertex_support(
    decomp: SpectralDecomposition, u: int, tol: float = DEFAULT_SUPPORT_TOL
) -> Tuple[int, ...]:
    e = np.zeros(decomp.n)
    e[u] = 1.0
    return eigenvalue_support(decomp, e, tol)


@dataclass(frozen=True)
class EigenvalueClass:
    """Arithmetic type of a set of eigenvalues."""

    kind: str = "unclassified"

    def to_dict(self) -> Dict:
        return {"kind": self.kind}


@dataclass(frozen=True)
class AllIntegers(EigenvalueClass):
    values: Tuple[int, ...] = ()
    kind: str = "integers"

    def to_dict(self) -> Dict:
        return {"kind": self.kind, "values": list(self.values)}


@dataclass(frozen=True)
class QuadraticField(EigenvalueClass):
    """Every θ_r equals (a_r + b_r sqrt(Δ)) / 2 with Δ squarefree."""

    delta: int = 0
    halves: Tuple[Tuple[int, int], ...] = ()
    kind: str = "quadratic"

    def value(self, i: int) -> float:
        a, b = self.halves[i]
        return (a + b * math.sqrt(self.delta)) / 2

    def common_a(self) -> Optional[int]:
        """The shared a if every eigenvalue has the same one."""
        values = {a for a, _ in self.halves}
        return values.pop() if len(values) == 1 else None

    def to_dict(self) -> Dict:
        return {"kind": self.kind, "delta": self.delta, "halves": [list(h) for h in self.halves]}


@dataclass(frozen=True)
class Unclassified(EigenvalueClass):
    reason: str = ""
    kind: str = "unclassified"

    def to_dict(self) -> Dict:
        return {"kind": self.kind, "reason": self.reason}


def _confirm_integer_roots(x: Optional[Graph], hamiltonian: str, values: Sequence[int]) -> bool:
    """Exact check that each value is a root of the characteristic polynomial, when possible."""
    if x is None:
        return True
    from qws import exact

    try:
        phi = exact.char_poly(x, hamiltonian)
    except ExactArithmeticLimit:
        return True
    return all(phi(k) == 0 for k in values)


def classify_eigenvalues(
    decomp: SpectralDecomposition,
    support: Sequence[int],
    graph: Optional[Graph] = None,
    tol: float = CLASSIFY_TOL,
) -> EigenvalueClass:
    """Decide whether the support eigenvalues are integers or quadratic integers over one field.

    Integers are found by rounding and confirmed against the exact characteristic
    polynomial when ``graph`` has integer weights and is small enough. A non-integer
    θ is matched with a conjugate θ' in the support such that θ + θ' and (θ - θ')²
    are integers; all such θ must share the squarefree part Δ of (θ - θ')².
    """
    thetas = [float(decomp.thetas[r]) for r in support]
    if not thetas:
        return Unclassified(reason="empty support")
    ints = [arith.nearest_integer(t, tol) for t in thetas]
    if all(k is not None for k in ints):
        values = tuple(int(k) for k in ints)  # type: ignore[arg-type]
        if _confirm_integer_roots(graph, decomp.hamiltonian, values):
            return AllIntegers(values=values)
        logger.warning("rounded eigenvalues %s are not roots of the characteristic polynomial", values)
        return Unclassified(reason="integer rounding not confirmed")

    halves: List[Tuple[int, int]] = []
    delta: Optional[int] = None
    for i, theta in enumerate(thetas):
        k = ints[i]
        if k is not None:
            halves.append((2 * k, 0))
            continue
        found = None
        for j, other in enumerate(thetas):
            if j == i or ints[j] is not None:
                continue
            a = arith.nearest_integer(theta + other, tol)
            beta = theta - other
            norm = arith.nearest_integer(beta * beta, tol)
            if a is None or norm is None or norm <= 0:
                continue
            d, f = arith.squarefree_decomposition(norm)
            b = f if beta > 0 else -f
            if abs(theta - (a + b * math.sqrt(d)) / 2) <= tol * (1.0 + abs(theta)):
                found = (d, a, b)
                break
        if found is None:
            return Unclassified(reason=f"no quadratic conjugate for {theta!r}")
        d, a, b = found
        if d == 1 or (delta is not None and d != delta):
            return Unclassified(reason="eigenvalues lie in different quadratic fields")
        delta = d
        halves.append((a, b))
    return QuadraticField(delta=int(delta or 0), halves=tuple(halves))


def first_zero_time(
    decomp: SpectralDecomposition,
    x: np.ndarray,
    t_max: float,
    samples: int = 4000,
    tol: float = 1e-7,
) -> Optional[float]:
    """The first t in (0, t_max] with xᵀH(t)x = 0, or None if none is found."""
    x = np.asarray(x, dtype=float)
    weights = np.array([float(x @ decomp.project(r, x)) for r in range(decomp.m)])

    def amplitude(t: float) -> float:
        return float(abs(np.sum(weights * np.exp(1j * decomp.thetas * t))))

    times = np.linspace(0.0, t_max, samples + 1)[1:]
    values = np.abs(np.exp(1j * np.outer(times, decomp.thetas)) @ weights)
    step = times[1] - times[0] if len(times) > 1 else t_max
    for i in range(len(times)):
        left = values[i - 1] if i > 0 else np.inf
        right = values[i + 1] if i + 1 < len(times) else np.inf
        if values[i] <= left and values[i] <= right:
            lo = max(times[i] - step, 1e-12)
            hi = min(times[i] + step, t_max)
            res = minimize_scalar(amplitude, bounds=(lo, hi), method="bounded", options={"xatol": 1e-13})
            if res.fun <= tol:
                return float(res.x)
    return None


def density_evolution(decomp: SpectralDecomposition, d: np.ndarray, t: float) -> np.ndarray:
    """H(t) D H(-t), the walk acting on a density matrix D."""
    u = transition(decomp, t).U
    return u @ d @ u.conj().T
