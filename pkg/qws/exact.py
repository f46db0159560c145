"""Exact integer and rational linear algebra.

Characteristic polynomials (Faddeev-LeVerrier), walk matrices, fraction-free
ranks, subresultant gcds and the transfer matrix W_v W_u^{-1}. Everything here
runs on Python integers and ``fractions.Fraction`` held in object arrays, so
ranks and coprimality are decided exactly.
"""

import logging
import math
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from qws.errors import ExactArithmeticLimit, PreconditionError
from qws.graph import Graph

logger = logging.getLogger(__name__)

EXACT_LIMIT_N = 24

Number = Union[int, float, Fraction, complex]


class IntPolynomial:
    """Polynomial with arbitrary-precision integer coefficients in ascending degree."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[int]):
        c = [int(a) for a in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.coeffs: Tuple[int, ...] = tuple(c)

    @classmethod
    def x(cls) -> "IntPolynomial":
        return cls([0, 1])

    @classmethod
    def constant(cls, a: int) -> "IntPolynomial":
        return cls([a])

    @property
    def degree(self) -> int:
        """Degree, with -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def leading(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_monic(self) -> bool:
        return self.leading == 1

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            other = IntPolynomial([other])
        if not isinstance(other, IntPolynomial):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __neg__(self) -> "IntPolynomial":
        return IntPolynomial(-a for a in self.coeffs)

    def __add__(self, other: "IntPolynomial") -> "IntPolynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return IntPolynomial(x + y for x, y in zip(a, b))

    def __sub__(self, other: "IntPolynomial") -> "IntPolynomial":
        return self + (-other)

    def __mul__(self, other: Union["IntPolynomial", int]) -> "IntPolynomial":
        if isinstance(other, int):
            return IntPolynomial(a * other for a in self.coeffs)
        if self.is_zero() or other.is_zero():
            return IntPolynomial([])
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return IntPolynomial(out)

    __rmul__ = __mul__

    def shift(self, k: int) -> "IntPolynomial":
        """Multiply by x**k."""
        if self.is_zero():
            return self
        return IntPolynomial((0,) * k + self.coeffs)

    def __call__(self, x: Number) -> Number:
        result: Number = 0
        for a in reversed(self.coeffs):
            result = result * x + a
        return result

    def content(self) -> int:
        g = 0
        for a in self.coeffs:
            g = math.gcd(g, a)
        return g

    def primitive_part(self) -> "IntPolynomial":
        """Divide by the content and make the leading coefficient positive."""
        if self.is_zero():
            return self
        c = self.content()
        if self.leading < 0:
            c = -c
        return IntPolynomial(a // c for a in self.coeffs)

    def exact_div(self, k: int) -> "IntPolynomial":
        """Divide every coefficient by ``k``, which must divide them exactly."""
        out = []
        for a in self.coeffs:
            q, r = divmod(a, k)
            if r:
                raise ArithmeticError(f"{k} does not divide coefficient {a}")
            out.append(q)
        return IntPolynomial(out)

    def pseudo_remainder(self, other: "IntPolynomial") -> "IntPolynomial":
        """lc(other)**(deg self - deg other + 1) * self mod other."""
        if other.is_zero():
            raise ZeroDivisionError("pseudo-division by the zero polynomial")
        db = other.degree
        lb = other.leading
        r = self
        e = self.degree - db + 1
        while not r.is_zero() and r.degree >= db:
            s = IntPolynomial([r.leading]).shift(r.degree - db)
            r = r * lb - s * other
            e -= 1
        return r * (lb ** max(e, 0))

    def gcd(self, other: "IntPolynomial") -> "IntPolynomial":
        """Greatest common divisor by the subresultant remainder sequence.

        The result is primitive up to the gcd of the contents, with positive leading
        coefficient; monic inputs give a monic gcd.
        """
        a, b = self, other
        if a.degree < b.degree:
            a, b = b, a
        if b.is_zero():
            return a.primitive_part() * a.content() if not a.is_zero() else a
        d = math.gcd(a.content(), b.content())
        a, b = a.primitive_part(), b.primitive_part()
        g, h = 1, 1
        while True:
            delta = a.degree - b.degree
            r = a.pseudo_remainder(b)
            if r.is_zero():
                break
            if r.degree == 0:
                return IntPolynomial([d])
            a = b
            b = r.exact_div(g * h**delta)
            g = a.leading
            if delta == 0:
                pass
            elif delta == 1:
                h = g
            else:
                h = g**delta // h ** (delta - 1)
        return b.primitive_part() * d

    def __str__(self) -> str:
        terms: List[str] = []
        for k, a in enumerate(self.coeffs):
            if a == 0:
                continue
            mag = abs(a)
            if k == 0:
                body = str(mag)
            else:
                power = "x" if k == 1 else f"x^{k}"
                body = power if mag == 1 else f"{mag} {power}"
            if not terms:
                terms.append(body if a > 0 else f"-{body}")
            else:
                terms.append(f"+ {body}" if a > 0 else f"- {body}")
        return " ".join(terms) if terms else "0"

    def __repr__(self) -> str:
        return f"IntPolynomial({list(self.coeffs)})"


def _check_size(n: int) -> None:
    if n > EXACT_LIMIT_N:
        raise ExactArithmeticLimit(
            f"Exact computations are limited to {EXACT_LIMIT_N} vertices, got {n}"
        )


def integer_matrix(x: Graph, hamiltonian: str = "adjacency") -> np.ndarray:
    """The Hamiltonian as an object array of Python integers.

    Raises:
        ExactArithmeticLimit: For non-integer weights or graphs above the size cap.
    """
    _check_size(x.n)
    a = x.hamiltonian(hamiltonian)
    if not np.all(a == np.round(a)):
        raise ExactArithmeticLimit("Exact computations need integer weights")
    out = np.empty(a.shape, dtype=object)
    for idx, value in np.ndenumerate(a):
        out[idx] = int(value)
    return out


def _identity(n: int) -> np.ndarray:
    eye = np.zeros((n, n), dtype=object)
    eye[:] = 0
    for i in range(n):
        eye[i, i] = 1
    return eye


def char_poly_of_matrix(a: np.ndarray) -> IntPolynomial:
    """det(xI - A) of an integer object matrix by Faddeev-LeVerrier."""
    n = a.shape[0]
    if n == 0:
        return IntPolynomial([1])
    coeffs = [0] * (n + 1)
    coeffs[n] = 1
    eye = _identity(n)
    m = np.zeros((n, n), dtype=object)
    m[:] = 0
    for k in range(1, n + 1):
        m = a.dot(m) + eye * coeffs[n - k + 1]
        trace = sum(a.dot(m)[i, i] for i in range(n))
        q, r = divmod(-trace, k)
        if r:
            raise ArithmeticError("Faddeev-LeVerrier division was not exact")
        coeffs[n - k] = q
    return IntPolynomial(coeffs)


def char_poly(x: Graph, hamiltonian: str = "adjacency") -> IntPolynomial:
    """Characteristic polynomial φ(X, x) = det(xI - A)."""
    return char_poly_of_matrix(integer_matrix(x, hamiltonian))


def vertex_deleted_char_poly(x: Graph, u: int, hamiltonian: str = "adjacency") -> IntPolynomial:
    """φ(X∖u, x): the characteristic polynomial with row and column ``u`` removed."""
    a = integer_matrix(x, hamiltonian)
    keep = [i for i in range(x.n) if i != u]
    return char_poly_of_matrix(a[np.ix_(keep, keep)])


def walk_matrix(x: Graph, vertices: Iterable[int], hamiltonian: str = "adjacency") -> np.ndarray:
    """Columns e_S, A e_S, ..., A^{n-1} e_S for the characteristic vector e_S of a vertex set.

    Raises:
        PreconditionError: If the vertex set is empty.
    """
    s = sorted(set(int(v) for v in vertices))
    if not s:
        raise PreconditionError("walk matrix needs a non-empty vertex set")
    a = integer_matrix(x, hamiltonian)
    n = x.n
    w = np.zeros((n, n), dtype=object)
    w[:] = 0
    col = np.zeros(n, dtype=object)
    col[:] = 0
    for v in s:
        col[v] = 1
    for j in range(n):
        w[:, j] = col
        col = a.dot(col)
    return w


def bareiss_rank(m: np.ndarray) -> int:
    """Rank of an integer matrix by fraction-free Gaussian elimination."""
    rows = [list(r) for r in m]
    if not rows:
        return 0
    nrows, ncols = len(rows), len(rows[0])
    rank = 0
    prev = 1
    for col in range(ncols):
        pivot = next((r for r in range(rank, nrows) if rows[r][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        p = rows[rank][col]
        for r in range(rank + 1, nrows):
            for c in range(col + 1, ncols):
                rows[r][c] = (rows[r][c] * p - rows[rank][c] * rows[r][col]) // prev
            rows[r][col] = 0
        prev = p
        rank += 1
        if rank == nrows:
            break
    return rank


def walk_rank(x: Graph, u: int, hamiltonian: str = "adjacency") -> int:
    """Rank of the walk matrix of {u}; equals the size of the eigenvalue support of u."""
    return bareiss_rank(walk_matrix(x, [u], hamiltonian))


def is_controllable(x: Graph, u: int, hamiltonian: str = "adjacency") -> bool:
    return walk_rank(x, u, hamiltonian) == x.n


def _closed_walk_counts(x: Graph, u: int, hamiltonian: str) -> List[int]:
    a = integer_matrix(x, hamiltonian)
    col = np.zeros(x.n, dtype=object)
    col[:] = 0
    col[u] = 1
    counts = []
    for _ in range(2 * x.n - 1):
        counts.append(col[u])
        col = a.dot(col)
    return counts


def cospectral_by_walks(x: Graph, u: int, v: int, hamiltonian: str = "adjacency") -> bool:
    """W_uᵀW_u = W_vᵀW_v, i.e. (A^k)_{uu} = (A^k)_{vv} for k < 2n - 1."""
    return _closed_walk_counts(x, u, hamiltonian) == _closed_walk_counts(x, v, hamiltonian)


def cospectral_by_polynomials(x: Graph, u: int, v: int, hamiltonian: str = "adjacency") -> bool:
    """φ(X∖u) = φ(X∖v)."""
    return vertex_deleted_char_poly(x, u, hamiltonian) == vertex_deleted_char_poly(
        x, v, hamiltonian
    )


def are_cospectral(
    x: Graph, u: int, v: int, method: str = "polynomial", hamiltonian: str = "adjacency"
) -> bool:
    """Whether ``u`` and ``v`` are cospectral.

    Args:
        method: ``polynomial`` compares vertex-deleted characteristic polynomials,
            ``walk`` compares walk-matrix Gram matrices.
    """
    if u == v:
        return True
    if method == "polynomial":
        return cospectral_by_polynomials(x, u, v, hamiltonian)
    if method == "walk":
        return cospectral_by_walks(x, u, v, hamiltonian)
    raise ValueError(f"Unknown cospectrality method: {method}")


def poles_count(x: Graph, u: int, hamiltonian: str = "adjacency") -> int:
    """Number of poles of φ(X∖u, x) / φ(X, x) after cancelling common factors."""
    phi = char_poly(x, hamiltonian)
    deleted = vertex_deleted_char_poly(x, u, hamiltonian)
    return phi.degree - phi.gcd(deleted).degree


def _inverse(m: np.ndarray) -> Optional[np.ndarray]:
    """Gauss-Jordan inverse over the rationals, or None if singular."""
    n = m.shape[0]
    aug = [[Fraction(m[i, j]) for j in range(n)] + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            return None
        aug[col], aug[pivot] = aug[pivot], aug[col]
        p = aug[col][col]
        aug[col] = [value / p for value in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    out = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            out[i, j] = aug[i][n + j]
    return out


def transfer_orthogonal(x: Graph, u: int, v: int, hamiltonian: str = "adjacency") -> np.ndarray:
    """Q = W_v W_u^{-1} as an object array of Fractions.

    Q is a polynomial in A; for cospectral ``u`` and ``v`` it is orthogonal,
    symmetric and maps e_u to e_v.

    Raises:
        PreconditionError: If ``u`` or ``v`` is not controllable.
    """
    wu = walk_matrix(x, [u], hamiltonian)
    wv = walk_matrix(x, [v], hamiltonian)
    if bareiss_rank(wv) != x.n:
        raise PreconditionError(f"Vertex {v} is not controllable")
    inv = _inverse(wu)
    if inv is None:
        raise PreconditionError(f"Vertex {u} is not controllable")
    return wv.dot(inv)


def path_char_poly(n: int) -> IntPolynomial:
    """φ(P_n) from φ(P_{n+1}) = x φ(P_n) - φ(P_{n-1}), with φ(P_0) = 1."""
    if n < 0:
        raise ValueError(f"path length must be non-negative, got {n}")
    prev, cur = IntPolynomial([1]), IntPolynomial([0, 1])
    if n == 0:
        return prev
    for _ in range(n - 1):
        prev, cur = cur, cur.shift(1) - prev
    return cur


def path_char_poly_gcd(m: int, n: int) -> IntPolynomial:
    """gcd(φ(P_m), φ(P_n)).

    It is non-trivial exactly when m + 1 and n + 1 share a factor, and equals
    φ(P_m) exactly when m + 1 divides n + 1.
    """
    return path_char_poly(m).gcd(path_char_poly(n))


def sign_changes(values: Sequence[float], tol: float = 1e-9) -> int:
    """Count sign changes, where a zero entry between opposite signs also counts once."""
    scale = max((abs(v) for v in values), default=1.0) or 1.0
    signs = [0 if abs(v) <= tol * scale else (1 if v > 0 else -1) for v in values]
    count = 0
    for r in range(1, len(signs)):
        if signs[r - 1] * signs[r] < 0:
            count += 1
        elif signs[r] == 0 and r + 1 < len(signs) and signs[r - 1] * signs[r + 1] < 0:
            count += 1
    return count
