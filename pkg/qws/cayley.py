"""Cubelike graphs (Cayley graphs of Z_2^d), circulants and their binary codes."""

import functools
import itertools
import logging
import math
import re
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from qws import transfer
from qws.config import AnalysisConfig
from qws.errors import GraphError, GraphParseError
from qws.graph import Graph
from qws.transfer import PstCertificate, Reason, Refutation

logger = logging.getLogger(__name__)

# Above this many vertices cubelike analyses use character sums instead of a dense eigensolve.
DENSE_LIMIT = 64
ROW_SPACE_LIMIT_D = 20
QUARTER_SEARCH_TRIALS = 4000

_CUBELIKE_RE = re.compile(r"^cubelike:d=(\d+);C=([01,]*)$")
_CIRCULANT_RE = re.compile(r"^circulant:n=(\d+);C=([\d,]*)$")


def popcount(x: int) -> int:
    return bin(x).count("1")


@dataclass(frozen=True)
class CubelikeSpec:
    """Connection set C of d-bit vectors; bit strings are read most significant bit first."""

    d: int
    C: Tuple[int, ...]

    def __post_init__(self) -> None:
        if self.d < 1:
            raise GraphError(f"cubelike dimension must be positive, got {self.d}")
        c = tuple(sorted(int(v) for v in self.C))
        if len(set(c)) != len(c):
            raise GraphError("cubelike connection set has repeated elements")
        if any(not 0 < v < (1 << self.d) for v in c):
            raise GraphError(f"cubelike connection set must hold nonzero {self.d}-bit vectors")
        object.__setattr__(self, "C", c)

    @property
    def n(self) -> int:
        return 1 << self.d

    @property
    def sigma(self) -> int:
        """Bitwise sum of the connection set."""
        s = 0
        for c in self.C:
            s ^= c
        return s

    def bits(self, v: int) -> str:
        return format(v, f"0{self.d}b")

    def code(self) -> "BinaryCode":
        return BinaryCode.from_spec(self)


@dataclass(frozen=True)
class CirculantSpec:
    """Inverse-closed connection set C in Z_n."""

    n: int
    C: Tuple[int, ...]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise GraphError(f"circulant order must be positive, got {self.n}")
        c = tuple(sorted(set(int(v) % self.n for v in self.C)))
        if 0 in c:
            raise GraphError("circulant connection set must not contain 0")
        if set(c) != {(-v) % self.n for v in c}:
            raise GraphError("circulant connection set must be closed under negation")
        object.__setattr__(self, "C", c)


CayleySpec = Union[CubelikeSpec, CirculantSpec]


@dataclass(frozen=True)
class BinaryCode:
    """Row space of the d × |C| matrix whose columns are the connection set.

    Rows are stored as bitmasks over the columns.
    """

    d: int
    m: int
    rows: Tuple[int, ...]

    @classmethod
    def from_spec(cls, spec: CubelikeSpec) -> "BinaryCode":
        rows = []
        for i in range(spec.d):
            bit = spec.d - 1 - i
            row = 0
            for j, c in enumerate(spec.C):
                if (c >> bit) & 1:
                    row |= 1 << j
            rows.append(row)
        return cls(d=spec.d, m=len(spec.C), rows=tuple(rows))

    def matrix(self) -> np.ndarray:
        """The d × m GF(2) matrix as a 0/1 integer array."""
        return np.array([[(row >> j) & 1 for j in range(self.m)] for row in self.rows], dtype=int)

    def is_even(self) -> bool:
        """M·1 = 0: every row, hence every codeword, has even weight."""
        return all(popcount(r) % 2 == 0 for r in self.rows)

    def is_self_orthogonal(self) -> bool:
        """M Mᵀ = 0 over GF(2)."""
        return all(
            popcount(self.rows[i] & self.rows[j]) % 2 == 0
            for i in range(self.d)
            for j in range(i, self.d)
        )

    def words(self) -> Iterator[int]:
        """Every row-space word (with repetition if the rows are dependent)."""
        if self.d > ROW_SPACE_LIMIT_D:
            raise GraphError(f"row space enumeration is limited to d <= {ROW_SPACE_LIMIT_D}")
        for mask in range(1 << self.d):
            word = 0
            for i in range(self.d):
                if (mask >> i) & 1:
                    word ^= self.rows[i]
            yield word

    def is_doubly_even(self) -> bool:
        return all(popcount(w) % 4 == 0 for w in self.words())

    def quarter_period_target(self) -> int:
        """The vector with coordinate i equal to (weight of row i) / 2 mod 2."""
        target = 0
        for i, row in enumerate(self.rows):
            if (popcount(row) // 2) % 2:
                target |= 1 << (self.d - 1 - i)
        return target


def quarter_period_target(code: BinaryCode) -> Optional[int]:
    """Partner of 0 at time π/4 for an even, self-orthogonal, not doubly even code, else None."""
    if not (code.is_even() and code.is_self_orthogonal()) or code.is_doubly_even():
        return None
    return code.quarter_period_target()


def cubelike_graph(spec: CubelikeSpec) -> Graph:
    n = spec.n
    w = np.zeros((n, n))
    for x in range(n):
        for c in spec.C:
            w[x, x ^ c] = 1.0
    return Graph(w, meta=format_spec(spec))


def circulant_graph(spec: CirculantSpec) -> Graph:
    n = spec.n
    w = np.zeros((n, n))
    for x in range(n):
        for c in spec.C:
            w[x, (x + c) % n] = 1.0
    return Graph(w, meta=format_spec(spec))


def walsh_hadamard(values: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform in Sylvester order.

    ``out[a] = sum over c of (-1)^(a·c) values[c]``, computed with log2(n)
    butterfly passes over a copy of ``values``; the length must be a power of two.
    """
    out = np.array(values, copy=True)
    n = out.shape[0]
    if n & (n - 1):
        raise GraphError(f"Walsh-Hadamard transform needs a power-of-two length, got {n}")
    h = 1
    while h < n:
        pairs = out.reshape(-1, 2, h)
        low = pairs[:, 0, :].copy()
        high = pairs[:, 1, :]
        pairs[:, 0, :] += high
        pairs[:, 1, :] = low - high
        h *= 2
    return out


def cubelike_eigenvalues(spec: CubelikeSpec) -> np.ndarray:
    """λ_a = sum over c in C of (-1)^(a·c), indexed by a."""
    indicator = np.zeros(spec.n)
    indicator[list(spec.C)] = 1.0
    return walsh_hadamard(indicator)


def cubelike_transition_column(spec: CubelikeSpec, t: float, vertex: int = 0) -> np.ndarray:
    """H(t) e_vertex by a Walsh-Hadamard transform of exp(i t λ)."""
    col0 = walsh_hadamard(np.exp(1j * t * cubelike_eigenvalues(spec))) / spec.n
    if vertex == 0:
        return col0
    idx = np.arange(spec.n) ^ vertex
    return col0[idx]


def _character_certificate(
    spec: CubelikeSpec, target: int, tau: float, cfg: AnalysisConfig
) -> Optional[PstCertificate]:
    """Certificate 0 -> target at tau from character sums, without a dense eigensolve."""
    col = cubelike_transition_column(spec, tau)
    amp = col[target]
    if abs(amp) < 1 - cfg.fidelity_tol:
        return None
    gamma = complex(amp / abs(amp))
    expected = np.zeros(spec.n, dtype=complex)
    expected[target] = gamma
    residual = float(np.linalg.norm(col - expected))
    if residual > cfg.certificate_tol:
        return None
    lam = np.rint(cubelike_eigenvalues(spec)).astype(int)
    chars = np.array([(-1) ** popcount(a & target) for a in range(spec.n)])
    signs: Dict[int, int] = {}
    for value, sign in zip(lam, chars):
        if signs.setdefault(int(value), int(sign)) != sign:
            return None
    thetas = sorted(signs, reverse=True)
    for theta in thetas:
        if abs(gamma * signs[theta] - np.exp(1j * tau * theta)) > cfg.certificate_tol:
            return None
    return PstCertificate(
        u=0,
        v=target,
        tau=float(tau),
        gamma=gamma,
        signs=tuple(signs[t] for t in thetas),
        fidelity_residual=residual,
        sigma_u=2 * tau,
        support=tuple(range(len(thetas))),
    )


@dataclass
class CayleyVerdict:
    """Closed-form verdict on a Cayley graph, together with its numeric confirmation.

    ``closed_form`` is None when no closed-form rule applies; ``numeric`` is None
    when no independent dense evaluation was made.
    """

    spec: str
    rule: str
    certificate: Optional[PstCertificate] = None
    refutation: Optional[Refutation] = None
    closed_form: Optional[bool] = None
    numeric: Optional[bool] = None

    @property
    def has_pst(self) -> bool:
        return self.certificate is not None

    @property
    def agrees(self) -> bool:
        return self.closed_form is None or self.numeric is None or self.closed_form == self.numeric


def _decide(
    x: Graph, u: int, v: Optional[int], cfg: AnalysisConfig, full: bool
) -> Tuple[Optional[PstCertificate], Optional[Refutation]]:
    """Numeric verdict from ``u`` (to ``v`` if given); ``full`` runs every filter."""
    if full:
        verdict = transfer.find_pst(x, u, cfg) if v is None else transfer.check_pst(x, u, v, cfg)
        if isinstance(verdict, PstCertificate):
            return verdict, None
        return None, verdict
    cert = transfer.numeric_pst(x, u, cfg)
    if cert is not None and (v is None or cert.v == v):
        return cert, None
    return None, Refutation(u=u, v=v, reasons=[Reason.NUMERIC_FIDELITY_BELOW_THRESHOLD])


def _failed(v: int) -> Refutation:
    return Refutation(u=0, v=v, reasons=[Reason.NUMERIC_FIDELITY_BELOW_THRESHOLD])


def _dense_partner(spec: CubelikeSpec, cfg: AnalysisConfig) -> Optional[int]:
    cert = transfer.numeric_pst(cubelike_graph(spec), 0, cfg)
    return None if cert is None else cert.v


def cubelike_pst(
    spec: CubelikeSpec, config: Optional[AnalysisConfig] = None, full: bool = True
) -> CayleyVerdict:
    """PST from 0 on a cubelike graph.

    A nonzero sum σ of the connection set gives transfer 0 -> σ at π/2 with phase
    i^|C|. When σ = 0, an even, self-orthogonal, not doubly even code gives transfer
    at π/4; otherwise the general numeric pipeline decides. Closed-form verdicts
    are certified through character sums and, up to 64 vertices, compared with a
    dense evaluation.
    """
    cfg = config if config is not None else AnalysisConfig()
    name = format_spec(spec)
    sigma = spec.sigma
    target: Optional[int] = sigma or None
    rule, tau = "sigma", math.pi / 2
    if target is None:
        target = quarter_period_target(spec.code())
        rule, tau = "quarter", math.pi / 4

    if target is not None:
        cert = _character_certificate(spec, target, tau, cfg)
        if cert is None:
            logger.warning("%s: closed-form transfer to %s failed verification", name, spec.bits(target))
        numeric: Optional[bool] = None
        if spec.n <= DENSE_LIMIT:
            numeric = _dense_partner(spec, cfg) == target
        return CayleyVerdict(
            spec=name,
            rule=rule,
            certificate=cert,
            refutation=None if cert else _failed(target),
            closed_form=True,
            numeric=numeric,
        )

    if spec.n > 1 << 10:
        return CayleyVerdict(spec=name, rule="undecided")
    cert, refutation = _decide(cubelike_graph(spec), 0, None, cfg, full)
    return CayleyVerdict(
        spec=name, rule="numeric", certificate=cert, refutation=refutation, numeric=cert is not None
    )


def circulant_eigenvalues(spec: CirculantSpec) -> np.ndarray:
    """λ_s = sum over x in C of cos(2π s x / n) for s = 0..n-1."""
    if not spec.C:
        return np.zeros(spec.n)
    s = np.arange(spec.n)[:, None]
    c = np.array(spec.C, dtype=float)[None, :]
    values = np.exp(2j * np.pi * s * c / spec.n).sum(axis=1)
    if np.max(np.abs(values.imag)) > 1e-10:
        raise GraphError("circulant eigenvalues are not real; connection set not inverse-closed")
    return values.real


def order_classes(n: int) -> Dict[int, Tuple[int, ...]]:
    """Nonzero elements of Z_n grouped by gcd with n, i.e. by additive order."""
    classes: Dict[int, List[int]] = {}
    for x in range(1, n):
        classes.setdefault(math.gcd(x, n), []).append(x)
    return {g: tuple(v) for g, v in classes.items()}


def circulant_is_integral(spec: CirculantSpec) -> bool:
    """Integral eigenvalues iff C is a union of order classes."""
    members = set(spec.C)
    for cls in order_classes(spec.n).values():
        hit = members.intersection(cls)
        if hit and len(hit) != len(cls):
            return False
    return True


def circulant_pst_pair(
    spec: CirculantSpec, config: Optional[AnalysisConfig] = None, full: bool = True
) -> CayleyVerdict:
    """PST on a circulant can only send 0 to n/2; odd n and n ≡ 2 (mod 4) are ruled out.

    Squarefree n is covered by those two cases.

    The second rule only holds for connected circulants on more than two
    vertices: Z_6 with C = {3} is three copies of K2.

    Every closed-form refutation is cross-checked numerically. With ``full`` the
    pair (0, n/2) goes through every necessary-condition filter, otherwise only
    the spectral evaluation is made.
    """
    cfg = config if config is not None else AnalysisConfig()
    name = format_spec(spec)
    x = circulant_graph(spec)
    n = spec.n
    connected = functools.reduce(math.gcd, spec.C, n) == 1
    if n % 2 == 1 or (n % 4 == 2 and n > 2 and connected):
        rule = "odd" if n % 2 else "two-mod-four"
        cert, refutation = _decide(x, 0, None, cfg, full)
        if cert is not None:
            logger.warning("%s: numeric PST contradicts the %s rule", name, rule)
        return CayleyVerdict(
            spec=name,
            rule=rule,
            certificate=cert,
            refutation=refutation,
            closed_form=False,
            numeric=cert is not None,
        )
    cert, refutation = _decide(x, 0, n // 2, cfg, full)
    return CayleyVerdict(
        spec=name, rule="antipodal", certificate=cert, refutation=refutation, numeric=cert is not None
    )


def parse_cayley_spec(text: str) -> CayleySpec:
    """Parse ``cubelike:d=3;C=100,010,001`` or ``circulant:n=8;C=1,3,5,7``."""
    text = text.strip()
    match = _CUBELIKE_RE.match(text)
    if match:
        d = int(match.group(1))
        items = [s for s in match.group(2).split(",") if s]
        if any(len(s) != d for s in items):
            raise GraphParseError(f"cubelike vectors must have {d} bits: {text!r}")
        return CubelikeSpec(d=d, C=tuple(int(s, 2) for s in items))
    match = _CIRCULANT_RE.match(text)
    if match:
        n = int(match.group(1))
        items = [s for s in match.group(2).split(",") if s]
        return CirculantSpec(n=n, C=tuple(int(s) for s in items))
    raise GraphParseError(f"Not a Cayley graph spec: {text!r}")


def format_spec(spec: CayleySpec) -> str:
    if isinstance(spec, CubelikeSpec):
        return f"cubelike:d={spec.d};C=" + ",".join(spec.bits(c) for c in spec.C)
    return f"circulant:n={spec.n};C=" + ",".join(str(c) for c in spec.C)


def graph_from_spec_string(text: str) -> Graph:
    spec = parse_cayley_spec(text)
    if isinstance(spec, CubelikeSpec):
        return cubelike_graph(spec)
    return circulant_graph(spec)


def _permute_bits(v: int, perm: Sequence[int], d: int) -> int:
    out = 0
    for i, p in enumerate(perm):
        if (v >> i) & 1:
            out |= 1 << p
    return out


def _is_canonical(spec: CubelikeSpec, perms: Sequence[Tuple[int, ...]]) -> bool:
    for perm in perms:
        image = tuple(sorted(_permute_bits(c, perm, spec.d) for c in spec.C))
        if image < spec.C:
            return False
    return True


def enumerate_cubelike(d: int, dedup: bool = False) -> Iterator[CubelikeSpec]:
    """Every non-empty connection set in Z_2^d, in increasing subset-mask order.

    With ``dedup`` only the lexicographically least set in each coordinate
    permutation class is yielded.
    """
    vectors = list(range(1, 1 << d))
    perms = list(itertools.permutations(range(d))) if dedup else []
    for mask in range(1, 1 << len(vectors)):
        c = tuple(v for i, v in enumerate(vectors) if (mask >> i) & 1)
        spec = CubelikeSpec(d=d, C=c)
        if dedup and not _is_canonical(spec, perms):
            continue
        yield spec


def enumerate_circulants(n: int) -> Iterator[CirculantSpec]:
    """Every non-empty inverse-closed connection set in Z_n."""
    pairs = [tuple(sorted({x, n - x})) for x in range(1, n // 2 + 1)]
    for mask in range(1, 1 << len(pairs)):
        c: List[int] = []
        for i, pair in enumerate(pairs):
            if (mask >> i) & 1:
                c.extend(pair)
        yield CirculantSpec(n=n, C=tuple(c))


def _gf2_nullspace(rows: List[np.ndarray], m: int) -> List[np.ndarray]:
    """Basis of {x in GF(2)^m : r·x = 0 for every r in rows}."""
    if not rows:
        return [np.eye(m, dtype=np.uint8)[i] for i in range(m)]
    a = np.array(rows, dtype=np.uint8) % 2
    pivots: List[int] = []
    r = 0
    for col in range(m):
        pivot = next((i for i in range(r, a.shape[0]) if a[i, col]), None)
        if pivot is None:
            continue
        a[[r, pivot]] = a[[pivot, r]]
        for i in range(a.shape[0]):
            if i != r and a[i, col]:
                a[i] ^= a[r]
        pivots.append(col)
        r += 1
        if r == a.shape[0]:
            break
    free = [c for c in range(m) if c not in pivots]
    basis = []
    for f in free:
        x = np.zeros(m, dtype=np.uint8)
        x[f] = 1
        for i, p in enumerate(pivots):
            x[p] = a[i, f]
        basis.append(x)
    return basis


def _random_self_orthogonal_spec(d: int, rng: np.random.Generator) -> Optional[CubelikeSpec]:
    """Rows drawn one by one from the space orthogonal to 1 and to the earlier rows."""
    m = int(rng.integers(2 * d, min(1 << d, 4 * d + 1)))
    rows: List[np.ndarray] = []
    for _ in range(d):
        basis = _gf2_nullspace(rows + [np.ones(m, dtype=np.uint8)], m)
        if not basis:
            return None
        coeffs = rng.integers(0, 2, size=len(basis))
        row = np.zeros(m, dtype=np.uint8)
        for c, b in zip(coeffs, basis):
            if c:
                row ^= b
        rows.append(row)
    columns = []
    for j in range(m):
        v = 0
        for i in range(d):
            v = (v << 1) | int(rows[i][j])
        columns.append(v)
    if 0 in columns or len(set(columns)) != m:
        return None
    return CubelikeSpec(d=d, C=tuple(columns))


def search_quarter_period_code(
    max_d: int = 8, seed: int = 0, trials: int = QUARTER_SEARCH_TRIALS
) -> Optional[CubelikeSpec]:
    """Find a connection set whose code is even, self-orthogonal and not doubly even.

    Every connection set is tried for d <= 4; for 5 <= d <= max_d random
    self-orthogonal generator matrices are drawn from a seeded generator.
    """
    for d in range(1, min(max_d, 4) + 1):
        for spec in enumerate_cubelike(d):
            if quarter_period_target(spec.code()) is not None:
                return spec
    rng = np.random.default_rng(seed)
    for d in range(5, max_d + 1):
        for _ in range(trials):
            spec = _random_self_orthogonal_spec(d, rng)
            if spec is not None and quarter_period_target(spec.code()) is not None:
                logger.info("found quarter-period code at d=%d with |C|=%d", d, len(spec.C))
                return spec
    return None


def pst_translation(cert: PstCertificate, spec: CayleySpec) -> Optional[int]:
    """The group element c with cert.v = cert.u + c, if c has order at most 2."""
    if isinstance(spec, CubelikeSpec):
        return cert.u ^ cert.v
    c = (cert.v - cert.u) % spec.n
    return c if (2 * c) % spec.n == 0 else None


def cayley_analysis(
    spec: CayleySpec, config: Optional[AnalysisConfig] = None, full: bool = True
) -> CayleyVerdict:
    if isinstance(spec, CubelikeSpec):
        return cubelike_pst(spec, config, full)
    return circulant_pst_pair(spec, config, full)
