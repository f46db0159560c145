"""Periodicity, perfect state transfer and pretty good state transfer.

Perfect state transfer from u is decided at one candidate time: if the walk is
periodic at u with minimum period σ_u, the only possible transfer time is σ_u / 2,
so ``find_pst`` evaluates H(σ_u / 2) e_u once instead of searching over t.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import minimize_scalar

from qws import arith, exact, partition, spectral
from qws.config import AnalysisConfig
from qws.errors import ExactArithmeticLimit, PreconditionError, SearchBudgetExceeded
from qws.graph import Graph
from qws.spectral import (
    AllIntegers,
    EigenvalueClass,
    QuadraticField,
    SpectralDecomposition,
    Unclassified,
)

logger = logging.getLogger(__name__)

PGST_REFINE_PEAKS = 32


class Reason(str, Enum):
    """Tags for failed necessary conditions, in the order they are evaluated."""

    NOT_COSPECTRAL = "NotCospectral"
    SUPPORT_MISMATCH = "SupportMismatch"
    SIGN_CONDITION_FAILS = "SignConditionFails"
    CONTROLLABLE_PAIR = "ControllablePair"
    DISTANCE_PARTITION_MISMATCH = "DistancePartitionMismatch"
    STABILIZER_MISMATCH = "StabilizerMismatch"
    BIPARTITE_RADIUS_NOT_SQRT_INT = "BipartiteRadiusNotSqrtInt"
    RATIO_CONDITION_FAILS = "RatioConditionFails"
    NOT_PERIODIC_AT_U = "NotPeriodicAtU"
    NUMERIC_FIDELITY_BELOW_THRESHOLD = "NumericFidelityBelowThreshold"


@dataclass
class PeriodicityReport:
    vertex: Optional[int]
    periodic: bool
    min_period: Optional[float]
    eigenvalue_class: EigenvalueClass
    ratio_condition_holds: bool
    support: Tuple[int, ...] = ()
    inconsistent: bool = False

    def to_dict(self) -> Dict:
        return {
            "vertex": self.vertex,
            "periodic": self.periodic,
            "min_period": self.min_period,
            "ratio_condition": self.ratio_condition_holds,
            "eigenvalue_class": self.eigenvalue_class.to_dict(),
            "inconsistent": self.inconsistent,
        }


@dataclass
class PstCertificate:
    """Perfect state transfer from u to v: H(tau) e_u = gamma e_v."""

    u: int
    v: int
    tau: float
    gamma: complex
    signs: Tuple[int, ...]
    fidelity_residual: float
    sigma_u: Optional[float] = None
    support: Tuple[int, ...] = ()

    def reversed(self) -> "PstCertificate":
        return PstCertificate(
            u=self.v,
            v=self.u,
            tau=self.tau,
            gamma=self.gamma,
            signs=self.signs,
            fidelity_residual=self.fidelity_residual,
            sigma_u=self.sigma_u,
            support=self.support,
        )


@dataclass
class Refutation:
    u: int
    v: Optional[int]
    reasons: List[Reason] = field(default_factory=list)
    sigma_u: Optional[float] = None

    def add(self, reason: Reason) -> None:
        if reason not in self.reasons:
            self.reasons.append(reason)

    @property
    def tags(self) -> List[str]:
        return [r.value for r in self.reasons]


Verdict = Union[PstCertificate, Refutation]


def _config(config: Optional[AnalysisConfig]) -> AnalysisConfig:
    return config if config is not None else AnalysisConfig()


def _decompose(x: Graph, cfg: AnalysisConfig, decomp: Optional[SpectralDecomposition]) -> SpectralDecomposition:
    if decomp is not None:
        return decomp
    return spectral.decompose(x, cfg.hamiltonian, cfg.cluster_tol)


def ratio_condition(
    decomp: SpectralDecomposition,
    support: Sequence[int],
    max_denominator: int = 10**6,
    tol: float = 1e-8,
) -> bool:
    """Whether every ratio of eigenvalue differences over the support is rational.

    A ratio counts as rational only if it is within ``tol / q**2`` of a fraction
    with denominator q at most ``max_denominator``.
    """
    thetas = [float(decomp.thetas[r]) for r in support]
    if len(thetas) <= 2:
        return True
    top, bottom = max(thetas), min(thetas)
    span = top - bottom
    for theta in thetas:
        if arith.rationalize((top - theta) / span, max_denominator, tol, scaled=True) is None:
            return False
    return True


def _period(decomp: SpectralDecomposition, support: Sequence[int], cfg: AnalysisConfig) -> Optional[float]:
    thetas = [float(decomp.thetas[r]) for r in support]
    top = max(thetas)
    g = arith.real_gcd([top - t for t in thetas], cfg.max_denominator, 1e-8, scaled=True)
    if g is None:
        return None
    return 2 * math.pi / g


def _is_integral_hamiltonian(x: Graph, hamiltonian: str) -> bool:
    a = x.hamiltonian(hamiltonian)
    return bool(np.all(a == np.round(a)))


def _classify(x: Graph, decomp: SpectralDecomposition, support: Sequence[int]) -> EigenvalueClass:
    graph = x if _is_integral_hamiltonian(x, decomp.hamiltonian) else None
    return spectral.classify_eigenvalues(decomp, support, graph=graph)


def _ratio_holds(
    x: Graph,
    decomp: SpectralDecomposition,
    support: Sequence[int],
    cls: EigenvalueClass,
    cfg: AnalysisConfig,
) -> bool:
    """The ratio condition over ``support``.

    For an integer Hamiltonian it is read off the eigenvalue class: the support
    must consist of integers, or of quadratic integers (a + b_r √Δ) / 2 sharing
    one a. Rational reconstruction of the ratios is used for non-integer weights only.
    """
    if len(support) <= 2:
        return True
    if _is_integral_hamiltonian(x, decomp.hamiltonian):
        if isinstance(cls, AllIntegers):
            return True
        if isinstance(cls, QuadraticField):
            return cls.common_a() is not None
        return False
    return ratio_condition(decomp, support, cfg.max_denominator, 1e-8)


def _periodicity(
    x: Graph,
    decomp: SpectralDecomposition,
    support: Tuple[int, ...],
    vertex: Optional[int],
    cfg: AnalysisConfig,
) -> PeriodicityReport:
    cls = _classify(x, decomp, support)
    holds = _ratio_holds(x, decomp, support, cls, cfg)
    report = PeriodicityReport(
        vertex=vertex,
        periodic=False,
        min_period=None,
        eigenvalue_class=cls,
        ratio_condition_holds=holds,
        support=support,
    )
    if not holds:
        return report
    if len(support) == 1:
        report.periodic = True
        return report
    sigma = _period(decomp, support, cfg)
    if sigma is None:
        report.inconsistent = True
        return report
    u_sigma = spectral.transition(decomp, sigma).U
    if vertex is None:
        moduli = np.abs(np.diag(u_sigma))
    else:
        moduli = np.array([abs(u_sigma[vertex, vertex])])
    if np.all(moduli >= 1 - cfg.fidelity_tol):
        report.periodic = True
        report.min_period = sigma
    else:
        logger.warning("period %.12g failed numeric verification (min modulus %.3g)", sigma, moduli.min())
        report.inconsistent = True
    return report


def is_periodic_at(
    x: Graph,
    u: int,
    config: Optional[AnalysisConfig] = None,
    decomp: Optional[SpectralDecomposition] = None,
) -> PeriodicityReport:
    """Periodicity of the walk at vertex ``u`` with its minimum period."""
    cfg = _config(config)
    decomp = _decompose(x, cfg, decomp)
    support = spectral.vertex_support(decomp, u, cfg.support_tol)
    return _periodicity(x, decomp, support, u, cfg)


def is_periodic_graph(
    x: Graph,
    config: Optional[AnalysisConfig] = None,
    decomp: Optional[SpectralDecomposition] = None,
) -> PeriodicityReport:
    """Periodicity at every vertex simultaneously, using the whole spectrum."""
    cfg = _config(config)
    decomp = _decompose(x, cfg, decomp)
    support = tuple(range(decomp.m))
    return _periodicity(x, decomp, support, None, cfg)


def min_period_lower_bounds(decomp: SpectralDecomposition, support: Sequence[int]) -> Tuple[float, float]:
    """(π / (θ_max - θ_min), 2π / (θ_max - θ_min)) over the support.

    The first is a lower bound on the first zero of xᵀH(t)x, the second on the
    minimum period at a vertex. Both are infinite for a single eigenvalue.
    """
    thetas = [float(decomp.thetas[r]) for r in support]
    span = max(thetas) - min(thetas)
    if span <= 0:
        return math.inf, math.inf
    return math.pi / span, 2 * math.pi / span


def _sign_pattern(
    decomp: SpectralDecomposition, u: int, v: int, support: Sequence[int], tol: float
) -> Optional[Tuple[int, ...]]:
    """Signs s_r with E_r e_u = s_r E_r e_v, or None if some r has neither sign."""
    eu = decomp.vertex_projections(u)
    ev = decomp.vertex_projections(v)
    signs = []
    for r in support:
        if np.max(np.abs(eu[r] - ev[r])) <= tol:
            signs.append(1)
        elif np.max(np.abs(eu[r] + ev[r])) <= tol:
            signs.append(-1)
        else:
            return None
    return tuple(signs)


def build_certificate(
    decomp: SpectralDecomposition,
    u: int,
    v: int,
    tau: float,
    config: Optional[AnalysisConfig] = None,
    sigma_u: Optional[float] = None,
) -> Optional[PstCertificate]:
    """Certificate for transfer from ``u`` to ``v`` at a known time, or None if it does not hold.

    The phase γ is read from H(tau)_{v,u}; every support index must satisfy
    γ s_r = exp(i tau θ_r) within the certificate tolerance.
    """
    cfg = _config(config)
    col = spectral.transition_column(decomp, u, tau)
    amp = col[v]
    if abs(amp) < 1 - cfg.fidelity_tol:
        return None
    gamma = complex(amp / abs(amp))
    target = np.zeros(decomp.n, dtype=complex)
    target[v] = gamma
    residual = float(np.linalg.norm(col - target))
    if residual > cfg.certificate_tol:
        return None
    support = spectral.vertex_support(decomp, u, cfg.support_tol)
    signs = _sign_pattern(decomp, u, v, support, math.sqrt(cfg.certificate_tol))
    if signs is None:
        logger.warning("transfer %d->%d at %.12g has no consistent sign pattern", u, v, tau)
        return None
    for r, s in zip(support, signs):
        if abs(gamma * s - np.exp(1j * tau * decomp.thetas[r])) > cfg.certificate_tol:
            logger.warning("phase equation fails at eigenvalue %.12g", decomp.thetas[r])
            return None
    return PstCertificate(
        u=u,
        v=v,
        tau=float(tau),
        gamma=gamma,
        signs=signs,
        fidelity_residual=residual,
        sigma_u=sigma_u,
        support=support,
    )


def _spectral_filters(
    x: Graph,
    decomp: SpectralDecomposition,
    u: int,
    cls: EigenvalueClass,
    refutation: Refutation,
) -> None:
    """Arithmetic filters that only apply to integer Hamiltonians."""
    if not _is_integral_hamiltonian(x, decomp.hamiltonian):
        return
    if isinstance(cls, Unclassified):
        refutation.add(Reason.RATIO_CONDITION_FAILS)
    if decomp.hamiltonian == "adjacency" and x.is_bipartite():
        support = spectral.vertex_support(decomp, u)
        top = max(float(decomp.thetas[r]) for r in support)
        if arith.nearest_integer(top * top, 1e-8) is None:
            refutation.add(Reason.BIPARTITE_RADIUS_NOT_SQRT_INT)


def find_pst(
    x: Graph,
    u: int,
    config: Optional[AnalysisConfig] = None,
    decomp: Optional[SpectralDecomposition] = None,
) -> Verdict:
    """Find the perfect state transfer partner of ``u``, if any.

    Returns:
        A PstCertificate, or a Refutation listing every failed condition.
    """
    cfg = _config(config)
    decomp = _decompose(x, cfg, decomp)
    support = spectral.vertex_support(decomp, u, cfg.support_tol)
    refutation = Refutation(u=u, v=None)
    report = _periodicity(x, decomp, support, u, cfg)
    _spectral_filters(x, decomp, u, report.eigenvalue_class, refutation)
    from_u = partition.coarsest_equitable_refinement(
        x, partition.VertexPartition.isolating(x.n, u), decomp.hamiltonian
    )
    if not any(len(cell) == 1 and cell[0] != u for cell in from_u.cells):
        refutation.add(Reason.DISTANCE_PARTITION_MISMATCH)
    if not report.ratio_condition_holds:
        refutation.add(Reason.RATIO_CONDITION_FAILS)
        refutation.add(Reason.NOT_PERIODIC_AT_U)
        return refutation
    if not report.periodic or report.min_period is None:
        if not report.periodic:
            refutation.add(Reason.NOT_PERIODIC_AT_U)
        refutation.add(Reason.NUMERIC_FIDELITY_BELOW_THRESHOLD)
        return refutation
    sigma = report.min_period
    refutation.sigma_u = sigma
    col = np.abs(spectral.transition_column(decomp, u, sigma / 2))
    col[u] = 0.0
    partners = [int(v) for v in np.flatnonzero(col >= 1 - cfg.fidelity_tol)]
    logger.debug("vertex %d: sigma=%.12g, partners at sigma/2: %s", u, sigma, partners)
    if len(partners) == 1:
        cert = build_certificate(decomp, u, partners[0], sigma / 2, cfg, sigma_u=sigma)
        if cert is not None:
            if refutation.reasons:
                logger.warning("PST %d->%d found despite failed filters %s", u, cert.v, refutation.tags)
            return cert
    refutation.add(Reason.NUMERIC_FIDELITY_BELOW_THRESHOLD)
    return refutation


def numeric_pst(
    x: Graph,
    u: int,
    config: Optional[AnalysisConfig] = None,
    decomp: Optional[SpectralDecomposition] = None,
) -> Optional[PstCertificate]:
    """The transfer partner of ``u`` from the spectrum alone, skipping every filter.

    Used to cross-check closed-form verdicts in bulk; ``find_pst`` is the full decision.
    """
    cfg = _config(config)
    decomp = _decompose(x, cfg, decomp)
    support = spectral.vertex_support(decomp, u, cfg.support_tol)
    if len(support) < 2:
        return None
    cls: EigenvalueClass = Unclassified()
    if _is_integral_hamiltonian(x, decomp.hamiltonian):
        # classified without the exact characteristic polynomial
        cls = spectral.classify_eigenvalues(decomp, support)
    if not _ratio_holds(x, decomp, support, cls, cfg):
        return None
    sigma = _period(decomp, support, cfg)
    if sigma is None:
        return None
    col = np.abs(spectral.transition_column(decomp, u, sigma / 2))
    col[u] = 0.0
    partners = np.flatnonzero(col >= 1 - cfg.fidelity_tol)
    if len(partners) != 1:
        return None
    return build_certificate(decomp, u, int(partners[0]), sigma / 2, cfg, sigma_u=sigma)


def _cospectral(x: Graph, decomp: SpectralDecomposition, u: int, v: int, tol: float) -> bool:
    try:
        return exact.are_cospectral(x, u, v, hamiltonian=decomp.hamiltonian)
    except ExactArithmeticLimit:
        diag = decomp.idempotents[:, u, u] - decomp.idempotents[:, v, v]
        return bool(np.max(np.abs(diag)) <= tol)


def _controllable(x: Graph, decomp: SpectralDecomposition, u: int, support_tol: float) -> bool:
    try:
        return exact.is_controllable(x, u, decomp.hamiltonian)
    except ExactArithmeticLimit:
        return len(spectral.vertex_support(decomp, u, support_tol)) == x.n


def stabilizer_filter(x: Graph, u: int, v: int) -> Optional[bool]:
    """Whether Aut(X)_u = Aut(X)_v, or None when the search is skipped."""
    if x.n > partition.AUTOMORPHISM_LIMIT_N:
        return None
    try:
        return partition.stabilizers_equal(x, u, v)
    except SearchBudgetExceeded as e:
        logger.warning("skipping stabilizer filter: %s", e)
        return None


def distance_partition_filter(x: Graph, u: int, v: int, hamiltonian: str = "adjacency") -> bool:
    """Whether {v} is a cell of the refinement from u and both refinements agree."""
    from_u = partition.coarsest_equitable_refinement(
        x, partition.VertexPartition.isolating(x.n, u), hamiltonian
    )
    if (v,) not in from_u.cells:
        return False
    from_v = partition.coarsest_equitable_refinement(
        x, partition.VertexPartition.isolating(x.n, v), hamiltonian
    )
    return from_u.same_cells(from_v)


def check_pst(
    x: Graph,
    u: int,
    v: int,
    config: Optional[AnalysisConfig] = None,
    decomp: Optional[SpectralDecomposition] = None,
) -> Verdict:
    """Decide perfect state transfer between a given pair of distinct vertices.

    Cheap necessary conditions run first and are all recorded; the numeric
    evaluation at σ_u / 2 decides the verdict.
    """
    if u == v:
        raise PreconditionError("perfect state transfer needs two distinct vertices")
    cfg = _config(config)
    decomp = _decompose(x, cfg, decomp)
    refutation = Refutation(u=u, v=v)

    if x.distances(u)[v] < 0:
        refutation.add(Reason.NUMERIC_FIDELITY_BELOW_THRESHOLD)
        return refutation

    support_u = spectral.vertex_support(decomp, u, cfg.support_tol)
    support_v = spectral.vertex_support(decomp, v, cfg.support_tol)
    if not _cospectral(x, decomp, u, v, math.sqrt(cfg.cluster_tol)):
        refutation.add(Reason.NOT_COSPECTRAL)
    if support_u != support_v:
        refutation.add(Reason.SUPPORT_MISMATCH)
    if not pgst_filter(decomp, u, v, math.sqrt(cfg.certificate_tol)):
        refutation.add(Reason.SIGN_CONDITION_FAILS)
    if x.n >= 4 and decomp.hamiltonian == "adjacency" and _is_integral_hamiltonian(x, decomp.hamiltonian):
        if _controllable(x, decomp, u, cfg.support_tol) or _controllable(x, decomp, v, cfg.support_tol):
            refutation.add(Reason.CONTROLLABLE_PAIR)
    if not distance_partition_filter(x, u, v, decomp.hamiltonian):
        refutation.add(Reason.DISTANCE_PARTITION_MISMATCH)
    if stabilizer_filter(x, u, v) is False:
        refutation.add(Reason.STABILIZER_MISMATCH)

    report = _periodicity(x, decomp, support_u, u, cfg)
    _spectral_filters(x, decomp, u, report.eigenvalue_class, refutation)
    if not report.ratio_condition_holds:
        refutation.add(Reason.RATIO_CONDITION_FAILS)
        refutation.add(Reason.NOT_PERIODIC_AT_U)
        return refutation
    if not report.periodic or report.min_period is None:
        refutation.add(Reason.NOT_PERIODIC_AT_U)
        return refutation
    refutation.sigma_u = report.min_period
    cert = build_certificate(decomp, u, v, report.min_period / 2, cfg, sigma_u=report.min_period)
    if cert is None:
        refutation.add(Reason.NUMERIC_FIDELITY_BELOW_THRESHOLD)
        return refutation
    if refutation.reasons:
        logger.warning("PST %d->%d found despite failed filters %s", u, v, refutation.tags)
    return cert


def find_all_pst(
    x: Graph,
    config: Optional[AnalysisConfig] = None,
    decomp: Optional[SpectralDecomposition] = None,
) -> Tuple[List[PstCertificate], List[Refutation]]:
    """Certificates for every unordered transfer pair (u < v) and refutations for vertices without one."""
    cfg = _config(config)
    decomp = _decompose(x, cfg, decomp)
    certs: List[PstCertificate] = []
    refutations: List[Refutation] = []
    for u in range(x.n):
        verdict = find_pst(x, u, cfg, decomp)
        if isinstance(verdict, PstCertificate):
            if verdict.u < verdict.v:
                certs.append(verdict)
        else:
            refutations.append(verdict)
    return certs, refutations


def quotient_pst_check(
    x: Graph,
    pi: partition.VertexPartition,
    cert: PstCertificate,
    config: Optional[AnalysisConfig] = None,
) -> bool:
    """Whether the quotient walk over an equitable partition transfers the cell of u to the cell of v.

    Checks exp(i tau B) e_{cell(u)} = gamma e_{cell(v)} for the normalized quotient B.
    """
    cfg = _config(config)
    if not partition.is_equitable(x, pi, cfg.hamiltonian):
        return False
    cu, cv = pi.cell_index(cert.u), pi.cell_index(cert.v)
    if len(pi.cells[cu]) != len(pi.cells[cv]):
        return False
    b = partition.quotient(x, pi, normalized=True, hamiltonian=cfg.hamiltonian).B
    qd = spectral.decompose_matrix((b + b.T) / 2, cfg.cluster_tol, cfg.hamiltonian)
    col = spectral.transition_column(qd, cu, cert.tau)
    target = np.zeros(len(pi), dtype=complex)
    target[cv] = cert.gamma
    return bool(np.linalg.norm(col - target) <= cfg.certificate_tol)


def pgst_filter(decomp: SpectralDecomposition, u: int, v: int, tol: float = 1e-6) -> bool:
    """E_r e_u = ±E_r e_v for every eigenvalue, necessary for pretty good state transfer."""
    return _sign_pattern(decomp, u, v, range(decomp.m), tol) is not None


def fibonacci_schedule(count: int = 4) -> List[float]:
    """Times b·π/2 for consecutive Fibonacci pairs (a, b) with a ≡ 3 and b ≡ 2 (mod 4).

    The pairs are (3, 2), (55, 34), (987, 610), (17711, 10946), ...
    """
    times: List[float] = []
    prev, cur = 0, 1
    while len(times) < count:
        if prev % 4 == 2 and cur % 4 == 3:
            times.append(prev * math.pi / 2)
        prev, cur = cur, prev + cur
    return times


@dataclass
class PgstResult:
    best_time: Optional[float]
    best_fidelity: float
    times: np.ndarray
    fidelities: np.ndarray
    schedule: List[Tuple[float, float]] = field(default_factory=list)
    filter_passed: bool = True

    def to_dict(self) -> Dict:
        return {
            "best_time": self.best_time,
            "best_fidelity": self.best_fidelity,
            "filter_passed": self.filter_passed,
            "schedule": [{"t": t, "fidelity": p} for t, p in self.schedule],
        }


def _fidelity_fn(decomp: SpectralDecomposition, u: int, v: int):
    weights = decomp.idempotents[:, u, v]
    thetas = decomp.thetas

    def fidelity(t: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        amp = np.exp(1j * np.outer(t_arr, thetas)) @ weights
        values = np.abs(amp) ** 2
        return values if np.ndim(t) else float(values[0])

    return fidelity


def fidelity_curve(
    decomp: SpectralDecomposition, u: int, v: int, t_max: float, samples: int
) -> Tuple[np.ndarray, np.ndarray]:
    """|H(t)_{u,v}|² on an even grid of ``samples`` points in (0, t_max]."""
    times = np.linspace(0.0, t_max, samples + 1)[1:]
    return times, _fidelity_fn(decomp, u, v)(times)


def pgst_search(
    x: Graph,
    u: int,
    v: int,
    t_max: float,
    grid: Optional[int] = None,
    schedule: Sequence[float] = (),
    config: Optional[AnalysisConfig] = None,
    decomp: Optional[SpectralDecomposition] = None,
) -> PgstResult:
    """Search for times where |H(t)_{u,v}|² is close to one.

    The grid step is π / (64 (θ_1 - θ_m)) unless ``grid`` gives a step count; the
    best local maxima are refined with a bounded Brent search and every time in
    ``schedule`` is evaluated as well. Only the supremum over sampled times is
    reported; nothing is claimed about times never sampled.

    Raises:
        PreconditionError: If ``t_max`` is not positive.
    """
    if t_max <= 0:
        raise PreconditionError(f"t_max must be positive, got {t_max}")
    cfg = _config(config)
    decomp = _decompose(x, cfg, decomp)
    if not pgst_filter(decomp, u, v, math.sqrt(cfg.certificate_tol)):
        bound = float(np.sum(np.abs(decomp.idempotents[:, u, v]))) ** 2
        return PgstResult(
            best_time=None,
            best_fidelity=min(bound, 1.0),
            times=np.array([]),
            fidelities=np.array([]),
            filter_passed=False,
        )
    fidelity = _fidelity_fn(decomp, u, v)
    span = float(decomp.thetas[0] - decomp.thetas[-1]) or 1.0
    if grid is None:
        step = math.pi / (64 * span)
        grid = max(int(math.ceil(t_max / step)), 16)
    times = np.linspace(0.0, t_max, grid + 1)[1:]
    values = np.concatenate(
        [fidelity(chunk) for chunk in np.array_split(times, max(1, len(times) // 8192))]
    )
    step = times[1] - times[0] if len(times) > 1 else t_max
    best_idx = int(np.argmax(values))
    best_t, best_p = float(times[best_idx]), float(values[best_idx])

    interior = (values[1:-1] >= values[:-2]) & (values[1:-1] >= values[2:])
    peaks = np.flatnonzero(interior) + 1
    peaks = peaks[np.argsort(values[peaks])[::-1][:PGST_REFINE_PEAKS]]
    for i in peaks:
        lo, hi = times[i] - step, min(times[i] + step, t_max)
        res = minimize_scalar(lambda t: -fidelity(t), bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
        if -res.fun > best_p:
            best_t, best_p = float(res.x), float(-res.fun)

    evaluated = [(float(t), float(fidelity(float(t)))) for t in schedule]
    for t, p in evaluated:
        if p > best_p:
            best_t, best_p = t, p
    logger.debug("pgst %d->%d: best fidelity %.12g at t=%.12g", u, v, best_p, best_t)
    return PgstResult(
        best_time=best_t,
        best_fidelity=best_p,
        times=times,
        fidelities=values,
        schedule=evaluated,
    )
