"""Transition matrices and state transfer for products, joins and complements.

Closed-form transports here only propose a certificate; every certificate they
return has been re-evaluated on the composed graph itself.
"""

import cmath
import logging
import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np

from qws import arith, cayley, spectral, transfer
from qws import graph as g
from qws.config import AnalysisConfig
from qws.errors import PreconditionError
from qws.graph import Graph
from qws.spectral import AllIntegers, SpectralDecomposition, TransitionMatrix
from qws.transfer import PstCertificate, Refutation

logger = logging.getLogger(__name__)

PHASE_TOL = 1e-8
LEMMA_KINDS = ("empty2", "k2")


def _config(config: Optional[AnalysisConfig]) -> AnalysisConfig:
    return config if config is not None else AnalysisConfig()


def _verified(x: Graph, u: int, v: int, tau: float, cfg: AnalysisConfig) -> Optional[PstCertificate]:
    """Re-derive a proposed certificate by dense evaluation on ``x``."""
    decomp = spectral.decompose(x, "adjacency", cfg.cluster_tol)
    report = transfer.is_periodic_at(x, u, cfg, decomp)
    cert = transfer.build_certificate(decomp, u, v, tau, cfg, sigma_u=report.min_period)
    if cert is None:
        logger.warning("proposed transfer %d->%d at %.12g on %s did not verify", u, v, tau, x.meta)
    return cert


def cartesian_transition(hx: TransitionMatrix, hy: TransitionMatrix) -> TransitionMatrix:
    """H_{X□Y}(t) = H_X(t) ⊗ H_Y(t)."""
    if not math.isclose(hx.t, hy.t, rel_tol=0.0, abs_tol=1e-12):
        raise PreconditionError(f"factor times differ: {hx.t!r} != {hy.t!r}")
    return TransitionMatrix(t=hx.t, U=np.kron(hx.U, hy.U))


def _diagonal_index(u: int, n: int, d: int) -> int:
    index = 0
    for _ in range(d):
        index = index * n + u
    return index


def power_pst(
    x: Graph, cert: PstCertificate, d: int, config: Optional[AnalysisConfig] = None
) -> Optional[PstCertificate]:
    """Carry PST u -> v on X to (u,...,u) -> (v,...,v) on the d-th Cartesian power, at the same time.

    Raises:
        PreconditionError: If d < 1.
    """
    if d < 1:
        raise PreconditionError(f"Cartesian power needs d >= 1, got {d}")
    if d == 1:
        return cert
    cfg = _config(config)
    power = g.cartesian_power(x, d)
    u = _diagonal_index(cert.u, x.n, d)
    v = _diagonal_index(cert.v, x.n, d)
    return _verified(power, u, v, cert.tau, cfg)


def direct_transition(decomp_x: SpectralDecomposition, y: Graph, t: float) -> TransitionMatrix:
    """H_{X×Y}(t) = sum_r E_r ⊗ H_Y(θ_r t)."""
    decomp_y = spectral.decompose(y, "adjacency", decomp_x.cluster_tol)
    u = np.zeros((decomp_x.n * y.n, decomp_x.n * y.n), dtype=complex)
    for theta, e in zip(decomp_x.thetas, decomp_x.idempotents):
        u += np.kron(e, spectral.transition(decomp_y, float(theta) * t).U)
    return TransitionMatrix(t=float(t), U=u)


def direct_odd_pst(
    x: Graph,
    y: Graph,
    cert_y: PstCertificate,
    a: int = 0,
    config: Optional[AnalysisConfig] = None,
) -> Optional[PstCertificate]:
    """PST on X × Y from a certificate on Y, when every eigenvalue of X is an odd integer.

    With H_Y(2τ) = γ² I, H_{X×Y}(τ) = H_X(φ) ⊗ γ⁻¹ H_Y(τ) where γ = e^{iφ}; the
    product transfers (a, u) to (b, v) whenever H_X(φ) e_a is a multiple of e_b.

    Raises:
        PreconditionError: If X has an even or non-integer eigenvalue, or Y is not
            periodic with H_Y(2τ) = γ² I.
    """
    cfg = _config(config)
    decomp_x = spectral.decompose(x, "adjacency", cfg.cluster_tol)
    cls = spectral.classify_eigenvalues(decomp_x, range(decomp_x.m), graph=x if x.is_integral() else None)
    if not isinstance(cls, AllIntegers) or any(k % 2 == 0 for k in cls.values):
        raise PreconditionError("every eigenvalue of X must be an odd integer")
    decomp_y = spectral.decompose(y, "adjacency", cfg.cluster_tol)
    gamma = cert_y.gamma
    h2 = spectral.transition(decomp_y, 2 * cert_y.tau).U
    if np.max(np.abs(h2 - gamma**2 * np.eye(y.n))) > cfg.certificate_tol:
        raise PreconditionError("Y must satisfy H_Y(2τ) = γ² I")
    phi = cmath.phase(gamma)
    col = np.abs(spectral.transition_column(decomp_x, a, phi))
    partners = np.flatnonzero(col >= 1 - cfg.fidelity_tol)
    if len(partners) != 1:
        return None
    b = int(partners[0])
    product = g.direct_product(x, y)
    return _verified(product, a * y.n + cert_y.u, b * y.n + cert_y.v, cert_y.tau, cfg)


@dataclass
class JoinSpectrum:
    """Spectral decomposition of the join X + Y of a k-regular X on m and an ℓ-regular Y on n vertices.

    N1 and N2 are the rank-one projections for μ1 > μ2; ``a``/``c`` are their
    constant entries on the X × X block and ``b``/``d`` on the X × Y block.
    """

    k: float
    l: float
    m: int
    n: int
    mu1: float
    mu2: float
    n1: np.ndarray
    n2: np.ndarray
    a: float
    b: float
    c: float
    d: float
    inherited_x: List[Tuple[float, np.ndarray]] = field(default_factory=list)
    inherited_y: List[Tuple[float, np.ndarray]] = field(default_factory=list)

    @property
    def size(self) -> int:
        return self.m + self.n

    def terms(self) -> List[Tuple[float, np.ndarray]]:
        return [(self.mu1, self.n1), (self.mu2, self.n2)] + self.inherited_x + self.inherited_y

    def reconstruct(self) -> np.ndarray:
        return sum((theta * e for theta, e in self.terms()), np.zeros((self.size, self.size)))

    def identity_residual(self) -> float:
        total = sum((e for _, e in self.terms()), np.zeros((self.size, self.size)))
        return float(np.max(np.abs(total - np.eye(self.size))))

    def eigenvalues(self) -> List[float]:
        """Eigenvalues with multiplicity (rank of each projection)."""
        out: List[float] = []
        for theta, e in self.terms():
            out.extend([theta] * int(round(np.trace(e))))
        return sorted(out, reverse=True)


def _inherited(
    x: Graph, k: float, offset: int, size: int, cluster_tol: float
) -> List[Tuple[float, np.ndarray]]:
    """Eigenspaces of a regular part restricted to the complement of its all-ones vector."""
    decomp = spectral.decompose(x, "adjacency", cluster_tol)
    ones = np.full((x.n, x.n), 1.0 / x.n)
    tol = cluster_tol * (1.0 + decomp.spectral_radius)
    out = []
    for theta, e in zip(decomp.thetas, decomp.idempotents):
        hat = e - ones if abs(theta - k) <= tol else e
        if np.trace(hat) < 0.5:
            continue
        full = np.zeros((size, size))
        full[offset : offset + x.n, offset : offset + x.n] = hat
        out.append((float(theta), full))
    return out


def join_spectrum(x: Graph, y: Graph, cluster_tol: float = spectral.DEFAULT_CLUSTER_TOL) -> JoinSpectrum:
    """Decompose A(X + Y) from the spectra of two regular parts.

    μ1, μ2 are the roots of x² - (k+ℓ)x + kℓ - mn, the eigenvalues of the quotient
    [[k, n], [m, ℓ]]; each N_i is built from the unit eigenvector that is constant
    on both parts.

    Raises:
        PreconditionError: If either part is not regular.
    """
    k, l = x.regular_degree(), y.regular_degree()
    if k is None or l is None:
        raise PreconditionError("join spectrum needs two regular graphs")
    m, n = x.n, y.n
    root = math.sqrt((k - l) ** 2 + 4 * m * n)
    mus = ((k + l + root) / 2, (k + l - root) / 2)
    size = m + n
    projections = []
    for mu in mus:
        alpha = 1.0
        beta = (mu - k) / n
        norm = math.sqrt(alpha * alpha * m + beta * beta * n)
        alpha, beta = alpha / norm, beta / norm
        z = np.concatenate([np.full(m, alpha), np.full(n, beta)])
        projections.append((np.outer(z, z), alpha * alpha, alpha * beta))
    (n1, a, b), (n2, c, d) = projections
    return JoinSpectrum(
        k=k,
        l=l,
        m=m,
        n=n,
        mu1=mus[0],
        mu2=mus[1],
        n1=n1,
        n2=n2,
        a=a,
        b=b,
        c=c,
        d=d,
        inherited_x=_inherited(x, k, 0, size, cluster_tol),
        inherited_y=_inherited(y, l, m, size, cluster_tol),
    )


def join_transition(js: JoinSpectrum, t: float) -> TransitionMatrix:
    """H_{X+Y}(t) assembled from a join spectrum."""
    u = np.zeros((js.size, js.size), dtype=complex)
    for theta, e in js.terms():
        u += np.exp(1j * theta * t) * e
    return TransitionMatrix(t=float(t), U=u)


@dataclass
class TransportVerdict:
    """Outcome of carrying a certificate to a composed graph.

    ``closed_form`` is True when the construction claims transfer and None when its
    precondition fails; ``certificate`` or ``refutation`` is the numeric verdict.
    """

    construction: str
    graph: Graph
    closed_form: Optional[bool]
    certificate: Optional[PstCertificate] = None
    refutation: Optional[Refutation] = None

    @property
    def has_pst(self) -> bool:
        return self.certificate is not None

    @property
    def agrees(self) -> bool:
        return self.closed_form is None or self.closed_form == self.has_pst


def _numeric(z: Graph, u: int, v: int, cfg: AnalysisConfig) -> Tuple[Optional[PstCertificate], Optional[Refutation]]:
    verdict = transfer.check_pst(z, u, v, replace(cfg, hamiltonian="adjacency"))
    if isinstance(verdict, PstCertificate):
        return verdict, None
    return None, verdict


def join_pst_transport(
    x: Graph, cert: PstCertificate, y: Graph, config: Optional[AnalysisConfig] = None
) -> TransportVerdict:
    """PST between vertices of X inside X + Y.

    The transfer survives at the same time exactly when e^{ikτ} = e^{iμ1τ} = e^{iμ2τ};
    when k and ℓ are integers this needs (k - ℓ)² + 4mn to be a perfect square.
    """
    cfg = _config(config)
    z = g.join(x, y)
    js = join_spectrum(x, y, cfg.cluster_tol)
    disc = (js.k - js.l) ** 2 + 4 * js.m * js.n
    if float(js.k).is_integer() and float(js.l).is_integer() and not arith.is_perfect_square(int(round(disc))):
        claim = False
    else:
        base = cmath.exp(1j * js.k * cert.tau)
        claim = all(abs(cmath.exp(1j * mu * cert.tau) - base) <= PHASE_TOL for mu in (js.mu1, js.mu2))
    cert_z = _verified(z, cert.u, cert.v, cert.tau, cfg) if claim else None
    refutation = None
    if cert_z is None:
        cert_z, refutation = _numeric(z, cert.u, cert.v, cfg)
    verdict = TransportVerdict("join", z, claim, cert_z, refutation)
    if not verdict.agrees:
        logger.warning("join transport claim %s disagrees with numeric verdict on %s", claim, z.meta)
    return verdict


def complement_transport(
    x: Graph, cert: PstCertificate, config: Optional[AnalysisConfig] = None
) -> TransportVerdict:
    """PST on the complement of a regular graph.

    H_{X̄}(t) = exp(it(J - I)) H_X(-t); when τn/(2π) is an integer the first
    factor is e^{-iτ} I, so the complement transfers u to v with phase e^{-iτ}·conj(γ).
    Otherwise no claim is made and only the numeric verdict is reported.

    Raises:
        PreconditionError: If X is not regular.
    """
    cfg = _config(config)
    if not x.is_regular():
        raise PreconditionError("complement transport needs a regular graph")
    z = g.complement(x)
    claim: Optional[bool] = None
    cert_z: Optional[PstCertificate] = None
    refutation: Optional[Refutation] = None
    if arith.nearest_integer(cert.tau * x.n / (2 * math.pi), 1e-8) is not None:
        claim = True
        gamma = cmath.exp(-1j * cert.tau) * cert.gamma.conjugate()
        cert_z = _verified(z, cert.u, cert.v, cert.tau, cfg)
        if cert_z is not None and abs(cert_z.gamma - gamma) > cfg.certificate_tol:
            logger.warning("complement phase %s differs from transported %s", cert_z.gamma, gamma)
    if cert_z is None:
        cert_z, refutation = _numeric(z, cert.u, cert.v, cfg)
    verdict = TransportVerdict("complement", z, claim, cert_z, refutation)
    if not verdict.agrees:
        logger.warning("complement transport claim %s disagrees with numeric verdict on %s", claim, z.meta)
    return verdict


@dataclass
class LemmaHit:
    spec: str
    degree: float
    discriminant: int
    certificate: PstCertificate


def join_lemma_search(
    kind: str,
    max_n: int,
    limit: int = 1,
    config: Optional[AnalysisConfig] = None,
    degree: Optional[int] = None,
) -> List[LemmaHit]:
    """Regular circulants Y on at most ``max_n`` vertices for which K̄2 + Y (``empty2``) or
    K2 + Y (``k2``) has PST between the two vertices of the first part.

    Only candidates whose join discriminant is a perfect square are evaluated.
    With ``degree`` the search is restricted to Y of that valency.
    """
    if kind not in LEMMA_KINDS:
        raise PreconditionError(f"lemma kind must be one of {LEMMA_KINDS}, got {kind!r}")
    cfg = _config(config)
    x = g.empty(2) if kind == "empty2" else g.complete(2)
    k = 0 if kind == "empty2" else 1
    hits: List[LemmaHit] = []
    for n in range(2, max_n + 1):
        for spec in cayley.enumerate_circulants(n):
            l = len(spec.C)
            if degree is not None and l != degree:
                continue
            disc = (k - l) ** 2 + 4 * 2 * n
            if not arith.is_perfect_square(disc):
                continue
            y = cayley.circulant_graph(spec)
            cert, _ = _numeric(g.join(x, y), 0, 1, cfg)
            if cert is None:
                continue
            logger.info("%s lemma instance: %s (tau=%.12g)", kind, cayley.format_spec(spec), cert.tau)
            hits.append(LemmaHit(cayley.format_spec(spec), float(l), disc, cert))
            if len(hits) >= limit:
                return hits
    return hits
