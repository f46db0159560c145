"""Uniform mixing (flat transition matrices) and average mixing matrices."""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import minimize_scalar

from qws import exact, spectral
from qws import graph as g
from qws.config import AnalysisConfig
from qws.errors import PreconditionError
from qws.graph import Graph
from qws.spectral import AllIntegers, SpectralDecomposition, TransitionMatrix
from qws.transfer import fidelity_curve

__all__ = [
    "AverageMixingMatrix",
    "MixingScan",
    "average_mixing",
    "average_mixing_exact",
    "empirical_average_mixing",
    "fidelity_curve",
    "flatness_curve",
    "flatness_residual",
    "is_average_uniform",
    "is_flat",
    "k2_product_flatness_relation",
    "mixing_matrix",
    "psd_sum_multiple_of_J_check",
    "uniform_mixing_scan",
]

logger = logging.getLogger(__name__)

FLAT_TOL = 1e-8
CANDIDATE_RESIDUAL = 0.05
MERGE_TOL = 1e-6
CHUNK = 2048

MatrixLike = Union[TransitionMatrix, np.ndarray]


def _matrix(u: MatrixLike) -> np.ndarray:
    return u.U if isinstance(u, TransitionMatrix) else np.asarray(u)


def flatness_residual(u: MatrixLike) -> float:
    """max over entries of ||U_uv| - 1/√n|."""
    m = _matrix(u)
    return float(np.max(np.abs(np.abs(m) - 1.0 / math.sqrt(m.shape[0]))))


def is_flat(u: MatrixLike, tol: float = FLAT_TOL) -> bool:
    """Whether every entry of U has modulus 1/√n."""
    return flatness_residual(u) <= tol


def mixing_matrix(decomp: SpectralDecomposition, t: float) -> np.ndarray:
    """H(t) ∘ H(-t); row u is the probability density of the walk started at u."""
    return np.abs(spectral.transition(decomp, t).U) ** 2


def _residuals(decomp: SpectralDecomposition, times: np.ndarray) -> np.ndarray:
    target = 1.0 / math.sqrt(decomp.n)
    out = []
    for chunk in np.array_split(times, max(1, math.ceil(len(times) / CHUNK))):
        batch = spectral.transition_batch(decomp, chunk)
        out.append(np.max(np.abs(np.abs(batch) - target), axis=(1, 2)))
    return np.concatenate(out) if out else np.array([])


def flatness_curve(
    x: Union[Graph, SpectralDecomposition], t_max: float, samples: int, hamiltonian: str = "adjacency"
) -> Tuple[np.ndarray, np.ndarray]:
    """Flatness residual of H(t) on an even grid of ``samples`` points in (0, t_max]."""
    decomp = x if isinstance(x, SpectralDecomposition) else spectral.decompose(x, hamiltonian)
    times = np.linspace(0.0, t_max, samples + 1)[1:]
    return times, _residuals(decomp, times)


@dataclass
class MixingScan:
    """Flat times found on (0, t_max]; an empty list only means none were found."""

    t_max: float
    samples: int
    times: List[float] = field(default_factory=list)
    residuals: List[float] = field(default_factory=list)
    residual_floor: float = math.inf

    @property
    def found(self) -> bool:
        return bool(self.times)

    def to_dict(self) -> dict:
        return {
            "t_max": self.t_max,
            "samples": self.samples,
            "flat_times": self.times,
            "residuals": self.residuals,
            "residual_floor": self.residual_floor,
        }


def uniform_mixing_scan(
    x: Union[Graph, SpectralDecomposition],
    t_max: Optional[float] = None,
    samples: Optional[int] = None,
    config: Optional[AnalysisConfig] = None,
) -> MixingScan:
    """Scan for times where H(t) is flat.

    Local minima of the residual on the grid are refined with a bounded Brent
    search; refined times with residual below ``scan_tol`` are reported, merging
    times closer than 1e-6. ``residual_floor`` is the smallest residual seen.
    """
    cfg = config if config is not None else AnalysisConfig()
    t_max = cfg.t_max if t_max is None else t_max
    samples = cfg.samples if samples is None else samples
    if t_max <= 0:
        raise PreconditionError(f"t_max must be positive, got {t_max}")
    decomp = x if isinstance(x, SpectralDecomposition) else spectral.decompose(x, cfg.hamiltonian, cfg.cluster_tol)
    times, values = flatness_curve(decomp, t_max, samples)
    scan = MixingScan(t_max=t_max, samples=samples, residual_floor=float(values.min()))
    step = times[1] - times[0]

    def residual(t: float) -> float:
        return float(_residuals(decomp, np.array([t]))[0])

    padded = np.concatenate([[np.inf], values, [np.inf]])
    minima = np.flatnonzero((values <= padded[:-2]) & (values <= padded[2:]) & (values < CANDIDATE_RESIDUAL))
    for i in minima:
        lo, hi = max(times[i] - step, 1e-12), min(times[i] + step, t_max)
        res = minimize_scalar(residual, bounds=(lo, hi), method="bounded", options={"xatol": 1e-13})
        t, r = float(res.x), float(res.fun)
        scan.residual_floor = min(scan.residual_floor, r)
        if r > cfg.scan_tol:
            continue
        if scan.times and abs(t - scan.times[-1]) <= MERGE_TOL:
            if r < scan.residuals[-1]:
                scan.times[-1], scan.residuals[-1] = t, r
            continue
        scan.times.append(t)
        scan.residuals.append(r)
    logger.debug("mixing scan found %d flat times up to %.6g", len(scan.times), t_max)
    return scan


def k2_product_flatness_relation(x: Graph, t: float, tol: float = FLAT_TOL) -> bool:
    """Whether K2 × X is flat at t, decided as: X flat at t and H_X(2t) = -iI.

    The criterion is compared with a direct evaluation on K2 × X and any
    disagreement is logged.
    """
    decomp = spectral.decompose(x)
    factor_flat = is_flat(spectral.transition(decomp, t), tol)
    double = spectral.transition(decomp, 2 * t).U
    phase = bool(np.max(np.abs(double + 1j * np.eye(x.n))) <= math.sqrt(tol))
    predicted = factor_flat and phase
    product = g.direct_product(g.complete(2), x)
    actual = is_flat(spectral.transition(spectral.decompose(product), t), math.sqrt(tol))
    if predicted != actual:
        logger.warning("K2 product flatness criterion %s disagrees with direct evaluation at t=%.12g", predicted, t)
    return predicted


@dataclass(frozen=True, eq=False)
class AverageMixingMatrix:
    """M̂ = sum_r E_r ∘ E_r, the time average of H(t) ∘ H(-t)."""

    M: np.ndarray

    @property
    def n(self) -> int:
        return int(self.M.shape[0])

    def is_doubly_stochastic(self, tol: float = 1e-9) -> bool:
        rows_ok = np.max(np.abs(self.M.sum(axis=1) - 1.0)) <= tol
        cols_ok = np.max(np.abs(self.M.sum(axis=0) - 1.0)) <= tol
        return bool(rows_ok and cols_ok and self.M.min() >= -1e-12)

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.M - self.M.T)) <= tol)

    def is_psd(self, tol: float = 1e-9) -> bool:
        return bool(np.linalg.eigvalsh((self.M + self.M.T) / 2).min() >= -tol)


def average_mixing(decomp: SpectralDecomposition) -> AverageMixingMatrix:
    return AverageMixingMatrix(M=np.sum(decomp.idempotents**2, axis=0))


def empirical_average_mixing(decomp: SpectralDecomposition, t_end: float, samples: int = 20001) -> np.ndarray:
    """(1/T) ∫_0^T H(t) ∘ H(-t) dt by the trapezoid rule."""
    times = np.linspace(0.0, t_end, samples)
    densities = np.abs(spectral.transition_batch(decomp, times)) ** 2
    return trapezoid(densities, times, axis=0) / t_end


def average_mixing_exact(x: Graph) -> np.ndarray:
    """Exact M̂ as an object array of Fractions, for graphs with integer eigenvalues.

    Each idempotent is the Lagrange interpolant prod_{s≠r} (A - θ_s I) / (θ_r - θ_s)
    evaluated over the rationals.

    Raises:
        ExactArithmeticLimit: Above the exact size cap or for non-integer weights.
        PreconditionError: If some eigenvalue is not an integer.
    """
    a = exact.integer_matrix(x)
    decomp = spectral.decompose(x)
    cls = spectral.classify_eigenvalues(decomp, range(decomp.m), graph=x)
    if not isinstance(cls, AllIntegers):
        raise PreconditionError("exact average mixing needs integer eigenvalues")
    n = x.n
    af = np.empty((n, n), dtype=object)
    for idx, value in np.ndenumerate(a):
        af[idx] = Fraction(value)
    eye = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            eye[i, j] = Fraction(int(i == j))
    total = np.empty((n, n), dtype=object)
    total[:] = Fraction(0)
    for r, theta_r in enumerate(cls.values):
        e = eye.copy()
        for s, theta_s in enumerate(cls.values):
            if s != r:
                e = e.dot(af - eye * theta_s) * Fraction(1, theta_r - theta_s)
        total = total + e * e
    return total


def is_average_uniform(m: Union[AverageMixingMatrix, np.ndarray], tol: float = FLAT_TOL) -> bool:
    """Whether M̂ = J / n."""
    mat = m.M if isinstance(m, AverageMixingMatrix) else np.asarray(m, dtype=float)
    return bool(np.max(np.abs(mat - 1.0 / mat.shape[0])) <= tol)


def psd_sum_multiple_of_J_check(matrices: Sequence[np.ndarray], tol: float = 1e-8) -> bool:
    """For PSD matrices whose sum is a multiple of J, whether each one is a multiple of J.

    Raises:
        PreconditionError: If a matrix is not PSD or the sum is not a multiple of J.
    """
    if not matrices:
        raise PreconditionError("need at least one matrix")
    total = np.sum(matrices, axis=0)
    if np.max(np.abs(total - total.mean())) > tol:
        raise PreconditionError("matrices do not sum to a multiple of J")
    for f in matrices:
        if np.linalg.eigvalsh((f + f.T) / 2).min() < -tol:
            raise PreconditionError("matrix is not positive semidefinite")
    return all(np.max(np.abs(f - f.mean())) <= tol for f in matrices)
