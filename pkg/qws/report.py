"""JSON and CSV reporting for analyses run from the command line."""

import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from qws import mixing, spectral, transfer
from qws.cayley import CayleyVerdict
from qws.config import AnalysisConfig
from qws.errors import NumericalFailure, PreconditionError
from qws.graph import Graph
from qws.spectral import SpectralDecomposition
from qws.transfer import PstCertificate, Refutation

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
COMPLEX_DIGITS = 12


def format_complex(z: complex, digits: int = COMPLEX_DIGITS) -> str:
    """``a+bi`` with ``digits`` significant digits."""
    z = complex(z)
    return f"{z.real:.{digits}g}{z.imag:+.{digits}g}i"


def format_float(x: float) -> str:
    """Shortest text that reads back to the same float."""
    return repr(float(x))


def complex_to_dict(z: complex) -> Dict[str, float]:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def certificate_to_dict(cert: PstCertificate) -> Dict[str, Any]:
    return {
        "u": cert.u,
        "v": cert.v,
        "tau": cert.tau,
        "tau_over_pi": cert.tau / math.pi,
        "gamma": complex_to_dict(cert.gamma),
        "gamma_text": format_complex(cert.gamma),
        "signs": list(cert.signs),
        "sigma_u": cert.sigma_u,
        "fidelity_residual": cert.fidelity_residual,
    }


def refutation_to_dict(ref: Refutation) -> Dict[str, Any]:
    return {"u": ref.u, "v": ref.v, "reasons": ref.tags, "sigma_u": ref.sigma_u}


def verdict_to_dict(verdict: transfer.Verdict) -> Dict[str, Any]:
    if isinstance(verdict, PstCertificate):
        return {"pst": True, "certificate": certificate_to_dict(verdict)}
    return {"pst": False, "refutation": refutation_to_dict(verdict)}


def cayley_verdict_to_dict(verdict: CayleyVerdict) -> Dict[str, Any]:
    out: Dict[str, Any] = {
        "spec": verdict.spec,
        "rule": verdict.rule,
        "pst": verdict.has_pst,
        "closed_form": verdict.closed_form,
        "numeric": verdict.numeric,
        "agree": verdict.agrees,
    }
    if verdict.certificate is not None:
        out["certificate"] = certificate_to_dict(verdict.certificate)
    if verdict.refutation is not None:
        out["reasons"] = verdict.refutation.tags
    return out


def _sanitize(obj: Any) -> Any:
    """Make a report JSON-safe: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _sanitize(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else None
    if isinstance(obj, complex):
        return complex_to_dict(obj)
    return obj


def dumps(report: Dict[str, Any]) -> str:
    return json.dumps(_sanitize(report), indent=2)


def json_line(record: Dict[str, Any]) -> str:
    return json.dumps(_sanitize(record), separators=(",", ":"))


def write_csv(path: Union[str, Path], header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    """Write rows with floats in shortest round-trip form."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v for v in row])


def graph_summary(x: Graph, config: AnalysisConfig) -> Dict[str, Any]:
    return {
        "expr": x.meta,
        "n": x.n,
        "edges": x.edge_count(),
        "hamiltonian": config.hamiltonian,
        "connected": x.is_connected(),
        "bipartite": x.is_bipartite(),
    }


def spectrum_summary(decomp: SpectralDecomposition) -> Dict[str, Any]:
    return {
        "eigenvalues": [float(t) for t in decomp.thetas],
        "multiplicities": list(decomp.multiplicities),
    }


def verify_certificate(x: Graph, cert: PstCertificate, config: AnalysisConfig) -> bool:
    """Re-evaluate a certificate with the eigensolver-free transition oracle."""
    col = spectral.transition_oracle(x, cert.tau, config.hamiltonian).column(cert.u)
    target = np.zeros(x.n, dtype=complex)
    target[cert.v] = cert.gamma
    return bool(np.max(np.abs(col - target)) <= config.certificate_tol)


class Analysis:
    """Builds the JSON report for one graph; each section is added on request."""

    def __init__(self, x: Graph, config: Optional[AnalysisConfig] = None, verify: bool = False):
        self.x = x
        self.config = config if config is not None else AnalysisConfig()
        self.verify = verify
        self.decomp = spectral.decompose(x, self.config.hamiltonian, self.config.cluster_tol)
        self.report: Dict[str, Any] = {
            "schema": SCHEMA_VERSION,
            "graph": graph_summary(x, self.config),
            "config": self.config.to_dict(),
            "spectrum": spectrum_summary(self.decomp),
        }

    def _check_vertex(self, u: int) -> None:
        if not 0 <= u < self.x.n:
            raise PreconditionError(f"vertex {u} out of range for {self.x.n} vertices")

    def _certificate(self, cert: PstCertificate) -> Dict[str, Any]:
        out = certificate_to_dict(cert)
        if self.verify:
            out["verified"] = verify_certificate(self.x, cert, self.config)
            if not out["verified"]:
                raise NumericalFailure(f"certificate {cert.u}->{cert.v} failed the oracle check")
        return out

    def pst(self, u: int, v: int) -> Dict[str, Any]:
        self._check_vertex(u)
        self._check_vertex(v)
        verdict = transfer.check_pst(self.x, u, v, self.config, self.decomp)
        if isinstance(verdict, PstCertificate):
            section = {"pst": True, "certificate": self._certificate(verdict)}
        else:
            section = {"pst": False, "refutation": refutation_to_dict(verdict)}
        self.report["pst"] = section
        return section

    def pst_all(self) -> Dict[str, Any]:
        certs, refutations = transfer.find_all_pst(self.x, self.config, self.decomp)
        section = {
            "certificates": [self._certificate(c) for c in certs],
            "refutations": [refutation_to_dict(r) for r in refutations],
        }
        self.report["pst_all"] = section
        return section

    def periodic(self) -> Dict[str, Any]:
        graph_report = transfer.is_periodic_graph(self.x, self.config, self.decomp)
        vertices = [
            transfer.is_periodic_at(self.x, u, self.config, self.decomp).to_dict() for u in range(self.x.n)
        ]
        section = {"graph": graph_report.to_dict(), "vertices": vertices}
        self.report["periodic"] = section
        return section

    def mixing(self) -> Tuple[Dict[str, Any], mixing.MixingScan]:
        scan = mixing.uniform_mixing_scan(self.decomp, config=self.config)
        section = scan.to_dict()
        self.report["mixing"] = section
        return section, scan

    def average_mixing(self) -> Dict[str, Any]:
        m = mixing.average_mixing(self.decomp)
        section = {
            "matrix": m.M,
            "uniform": mixing.is_average_uniform(m),
            "doubly_stochastic": m.is_doubly_stochastic(),
        }
        self.report["average_mixing"] = section
        return section

    def pgst(self, u: int, v: int) -> Tuple[Dict[str, Any], transfer.PgstResult]:
        self._check_vertex(u)
        self._check_vertex(v)
        result = transfer.pgst_search(
            self.x,
            u,
            v,
            self.config.t_max,
            schedule=transfer.fibonacci_schedule(),
            config=self.config,
            decomp=self.decomp,
        )
        section = {"u": u, "v": v, **result.to_dict()}
        self.report["pgst"] = section
        return section, result


def fidelity_rows(u: int, v: int, times: np.ndarray, values: np.ndarray) -> List[Tuple[int, int, float, float]]:
    return [(u, v, float(t), float(p)) for t, p in zip(times, values)]
