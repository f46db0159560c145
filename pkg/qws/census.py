"""Census runs over every connection set of a cubelike or circulant family.

Rows are streamed as JSON lines in enumeration order, followed by one
``{"summary": ...}`` line.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Dict, Iterable, Iterator, List, Optional, TextIO

import numpy as np

from qws import cayley, report
from qws.cayley import CirculantSpec, CubelikeSpec
from qws.config import AnalysisConfig

logger = logging.getLogger(__name__)

FAMILIES = ("cubelike", "circulant")
CHUNKSIZE = 16
PROGRESS_EVERY = 1000


def cubelike_row(spec: CubelikeSpec, config: AnalysisConfig) -> Dict[str, Any]:
    verdict = cayley.cubelike_pst(spec, config, full=False)
    code = spec.code()
    row = report.cayley_verdict_to_dict(verdict)
    row.update(
        {
            "d": spec.d,
            "degree": len(spec.C),
            "sigma": spec.bits(spec.sigma),
            "code": {
                "even": code.is_even(),
                "self_orthogonal": code.is_self_orthogonal(),
                "doubly_even": code.is_doubly_even(),
            },
        }
    )
    if verdict.certificate is not None:
        row["partner"] = spec.bits(verdict.certificate.v)
    return row


def circulant_row(spec: CirculantSpec, config: AnalysisConfig) -> Dict[str, Any]:
    verdict = cayley.circulant_pst_pair(spec, config, full=False)
    eigenvalues = cayley.circulant_eigenvalues(spec)
    numeric_integral = bool(np.all(np.abs(eigenvalues - np.round(eigenvalues)) <= 1e-7))
    by_classes = cayley.circulant_is_integral(spec)
    row = report.cayley_verdict_to_dict(verdict)
    row.update(
        {
            "n": spec.n,
            "degree": len(spec.C),
            "integral": by_classes,
            "integral_numeric": numeric_integral,
        }
    )
    if by_classes != numeric_integral:
        logger.warning("%s: order-class integrality disagrees with the spectrum", row["spec"])
    if verdict.certificate is not None:
        translation = cayley.pst_translation(verdict.certificate, spec)
        row["translation"] = translation
        if translation is None:
            logger.warning("%s: transfer is not a translation by an involution", row["spec"])
    return row


def _cubelike_task(args: tuple) -> Dict[str, Any]:
    d, c, cfg = args
    return cubelike_row(CubelikeSpec(d=d, C=c), AnalysisConfig(**cfg))


def _circulant_task(args: tuple) -> Dict[str, Any]:
    n, c, cfg = args
    return circulant_row(CirculantSpec(n=n, C=c), AnalysisConfig(**cfg))


def _map(func: Callable[[tuple], Dict[str, Any]], tasks: Iterable[tuple], workers: int) -> Iterator[Dict[str, Any]]:
    """Ordered map, in a process pool when ``workers`` > 1."""
    if workers <= 1:
        yield from map(func, tasks)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(func, tasks, chunksize=CHUNKSIZE)


def cubelike_census(d: int, dedup: bool = False, config: Optional[AnalysisConfig] = None) -> Iterator[Dict[str, Any]]:
    cfg = config if config is not None else AnalysisConfig()
    tasks = ((spec.d, spec.C, cfg.to_dict()) for spec in cayley.enumerate_cubelike(d, dedup))
    yield from _map(_cubelike_task, tasks, cfg.workers)


def circulant_census(orders: Iterable[int], config: Optional[AnalysisConfig] = None) -> Iterator[Dict[str, Any]]:
    cfg = config if config is not None else AnalysisConfig()
    tasks = ((spec.n, spec.C, cfg.to_dict()) for n in orders for spec in cayley.enumerate_circulants(n))
    yield from _map(_circulant_task, tasks, cfg.workers)


def summarize(family: str, rows: List[Dict[str, Any]]) -> Dict[str, Any]:
    summary: Dict[str, Any] = {
        "family": family,
        "count": len(rows),
        "pst": sum(1 for r in rows if r["pst"]),
        "disagreements": sum(1 for r in rows if not r["agree"]),
    }
    if family == "cubelike":
        summary["sigma_nonzero"] = sum(1 for r in rows if r["rule"] == "sigma")
        summary["quarter_period"] = sum(1 for r in rows if r["rule"] == "quarter")
    else:
        summary["integral"] = sum(1 for r in rows if r["integral"])
        summary["integrality_disagreements"] = sum(1 for r in rows if r["integral"] != r["integral_numeric"])
    return summary


def run_census(rows: Iterable[Dict[str, Any]], family: str, out: TextIO) -> Dict[str, Any]:
    """Write each row as a JSON line, then the summary line; return the summary."""
    seen: List[Dict[str, Any]] = []
    for row in rows:
        out.write(report.json_line(row) + "\n")
        seen.append(row)
        if len(seen) % PROGRESS_EVERY == 0:
            logger.info("census %s: %d rows", family, len(seen))
    summary = summarize(family, seen)
    out.write(report.json_line({"summary": summary}) + "\n")
    return summary
