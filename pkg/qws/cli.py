"""Command line interface: ``qws analyze``, ``qws census`` and ``qws repro``."""

import functools
import logging
import sys
from typing import Any, Callable, Dict, Iterable, Optional, Sequence, Tuple

import click
from graphviz.backend import ExecutableNotFound

from qws import __version__, census, mixing, parser, partition, repro, transfer
from qws.config import HAMILTONIANS, AnalysisConfig, load_config, parse_assignments
from qws.errors import (
    ConfigError,
    GraphError,
    NumericalFailure,
    PreconditionError,
    QwsError,
)
from qws.report import Analysis, dumps, fidelity_rows, write_csv

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3

LOG_LEVELS = (logging.ERROR, logging.WARNING, logging.INFO, logging.DEBUG)


def _setup_logging(verbose: int) -> None:
    level = LOG_LEVELS[min(verbose, len(LOG_LEVELS) - 1)]
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def _fail(message: str, code: int) -> None:
    click.echo(f"Error: {message}", err=True)
    raise click.exceptions.Exit(code)


def _handle_errors(func: Callable[..., Any]) -> Callable[..., Any]:
    """Report library errors as ``Error: ...`` on stderr with the matching exit code."""

    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return func(*args, **kwargs)
        except (click.ClickException, click.exceptions.Exit):
            raise
        except (GraphError, ConfigError, PreconditionError) as e:
            _fail(str(e), EXIT_USAGE)
        except NumericalFailure as e:
            _fail(f"Numerical failure: {e}", EXIT_NUMERIC)
        except ExecutableNotFound:
            _fail(
                "Graphviz executable not found. Please install Graphviz and ensure 'dot' is in PATH.",
                EXIT_FAILURE,
            )
        except (QwsError, OSError) as e:
            _fail(str(e), EXIT_FAILURE)

    return wrapper


def _config_options(func: Callable[..., Any]) -> Callable[..., Any]:
    options = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False), help="TOML configuration file."),
        click.option(
            "--tolerance",
            "tolerances",
            multiple=True,
            metavar="NAME=VALUE",
            help="Override a tolerance, e.g. fidelity=1e-10 (repeatable).",
        ),
        click.option("--hamiltonian", type=click.Choice(HAMILTONIANS), help="Walk Hamiltonian."),
        click.option("--t-max", "t_max", type=float, help="Time horizon for scans and searches."),
        click.option("--seed", type=int, help="Seed for randomized searches."),
        click.option("--workers", type=int, help="Worker processes (also QWS_THREADS)."),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _load(config_path: Optional[str], tolerances: Sequence[str], **fields: Any) -> AnalysisConfig:
    overrides: Dict[str, Any] = dict(parse_assignments(tolerances))
    overrides.update({k: v for k, v in fields.items() if v is not None})
    return load_config(config_path, overrides)


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, "--version", prog_name="qws", message="%(prog)s %(version)s")
@click.option("-v", "--verbose", count=True, help="More log output (-v, -vv, -vvv).")
def cli(verbose: int) -> None:
    """Continuous-time quantum walk analysis."""
    _setup_logging(verbose)


@cli.command()
@click.argument("expr")
@click.option("--pst", "pst_pair", nargs=2, type=int, metavar="U V", help="Decide PST between U and V.")
@click.option("--pst-all", is_flag=True, help="Find every PST pair.")
@click.option("--periodic", is_flag=True, help="Periodicity of the graph and each vertex.")
@click.option("--mixing", "with_mixing", is_flag=True, help="Scan for uniform mixing times.")
@click.option("--average-mixing", is_flag=True, help="Average mixing matrix.")
@click.option("--pgst", "pgst_pair", nargs=2, type=int, metavar="U V", help="Pretty good state transfer search.")
@_config_options
@click.option("--draw", "draw_path", default="", help="Output SVG path for Graphviz visualization.")
@click.option("--equitable", is_flag=True, help="Colour the coarsest equitable partition in the --draw output.")
@click.option("--csv", "csv_path", default="", help="Write a time series as CSV.")
@click.option("--verify", is_flag=True, help="Re-check every certificate with the matrix-exponential oracle.")
@_handle_errors
def analyze(
    expr: str,
    pst_pair: Optional[Tuple[int, int]],
    pst_all: bool,
    periodic: bool,
    with_mixing: bool,
    average_mixing: bool,
    pgst_pair: Optional[Tuple[int, int]],
    draw_path: str,
    equitable: bool,
    csv_path: str,
    verify: bool,
    config_path: Optional[str],
    tolerances: Sequence[str],
    **fields: Any,
) -> None:
    """Analyze the graph given by EXPR (a constructor expression or a graph file)."""
    if csv_path and not (pgst_pair or pst_pair or with_mixing):
        raise click.UsageError("--csv needs --pgst, --pst or --mixing")
    config = _load(config_path, tolerances, **fields)
    x = parser.load_graph(expr)
    analysis = Analysis(x, config, verify=verify)
    if not (pst_pair or pst_all or periodic or with_mixing or average_mixing or pgst_pair):
        pst_all = periodic = True

    highlight = set()
    csv_written = False
    if pst_pair:
        section = analysis.pst(*pst_pair)
        if section["pst"]:
            highlight.update(pst_pair)
    if pst_all:
        for cert in analysis.pst_all()["certificates"]:
            highlight.update((cert["u"], cert["v"]))
    if periodic:
        analysis.periodic()
    if average_mixing:
        analysis.average_mixing()
    if with_mixing:
        analysis.mixing()
    if pgst_pair:
        _, result = analysis.pgst(*pgst_pair)
        if csv_path:
            write_csv(csv_path, ["u", "v", "t", "fidelity"], fidelity_rows(*pgst_pair, result.times, result.fidelities))
            csv_written = True
    if csv_path and not csv_written and pst_pair:
        times, values = transfer.fidelity_curve(analysis.decomp, *pst_pair, config.t_max, config.samples)
        write_csv(csv_path, ["u", "v", "t", "fidelity"], fidelity_rows(*pst_pair, times, values))
        csv_written = True
    if csv_path and not csv_written:
        times, residuals = mixing.flatness_curve(analysis.decomp, config.t_max, config.samples)
        write_csv(csv_path, ["t", "residual"], zip(times.tolist(), residuals.tolist()))

    click.echo(dumps(analysis.report))
    if draw_path:
        cells = partition.coarsest_equitable_refinement(x, hamiltonian=config.hamiltonian).cells if equitable else None
        svg_path = x.render_svg(draw_path, highlight=sorted(highlight), cells=cells)
        click.echo(f"Graphviz SVG written to: {svg_path}", err=True)


@cli.group("census")
def census_group() -> None:
    """Exhaustive PST census over a Cayley graph family (JSON lines)."""


def _emit(rows: Iterable[Dict[str, Any]], family: str) -> None:
    summary = census.run_census(rows, family, sys.stdout)
    logger.info("census %s: %d graphs, %d with PST", family, summary["count"], summary["pst"])


@census_group.command("cubelike")
@click.option("-d", "dim", type=int, required=True, help="Dimension of Z_2^d.")
@click.option("--dedup", is_flag=True, help="One connection set per coordinate permutation class.")
@_config_options
@_handle_errors
def census_cubelike(dim: int, dedup: bool, config_path: Optional[str], tolerances: Sequence[str], **fields: Any) -> None:
    """Every cubelike graph on Z_2^d."""
    if dim < 1:
        raise click.BadParameter("must be positive", param_hint="-d")
    config = _load(config_path, tolerances, **fields)
    _emit(census.cubelike_census(dim, dedup, config), "cubelike")


@census_group.command("circulant")
@click.option("-n", "order", type=int, help="A single order.")
@click.option("--max-n", "max_n", type=int, help="Every order from 1 to N.")
@_config_options
@_handle_errors
def census_circulant(
    order: Optional[int], max_n: Optional[int], config_path: Optional[str], tolerances: Sequence[str], **fields: Any
) -> None:
    """Every circulant of the given order(s)."""
    if (order is None) == (max_n is None):
        raise click.UsageError("give exactly one of -n and --max-n")
    orders = [order] if order is not None else list(range(1, max_n + 1))  # type: ignore[operator]
    if any(n < 1 for n in orders):
        raise click.BadParameter("orders must be positive")
    config = _load(config_path, tolerances, **fields)
    _emit(census.circulant_census(orders, config), "circulant")


@cli.command("repro")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), help="TOML configuration file.")
@click.option("--tolerance", "tolerances", multiple=True, metavar="NAME=VALUE", help="Override a tolerance.")
@click.option("--only", multiple=True, metavar="NAME", help="Run only the named check (repeatable).")
@_handle_errors
def repro_cmd(config_path: Optional[str], tolerances: Sequence[str], only: Sequence[str]) -> None:
    """Run the reproduction checks and print a pass/fail table."""
    config = _load(config_path, tolerances)
    try:
        results = repro.run_checks(config, only or None)
    except KeyError as e:
        raise click.UsageError(str(e.args[0])) from e
    click.echo(repro.format_table(results))
    if any(r.failed for r in results):
        raise click.exceptions.Exit(EXIT_FAILURE)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point.

    Returns:
        Exit code (0 for success, non-zero for error).
    """
    try:
        result = cli.main(args=list(argv) if argv is not None else None, prog_name="qws", standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        return EXIT_FAILURE
    return result if isinstance(result, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
