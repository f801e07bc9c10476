import io
import json
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import click
import numpy as np

from . import __version__ as hypalg_version
from .algebra import AlgebraElement, CentralCharges, bracket, get_algebra
from .config import HypalgConfig
from .disk import DiskIndex, DiskPoint, bargmann_basis, eval_disk_basis, eval_disk_matrix_element
from .exceptions import (
    ChecksumMismatch,
    HypalgException,
    IntegrabilityError,
    NonConvergence,
    NumericOverflow,
    VerificationFailure,
    WindowOverflow,
)
from .losert_basis import LosertIndex, basis_function
from .matrix_elements import MatrixElementIndex, matrix_element_function
from .numerics import GroupPoint, rho_of_x
from .sl2_reps import SeriesLabel
from .tables import entries_checksum, load_or_build, load_table, save_table, table_cache_path
from .verify import SUITE_NAMES, run_suite

# Logging goes to stderr so that stdout carries only data.
logging.basicConfig(stream=sys.stderr, level=logging.WARNING)
hypalg_logger = logging.getLogger("hypalg")

CONFIG_DIR = Path.home() / ".hypalg"
config_instance = HypalgConfig(CONFIG_DIR)

EVAL_SCHEMA = "hypalg-eval/1"
VERIFY_SCHEMA = "hypalg-verify/1"
BRACKET_SCHEMA = "hypalg-bracket/1"

EXIT_VERIFICATION = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3


def _exit_code(error: Exception) -> int:
    if isinstance(error, (VerificationFailure, ChecksumMismatch)):
        return EXIT_VERIFICATION
    if isinstance(error, (NonConvergence, IntegrabilityError, NumericOverflow)):
        return EXIT_NUMERIC
    return EXIT_USAGE


def _fail(ctx: click.Context, error: Exception) -> None:
    click.echo(f"Error: {error}", err=True)
    if ctx.obj.get("VERBOSE"):
        hypalg_logger.exception("Command failed")
    sys.exit(_exit_code(error))


class WindowType(click.ParamType):
    """M,N,K with M, N integers or half-integers and K an integer."""

    name = "window"

    def convert(self, value, param, ctx):
        if isinstance(value, tuple):
            return value
        try:
            parts = [float(v) for v in value.split(",")]
        except ValueError:
            self.fail(f"'{value}' is not of the form M,N,K.", param, ctx)
        if len(parts) != 3:
            self.fail(f"'{value}' is not of the form M,N,K.", param, ctx)
        m_max, n_max, k_max = parts
        if min(parts) < 0 or not float(2 * m_max).is_integer() or not float(2 * n_max).is_integer() or not k_max.is_integer():
            self.fail("Window bounds must be non-negative, M and N multiples of 1/2, K an integer.", param, ctx)
        as_number = lambda v: int(v) if v.is_integer() else v
        return as_number(m_max), as_number(n_max), int(k_max)


class GridType(click.ParamType):
    """AXIS:START:STOP:COUNT, AXIS one of x, rho, r."""

    name = "grid"
    axes = ("x", "rho", "r")

    def convert(self, value, param, ctx):
        if isinstance(value, tuple):
            return value
        parts = value.split(":")
        if len(parts) != 4 or parts[0] not in self.axes:
            self.fail(f"'{value}' is not of the form AXIS:START:STOP:COUNT with AXIS in {', '.join(self.axes)}.", param, ctx)
        try:
            start, stop, count = float(parts[1]), float(parts[2]), int(parts[3])
        except ValueError:
            self.fail(f"'{value}' has a non-numeric bound or count.", param, ctx)
        if count < 1:
            self.fail("Grid count must be at least 1.", param, ctx)
        return parts[0], start, stop, count


WINDOW = WindowType()
GRID = GridType()


def _parse_point(text: str, size: int) -> Tuple[float, ...]:
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise click.BadParameter(f"'{text}' is not a comma-separated list of numbers.", param_hint="--at")
    if not 1 <= len(values) <= size:
        raise click.BadParameter(f"Expected at most {size} coordinates, got {len(values)}.", param_hint="--at")
    return tuple(values + [0.0] * (size - len(values)))


def _dump(data) -> str:
    return json.dumps(data, sort_keys=True, indent=2)


def _emit(text: str, output: Optional[Path]) -> None:
    if output is None:
        click.echo(text, nl=not text.endswith("\n"))
        return
    output.parent.mkdir(parents=True, exist_ok=True)
    output.write_text(text, encoding="utf-8")
    hypalg_logger.info(f"Wrote {output}")


@click.group(invoke_without_command=True)
@click.option("--verbose", "verbose_flag", is_flag=True, help="Enable INFO level logging for hypalg operations.")
@click.option("--threads", type=click.IntRange(min=1), default=None, help="Worker threads for transforms and table builds.")
@click.version_option(version=hypalg_version, help="Show the version and exit.")
@click.pass_context
def cli(ctx, verbose_flag: bool, threads: Optional[int]):
    """hypalg: harmonic analysis on SL(2,R) and its current algebras.

    Evaluates matrix elements and Losert basis functions, runs invariant
    suites, builds structure-constant tables and brackets algebra elements.
    """
    ctx.ensure_object(dict)
    ctx.obj["VERBOSE"] = verbose_flag
    if verbose_flag:
        hypalg_logger.setLevel(logging.INFO)
        hypalg_logger.info("Verbose logging enabled.")
    else:
        hypalg_logger.setLevel(logging.WARNING)
    ctx.obj["THREADS"] = threads or config_instance.get_threads()
    if ctx.invoked_subcommand is None:
        click.echo(ctx.get_help())


# --- eval -------------------------------------------------------------------

Evaluator = Callable[[Sequence[np.ndarray]], np.ndarray]


def _group_evaluator(function) -> Tuple[Evaluator, Tuple[str, ...]]:
    return (lambda c: function(GroupPoint(c[0], c[1], c[2]))), ("rho", "phi1", "phi2")


def _disk_evaluator(function) -> Tuple[Evaluator, Tuple[str, ...]]:
    return (lambda c: function(DiskPoint(c[0], c[1]))), ("r", "phi")


def _build_evaluator(kind: str, params: Dict) -> Tuple[Evaluator, Tuple[str, ...], Dict]:
    """(evaluator over coordinate arrays, coordinate names, description)."""
    n, m, k, lam, sigma, epsilon = (params[key] for key in ("n", "m", "k", "lambda", "sigma", "epsilon"))
    if kind == "losert":
        idx = LosertIndex.of(m, n, k)
        evaluator, names = _group_evaluator(basis_function(idx))
        return evaluator, names, {"function": "losert", "m": m, "n": n, "k": k, "provenance": "jacobi-closed-form"}
    if kind in ("discrete+", "discrete-", "principal"):
        if kind == "principal":
            if sigma is None:
                raise click.UsageError("--sigma is required for the principal series.")
            eps = epsilon if epsilon is not None else (abs(n) % 1)
            label = SeriesLabel.principal(sigma, eps)
            description = {"sigma": sigma, "epsilon": eps}
        else:
            if lam is None:
                raise click.UsageError("--lambda is required for the discrete series.")
            label = SeriesLabel.discrete_plus(lam) if kind == "discrete+" else SeriesLabel.discrete_minus(lam)
            description = {"lambda": lam}
        idx = MatrixElementIndex.of(label, n, m)
        evaluator, names = _group_evaluator(matrix_element_function(idx))
        description.update({"function": f"matrix-element:{kind}", "n": n, "m": m, "provenance": "hypergeometric"})
        return evaluator, names, description
    if not float(n).is_integer():
        raise click.UsageError("Disk functions need an integer -n.")
    n = int(n)
    if kind == "disk-basis":
        idx = DiskIndex(n, k)
        evaluator, names = _disk_evaluator(lambda p: eval_disk_basis(idx, p))
        return evaluator, names, {"function": "disk-basis", "n": n, "k": k, "provenance": "jacobi-closed-form"}
    if kind == "disk-matrix-element":
        if sigma is None:
            raise click.UsageError("--sigma is required for disk matrix elements.")
        evaluator, names = _disk_evaluator(lambda p: eval_disk_matrix_element(n, sigma, p))
        return evaluator, names, {"function": "disk-matrix-element", "n": n, "sigma": sigma, "provenance": "hypergeometric"}
    if lam is None:
        raise click.UsageError("--lambda is required for Bargmann functions.")
    evaluator = lambda c: bargmann_basis(n, lam, np.asarray(c[0]) * np.exp(1j * np.asarray(c[1])))
    return evaluator, ("r", "phi"), {"function": "bargmann", "n": n, "lambda": lam, "provenance": "monomial"}


def _grid_coordinates(grid, names: Tuple[str, ...]) -> Tuple[List[np.ndarray], str]:
    axis, start, stop, count = grid
    values = np.linspace(start, stop, count)
    disk = names[0] == "r"
    if axis == "x":
        if np.any(values < 1):
            raise click.BadParameter("x grids must start at x >= 1.", param_hint="--grid")
        primary = np.sqrt((values - 1) / (values + 1)) if disk else rho_of_x(values)
    elif (axis == "r") != disk:
        raise click.BadParameter(f"Axis '{axis}' does not apply to this function.", param_hint="--grid")
    else:
        primary = values
    coordinates = [primary] + [np.zeros_like(values) for _ in names[1:]]
    return coordinates, axis


def _evaluate_rows(evaluator: Evaluator, coordinates: List[np.ndarray]) -> Tuple[np.ndarray, List[str]]:
    """Vectorised evaluation, falling back to row by row when some rows fail."""
    size = coordinates[0].size
    try:
        values = np.broadcast_to(np.asarray(evaluator(coordinates), dtype=complex), (size,))
        return values, [""] * size
    except HypalgException:
        pass
    values = np.full(size, np.nan, dtype=complex)
    errors = []
    for i in range(size):
        try:
            values[i] = complex(np.asarray(evaluator([c[i] for c in coordinates]), dtype=complex))
            errors.append("")
        except HypalgException as e:
            errors.append(f"{type(e).__name__}: {e}")
    return values, errors


def _format_csv(meta: Dict, columns: List[str], rows: List[List]) -> str:
    header = [f"# {key}={meta[key]}" for key in sorted(meta)] + [",".join(columns)]
    table = np.array([[_cell(v) for v in row] for row in rows], dtype=object).reshape(len(rows), len(columns))
    buffer = io.StringIO()
    np.savetxt(buffer, table, fmt="%s", delimiter=",", header="\n".join(header), comments="")
    return buffer.getvalue()


def _cell(value) -> str:
    if isinstance(value, str):
        return value.replace(",", ";")
    return f"{value:.17g}"


@cli.command(name="eval")
@click.option("--losert", "kind", flag_value="losert", help="Losert basis function Phi_{m,n,k}.")
@click.option("--matrix-element", "series", type=click.Choice(["discrete+", "discrete-", "principal"]), help="Matrix element psi of the given series.")
@click.option("--disk-basis", "kind", flag_value="disk-basis", help="Disk basis function Phi_{n,k}.")
@click.option("--disk-matrix-element", "kind", flag_value="disk-matrix-element", help="Disk matrix element Psi_{n i sigma}.")
@click.option("--bargmann", "kind", flag_value="bargmann", help="Bargmann function f_{n,lambda}.")
@click.option("-m", "m", type=float, default=0.0, show_default=True, help="Right weight m.")
@click.option("-n", "n", type=float, default=0.0, show_default=True, help="Left weight n.")
@click.option("-k", "k", type=click.IntRange(min=0), default=0, show_default=True, help="Degree k.")
@click.option("--lambda", "lam", type=float, default=None, help="Discrete-series label lambda.")
@click.option("--sigma", type=float, default=None, help="Principal-series label sigma.")
@click.option("--epsilon", type=click.Choice(["0", "0.5"]), default=None, help="Principal-series parity (default: parity of n).")
@click.option("--grid", type=GRID, default=None, help="AXIS:START:STOP:COUNT with AXIS in x, rho, r.")
@click.option("--at", "at", multiple=True, help="Point rho,phi1,phi2 (group) or r,phi (disk); repeatable.")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default=None, help="Output format (default from config).")
@click.option("-o", "--output", type=click.Path(dir_okay=False, path_type=Path), default=None, help="Write to a file instead of stdout.")
@click.pass_context
def eval_cmd(ctx, kind, series, m, n, k, lam, sigma, epsilon, grid, at, fmt, output):
    """Tabulate a basis function or matrix element on a grid or at points."""
    if series is not None:
        if kind is not None:
            raise click.UsageError("Choose exactly one function to evaluate.")
        kind = series
    if kind is None:
        raise click.UsageError("Choose a function: --losert, --matrix-element, --disk-basis, --disk-matrix-element or --bargmann.")
    if (grid is None) == (not at):
        raise click.UsageError("Give either --grid or one or more --at points.")
    params = {"n": n, "m": m, "k": k, "lambda": lam, "sigma": sigma, "epsilon": None if epsilon is None else float(epsilon)}
    fmt = fmt or config_instance.get("output_format")
    try:
        evaluator, names, description = _build_evaluator(kind, params)
        if grid is not None:
            coordinates, axis = _grid_coordinates(grid, names)
            labels = [axis]
            shown = [np.linspace(grid[1], grid[2], grid[3])]
        else:
            points = [_parse_point(text, len(names)) for text in at]
            coordinates = [np.array([p[i] for p in points]) for i in range(len(names))]
            labels, shown = list(names), coordinates
        values, errors = _evaluate_rows(evaluator, coordinates)
    except HypalgException as e:
        _fail(ctx, e)
        return
    spec = config_instance.quadrature_spec()
    meta = {
        "schema": EVAL_SCHEMA,
        "version": hypalg_version,
        **{key: description[key] for key in description},
        "abs_tol": spec.abs_tol,
        "rel_tol": spec.rel_tol,
    }
    columns = labels + ["re", "im", "error"]
    rows = [
        [float(c[i]) for c in shown] + [float(values[i].real), float(values[i].imag), errors[i]]
        for i in range(values.size)
    ]
    if fmt == "json":
        # nan is not JSON; failed rows carry null values
        encoded = [[None if isinstance(v, float) and np.isnan(v) else v for v in row] for row in rows]
        _emit(_dump({"meta": meta, "schema": EVAL_SCHEMA, "columns": columns, "rows": encoded}) + "\n", output)
    else:
        _emit(_format_csv(meta, columns, rows), output)


# --- verify -----------------------------------------------------------------

@cli.command()
@click.argument("suite", type=click.Choice(SUITE_NAMES))
@click.option("--window", type=WINDOW, default=None, help="Index window M,N,K (suite default if omitted).")
@click.option("--samples", type=click.IntRange(min=1), default=None, help="Number of random cases.")
@click.option("--algebra", default=None, help="Finite algebra: su2, sl2 or a JSON file.")
@click.option("--tol", type=float, default=None, help="Pass threshold (suite default if omitted).")
@click.option("--seed", type=int, default=0, show_default=True, help="Seed for random case selection.")
@click.option("--sigma-max", type=float, default=None, help="Sigma cutoff for transforms (default from config).")
@click.option("--n-sigma", type=click.IntRange(min=2), default=None, help="Sigma nodes for transforms (default from config).")
@click.option("-o", "--output", type=click.Path(dir_okay=False, path_type=Path), default=None, help="Write the report to a file.")
@click.pass_context
def verify(ctx, suite, window, samples, algebra, tol, seed, sigma_max, n_sigma, output):
    """Run a named invariant suite and print a JSON report.

    Exits with status 1 if any residual exceeds its tolerance.
    """
    try:
        report = run_suite(
            suite,
            window=window,
            samples=samples,
            algebra=algebra,
            tol=tol,
            seed=seed,
            spec=config_instance.quadrature_spec(),
            sigma_grid=config_instance.sigma_grid(sigma_max, n_sigma),
            cache_dir=config_instance.get_cache_dir(),
            threads=ctx.obj["THREADS"],
        )
    except (HypalgException, ValueError, OSError) as e:
        _fail(ctx, e)
        return
    document = report.to_dict()
    document["schema"] = VERIFY_SCHEMA
    document["version"] = hypalg_version
    _emit(_dump(document) + "\n", output)
    if not report.passed:
        click.echo(f"Error: suite '{report.suite}' failed with max residual {report.max_residual:.3e}.", err=True)
        sys.exit(EXIT_VERIFICATION)


# --- tables -----------------------------------------------------------------

@cli.command()
@click.option("--window", type=WINDOW, default="2,2,8", show_default=True, help="Index window M,N,K.")
@click.option("--tol", type=float, default=1e-8, show_default=True, help="Residual tolerance of each product expansion.")
@click.option("--load", "load_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None, help="Load and verify an existing table instead of building.")
@click.option("-o", "--output", type=click.Path(dir_okay=False, path_type=Path), default=None, help="Also write the table to this path.")
@click.option("--no-cache", is_flag=True, help="Build without reading or writing the cache.")
@click.pass_context
def tables(ctx, window, tol, load_path, output, no_cache):
    """Build (or load) a structure-constant table and report its residual."""
    cache_dir = None if no_cache else config_instance.get_cache_dir()
    try:
        if load_path is not None:
            table = load_table(load_path)
            source = str(load_path)
        else:
            table = load_or_build(window, tol, cache_dir, ctx.obj["THREADS"])
            source = str(table_cache_path(cache_dir, window, tol)) if cache_dir is not None else "built"
        if output is not None:
            save_table(table, output)
    except ChecksumMismatch as e:
        click.echo("Refusing to use a structure table that fails its checksum.", err=True)
        _fail(ctx, e)
        return
    except (HypalgException, OSError) as e:
        _fail(ctx, e)
        return
    click.echo(f"Structure table for window {tuple(table.window)}:")
    click.echo(f"  Pairs: {len(table.entries)}")
    click.echo(f"  Max residual: {table.max_residual:.3e} (tolerance {table.tolerance:.1e})")
    click.echo(f"  Checksum: {entries_checksum(table)}")
    click.echo(f"  Source: {source}")
    if output is not None:
        click.echo(f"  Written to: {output}")


# --- bracket ----------------------------------------------------------------

def _read_element(text: str) -> AlgebraElement:
    try:
        # inline JSON can be longer than a file name may be
        raw = text if text.lstrip().startswith("{") else Path(text).read_text(encoding="utf-8")
        return AlgebraElement.from_dict(json.loads(raw))
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as e:
        raise click.BadParameter(f"Could not read an algebra element from '{text}': {e}")


def _parse_charges(text: str) -> CentralCharges:
    try:
        k_l, k_r = (float(v) for v in text.split(","))
    except ValueError:
        raise click.BadParameter(f"'{text}' is not of the form K_L,K_R.", param_hint="--charges")
    return CentralCharges(k_l, k_r)


@cli.command(name="bracket")
@click.argument("first")
@click.argument("second")
@click.option("--algebra", default="su2", show_default=True, help="Finite algebra: su2, sl2 or a JSON file.")
@click.option("--window", type=WINDOW, default="2,2,8", show_default=True, help="Structure-table window M,N,K.")
@click.option("--tol", type=float, default=1e-8, show_default=True, help="Structure-table tolerance.")
@click.option("--charges", default="1,1", show_default=True, help="Central charges K_L,K_R for the central value.")
@click.pass_context
def bracket_cmd(ctx, first, second, algebra, window, tol, charges):
    """Bracket two algebra elements given as JSON files or inline JSON."""
    x, y = _read_element(first), _read_element(second)
    values = _parse_charges(charges)
    try:
        finite = get_algebra(algebra)
        table = load_or_build(window, tol, config_instance.get_cache_dir(), ctx.obj["THREADS"])
    except (FileNotFoundError, json.JSONDecodeError, KeyError, ValueError) as e:
        _fail(ctx, ValueError(f"Could not load algebra '{algebra}': {e}"))
        return
    except HypalgException as e:
        _fail(ctx, e)
        return
    document = {"schema": BRACKET_SCHEMA, "version": hypalg_version, "algebra": finite.name, "window": list(window)}
    try:
        result = bracket(x, y, finite, table)
    except WindowOverflow as e:
        document.update({"partial": True, "result": e.partial.to_dict()})
        click.echo(_dump(document))
        _fail(ctx, e)
        return
    document.update({"partial": False, "result": result.to_dict()})
    central = result.central_value(values)
    document["central_value"] = [central.real, central.imag]
    click.echo(_dump(document))


# --- config -----------------------------------------------------------------

@cli.group()
@click.pass_context
def config(ctx):
    """Manage hypalg configuration (tolerances, sigma grid, cache)."""
    pass


@config.command("set")
@click.argument("key")
@click.argument("value")
@click.pass_context
def config_set(ctx, key: str, value: str):
    """Set KEY to VALUE in ~/.hypalg/config.json."""
    try:
        stored = config_instance.set(key, value)
    except ValueError as e:
        click.echo(f"Error: {e}", err=True)
        sys.exit(EXIT_USAGE)
    click.echo(f"{key} set to: {stored}")


@config.command("show")
@click.pass_context
def config_show(ctx):
    """Show the current configuration."""
    click.echo("Current hypalg Configuration:")
    click.echo(f"  Config file location: {config_instance.config_file_path}")
    for key, value in sorted(config_instance.as_dict().items()):
        click.echo(f"  {key}: {value if value is not None else 'default'}")


if __name__ == "__main__":
    cli(obj={})
