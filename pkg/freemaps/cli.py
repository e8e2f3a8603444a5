"""
Command-line interface for freemaps.

Exit codes: 0 pass, 1 property violation, 2 parse error, 3 evaluation error,
4 I/O or file-format error.
"""
import json
import logging
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Callable, Iterator, List, NoReturn, Optional, Sequence

import click
from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from . import __version__
from .calculus import (
    derivative_matrix,
    derivative_rank_report,
    directional_derivative,
    injectivity_probe,
    properness_probe,
)
from .checks import SUITES, mobius_report, run_suite
from .config import (
    DEFAULT_TOLERANCES,
    ENV_PREFIX,
    OutputFormat,
    RunConfig,
    Settings,
    Tolerances,
)
from .elliptic import ELLIPSE_MODULUS, Orientation, build_ellipse, nonexistence_witness
from .exceptions import ArityError, ExpressionSyntaxError, FormatError, FreeMapsError
from .expr.nodes import FreeMapHandle, evaluate_map
from .io import (
    fingerprint,
    fingerprint_file,
    load_domain,
    load_tuple,
    matrix_from_json,
    read_json,
    tuple_to_json,
)
from .linalg import ComplexMatrix, MatrixTuple
from .models import Report, Verdict, complex_pairs
from .sampling import make_rng

console = Console()
err_console = Console(stderr=True)
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_PARSE = 2
EXIT_EVAL = 3
EXIT_IO = 4

VERDICT_STYLES = {
    Verdict.PASS: "green",
    Verdict.CONSISTENT: "green",
    Verdict.INCONCLUSIVE: "yellow",
}


def _setup_logging(level: str) -> None:
    handler = RichHandler(console=err_console, show_path=False)
    logging.basicConfig(
        level=level.upper(), format="%(message)s", handlers=[handler], force=True
    )


def _fail(error: BaseException, code: int) -> NoReturn:
    err_console.print(f"❌ [red]{error}[/red]")
    sys.exit(code)


@contextmanager
def _exit_codes() -> Iterator[None]:
    """Translate library errors into the documented exit codes."""
    try:
        yield
    except ExpressionSyntaxError as e:
        _fail(e, EXIT_PARSE)
    except FormatError as e:
        _fail(e, EXIT_IO)
    except FreeMapsError as e:
        _fail(e, EXIT_EVAL)
    except OSError as e:
        _fail(e, EXIT_IO)


def _parse_map(sources: Sequence[str], arity: int) -> FreeMapHandle:
    """Parse the components; an out-of-range variable is a parse error here."""
    try:
        return FreeMapHandle.from_strings(list(sources), arity)
    except ArityError as e:
        _fail(e, EXIT_PARSE)


def _load_gamma(path: str) -> ComplexMatrix:
    return matrix_from_json(read_json(path))


def _tolerances(config: RunConfig, field: Optional[str]) -> Tolerances:
    if config.tolerance is None or field is None:
        return DEFAULT_TOLERANCES
    return DEFAULT_TOLERANCES.model_copy(update={field: config.tolerance})


def _run_config(
    ctx: click.Context, subcommand: str, inputs: List[str], **options: Any
) -> RunConfig:
    settings: Settings = ctx.obj["settings"]
    as_json = options.pop("as_json", False)
    seed = options.pop("seed", None)
    trials = options.pop("trials", None)
    return RunConfig(
        subcommand=subcommand,
        inputs=inputs,
        seed=settings.seed if seed is None else seed,
        trials=settings.trials if trials is None else trials,
        format=OutputFormat.JSON if as_json else OutputFormat.TEXT,
        **options,
    )


def _write_out(payload: str, config: RunConfig) -> None:
    if config.output is None:
        return
    config.output.write_text(payload + "\n", encoding="utf-8")
    if config.format == OutputFormat.TEXT:
        console.print(f"💾 Report written to [blue]{config.output}[/blue]")


def _emit(report: Report, config: RunConfig, show: Callable[[Any], None]) -> None:
    payload = report.to_json()
    if config.format == OutputFormat.JSON:
        click.echo(payload)
    else:
        _show_report(report)
        show(report)
    _write_out(payload, config)


def _exit_for(report: Report) -> None:
    if report.verdict in (Verdict.FAIL, Verdict.COUNTEREXAMPLE):
        sys.exit(EXIT_VIOLATION)


def _show_report(report: Report) -> None:
    style = VERDICT_STYLES.get(report.verdict, "red")
    verdict = f"[{style}]{report.verdict.value}[/{style}]"
    console.print(f"\n📊 [bold]{report.op}[/bold]: {verdict}")
    if report.max_deviation is not None:
        console.print(f"   max deviation: {report.max_deviation:.6e}")
    for note in report.notes:
        console.print(f"   ℹ️  {note}")


def _matrix_table(m: ComplexMatrix, title: str) -> Table:
    table = Table(title=title, show_header=False)
    for _ in range(m.shape[1]):
        table.add_column(justify="right")
    for row in m:
        table.add_row(*(f"{v.real:.6g}{v.imag:+.6g}i" for v in row))
    return table


def _show_tuple(x: MatrixTuple, name: str) -> None:
    for j, component in enumerate(x, 1):
        console.print(_matrix_table(component, f"{name}[{j}]"))


def _emit_tuple(x: MatrixTuple, config: RunConfig, name: str) -> None:
    payload = json.dumps(tuple_to_json(x), indent=2)
    if config.format == OutputFormat.JSON:
        click.echo(payload)
    else:
        _show_tuple(x, name)
    _write_out(payload, config)


def _key_value_table(rows: Sequence[Sequence[str]]) -> Table:
    table = Table(show_header=True, header_style="bold magenta")
    table.add_column("Quantity", style="cyan")
    table.add_column("Value", style="white")
    for row in rows:
        table.add_row(*row)
    return table


def output_options(fn: Callable) -> Callable:
    fn = click.option(
        "--out",
        type=click.Path(dir_okay=False, path_type=Path),
        help="Write the JSON report to this file",
    )(fn)
    fn = click.option(
        "--json", "as_json", is_flag=True, help="Print JSON instead of text"
    )(fn)
    return fn


def tolerance_option(fn: Callable) -> Callable:
    return click.option(
        "--tol",
        type=click.FloatRange(min=0, min_open=True),
        help="Override the main tolerance of the command",
    )(fn)


@click.group()
@click.version_option(__version__, prog_name="freemaps")
@click.option(
    "--verbose", "-v", count=True, help="Log progress (-v info, -vv debug)"
)
@click.option(
    "--env-file",
    type=click.Path(dir_okay=False, path_type=Path),
    help="Path to a .env file",
)
@click.pass_context
def cli(ctx: click.Context, verbose: int, env_file: Optional[Path]):
    """freemaps - free maps on matrix tuples over LMI domains."""
    try:
        settings = Settings.from_env(env_file)
    except ValidationError as e:
        problem = e.errors()[0]
        name = f"{ENV_PREFIX}{str(problem['loc'][0]).upper()}"
        raise click.UsageError(f"Invalid {name}: {problem['msg']}") from e
    level = settings.log_level
    if verbose == 1:
        level = "INFO"
    elif verbose > 1:
        level = "DEBUG"
    _setup_logging(level)
    ctx.ensure_object(dict)
    ctx.obj["settings"] = settings


@cli.command(name="eval")
@click.argument("exprs", nargs=-1, required=True)
@click.option(
    "--tuple", "tuple_file", required=True, help="JSON file with the matrix tuple X"
)
@click.option(
    "--arity",
    type=click.IntRange(min=1),
    help="Number of variables (default: length of X)",
)
@output_options
@click.pass_context
def eval_cmd(ctx, exprs, tuple_file, arity, as_json, out):
    """Evaluate free expressions at a matrix tuple.

    Examples:
        freemaps eval "x1*x1" --tuple shift2.json
        freemaps eval "exp(i*0.5)*x1*inv(1+x1-exp(i*0.5)*x1)" --tuple zero.json --json
    """
    config = _run_config(
        ctx, "eval", list(exprs) + [tuple_file], as_json=as_json, output=out
    )
    with _exit_codes():
        x = load_tuple(tuple_file)
        f = _parse_map(exprs, arity or x.arity)
        _emit_tuple(evaluate_map(f, x), config, "f(X)")


@cli.command()
@click.option(
    "--domain", "domain_file", required=True, help="JSON file describing the domain"
)
@click.option(
    "--tuple", "tuple_file", required=True, help="JSON file with the matrix tuple X"
)
@tolerance_option
@output_options
@click.pass_context
def member(ctx, domain_file, tuple_file, tol, as_json, out):
    """Decide whether X lies inside, on the boundary of or outside a domain.

    --tol overrides the relative pivot floor. The exit code is 0 for any
    of the three answers.
    """
    config = _run_config(
        ctx,
        "member",
        [domain_file, tuple_file],
        as_json=as_json,
        output=out,
        tolerance=tol,
    )
    with _exit_codes():
        dom = load_domain(domain_file)
        x = load_tuple(tuple_file)
        report = dom.membership_report(x, _tolerances(config, "pivot_floor"))
        fingerprints = [fingerprint_file(domain_file), fingerprint_file(tuple_file)]
        report = report.model_copy(update={"inputs": fingerprints})

        def show(r):
            console.print(
                _key_value_table(
                    [
                        ("domain", dom.kind),
                        ("size", str(x.size)),
                        ("membership", r.membership.value),
                        ("gap", f"{r.gap:.12g}"),
                    ]
                )
            )

        _emit(report, config, show)


@cli.command()
@click.argument("exprs", nargs=-1, required=True)
@click.option(
    "--tuple", "tuple_file", required=True, help="JSON file with the base point X"
)
@click.option("--direction", "direction_file", help="JSON file with a direction H")
@click.option(
    "--arity",
    type=click.IntRange(min=1),
    help="Number of variables (default: length of X)",
)
@tolerance_option
@output_options
@click.pass_context
def deriv(ctx, exprs, tuple_file, direction_file, arity, tol, as_json, out):
    """Free derivative of a map at X.

    With --direction prints f'(X)[H]; otherwise reports the spectrum and the
    smallest singular value of f'(X) (--tol overrides the rank threshold).
    """
    inputs = list(exprs) + [tuple_file] + ([direction_file] if direction_file else [])
    config = _run_config(
        ctx, "deriv", inputs, as_json=as_json, output=out, tolerance=tol
    )
    with _exit_codes():
        x = load_tuple(tuple_file)
        f = _parse_map(exprs, arity or x.arity)
        if direction_file:
            h = load_tuple(direction_file)
            _emit_tuple(directional_derivative(f, x, h), config, "f'(X)[H]")
            return

        dm = derivative_matrix(f, x)
        report = derivative_rank_report(f, [x], _tolerances(config, "rank"))
        sample = {"singular_values": [float(s) for s in dm.singular_values()]}
        if f.co_arity == f.arity:
            sample["eigenvalues"] = complex_pairs(dm.eigenvalues())
        report = report.model_copy(
            update={
                "inputs": [
                    fingerprint(" ; ".join(exprs)),
                    fingerprint_file(tuple_file),
                ],
                "samples": [sample],
            }
        )

        def show(r):
            rows = [
                ("size", str(x.size)),
                ("matrix shape", f"{dm.matrix.shape[0]}x{dm.matrix.shape[1]}"),
                ("smallest singular value", f"{r.smallest_singular_values[0]:.6e}"),
                ("full rank", str(r.full_rank)),
            ]
            if "eigenvalues" in sample:
                eigenvalues = ", ".join(
                    f"{re:.6g}{im:+.6g}i" for re, im in sample["eigenvalues"]
                )
                rows.append(("eigenvalues", eigenvalues))
            console.print(_key_value_table(rows))

        _emit(report, config, show)


@cli.command()
@click.argument("suite", type=click.Choice(sorted(SUITES)))
@click.option(
    "--seed", type=click.IntRange(min=0), help="Seed of the random generator"
)
@click.option(
    "--trials", type=click.IntRange(min=1), help="Number of random instances"
)
@tolerance_option
@output_options
@click.pass_context
def check(ctx, suite, seed, trials, tol, as_json, out):
    """Run a randomized property suite.

    Examples:
        freemaps check sums --trials 50
        freemaps check derivative --seed 7 --json
    """
    config = _run_config(
        ctx,
        "check",
        [suite],
        seed=seed,
        trials=trials,
        tolerance=tol,
        as_json=as_json,
        output=out,
    )
    with _exit_codes():
        report = run_suite(
            suite, config.seed, config.trials, _tolerances(config, SUITES[suite][1])
        )

        def show(r):
            failing = [s for s in r.samples if s["deviation"] > r.tolerance]
            console.print(
                _key_value_table(
                    [
                        ("suite", r.suite),
                        ("seed", str(r.seed)),
                        ("trials", str(r.trials)),
                        ("tolerance", f"{r.tolerance:g}"),
                        ("violations", str(len(failing))),
                    ]
                )
            )

        _emit(report, config, show)
    _exit_for(report)


@cli.command(name="probe-proper")
@click.argument("exprs", nargs=-1, required=True)
@click.option(
    "--domain", "domain_file", required=True, help="JSON file with the domain"
)
@click.option(
    "--codomain",
    "codomain_file",
    help="JSON file with the codomain (default: the domain)",
)
@click.option(
    "--rays",
    type=click.IntRange(min=1),
    default=8,
    show_default=True,
    help="Number of random rays",
)
@click.option(
    "--size",
    type=click.IntRange(min=1),
    default=2,
    show_default=True,
    help="Matrix size of the rays",
)
@click.option(
    "--steps",
    type=click.IntRange(min=1),
    default=20,
    show_default=True,
    help="Radii per ray",
)
@click.option(
    "--seed", type=click.IntRange(min=0), help="Seed of the random generator"
)
@tolerance_option
@output_options
@click.pass_context
def probe_proper(
    ctx, exprs, domain_file, codomain_file, rays, size, steps, seed, tol, as_json, out
):
    """Follow random rays to the boundary and watch the codomain gap.

    --tol overrides the accepted terminal gap.
    """
    inputs = list(exprs) + [domain_file] + ([codomain_file] if codomain_file else [])
    config = _run_config(
        ctx,
        "probe-proper",
        inputs,
        seed=seed,
        tolerance=tol,
        as_json=as_json,
        output=out,
    )
    with _exit_codes():
        dom = load_domain(domain_file)
        codom = load_domain(codomain_file) if codomain_file else dom
        f = _parse_map(exprs, dom.arity)
        rng = make_rng(config.seed)
        directions = [MatrixTuple.random(rng, dom.arity, size) for _ in range(rays)]
        report = properness_probe(
            f, dom, codom, directions, steps, _tolerances(config, "terminal_gap")
        )
        fingerprints = [fingerprint(" ; ".join(exprs)), fingerprint_file(domain_file)]
        if codomain_file:
            fingerprints.append(fingerprint_file(codomain_file))
        report = report.model_copy(update={"inputs": fingerprints})

        def show(r):
            table = Table(show_header=True, header_style="bold magenta")
            table.add_column("Ray", style="cyan", width=4)
            table.add_column("r*", style="white")
            table.add_column("Terminal gap", style="yellow")
            table.add_column("Error", style="red")
            for ray in r.rays:
                table.add_row(
                    str(ray.index),
                    "-" if ray.r_star is None else f"{ray.r_star:.8g}",
                    "-" if ray.terminal_gap is None else f"{ray.terminal_gap:.3e}",
                    ray.error or "",
                )
            console.print(table)

        _emit(report, config, show)
    _exit_for(report)


@cli.command(name="probe-injective")
@click.argument("exprs", nargs=-1, required=True)
@click.option(
    "--domain", "domain_file", required=True, help="JSON file with the domain"
)
@click.option("--tuple", "tuple_file", required=True, help="JSON file with X")
@click.option("--other", "other_file", required=True, help="JSON file with Y")
@click.option(
    "--gamma",
    "gamma_file",
    required=True,
    help="JSON file with the n x m matrix Gamma",
)
@tolerance_option
@output_options
@click.pass_context
def probe_injective(
    ctx, exprs, domain_file, tuple_file, other_file, gamma_file, tol, as_json, out
):
    """Test f(X)G = G f(Y) for a witness of non-injectivity.

    Exits 1 only for a counterexample candidate; --tol overrides the
    hypothesis tolerance.
    """
    files = [domain_file, tuple_file, other_file, gamma_file]
    config = _run_config(
        ctx,
        "probe-injective",
        list(exprs) + files,
        tolerance=tol,
        as_json=as_json,
        output=out,
    )
    with _exit_codes():
        dom = load_domain(domain_file)
        x, y = load_tuple(tuple_file), load_tuple(other_file)
        gamma = _load_gamma(gamma_file)
        f = _parse_map(exprs, dom.arity)
        report = injectivity_probe(f, dom, x, y, gamma, _tolerances(config, "probe"))
        fingerprints = [fingerprint(" ; ".join(exprs))]
        fingerprints += [fingerprint_file(p) for p in files]
        report = report.model_copy(update={"inputs": fingerprints})

        def show(r):
            rows = [
                ("f(X)G - Gf(Y)", f"{r.hypothesis_residual:.3e}"),
                ("XG - GY", f"{r.intertwining_residual:.3e}"),
            ]
            if r.t_max is not None:
                rows.append(("t_max", f"{r.t_max:.6g}"))
            if r.constancy_deviation is not None:
                constancy = f"{r.constancy_deviation:.3e}"
                rows.append(("constancy of f(Z(t))", constancy))
            console.print(_key_value_table(rows))

        _emit(report, config, show)
    _exit_for(report)


@cli.command()
@click.option(
    "--theta", type=float, required=True, help="Rotation angle of f_theta"
)
@click.option(
    "--trials",
    type=click.IntRange(min=1),
    default=100,
    show_default=True,
    help="Random members to map",
)
@click.option(
    "--size",
    type=click.IntRange(min=1),
    default=4,
    show_default=True,
    help="Largest matrix size",
)
@click.option(
    "--seed", type=click.IntRange(min=0), help="Seed of the random generator"
)
@tolerance_option
@output_options
@click.pass_context
def mobius(ctx, theta, trials, size, seed, tol, as_json, out):
    """Check that f_theta is a proper self-map of the disk ||X - 1|| < sqrt(2).

    --tol overrides the accepted terminal gap of the properness probe.
    """
    config = _run_config(
        ctx,
        "mobius",
        [repr(theta)],
        seed=seed,
        trials=trials,
        tolerance=tol,
        as_json=as_json,
        output=out,
    )
    with _exit_codes():
        report = mobius_report(
            theta, config.trials, config.seed, size, _tolerances(config, "terminal_gap")
        )
        fingerprints = [fingerprint(repr(float(theta)))]
        report = report.model_copy(update={"inputs": fingerprints})

        def show(r):
            table = Table(show_header=True, header_style="bold magenta")
            table.add_column("Check", style="cyan")
            table.add_column("Verdict", style="white")
            table.add_column("Max deviation", style="yellow")
            for name, c in r.checks.items():
                style = VERDICT_STYLES.get(c.verdict, "red")
                table.add_row(
                    name,
                    f"[{style}]{c.verdict.value}[/{style}]",
                    "-" if c.max_deviation is None else f"{c.max_deviation:.3e}",
                )
            console.print(table)

        _emit(report, config, show)
    _exit_for(report)


@cli.command()
@click.option(
    "--orientation",
    type=click.Choice([o.value for o in Orientation]),
    default=Orientation.IMAGINARY.value,
    show_default=True,
    help="Which axis of the ellipse is the major one",
)
@click.option(
    "--modulus",
    type=click.FloatRange(0, 1, min_open=True, max_open=True),
    default=ELLIPSE_MODULUS,
    show_default=True,
    help="Elliptic modulus t",
)
@output_options
@click.pass_context
def ellipse(ctx, orientation, modulus, as_json, out):
    """Reproduce the non-existence witness for the quarter turn of the ellipse."""
    config = _run_config(
        ctx, "ellipse", [orientation, repr(modulus)], as_json=as_json, output=out
    )
    with _exit_codes():
        model = build_ellipse(Orientation(orientation), modulus)
        report = nonexistence_witness(model)
        fingerprints = [fingerprint(f"{orientation} {modulus!r}")]
        report = report.model_copy(update={"inputs": fingerprints})

        def show(r):
            console.print(
                _key_value_table(
                    [
                        ("a, b", f"{r.a:.9g}, {r.b:.9g}"),
                        ("C1", f"{r.c1_entry[0]:.9g}{r.c1_entry[1]:+.9g}i"),
                        ("C2", f"{r.c2_entry[0]:.9g}"),
                    ]
                )
            )
            table = Table(show_header=True, header_style="bold magenta")
            table.add_column("Constant", style="cyan")
            table.add_column("Computed", style="white")
            table.add_column("Expected", style="green")
            table.add_column("Tolerance", style="yellow")
            table.add_column("Match")
            for name, ref in r.reference.items():
                table.add_row(
                    name,
                    f"{ref.actual:.8g}",
                    f"{ref.expected:.8g}",
                    f"{ref.tolerance:g}",
                    "✅" if ref.matches else "❌",
                )
            console.print(table)

        _emit(report, config, show)
    _exit_for(report)


def main():
    """Main entry point for the CLI."""
    cli(obj={})


if __name__ == "__main__":
    main()
