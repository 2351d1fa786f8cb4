"""Command-line interface for gasket fractal functions.

Run as ``python cli.py <command>`` or, through the Flask app, as
``flask fractal <command>``.  Exit status: 0 success, 1 a verification
failed, 2 bad expression/argument, 3 validation or depth error, 4 I/O error.
"""

from __future__ import annotations

import functools
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click
import numpy as np

import config
from errors import FractalError, InvalidArgument
from field_expr import (
    FIGURE_ALPHAS,
    FIGURE_COMPAT_TOL,
    FIGURE_TEXTS,
    ExprField,
    builtin_figure_fields,
)
from fractal import (
    DEFAULT_COMPAT_TOL,
    RESIDUAL_TOL,
    chaos_error_bound,
    chaos_game,
    eval_point,
    table_sample,
    validate,
    vm_table,
)
from models import Address, RunManifest, ScaleVector
from verify import (
    check_alpha_continuity,
    check_base_lipschitz,
    check_functional_residual,
    check_interpolation,
    check_rb_contraction,
    modulus_sweep,
    reports_to_json,
)

logger = logging.getLogger(__name__)

EXIT_CHECK_FAILED = 1
EXIT_IO = 4


# -- shared helpers (also used by the HTTP API) ------------------------------


def resolve_fields(figure=None, f_text=None, b_text=None, tol=None):
    """Return ``(f, b, f_text, b_text, tol)`` from a figure number or texts.

    Figure built-ins default to the lenient compatibility tolerance.
    """
    if figure is not None:
        if f_text or b_text:
            raise InvalidArgument("--figure cannot be combined with --f/--b")
        f, b = builtin_figure_fields(figure)
        f_text, b_text = FIGURE_TEXTS[int(figure)]
        return f, b, f_text, b_text, FIGURE_COMPAT_TOL if tol is None else tol
    if not f_text or not b_text:
        raise InvalidArgument("either --figure or both --f and --b are required")
    f = ExprField.from_text(f_text)
    b = ExprField.from_text(b_text)
    return f, b, f_text, b_text, DEFAULT_COMPAT_TOL if tol is None else tol


def format_number(value: float) -> str:
    return f"{value:.17g}"


def table_csv(points: np.ndarray) -> str:
    """CSV text for (x, y, value) rows sorted by y, then x."""
    order = np.lexsort((points[:, 0], points[:, 1]))
    lines = ["x,y,value"]
    for x, y, v in points[order].tolist():
        lines.append(f"{format_number(x)},{format_number(y)},{format_number(v)}")
    return "\n".join(lines) + "\n"


def write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def manifest_path(path: Path) -> Path:
    return path.with_suffix(".manifest.json")


def write_table(spec, m: int, out: Path, manifest: RunManifest) -> Path:
    table = vm_table(spec, m)
    write_text(out, table_csv(table_sample(table).points))
    manifest.output_files.append(str(out))
    write_text(manifest_path(out), manifest.to_json())
    logger.info("wrote %d rows to %s", len(table), out)
    return out


def handle_errors(func):
    """Map package errors onto the documented exit codes."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            return func(*args, **kwargs)
        except FractalError as exc:
            click.echo(f"error: {exc}", err=True)
            ctx.exit(exc.exit_code)
        except OSError as exc:
            click.echo(f"error: {exc}", err=True)
            ctx.exit(EXIT_IO)

    return wrapper


def _parse_alpha(ctx, param, value):
    if value is None:
        return None
    try:
        return ScaleVector.parse(value)
    except InvalidArgument as exc:
        raise click.BadParameter(str(exc)) from None


def problem_options(func):
    options = [
        click.option("--f", "f_text", help="Original function f(x, y)."),
        click.option("--b", "b_text", help="Base function b(x, y); must equal f on V_0."),
        click.option(
            "--figure",
            type=click.IntRange(1, 4),
            help="Use the (f, b) pair of a built-in figure.",
        ),
        click.option(
            "--alpha",
            default="0.5",
            show_default=True,
            callback=_parse_alpha,
            help="Scale vector a1,a2,a3 or a single scalar.",
        ),
        click.option(
            "--tol",
            type=float,
            default=None,
            help="V_0 compatibility tolerance (1e-9, or 1e-3 for figures).",
        ),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _problem(figure, f_text, b_text, alpha, tol):
    f, b, f_text, b_text, tol = resolve_fields(figure, f_text, b_text, tol)
    return validate(f, b, alpha, tol), f_text, b_text


def _emit_reports(reports) -> None:
    click.echo(reports_to_json(reports))
    if not all(r.passed for r in reports):
        click.get_current_context().exit(EXIT_CHECK_FAILED)


# -- commands -------------------------------------------------------------------


@click.group()
@click.option("-v", "--verbose", count=True, help="-v for INFO, -vv for DEBUG.")
def cli(verbose: int) -> None:
    """Construct, evaluate and verify fractal functions on the gasket."""
    level = config.LOG_LEVEL
    if verbose == 1:
        level = "INFO"
    elif verbose > 1:
        level = "DEBUG"
    logging.basicConfig(
        level=level,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


@cli.command()
@problem_options
@click.option("--m", "m", type=click.IntRange(min=0), default=6, show_default=True, help="Lattice depth.")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
@handle_errors
def table(f_text, b_text, figure, alpha, tol, m, out):
    """Write the exact V_m table as CSV with a manifest alongside."""
    spec, f_text, b_text = _problem(figure, f_text, b_text, alpha, tol)
    manifest = RunManifest(
        "table", f_text, b_text, alpha, m, None, config.TOOL_VERSION, tol=spec.compat_tol
    )
    write_table(spec, m, out, manifest)


@cli.command(name="eval")
@problem_options
@click.option("--address", default="", help="Cell address over the letters 1, 2, 3.")
@click.option("--n", "n", type=int, default=None, help="Unrolling depth.")
@click.option(
    "--corner",
    type=click.IntRange(1, 3),
    default=1,
    show_default=True,
    help="Corner of the addressed cell to evaluate at.",
)
@handle_errors
def eval_command(f_text, b_text, figure, alpha, tol, address, n, corner):
    """Evaluate F at an addressed vertex by truncated unrolling."""
    addr = Address.parse(address)
    spec, _, _ = _problem(figure, f_text, b_text, alpha, tol)
    n = config.EVAL_DEPTH if n is None else n
    if n < 1:
        raise InvalidArgument("--n must be at least 1")
    value, bound = eval_point(spec, addr, n, corner)
    click.echo(f"value={format_number(value)} error_bound={format_number(bound)}")


@cli.group()
def verify() -> None:
    """Check the stability bounds; exit 1 if any check fails."""


@verify.command(name="alpha")
@problem_options
@click.option("--beta", required=True, callback=_parse_alpha, help="Second scale vector.")
@click.option("--m", "m", type=click.IntRange(min=0), default=6, show_default=True)
@handle_errors
def verify_alpha(f_text, b_text, figure, alpha, tol, beta, m):
    """|F^alpha - F^beta| against its continuity bound."""
    f, b, _, _, tol = resolve_fields(figure, f_text, b_text, tol)
    _emit_reports([check_alpha_continuity(f, b, alpha, beta, m, tol)])


@verify.command(name="base")
@problem_options
@click.option("--c", "c_texts", multiple=True, required=True, help="Alternative base.")
@click.option("--m", "m", type=click.IntRange(min=0), default=6, show_default=True)
@handle_errors
def verify_base(f_text, b_text, figure, alpha, tol, c_texts, m):
    """|F_b - F_c| against the Lipschitz bound, one report per --c."""
    f, b, _, _, tol = resolve_fields(figure, f_text, b_text, tol)
    reports = [
        check_base_lipschitz(f, b, ExprField.from_text(c), alpha, m, tol)
        for c in c_texts
    ]
    _emit_reports(reports)


@verify.command(name="interp")
@problem_options
@click.option("--m", "m", type=click.IntRange(min=0), default=1, show_default=True)
@handle_errors
def verify_interp(f_text, b_text, figure, alpha, tol, m):
    """F = f on V_1."""
    spec, _, _ = _problem(figure, f_text, b_text, alpha, tol)
    bound = FIGURE_COMPAT_TOL if figure is not None else RESIDUAL_TOL
    _emit_reports([check_interpolation(spec, m, bound)])


@verify.command(name="residual")
@problem_options
@click.option("--m", "m", type=click.IntRange(min=0), default=6, show_default=True)
@handle_errors
def verify_residual(f_text, b_text, figure, alpha, tol, m):
    """Functional-equation residual of the V_m table."""
    spec, _, _ = _problem(figure, f_text, b_text, alpha, tol)
    _emit_reports([check_functional_residual(spec, m)])


@verify.command(name="contraction")
@problem_options
@click.option("--m", "m", type=click.IntRange(min=0), default=6, show_default=True)
@click.option("--iters", type=click.IntRange(min=1), default=10, show_default=True)
@handle_errors
def verify_contraction(f_text, b_text, figure, alpha, tol, m, iters):
    """Delta ratios of the fixed-point iteration against |alpha|."""
    spec, _, _ = _problem(figure, f_text, b_text, alpha, tol)
    _emit_reports([check_rb_contraction(spec, m, iters)])


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise InvalidArgument(f"expected comma-separated numbers, got {text!r}") from None


@verify.command(name="sweep")
@problem_options
@click.option("--radii", default="0.2,0.1,0.05,0.025", show_default=True)
@click.option(
    "--direction",
    "directions",
    multiple=True,
    default=("1,1,1",),
    show_default=True,
    help="Probe direction d1,d2,d3 (normalised); repeatable.",
)
@click.option("--m", "m", type=click.IntRange(min=0), default=6, show_default=True)
@handle_errors
def verify_sweep(f_text, b_text, figure, alpha, tol, radii, directions, m):
    """Distances along probe lines against the linear envelope."""
    f, b, _, _, tol = resolve_fields(figure, f_text, b_text, tol)
    report = modulus_sweep(
        f,
        b,
        alpha,
        [_parse_floats(d) for d in directions],
        _parse_floats(radii),
        m,
        tol,
    )
    click.echo(json.dumps(report.to_dict(), indent=2))
    if not report.monotone_envelope_ok:
        click.get_current_context().exit(EXIT_CHECK_FAILED)


def figure_filename(figure: int, alpha: float) -> str:
    return f"fig{figure}_alpha{alpha:g}.csv"


@cli.command()
@click.option(
    "--out",
    type=click.Path(file_okay=False, path_type=Path),
    default=Path("figures"),
    show_default=True,
)
@click.option("--figure", "figures", type=click.IntRange(1, 4), multiple=True)
@click.option("--alpha", "alphas", type=float, multiple=True, help="Override the alphas.")
@click.option("--m", "m", type=click.IntRange(min=0), default=None, help="Lattice depth (default 7).")
@click.option("--render", is_flag=True, help="Also write a PNG scatter per dataset.")
@click.option("--jobs", type=click.IntRange(min=1), default=1, show_default=True)
@handle_errors
def figures(out, figures, alphas, m, render, jobs):
    """Write the figure datasets: every figure at every alpha."""
    m = config.FIGURE_DEPTH if m is None else m
    figures = figures or tuple(sorted(FIGURE_TEXTS))
    alphas = alphas or FIGURE_ALPHAS
    tasks = [(fig, a) for fig in figures for a in alphas]
    out.mkdir(parents=True, exist_ok=True)

    def run(task):
        fig, a = task
        f, b, f_text, b_text, tol = resolve_fields(fig)
        alpha = ScaleVector.uniform(a)
        spec = validate(f, b, alpha, tol)
        path = out / figure_filename(fig, a)
        manifest = RunManifest(
            "figures",
            f_text,
            b_text,
            alpha,
            m,
            None,
            config.TOOL_VERSION,
            tol=tol,
            options={"figure": fig, "render": render},
        )
        if render:
            from render import render_graph

            png = path.with_suffix(".png")
            render_graph(
                table_sample(vm_table(spec, m)), png, f"figure {fig}, alpha={a:g}"
            )
            manifest.output_files.append(str(png))
        write_table(spec, m, path, manifest)
        return path

    with ThreadPoolExecutor(max_workers=jobs) as pool:
        written = list(pool.map(run, tasks))
    for path in written:
        click.echo(str(path))


def chaos_csv(sample) -> str:
    lines = ["x,y,value,address"]
    for (x, y, z), addr in zip(sample.points.tolist(), sample.addresses):
        lines.append(f"{format_number(x)},{format_number(y)},{format_number(z)},{addr}")
    return "\n".join(lines) + "\n"


@cli.command()
@problem_options
@click.option("--points", type=click.IntRange(min=1), default=10000, show_default=True)
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--burn-in", type=click.IntRange(min=0), default=None)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
@click.option("--render", is_flag=True, help="Also write a PNG scatter.")
@handle_errors
def chaos(f_text, b_text, figure, alpha, tol, points, seed, burn_in, out, render):
    """Sample the graph of F with the chaos game."""
    spec, f_text, b_text = _problem(figure, f_text, b_text, alpha, tol)
    burn_in = config.CHAOS_BURN_IN if burn_in is None else burn_in
    sample = chaos_game(spec, points, seed, burn_in)
    manifest = RunManifest(
        "chaos",
        f_text,
        b_text,
        alpha,
        0,
        seed,
        config.TOOL_VERSION,
        tol=spec.compat_tol,
        options={
            "points": points,
            "burn_in": burn_in,
            "z_error_bound": chaos_error_bound(spec, burn_in),
        },
    )
    write_text(out, chaos_csv(sample))
    manifest.output_files.append(str(out))
    if render:
        from render import render_graph

        png = out.with_suffix(".png")
        render_graph(sample, png, f"chaos game, seed {seed}")
        manifest.output_files.append(str(png))
    write_text(manifest_path(out), manifest.to_json())


if __name__ == "__main__":
    cli()
