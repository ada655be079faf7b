import os

os.environ.setdefault("LAB_ENV", "cli")

from typing import Any, Optional

import typer
from rich.console import Console
from rich.table import Table
from rich.text import Text

from core import mat2
from core.constructions import build
from core.errors import LabError
from core.gf import field_from_order, tables
from core.utils import emit_report, format_set, load_json_config, parse_parameters, write_set_file
from experiments.catalog import Experiment
from experiments.main import catalog, merge_config, run_experiment
from models import ConstructionKind, ConstructionSpec, ExperimentReport, Variant
from version import __version__

app = typer.Typer(help="Exact desk-scale experiments on sum-product phenomena in M2(F_q).")
console = Console(stderr=True)

EXIT_FAILED = 1
EXIT_ERROR = 2
SET_ROLES = "abcdef"


def _fail(error: LabError) -> None:
    message = Text()
    message.append("❌ ", style="bold red")
    message.append(type(error).__name__, style="bold red")
    message.append(f": {error}")
    console.print(message)
    raise typer.Exit(code=EXIT_ERROR)


def _parse_params(values: Optional[list[str]]) -> dict[str, str]:
    params: dict[str, str] = {}
    for value in values or []:
        params.update(parse_parameters(value))
    return params


def _print_summary(report: ExperimentReport) -> None:
    table = Table(title=f"{report.experiment} over F_{report.q}", show_lines=False)
    table.add_column("check")
    table.add_column("value", justify="right")
    for key, value in report.measured.items():
        if not isinstance(value, (list, dict)):
            table.add_row(key, f"{value:.6g}" if isinstance(value, float) else str(value))
    for key, value in report.ratios.items():
        table.add_row(f"ratio {key}", f"{value:.4g}", style="cyan")
    for key, value in report.pass_flags.items():
        table.add_row(key, "pass" if value else "FAIL", style="green" if value else "bold red")
    table.caption = f"{report.runtime_ms:.0f} ms"
    console.print(table)


def _experiment_command(entry: Experiment):
    def command(
        q: Optional[str] = typer.Option(
            None, "--q", help=f"Field order p or p^k (default {entry.default_q})"
        ),
        set_a: Optional[str] = typer.Option(
            None, "--set-a", help="file | construction:<kind>[:k=v;...] | random:<size>:<seed>"
        ),
        set_b: Optional[str] = typer.Option(None, "--set-b"),
        set_c: Optional[str] = typer.Option(None, "--set-c"),
        set_d: Optional[str] = typer.Option(None, "--set-d"),
        set_e: Optional[str] = typer.Option(None, "--set-e"),
        set_f: Optional[str] = typer.Option(None, "--set-f"),
        trials: Optional[int] = typer.Option(None, "--trials", "-n", help="Number of random trials"),
        size: Optional[int] = typer.Option(None, "--size", help="Size of random sets"),
        variant: Optional[Variant] = typer.Option(
            None, "--variant", help="Product variant of the digraph"
        ),
        seed: Optional[int] = typer.Option(None, "--seed", help="Master seed"),
        param: Optional[list[str]] = typer.Option(
            None, "--param", "-p", help="Extra parameter key=value"
        ),
        out: Optional[str] = typer.Option(None, "--out", "-o", help="Write the report here"),
        fmt: str = typer.Option("json", "--format", "-f", help="json or csv"),
        config: Optional[str] = typer.Option(None, "--config", help="JSON config document"),
    ) -> None:
        sources = (set_a, set_b, set_c, set_d, set_e, set_f)
        flags: dict[str, Any] = {
            "q": q,
            "trials": trials,
            "size": size,
            "variant": variant,
            "seed": seed,
            "sets": {role: s for role, s in zip(SET_ROLES, sources) if s is not None},
        }
        try:
            flags["parameters"] = _parse_params(param)
            file_config = load_json_config(config) if config else None
            report = run_experiment(entry.name, merge_config(file_config, flags))
            text = emit_report(report, fmt, out)
        except LabError as e:
            _fail(e)
        if out is None:
            typer.echo(text, nl=False)
        _print_summary(report)
        if not report.passed:
            raise typer.Exit(code=EXIT_FAILED)

    command.__doc__ = f"{entry.summary}\n\nChecks: {entry.cites}"
    return command


for _entry in catalog.experiments.values():
    app.command(name=_entry.name)(_experiment_command(_entry))
    for _alias in _entry.aliases:
        app.command(name=_alias, hidden=True)(_experiment_command(_entry))


@app.command(name="list")
def list_experiments() -> None:
    """
    List the experiment catalog.

    Returns
    -------
    None
    """
    table = Table(title="Experiments")
    table.add_column("name", style="bold")
    table.add_column("q", justify="right")
    table.add_column("summary")
    table.add_column("checks", style="dim")
    for entry in catalog.experiments.values():
        limit = f" (<= {entry.max_q})" if entry.max_q else ""
        names = ", ".join((entry.name, *entry.aliases))
        table.add_row(names, f"{entry.default_q}{limit}", entry.summary, entry.cites)
    Console().print(table)


@app.command()
def construct(
    kind: ConstructionKind = typer.Argument(..., help="Construction name"),
    q: str = typer.Option("2", "--q", help="Field order p or p^k"),
    param: Optional[list[str]] = typer.Option(
        None, "--param", "-p", help="Parameter key=value, e.g. X=0,1"
    ),
    out: Optional[str] = typer.Option(None, "--out", "-o", help="Set file to write"),
) -> None:
    """
    Build a named set and emit it as a set file.

    Parameters
    ----------
    kind : ConstructionKind
        Which construction
    q : str
        Field order
    param : list[str], optional
        Construction parameters
    out : str, optional
        Output path; stdout when omitted

    Returns
    -------
    None
    """
    try:
        field = field_from_order(q)
        A = build(ConstructionSpec(kind=kind, parameters=_parse_params(param)), field)
        if out:
            write_set_file(out, A)
        else:
            typer.echo(format_set(A), nl=False)
    except LabError as e:
        _fail(e)
    console.print(f"[green]✅ {kind.value}[/green] over F_{field.q}: {len(A)} matrices")


@app.command()
def field(q: str = typer.Option("2", "--q", help="Field order p or p^k")) -> None:
    """
    Show a field and check its lookup tables.

    Parameters
    ----------
    q : str
        Field order

    Returns
    -------
    None
    """
    try:
        field = field_from_order(q)
    except LabError as e:
        _fail(e)
    t = tables(field)
    nonzero = range(1, field.q)
    checks = {
        "inverses": all(int(t.mul[x, t.inv[x]]) == 1 for x in nonzero),
        "negatives": all(int(t.add[x, t.neg[x]]) == 0 for x in range(field.q)),
        "no_zero_divisors": all(int(t.mul[x, y]) != 0 for x in nonzero for y in nonzero),
    }
    table = Table(title=f"F_{field.q}")
    table.add_column("property")
    table.add_column("value", justify="right")
    table.add_row("p", str(field.p))
    table.add_row("k", str(field.k))
    table.add_row("modulus", ",".join(str(c) for c in field.modulus) or "-")
    table.add_row("|GL2|", str(mat2.gl2_indices(field).size))
    for name, ok in checks.items():
        table.add_row(name, "pass" if ok else "FAIL", style="green" if ok else "bold red")
    Console().print(table)
    if not all(checks.values()):
        raise typer.Exit(code=EXIT_FAILED)


@app.command()
def version() -> None:
    """Print the version."""
    typer.echo(__version__)


if __name__ == "__main__":
    app()
