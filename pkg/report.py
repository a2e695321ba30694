"""
DonorQCA - Rich tables and panels for parameter tables, runs, comparisons and tomography.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, List, Optional, Sequence

from rich import box
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from device_params import ParamRow
from models import InfeasibleSelectivityError, format_duration, format_ns, format_sig

console = Console()

STATUS_TAGS = {
    "ok": "OK",
    "out": "OUT",
    "flag": "FLAG",
    "info": "",
}

STATUS_COLORS = {
    "ok": "green",
    "out": "red",
    "flag": "magenta",
    "info": "dim",
}


def _num(value, digits: int = 5) -> str:
    if value is None:
        return ""
    return format_sig(float(value), digits)


def _files_block(files: Sequence[Path]) -> str:
    if not files:
        return ""
    return "\n\n" + "\n".join(f"  Output: [cyan]{path}[/]" for path in files)


def show_param_table(rows: Iterable[ParamRow], title: str = "Derived Device Parameters") -> None:
    table = Table(box=box.ROUNDED, title=title, title_style="bold cyan", show_lines=False)
    table.add_column("Quantity", min_width=30)
    table.add_column("Value", justify="right", width=12)
    table.add_column("Unit", width=7)
    table.add_column("Quoted", justify="right", width=10)
    table.add_column("Tolerance", justify="center", width=10)
    table.add_column("Status", justify="center", width=8)

    flagged = []
    for row in rows:
        color = STATUS_COLORS.get(row.status, "white")
        tag = STATUS_TAGS.get(row.status, row.status)
        table.add_row(row.label, _num(row.value), row.unit, _num(row.quoted), row.tolerance,
                      f"[{color}]{tag}[/]" if tag else "")
        if row.status == "flag" and row.note:
            flagged.append(f"{row.label}: {row.note}")

    console.print()
    console.print(table)
    if flagged:
        console.print(Panel("\n".join(flagged), border_style="magenta",
                            title="[bold]Documented discrepancies[/]"))
    console.print()


def show_run_report(summary: dict, final: dict, files: Sequence[Path], duration_s: float = 0.0) -> None:
    """Summary panel plus the final-sample observable table."""
    table = Table(box=box.SIMPLE, title="Final sample", title_style="bold")
    table.add_column("Observable")
    table.add_column("Mean", justify="right")
    table.add_column("Std. error", justify="right")
    for name, values in final.items():
        table.add_row(name, _num(values["mean"], 8), _num(values["stderr"], 3))

    lines = [
        f"  Device:     [bold]{summary.get('device', '')}[/]",
        f"  Program:    [bold]{summary.get('program', '')}[/] ({summary.get('events', 0)} events, "
        f"{format_ns(summary.get('duration_ns', 0.0))})",
        f"  Molecules:  [bold]{summary.get('n_molecules', 0):,}[/] at {summary.get('level', '')} level, "
        f"seed {summary.get('seed', '')}",
    ]
    fit = summary.get("fit")
    if fit:
        lines.append(f"  Fitted T2:  [bold green]{_num(fit['t2_us'], 4)} μs[/] from {fit['observable']}")
    if duration_s > 0:
        lines.append(f"  Wall time:  [bold cyan]{format_duration(duration_s)}[/]")

    console.print()
    console.print(Panel.fit("[bold green]Run Complete[/]\n\n" + "\n".join(lines) + _files_block(files),
                            border_style="green", title="[bold]DonorQCA Report[/]"))
    if final:
        console.print(table)
    console.print()


def show_compare_report(report, files: Sequence[Path] = ()) -> None:
    table = Table(box=box.ROUNDED, title=f"Oracle vs pulse: {report.program}",
                  title_style="bold cyan")
    table.add_column("#", justify="right", width=4)
    table.add_column("Event", min_width=24)
    table.add_column("Event fidelity", justify="right")
    table.add_column("Cumulative", justify="right")
    for e in report.events:
        color = "green" if e.fidelity >= 0.99 else "yellow" if e.fidelity >= 0.9 else "red"
        table.add_row(str(e.index), e.label, f"[{color}]{e.fidelity:.6f}[/]", f"{e.cumulative:.6f}")

    console.print()
    console.print(table)
    console.print(Panel.fit(
        f"  Cumulative fidelity:  [bold]{report.cumulative:.6f}[/]\n"
        f"  Worst single event:   [bold]{report.worst_event:.6f}[/]" + _files_block(files),
        border_style="cyan",
    ))
    console.print()


def show_tomography(result, files: Sequence[Path] = ()) -> None:
    b = result.bloch
    sx, sy, sz = result.stderr
    console.print()
    console.print(Panel.fit(
        f"[bold cyan]D-cell tomography[/] ({result.n_molecules:,} molecules, seed {result.seed})\n\n"
        f"  ⟨σ_x⟩ = [bold]{b.x:+.6f}[/] ± {sx:.2g}\n"
        f"  ⟨σ_y⟩ = [bold]{b.y:+.6f}[/] ± {sy:.2g}\n"
        f"  ⟨σ_z⟩ = [bold]{b.z:+.6f}[/] ± {sz:.2g}\n"
        f"  |r|   = {b.norm:.6f}" + _files_block(files),
        border_style="cyan",
    ))
    console.print()


def show_demo_list(demo_modules: Iterable) -> None:
    table = Table(box=box.ROUNDED, title="Demos", title_style="bold cyan")
    table.add_column("Name")
    table.add_column("Device")
    table.add_column("Description")
    for demo in demo_modules:
        table.add_row(f"[bold]{demo.name}[/]", demo.device, demo.description)
    console.print(table)


def show_error(exc: Exception, err_console: Optional[Console] = None) -> None:
    """One red panel on standard error; collisions listed line by line."""
    target = err_console or Console(stderr=True)
    body = f"[bold red]{type(exc).__name__}[/]: {exc}"
    collisions: List[str] = getattr(exc, "collisions", []) if isinstance(exc, InfeasibleSelectivityError) else []
    if collisions:
        body += "\n\n" + "\n".join(f"  • {c}" for c in collisions)
    target.print(Panel(body, border_style="red"))
