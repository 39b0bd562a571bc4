"""Commands that run, validate and summarize experiment configs."""
from pathlib import Path
from typing import List, Optional

import typer
from rich.console import Console
from rich.table import Table

from cli.config import get_settings, resolve_output_dir
from cli.report import Verdict, write_summary
from cli.runner import EXIT_CONFIG, EXIT_IO, EXIT_OK, run_experiment
from cli.state import ArtifactError, ArtifactStore
from parsers import ConfigError
from parsers.experiment import ExperimentConfig, load_config

console = Console()

VERDICT_STYLES = {True: "[green]PASS[/green]", False: "[red]FAIL[/red]", None: "[dim]INFO[/dim]"}


def print_verdicts(verdicts: List[Verdict]):
    table = Table(title="Summary")
    table.add_column("Check")
    table.add_column("Value", justify="right")
    table.add_column("Bound")
    table.add_column("Status")
    for verdict in verdicts:
        table.add_row(verdict.name, f"{verdict.value:.6g}", verdict.bound, VERDICT_STYLES[verdict.passed])
    console.print(table)


def apply_overrides(config: ExperimentConfig, seed: Optional[int], out: Optional[Path]) -> ExperimentConfig:
    update = {}
    if seed is not None:
        update["seed"] = seed
    if out is not None:
        update["output_dir"] = str(out)
    return config.model_copy(update=update) if update else config


def launch(config: ExperimentConfig, threads: Optional[int]):
    """Run ``config`` and exit with the runner's status code."""
    settings = get_settings()
    output_dir = resolve_output_dir(Path(config.output_dir), settings)
    workers = threads if threads is not None else settings.threads
    console.print(f"[cyan]Running {config.name} ({', '.join(e.value for e in config.engines)}) -> {output_dir}[/cyan]")
    outcome = run_experiment(config, output_dir, workers)
    if outcome.exit_code != EXIT_OK:
        console.print(f"[red]❌ {outcome.error}[/red]")
        raise typer.Exit(code=outcome.exit_code)
    print_verdicts(outcome.verdicts)
    if outcome.passed:
        console.print(f"[green]✅ All checks passed; artifacts in {output_dir}[/green]")
    else:
        console.print(f"[yellow]⚠️  Some checks failed; see {output_dir / 'summary.txt'}[/yellow]")


def run(
    config_path: Path = typer.Argument(..., help="Experiment config (YAML)"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Override the global seed"),
    threads: Optional[int] = typer.Option(None, "--threads", min=1, help="Worker threads"),
    out: Optional[Path] = typer.Option(None, "--out", help="Output directory"),
):
    """Run every engine listed in an experiment config."""
    try:
        config = load_config(config_path)
    except ConfigError as e:
        console.print(f"[red]❌ {e}[/red]")
        raise typer.Exit(code=EXIT_CONFIG)
    launch(apply_overrides(config, seed, out), threads)


def validate(config_path: Path = typer.Argument(..., help="Experiment config (YAML)")):
    """Check a config without running anything."""
    try:
        config = load_config(config_path)
        config.instance.build()
        config.schedule.build()
    except ConfigError as e:
        console.print(f"[red]❌ {e}[/red]")
        raise typer.Exit(code=EXIT_CONFIG)
    except ValueError as e:
        console.print(f"[red]❌ {config_path}: {e}[/red]")
        raise typer.Exit(code=EXIT_CONFIG)
    console.print(f"[green]✅ {config.name} is valid[/green] (hash {config.config_hash()[:12]})")


def summarize(output_dir: Path = typer.Argument(..., help="Directory written by 'qja run'")):
    """Recompute summary.txt from the artifacts of a finished run."""
    try:
        if not (output_dir / "config.yaml").is_file():
            raise ArtifactError(f"{output_dir} has no config.yaml snapshot")
        store = ArtifactStore(output_dir)
        verdicts = write_summary(store)
    except (ArtifactError, KeyError, ValueError) as e:
        console.print(f"[red]❌ {e}[/red]")
        raise typer.Exit(code=EXIT_IO)
    print_verdicts(verdicts)

