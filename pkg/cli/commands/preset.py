"""Built-in experiment presets."""
from pathlib import Path
from typing import Optional

import typer
from rich.console import Console

from cli.commands.experiment import apply_overrides, launch
from cli.runner import EXIT_IO
from parsers.experiment import Engine, ExperimentConfig, ScheduleSpec
from parsers.instance import InstanceSpec

preset_app = typer.Typer(help="Run built-in experiments.")
console = Console()

FIGURE1_SEED = 105


def preset_figure1() -> ExperimentConfig:
    """
    QA against QJA on a D=64 random potential: linear beta 0 -> 100 and
    f 0 -> 1 over n=1000 steps of dt=0.1 (tau = 100).
    """
    return ExperimentConfig(
        name="figure1",
        instance=InstanceSpec(kind="potential", D=64, seed=FIGURE1_SEED),
        schedule=ScheduleSpec(n_steps=1000, dt=0.1, beta_final=100.0),
        engines=[Engine.QA, Engine.QJA],
        seed=FIGURE1_SEED,
        output_dir="figure1",
    )


@preset_app.command("figure1")
def figure1(
    out: Optional[Path] = typer.Option(None, "--out", help="Output directory"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Override the global seed"),
    threads: Optional[int] = typer.Option(None, "--threads", min=1, help="Worker threads"),
    save_config: Optional[Path] = typer.Option(None, "--save-config", help="Also write the preset as YAML"),
):
    """Reproduce the QA vs QJA comparison on the D=64 potential."""
    config = apply_overrides(preset_figure1(), seed, out)
    if save_config is not None:
        try:
            save_config.write_text(config.to_yaml())
        except OSError as e:
            console.print(f"[red]❌ Failed to save config: {e}[/red]")
            raise typer.Exit(code=EXIT_IO)
        console.print(f"[green]✅ Preset saved to {save_config}[/green]")
    launch(config, threads)
