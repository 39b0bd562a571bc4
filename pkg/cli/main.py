"""Main entry point for the CLI application."""
import typer

from cli.commands import experiment, preset
from cli.config import configure_logging, get_settings

app = typer.Typer(help="Quantum Jarzynski annealing experiments: run, validate and summarize.")

app.command("run")(experiment.run)
app.command("validate")(experiment.validate)
app.command("summarize")(experiment.summarize)
app.add_typer(preset.preset_app, name="preset")


@app.callback()
def root(
    verbose: int = typer.Option(0, "--verbose", "-v", count=True, help="-v for INFO, -vv for DEBUG"),
):
    """Set up logging before any command runs."""
    levels = {0: get_settings().log_level, 1: "INFO"}
    configure_logging(levels.get(verbose, "DEBUG"))


def main():
    """Run the CLI application."""
    app()


if __name__ == "__main__":
    main()
