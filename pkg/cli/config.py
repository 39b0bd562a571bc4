"""Settings and logging setup for the CLI app."""
import logging
from pathlib import Path

from pydantic_settings import BaseSettings, SettingsConfigDict
from rich.logging import RichHandler

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    """Application settings loaded from environment variables (prefix QJA_)."""
    model_config = SettingsConfigDict(env_prefix="QJA_", env_file=".env", extra="ignore")

    output_root: Path = Path("runs")
    threads: int = 1
    log_level: str = "WARNING"


def get_settings() -> Settings:
    """Fresh settings, so tests can change the environment between calls."""
    return Settings()


def resolve_output_dir(out: Path, settings: Settings) -> Path:
    """Relative output directories live under the configured output root."""
    return out if out.is_absolute() else settings.output_root / out


def configure_logging(level: str | int = "WARNING") -> None:
    """Install the Rich handler on the root logger once; later calls only change the level."""
    root = logging.getLogger()
    if not any(isinstance(h, RichHandler) for h in root.handlers):
        handler = RichHandler(show_path=False, rich_tracebacks=True)
        handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
        root.addHandler(handler)
    root.setLevel(level if isinstance(level, int) else level.upper())
