"""
Artifact storage for experiment runs.
Writes and reads back the flat files of one output directory.
"""
import csv
import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Sequence

logger = logging.getLogger(__name__)


class ArtifactError(OSError):
    """Raised when an artifact cannot be written or read back."""


def format_cell(value: Any) -> str:
    """Shortest round-trip text for floats; every numeric cell must be finite."""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ArtifactError(f"refusing to write non-finite value {value!r}")
        return repr(value)
    if hasattr(value, "item"):
        return format_cell(value.item())
    return str(value)


class ArtifactStore:
    """Manages the files of one experiment output directory."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self._ensure_root()

    def _ensure_root(self):
        try:
            self.root.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ArtifactError(f"cannot create output directory {self.root}: {e}") from e

    def path(self, name: str) -> Path:
        return self.root / name

    def exists(self, name: str) -> bool:
        return self.path(name).exists()

    def write_csv(self, name: str, fieldnames: Sequence[str], rows: Iterable[Mapping[str, Any]]) -> Path:
        """Write rows with a fixed header; cells are formatted before the file is opened."""
        formatted = [{key: format_cell(row[key]) for key in fieldnames} for row in rows]
        target = self.path(name)
        try:
            with open(target, "w", newline="") as f:
                writer = csv.DictWriter(f, fieldnames=list(fieldnames), lineterminator="\n")
                writer.writeheader()
                writer.writerows(formatted)
        except OSError as e:
            raise ArtifactError(f"failed to write {target}: {e}") from e
        logger.debug(f"Wrote {len(formatted)} rows to {target}")
        return target

    def read_csv(self, name: str) -> List[Dict[str, str]]:
        target = self.path(name)
        try:
            with open(target, newline="") as f:
                return list(csv.DictReader(f))
        except OSError as e:
            raise ArtifactError(f"failed to read {target}: {e}") from e

    def write_text(self, name: str, text: str) -> Path:
        target = self.path(name)
        try:
            target.write_text(text)
        except OSError as e:
            raise ArtifactError(f"failed to write {target}: {e}") from e
        return target

    def read_text(self, name: str) -> str:
        target = self.path(name)
        try:
            return target.read_text()
        except OSError as e:
            raise ArtifactError(f"failed to read {target}: {e}") from e

    def write_values(self, name: str, values: Mapping[str, Any]) -> Path:
        """``key: value`` lines, in insertion order."""
        lines = [f"{key}: {format_cell(value)}" for key, value in values.items()]
        return self.write_text(name, "\n".join(lines) + "\n")

    def read_values(self, name: str) -> Dict[str, str]:
        values = {}
        for line in self.read_text(name).splitlines():
            if ":" in line:
                key, _, value = line.partition(":")
                values[key.strip()] = value.strip()
        return values
