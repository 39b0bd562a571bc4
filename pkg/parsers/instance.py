"""Instance files: one cost function per YAML document."""
from __future__ import annotations

import logging
from pathlib import Path
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from parsers import ConfigError, describe_validation_error, load_yaml_mapping
from qja.errors import QjaError
from qja.model import (
    CostDiagonal,
    InstanceKind,
    IsingInstance,
    PotentialDistribution,
    build_double_well,
    build_random_potential,
    ising_to_diagonal,
    random_ising,
)

logger = logging.getLogger(__name__)

MAX_SPINS = 14


class InstanceSpec(BaseModel):
    """
    Self-describing instance description.

    kind: potential   -> ``energies`` or (``D``, ``seed``, ``distribution``)
    kind: double_well -> ``D``, ``barrier``
    kind: ising       -> ``n_s`` with ``couplings``/``fields`` or ``seed``
    ``file`` points at another instance file and excludes every other key.
    """
    model_config = ConfigDict(extra="forbid")

    kind: Literal["potential", "double_well", "ising"] = "potential"
    D: Optional[int] = Field(default=None, ge=2)
    n_s: Optional[int] = Field(default=None, ge=1, le=MAX_SPINS)
    seed: Optional[int] = None
    distribution: PotentialDistribution = PotentialDistribution.UNIFORM01
    energies: Optional[List[float]] = None
    couplings: Optional[List[tuple[int, int, float]]] = None
    fields: Optional[List[float]] = None
    field_scale: float = 0.0
    barrier: Optional[float] = Field(default=None, gt=0)
    label: str = ""
    file: Optional[Path] = None

    @model_validator(mode="after")
    def _check_required_keys(self) -> "InstanceSpec":
        if self.file is not None:
            return self
        if self.kind == "potential":
            if self.energies is None and (self.D is None or self.seed is None):
                raise ValueError("a potential needs 'energies' or both 'D' and 'seed'")
        elif self.kind == "double_well":
            if self.D is None or self.barrier is None:
                raise ValueError("a double_well needs 'D' and 'barrier'")
        elif self.n_s is None:
            raise ValueError("an ising instance needs 'n_s'")
        elif self.couplings is None and self.fields is None and self.seed is None:
            raise ValueError("an ising instance needs 'couplings'/'fields' or a 'seed'")
        return self

    @property
    def dimension(self) -> Optional[int]:
        """Basis size implied by the spec, without building it."""
        if self.kind == "ising":
            return 2 ** self.n_s if self.n_s is not None else None
        if self.energies is not None:
            return len(self.energies)
        return self.D

    def build(self) -> CostDiagonal:
        """Materialize the cost diagonal; raises QjaError for inconsistent content."""
        if self.file is not None:
            return load_instance(self.file)
        if self.kind == "double_well":
            cost = build_double_well(self.D, self.barrier)  # type: ignore[arg-type]
        elif self.kind == "potential":
            if self.energies is not None:
                cost = CostDiagonal(energies=self.energies, label=self.label or "potential",
                                    kind=InstanceKind.POTENTIAL)
            else:
                cost = build_random_potential(self.D, self.seed, self.distribution)  # type: ignore[arg-type]
        elif self.couplings is not None or self.fields is not None:
            cost = ising_to_diagonal(
                IsingInstance(
                    num_spins=self.n_s,  # type: ignore[arg-type]
                    couplings=tuple(self.couplings or ()),
                    fields=self.fields,  # type: ignore[arg-type]
                    label=self.label,
                )
            )
        else:
            cost = ising_to_diagonal(random_ising(self.n_s, self.seed, self.field_scale))  # type: ignore[arg-type]
        if self.label and cost.label != self.label:
            cost = CostDiagonal(energies=cost.energies, label=self.label, kind=cost.kind,
                                num_spins=cost.num_spins)
        return cost


class InstanceParser:
    """Reads instance files into InstanceSpec models."""

    def parse(self, source: Path) -> InstanceSpec:
        data = load_yaml_mapping(source)
        try:
            spec = InstanceSpec.model_validate(data)
        except ValidationError as e:
            raise ConfigError(source, describe_validation_error(e)) from e
        if spec.file is not None:
            raise ConfigError(source, "an instance file cannot point at another file")
        return spec

    def validate(self, spec: InstanceSpec) -> List[str]:
        problems = []
        if spec.kind == "ising" and spec.energies is not None:
            problems.append("ising instances take couplings/fields, not energies")
        if spec.kind != "ising" and (spec.couplings is not None or spec.fields is not None):
            problems.append(f"{spec.kind} instances take no couplings or fields")
        if spec.energies is not None and spec.D is not None and spec.D != len(spec.energies):
            problems.append(f"'D'={spec.D} conflicts with {len(spec.energies)} energies")
        if spec.fields is not None and spec.n_s is not None and len(spec.fields) != spec.n_s:
            problems.append(f"'fields' has {len(spec.fields)} entries for n_s={spec.n_s}")
        return problems


def load_instance(source: Path) -> CostDiagonal:
    """Parse, validate and build the instance stored in ``source``."""
    parser = InstanceParser()
    spec = parser.parse(source)
    problems = parser.validate(spec)
    if problems:
        raise ConfigError(source, "; ".join(problems))
    try:
        cost = spec.build()
    except QjaError as e:
        raise ConfigError(source, str(e)) from e
    logger.info(f"Loaded instance {cost.label} (D={cost.dimension}) from {source}")
    return cost

