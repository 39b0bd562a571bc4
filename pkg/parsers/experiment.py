"""Experiment configs: what to run, on which instance, judged by which thresholds."""
from __future__ import annotations

import hashlib
import logging
from enum import Enum
from pathlib import Path
from typing import List, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from parsers import ConfigError, describe_validation_error, load_yaml_mapping
from parsers.instance import InstanceParser, InstanceSpec
from qja.dynamics import Topology
from qja.engines import StepOrder
from qja.mapping import MappingConvention
from qja.model import AnnealSchedule, FShape, make_schedule

logger = logging.getLogger(__name__)

DENSE_LIMIT = 4096


class Engine(str, Enum):
    QA = "qa"
    QJA = "qja"
    QJA_NO_UNITARY = "qja_no_unitary"
    MAPPED_QA = "mapped_qa"
    JE_MC = "je_mc"
    JE_EXACT = "je_exact"
    GAP_SCAN = "gap_scan"


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ScheduleSpec(_Section):
    n_steps: int = Field(default=1000, ge=1)
    dt: float = Field(default=0.1, gt=0)
    beta_final: float = Field(default=100.0, gt=0)
    f_shape: FShape = FShape.LINEAR

    def build(self) -> AnnealSchedule:
        return make_schedule(self.n_steps, self.dt, self.beta_final, self.f_shape)


class DynamicsSpec(_Section):
    topology: Optional[Topology] = None
    attempt_rate: float = Field(default=1.0, gt=0)
    convention: MappingConvention = MappingConvention.KERNEL
    order: StepOrder = StepOrder.W_THEN_U


class JeSpec(_Section):
    n_samples: int = Field(default=100_000, ge=1)
    schedule: Optional[ScheduleSpec] = None


class AcceptanceThresholds(_Section):
    """Pass/fail limits applied to the emitted CSVs. ``None`` disables a check."""
    overlap_floor: float = 1.0 - 1e-8
    gibbs_max_abs_error: float = 1e-6
    max_norm_drift: float = 1e-9
    qa_max_gs_prob: Optional[float] = 0.9
    qja_min_gs_prob: Optional[float] = 0.99
    je_exact_rtol: float = 1e-12
    je_mc_sigmas: float = 3.0


class ExperimentConfig(_Section):
    """Everything needed to bit-reproduce one experiment."""
    name: str = "experiment"
    instance: InstanceSpec
    schedule: ScheduleSpec = ScheduleSpec()
    dynamics: DynamicsSpec = DynamicsSpec()
    engines: List[Engine] = Field(min_length=1)
    je: JeSpec = JeSpec()
    seed: int = 0
    output_dir: str = "experiment"
    thresholds: AcceptanceThresholds = AcceptanceThresholds()

    @field_validator("engines")
    @classmethod
    def _unique_engines(cls, engines: List[Engine]) -> List[Engine]:
        if len(set(engines)) != len(engines):
            raise ValueError("engines must not repeat")
        return engines

    def config_hash(self) -> str:
        """sha256 of the canonical JSON form; equal configs hash equally."""
        return hashlib.sha256(self.model_dump_json().encode()).hexdigest()

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.model_dump(mode="json"), sort_keys=False)


class ExperimentConfigParser:
    """Reads experiment configs from YAML and checks cross-field consistency."""

    def parse(self, source: Path) -> ExperimentConfig:
        data = load_yaml_mapping(source)
        try:
            config = ExperimentConfig.model_validate(data)
        except ValidationError as e:
            raise ConfigError(source, describe_validation_error(e)) from e
        instance_file = config.instance.file
        if instance_file is not None and not instance_file.is_absolute():
            resolved = (Path(source).parent / instance_file).resolve()
            config = config.model_copy(
                update={"instance": config.instance.model_copy(update={"file": resolved})}
            )
        logger.debug(f"Parsed config {config.name} ({config.config_hash()[:12]}) from {source}")
        return config

    def validate(self, spec: ExperimentConfig) -> List[str]:
        problems = []
        instance = spec.instance
        if instance.file is not None and not instance.file.exists():
            problems.append(f"instance file {instance.file} does not exist")
        if instance.file is None:
            problems.extend(InstanceParser().validate(instance))
        dimension = instance.dimension
        if dimension is not None and dimension > DENSE_LIMIT:
            problems.append(f"D={dimension} exceeds the dense limit of {DENSE_LIMIT}")
        topology = spec.dynamics.topology
        if topology is Topology.RING and instance.kind == "ising":
            problems.append("ring topology needs a potential instance")
        if topology is Topology.HYPERCUBE_SPINFLIP and instance.kind != "ising" and instance.file is None:
            problems.append("hypercube_spinflip topology needs an ising instance")
        return problems


def load_config(source: Path) -> ExperimentConfig:
    """Parse and validate; every problem is raised as one ConfigError."""
    parser = ExperimentConfigParser()
    config = parser.parse(source)
    problems = parser.validate(config)
    if problems:
        raise ConfigError(source, "; ".join(problems))
    return config
