"""Normalized wave functions over the computational basis."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from qja.errors import DimensionMismatchError

NORM_TOLERANCE = 1e-12


@dataclass(frozen=True)
class QuantumState:
    """
    Complex amplitude vector of length D.

    Instances are normalized on construction; use ``from_unnormalized`` when
    the input is only proportional to a state.
    """
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size < 1:
            raise DimensionMismatchError(f"amplitudes must be a non-empty vector, got shape {amps.shape}")
        norm = np.linalg.norm(amps)
        if not np.isfinite(norm) or norm == 0.0:
            raise ValueError("cannot build a state from a zero or non-finite vector")
        if abs(norm - 1.0) > NORM_TOLERANCE:
            amps = amps / norm
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_unnormalized(cls, vector: np.ndarray) -> "QuantumState":
        vector = np.asarray(vector, dtype=complex)
        return cls(vector / np.linalg.norm(vector))

    @classmethod
    def uniform(cls, dimension: int) -> "QuantumState":
        """Equal-weight superposition, the infinite-temperature equilibrium state."""
        return cls(np.full(dimension, 1.0 / np.sqrt(dimension), dtype=complex))

    @classmethod
    def basis(cls, dimension: int, index: int) -> "QuantumState":
        amps = np.zeros(dimension, dtype=complex)
        amps[index] = 1.0
        return cls(amps)

    @property
    def dimension(self) -> int:
        return int(self.amplitudes.size)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        probs = np.abs(self.amplitudes) ** 2
        return probs / probs.sum()

    def overlap(self, other: "QuantumState") -> complex:
        """Inner product <self|other>."""
        if other.dimension != self.dimension:
            raise DimensionMismatchError(
                f"cannot overlap states of dimension {self.dimension} and {other.dimension}"
            )
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def fidelity(self, other: "QuantumState") -> float:
        """|<self|other>|^2, insensitive to global phase."""
        return float(min(abs(self.overlap(other)) ** 2, 1.0))
