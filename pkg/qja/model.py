"""
Problem instances, annealing schedules and exact Gibbs reference quantities.

Everything here is immutable after construction and is the ground truth the
dynamics, mapping and engine modules are checked against.

Bit convention for spin instances: bit k of the basis index is spin k
(lowest bit is spin 0), and bit value 0 means s = +1, bit value 1 means s = -1.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from qja.errors import InvalidInstanceError, InvalidScheduleError
from qja.state import QuantumState

logger = logging.getLogger(__name__)


class InstanceKind(str, Enum):
    """Which family an instance belongs to; decides the admissible topology."""
    POTENTIAL = "potential"
    ISING = "ising"


class PotentialDistribution(str, Enum):
    """Distributions the random-potential depths V_i can be drawn from."""
    UNIFORM01 = "uniform01"


class FShape(str, Enum):
    """Shape of the quantum-fluctuation schedule f(t)."""
    LINEAR = "linear"
    SMOOTHSTEP = "smoothstep"


@dataclass(frozen=True)
class CostDiagonal:
    """Diagonal cost Hamiltonian H0 given as one energy per basis state."""
    energies: np.ndarray = field(repr=False)
    label: str = ""
    kind: InstanceKind = InstanceKind.POTENTIAL
    num_spins: Optional[int] = None

    def __post_init__(self):
        energies = np.array(self.energies, dtype=float)
        if energies.ndim != 1:
            raise InvalidInstanceError(f"energies must be a vector, got shape {energies.shape}")
        if energies.size < 2:
            raise InvalidInstanceError(f"an instance needs at least 2 basis states, got {energies.size}")
        if not np.all(np.isfinite(energies)):
            raise InvalidInstanceError("energies must all be finite")
        if self.num_spins is not None and energies.size != 2 ** self.num_spins:
            raise InvalidInstanceError(
                f"{energies.size} energies do not match 2^{self.num_spins} spin configurations"
            )
        energies.setflags(write=False)
        object.__setattr__(self, "energies", energies)
        object.__setattr__(self, "kind", InstanceKind(self.kind))

    @property
    def dimension(self) -> int:
        return int(self.energies.size)

    @property
    def ground_energy(self) -> float:
        return float(self.energies.min())

    def ground_state_indices(self) -> np.ndarray:
        """All basis indices attaining the minimum energy."""
        return np.flatnonzero(self.energies == self.energies.min())

    def permuted(self, permutation: Sequence[int]) -> "CostDiagonal":
        """Relabel basis states: new state k is old state permutation[k]."""
        return CostDiagonal(
            energies=self.energies[np.asarray(permutation)],
            label=self.label,
            kind=self.kind,
            num_spins=self.num_spins,
        )


@dataclass(frozen=True)
class IsingInstance:
    """Spin-glass cost function -sum J_ij s_i s_j - sum h_i s_i."""
    num_spins: int
    couplings: tuple[tuple[int, int, float], ...] = ()
    fields: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]
    label: str = ""

    def __post_init__(self):
        if self.num_spins < 1:
            raise InvalidInstanceError(f"num_spins must be >= 1, got {self.num_spins}")
        fields = np.zeros(self.num_spins) if self.fields is None else np.array(self.fields, dtype=float)
        if fields.shape != (self.num_spins,):
            raise InvalidInstanceError(
                f"fields must have length {self.num_spins}, got shape {fields.shape}"
            )
        couplings = tuple((int(i), int(j), float(J)) for i, j, J in self.couplings)
        for i, j, _ in couplings:
            if not (0 <= i < self.num_spins and 0 <= j < self.num_spins):
                raise InvalidInstanceError(
                    f"coupling ({i}, {j}) references a site outside 0..{self.num_spins - 1}"
                )
            if i == j:
                raise InvalidInstanceError(f"self-coupling on site {i} is not allowed")
        fields.setflags(write=False)
        object.__setattr__(self, "fields", fields)
        object.__setattr__(self, "couplings", couplings)

    @property
    def dimension(self) -> int:
        return 2 ** self.num_spins


@dataclass(frozen=True)
class AnnealSchedule:
    """
    Discrete time grid t_k = k * dt for k = 0..n with beta(t_k) and f(t_k).

    beta and f are nondecreasing and f stays in [0, 1]. Endpoint conditions
    (beta(t_0) = 0 for Jarzynski runs, f running from 0 to 1) are checked by
    the protocols that need them, not here.
    """
    n_steps: int
    dt: float
    beta_grid: np.ndarray = field(repr=False)
    f_grid: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.n_steps < 1:
            raise InvalidScheduleError(f"n_steps must be >= 1, got {self.n_steps}")
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise InvalidScheduleError(f"dt must be positive, got {self.dt}")
        beta = np.array(self.beta_grid, dtype=float)
        f = np.array(self.f_grid, dtype=float)
        expected = (self.n_steps + 1,)
        if beta.shape != expected or f.shape != expected:
            raise InvalidScheduleError(
                f"grids must have n_steps + 1 = {expected[0]} points, "
                f"got beta {beta.shape} and f {f.shape}"
            )
        if not (np.all(np.isfinite(beta)) and np.all(np.isfinite(f))):
            raise InvalidScheduleError("schedule grids must be finite")
        if beta[0] < 0 or np.any(np.diff(beta) < 0):
            raise InvalidScheduleError("beta must be nonnegative and nondecreasing")
        if f.min() < 0 or f.max() > 1 or np.any(np.diff(f) < 0):
            raise InvalidScheduleError("f must be nondecreasing within [0, 1]")
        beta.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "beta_grid", beta)
        object.__setattr__(self, "f_grid", f)

    @classmethod
    def constant_beta(cls, n_steps: int, dt: float, beta: float) -> "AnnealSchedule":
        """Fixed inverse temperature with the default linear f."""
        return cls(
            n_steps=n_steps,
            dt=dt,
            beta_grid=np.full(n_steps + 1, float(beta)),
            f_grid=np.linspace(0.0, 1.0, n_steps + 1),
        )

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.n_steps + 1)

    @property
    def total_time(self) -> float:
        return self.dt * self.n_steps

    @property
    def delta_beta(self) -> np.ndarray:
        """beta(t_{k+1}) - beta(t_k) for k = 0..n-1."""
        return np.diff(self.beta_grid)


@dataclass(frozen=True)
class GibbsReference:
    """Exact equilibrium quantities of a cost instance at one beta."""
    beta: float
    log_Z: float
    probabilities: np.ndarray = field(repr=False)
    amplitude_state: QuantumState = field(repr=False)

    @property
    def partition_function(self) -> float:
        return float(np.exp(self.log_Z))


def build_random_potential(
    D: int,
    seed: int,
    distribution: PotentialDistribution | str = PotentialDistribution.UNIFORM01,
) -> CostDiagonal:
    """
    One-dimensional random potential H0 = -sum_i V_i |i><i|.

    V_i are drawn i.i.d. from ``distribution`` with ``numpy.random.default_rng(seed)``.
    """
    if D < 2:
        raise InvalidInstanceError(f"a random potential needs D >= 2, got {D}")
    distribution = PotentialDistribution(distribution)
    rng = np.random.default_rng(seed)
    if distribution is PotentialDistribution.UNIFORM01:
        depths = rng.random(D)
    else:  # pragma: no cover - exhaustive over the enum
        raise InvalidInstanceError(f"unsupported distribution {distribution}")
    return CostDiagonal(
        energies=-depths,
        label=f"potential-D{D}-seed{seed}",
        kind=InstanceKind.POTENTIAL,
    )


def build_double_well(D: int, barrier: float) -> CostDiagonal:
    """
    Symmetric two-well ring potential E_i = -(barrier/2) cos(4 pi i / D).

    Minima sit at i = 0 and i = D/2 and are separated on both sides of the
    ring by maxima ``barrier`` higher.
    """
    if D < 4 or D % 2:
        raise InvalidInstanceError(f"a double well needs an even D >= 4, got {D}")
    if not barrier > 0:
        raise InvalidInstanceError(f"barrier must be positive, got {barrier}")
    sites = np.arange(D)
    energies = -0.5 * barrier * np.cos(4.0 * np.pi * sites / D)
    return CostDiagonal(
        energies=energies,
        label=f"double-well-D{D}-b{barrier:g}",
        kind=InstanceKind.POTENTIAL,
    )


def random_ising(num_spins: int, seed: int, field_scale: float = 0.0) -> IsingInstance:
    """All-to-all spin glass with standard normal couplings."""
    rng = np.random.default_rng(seed)
    couplings = tuple(
        (i, j, float(rng.standard_normal()))
        for i in range(num_spins)
        for j in range(i + 1, num_spins)
    )
    fields = field_scale * rng.standard_normal(num_spins)
    return IsingInstance(
        num_spins=num_spins,
        couplings=couplings,
        fields=fields,
        label=f"ising-n{num_spins}-seed{seed}",
    )


def spin_values(num_spins: int) -> np.ndarray:
    """(2^n, n) matrix of s = +-1 for every basis index under the module bit convention."""
    indices = np.arange(2 ** num_spins)[:, None]
    bits = (indices >> np.arange(num_spins)[None, :]) & 1
    return 1 - 2 * bits


def ising_to_diagonal(inst: IsingInstance) -> CostDiagonal:
    """Expand an Ising instance into one energy per spin configuration."""
    spins = spin_values(inst.num_spins).astype(float)
    energies = -spins @ inst.fields
    for i, j, J in inst.couplings:
        energies -= J * spins[:, i] * spins[:, j]
    return CostDiagonal(
        energies=energies,
        label=inst.label or f"ising-n{inst.num_spins}",
        kind=InstanceKind.ISING,
        num_spins=inst.num_spins,
    )


def gibbs_reference(cost: CostDiagonal, beta: float) -> GibbsReference:
    """Partition function, Boltzmann probabilities and the Gibbs amplitude state."""
    if beta < 0:
        raise ValueError(f"beta must be nonnegative, got {beta}")
    exponents = -beta * cost.energies
    log_Z = float(logsumexp(exponents))
    probabilities = np.exp(exponents - log_Z)
    probabilities /= probabilities.sum()
    probabilities.setflags(write=False)
    return GibbsReference(
        beta=float(beta),
        log_Z=log_Z,
        probabilities=probabilities,
        amplitude_state=QuantumState(np.sqrt(probabilities)),
    )


def make_schedule(
    n_steps: int,
    dt: float,
    beta_final: float,
    f_shape: FShape | str = FShape.LINEAR,
) -> AnnealSchedule:
    """Linear beta ramp 0 -> beta_final with the requested f(t) shape."""
    if n_steps < 1:
        raise InvalidScheduleError(f"n_steps must be >= 1, got {n_steps}")
    if not dt > 0:
        raise InvalidScheduleError(f"dt must be positive, got {dt}")
    if not beta_final > 0:
        raise InvalidScheduleError(f"beta_final must be positive, got {beta_final}")
    steps = np.arange(n_steps + 1)
    s = steps / n_steps
    f_shape = FShape(f_shape)
    if f_shape is FShape.LINEAR:
        f = s
    else:
        f = s * s * (3.0 - 2.0 * s)
    beta = beta_final * steps / n_steps
    return AnnealSchedule(n_steps=n_steps, dt=float(dt), beta_grid=beta, f_grid=f)


def make_linear_schedule(n_steps: int, dt: float, beta_final: float) -> AnnealSchedule:
    """beta(t_k) = beta_final * k / n and f(t_k) = k / n."""
    return make_schedule(n_steps, dt, beta_final, FShape.LINEAR)
