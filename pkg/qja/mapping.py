"""
Classical-quantum mapping of detailed-balance dynamics.

A generator M that satisfies detailed balance at beta is similar to a
symmetric matrix A = e^{beta H0/2} M e^{-beta H0/2}. Two Hamiltonians are
built from it:

  kernel convention  H_q = I - e^{dt A}   (similarity transform of the one-step kernel)
  rate convention    H_q = -A

Both are real symmetric, have the Gibbs amplitude state e^{-beta H0/2}/sqrt(Z)
as a zero-energy ground state, and are positive semidefinite.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np
from scipy.linalg import eigh, eigvalsh, expm
from scipy.sparse.csgraph import connected_components

from qja.dynamics import (
    DEFAULT_ATTEMPT_RATE,
    RateGenerator,
    Topology,
    build_heatbath_generator,
    verify_detailed_balance,
)
from qja.errors import MappingPreconditionError
from qja.model import AnnealSchedule, CostDiagonal, gibbs_reference

logger = logging.getLogger(__name__)

DEFAULT_DT = 0.1
DETAILED_BALANCE_LIMIT = 1e-10
ASYMMETRY_LIMIT = 1e-8
SPECTRAL_TOLERANCE = 1e-10


class MappingConvention(str, Enum):
    KERNEL = "kernel"
    RATE = "rate"


@dataclass(frozen=True)
class MappedHamiltonian:
    """Real symmetric H_q at one beta, with hbar = 1."""
    matrix: np.ndarray = field(repr=False)
    beta: float
    source: RateGenerator = field(repr=False)
    convention: MappingConvention = MappingConvention.KERNEL
    dt: float = DEFAULT_DT
    asymmetry: float = 0.0

    @property
    def dimension(self) -> int:
        return int(self.matrix.shape[0])

    @cached_property
    def spectrum(self) -> tuple[np.ndarray, np.ndarray]:
        """Ascending eigenvalues and orthonormal eigenvectors (columns)."""
        return eigh(self.matrix)

    def propagator(self, dt: float) -> np.ndarray:
        """exp(-i dt H_q) from the eigendecomposition."""
        values, vectors = self.spectrum
        return (vectors * np.exp(-1j * dt * values)[None, :]) @ vectors.T

    def is_connected(self) -> bool:
        """True when the positive rates link every basis state (Perron-Frobenius irreducibility)."""
        links = self.source.adjacency & (self.source.rates > 0)
        n_components, _ = connected_components(links, directed=False)
        return bool(n_components == 1)


@dataclass(frozen=True)
class SpectralCertificate:
    """
    Spectral checks on one mapped Hamiltonian.

    ``gs_fidelity`` is the weight of the Gibbs amplitude state in the
    numerical ground space, i.e. every eigenvector within
    SPECTRAL_TOLERANCE of lambda_min; ``ground_multiplicity`` counts them.
    """
    lambda_min: float
    lambda_1: float
    gap: float
    gs_fidelity: float
    all_excited_positive: bool
    ground_multiplicity: int
    gibbs_residual: float

    @property
    def degenerate(self) -> bool:
        return self.ground_multiplicity > 1


@dataclass(frozen=True)
class GapPoint:
    t: float
    beta: float
    lambda0: float
    lambda1: float

    @property
    def gap(self) -> float:
        return self.lambda1 - self.lambda0


@dataclass(frozen=True)
class GapProfile:
    """Instantaneous gap of H_q along a schedule."""
    points: tuple[GapPoint, ...]

    @property
    def minimum(self) -> GapPoint:
        return min(self.points, key=lambda p: p.gap)

    @property
    def adiabatic_time(self) -> float:
        """Sweep time scale tau_c ~ 1 / Delta_min^2 for following the ground state."""
        gap = self.minimum.gap
        return float("inf") if gap <= 0 else 1.0 / gap ** 2

    def gaps(self) -> np.ndarray:
        return np.array([p.gap for p in self.points])


def _symmetrized_generator(gen: RateGenerator, cost: CostDiagonal) -> tuple[np.ndarray, float]:
    """e^{beta H0/2} M e^{-beta H0/2}, formed entrywise on the adjacent pairs."""
    energies = cost.energies
    similar = np.zeros_like(gen.rates)
    rows, cols = np.nonzero(gen.adjacency)
    rates = gen.rates[rows, cols]
    with np.errstate(over="ignore", invalid="ignore"):
        scale = np.exp(0.5 * gen.beta * (energies[rows] - energies[cols]))
        # an underflowed uphill rate stays zero even where its scale overflows
        similar[rows, cols] = np.where(rates > 0, rates * scale, 0.0)
    similar[np.diag_indices_from(similar)] = np.diag(gen.rates)
    asymmetry = float(np.abs(similar - similar.T).max())
    return similar, asymmetry


def map_to_quantum(
    gen: RateGenerator,
    cost: CostDiagonal,
    dt: float = DEFAULT_DT,
    convention: MappingConvention | str = MappingConvention.KERNEL,
) -> MappedHamiltonian:
    """
    Build H_q from a detailed-balance generator.

    Raises MappingPreconditionError when the detailed-balance residual exceeds
    1e-10 or the similarity transform is asymmetric beyond 1e-8; smaller
    asymmetry is removed by (A + A^T)/2 and recorded on the result.
    """
    convention = MappingConvention(convention)
    residual = verify_detailed_balance(gen, cost)
    if residual > DETAILED_BALANCE_LIMIT:
        raise MappingPreconditionError(
            f"generator violates detailed balance (residual {residual:.3g} > {DETAILED_BALANCE_LIMIT:g})"
        )
    similar, asymmetry = _symmetrized_generator(gen, cost)
    if asymmetry > ASYMMETRY_LIMIT:
        raise MappingPreconditionError(
            f"similarity-transformed generator is asymmetric by {asymmetry:.3g}"
        )
    similar = 0.5 * (similar + similar.T)
    if convention is MappingConvention.KERNEL:
        kernel = expm(dt * similar)
        asymmetry = max(asymmetry, float(np.abs(kernel - kernel.T).max()))
        matrix = np.eye(gen.dimension) - 0.5 * (kernel + kernel.T)
    else:
        matrix = -similar
    matrix.setflags(write=False)
    return MappedHamiltonian(
        matrix=matrix,
        beta=gen.beta,
        source=gen,
        convention=convention,
        dt=float(dt),
        asymmetry=asymmetry,
    )


def spectral_certificate(hq: MappedHamiltonian, cost: CostDiagonal) -> SpectralCertificate:
    """
    Dense eigendecomposition checks: zero ground energy, Gibbs ground state,
    positive excitations.

    A degenerate ground space (for example a generator without transitions,
    where H_q = 0) is reported through ``ground_multiplicity`` and
    ``all_excited_positive = False``; it is not an error.
    """
    values, vectors = hq.spectrum
    gibbs = gibbs_reference(cost, hq.beta).amplitude_state.amplitudes.real
    ground = values <= values[0] + SPECTRAL_TOLERANCE
    weights = (vectors.T @ gibbs) ** 2
    # Irreducibility makes the Perron root simple even when interwell rates
    # fall below double-precision resolution.
    positive = hq.is_connected() and bool(np.all(values[1:] > -SPECTRAL_TOLERANCE))
    return SpectralCertificate(
        lambda_min=float(values[0]),
        lambda_1=float(values[1]),
        gap=float(values[1] - values[0]),
        gs_fidelity=float(min(weights[ground].sum(), 1.0)),
        all_excited_positive=positive,
        ground_multiplicity=int(ground.sum()),
        gibbs_residual=float(np.linalg.norm(hq.matrix @ gibbs)),
    )


def gap_profile(
    cost: CostDiagonal,
    schedule: AnnealSchedule,
    topology: Topology | str = Topology.RING,
    attempt_rate: float = DEFAULT_ATTEMPT_RATE,
    convention: MappingConvention | str = MappingConvention.KERNEL,
    threads: int = 1,
) -> GapProfile:
    """Two lowest eigenvalues of H_q(beta(t_k)) at every grid point."""

    def evaluate(k: int) -> GapPoint:
        beta = float(schedule.beta_grid[k])
        gen = build_heatbath_generator(cost, beta, topology, attempt_rate)
        hq = map_to_quantum(gen, cost, schedule.dt, convention)
        low = eigvalsh(hq.matrix, subset_by_index=[0, 1])
        return GapPoint(t=float(schedule.times[k]), beta=beta, lambda0=float(low[0]), lambda1=float(low[1]))

    grid = range(schedule.n_steps + 1)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            points = tuple(pool.map(evaluate, grid))
    else:
        points = tuple(evaluate(k) for k in grid)
    profile = GapProfile(points=points)
    lowest = profile.minimum
    logger.info(f"gap profile for {cost.label}: min gap {lowest.gap:.3g} at beta={lowest.beta:.4g} (t={lowest.t:.4g})")
    return profile
