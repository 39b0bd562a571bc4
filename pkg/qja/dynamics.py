"""
Classical master-equation dynamics under a beta schedule.

Generators are column-oriented: ``rates[j, i]`` is the rate of the hop i -> j,
so every column sums to zero and ``expm(dt * rates)`` is column-stochastic.
The hop taken during step k uses the generator at beta(t_{k+1}); the work
exponent for that step, -(beta(t_{k+1}) - beta(t_k)) E(sigma_k), is charged
before the hop.
"""
from __future__ import annotations

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
from scipy.linalg import expm
from scipy.special import expit

from qja.errors import EnumerationTooLargeError, InvalidTopologyError
from qja.model import AnnealSchedule, CostDiagonal, InstanceKind, gibbs_reference

logger = logging.getLogger(__name__)

DEFAULT_ATTEMPT_RATE = 1.0
ENUMERATION_MAX_STATES = 8
ENUMERATION_MAX_STEPS = 6
SAMPLING_CHUNK = 10_000


class Topology(str, Enum):
    """Which basis pairs a single hop may connect."""
    RING = "ring"
    HYPERCUBE_SPINFLIP = "hypercube_spinflip"


class TransferMethod(str, Enum):
    TRANSFER = "transfer"
    ENUMERATE = "enumerate"


@dataclass(frozen=True)
class RateGenerator:
    """Master-equation generator M at a fixed beta."""
    rates: np.ndarray = field(repr=False)
    beta: float
    adjacency: np.ndarray = field(repr=False)
    topology: Topology = Topology.RING
    attempt_rate: float = DEFAULT_ATTEMPT_RATE

    @property
    def dimension(self) -> int:
        return int(self.rates.shape[0])


@dataclass(frozen=True)
class Trajectory:
    """One realization sigma_0..sigma_n with its accumulated -beta W."""
    states: np.ndarray = field(repr=False)
    work_exponent: float


@dataclass(frozen=True)
class JeResult:
    """
    Both sides of the Jarzynski equality.

    ``n_samples`` is 0 and ``std_error`` is 0 for exact evaluations.
    """
    lhs_estimate: float
    rhs_exact: float
    std_error: float
    n_samples: int
    work_exponents: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def abs_error(self) -> float:
        return abs(self.lhs_estimate - self.rhs_exact)

    @property
    def rel_error(self) -> float:
        return self.abs_error / abs(self.rhs_exact)

    def within(self, sigmas: float) -> bool:
        """True when the estimate lies within ``sigmas`` standard errors of the exact ratio."""
        return self.abs_error <= sigmas * self.std_error

    def as_report(self) -> dict[str, float | int]:
        return {
            "lhs": self.lhs_estimate,
            "rhs": self.rhs_exact,
            "stderr": self.std_error,
            "n_samples": self.n_samples,
        }


def build_adjacency(cost: CostDiagonal, topology: Topology | str) -> np.ndarray:
    """Symmetric boolean neighbor matrix for ``topology`` on ``cost``'s basis."""
    topology = Topology(topology)
    D = cost.dimension
    adjacency = np.zeros((D, D), dtype=bool)
    if topology is Topology.RING:
        if cost.kind is not InstanceKind.POTENTIAL:
            raise InvalidTopologyError(
                f"ring topology needs a potential instance, got {cost.kind.value}"
            )
        sites = np.arange(D)
        right = (sites + 1) % D
        adjacency[sites, right] = True
        adjacency[right, sites] = True
    else:
        if cost.num_spins is None or D != 2 ** cost.num_spins:
            raise InvalidTopologyError(
                "hypercube_spinflip topology needs a spin instance with D = 2^n_s"
            )
        sites = np.arange(D)
        for spin in range(cost.num_spins):
            adjacency[sites, sites ^ (1 << spin)] = True
    np.fill_diagonal(adjacency, False)
    return adjacency


def default_topology(cost: CostDiagonal) -> Topology:
    return Topology.RING if cost.kind is InstanceKind.POTENTIAL else Topology.HYPERCUBE_SPINFLIP


def build_heatbath_generator(
    cost: CostDiagonal,
    beta: float,
    topology: Topology | str = Topology.RING,
    attempt_rate: float = DEFAULT_ATTEMPT_RATE,
) -> RateGenerator:
    """
    Heat-bath (Glauber) generator: rate(i -> j) = attempt_rate / (1 + e^{beta (E_j - E_i)}).

    The diagonal closes every column to zero, and detailed balance with respect
    to e^{-beta E} holds by construction.
    """
    if not attempt_rate > 0:
        raise ValueError(f"attempt_rate must be positive, got {attempt_rate}")
    topology = Topology(topology)
    adjacency = build_adjacency(cost, topology)
    energies = cost.energies
    # uphill[j, i] = E_j - E_i
    uphill = energies[:, None] - energies[None, :]
    rates = np.where(adjacency, attempt_rate * expit(-beta * uphill), 0.0)
    rates[np.diag_indices_from(rates)] = -rates.sum(axis=0)
    rates.setflags(write=False)
    return RateGenerator(
        rates=rates,
        beta=float(beta),
        adjacency=adjacency,
        topology=topology,
        attempt_rate=float(attempt_rate),
    )


def verify_detailed_balance(gen: RateGenerator, cost: CostDiagonal) -> float:
    """
    max |M_ji w_i - M_ij w_j| over adjacent pairs, with w_i = e^{-beta (E_i - E_min)}.

    Weights are shifted so the ground state has weight 1; at beta = 0 the
    residual is max |M_ji - M_ij|.
    """
    weights = np.exp(-gen.beta * (cost.energies - cost.ground_energy))
    flux = gen.rates * weights[None, :]
    residual = np.abs(flux - flux.T)[gen.adjacency]
    return float(residual.max()) if residual.size else 0.0


def transition_kernel(gen: RateGenerator, dt: float) -> np.ndarray:
    """Column-stochastic one-step kernel e^{dt M}, by scaling-and-squaring."""
    return expm(dt * gen.rates)


def stationarity_defect(gen: RateGenerator, cost: CostDiagonal, dt: float) -> float:
    """max |e^{dt M} pi - pi| for the Gibbs distribution pi at the generator's beta."""
    pi = gibbs_reference(cost, gen.beta).probabilities
    return float(np.abs(transition_kernel(gen, dt) @ pi - pi).max())


def schedule_kernels(
    cost: CostDiagonal,
    schedule: AnnealSchedule,
    topology: Topology | str = Topology.RING,
    attempt_rate: float = DEFAULT_ATTEMPT_RATE,
) -> list[np.ndarray]:
    """Kernels e^{dt M(beta(t_{k+1}))} for k = 0..n-1; repeated betas share one matrix."""
    cache: dict[float, np.ndarray] = {}
    kernels = []
    for beta in schedule.beta_grid[1:]:
        key = float(beta)
        if key not in cache:
            gen = build_heatbath_generator(cost, key, topology, attempt_rate)
            cache[key] = transition_kernel(gen, schedule.dt)
        kernels.append(cache[key])
    return kernels


def _hop_columns(kernel: np.ndarray) -> np.ndarray:
    """Clip rounding noise and renormalize so every column is a distribution."""
    columns = np.clip(kernel, 0.0, None)
    return columns / columns.sum(axis=0, keepdims=True)


def _work_rhs(cost: CostDiagonal, schedule: AnnealSchedule) -> float:
    start = gibbs_reference(cost, float(schedule.beta_grid[0]))
    end = gibbs_reference(cost, float(schedule.beta_grid[-1]))
    return float(np.exp(end.log_Z - start.log_Z))


def _trajectory_uniforms(seed: int, indices: range, n_steps: int) -> np.ndarray:
    """One row of n_steps + 1 uniforms per trajectory, from ``default_rng([seed, index])``."""
    return np.stack([np.random.default_rng([seed, index]).random(n_steps + 1) for index in indices])


def _walk(
    uniforms: np.ndarray,
    start_cdf: np.ndarray,
    cumulative: list[np.ndarray],
    delta_beta: np.ndarray,
    energies: np.ndarray,
    path: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Inverse-CDF walk of a batch of trajectories; column k of ``uniforms`` drives state k."""
    D = start_cdf.size
    states = np.minimum((start_cdf[:, None] <= uniforms[None, :, 0]).sum(axis=0), D - 1)
    if path is not None:
        path[:, 0] = states
    work = np.zeros(uniforms.shape[0])
    for k, step in enumerate(delta_beta):
        work -= step * energies[states]
        states = np.minimum((cumulative[k][:, states] <= uniforms[None, :, k + 1]).sum(axis=0), D - 1)
        if path is not None:
            path[:, k + 1] = states
    return work


def _sampling_tables(
    cost: CostDiagonal,
    schedule: AnnealSchedule,
    topology: Topology | str,
    attempt_rate: float,
) -> tuple[np.ndarray, list[np.ndarray]]:
    kernels = schedule_kernels(cost, schedule, topology, attempt_rate)
    cumulative = [np.cumsum(_hop_columns(k), axis=0) for k in kernels]
    pi0 = gibbs_reference(cost, float(schedule.beta_grid[0])).probabilities
    return np.cumsum(pi0), cumulative


def sample_trajectory(
    cost: CostDiagonal,
    schedule: AnnealSchedule,
    topology: Topology | str = Topology.RING,
    seed: int = 0,
    attempt_rate: float = DEFAULT_ATTEMPT_RATE,
    index: int = 0,
) -> Trajectory:
    """
    Draw one trajectory; the generator is seeded from (seed, index), so this
    replays sample ``index`` of ``sample_work_exponents(..., seed=seed)``.
    """
    start_cdf, cumulative = _sampling_tables(cost, schedule, topology, attempt_rate)
    uniforms = _trajectory_uniforms(seed, range(index, index + 1), schedule.n_steps)
    path = np.empty((1, schedule.n_steps + 1), dtype=int)
    work = _walk(uniforms, start_cdf, cumulative, schedule.delta_beta, cost.energies, path)
    states = path[0]
    states.setflags(write=False)
    return Trajectory(states=states, work_exponent=float(work[0]))


def sample_work_exponents(
    cost: CostDiagonal,
    schedule: AnnealSchedule,
    topology: Topology | str = Topology.RING,
    n_samples: int = 1,
    seed: int = 0,
    attempt_rate: float = DEFAULT_ATTEMPT_RATE,
    threads: int = 1,
    chunk_size: int = SAMPLING_CHUNK,
) -> np.ndarray:
    """
    Work exponents of ``n_samples`` independent trajectories.

    Trajectory i draws from ``default_rng([seed, i])``. Chunks of trajectories
    are walked together and concatenated in order, so the result depends on
    neither ``threads`` nor ``chunk_size``.
    """
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    start_cdf, cumulative = _sampling_tables(cost, schedule, topology, attempt_rate)
    starts = list(range(0, n_samples, chunk_size))

    def run_chunk(start: int) -> np.ndarray:
        uniforms = _trajectory_uniforms(seed, range(start, min(start + chunk_size, n_samples)), schedule.n_steps)
        return _walk(uniforms, start_cdf, cumulative, schedule.delta_beta, cost.energies)

    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run_chunk, starts))
    else:
        parts = [run_chunk(start) for start in starts]
    return np.concatenate(parts)


def jarzynski_estimate(
    cost: CostDiagonal,
    schedule: AnnealSchedule,
    topology: Topology | str = Topology.RING,
    n_samples: int = 10_000,
    seed: int = 0,
    attempt_rate: float = DEFAULT_ATTEMPT_RATE,
    threads: int = 1,
) -> JeResult:
    """Monte Carlo estimate of <e^{-beta W}> against the exact Z_n / Z_0."""
    work = sample_work_exponents(
        cost, schedule, topology, n_samples, seed, attempt_rate, threads=threads
    )
    values = np.exp(work)
    std_error = float(values.std(ddof=1) / np.sqrt(n_samples)) if n_samples > 1 else 0.0
    result = JeResult(
        lhs_estimate=float(values.mean()),
        rhs_exact=_work_rhs(cost, schedule),
        std_error=std_error,
        n_samples=n_samples,
        work_exponents=work,
    )
    logger.info(
        f"JE Monte Carlo on {cost.label}: lhs={result.lhs_estimate:.6g} rhs={result.rhs_exact:.6g} "
        f"stderr={result.std_error:.3g} (n={n_samples})"
    )
    return result


def _transfer_product(
    pi0: np.ndarray,
    energies: np.ndarray,
    delta_beta: np.ndarray,
    kernels: Optional[list[np.ndarray]],
) -> float:
    weights = pi0.copy()
    for k, step in enumerate(delta_beta):
        weights = weights * np.exp(-step * energies)
        if kernels is not None:
            weights = kernels[k] @ weights
    return float(weights.sum())


def _enumerate_paths(
    pi0: np.ndarray,
    energies: np.ndarray,
    delta_beta: np.ndarray,
    kernels: Optional[list[np.ndarray]],
) -> float:
    D = pi0.size
    n = delta_beta.size
    transitions = kernels if kernels is not None else [np.eye(D)] * n
    factors = [np.exp(-step * energies) for step in delta_beta]
    total = 0.0
    for path in itertools.product(range(D), repeat=n + 1):
        weight = pi0[path[0]]
        for k in range(n):
            weight *= factors[k][path[k]] * transitions[k][path[k + 1], path[k]]
        total += weight
    return total


def jarzynski_exact(
    cost: CostDiagonal,
    schedule: AnnealSchedule,
    topology: Topology | str = Topology.RING,
    attempt_rate: float = DEFAULT_ATTEMPT_RATE,
    method: TransferMethod | str = TransferMethod.TRANSFER,
    transitions: bool = True,
) -> JeResult:
    """
    Exact sum over all trajectories of prod_k e^{-dbeta_k E} e^{dt M} P~(sigma_0).

    The transfer product propagates a length-D vector through the n weighted
    kernels; ``method="enumerate"`` sums the D^{n+1} paths one by one and is
    only allowed for D <= 8 and n <= 6. With ``transitions=False`` every
    kernel is replaced by the identity.
    """
    method = TransferMethod(method)
    pi0 = gibbs_reference(cost, float(schedule.beta_grid[0])).probabilities
    kernels = schedule_kernels(cost, schedule, topology, attempt_rate) if transitions else None
    if method is TransferMethod.ENUMERATE:
        if cost.dimension > ENUMERATION_MAX_STATES or schedule.n_steps > ENUMERATION_MAX_STEPS:
            raise EnumerationTooLargeError(
                f"path enumeration is limited to D <= {ENUMERATION_MAX_STATES} and "
                f"n <= {ENUMERATION_MAX_STEPS}, got D={cost.dimension}, n={schedule.n_steps}"
            )
        lhs = _enumerate_paths(pi0, cost.energies, schedule.delta_beta, kernels)
    else:
        lhs = _transfer_product(pi0, cost.energies, schedule.delta_beta, kernels)
    return JeResult(lhs_estimate=lhs, rhs_exact=_work_rhs(cost, schedule), std_error=0.0, n_samples=0)
