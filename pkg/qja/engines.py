"""
Annealing protocols on the full wave function.

  run_qa              ordinary quantum annealing H(t) = f H0 + (1 - f) H1
  run_qja             quantum Jarzynski annealing: exponentiated work steps
                      interleaved with unitary evolution under H_q
  run_qja_no_unitary  the same with every unitary replaced by the identity
  run_mapped_qa       unitary evolution under H_q(beta(t)) alone

All propagators are exact dense exponentials (hbar = 1). The non-unitary
work operator is applied directly and followed by renormalization.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
from scipy.linalg import eigh

from qja.dynamics import DEFAULT_ATTEMPT_RATE, Topology, build_heatbath_generator, default_topology
from qja.errors import DimensionMismatchError, InvalidScheduleError, WorkOperatorUnderflowError
from qja.mapping import MappedHamiltonian, MappingConvention, map_to_quantum
from qja.model import AnnealSchedule, CostDiagonal, InstanceKind, gibbs_reference
from qja.state import QuantumState

logger = logging.getLogger(__name__)

DRIVER_CHECK_TOLERANCE = 1e-10


class DriverKind(str, Enum):
    RING_HOPPING = "ring_hopping"
    TRANSVERSE_FIELD = "transverse_field"


class StepOrder(str, Enum):
    """Order of the two operators inside one QJA step."""
    W_THEN_U = "w_then_u"
    U_THEN_W = "u_then_w"


@dataclass(frozen=True)
class DriverHamiltonian:
    """Quantum-fluctuation term H1 whose ground state is the uniform superposition."""
    kind: DriverKind
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DimensionMismatchError(f"driver must be square, got shape {matrix.shape}")
        if not np.allclose(matrix, matrix.T, atol=DRIVER_CHECK_TOLERANCE):
            raise ValueError("driver Hamiltonian must be symmetric")
        uniform = np.full(matrix.shape[0], 1.0 / np.sqrt(matrix.shape[0]))
        lowest = eigh(matrix, eigvals_only=True, subset_by_index=[0, 0])[0]
        if abs(uniform @ matrix @ uniform - lowest) > DRIVER_CHECK_TOLERANCE:
            raise ValueError(f"uniform superposition is not a ground state of the {self.kind} driver")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "kind", DriverKind(self.kind))

    @property
    def dimension(self) -> int:
        return int(self.matrix.shape[0])


@dataclass(frozen=True)
class StepRecord:
    step: int
    t: float
    beta: float
    overlap_gibbs: float
    gs_prob: float
    norm_drift: float
    gibbs_gs_prob: float


@dataclass(frozen=True)
class RunReport:
    """Per-step diagnostics and the final state of one protocol run."""
    protocol: str
    per_step: tuple[StepRecord, ...] = field(repr=False)
    final_state: QuantumState = field(repr=False)
    gibbs_final: np.ndarray = field(repr=False)
    wall_time: float = 0.0

    @property
    def final_distribution(self) -> np.ndarray:
        return self.final_state.probabilities()

    @property
    def min_overlap(self) -> float:
        return min(r.overlap_gibbs for r in self.per_step)

    @property
    def final_gs_prob(self) -> float:
        return self.per_step[-1].gs_prob

    @property
    def max_norm_drift(self) -> float:
        return max(r.norm_drift for r in self.per_step)

    @property
    def final_gibbs_error(self) -> float:
        """max |p_i - p_i^Gibbs| at the final beta."""
        return float(np.abs(self.final_distribution - self.gibbs_final).max())


def ring_hopping_driver(dimension: int) -> DriverHamiltonian:
    """-(|i><i+1| + h.c.) on a periodic ring."""
    sites = np.arange(dimension)
    right = (sites + 1) % dimension
    matrix = np.zeros((dimension, dimension))
    matrix[sites, right] = -1.0
    matrix[right, sites] = -1.0
    return DriverHamiltonian(kind=DriverKind.RING_HOPPING, matrix=matrix)


def transverse_field_driver(num_spins: int) -> DriverHamiltonian:
    """-sum_i sigma^x_i in the computational basis."""
    dimension = 2 ** num_spins
    sites = np.arange(dimension)
    matrix = np.zeros((dimension, dimension))
    for spin in range(num_spins):
        matrix[sites, sites ^ (1 << spin)] -= 1.0
    return DriverHamiltonian(kind=DriverKind.TRANSVERSE_FIELD, matrix=matrix)


def default_driver(cost: CostDiagonal) -> DriverHamiltonian:
    if cost.kind is InstanceKind.ISING and cost.num_spins is not None:
        return transverse_field_driver(cost.num_spins)
    return ring_hopping_driver(cost.dimension)


def _propagate(state: QuantumState, propagator: np.ndarray) -> tuple[QuantumState, float]:
    amplitudes = propagator @ state.amplitudes
    drift = abs(float(np.linalg.norm(amplitudes)) - state.norm)
    return QuantumState(amplitudes), drift


def work_operator_step(state: QuantumState, cost: CostDiagonal, delta_beta: float) -> QuantumState:
    """
    Apply W_exp = exp(-delta_beta H0 / 2) and renormalize.

    Energies are measured from the ground energy so the largest factor is 1;
    maps the Gibbs amplitude state at beta onto the one at beta + delta_beta.
    """
    if delta_beta < 0:
        raise ValueError(f"delta_beta must be nonnegative, got {delta_beta}")
    if state.dimension != cost.dimension:
        raise DimensionMismatchError(
            f"state has dimension {state.dimension}, instance has {cost.dimension}"
        )
    if delta_beta == 0:
        return state
    factors = np.exp(-0.5 * delta_beta * (cost.energies - cost.ground_energy))
    amplitudes = state.amplitudes * factors
    norm = float(np.linalg.norm(amplitudes))
    if norm == 0.0 or not np.isfinite(norm):
        raise WorkOperatorUnderflowError(delta_beta)
    return QuantumState(amplitudes / norm)


def unitary_step(state: QuantumState, hq: MappedHamiltonian, dt: float) -> QuantumState:
    """exp(-i dt H_q) |state>, exact via the eigendecomposition of H_q."""
    if dt < 0:
        raise ValueError(f"dt must be nonnegative, got {dt}")
    if state.dimension != hq.dimension:
        raise DimensionMismatchError(
            f"state has dimension {state.dimension}, Hamiltonian has {hq.dimension}"
        )
    if dt == 0:
        return state
    evolved, _ = _propagate(state, hq.propagator(dt))
    return evolved


class _Recorder:
    """Collects StepRecords against the instantaneous Gibbs state."""

    def __init__(self, cost: CostDiagonal, schedule: AnnealSchedule):
        self.cost = cost
        self.schedule = schedule
        self.ground = cost.ground_state_indices()
        self.records: list[StepRecord] = []

    def record(self, step: int, state: QuantumState, norm_drift: float) -> np.ndarray:
        beta = float(self.schedule.beta_grid[step])
        gibbs = gibbs_reference(self.cost, beta)
        probs = state.probabilities()
        self.records.append(
            StepRecord(
                step=step,
                t=float(self.schedule.times[step]),
                beta=beta,
                overlap_gibbs=state.fidelity(gibbs.amplitude_state),
                gs_prob=float(probs[self.ground].sum()),
                norm_drift=norm_drift,
                gibbs_gs_prob=float(gibbs.probabilities[self.ground].sum()),
            )
        )
        return gibbs.probabilities


def _require_infinite_temperature_start(schedule: AnnealSchedule) -> None:
    if schedule.beta_grid[0] != 0:
        raise InvalidScheduleError(
            f"Jarzynski protocols start from beta(t_0) = 0, got {schedule.beta_grid[0]}"
        )


def _mapped_sweep(
    protocol: str,
    cost: CostDiagonal,
    schedule: AnnealSchedule,
    topology: Optional[Topology | str],
    attempt_rate: float,
    convention: MappingConvention | str,
    *,
    work: bool,
    unitary: bool,
    order: StepOrder | str = StepOrder.W_THEN_U,
    initial_state: Optional[QuantumState] = None,
) -> RunReport:
    _require_infinite_temperature_start(schedule)
    order = StepOrder(order)
    topology = Topology(topology) if topology is not None else default_topology(cost)
    state = initial_state if initial_state is not None else QuantumState.uniform(cost.dimension)
    if state.dimension != cost.dimension:
        raise DimensionMismatchError(
            f"initial state has dimension {state.dimension}, instance has {cost.dimension}"
        )
    # H_q only changes with beta; keep the latest one for constant stretches.
    latest: dict[float, np.ndarray] = {}

    def evolve(current: QuantumState, beta: float) -> tuple[QuantumState, float]:
        if beta not in latest:
            gen = build_heatbath_generator(cost, beta, topology, attempt_rate)
            hq = map_to_quantum(gen, cost, schedule.dt, convention)
            latest.clear()
            latest[beta] = hq.propagator(schedule.dt)
        return _propagate(current, latest[beta])

    started = time.perf_counter()
    logger.info(f"{protocol} on {cost.label}: D={cost.dimension}, n={schedule.n_steps}")
    recorder = _Recorder(cost, schedule)
    gibbs_final = recorder.record(0, state, abs(state.norm - 1.0))
    for k, delta_beta in enumerate(schedule.delta_beta):
        beta_now = float(schedule.beta_grid[k])
        beta_next = float(schedule.beta_grid[k + 1])
        drift = 0.0
        if order is StepOrder.W_THEN_U:
            if work:
                state = work_operator_step(state, cost, float(delta_beta))
            if unitary:
                state, drift = evolve(state, beta_next)
        else:
            if unitary:
                state, drift = evolve(state, beta_now)
            if work:
                state = work_operator_step(state, cost, float(delta_beta))
        gibbs_final = recorder.record(k + 1, state, drift)
        last = recorder.records[-1]
        logger.debug(
            f"{protocol} step {k + 1}: beta={last.beta:.6g}, overlap {last.overlap_gibbs:.12f}, drift {drift:.3g}"
        )
    elapsed = time.perf_counter() - started
    report = RunReport(
        protocol=protocol,
        per_step=tuple(recorder.records),
        final_state=state,
        gibbs_final=gibbs_final,
        wall_time=elapsed,
    )
    logger.info(
        f"{protocol} finished in {elapsed:.2f}s: min overlap {report.min_overlap:.12f}, "
        f"final gs prob {report.final_gs_prob:.6f}"
    )
    return report


def run_qja(
    cost: CostDiagonal,
    schedule: AnnealSchedule,
    topology: Optional[Topology | str] = None,
    attempt_rate: float = DEFAULT_ATTEMPT_RATE,
    convention: MappingConvention | str = MappingConvention.KERNEL,
    order: StepOrder | str = StepOrder.W_THEN_U,
    initial_state: Optional[QuantumState] = None,
) -> RunReport:
    """
    Quantum Jarzynski annealing from the uniform state.

    Each step applies W_exp(t_k) and then exp(-i dt H_q(beta(t_{k+1})));
    ``order="u_then_w"`` evolves under H_q(beta(t_k)) first instead.
    """
    return _mapped_sweep(
        "qja", cost, schedule, topology, attempt_rate, convention,
        work=True, unitary=True, order=order, initial_state=initial_state,
    )


def run_qja_no_unitary(
    cost: CostDiagonal,
    schedule: AnnealSchedule,
    initial_state: Optional[QuantumState] = None,
) -> RunReport:
    """Work operators only; the control run for the role of U."""
    return _mapped_sweep(
        "qja_no_unitary", cost, schedule, None, DEFAULT_ATTEMPT_RATE, MappingConvention.KERNEL,
        work=True, unitary=False, initial_state=initial_state,
    )


def run_mapped_qa(
    cost: CostDiagonal,
    schedule: AnnealSchedule,
    topology: Optional[Topology | str] = None,
    attempt_rate: float = DEFAULT_ATTEMPT_RATE,
    convention: MappingConvention | str = MappingConvention.KERNEL,
) -> RunReport:
    """Anneal the mapped Hamiltonian itself: beta swept from 0 with no work operator."""
    return _mapped_sweep(
        "mapped_qa", cost, schedule, topology, attempt_rate, convention,
        work=False, unitary=True,
    )


def run_qa(
    cost: CostDiagonal,
    schedule: AnnealSchedule,
    driver: Optional[DriverHamiltonian] = None,
) -> RunReport:
    """
    Ordinary quantum annealing from the uniform superposition.

    Step k propagates with exp(-i dt H(t_k)), H = f H0 + (1 - f) H1, so the
    first step evolves under the driver alone.
    The beta grid only sets which Gibbs state each step is compared to.
    """
    driver = driver if driver is not None else default_driver(cost)
    if driver.dimension != cost.dimension:
        raise DimensionMismatchError(
            f"driver has dimension {driver.dimension}, instance has {cost.dimension}"
        )
    cost_matrix = np.diag(cost.energies)
    state = QuantumState.uniform(cost.dimension)
    started = time.perf_counter()
    logger.info(f"qa on {cost.label}: D={cost.dimension}, n={schedule.n_steps}, tau={schedule.total_time:g}")
    recorder = _Recorder(cost, schedule)
    gibbs_final = recorder.record(0, state, 0.0)
    for k in range(schedule.n_steps):
        f = float(schedule.f_grid[k])
        values, vectors = eigh(f * cost_matrix + (1.0 - f) * driver.matrix)
        propagator = (vectors * np.exp(-1j * schedule.dt * values)[None, :]) @ vectors.T
        state, drift = _propagate(state, propagator)
        gibbs_final = recorder.record(k + 1, state, drift)
        logger.debug(f"qa step {k + 1}: f={f:.6g}, gs prob {recorder.records[-1].gs_prob:.6g}, drift {drift:.3g}")
    elapsed = time.perf_counter() - started
    report = RunReport(
        protocol="qa",
        per_step=tuple(recorder.records),
        final_state=state,
        gibbs_final=gibbs_final,
        wall_time=elapsed,
    )
    logger.info(f"qa finished in {elapsed:.2f}s: final gs prob {report.final_gs_prob:.6f}")
    return report


def measure(state: QuantumState, seed: int) -> int:
    """Projective measurement in the computational basis."""
    rng = np.random.default_rng(seed)
    return int(rng.choice(state.dimension, p=state.probabilities()))


def sample_measurements(state: QuantumState, shots: int, seed: int) -> np.ndarray:
    """``shots`` independent measurements of identically prepared copies."""
    rng = np.random.default_rng(seed)
    return rng.choice(state.dimension, size=shots, p=state.probabilities())

