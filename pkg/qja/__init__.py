"""
Quantum Jarzynski annealing simulator.

Exact dense simulation of master-equation dynamics, the classical-quantum
mapping and the annealing protocols built on it.
"""
from qja.dynamics import (
    JeResult,
    RateGenerator,
    Topology,
    Trajectory,
    build_heatbath_generator,
    jarzynski_estimate,
    jarzynski_exact,
    sample_trajectory,
    verify_detailed_balance,
)
from qja.engines import (
    DriverHamiltonian,
    RunReport,
    measure,
    run_mapped_qa,
    run_qa,
    run_qja,
    run_qja_no_unitary,
    unitary_step,
    work_operator_step,
)
from qja.errors import QjaError
from qja.mapping import MappedHamiltonian, gap_profile, map_to_quantum, spectral_certificate
from qja.model import (
    AnnealSchedule,
    CostDiagonal,
    GibbsReference,
    IsingInstance,
    build_random_potential,
    gibbs_reference,
    ising_to_diagonal,
    make_linear_schedule,
)
from qja.state import QuantumState

__all__ = [
    "AnnealSchedule",
    "CostDiagonal",
    "DriverHamiltonian",
    "GibbsReference",
    "IsingInstance",
    "JeResult",
    "MappedHamiltonian",
    "QjaError",
    "QuantumState",
    "RateGenerator",
    "RunReport",
    "Topology",
    "Trajectory",
    "build_heatbath_generator",
    "build_random_potential",
    "gap_profile",
    "gibbs_reference",
    "ising_to_diagonal",
    "jarzynski_estimate",
    "jarzynski_exact",
    "make_linear_schedule",
    "map_to_quantum",
    "measure",
    "run_mapped_qa",
    "run_qa",
    "run_qja",
    "run_qja_no_unitary",
    "sample_trajectory",
    "spectral_certificate",
    "unitary_step",
    "verify_detailed_balance",
    "work_operator_step",
]
