"""Lossy two-mode interferometry with soliton Josephson junction probes.

Probe states are prepared as ground states of the SJJ tridiagonal Hamiltonian,
pass through a two-arm beam-splitter loss channel, and are scored by their
quantum Fisher information (exact, upper bound, or closed form).
"""

__version__ = "0.1.0"

from ._accel import NUMBA_ENABLED
from .errors import CapacityError, DomainError, NumericalError
from .fock_core import LossChannel, log_binomial, loss_weight
from .limits import (
    critical_time,
    eta_critical,
    ideal_limit,
    interferometric_limits,
    n_min,
    noon_limits,
    variance_delta_phi,
)
from .loss_model import (
    Branch,
    BranchDecomposition,
    SectorDensityMatrix,
    assemble_sectors,
    decompose,
    noon_loss_distribution,
)
from .optimizer import OptimizerConfig, ProbeOptimum, figure_ordering_check, optimize_probe
from .qfi import Method, QfiEstimate, crossover_discrepancy, pure_qfi, qfi_exact, qfi_upper_bound
from .sjj_model import (
    SjjParams,
    TridiagonalHamiltonian,
    TwoModeState,
    binomial_state,
    build_hamiltonian,
    catness,
    ground_state,
    locate_crossover,
    noon_state,
    soliton_hamilton,
    soliton_phase_parameter,
    solve_ground,
)

__all__ = [
    "NUMBA_ENABLED",
    "Branch",
    "BranchDecomposition",
    "CapacityError",
    "DomainError",
    "LossChannel",
    "Method",
    "NumericalError",
    "OptimizerConfig",
    "ProbeOptimum",
    "QfiEstimate",
    "SectorDensityMatrix",
    "SjjParams",
    "TridiagonalHamiltonian",
    "TwoModeState",
    "assemble_sectors",
    "binomial_state",
    "build_hamiltonian",
    "catness",
    "critical_time",
    "crossover_discrepancy",
    "decompose",
    "eta_critical",
    "figure_ordering_check",
    "ground_state",
    "ideal_limit",
    "interferometric_limits",
    "locate_crossover",
    "log_binomial",
    "loss_weight",
    "n_min",
    "noon_limits",
    "noon_loss_distribution",
    "noon_state",
    "optimize_probe",
    "pure_qfi",
    "qfi_exact",
    "qfi_upper_bound",
    "soliton_hamilton",
    "soliton_phase_parameter",
    "solve_ground",
    "variance_delta_phi",
]
