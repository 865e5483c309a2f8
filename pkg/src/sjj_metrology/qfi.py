"""Quantum Fisher information of phase-encoded probes, with and without loss.

Three estimates are provided:

* ``pure_qfi``: four times the variance of ``n^k`` in the probe.
* ``qfi_upper_bound``: the branch-averaged pure-state QFI,
  ``4 sum_b p_b Var_b(n^k)``, an upper bound on the mixed-state value by
  convexity.  Written out, it equals
  ``4 [sum_n n^2k A_n^2 - sum_b (sum_n n^k C_n^2)^2 / sum_n C_n^2]``; the kernel
  evaluates each branch variance about its own mean, which is the same sum
  without the large cancellation.
* ``qfi_exact``: the mixed-state QFI from the eigendecomposition of each
  sector block, in symmetric-logarithmic-derivative form
  ``sum_ij 2 |<i|d rho|j>|^2 / (l_i + l_j)``.

All sums run on generators scaled by ``N^-k``; results are rescaled at the end.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field

import numpy as np

from . import _accel, kernels
from .errors import CapacityError, DomainError, NumericalError
from .fock_core import LossChannel, loss_pmf_table
from .loss_model import assemble_sectors, decompose, phase_generator
from .sjj_model import SjjParams, TwoModeState, build_hamiltonian, ground_state

DEFAULT_EXACT_CAP = 150


class Method(str, enum.Enum):
    PURE = "pure"
    EXACT = "exact"
    BOUND = "bound"
    ANALYTIC = "analytic"


@dataclass(frozen=True)
class QfiEstimate:
    value: float
    method: Method
    k: int
    eta: float | tuple[float, float] | None = None
    metadata: dict = field(default_factory=dict, compare=False)

    @property
    def delta_phi_min(self) -> float:
        """Quantum Cramer-Rao precision for a single run, ``value ** -0.5``."""
        return delta_phi_from_fisher(self.value)


def delta_phi_from_fisher(value: float) -> float:
    if value < 0.0:
        raise DomainError(f"Fisher information must be non-negative, got {value!r}")
    if value == 0.0:
        return math.inf
    return 1.0 / math.sqrt(value)


def _eta_label(channel: LossChannel | None):
    if channel is None:
        return None
    if channel.eta_a == channel.eta_b:
        return channel.eta_a
    return (channel.eta_a, channel.eta_b)


def _check_k(k):
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise DomainError(f"k must be a positive integer, got {k!r}")
    return int(k)


@functools.lru_cache(maxsize=64)
def _pmf(N: int, eta: float) -> np.ndarray:
    table = loss_pmf_table(N, eta)
    table.setflags(write=False)
    return table


def _scaled_generator(N: int, k: int) -> np.ndarray:
    g = phase_generator(N, k)
    g.setflags(write=False)
    return g


def pure_qfi(state: TwoModeState, k: int) -> QfiEstimate:
    """``4 Var(n^k)`` of the lossless phase-encoded probe."""
    k = _check_k(k)
    N = state.N
    x = state.populations
    g = phase_generator(N, k)
    ksum = kernels.kahan_sum_jit if _accel.NUMBA_ENABLED else kernels.kahan_sum_np
    mean = ksum(x * g)
    var = ksum(x * (g - mean) ** 2)
    return QfiEstimate(4.0 * var * float(N) ** (2 * k), Method.PURE, k, 1.0)


def bound_value_and_gradient(x: np.ndarray, channel: LossChannel, k: int, want_grad: bool = True):
    """Upper bound and its gradient with respect to populations ``x = |A|^2``.

    Both are in units of ``N^(2k)``.  The bound is concave and homogeneous of
    degree one in ``x``, so ``x @ grad == value``.
    """
    N = x.shape[0] - 1
    return kernels.bound_kernel(x, _pmf(N, channel.eta_a), _pmf(N, channel.eta_b), _scaled_generator(N, k), want_grad)


def bound_value_hessian(x: np.ndarray, channel: LossChannel, k: int) -> np.ndarray:
    """Hessian of :func:`bound_value_and_gradient` in ``x`` (negative semidefinite)."""
    N = x.shape[0] - 1
    return kernels.bound_hessian(x, _pmf(N, channel.eta_a), _pmf(N, channel.eta_b), _scaled_generator(N, k))


def qfi_upper_bound(state: TwoModeState, channel: LossChannel, k: int) -> QfiEstimate:
    """Branch-averaged QFI; depends on the probe only through ``|A_n|^2``."""
    k = _check_k(k)
    N = state.N
    value, _ = bound_value_and_gradient(state.populations, channel, k, want_grad=False)
    return QfiEstimate(float(value) * float(N) ** (2 * k), Method.BOUND, k, _eta_label(channel))


def sector_sld_sum(rho: np.ndarray, drho: np.ndarray, floor: float) -> float:
    """``sum 2 |<i|drho|j>|^2 / (l_i + l_j)`` over eigenpairs with ``l_i + l_j > floor``."""
    lam, U = np.linalg.eigh(rho)
    D = U.conj().T @ drho @ U
    S = lam[:, None] + lam[None, :]
    mask = S > floor
    if not np.any(mask):
        return 0.0
    return float(np.sum(2.0 * np.abs(D[mask]) ** 2 / S[mask]))


def qfi_exact(
    state: TwoModeState,
    channel: LossChannel,
    k: int,
    phi: float = 0.0,
    cap: int = DEFAULT_EXACT_CAP,
) -> QfiEstimate:
    """Mixed-state QFI of the lossy probe at phase ``phi``.

    The eigenvalue floor on ``l_i + l_j`` is ``1e-12`` times the total trace.
    """
    k = _check_k(k)
    N = state.N
    if N > cap:
        raise CapacityError(f"N={N} exceeds the exact-QFI cap {cap}; use the bound method")
    decomp = decompose(state, channel, k, phi)
    sectors = assemble_sectors(decomp, derivative=True)
    trace = math.fsum(s.weight for s in sectors)
    floor = 1e-12 * trace
    parts = []
    try:
        for s in sectors:
            if s.weight <= 0.0:
                continue
            parts.append(sector_sld_sum(s.matrix, s.derivative, floor))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"sector eigendecomposition failed: {exc}", {"N": N, "k": k}) from exc
    value = math.fsum(parts) * float(N) ** (2 * k)
    if not math.isfinite(value):
        raise NumericalError("exact QFI is not finite", {"N": N, "k": k, "phi": phi})
    return QfiEstimate(value, Method.EXACT, k, _eta_label(channel), {"phi": float(phi)})


@dataclass(frozen=True)
class CrossoverRow:
    Lambda: float
    exact: float
    bound: float

    @property
    def relative_gap(self) -> float:
        return (self.bound - self.exact) / self.bound if self.bound > 0 else 0.0


def crossover_discrepancy(N: int, Lambda_grid, channel: LossChannel, k: int, phi: float = 0.0) -> list[CrossoverRow]:
    """Exact against bound QFI for SJJ ground states over a Lambda grid."""
    rows = []
    for L in Lambda_grid:
        state, _ = ground_state(build_hamiltonian(SjjParams(N, float(L))))
        ex = qfi_exact(state, channel, k, phi).value
        bd = qfi_upper_bound(state, channel, k).value
        rows.append(CrossoverRow(float(L), ex, bd))
    return rows
