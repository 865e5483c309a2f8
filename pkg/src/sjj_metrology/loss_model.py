"""Loss branches of a phase-encoded probe and the block-diagonal lossy state.

The phase ``exp(i n^k phi)`` is imprinted on the original b-occupation ``n``
before the beam splitters act.  Losing ``(l_a, l_b)`` particles maps
``|N-n>|n>`` to ``|N-n-l_a>|n-l_b>`` with amplitude ``A_n sqrt(B)``; tracing the
environment leaves a mixture of branch states.  Branches sharing the same
surviving total ``M = N - l_a - l_b`` overlap and are summed into one
``(M+1) x (M+1)`` block indexed by the surviving b-occupation ``m = n - l_b``.
Blocks with different ``M`` never couple, so the full matrix is never built.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .fock_core import LossChannel, log_binomial, loss_pmf_table
from .sjj_model import TwoModeState


@dataclass(frozen=True, eq=False)
class Branch:
    """Unnormalized conditional state after losing ``l_a`` and ``l_b`` particles.

    ``amplitudes[i]`` belongs to original occupation ``n = l_b + i`` and carries
    the phase factor; ``probability`` is the squared norm.
    """

    l_a: int
    l_b: int
    amplitudes: np.ndarray
    probability: float

    @property
    def n_values(self) -> np.ndarray:
        return np.arange(self.l_b, self.l_b + self.amplitudes.shape[0])

    @property
    def remaining(self) -> int:
        """Surviving total particle number ``M``."""
        return self.amplitudes.shape[0] - 1

    def normalized(self) -> np.ndarray:
        if self.probability == 0.0:
            return np.zeros_like(self.amplitudes)
        return self.amplitudes / math.sqrt(self.probability)


@dataclass(frozen=True, eq=False)
class BranchDecomposition:
    N: int
    k: int
    phi: float
    channel: LossChannel
    branches: tuple

    def total_probability(self) -> float:
        return math.fsum(b.probability for b in self.branches)

    def probability_table(self) -> np.ndarray:
        """``P[l_a, l_b]``; zero where ``l_a + l_b > N``."""
        P = np.zeros((self.N + 1, self.N + 1))
        for b in self.branches:
            P[b.l_a, b.l_b] = b.probability
        return P


@dataclass(frozen=True, eq=False)
class SectorDensityMatrix:
    """Block of the lossy density matrix with ``M`` surviving particles.

    Row/column ``m`` is the state ``|M-m>_a |m>_b``.  ``derivative`` holds the
    phi-derivative of the block when it was requested.
    """

    M: int
    matrix: np.ndarray
    weight: float
    derivative: np.ndarray | None = None


def _check_k(k):
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise DomainError(f"k must be a positive integer, got {k!r}")
    return int(k)


def phase_generator(N: int, k: int) -> np.ndarray:
    """``n^k / N^k`` for ``n = 0..N``; multiply QFI values by ``N^(2k)`` afterwards."""
    return (np.arange(N + 1, dtype=np.float64) / N) ** k


def decompose(state: TwoModeState, channel: LossChannel, k: int, phi: float = 0.0) -> BranchDecomposition:
    """Enumerate every loss branch ``0 <= l_b <= N``, ``0 <= l_a <= N - l_b``.

    Branches are ordered by ``(l_b, l_a)``; none is pruned, even at zero
    probability.
    """
    k = _check_k(k)
    N = state.N
    if not math.isfinite(phi):
        raise DomainError("phi must be finite")
    pa = loss_pmf_table(N, channel.eta_a)
    pb = loss_pmf_table(N, channel.eta_b)
    n = np.arange(N + 1)
    # n^k phi with exact integer powers; reduce mod 2 pi in the float domain
    phases = np.exp(1j * np.mod(np.array([float(v) ** k for v in range(N + 1)]) * phi, 2.0 * math.pi))
    A = state.amplitudes * phases
    branches = []
    for lb in range(N + 1):
        for la in range(N - lb + 1):
            idx = n[lb : N - la + 1]
            w = pa[N - idx, la] * pb[idx, lb]
            C = A[idx] * np.sqrt(w)
            p = math.fsum(np.abs(C) ** 2)
            C.setflags(write=False)
            branches.append(Branch(la, lb, C, p))
    return BranchDecomposition(N, k, float(phi), channel, tuple(branches))


def assemble_sectors(decomp: BranchDecomposition, derivative: bool = False) -> list[SectorDensityMatrix]:
    """Sum branch projectors into one block per surviving total ``M``.

    Returns blocks for ``M = 0..N`` in increasing order.  With ``derivative``
    each block also carries ``d rho_M / d phi`` computed from the branch
    commutators ``i [G_b, |c_b><c_b|]``, where ``G_b = diag((m + l_b)^k)`` in the
    same ``N^-k`` scaling as :func:`phase_generator`.
    """
    N = decomp.N
    by_M = [[] for _ in range(N + 1)]
    for b in decomp.branches:
        by_M[N - b.l_a - b.l_b].append(b)
    g_full = phase_generator(N, decomp.k)
    sectors = []
    for M, group in enumerate(by_M):
        V = np.array([b.amplitudes for b in group])  # rows: branches, cols: m
        rho = V.T @ V.conj()
        weight = float(np.real(np.trace(rho)))
        drho = None
        if derivative:
            G = np.array([g_full[b.l_b : b.l_b + M + 1] for b in group])
            W = G * V
            X = W.T @ V.conj()
            drho = 1j * (X - X.conj().T)
        sectors.append(SectorDensityMatrix(M, rho, weight, drho))
    return sectors


def noon_loss_distribution(N: int, eta: float, form: str = "binomial") -> np.ndarray:
    """Distribution of the surviving particle number ``n`` for one N00N arm.

    ``binomial`` is exact; ``poisson`` (``eta -> 1``) and ``gauss``
    (``N(1-eta) >> 1``) are the textbook approximations and are returned
    without renormalization.
    """
    if isinstance(N, bool) or int(N) != N or N < 1:
        raise DomainError(f"N must be a positive integer, got {N!r}")
    if not 0.0 < eta <= 1.0:
        raise DomainError(f"eta must lie in (0, 1], got {eta!r}")
    n = np.arange(N + 1)
    if form == "binomial":
        if eta == 1.0:
            p = np.zeros(N + 1)
            p[N] = 1.0
            return p
        logs = np.array([log_binomial(N, int(v), max_n=max(N, 10_000)) for v in n])
        return np.exp(logs + n * math.log(eta) + (N - n) * math.log1p(-eta))
    lam = N * (1.0 - eta)
    if form == "poisson":
        lost = N - n
        if lam == 0.0:
            return (lost == 0).astype(np.float64)
        logs = lost * math.log(lam) - np.array([math.lgamma(v + 1.0) for v in lost]) - lam
        return np.exp(logs)
    if form == "gauss":
        if lam == 0.0:
            raise DomainError("gaussian form has zero width when N(1 - eta) = 0")
        return np.exp(-((n - N * eta) ** 2) / (2.0 * lam)) / math.sqrt(2.0 * math.pi * lam)
    raise DomainError(f"unknown distribution form {form!r}")


def gauss_width(N: int, eta: float) -> float:
    """Full width ``2 sqrt(N(1-eta))`` of the gaussian loss profile (twice the std)."""
    return 2.0 * math.sqrt(N * (1.0 - eta))
