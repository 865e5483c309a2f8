"""Log-space combinatorics and the beam-splitter loss weights.

A Fock component ``|N-n>_a |n>_b`` sent through two beam splitters with
transmissivities ``eta_a`` and ``eta_b`` leaves ``|N-n-l_a>_a |n-l_b>_b`` with
weight

    B(N, n, l_a, l_b) = C(N-n, l_a) C(n, l_b)
                        * eta_a**(N-n) (1/eta_a - 1)**l_a
                        * eta_b**n     (1/eta_b - 1)**l_b

which factorises into two binomial loss probabilities, one per arm.  For
N in the hundreds the binomials overflow doubles, so everything is summed in
log space and exponentiated once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import DomainError

DEFAULT_MAX_N = 10_000


@dataclass(frozen=True)
class LossChannel:
    """Transmissivities of the fictitious beam splitters in arms a and b."""

    eta_a: float
    eta_b: float

    def __post_init__(self):
        for name in ("eta_a", "eta_b"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float, np.floating)) and 0.0 < value <= 1.0):
                raise DomainError(f"{name} must lie in (0, 1], got {value!r}")
            object.__setattr__(self, name, float(value))

    @classmethod
    def symmetric(cls, eta: float) -> "LossChannel":
        return cls(eta, eta)

    @property
    def lossless(self) -> bool:
        return self.eta_a == 1.0 and self.eta_b == 1.0


def _check_index(n, name):
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise DomainError(f"{name} must be an integer, got {n!r}")
    if n < 0:
        raise DomainError(f"{name} must be non-negative, got {n}")
    return int(n)


def log_binomial(n: int, r: int, max_n: int = DEFAULT_MAX_N) -> float:
    """Natural log of the binomial coefficient C(n, r).

    Summed term by term as ``sum log((n - r' + i) / i)`` with ``r' = min(r, n-r)``
    through ``math.fsum``, which keeps the relative error near machine epsilon
    even when the result is small (lgamma differences lose digits there).
    """
    n = _check_index(n, "n")
    r = _check_index(r, "r")
    if r > n:
        raise DomainError(f"r={r} exceeds n={n}")
    if n > max_n:
        raise DomainError(f"n={n} exceeds the configured maximum {max_n}")
    r = min(r, n - r)
    if r == 0:
        return 0.0
    base = n - r
    return math.fsum(math.log(base + i) - math.log(i) for i in range(1, r + 1))


def log_binomial_table(N: int) -> np.ndarray:
    """``T[j, l] = ln C(j, l)`` for ``0 <= l <= j <= N``; ``-inf`` above the diagonal."""
    N = _check_index(N, "N")
    j = np.arange(N + 1, dtype=np.float64)
    lf = gammaln(j + 1.0)
    table = lf[:, None] - lf[None, :] - lf[np.maximum(j[:, None] - j[None, :], 0).astype(int)]
    table[np.triu_indices(N + 1, 1)] = -np.inf
    # C(j, 0) = C(j, j) = 1 exactly
    idx = np.arange(N + 1)
    table[idx, 0] = 0.0
    table[idx, idx] = 0.0
    return table


def loss_pmf_table(N: int, eta: float) -> np.ndarray:
    """Per-arm loss probabilities ``P[j, l] = C(j, l) eta**(j-l) (1-eta)**l``.

    Row ``j`` is the distribution of the number ``l`` of particles lost from an
    arm that held ``j`` particles.  ``eta == 1`` is an explicit identity branch
    so no ``0 * inf`` or ``0**0`` is ever evaluated.
    """
    N = _check_index(N, "N")
    if not 0.0 < eta <= 1.0:
        raise DomainError(f"eta must lie in (0, 1], got {eta!r}")
    if eta == 1.0:
        table = np.zeros((N + 1, N + 1))
        table[:, 0] = 1.0
        return table
    j = np.arange(N + 1, dtype=np.float64)
    kept = j[:, None] - j[None, :]
    with np.errstate(invalid="ignore"):
        logp = log_binomial_table(N) + kept * math.log(eta) + j[None, :] * math.log1p(-eta)
    logp[kept < 0] = -np.inf
    return np.exp(logp)


def log_loss_weight(N: int, n: int, l_a: int, l_b: int, channel: LossChannel) -> float:
    """``ln B(N, n, l_a, l_b)``; ``-inf`` where the weight is exactly zero."""
    N = _check_index(N, "N")
    n = _check_index(n, "n")
    l_a = _check_index(l_a, "l_a")
    l_b = _check_index(l_b, "l_b")
    if n > N:
        raise DomainError(f"n={n} exceeds N={N}")
    if l_a > N - n or l_b > n:
        raise DomainError(f"loss (l_a={l_a}, l_b={l_b}) out of range for N={N}, n={n}")
    total = 0.0
    for held, lost, eta in ((N - n, l_a, channel.eta_a), (n, l_b, channel.eta_b)):
        if eta == 1.0:
            if lost > 0:
                return -math.inf
            continue
        total += log_binomial(held, lost, max_n=max(DEFAULT_MAX_N, held))
        total += (held - lost) * math.log(eta) + lost * math.log1p(-eta)
    return total


def loss_weight(N: int, n: int, l_a: int, l_b: int, channel: LossChannel) -> float:
    """Probability weight ``B(N, n, l_a, l_b)`` of losing ``l_a`` and ``l_b`` particles."""
    return math.exp(log_loss_weight(N, n, l_a, l_b, channel))
