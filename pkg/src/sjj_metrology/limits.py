"""Closed-form precision limits and loss thresholds."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError


def _check(N=None, k=None, eta=None, eta_open=False):
    if N is not None and not N >= 1:
        raise DomainError(f"N must be >= 1, got {N!r}")
    if k is not None and not k >= 1:
        raise DomainError(f"k must be >= 1, got {k!r}")
    if eta is not None:
        upper_ok = eta < 1.0 if eta_open else eta <= 1.0
        if not (0.0 < eta and upper_ok):
            interval = "(0, 1)" if eta_open else "(0, 1]"
            raise DomainError(f"eta must lie in {interval}, got {eta!r}")


def ideal_limit(N, k) -> float:
    """Lossless N00N precision ``1 / N^k`` (Heisenberg for k=1)."""
    _check(N, k)
    return float(N) ** (-k)


def noon_limits(N, k, eta) -> tuple[float, float]:
    """``(N^2k eta^N, 1 / (sqrt(eta^N) N^k))`` for a N00N probe under symmetric loss."""
    _check(N, k, eta)
    log_f = 2 * k * math.log(N) + N * math.log(eta)
    return math.exp(log_f), math.exp(-0.5 * log_f)


def n_min(k, eta) -> float:
    """Particle number maximising the lossy N00N Fisher information, ``-2k / ln eta``."""
    _check(k=k)
    if eta == 1.0:
        raise DomainError("no finite optimum without loss (eta = 1)")
    _check(eta=eta, eta_open=True)
    return -2.0 * k / math.log(eta)


def eta_critical(N, k) -> float:
    """Transmissivity ``exp(-2k/N)`` above which a N00N probe is worth using."""
    _check(N, k)
    return math.exp(-2.0 * k / N)


@dataclass(frozen=True)
class InterferometricLimits:
    sil: float
    scaled: float
    # the scaled limit is a power law with its prefactor fixed to 1
    scaled_is_scaling_law: bool = True


def interferometric_limits(N, k, eta) -> InterferometricLimits:
    """Coherent-probe limits: ``1/sqrt(eta N)`` and ``1/(sqrt(eta) N^(k-1/2))``.

    For k=1 both coincide with the standard interferometric limit; for k=3
    the second is the nonlinear limit ``1/sqrt(eta N^5)``.
    """
    _check(N, k, eta)
    return InterferometricLimits(1.0 / math.sqrt(eta * N), 1.0 / (math.sqrt(eta) * float(N) ** (k - 0.5)))


def variance_delta_phi(N, eta) -> float:
    """Precision from number-difference fluctuations, ``[N(1 + eta(N eta - 1))]^-1/2``."""
    _check(N, eta=eta)
    return (N * (1.0 + eta * (N * eta - 1.0))) ** -0.5


def critical_time(k, gamma, N) -> float:
    """Time ``2k / (gamma N)`` (seconds) at which one-body decay reaches ``eta_critical``."""
    _check(N, k)
    if not gamma > 0:
        raise DomainError(f"gamma must be positive, got {gamma!r}")
    return 2.0 * k / (gamma * N)


def limits_table(N, k, eta, gamma=None) -> dict:
    """Every closed-form quantity for one ``(N, k, eta)``; used by the CLI."""
    f_noon, dphi_noon = noon_limits(N, k, eta)
    il = interferometric_limits(N, k, eta)
    table = {
        "N": N,
        "k": k,
        "eta": eta,
        "ideal_limit": ideal_limit(N, k),
        "noon_fisher": f_noon,
        "noon_delta_phi": dphi_noon,
        "sil": il.sil,
        "scaled_interferometric_limit": il.scaled,
        "variance_delta_phi": variance_delta_phi(N, eta),
        "eta_critical": eta_critical(N, k),
    }
    if eta < 1.0:
        nm = n_min(k, eta)
        table.update(n_min=nm, n_min_round=round(nm), n_min_floor=math.floor(nm))
    if gamma is not None:
        table["critical_time_s"] = critical_time(k, gamma, N)
    return table
