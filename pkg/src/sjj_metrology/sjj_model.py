"""Soliton Josephson junction: tridiagonal Hamiltonian, ground state, probe states.

In the two-mode Fock basis ``|N-n>_a |n>_b`` the stationary amplitudes obey

    E A_n = alpha_n A_n + beta_n A_{n+1} + beta_{n-1} A_{n-1}

with

    alpha_n = -(Lambda/2) (2n/N - 1)^2
    beta_n  = -(1/N^2) ( [1 - 0.21 (2n/N - 1)^2]     (n+1) sqrt((N-n)(N-n-1))
                       + [1 - 0.21 (2(n+1)/N - 1)^2] (N-n) sqrt(n(n+1)) ).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .errors import DomainError, NumericalError
from .fock_core import log_binomial

NORM_TOL = 1e-12
CORRECTION = 0.21


@dataclass(frozen=True, eq=False)
class TwoModeState:
    """Amplitudes ``A_0..A_N``; index ``n`` counts particles in mode b."""

    N: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128).ravel()
        if isinstance(self.N, bool) or int(self.N) != self.N or self.N < 1:
            raise DomainError(f"N must be a positive integer, got {self.N!r}")
        if amps.shape[0] != self.N + 1:
            raise DomainError(f"expected {self.N + 1} amplitudes, got {amps.shape[0]}")
        if not np.all(np.isfinite(amps)):
            raise DomainError("amplitudes must be finite")
        norm = math.fsum(np.abs(amps) ** 2)
        if abs(norm - 1.0) > NORM_TOL:
            raise DomainError(f"state is not normalized: sum |A_n|^2 = {norm!r}")
        amps.setflags(write=False)
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amplitudes, normalize: bool = True) -> "TwoModeState":
        amps = np.asarray(amplitudes, dtype=np.complex128).ravel()
        if normalize:
            norm = math.sqrt(math.fsum(np.abs(amps) ** 2))
            if norm == 0.0:
                raise DomainError("cannot normalize the zero vector")
            amps = amps / norm
        return cls(amps.shape[0] - 1, amps)

    @property
    def populations(self) -> np.ndarray:
        """``|A_n|^2`` as a real array."""
        return np.abs(self.amplitudes) ** 2

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "amplitudes_re": [float(v) for v in self.amplitudes.real],
            "amplitudes_im": [float(v) for v in self.amplitudes.imag],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "TwoModeState":
        try:
            N = doc["N"]
            re = np.asarray(doc["amplitudes_re"], dtype=np.float64)
            im = np.asarray(doc.get("amplitudes_im", np.zeros_like(re)), dtype=np.float64)
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"malformed state document: {exc}") from exc
        if re.shape != im.shape:
            raise DomainError("amplitudes_re and amplitudes_im differ in length")
        # JSON round-trips floats exactly; tiny drift from foreign writers is renormalized
        state = cls.from_amplitudes(re + 1j * im, normalize=True)
        if state.N != N:
            raise DomainError(f"N={N} does not match {re.shape[0]} amplitudes")
        return state

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1) + "\n")

    @classmethod
    def load(cls, path) -> "TwoModeState":
        return cls.from_json(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class SjjParams:
    N: int
    Lambda: float

    def __post_init__(self):
        if isinstance(self.N, bool) or int(self.N) != self.N:
            raise DomainError(f"N must be an integer, got {self.N!r}")
        if not (math.isfinite(self.Lambda) and self.Lambda >= 0.0):
            raise DomainError(f"Lambda must be finite and non-negative, got {self.Lambda!r}")


@dataclass(frozen=True, eq=False)
class TridiagonalHamiltonian:
    N: int
    alpha: np.ndarray
    beta: np.ndarray

    def matvec(self, v: np.ndarray) -> np.ndarray:
        out = self.alpha * v
        out[:-1] += self.beta * v[1:]
        out[1:] += self.beta * v[:-1]
        return out

    def dense(self) -> np.ndarray:
        return np.diag(self.alpha) + np.diag(self.beta, 1) + np.diag(self.beta, -1)

    def norm(self) -> float:
        """Infinity norm (max absolute row sum)."""
        rows = np.abs(self.alpha).copy()
        rows[:-1] += np.abs(self.beta)
        rows[1:] += np.abs(self.beta)
        return float(rows.max())


def build_hamiltonian(params: SjjParams) -> TridiagonalHamiltonian:
    N = int(params.N)
    if N < 2:
        raise DomainError(f"N={N} gives a degenerate (zero-coupling) Hamiltonian; need N >= 2")
    n = np.arange(N + 1, dtype=np.float64)
    alpha = -0.5 * params.Lambda * (2.0 * n / N - 1.0) ** 2
    m = n[:-1]
    left = (1.0 - CORRECTION * (2.0 * m / N - 1.0) ** 2) * (m + 1.0) * np.sqrt((N - m) * (N - m - 1.0))
    right = (1.0 - CORRECTION * (2.0 * (m + 1.0) / N - 1.0) ** 2) * (N - m) * np.sqrt(m * (m + 1.0))
    beta = -(left + right) / N**2
    alpha.setflags(write=False)
    beta.setflags(write=False)
    return TridiagonalHamiltonian(N, alpha, beta)


# ---------------------------------------------------------------------------
# ground state


@dataclass
class GroundSolution:
    state: TwoModeState
    energy: float
    residual: float
    iterations: int
    parity_gap: float
    degenerate: bool
    diagnostics: dict = field(default_factory=dict)


def _fold(H: TridiagonalHamiltonian, parity: int):
    """Tridiagonal block of ``H`` on mirror-even (+1) or mirror-odd (-1) vectors.

    Uses the orthonormal basis ``(e_n + parity * e_{N-n}) / sqrt(2)`` for
    ``n < N/2`` plus ``e_{N/2}`` (even parity, even N only).
    """
    N = H.N
    a, b = np.asarray(H.alpha), np.asarray(H.beta)
    h = N // 2
    if N % 2 == 0:
        if parity > 0:
            d = a[: h + 1].copy()
            e = b[:h].copy()
            e[h - 1] *= math.sqrt(2.0)
        else:
            d = a[:h].copy()
            e = b[: h - 1].copy()
    else:
        d = a[: h + 1].copy()
        d[h] += parity * b[h]
        e = b[:h].copy()
    return d, e


def _unfold(u: np.ndarray, N: int) -> np.ndarray:
    h = N // 2
    A = np.zeros(N + 1)
    s = 1.0 / math.sqrt(2.0)
    if N % 2 == 0:
        A[:h] = u[:h] * s
        A[h] = u[h]
        A[h + 1 :] = u[:h][::-1] * s
    else:
        A[: h + 1] = u * s
        A[h + 1 :] = u[::-1] * s
    return A


def _is_mirror_symmetric(H: TridiagonalHamiltonian) -> bool:
    return np.allclose(H.alpha, H.alpha[::-1], rtol=0, atol=1e-12) and np.allclose(
        H.beta, H.beta[::-1], rtol=0, atol=1e-12
    )


def solve_ground(H: TridiagonalHamiltonian, max_iter: int = 100, tol: float = 1e-14) -> GroundSolution:
    """Lowest eigenpair of ``H`` with parity resolved.

    Deep in the cat regime the lowest even and odd states are degenerate to
    machine precision, and a plain solve returns an arbitrary mixture of the
    two.  When ``H`` is mirror symmetric each parity block is solved
    separately and the lower one is kept (even on ties, which is where the
    Perron vector lives for non-positive couplings).
    """
    scale = H.norm()
    if H.N >= 2 and _is_mirror_symmetric(H):
        d_even, e_even = _fold(H, +1)
        d_odd, e_odd = _fold(H, -1)
        e0_odd = kernels.lowest_eigenvalue(d_odd, e_odd)
        energy, u, iters, ok = kernels.lowest_eigenpair(d_even, e_even, max_iter, tol)
        if e0_odd < energy - 1e-12 * max(scale, 1.0):
            energy, u, iters, ok = kernels.lowest_eigenpair(d_odd, e_odd, max_iter, tol)
            A = _unfold_odd(u, H.N)
            gap = kernels.lowest_eigenvalue(d_even, e_even) - energy
        else:
            A = _unfold(u, H.N)
            gap = e0_odd - energy
    else:
        energy, A, iters, ok = kernels.lowest_eigenpair(np.asarray(H.alpha), np.asarray(H.beta), max_iter, tol)
        gap = math.nan
    A = A / math.sqrt(math.fsum(A * A))
    if A[np.argmax(np.abs(A))] < 0.0:
        A = -A
    residual = float(np.linalg.norm(H.matvec(A) - energy * A))
    diagnostics = {
        "iterations": iters,
        "converged": ok,
        "residual": residual,
        "norm_H": scale,
        "parity_gap": gap,
        "backend": "numba" if kernels._accel.NUMBA_ENABLED else "numpy",
    }
    if not ok or not math.isfinite(energy) or residual > 1e-10 * max(scale, 1e-300):
        raise NumericalError("ground-state solve did not converge", diagnostics)
    degenerate = bool(math.isfinite(gap) and abs(gap) <= 1e-12)
    diagnostics["degenerate"] = degenerate
    return GroundSolution(
        state=TwoModeState(H.N, A.astype(np.complex128)),
        energy=float(energy),
        residual=residual,
        iterations=int(iters),
        parity_gap=float(gap),
        degenerate=degenerate,
        diagnostics=diagnostics,
    )


def _unfold_odd(u: np.ndarray, N: int) -> np.ndarray:
    h = N // 2
    A = np.zeros(N + 1)
    s = 1.0 / math.sqrt(2.0)
    if N % 2 == 0:
        A[:h] = u * s
        A[h + 1 :] = -u[::-1] * s
    else:
        A[: h + 1] = u * s
        A[h + 1 :] = -u[::-1] * s
    return A


def ground_state(H: TridiagonalHamiltonian) -> tuple[TwoModeState, float]:
    """Normalized ground state (largest-magnitude component positive) and its energy."""
    sol = solve_ground(H)
    return sol.state, sol.energy


def sjj_ground_state(N: int, Lambda: float) -> TwoModeState:
    return ground_state(build_hamiltonian(SjjParams(N, Lambda)))[0]


def catness(state: TwoModeState) -> float:
    """Weight on the two N00N components, ``|A_0|^2 + |A_N|^2``."""
    p = state.populations
    return float(p[0] + p[-1])


def locate_crossover(N: int, lo: float = 0.0, hi: float = 3.0, points: int = 31, tol: float = 1e-12) -> float:
    """Lambda at which the ground-state cat-ness changes fastest.

    Scans ``points`` values on ``[lo, hi]``, takes the interval with the largest
    cat-ness jump, then bisects it for the point where cat-ness crosses the
    midpoint of the two endpoint values.  Near the crossover the change is a
    step narrower than 1e-8 in Lambda for N ~ 100, so the bisection matters.
    """
    grid = np.linspace(lo, hi, points)
    cats = np.array([catness(sjj_ground_state(N, float(L))) for L in grid])
    i = int(np.argmax(np.abs(np.diff(cats))))
    a, b = float(grid[i]), float(grid[i + 1])
    ca, cb = cats[i], cats[i + 1]
    target = 0.5 * (ca + cb)
    rising = cb > ca
    while b - a > tol * max(1.0, abs(b)):
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b:
            break
        cm = catness(sjj_ground_state(N, mid))
        if (cm < target) == rising:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


# ---------------------------------------------------------------------------
# reference probes


def noon_state(N: int) -> TwoModeState:
    if isinstance(N, bool) or int(N) != N or N < 1:
        raise DomainError(f"N must be a positive integer, got {N!r}")
    A = np.zeros(N + 1, dtype=np.complex128)
    A[0] = A[-1] = 1.0 / math.sqrt(2.0)
    return TwoModeState(N, A)


def binomial_state(N: int) -> TwoModeState:
    """``A_n = sqrt(C(N, n) / 2^N)``, the coherent-like reference probe."""
    if isinstance(N, bool) or int(N) != N or N < 1:
        raise DomainError(f"N must be a positive integer, got {N!r}")
    logs = np.array([log_binomial(N, n, max_n=max(N, 10_000)) for n in range(N + 1)])
    A = np.exp(0.5 * (logs - N * math.log(2.0)))
    return TwoModeState.from_amplitudes(A, normalize=True)


def soliton_hamilton(u: float, N: float) -> float:
    """Classical Hamilton function of a bright soliton, ``-u^2 N^3 / 24``."""
    if not (u > 0 and N > 0):
        raise DomainError("u and N must be positive")
    return -(u**2) * N**3 / 24.0


def soliton_phase_parameter(u: float) -> float:
    """Phase parameter multiplying ``N^3`` in the single-mode soliton Hamiltonian."""
    if not u > 0:
        raise DomainError("u must be positive")
    return -(u**2) / 24.0
