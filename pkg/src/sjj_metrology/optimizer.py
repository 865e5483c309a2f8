"""Search for the probe that maximises the lossy QFI.

Amplitudes are taken real and non-negative, ``A_n = sqrt(x_n)``, with the
populations ``x`` on the probability simplex (the non-negative orthant of the
unit sphere in amplitude space).  The upper bound is concave in ``x``: each
branch term ``-S1^2/S0`` is minus a perspective of a square.  So any monotone
ascent reaches the global optimum; the starts only matter for speed and as a
check.  Because the bound is degree-one homogeneous the Frank-Wolfe gap
``max(grad) - value`` bounds the remaining suboptimality, and its Hessian
``-8 sum_b w_b w_b^T / S0_b`` is cheap enough for projected Newton steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, DomainError
from .fock_core import LossChannel
from .qfi import Method, QfiEstimate, bound_value_and_gradient, bound_value_hessian, qfi_exact, qfi_upper_bound, _eta_label
from .sjj_model import SjjParams, TwoModeState, binomial_state, build_hamiltonian, ground_state, noon_state

EXACT_OBJECTIVE_CAP = 40


@dataclass(frozen=True)
class OptimizerConfig:
    starts: int = 16
    max_iterations: int = 2000
    rel_tolerance: float = 1e-9
    seed: int = 0
    objective: str = "bound"
    fd_step: float = 1e-6

    def __post_init__(self):
        if self.starts < 1:
            raise DomainError("starts must be >= 1")
        if not self.rel_tolerance > 0:
            raise DomainError("rel_tolerance must be positive")
        if self.max_iterations < 1:
            raise DomainError("max_iterations must be >= 1")
        if self.objective not in ("bound", "exact"):
            raise DomainError(f"objective must be 'bound' or 'exact', got {self.objective!r}")


@dataclass
class ProbeOptimum:
    state: TwoModeState
    estimate: QfiEstimate
    converged: bool
    iterations: int
    best_start: int
    start_values: list = field(default_factory=list)


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto ``{x >= 0, sum x = 1}`` (sort-and-threshold)."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ind = np.arange(1, v.shape[0] + 1)
    rho = np.nonzero(u - css / ind > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    p = np.maximum(v - theta, 0.0)
    # long steps make theta large and cost digits of the unit sum; restore it
    return p / math.fsum(p)


def _starting_points(N: int, config: OptimizerConfig) -> list[np.ndarray]:
    rng = np.random.default_rng(config.seed)
    starts = [noon_state(N).populations, binomial_state(N).populations, np.full(N + 1, 1.0 / (N + 1))]
    while len(starts) < config.starts:
        a = np.abs(rng.standard_normal(N + 1))
        x = a * a
        starts.append(x / x.sum())
    return starts[: config.starts]


class _BoundObjective:
    def __init__(self, channel, k):
        self.channel, self.k = channel, k

    def __call__(self, x):
        f, g = bound_value_and_gradient(x, self.channel, self.k, want_grad=True)
        return float(f), g


def _bound_hessian(channel, k):
    def hessian(x):
        return bound_value_hessian(x, channel, k)

    return hessian


class _ExactObjective:
    """Exact QFI (scaled by ``N^-2k``) with central-difference gradients.

    Extended off the simplex by degree-one homogeneity, which the exact QFI
    satisfies because scaling ``rho`` scales the SLD sum and its floor alike.
    """

    def __init__(self, channel, k, fd_step):
        self.channel, self.k, self.h = channel, k, fd_step

    def value(self, x):
        s = float(x.sum())
        N = x.shape[0] - 1
        state = TwoModeState.from_amplitudes(np.sqrt(x / s), normalize=True)
        return s * qfi_exact(state, self.channel, self.k).value / float(N) ** (2 * self.k)

    def __call__(self, x):
        f = self.value(x)
        grad = np.empty_like(x)
        for n in range(x.shape[0]):
            h = self.h * max(x[n], 1e-3)
            up = x.copy()
            up[n] += h
            if x[n] - h >= 0.0:
                dn = x.copy()
                dn[n] -= h
                grad[n] = (self.value(up) - self.value(dn)) / (2.0 * h)
            else:
                grad[n] = (self.value(up) - f) / h
        return f, grad


def _spg_trial(objective, x, f, g, t):
    """Projected-gradient trial point with a monotone Armijo backtrack."""
    d = project_simplex(x + t * g) - x
    slope = float(g @ d)
    if slope <= 0.0 or not np.any(d):
        return None
    alpha = 1.0
    while True:
        y = x + alpha * d
        fy, gy = objective(y)
        if fy >= f + 1e-4 * alpha * slope or alpha < 1e-12:
            return y, fy, gy
        alpha *= 0.5


def _newton_trial(objective, hessian, x, f, g, eps):
    """Projected Newton step on the face of the simplex that is not eps-active.

    Coordinates within ``eps`` of zero whose gradient is below the multiplier
    ``f`` (by homogeneity the sum-constraint multiplier equals the value) are
    sent to zero; the rest solve the equality-constrained Newton system.
    """
    active = (x <= eps) & (g < f)
    idx = np.nonzero(~active)[0]
    m = idx.shape[0]
    Hf = hessian(x)[np.ix_(idx, idx)]
    reg = 1e-12 * max(float(np.abs(np.diag(Hf)).max()), 1e-300)
    K = np.zeros((m + 1, m + 1))
    K[:m, :m] = reg * np.eye(m) - Hf
    K[:m, m] = 1.0
    K[m, :m] = 1.0
    rhs = np.concatenate([g[idx], [float(x[active].sum())]])
    sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
    d = -x.copy()
    d[idx] = sol[:m]
    alpha = 1.0
    while alpha > 1e-6:
        y = project_simplex(x + alpha * d)
        fy, gy = objective(y)
        if fy > f:
            return y, fy, gy
        alpha *= 0.5
    return None


def _ascend(objective, x0, config, hessian=None):
    """Monotone ascent on the simplex.

    Every iteration takes a spectral projected-gradient trial (Barzilai-Borwein
    step, Armijo backtracking); when a Hessian is available a projected Newton
    trial is also formed and the better of the two is kept.  Stops when the
    relative objective change, or the Frank-Wolfe gap ``max(g) - f`` for the
    homogeneous bound, falls below ``rel_tolerance``.
    """
    x = x0.copy()
    f, g = objective(x)
    t = 1.0
    tol = config.rel_tolerance
    converged = False
    it = 0
    for it in range(1, config.max_iterations + 1):
        if hessian is not None and float(g.max()) - f <= tol * max(f, 1e-300):
            converged = True
            break
        cands = []
        spg = _spg_trial(objective, x, f, g, t)
        if spg is None:
            # projected gradient step is a fixed point: stationary on the simplex
            converged = True
            break
        cands.append(spg)
        if hessian is not None:
            eps = min(1e-6, float(np.abs(project_simplex(x + g) - x).sum()))
            nt = _newton_trial(objective, hessian, x, f, g, eps)
            if nt is not None:
                cands.append(nt)
        y, fy, gy = max(cands, key=lambda c: c[1])
        # the objective is degree-one homogeneous: keep the iterate on sum(x) = 1
        scale = math.fsum(y)
        y, fy = y / scale, fy / scale
        if not fy > f:
            converged = True
            break
        s_vec, y_vec = y - x, gy - g
        prev = f
        x, f, g = y, fy, gy
        curv = -float(s_vec @ y_vec)
        t = min(max(float(s_vec @ s_vec) / curv, 1e-10), 1e10) if curv > 0 else 1e10
        if abs(f - prev) <= tol * max(abs(f), 1e-300):
            converged = True
            break
    return x, f, converged, it


def optimize_probe(N: int, k: int, channel: LossChannel, config: OptimizerConfig | None = None) -> ProbeOptimum:
    """Best real non-negative probe for ``(N, k, channel)`` over several starts.

    Starts: N00N, binomial, uniform, then seeded uniform-on-sphere draws.
    The best start wins; ties go to the lowest start index.
    """
    config = config or OptimizerConfig()
    if isinstance(N, bool) or int(N) != N or N < 1:
        raise DomainError(f"N must be a positive integer, got {N!r}")
    if config.objective == "exact":
        if N > EXACT_OBJECTIVE_CAP:
            raise CapacityError(f"exact objective limited to N <= {EXACT_OBJECTIVE_CAP}")
        objective = _ExactObjective(channel, k, config.fd_step)
        hessian = None
    else:
        objective = _BoundObjective(channel, k)
        hessian = _bound_hessian(channel, k)
    best = None
    values = []
    for i, x0 in enumerate(_starting_points(N, config)):
        x, f, ok, it = _ascend(objective, x0, config, hessian)
        values.append(f)
        if best is None or f > best[1]:
            best = (x, f, ok, it, i)
    x, f, ok, it, idx = best
    state = TwoModeState.from_amplitudes(np.sqrt(x), normalize=True)
    # report the objective recomputed on the returned (renormalized) state
    if config.objective == "exact":
        estimate = qfi_exact(state, channel, k)
    else:
        estimate = qfi_upper_bound(state, channel, k)
    estimate = QfiEstimate(
        estimate.value,
        estimate.method,
        k,
        _eta_label(channel),
        {"objective": config.objective, "converged": ok, "seed": config.seed},
    )
    scale = float(N) ** (2 * k)
    return ProbeOptimum(state, estimate, ok, it, idx, [v * scale for v in values])


@dataclass
class OrderingReport:
    N: int
    k: int
    delta_phi: dict
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations


def figure_ordering_check(
    N: int,
    k: int,
    channel: LossChannel,
    Lambda_list,
    config: OptimizerConfig | None = None,
    tol: float = 1e-9,
) -> OrderingReport:
    """Bound-method ``delta_phi_min`` for OS, SJJ(Lambda), N00N and binomial probes.

    Flags any probe whose Fisher information beats the optimised state by more
    than ``tol`` (relative).
    """
    config = config or OptimizerConfig()
    opt = optimize_probe(N, k, channel, config)
    fisher = {"os": opt.estimate.value}
    fisher["noon"] = qfi_upper_bound(noon_state(N), channel, k).value
    fisher["binomial"] = qfi_upper_bound(binomial_state(N), channel, k).value
    for L in Lambda_list:
        st, _ = ground_state(build_hamiltonian(SjjParams(N, float(L))))
        fisher[f"sjj:{float(L):g}"] = qfi_upper_bound(st, channel, k).value
    violations = [
        label for label, F in fisher.items() if label != "os" and F > fisher["os"] * (1.0 + tol)
    ]
    dphi = {label: (1.0 / math.sqrt(F) if F > 0 else math.inf) for label, F in fisher.items()}
    return OrderingReport(N, k, dphi, violations)
