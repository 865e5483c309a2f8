"""Hot loops: upper-bound QFI sums and the tridiagonal ground-state solver.

Each kernel exists twice: a numba-jitted loop nest (``*_jit``) and a
vectorised numpy/scipy version (``*_np``).  The public names dispatch on
``_accel.NUMBA_ENABLED``; tests compare the two paths against each other.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import eigh_tridiagonal, eigvalsh_tridiagonal

from . import _accel
from ._accel import njit

_EPS = np.finfo(np.float64).eps


# ---------------------------------------------------------------------------
# compensated summation


@njit
def kahan_sum_jit(values):
    total = 0.0
    comp = 0.0
    for v in values:
        y = v - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def kahan_sum_np(values):
    return math.fsum(np.asarray(values, dtype=np.float64).ravel())


# ---------------------------------------------------------------------------
# upper bound:  4 * sum_branches sum_n B x_n (g_n - mu_branch)^2
#
# x[n]   = |A_n|^2
# pa[j,l]= loss pmf of arm a holding j particles, pb likewise for arm b
# g[n]   = generator eigenvalue, already scaled (n/N)^k


@njit
def bound_kernel_jit(x, pa, pb, g, want_grad):
    N = x.shape[0] - 1
    grad = np.zeros(N + 1)
    total = 0.0
    comp = 0.0
    for lb in range(N + 1):
        for la in range(N - lb + 1):
            s0 = 0.0
            s1 = 0.0
            for n in range(lb, N - la + 1):
                w = x[n] * pa[N - n, la] * pb[n, lb]
                s0 += w
                s1 += w * g[n]
            if s0 <= 0.0:
                continue
            mu = s1 / s0
            v = 0.0
            for n in range(lb, N - la + 1):
                b = pa[N - n, la] * pb[n, lb]
                d = g[n] - mu
                v += x[n] * b * d * d
                if want_grad:
                    grad[n] += b * d * d
            y = v - comp
            t = total + y
            comp = (t - total) - y
            total = t
    return 4.0 * total, 4.0 * grad


def bound_kernel_np(x, pa, pb, g, want_grad):
    N = x.shape[0] - 1
    n = np.arange(N + 1)
    pa_rev = pa[N - n]  # pa_rev[n, la] = pa[N-n, la]
    grad = np.zeros(N + 1)
    parts = []
    for lb in range(N + 1):
        B = pa_rev[:, : N - lb + 1] * pb[:, lb][:, None]
        W = x[:, None] * B
        s0 = W.sum(axis=0)
        s1 = g @ W
        ok = s0 > 0.0
        mu = np.zeros_like(s0)
        mu[ok] = s1[ok] / s0[ok]
        D2 = (g[:, None] - mu[None, :]) ** 2
        D2[:, ~ok] = 0.0
        parts.append(float(np.sum(W * D2)))
        if want_grad:
            grad += np.sum(B * D2, axis=1)
    return 4.0 * math.fsum(parts), 4.0 * grad


def bound_kernel(x, pa, pb, g, want_grad=False):
    """Scaled upper-bound QFI (and optionally its gradient in ``x``)."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    g = np.ascontiguousarray(g, dtype=np.float64)
    if _accel.NUMBA_ENABLED:
        return bound_kernel_jit(x, pa, pb, g, want_grad)
    return bound_kernel_np(x, pa, pb, g, want_grad)


@njit
def bound_hessian_jit(x, pa, pb, g):
    N = x.shape[0] - 1
    H = np.zeros((N + 1, N + 1))
    w = np.empty(N + 1)
    for lb in range(N + 1):
        for la in range(N - lb + 1):
            s0 = 0.0
            s1 = 0.0
            for n in range(lb, N - la + 1):
                b = x[n] * pa[N - n, la] * pb[n, lb]
                s0 += b
                s1 += b * g[n]
            if s0 <= 0.0:
                continue
            mu = s1 / s0
            for n in range(lb, N - la + 1):
                w[n] = pa[N - n, la] * pb[n, lb] * (g[n] - mu)
            c = 8.0 / s0
            for i in range(lb, N - la + 1):
                wi = c * w[i]
                for j in range(lb, N - la + 1):
                    H[i, j] -= wi * w[j]
    return H


def bound_hessian_np(x, pa, pb, g):
    N = x.shape[0] - 1
    n = np.arange(N + 1)
    pa_rev = pa[N - n]
    H = np.zeros((N + 1, N + 1))
    for lb in range(N + 1):
        B = pa_rev[:, : N - lb + 1] * pb[:, lb][:, None]
        s0 = x @ B
        ok = s0 > 0.0
        if not np.any(ok):
            continue
        mu = (g * x) @ B[:, ok] / s0[ok]
        Wd = B[:, ok] * (g[:, None] - mu[None, :])
        H -= (Wd / s0[ok]) @ Wd.T
    return 8.0 * H


def bound_hessian(x, pa, pb, g):
    """Hessian of the scaled bound in ``x``: ``-8 sum_b w_b w_b^T / S0_b``."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    g = np.ascontiguousarray(g, dtype=np.float64)
    if _accel.NUMBA_ENABLED:
        return bound_hessian_jit(x, pa, pb, g)
    return bound_hessian_np(x, pa, pb, g)


# ---------------------------------------------------------------------------
# lowest eigenpair of a symmetric tridiagonal matrix


@njit
def _sturm_count(d, e2, x, pivmin):
    count = 0
    q = d[0] - x
    if abs(q) < pivmin:
        q = -pivmin
    if q < 0.0:
        count += 1
    for i in range(1, d.shape[0]):
        q = d[i] - x - e2[i - 1] / q
        if abs(q) < pivmin:
            q = -pivmin
        if q < 0.0:
            count += 1
    return count


@njit
def lowest_eigenvalue_jit(d, e):
    """Bisection on the Sturm count; returns ``(lo, hi)`` bracketing the minimum."""
    n = d.shape[0]
    if n == 1:
        return d[0], d[0]
    e2 = e * e
    lo = d[0] - abs(e[0])
    hi = d[0] + abs(e[0])
    for i in range(1, n):
        r = abs(e[i - 1])
        if i < n - 1:
            r += abs(e[i])
        lo = min(lo, d[i] - r)
        hi = max(hi, d[i] + r)
    scale = max(abs(lo), abs(hi), 1e-300)
    pivmin = 1e-300 * max(1.0, e2.max())
    lo -= 2.0 * _EPS * scale
    hi += 2.0 * _EPS * scale
    for _ in range(400):
        if hi - lo <= 2.0 * _EPS * max(abs(lo), abs(hi)) + 1e-300:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _sturm_count(d, e2, mid, pivmin) >= 1:
            hi = mid
        else:
            lo = mid
    return lo, hi


@njit
def lowest_eigenpair_jit(d, e, max_iter, tol):
    """Bisection followed by inverse iteration with the shift just below the minimum.

    With the shift at the lower end of the bracket, ``T - shift`` is positive
    semidefinite, so an unpivoted LDL^T factorisation is stable.
    Returns ``(energy, vector, iterations, converged)``.
    """
    n = d.shape[0]
    lo, hi = lowest_eigenvalue_jit(d, e)
    v = np.ones(n) / math.sqrt(n)
    if n == 1:
        return d[0], v, 0, True
    scale = max(np.abs(d).max(), np.abs(e).max(), 1e-300)
    tiny = _EPS * scale * 1e-3
    shift = lo
    diag = np.empty(n)
    lower = np.empty(n - 1)
    diag[0] = d[0] - shift
    if diag[0] < tiny:
        diag[0] = tiny
    for i in range(n - 1):
        lower[i] = e[i] / diag[i]
        diag[i + 1] = d[i + 1] - shift - lower[i] * e[i]
        if diag[i + 1] < tiny:
            diag[i + 1] = tiny
    converged = False
    it = 0
    y = np.empty(n)
    for it in range(1, max_iter + 1):
        # L z = v
        y[0] = v[0]
        for i in range(1, n):
            y[i] = v[i] - lower[i - 1] * y[i - 1]
        # D w = z
        for i in range(n):
            y[i] = y[i] / diag[i]
        # L^T y = w
        for i in range(n - 2, -1, -1):
            y[i] = y[i] - lower[i] * y[i + 1]
        norm = math.sqrt(np.sum(y * y))
        y = y / norm
        # fix orientation before comparing iterates
        imax = np.argmax(np.abs(y))
        if y[imax] < 0.0:
            y = -y
        delta = np.abs(y - v).max()
        v = y.copy()
        if delta <= tol:
            converged = True
            break
    # Rayleigh quotient
    hv = d * v
    hv[:-1] += e * v[1:]
    hv[1:] += e * v[:-1]
    energy = np.sum(v * hv)
    return energy, v, it, converged


def lowest_eigenpair_np(d, e, max_iter, tol):
    w, vecs = eigh_tridiagonal(d, e, select="i", select_range=(0, 0))
    v = vecs[:, 0]
    if v[np.argmax(np.abs(v))] < 0.0:
        v = -v
    hv = d * v
    hv[:-1] += e * v[1:]
    hv[1:] += e * v[:-1]
    return float(v @ hv), v, 1, True


def lowest_eigenpair(d, e, max_iter=100, tol=1e-14):
    d = np.ascontiguousarray(d, dtype=np.float64)
    e = np.ascontiguousarray(e, dtype=np.float64)
    if _accel.NUMBA_ENABLED:
        energy, v, it, ok = lowest_eigenpair_jit(d, e, max_iter, tol)
        return float(energy), v, int(it), bool(ok)
    return lowest_eigenpair_np(d, e, max_iter, tol)


def lowest_eigenvalue(d, e):
    d = np.ascontiguousarray(d, dtype=np.float64)
    e = np.ascontiguousarray(e, dtype=np.float64)
    if d.shape[0] == 0:
        return math.inf
    if _accel.NUMBA_ENABLED:
        lo, hi = lowest_eigenvalue_jit(d, e)
        return 0.5 * (lo + hi)
    if d.shape[0] == 1:
        return float(d[0])
    return float(eigvalsh_tridiagonal(d, e, select="i", select_range=(0, 0))[0])
