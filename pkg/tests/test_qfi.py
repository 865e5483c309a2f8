import math

import numpy as np
import pytest

from oracles import direct_bound, eigen_formula_qfi, random_probe, reduced_density
from sjj_metrology import (
    CapacityError,
    LossChannel,
    Method,
    SjjParams,
    TwoModeState,
    binomial_state,
    build_hamiltonian,
    crossover_discrepancy,
    ground_state,
    noon_state,
    pure_qfi,
    qfi_exact,
    qfi_upper_bound,
)
from sjj_metrology.qfi import bound_value_and_gradient, bound_value_hessian, delta_phi_from_fisher


@pytest.mark.parametrize("N", [1, 3, 8, 20])
@pytest.mark.parametrize("channel", [LossChannel.symmetric(0.5), LossChannel(0.9, 0.3), LossChannel.symmetric(1.0)])
@pytest.mark.parametrize("k", [1, 3])
def test_bound_matches_direct_sum(N, channel, k):
    A = random_probe(np.random.default_rng(N + 10 * k), N)
    got = qfi_upper_bound(TwoModeState.from_amplitudes(A), channel, k).value
    assert got == pytest.approx(direct_bound(A, channel.eta_a, channel.eta_b, k), rel=1e-11)


@pytest.mark.parametrize("N", [2, 3, 4])
def test_exact_matches_eigen_formula(N):
    rng = np.random.default_rng(100 + N)
    for eta, k in [(0.3, 1), (0.9, 2), (0.7, 3)]:
        A = random_probe(rng, N)
        phi = 0.8
        rho, drho = reduced_density(A, eta, eta, k, phi)
        want = eigen_formula_qfi(rho, drho)
        got = qfi_exact(TwoModeState.from_amplitudes(A), LossChannel.symmetric(eta), k, phi).value
        assert got == pytest.approx(want, rel=1e-8)


@pytest.mark.parametrize("N", [5, 20, 30])
@pytest.mark.parametrize("k", [1, 3])
@pytest.mark.parametrize("eta", [0.5, 0.9, 1.0])
def test_noon_closed_form(N, k, eta):
    want = N ** (2 * k) * eta**N
    state = noon_state(N)
    ch = LossChannel.symmetric(eta)
    assert qfi_upper_bound(state, ch, k).value == pytest.approx(want, rel=1e-9)
    assert qfi_exact(state, ch, k).value == pytest.approx(want, rel=1e-9)


def test_pure_qfi_is_bound_without_loss():
    state = binomial_state(30)
    for k in (1, 2, 3):
        assert pure_qfi(state, k).value == pytest.approx(qfi_upper_bound(state, LossChannel.symmetric(1.0), k).value, rel=1e-12)
    # 4 Var(n) of a binomial with p = 1/2
    assert pure_qfi(state, 1).value == pytest.approx(30.0, rel=1e-12)


def test_exact_never_exceeds_bound():
    rng = np.random.default_rng(5)
    for N in (3, 7, 12):
        for eta in (0.3, 0.8):
            for k in (1, 2):
                st = TwoModeState.from_amplitudes(random_probe(rng, N))
                ch = LossChannel(eta, 1.0 - 0.5 * (1.0 - eta))
                assert qfi_exact(st, ch, k, 0.4).value <= qfi_upper_bound(st, ch, k).value * (1 + 1e-12)


def test_global_phase_invariance():
    A = random_probe(np.random.default_rng(6), 9)
    ch = LossChannel.symmetric(0.6)
    s1 = TwoModeState.from_amplitudes(A)
    s2 = TwoModeState.from_amplitudes(A * np.exp(1j * 2.1))
    assert qfi_exact(s1, ch, 2, 0.3).value == pytest.approx(qfi_exact(s2, ch, 2, 0.3).value, rel=1e-10)
    assert qfi_upper_bound(s1, ch, 2).value == qfi_upper_bound(s2, ch, 2).value


def test_k1_phi_independent():
    st = TwoModeState.from_amplitudes(random_probe(np.random.default_rng(8), 10))
    ch = LossChannel(0.7, 0.5)
    values = [qfi_exact(st, ch, 1, phi).value for phi in (0.0, 0.3, 1.7, -2.5)]
    assert max(values) - min(values) <= 1e-10 * max(values)


def test_exact_capacity():
    with pytest.raises(CapacityError):
        qfi_exact(noon_state(12), LossChannel.symmetric(0.9), 1, cap=10)


def test_gradient_and_hessian():
    rng = np.random.default_rng(9)
    x = rng.random(15)
    x /= x.sum()
    ch = LossChannel(0.8, 0.6)
    f, g = bound_value_and_gradient(x, ch, 2)
    assert float(x @ g) == pytest.approx(f, rel=1e-12)  # degree-one homogeneity
    h = 1e-7
    for n in (0, 7, 14):
        e = np.zeros_like(x)
        e[n] = h
        fd = (bound_value_and_gradient(x + e, ch, 2, False)[0] - bound_value_and_gradient(x - e, ch, 2, False)[0]) / (2 * h)
        assert g[n] == pytest.approx(fd, rel=1e-6)
    H = bound_value_hessian(x, ch, 2)
    assert np.allclose(H, H.T, atol=1e-14)
    assert np.abs(H @ x).max() < 1e-12
    assert np.linalg.eigvalsh(H).max() < 1e-12  # concave


def test_crossover_rows_and_gap():
    rows = crossover_discrepancy(30, [0.5, 2.0], LossChannel.symmetric(0.9), 1)
    for r in rows:
        assert 0.0 <= r.relative_gap < 0.2
        assert r.exact <= r.bound


def test_estimate_metadata():
    est = qfi_upper_bound(noon_state(10), LossChannel.symmetric(1.0), 1)
    assert est.method is Method.BOUND
    assert est.delta_phi_min == pytest.approx(0.1)
    assert delta_phi_from_fisher(0.0) == math.inf


def test_sjj_state_bound_and_exact_close_in_normal_regime():
    st, _ = ground_state(build_hamiltonian(SjjParams(40, 1.0)))
    ch = LossChannel.symmetric(0.95)
    ex = qfi_exact(st, ch, 1).value
    bd = qfi_upper_bound(st, ch, 1).value
    assert 0 <= (bd - ex) / bd < 5e-3
