import json
import math

import numpy as np
import pytest

from sjj_metrology import (
    DomainError,
    NumericalError,
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


def dense_ground(H):
    w, v = np.linalg.eigh(H.dense())
    return w[0], w[1], v[:, 0]


def test_small_case_by_hand():
    H = build_hamiltonian(SjjParams(2, 0.0))
    # alpha = 0 at Lambda = 0; beta_0 = beta_1 = -(0.79 * sqrt(2)) / 4
    assert np.allclose(H.alpha, 0.0)
    assert np.allclose(H.beta, -0.79 * math.sqrt(2) / 4, rtol=1e-15)
    state, energy = ground_state(H)
    assert energy == pytest.approx(-0.395, abs=1e-14)
    assert np.allclose(state.amplitudes.real, [0.5, math.sqrt(0.5), 0.5], atol=1e-14)


def test_coefficients_match_formula():
    N, L = 7, 1.3
    H = build_hamiltonian(SjjParams(N, L))
    for n in range(N + 1):
        assert H.alpha[n] == pytest.approx(-L / 2 * (2 * n / N - 1) ** 2, rel=1e-15, abs=1e-16)
    for n in range(N):
        c0 = 1 - 0.21 * (2 * n / N - 1) ** 2
        c1 = 1 - 0.21 * (2 * (n + 1) / N - 1) ** 2
        want = -(c0 * (n + 1) * math.sqrt((N - n) * (N - n - 1)) + c1 * (N - n) * math.sqrt(n * (n + 1))) / N**2
        assert H.beta[n] == pytest.approx(want, rel=1e-14)


@pytest.mark.parametrize("N", [2, 3, 10, 31, 60])
@pytest.mark.parametrize("L", [0.0, 0.7, 1.5, 2.0, 2.5])
def test_agrees_with_dense_solver(N, L):
    H = build_hamiltonian(SjjParams(N, L))
    e0, e1, v = dense_ground(H)
    sol = solve_ground(H)
    assert sol.energy == pytest.approx(e0, abs=1e-12 * H.norm())
    assert sol.residual <= 1e-10 * H.norm()
    if e1 - e0 > 1e-8:
        # the eigenvector is only defined up to rotation inside a degenerate pair
        overlap = abs(np.vdot(v, sol.state.amplitudes.real))
        assert overlap == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("N", [20, 41, 100])
def test_mirror_symmetric_and_positive(N):
    for L in (0.5, 2.0, 3.0):
        state, _ = ground_state(build_hamiltonian(SjjParams(N, L)))
        A = state.amplitudes.real
        assert np.allclose(A, A[::-1], atol=1e-12)
        assert np.all(A >= -1e-15)
        assert np.allclose(state.amplitudes.imag, 0.0)
        assert math.fsum(state.populations) == pytest.approx(1.0, abs=1e-12)


def test_deep_cat_is_not_lopsided():
    # even and odd states are degenerate to machine precision here
    sol = solve_ground(build_hamiltonian(SjjParams(100, 3.0)))
    assert abs(sol.parity_gap) < 1e-12
    assert sol.degenerate
    p = sol.state.populations
    assert p[0] == pytest.approx(p[-1], rel=1e-12)


def test_catness_monotone_in_lambda():
    cats = [catness(ground_state(build_hamiltonian(SjjParams(40, L)))[0]) for L in np.linspace(0, 3, 31)]
    assert all(b >= a - 1e-12 for a, b in zip(cats, cats[1:]))
    assert cats[-1] > 0.9


def test_catness_grows_through_crossover():
    c2 = catness(ground_state(build_hamiltonian(SjjParams(100, 2.0)))[0])
    c21 = catness(ground_state(build_hamiltonian(SjjParams(100, 2.1)))[0])
    assert c21 > c2


def test_crossover_is_located():
    Lc = locate_crossover(100)
    assert 1.8 < Lc < 2.3
    below = catness(ground_state(build_hamiltonian(SjjParams(100, Lc - 1e-6)))[0])
    above = catness(ground_state(build_hamiltonian(SjjParams(100, Lc + 1e-6)))[0])
    assert above - below > 0.1


def test_general_tridiagonal_falls_back_to_plain_solve():
    H = TridiagonalHamiltonian(4, np.array([1.0, -2.0, 0.5, 3.0, 0.0]), np.array([-0.3, -0.1, -0.7, -0.2]))
    e0, _, v = dense_ground(H)
    sol = solve_ground(H)
    assert sol.energy == pytest.approx(e0, abs=1e-13)
    assert abs(np.vdot(v, sol.state.amplitudes.real)) == pytest.approx(1.0, abs=1e-12)


def test_nonconvergence_reports_diagnostics():
    H = build_hamiltonian(SjjParams(50, 1.0))
    with pytest.raises(NumericalError) as info:
        solve_ground(H, max_iter=1, tol=0.0)
    assert "residual" in info.value.diagnostics


@pytest.mark.parametrize("N,L", [(1, 1.0), (10, -0.1), (10, float("nan")), (10, float("inf"))])
def test_invalid_parameters(N, L):
    with pytest.raises(DomainError):
        build_hamiltonian(SjjParams(N, L))


def test_state_validation():
    with pytest.raises(DomainError):
        TwoModeState(2, np.array([1.0, 1.0, 0.0]))
    with pytest.raises(DomainError):
        TwoModeState(2, np.array([1.0, 0.0]))
    with pytest.raises(DomainError):
        TwoModeState.from_amplitudes(np.zeros(3))


def test_state_json_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    z = rng.standard_normal(9) + 1j * rng.standard_normal(9)
    state = TwoModeState.from_amplitudes(z)
    path = tmp_path / "s.json"
    state.save(path)
    back = TwoModeState.load(path)
    assert back.N == state.N
    assert np.allclose(back.amplitudes, state.amplitudes, rtol=0, atol=1e-15)
    doc = json.loads(path.read_text())
    assert set(doc) == {"N", "amplitudes_re", "amplitudes_im"}


def test_reference_probes():
    noon = noon_state(6)
    assert np.allclose(noon.populations, [0.5, 0, 0, 0, 0, 0, 0.5])
    b = binomial_state(10)
    want = np.array([math.comb(10, n) for n in range(11)]) / 2**10
    assert np.allclose(b.populations, want, rtol=1e-13)


def test_soliton_check_values():
    assert soliton_hamilton(1.0, 10) == pytest.approx(-1000 / 24)
    assert soliton_phase_parameter(2.0) == pytest.approx(-4 / 24)
