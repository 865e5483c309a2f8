import numpy as np
import pytest

from sjj_metrology import (
    CapacityError,
    DomainError,
    LossChannel,
    OptimizerConfig,
    TwoModeState,
    binomial_state,
    figure_ordering_check,
    noon_state,
    optimize_probe,
    qfi_upper_bound,
)
from sjj_metrology.optimizer import project_simplex


def test_projection():
    v = np.array([0.5, 2.0, -1.0, 0.1])
    p = project_simplex(v)
    assert p.sum() == pytest.approx(1.0)
    assert np.all(p >= 0)
    assert np.allclose(project_simplex(np.array([0.2, 0.3, 0.5])), [0.2, 0.3, 0.5])


def test_lossless_recovers_noon():
    opt = optimize_probe(10, 1, LossChannel.symmetric(1.0), OptimizerConfig())
    assert opt.estimate.value == pytest.approx(100.0, rel=1e-6)
    p = opt.state.populations
    assert p[0] == pytest.approx(0.5, abs=1e-6)
    assert p[-1] == pytest.approx(0.5, abs=1e-6)
    assert opt.converged


def test_single_particle_grid_scan():
    # N = 1: the objective depends on one population; scan it
    ch = LossChannel(0.6, 0.8)
    opt = optimize_probe(1, 1, ch, OptimizerConfig(starts=4))
    grid = np.linspace(0, 1, 20001)
    best = max(qfi_upper_bound(TwoModeState.from_amplitudes(np.sqrt([1 - t, t])), ch, 1).value for t in grid)
    assert opt.estimate.value >= best - 1e-9
    assert opt.estimate.value == pytest.approx(best, rel=1e-6)


@pytest.mark.parametrize("eta", [0.3, 0.6, 0.9])
def test_dominates_reference_probes(eta):
    ch = LossChannel.symmetric(eta)
    opt = optimize_probe(20, 1, ch, OptimizerConfig())
    for probe in (noon_state(20), binomial_state(20)):
        assert opt.estimate.value >= qfi_upper_bound(probe, ch, 1).value - 1e-9
    assert opt.estimate.metadata["objective"] == "bound"


def test_starts_agree_at_small_n():
    opt = optimize_probe(20, 1, LossChannel.symmetric(0.7), OptimizerConfig())
    v = np.array(opt.start_values)
    assert (v.max() - v.min()) / v.max() < 1e-6


def test_deterministic():
    cfg = OptimizerConfig(starts=6, seed=42)
    a = optimize_probe(15, 2, LossChannel.symmetric(0.8), cfg)
    b = optimize_probe(15, 2, LossChannel.symmetric(0.8), cfg)
    assert a.estimate.value == b.estimate.value
    assert np.array_equal(a.state.amplitudes, b.state.amplitudes)


def test_optimum_monotone_in_eta():
    values = [optimize_probe(12, 1, LossChannel.symmetric(eta), OptimizerConfig(starts=4)).estimate.value for eta in (0.4, 0.6, 0.8, 1.0)]
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_exact_objective_small():
    ch = LossChannel.symmetric(0.7)
    cfg = OptimizerConfig(starts=3, objective="exact", max_iterations=200, rel_tolerance=1e-7)
    opt = optimize_probe(4, 1, ch, cfg)
    bound_opt = optimize_probe(4, 1, ch, OptimizerConfig(starts=3))
    assert opt.estimate.value <= bound_opt.estimate.value * (1 + 1e-9)
    assert opt.estimate.metadata["objective"] == "exact"


def test_exact_objective_cap():
    with pytest.raises(CapacityError):
        optimize_probe(41, 1, LossChannel.symmetric(0.9), OptimizerConfig(objective="exact"))


@pytest.mark.parametrize("kwargs", [{"starts": 0}, {"rel_tolerance": 0.0}, {"objective": "fast"}, {"max_iterations": 0}])
def test_config_validation(kwargs):
    with pytest.raises(DomainError):
        OptimizerConfig(**kwargs)


def test_iteration_cap_flags_nonconvergence():
    opt = optimize_probe(30, 3, LossChannel.symmetric(0.8), OptimizerConfig(starts=2, max_iterations=1))
    assert not opt.converged
    assert opt.estimate.metadata["converged"] is False


def test_ordering_report():
    rep = figure_ordering_check(20, 1, LossChannel.symmetric(0.9), [1.0, 2.1], OptimizerConfig(starts=4))
    assert rep.ok, rep.violations
    assert rep.delta_phi["os"] <= min(rep.delta_phi.values()) + 1e-12


def test_start_values_never_exceed_true_maximum():
    # long projected steps once let the iterate drift off sum(x) = 1, which
    # inflates the homogeneous objective above its true maximum
    opt = optimize_probe(20, 1, LossChannel.symmetric(1.0), OptimizerConfig())
    assert max(opt.start_values) <= 400.0 * (1 + 1e-12)
    assert opt.estimate.value == pytest.approx(400.0, rel=1e-12)
