import math

import pytest

from sjj_metrology import (
    DomainError,
    LossChannel,
    binomial_state,
    critical_time,
    eta_critical,
    ideal_limit,
    interferometric_limits,
    n_min,
    noon_limits,
    noon_state,
    qfi_upper_bound,
    variance_delta_phi,
)
from sjj_metrology.limits import limits_table


def test_n_min_values():
    assert round(n_min(1, 0.9)) == 19
    assert round(n_min(3, 0.9)) == 57
    assert n_min(2, 0.5) == pytest.approx(4 / math.log(2))


def test_eta_critical_and_time():
    assert eta_critical(57, 3) == pytest.approx(0.9, abs=1e-3)
    assert critical_time(3, 0.1, 5000) == pytest.approx(0.012, rel=1e-15)
    assert critical_time(3, 0.01, 5000) == pytest.approx(0.120, rel=1e-15)


def test_noon_limits_match_qfi():
    for N, k, eta in [(20, 1, 0.9), (15, 3, 0.7)]:
        F, dphi = noon_limits(N, k, eta)
        assert F == pytest.approx(qfi_upper_bound(noon_state(N), LossChannel.symmetric(eta), k).value, rel=1e-12)
        assert dphi == pytest.approx(F**-0.5, rel=1e-14)


def test_noon_limits_large_n_do_not_overflow():
    F, dphi = noon_limits(5000, 3, 0.999)
    assert math.isfinite(F) and F > 0 and dphi > 0


def test_ideal_and_interferometric():
    assert ideal_limit(10, 3) == pytest.approx(1e-3)
    il = interferometric_limits(100, 1, 0.95)
    assert il.sil == pytest.approx(1 / math.sqrt(95))
    assert il.scaled == pytest.approx(il.sil)
    il3 = interferometric_limits(100, 3, 0.95)
    assert il3.scaled == pytest.approx(1 / math.sqrt(0.95 * 100**5))


def test_variance_formula():
    # eta = 1 gives Heisenberg 1/N
    assert variance_delta_phi(50, 1.0) == pytest.approx(1 / 50)
    assert variance_delta_phi(50, 0.5) == pytest.approx((50 * (1 + 0.5 * 24)) ** -0.5)


def test_binomial_bound_has_sil_slope():
    # the slope check in the acceptance suite at small scale
    ch = LossChannel.symmetric(0.9)
    F20 = qfi_upper_bound(binomial_state(20), ch, 1).value
    F80 = qfi_upper_bound(binomial_state(80), ch, 1).value
    slope = -0.5 * math.log(F80 / F20) / math.log(4)
    assert slope == pytest.approx(-0.5, abs=0.03)


@pytest.mark.parametrize("call", [lambda: n_min(1, 1.0), lambda: n_min(1, 0.0), lambda: eta_critical(0, 1),
                                  lambda: critical_time(1, 0.0, 10), lambda: noon_limits(10, 0, 0.5),
                                  lambda: interferometric_limits(10, 1, 1.5)])
def test_domain_errors(call):
    with pytest.raises(DomainError):
        call()


def test_table():
    t = limits_table(57, 3, 0.9, gamma=0.1)
    assert t["n_min_round"] == 57
    assert t["critical_time_s"] == pytest.approx(6 / 5.7)
    assert "n_min" not in limits_table(10, 1, 1.0)
