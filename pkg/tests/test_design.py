import logging
import math

import mpmath
import numpy as np
import pytest

from grouptest.design import (
    DesignSpec,
    Strategy,
    delta_max,
    density_ceiling,
    design,
    design_for_alpha,
    eta,
    evaluate_point,
    gamma_rate,
    log_binom,
    pf1_bound,
    pf2_bound,
    theorem_preset,
    warn_if_dense,
)
from grouptest import design as gt_design
from grouptest.errors import GroupTestError, InfeasibleDesignError

mpmath.mp.dps = 50


def _eta_oracle(q, k, p, delta):
    q, p, delta = mpmath.mpf(q), mpmath.mpf(p), mpmath.mpf(delta)
    base = (1 - q) ** k
    return q * (base - (1 - p) * (1 + delta)) ** 2 / (2 * base)


def _pf1_oracle(q, p, delta, m, count):
    q, p, delta, m = mpmath.mpf(q), mpmath.mpf(p), mpmath.mpf(delta), mpmath.mpf(m)
    x = (1 - p) * q * m * ((1 + delta) * mpmath.log(1 + delta) - delta)
    return 1 - (1 - mpmath.exp(-x)) ** count


def _coarse(**kwargs) -> DesignSpec:
    values = dict(alpha_step=0.01, delta_step=0.001)
    values.update(kwargs)
    return DesignSpec(**values)


def test_eta_noiseless_closed_form():
    q, k = 0.05, 10
    assert eta(q, k, 1.0, 0.0) == pytest.approx(q * (1 - q) ** k / 2, rel=1e-14)


def test_eta_against_high_precision():
    assert eta(0.044, 10, 0.8, 0.2) == pytest.approx(float(_eta_oracle(0.044, 10, 0.8, 0.2)), rel=1e-12)


def test_eta_vanishes_at_delta_max():
    dmax = delta_max(0.044, 10, 0.8)
    assert eta(0.044, 10, 0.8, dmax * (1 - 1e-9)) < 1e-15
    with pytest.raises(InfeasibleDesignError):
        eta(0.044, 10, 0.8, dmax)


def test_delta_max_values():
    assert delta_max(0.044, 10, 0.8) == pytest.approx(0.956**10 / 0.2 - 1, rel=1e-14)
    assert delta_max(1e-12, 10, 0.8) == pytest.approx(0.8 / 0.2, rel=1e-9)
    assert math.isinf(delta_max(0.3, 10, 1.0))


@pytest.mark.parametrize("delta", [0.0, 0.5, 1.5, 2.5])
def test_delta_max_keeps_mean_above_threshold(delta):
    q, k, p = 0.044, 10, 0.8
    if delta < delta_max(q, k, p):
        assert (1 + delta) * (1 - p) < (1 - q) ** k


def test_tests_required_unit_exponent():
    assert gt_design.tests_required(1.0, 2, 1, 2 / math.e, Strategy.PER_INSTANCE) == 1


def test_tests_required_per_instance_against_oracle():
    rate = eta(0.044, 10, 0.8, 0.5)
    expected = mpmath.ceil(mpmath.log(mpmath.mpf(10) ** 8) / _eta_oracle(0.044, 10, 0.8, 0.5))
    assert gt_design.tests_required(rate, 100_000, 10, 0.001, Strategy.PER_INSTANCE) == int(expected)


def test_tests_required_universal_single_item():
    rate, n, pf2 = 0.01, 1000, 0.01
    expected = math.ceil(math.log(n * n / pf2) / rate - 1e-9)
    assert gt_design.tests_required(rate, n, 1, pf2, Strategy.UNIVERSAL) == expected


def test_halving_pf2_adds_ln2_over_eta():
    rate = eta(0.044, 10, 0.8, 0.3)
    m1 = gt_design.tests_required(rate, 100_000, 10, 0.01, Strategy.PER_INSTANCE)
    m2 = gt_design.tests_required(rate, 100_000, 10, 0.005, Strategy.PER_INSTANCE)
    assert abs((m2 - m1) - math.log(2) / rate) < 1


def test_tests_required_rejects_nonpositive_rate():
    with pytest.raises(InfeasibleDesignError):
        gt_design.tests_required(0.0, 100, 2, 0.1, Strategy.PER_INSTANCE)


def test_log_binom_large_arguments():
    assert log_binom(10**8, 500) == pytest.approx(float(mpmath.log(mpmath.binomial(10**8, 500))), rel=1e-9)
    assert log_binom(10, 0) == 0.0
    with pytest.raises(GroupTestError):
        log_binom(3, 4)


def test_pf1_bound_edge_cases():
    assert pf1_bound(0.044, 0.8, 0.0, 3000, 10) == 1.0
    assert pf1_bound(0.044, 1.0, 0.3, 3000, 10) == 0.0
    with pytest.raises(GroupTestError):
        pf1_bound(0.044, 0.8, -0.1, 3000, 10)


def test_pf1_bound_against_high_precision():
    got = pf1_bound(0.044, 0.8, 2.0, 3000, 10)
    assert got == pytest.approx(float(_pf1_oracle(0.044, 0.8, 2.0, 3000, 10)), rel=1e-9)
    small = pf1_bound(0.044, 0.8, 0.5, 3000, 100_000)
    assert small == pytest.approx(float(_pf1_oracle(0.044, 0.8, 0.5, 3000, 100_000)), rel=1e-9)


@pytest.mark.parametrize("delta, m", [(0.2, 1000), (0.5, 3000), (1.0, 500), (2.0, 3000)])
def test_simplified_bound_is_looser(delta, m):
    exact = pf1_bound(0.044, 0.8, delta, m, 10, "exact")
    simplified = pf1_bound(0.044, 0.8, delta, m, 10, "simplified")
    assert simplified >= exact
    assert 0.0 <= exact <= 1.0


def test_gamma_rate_is_weaker_than_eta():
    alpha, p, delta, k = 0.3, 0.8, 0.1, 10
    assert gamma_rate(alpha, p, delta) / k <= eta(alpha / k, k, p, delta)


def test_theorem_preset():
    assert theorem_preset(0.8) == (0.1, 0.4)
    spec = DesignSpec(n=100_000, k=10, p=0.8, pf1=0.001, pf2=0.001)
    point = evaluate_point(spec, *theorem_preset(0.8))
    assert point.m == gt_design.tests_required(eta(0.01, 10, 0.8, 0.4), 100_000, 10, 0.001, Strategy.PER_INSTANCE)
    assert point.e == pytest.approx(1.4 * 0.2 * 0.01 * point.m)


def test_density_ceiling_and_warning(caplog):
    assert math.isinf(density_ceiling(100, 1000, 1))
    assert density_ceiling(3000, 100_000, 10, 0.5) == pytest.approx(math.log(4500 / math.log(100_000)) / 9)
    with caplog.at_level(logging.WARNING, logger="grouptest.design"):
        assert warn_if_dense(0.9, 50, 1000, 5)
    assert "disjunctness is unlikely" in caplog.text
    assert not warn_if_dense(0.044, 3000, 100_000, 10)


def test_noiseless_design():
    spec = _coarse(n=100_000, k=10, p=1.0, pf1=0.001, pf2=0.001)
    result = design(spec)
    assert result.feasible
    assert result.delta == 0.0
    assert result.e == 0.0
    assert result.threshold == 0
    assert result.predicted_pf1 == 0.0
    q = result.alpha / 10
    assert result.m == gt_design.tests_required(q * (1 - q) ** 10 / 2, 100_000, 10, 0.001, Strategy.PER_INSTANCE)
    # the maximizer of q (1 - q)^K sits at alpha = K / (K + 1)
    assert abs(result.alpha - 10 / 11) <= 0.1


def test_design_is_self_consistent():
    spec = _coarse(n=100_000, k=10, p=0.8, pf1=0.001, pf2=0.001)
    result = design(spec)
    assert result.feasible
    assert (1 + result.delta) * 0.2 < (1 - result.q) ** 10
    assert result.e == pytest.approx((1 + result.delta) * 0.2 * result.q * result.m)
    assert pf1_bound(result.q, 0.8, result.delta, result.m, 10) <= 0.001
    rate = eta(result.q, 10, 0.8, result.delta)
    assert pf2_bound(rate, 100_000, 10, result.m, Strategy.PER_INSTANCE) <= 0.001
    assert result.predicted_pf1 <= 0.001
    assert result.predicted_pf2 <= 0.001


def test_operating_point_is_reproduced():
    hits = []
    for target in (0.5, 0.25):
        result = design(_coarse(n=100_000, k=10, p=0.8, pf1=target, pf2=target))
        hits.append(
            result.feasible
            and abs(result.alpha - 0.44) <= 0.05
            and abs(result.e - 40) <= 5
            and abs(result.m - 3000) <= 0.15 * 3000
        )
    assert any(hits)


def test_operating_point_at_even_split():
    result = design(_coarse(n=100_000, k=10, p=0.8, pf1=0.5, pf2=0.5))
    assert result.alpha == pytest.approx(0.46)
    assert result.m == 3039
    assert result.e == pytest.approx(41.13, abs=0.05)
    assert result.threshold == 41


def test_first_delta_meeting_pf1_is_taken():
    spec = _coarse(n=100_000, k=10, p=0.8, pf1=0.01, pf2=0.01)
    diag = design_for_alpha(spec, 0.44)
    assert diag.feasible
    earlier = diag.delta - spec.delta_step
    rate = eta(0.044, 10, 0.8, earlier)
    m_real = math.log(100_000 / 0.01) / rate
    assert pf1_bound(0.044, 0.8, earlier, m_real, 10) > 0.01


def test_infeasible_grid_reports_diagnostics():
    spec = _coarse(n=1000, k=10, p=0.5, pf1=0.01, pf2=0.01, alpha_min=1.5, alpha_max=2.0)
    result = design(spec)
    assert not result.feasible
    assert result.m is None
    assert result.threshold is None
    assert len(result.diagnostics) == 51
    assert all(d.reason == "delta_max <= 0" for d in result.diagnostics)


def test_density_at_one_is_infeasible():
    spec = _coarse(n=100, k=1, p=0.9, pf1=0.1, pf2=0.1, alpha_min=1.0, alpha_max=1.0)
    assert design_for_alpha(spec, 1.0).reason == "density q >= 1"


@pytest.mark.parametrize("n", [1_000, 10_000, 100_000])
def test_universal_needs_more_tests(n):
    for p in (0.5, 0.7, 0.9):
        per = design(_coarse(n=n, k=10, p=p, pf1=0.01, pf2=0.01))
        uni = design(_coarse(n=n, k=10, p=p, pf1=0.01, pf2=0.01, strategy=Strategy.UNIVERSAL))
        assert per.feasible
        assert uni.feasible
        assert uni.m >= per.m


def test_tests_fall_as_activation_rises():
    ms = [design(_coarse(n=10_000, k=10, p=p, pf1=0.01, pf2=0.01)).m for p in (0.5, 0.6, 0.7, 0.8, 0.9, 1.0)]
    assert all(a >= b for a, b in zip(ms, ms[1:]))


def test_tests_fall_as_target_loosens():
    ms = [design(_coarse(n=10_000, k=10, p=0.8, pf1=0.01, pf2=t)).m for t in (0.001, 0.01, 0.1)]
    assert ms[0] >= ms[1] >= ms[2]


@pytest.mark.parametrize("p", [0.5, 0.7, 0.9])
def test_logarithmic_growth_in_population(p):
    ratios = []
    for n in (1_000, 10_000, 100_000):
        result = design(_coarse(n=n, k=10, p=p, pf1=0.001, pf2=0.001))
        ratios.append(result.m / math.log(n / 0.001))
    assert max(ratios) <= 1.2 * min(ratios)


def test_linear_growth_in_sparsity():
    per_item = []
    for k in (5, 10, 20):
        result = design(_coarse(n=10_000, k=k, p=0.7, pf1=0.001, pf2=0.001))
        per_item.append(result.m / k)
    assert max(per_item) <= 1.2 * min(per_item)


def test_spec_validation_and_defaults():
    spec = DesignSpec(n=100, k=2, p=0.5, pf1=0.1, pf2=0.1)
    assert spec.alpha_max == pytest.approx(2.0)
    assert spec.chernoff_mode == "exact"
    assert spec.flip_columns == 2
    assert DesignSpec(n=100, k=2, p=0.5, pf1=0.1, pf2=0.1, strategy="universal").flip_columns == 100
    assert np.allclose(spec.alpha_grid()[:3], [0.01, 0.02, 0.03])
    assert len(spec.alpha_grid()) == 200
    for bad in (dict(k=100), dict(p=0.0), dict(pf1=1.0), dict(chernoff_mode="loose")):
        values = dict(n=100, k=2, p=0.5, pf1=0.1, pf2=0.1)
        values.update(bad)
        with pytest.raises(GroupTestError):
            DesignSpec(**values)
