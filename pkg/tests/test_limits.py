import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from shiftwalk import ConfigError, ValidationError
from shiftwalk.limits import (
    REGIMES, JumpRecord, StableParams, ecf_check, fclt_marginal_test, gamma, hole_measure,
    ks_report, plan_for_map, pooled_waiting_times, regime_of, scaling_plan, simulate_ctrw,
    simulate_vn, stable_cdf, stable_cdf_interpolant, stable_sample, tail_constants, tail_measures,
    waiting_time_test,
)
from shiftwalk.maps import builtin

PAIRS = [(2.0, 0.0), (1.0, 0.0), (0.7, 1.0), (1.5, -0.5)]


def test_stable_params_validation():
    with pytest.raises(ConfigError):
        StableParams(1.0, 0.5)
    with pytest.raises(ConfigError):
        StableParams(2.5, 0.0)
    with pytest.raises(ConfigError):
        StableParams(1.2, 1.5)
    assert StableParams(2.0, 0.7).beta == 0.0


@pytest.mark.parametrize("alpha,beta", PAIRS)
def test_sampler_characteristic_function(alpha, beta):
    p = StableParams(alpha, beta)
    x = stable_sample(p, np.random.default_rng(17), 200_000)
    rows = ecf_check(p, x)
    assert all(r["ok"] for r in rows), rows


@pytest.mark.parametrize("alpha,beta", PAIRS)
def test_self_similarity(alpha, beta):
    p = StableParams(alpha, beta)
    rng = np.random.default_rng(23)
    n = 8
    sums = stable_sample(p, rng, (20_000, n)).sum(axis=1) / n ** (1 / alpha)
    direct = stable_sample(p, rng, 20_000)
    crit = 1.628 * math.sqrt(2 / 20_000)
    assert stats.ks_2samp(sums, direct).statistic < crit


def test_cauchy_sampler():
    x = stable_sample(StableParams(1.0, 0.0), np.random.default_rng(2), 100_000)
    assert abs(np.median(x)) < 0.02
    rep = ks_report(x, stats.cauchy.cdf)
    assert rep.passes_01


def test_cdf_analytic_oracles():
    assert stable_cdf(StableParams(1.0), 1.0) == pytest.approx(0.75, abs=1e-6)
    x = np.linspace(-5, 5, 41)
    np.testing.assert_allclose(stable_cdf(StableParams(2.0), x), stats.norm.cdf(x / math.sqrt(2)),
                               atol=1e-6)


@pytest.mark.parametrize("alpha,beta", [(0.7, 1.0), (1.5, -0.5), (0.5, 0.3), (1.8, 0.9)])
def test_cdf_matches_scipy_levy_stable(alpha, beta):
    x = np.array([-3.0, -0.7, 0.0, 0.4, 2.5, 10.0])
    ours = stable_cdf(StableParams(alpha, beta), x)
    ref = stats.levy_stable.cdf(x, alpha, beta)
    np.testing.assert_allclose(ours, ref, atol=2e-6)


def test_cdf_interpolant_scale():
    p = StableParams(1.5, 0.2)
    cdf = stable_cdf_interpolant(p, scale=2.0)
    x = np.array([-4.0, 0.0, 1.0, 6.0])
    np.testing.assert_allclose(cdf(x), stable_cdf(p, x / 2.0), atol=1e-4)


def test_scaling_plan_table_rows():
    p = scaling_plan(3, 1, 1, mean=0, variance=2)
    assert p.a_n(100) == 0 and p.b_n(100) == pytest.approx(10.0)
    c = 0.37
    p = scaling_plan(1, c, c)
    assert p.beta == 0 and p.a_n(1000) == 0
    assert p.b_n(1000) == pytest.approx(math.pi / 2 * 2 * c * 1000)
    p = scaling_plan(0.5, 1, 0)
    assert (p.alpha, p.beta, p.a_n(50)) == (0.5, 1.0, 0.0)
    p = scaling_plan(2, 1, 1, mean=0.5)
    assert p.b_n(100) == pytest.approx(math.sqrt(2 * 100 * math.log(100)))
    assert p.a_n(100) == 50.0


def test_scaling_plan_rejects_incomplete_input():
    with pytest.raises(ConfigError):
        scaling_plan(1, 1, 2)
    with pytest.raises(ConfigError):
        scaling_plan(1.5, 1, 1)
    with pytest.raises(ConfigError):
        scaling_plan(3, 1, 1, mean=0)
    with pytest.raises(ConfigError):
        scaling_plan(0, 1, 1)


@settings(max_examples=200, deadline=None)
@given(kappa=st.floats(1e-6, 1e3))
def test_regime_dispatch_total(kappa):
    r = regime_of(kappa)
    assert sum(r == name for name in REGIMES) == 1
    if kappa < 0.05:
        return  # n^(1/kappa) overflows double precision
    p = scaling_plan(kappa, 1.0, 1.0, mean=0.0, variance=1.0)
    assert p.b_n(1000) > 0 and math.isfinite(p.a_n(1000))


@pytest.mark.parametrize("kappa", [0.5, 1.0, 2.0, 10.0])
def test_tail_exponent_recovered(kappa):
    fit = tail_constants(builtin("example2", kappa=kappa))
    assert abs(fit.kappa - kappa) <= 0.02 * kappa
    assert fit.c_plus == pytest.approx(fit.c_minus, rel=1e-6)


def test_tail_measures_are_exact_level_lengths():
    # kappa = 1: lambda{F >= M + 1} near 3/4 solves c (1/d3 - 1/d1) = M + 1
    f = builtin("example2", kappa=1.0)
    plus, minus = tail_measures(f, np.array([1e4]))
    assert plus[0] == pytest.approx(minus[0], rel=1e-9)
    assert plus[0] * 1e4 == pytest.approx(tail_constants(f).c_plus, rel=1e-2)


def test_light_tailed_maps():
    assert tail_constants(builtin("example1", eps=4, delta=4)).light_tailed
    plan = plan_for_map(builtin("example1", eps=4, delta=4))
    assert plan.regime == "kappa>2" and plan.variance == pytest.approx(7 / 12)


def test_vn_piecewise_constant_in_time():
    f = builtin("example2", kappa=0.5)
    plan = scaling_plan(0.5, 1.0, 1.0)
    n = 50
    t = np.array([0.1, 0.105, 0.119, 0.12, 0.5])
    res = simulate_vn(f, n=n, t_grid=t, plan=plan, rng_seed=1, n_paths=200)
    assert plan.a_n(n) == 0
    np.testing.assert_array_equal(res.values[:, 0], res.values[:, 1])
    np.testing.assert_array_equal(res.values[:, 0], res.values[:, 2])


def test_vn_reproducible_and_chunk_independent():
    f = builtin("example2", kappa=3.0)
    plan = scaling_plan(3.0, 1.0, 1.0, mean=0.0, variance=1.0)
    a = simulate_vn(f, n=200, t_grid=[0.5, 1.0], plan=plan, rng_seed=4, n_paths=300, chunk=50)
    b = simulate_vn(f, n=200, t_grid=[0.5, 1.0], plan=plan, rng_seed=4, n_paths=300, chunk=300)
    np.testing.assert_array_equal(a.values, b.values)


def test_fclt_gaussian_regime_small():
    res = simulate_vn(builtin("example2", kappa=4.0), n=2000, t_grid=[1.0], rng_seed=6,
                      n_paths=3000)
    assert fclt_marginal_test(res, 1.0).passes_01


def test_direct_route_runs():
    f = builtin("example1", eps=4, delta=4)
    res = simulate_vn(f, n=100, t_grid=[1.0], rng_seed=2, n_paths=100, route="direct")
    assert res.values.shape == (100, 1) and res.route == "direct"
    with pytest.raises(ConfigError):
        simulate_vn(f, n=10, t_grid=[1.0], rng_seed=2, n_paths=10, route="other")


def test_gamma_and_hole_limit():
    assert gamma(0.01, 0.01) == pytest.approx(0.00375, abs=1e-15)
    m = 10 ** 5
    g = gamma(0.1, 0.1)
    assert abs(m * hole_measure(0.1 / m, 0.1 / m) - g) / g < 1e-4


def test_ctrw_records_are_unit_jumps_and_thread_independent():
    a = simulate_ctrw(0.5, 0.5, 20, 50, rng_seed=3, n_paths=400, threads=1)
    b = simulate_ctrw(0.5, 0.5, 20, 50, rng_seed=3, n_paths=400, threads=2)
    for r, s in zip(a, b):
        np.testing.assert_array_equal(r.jump_times, s.jump_times)
        np.testing.assert_array_equal(r.jump_signs, s.jump_signs)
        assert np.all(np.abs(r.jump_signs) == 1)
        assert np.all(np.diff(r.jump_times) > 0) and np.all(r.jump_times <= 50)


def test_ctrw_initialisations():
    for init in ("invariant", "conditionally-invariant", "uniform"):
        recs = simulate_ctrw(0.5, 0.5, 10, 20, init=init, rng_seed=1, n_paths=50)
        assert len(recs) == 50
    with pytest.raises(ConfigError):
        simulate_ctrw(0.5, 0.5, 10, 20, init="bogus", rng_seed=1)


def test_pooling_modes():
    recs = [JumpRecord(10, np.array([1.0, 3.0, 9.5]), np.array([1, -1, 1]), 10.0),
            JumpRecord(10, np.array([2.0]), np.array([1]), 10.0)]
    np.testing.assert_array_equal(pooled_waiting_times(recs, 1.0, "first"), [1.0, 2.0])
    np.testing.assert_array_equal(pooled_waiting_times(recs, 1.0, "second"), [2.0])
    np.testing.assert_array_equal(pooled_waiting_times(recs, 1.0, "censored", margin=2.0),
                                  [1.0, 2.0, 6.5, 2.0])
    np.testing.assert_array_equal(pooled_waiting_times(recs, 1.0, "censored", margin=7.5),
                                  [1.0, 2.0, 2.0])
    with pytest.raises(ValidationError):
        waiting_time_test(recs, 1.0)


def test_ks_report_critical_values():
    x = np.random.default_rng(0).random(5000)
    rep = ks_report(x, stats.uniform.cdf)
    assert rep.critical_05 == pytest.approx(1.358 / math.sqrt(5000), rel=0.01)
    assert rep.critical_01 == pytest.approx(1.628 / math.sqrt(5000), rel=0.01)
    assert rep.passes_05


def test_negative_control_small_m_fails():
    g = gamma(0.5, 0.5)
    recs = simulate_ctrw(0.5, 0.5, 2, 400, rng_seed=5, n_paths=2000)
    assert not waiting_time_test(recs, g).passes_01
