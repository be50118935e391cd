import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shiftwalk import ConfigError, NumericalError, ValidationError
from shiftwalk.maps import builtin
from shiftwalk.transfer import (
    PiecewiseConstantDensity, cond_invariant_density, convergence_check, fp_step, gora_density,
    hole_length, in_ks, psi, reference_table, reference_table_json, small_parameter_intervals,
    spike_orbits, ulam_grid, ulam_invariant_density,
)


def ks_density(b, k1, k2, k3):
    br = [0.0, b, 0.5, 1.0] if b < 0.5 else [0.0, 0.5, b, 1.0]
    return PiecewiseConstantDensity.from_unnormalized(br, [k1, k2, k3])


ks_densities = st.builds(
    ks_density,
    st.floats(0.01, 0.99).filter(lambda b: abs(b - 0.5) > 1e-3),
    st.floats(0.1, 2.0), st.floats(0.1, 2.0), st.floats(0.1, 2.0),
)


def test_density_validation():
    with pytest.raises(ConfigError):
        PiecewiseConstantDensity(np.array([0.0, 0.5, 1.0]), np.array([1.0, 2.0]))
    with pytest.raises(ConfigError):
        PiecewiseConstantDensity(np.array([0.0, 0.7, 0.5, 1.0]), np.array([1.0, 1.0, 1.0]))
    with pytest.raises(NumericalError):
        PiecewiseConstantDensity.from_unnormalized([0.0, 1.0], [0.0])


def test_sup_distance_is_exact():
    a = PiecewiseConstantDensity(np.array([0.0, 0.3, 1.0]), np.array([2.0, 4.0 / 7.0]))
    b = PiecewiseConstantDensity.uniform()
    assert a.sup_distance(b) == pytest.approx(1.0, abs=1e-15)


def test_fp_step_uniform_hole():
    k, C = fp_step(0.01, 0.01, PiecewiseConstantDensity.uniform())
    assert C == pytest.approx(1 - 2 * hole_length(0.01), abs=1e-15)
    assert 1 - C == pytest.approx(0.003734, abs=5e-7)
    assert k.mass == pytest.approx(1.0, abs=1e-14)


def test_fp_step_zero_parameters_fix_uniform():
    k, C = fp_step(0.0, 0.0, PiecewiseConstantDensity.uniform())
    assert C == 1.0
    np.testing.assert_allclose(k.values, 1.0, atol=1e-15)


def test_fp_step_matches_displayed_formulas():
    eps, delta = 0.002, 0.003
    b = 0.08
    k = ks_density(b, 1.3, 0.9, 1.0)
    k1, k2, k3 = k(0.01), k(0.3), k(0.7)
    out, C = fp_step(eps, delta, k)
    p1 = (k1 / (4 + eps) + k3 / (2 + delta) + k3 / (4 + delta)) / C
    p2 = (k2 / (4 + eps) + k3 / (2 + delta) + k3 / (4 + delta)) / C
    p3 = (k2 / (4 + eps) + k2 / (2 + eps) + k3 / (4 + delta)) / C
    assert out(0.5 * b * (4 + eps)) == pytest.approx(p1, rel=1e-13)
    assert out(0.5 * (b * (4 + eps) + 0.5)) == pytest.approx(p2, rel=1e-13)
    assert out(0.75) == pytest.approx(p3, rel=1e-13)
    assert abs(p1 - p2) == pytest.approx(abs(k1 - k2) / (C * (4 + eps)), rel=1e-12)


@settings(max_examples=80, deadline=None)
@given(k=ks_densities, eps=st.floats(1e-6, 0.05), delta=st.floats(1e-6, 0.05))
def test_fp_step_conserves_mass_and_contracts_psi(k, eps, delta):
    out, C = fp_step(eps, delta, k)
    assert abs(out.mass - 1.0) < 1e-12
    assert 2 / 3 <= C <= 1
    assert in_ks(out, psi(k))
    assert psi(out) <= psi(k) / (2 * C)


def test_psi_examples():
    assert psi(PiecewiseConstantDensity.two_piece(0.7)) == 0.0
    k = PiecewiseConstantDensity([0, 0.3, 0.5, 1.0], [1.2, 1.0, (1 - 0.36 - 0.2) / 0.5])
    assert psi(k) == pytest.approx(0.2, abs=1e-15)
    out, C = fp_step(0.001, 0.001, k)
    assert psi(out) <= psi(k) / (2 * C)
    bad = PiecewiseConstantDensity([0, 0.1, 0.2, 0.5, 1.0], [1.0, 2.0, 1.0, 0.8])
    with pytest.raises(ValidationError):
        psi(bad)
    assert not in_ks(bad, 10.0)


@pytest.mark.parametrize("eps", [0.3, 0.1, 1e-3, 1e-6])
def test_nu_is_one_on_diagonal(eps):
    assert cond_invariant_density(eps, eps).nu == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("eps,delta", [(1e-3, 2e-3), (5e-4, 1e-4), (1e-4, 1e-3), (0.2, 0.05)])
def test_nu_fixed_point_and_linearization(eps, delta):
    fc = cond_invariant_density(eps, delta)
    out, C = fp_step(eps, delta, fc.density)
    assert out.sup_distance(fc.density) < 1e-12
    assert fc.escape_mass == pytest.approx(1 - C, abs=1e-15)
    if max(eps, delta) <= 1e-3:
        lin = (eps - delta) / 12
        assert abs((fc.nu - 1) - lin) <= 0.05 * abs(lin)


def test_nu_tends_to_one():
    gaps = [abs(cond_invariant_density(e, 3 * e).nu - 1) for e in (1e-1, 1e-2, 1e-3, 1e-4)]
    assert all(a > b for a, b in zip(gaps, gaps[1:]))


def test_cond_invariant_requires_positive_parameters():
    with pytest.raises(ConfigError):
        cond_invariant_density(0.0, 0.1)


def test_convergence_envelope():
    for x in (0.0, 2.0, 0.5):
        d = convergence_check(1e-4, 1e-4, x, 30)
        n = np.arange(1, 31)
        assert np.all(d <= 6 * (2 / 3) ** n)
    d = convergence_check(1e-4, 1e-4, 2.0, 30)
    assert np.all(np.diff(d[1:]) <= 0)


def test_ulam_uniform_for_doubling_like_map():
    approx = ulam_invariant_density(builtin("example1", eps=4, delta=4), 64)
    np.testing.assert_allclose(approx.stationary, 1.0, atol=1e-10)


def test_ulam_stationarity():
    approx = ulam_invariant_density(builtin("example1", eps=0.01, delta=0.01), 1000)
    mass = approx.stationary * approx.widths
    assert np.abs(approx.matrix.T @ mass - mass).sum() < 1e-10
    assert approx.as_density().mass == pytest.approx(1.0, abs=1e-12)


def test_ulam_grid_contains_critical_orbits():
    f = builtin("example1", eps=0.01, delta=0.01)
    g = ulam_grid(f, 100, orbit_depth=5)
    o = spike_orbits(0.01, 0.01, 5)
    for pt in np.concatenate(o):
        assert np.min(np.abs(g - pt)) < 1e-12


def test_ulam_nonlinear_map_matches_analytic_density():
    # invariant law of the conjugated map is h(U) with h(x) = x (1 + x) / 2
    approx = ulam_invariant_density(builtin("conjugated_example1"), 2000)
    x = np.linspace(0.01, 0.99, 50)
    expect = 1.0 / np.sqrt(0.25 + 2 * x)
    np.testing.assert_allclose(approx.density(x), expect, rtol=3e-3)


def test_uniform_convergence_away_from_endpoints():
    sups = []
    for eps in (1e-2, 1e-3, 1e-4):
        approx = ulam_invariant_density(builtin("example1", eps=eps, delta=eps), 2000)
        x = np.linspace(0.05, 0.95, 2001)
        sups.append(np.max(np.abs(approx.density(x) - 1)))
    assert sups[0] > sups[1] > sups[2]


def test_reference_table_values():
    rows = reference_table(4000)
    assert len(rows) == 13
    assert max(r["abs_error"] for r in rows) <= 0.005
    by_label = {r["interval"]: r for r in rows}
    assert by_label["(0, eps/4)"]["reference_value"] == 1.959
    assert by_label["(0.354, 0.646)"]["computed_value"] == pytest.approx(0.988, abs=0.005)
    text = reference_table_json(rows)
    assert '"reference_value"' in text and '"computed_value"' in text


def test_small_parameter_intervals():
    rows = small_parameter_intervals(1e-7, 3)
    assert rows[0][1] == (0.0, pytest.approx(2.5e-8))
    assert [r[3] for r in rows] == [2.0, 1.25, 1.0625, 1.015625]
    for n, (a, b), (c, d), _ in rows:
        assert a < b and c == pytest.approx(1 - b) and d == pytest.approx(1 - a)


def test_series_expansion_rates():
    dens = gora_density(1e-3, 2e-3, n_terms=20)
    n = np.tile(np.arange(1, 21), 4)
    assert np.all(np.abs(dens.betas) >= 2.0 ** n)


def test_series_agrees_with_ulam():
    eps = 1e-7
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        dens = gora_density(eps, eps, n_terms=20)
    approx = ulam_invariant_density(builtin("example1", eps=eps, delta=eps), 4000,
                                    extra_points=dens.anchors)
    x = np.linspace(0.04, 0.96, 3001)
    assert np.max(np.abs(dens(x) - approx.density(x))) < 0.005
    assert dens.as_density().mass == pytest.approx(1.0, abs=1e-12)


def test_series_limit_law():
    eps = 1e-9
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        dens = gora_density(eps, eps, n_terms=20)
    for n, (a, b), (c, d), val in small_parameter_intervals(eps, 5):
        assert dens(0.5 * (a + b)) == pytest.approx(val, abs=1e-3)
        assert dens(0.5 * (c + d)) == pytest.approx(val, abs=1e-3)


def test_density_csv(tmp_path):
    k = PiecewiseConstantDensity.two_piece(0.5)
    k.to_csv(tmp_path / "d.csv")
    lines = (tmp_path / "d.csv").read_text().splitlines()
    assert lines == ["break,value", "0.0,0.5", "0.5,1.5", "1.0,"]


def test_hole_length_small_parameter_slope():
    for x in (1e-4, 1e-6):
        assert hole_length(x) / x == pytest.approx(3 / 16, rel=1e-3)
    assert math.isclose(hole_length(0.0), 0.0)
