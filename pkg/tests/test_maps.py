import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shiftwalk import ConfigError
from shiftwalk.maps import (
    BUILTINS, builtin, eval_restricted, evaluate, h_quadratic, h_quadratic_inv, image_bounds,
    jump, validate,
)

FINITE_MAPS = [
    ("example1", {"eps": 0.01, "delta": 0.01}),
    ("example1", {"eps": 4, "delta": 4}),
    ("example1", {"eps": 0.3, "delta": 1.7}),
    ("climbing_sine", {"a": 0.5}),
    ("pomeau_manneville", {}),
    ("conjugated_example1", {}),
]
ALL_MAPS = FINITE_MAPS + [("example2", {"kappa": 1.0}), ("example2", {"kappa": 2.5}),
                          ("climbing_tangent", {}), ("nonint_example", {})]


def test_example1_hand_values():
    f = builtin("example1", eps=0.01, delta=0.01)
    assert evaluate(f, 0.9) == pytest.approx(0.599, abs=1e-14)
    g = builtin("example1", eps=4, delta=4)
    assert evaluate(g, 0.25) == 2.0
    assert evaluate(g, 0.75) == -1.0
    assert g.breakpoints.tolist() == [0.0, 0.25, 0.75, 1.0]
    assert eval_restricted(g, 0.2) == pytest.approx(0.6, abs=1e-15)


def test_example2_endpoints_and_singularities():
    f = builtin("example2", kappa=1)
    assert evaluate(f, 0.0) == pytest.approx(0.0, abs=1e-12)
    assert evaluate(f, 1.0) == pytest.approx(1.0, abs=1e-12)
    assert evaluate(f, 0.25) == -math.inf
    assert evaluate(f, 0.75) == math.inf
    # the formula sends both sides of 1/4 to -inf and both sides of 3/4 to +inf
    assert f.branches[0].right_limit == -math.inf
    assert f.branches[1].left_limit == -math.inf
    assert evaluate(f, 0.25 - 1e-9) < -1e6 and evaluate(f, 0.25 + 1e-9) < -1e6
    assert eval_restricted(f, 0.25) == 0.0


def test_singular_underflow_returns_symbolic_infinity():
    f = builtin("example2", kappa=1)
    assert evaluate(f, 0.25 + 1e-320) == -math.inf


def test_climbing_sine_image_threshold():
    lo, hi = image_bounds(builtin("climbing_sine", a=0.5))
    assert 0.0 <= lo and hi <= 1.0
    lo, hi = image_bounds(builtin("climbing_sine", a=0.7326))
    assert 0.0 <= lo and hi <= 1.0 + 1e-12
    lo, hi = image_bounds(builtin("climbing_sine", a=0.7327))
    assert hi > 1.0


def test_validate_reports():
    assert validate(builtin("example1", eps=4, delta=4)).has_integer_spikes
    rep = validate(builtin("example1", eps=0.01, delta=0.01))
    assert rep.is_shift_periodic and not rep.has_integer_spikes
    w = rep.by_condition("iv")
    assert w and abs(w[0].witness - 0.25) < 1e-12 and "1.0025" in w[0].detail
    rep = validate(builtin("nonint_example"))
    assert not rep.has_integer_spikes
    assert any("0.5" in v.detail for v in rep.by_condition("iv"))
    assert validate(builtin("example2", kappa=1.5)).has_integer_spikes


def test_builtin_rejects_bad_input():
    with pytest.raises(ConfigError):
        builtin("tent")
    with pytest.raises(ConfigError):
        builtin("example1", eps=0.1)
    with pytest.raises(ConfigError):
        builtin("example2", kappa=1, eps=2)


def test_conjugated_example1_is_h_g_hinv():
    f = builtin("conjugated_example1")
    g = builtin("example1", eps=4, delta=4)
    x = np.linspace(0.013, 0.987, 501)
    y = h_quadratic_inv(x)
    gy = evaluate(g, y)
    expect = h_quadratic(gy - np.floor(gy)) + np.floor(gy)
    np.testing.assert_allclose(evaluate(f, x), expect, atol=1e-12)


@pytest.mark.parametrize("name,params", ALL_MAPS)
def test_branch_cover(name, params):
    f = builtin(name, params)
    b = f.breakpoints
    assert b[0] == 0.0 and b[-1] == 1.0
    assert np.all(np.diff(b) > 0)
    for left, right in zip(f.branches[:-1], f.branches[1:]):
        assert left.hi == right.lo


@settings(max_examples=60, deadline=None)
@given(k=st.sampled_from(range(len(ALL_MAPS))), x=st.floats(0, 1, exclude_max=True),
       j=st.integers(-5, 5))
def test_shift_equivariance(k, x, j):
    name, params = ALL_MAPS[k]
    f = builtin(name, params)
    # x + j is rounded; (x + j) - j is exact, so it is the point actually shifted
    xr = (x + j) - j
    if not 0.0 <= xr < 1.0:
        return
    y0 = evaluate(f, xr)
    if not math.isfinite(y0):
        return
    y1 = evaluate(f, x + j)
    assert abs(y1 - (y0 + j)) <= 4 * math.ulp(max(abs(y0 + j), 1.0))


@settings(max_examples=60, deadline=None)
@given(k=st.sampled_from(range(len(ALL_MAPS))), x=st.floats(0, 1))
def test_restricted_range(k, x):
    name, params = ALL_MAPS[k]
    y = eval_restricted(builtin(name, params), x)
    assert 0.0 <= y <= 1.0


@settings(max_examples=100, deadline=None)
@given(kappa=st.sampled_from([0.5, 1.0, 2.0, 10.0]), x=st.floats(0.001, 0.999))
def test_example2_antisymmetry(kappa, x):
    if abs(x - 0.25) < 1e-3 or abs(x - 0.75) < 1e-3:
        return
    f = builtin("example2", kappa=kappa)
    s = evaluate(f, x) + evaluate(f, 1.0 - x)
    assert abs(s - 1.0) <= 1e-12 * max(1.0, abs(evaluate(f, x)))


def test_jump_flags_singular_points():
    f = builtin("example2", kappa=1)
    m, sing = jump(f, np.array([0.1, 0.25, 0.75]))
    assert sing.tolist() == [False, True, True]
    assert m[1] == 0 and m[2] == 0


def test_builtins_registry_names():
    assert set(BUILTINS) == {"climbing_sine", "climbing_tangent", "example1", "example2",
                             "pomeau_manneville", "nonint_example", "conjugated_example1"}
