import math

import numpy as np
import pytest
from scipy.special import expit
from hypothesis import given, strategies as st

from halfspec.monofun import (Kappa, MonotoneFn, compute_cutoff_table, default_cutoff, is_superadditive, mchi,
                              superadditive_envelope)


@st.composite
def monotone_fns(draw, max_points=6):
    n = draw(st.integers(1, max_points))
    steps = draw(st.lists(st.floats(0.05, 3.0), min_size=n - 1, max_size=n - 1))
    rises = draw(st.lists(st.floats(0.0, 3.0), min_size=n, max_size=n))
    x = np.concatenate([[0.0], np.cumsum(steps)])
    y = np.cumsum(rises)
    return MonotoneFn(x, y, draw(st.floats(0.0, 2.0)))


def test_identity_ramp():
    assert MonotoneFn.linear(1.0).eval(3.0) == 3.0


def test_zero_constant():
    assert MonotoneFn.constant(0.0).eval(17.0) == 0.0


def test_plateau_extrapolation():
    assert MonotoneFn([0, 1], [0, 2], 0.0).eval(5.0) == 2.0


def test_negative_argument_rejected():
    with pytest.raises(ValueError):
        MonotoneFn.linear(1.0).eval(-1.0)


def test_decreasing_values_rejected():
    with pytest.raises(ValueError):
        MonotoneFn([0, 1], [1, 0.5])


def test_class_flags():
    f = MonotoneFn([0, 2], [0, 0.5], 0.25)
    assert f.vanishes_at_zero
    assert f.in_C_delta(1.0)
    assert not f.in_C_delta(1.5)
    assert not MonotoneFn.constant(0.1).vanishes_at_zero


@given(monotone_fns(), st.lists(st.floats(0, 20), min_size=2, max_size=20))
def test_eval_nondecreasing(f, pts):
    pts = np.sort(pts)
    v = f.eval(pts)
    assert np.all(np.diff(v) >= -1e-12)


@given(monotone_fns(), monotone_fns())
def test_max_and_sum_stay_monotone(f, g):
    h = f.maximum(g)
    s = f + g
    grid = np.linspace(0, 15, 301)
    assert np.allclose(h.eval(grid), np.maximum(f.eval(grid), g.eval(grid)), rtol=1e-12, atol=1e-12)
    assert np.allclose(s.eval(grid), f.eval(grid) + g.eval(grid), rtol=1e-12, atol=1e-12)
    assert h.dominates(f) and h.dominates(g)
    assert h.vanishes_at_zero == (f.vanishes_at_zero and g.vanishes_at_zero)


@given(monotone_fns())
def test_json_roundtrip(f):
    assert MonotoneFn.from_json(f.to_json()) == f


def test_kappa_is_nonincreasing_and_positive():
    k = Kappa.from_points([0, 1, 2], [1.0, 0.6, 0.3])
    vals = k(np.linspace(0, 5, 50))
    assert np.all(np.diff(vals) <= 0) and np.all(vals > 0)
    with pytest.raises(ValueError):
        Kappa.constant(0.0)


def test_mchi_anchors():
    assert mchi(1.0, 0.0) == 1.0
    assert mchi(1.0, 0.5) == 1.5
    prof = default_cutoff()
    assert mchi(0.5, 1.0) == pytest.approx(1 + 2 * prof.sups[1], rel=1e-15)


@given(st.floats(0.05, 4.0), st.floats(0.05, 4.0), st.floats(0.0, 8.0), st.floats(0.0, 8.0))
def test_mchi_monotonicity(d1, d2, m1, m2):
    lo_d, hi_d = sorted((d1, d2))
    lo_m, hi_m = sorted((m1, m2))
    assert mchi(lo_d, lo_m) <= mchi(lo_d, hi_m) * (1 + 1e-14)
    assert mchi(hi_d, hi_m) <= mchi(lo_d, hi_m) * (1 + 1e-14)
    assert mchi(d1, m1) >= 1.0


def test_cutoff_table_matches_fresh_computation():
    shipped = default_cutoff()
    fresh = compute_cutoff_table(kmax=4, samples=120)
    assert shipped.sups[0] == 1.0
    for k in range(1, 5):
        # both are safety-scaled sup bounds; resampling should agree closely
        assert fresh.sups[k] == pytest.approx(shipped.sups[k], rel=1e-3)


def test_cutoff_bound_covers_sampled_derivative():
    # first derivative of Psi(x) = f(x)/(f(x)+f(1-x)), f = exp(-1/x), by finite differences
    def psi(x):
        return expit(1 / (1 - x) - 1 / x)

    x = np.linspace(1e-3, 1 - 1e-3, 20001)
    deriv = np.gradient(psi(x), x)
    assert np.max(np.abs(deriv)) <= default_cutoff().sups[1]


def test_envelope_of_linear_profile():
    r = np.linspace(0.1, 5, 50)
    R = superadditive_envelope(r, r)
    grid = np.linspace(0, 5, 40)
    assert np.allclose(R.eval(grid), grid, atol=0.11)
    exact = superadditive_envelope(np.array([1.0]), np.array([1.0]))
    assert exact.eval(3.0) == pytest.approx(3.0)


def test_envelope_of_quadratic_profile():
    r = np.linspace(1e-4, 4, 4001)
    R = superadditive_envelope(r, r ** 2)
    for l in (0.5, 1.0, 2.0):
        assert R.eval(l) == pytest.approx(1.5 * l * l, rel=2e-3)


def test_envelope_of_zero():
    R = superadditive_envelope(np.linspace(0.1, 3, 10), np.zeros(10))
    assert np.all(R.eval(np.linspace(0, 10, 30)) == 0)


def test_envelope_rejects_mass_at_origin():
    with pytest.raises(ValueError):
        superadditive_envelope(np.array([0.0, 1.0]), np.array([1.0, 1.0]))


@given(st.lists(st.tuples(st.floats(0.01, 5), st.floats(0, 10, allow_subnormal=False)), min_size=1, max_size=30))
def test_envelope_properties(samples):
    r = np.array([s[0] for s in samples])
    v = np.array([s[1] for s in samples])
    R = superadditive_envelope(r, v)
    assert R.eval(0.0) == 0.0
    assert np.all(R.eval(r) >= v * (1 - 1e-12) - 1e-12)
    ok, witness = is_superadditive(R.eval, np.linspace(0, 2 * r.max(), 200), rtol=1e-9)
    assert ok, witness


def test_superadditivity_checker():
    grid = np.linspace(0, 4, 41)
    assert is_superadditive(lambda x: x, grid)[0]
    sq = MonotoneFn.from_function(lambda x: x ** 2, np.linspace(0, 10, 2001))
    assert is_superadditive(sq.eval, grid)[0]
    ok, witness = is_superadditive(np.sqrt, [1.0, 2.0])
    assert not ok and witness == (1.0, 1.0)
