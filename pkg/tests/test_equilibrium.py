import math

import numpy as np
import pytest

from matchnet import (
    ModelParams,
    SocializationProfile,
    a_bar,
    ds_da_implicit,
    existence_threshold_homogeneous,
    existence_threshold_low,
    expected_utility,
    foc_high_lhs,
    foc_homogeneous_lhs,
    foc_low_lhs,
    solve_heterogeneous,
    solve_homogeneous,
)
from matchnet.errors import ParameterError, TranscriptionMismatchError

FIG_HOM = ModelParams(a=.5, d=.015, c=.005, V=2.0)
FIG_HET = ModelParams(a=.5, d=.015, c=.003, h=.8, Y=2.0)


# ------------------------------------------------------------- thresholds

def test_threshold_value_and_symmetry():
    p = ModelParams(a=.5, d=.015, c=.005, V=1.0)
    assert existence_threshold_homogeneous(p) == pytest.approx(0.00369375,
                                                               rel=1e-14)
    assert existence_threshold_homogeneous(p.with_(a=.3)) == \
        pytest.approx(existence_threshold_homogeneous(p.with_(a=.7)), rel=1e-14)


def test_threshold_vanishes_at_boundaries():
    p = ModelParams(a=1e-12, d=.015, c=.005)
    assert existence_threshold_homogeneous(p) == pytest.approx(0.0, abs=1e-12)
    p = ModelParams(a=.5, d=1e-12, c=.005)
    assert existence_threshold_homogeneous(p) == pytest.approx(0.0, abs=1e-12)


# ------------------------------------------------------------ one-type FOC

def test_foc_homogeneous_example_value():
    assert foc_homogeneous_lhs(1.0, FIG_HOM) == \
        pytest.approx(0.0044972860193144846, rel=1e-13)


def test_foc_homogeneous_small_s_limit_is_threshold():
    thr = existence_threshold_homogeneous(FIG_HOM)
    assert foc_homogeneous_lhs(1e-10, FIG_HOM) == pytest.approx(thr, rel=1e-7)


def test_foc_homogeneous_strictly_decreasing_on_log_grid():
    vals = [foc_homogeneous_lhs(s, FIG_HOM)
            for s in np.logspace(-4, 3, 120)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_foc_homogeneous_rejects_nonpositive_s():
    with pytest.raises(ParameterError):
        foc_homogeneous_lhs(0.0, FIG_HOM)
    with pytest.raises(ParameterError):
        foc_homogeneous_lhs(-1.0, FIG_HOM)


# ---------------------------------------------------------- one-type solve

def test_solve_homogeneous_figure_point():
    res = solve_homogeneous(FIG_HOM)
    assert res.exists
    assert res.s_star == pytest.approx(0.785, abs=5e-3)
    assert res.residual <= 1e-10
    assert abs(foc_homogeneous_lhs(res.s_star, FIG_HOM) - FIG_HOM.c) <= 1e-10


def test_solve_homogeneous_above_threshold_returns_zero_equilibrium():
    p = ModelParams(a=.5, d=.015, c=.004, V=1.0)  # threshold 0.00369375
    res = solve_homogeneous(p)
    assert not res.exists and res.s_star == 0.0


def test_solve_homogeneous_single_peak_over_a():
    svals = []
    for i in range(41):
        a = .30 + .01 * i
        svals.append(solve_homogeneous(FIG_HOM.with_(a=a)).s_star)
    diffs = [b - a for a, b in zip(svals, svals[1:])]
    changes = sum(1 for x, y in zip(diffs, diffs[1:]) if x > 0 > y)
    assert changes == 1


def test_solve_deterministic():
    r1 = solve_homogeneous(FIG_HOM)
    r2 = solve_homogeneous(FIG_HOM)
    assert r1.s_star == r2.s_star and r1.residual == r2.residual


# ------------------------------------------------------------ a_bar and A-2

def test_a_bar_small_x_limit():
    assert a_bar(.015, 1e-9) == pytest.approx(0.5, abs=1e-9)


def test_a_bar_figure_value():
    assert a_bar(.015, .78) == pytest.approx(0.408, abs=1e-3)


def test_a_bar_in_unit_interval():
    rng = np.random.default_rng(11)
    for _ in range(300):
        v = a_bar(rng.uniform(.005, .95), rng.uniform(.01, 20))
        assert 0.0 < v < 1.0


def test_a_bar_zeroes_numerator_bracket():
    s = solve_homogeneous(FIG_HOM).s_star
    ab = a_bar(.015, s)
    x = (1 - .015) * (-math.expm1(-s * .015)) / .015
    assert abs(1 - 2 * ab - ab * (1 - ab) * x) < 1e-12


def test_ds_da_matches_finite_differences():
    for a in (.35, .45, .55, .65):
        p = FIG_HOM.with_(a=a)
        s = solve_homogeneous(p, tol=1e-12).s_star
        analytic = ds_da_implicit(s, p)
        h = 1e-4
        d1 = (solve_homogeneous(p.with_(a=a + h), tol=1e-12).s_star
              - solve_homogeneous(p.with_(a=a - h), tol=1e-12).s_star) / (2 * h)
        d2 = (solve_homogeneous(p.with_(a=a + h / 2), tol=1e-12).s_star
              - solve_homogeneous(p.with_(a=a - h / 2), tol=1e-12).s_star) / h
        richardson = (4 * d2 - d1) / 3
        assert analytic == pytest.approx(richardson, rel=1e-4)


def test_ds_da_sign_flips_once():
    signs = []
    for i in range(91):
        a = .05 + .01 * i
        p = FIG_HOM.with_(a=a)
        res = solve_homogeneous(p)
        if res.exists:
            signs.append(math.copysign(1.0, ds_da_implicit(res.s_star, p)))
    flips = sum(1 for x, y in zip(signs, signs[1:]) if x != y)
    assert flips == 1 and signs[0] > 0 > signs[-1]


# --------------------------------------------------------- two-type FOCs

def test_foc_high_reduces_to_homogeneous_at_h1():
    p = ModelParams(a=.5, d=.015, c=.005, h=1.0 - 1e-12, Y=2.0)
    hom = ModelParams(a=.5, d=.015, c=.005, V=1.0)
    got = foc_high_lhs(1.5, 0.7, p)
    want = 2.0 * foc_homogeneous_lhs(1.5, hom)
    assert got == pytest.approx(want, rel=1e-9)


def test_foc_high_vanishes_at_both_ends():
    assert foc_high_lhs(1e-9, 1.0, FIG_HET) < 1e-8
    assert foc_high_lhs(1e7, 1.0, FIG_HET) < 1e-8


def test_foc_low_small_effort_limit_is_threshold():
    thr = existence_threshold_low(1.2, FIG_HET)
    assert foc_low_lhs(1e-7, 1.2, FIG_HET) == pytest.approx(thr, rel=1e-5)


def test_existence_threshold_low_example_and_monotonicity():
    p = ModelParams(a=.5, d=.015, c=.003, h=.8, Y=2.0)
    assert existence_threshold_low(1.0, p) == \
        pytest.approx(0.007332369745491639, rel=1e-13)
    grid = np.linspace(.1, 10, 80)
    vals = [existence_threshold_low(s, p) for s in grid]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    # small-effort limit a(1-a)(1-d) Y d
    assert existence_threshold_low(1e-9, p) == \
        pytest.approx(.5 * .5 * .985 * 2.0 * .015, rel=1e-8)


def test_foc_low_verify_mode_agrees_with_utility_slope():
    rng = np.random.default_rng(12)
    for _ in range(100):
        p = ModelParams(a=rng.uniform(.05, .95), d=rng.uniform(.005, .5),
                        c=.003, h=rng.uniform(.05, .95), Y=rng.uniform(1, 3))
        s_h, s_l = rng.uniform(.05, 5, size=2)
        foc_low_lhs(s_l, s_h, p, verify=True)  # raises on mismatch


def test_foc_low_verify_mode_detects_mismatch():
    # an off-model utility slope must trip the cross-check: compare the
    # condition against a deliberately wrong tolerance-zero twin
    p = FIG_HET
    value = foc_low_lhs(1.5, 1.3, p)
    with pytest.raises(TranscriptionMismatchError):
        foc_low_lhs(1.5, 1.3, p, verify=True, verify_tol=1e-18)
    assert value > 0


# --------------------------------------------------------- two-type solve

def test_solve_heterogeneous_figure_point():
    res = solve_heterogeneous(FIG_HET)
    assert res.exists
    assert res.residual_high <= 1e-9 and res.residual_low <= 1e-9
    assert res.s_l_star > res.s_h_star
    assert len(res.multiplicity) >= 1


def test_solve_heterogeneous_h_limit_matches_homogeneous_with_Y():
    p = ModelParams(a=.5, d=.015, c=.005, h=1 - 1e-9, Y=2.0)
    hom = ModelParams(a=.5, d=.015, c=.005, V=2.0)
    res = solve_heterogeneous(p, restarts=4)
    want = solve_homogeneous(hom).s_star
    assert res.exists
    assert res.s_h_star == pytest.approx(want, rel=1e-5)


def test_solve_heterogeneous_supra_threshold_cost():
    p = FIG_HET.with_(c=.5)
    res = solve_heterogeneous(p, restarts=4)
    assert not res.exists
    assert res.s_h_star == 0.0 and res.s_l_star == 0.0


def test_solve_heterogeneous_requires_interior_h():
    with pytest.raises(ParameterError):
        solve_heterogeneous(ModelParams(a=.5, d=.015, c=.003, h=1.0, Y=2.0))


def test_solve_heterogeneous_deterministic():
    r1 = solve_heterogeneous(FIG_HET, restarts=9)
    r2 = solve_heterogeneous(FIG_HET, restarts=9)
    assert (r1.s_h_star, r1.s_l_star) == (r2.s_h_star, r2.s_l_star)
    assert r1.multiplicity == r2.multiplicity


def test_heterogeneous_foc_residuals_also_hold_numerically():
    res = solve_heterogeneous(FIG_HET, restarts=4)
    prof = SocializationProfile(s_h=res.s_h_star, s_l=res.s_l_star)
    step = 1e-6

    def slope(kind, s0):
        up = expected_utility(kind, s0 + step, prof, FIG_HET)
        dn = expected_utility(kind, s0 - step, prof, FIG_HET)
        return (up - dn) / (2 * step) + FIG_HET.c

    assert slope("h", res.s_h_star) == pytest.approx(FIG_HET.c, rel=1e-4)
    assert slope("l", res.s_l_star) == pytest.approx(FIG_HET.c, rel=1e-4)
