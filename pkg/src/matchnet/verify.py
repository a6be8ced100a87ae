"""Verification suites: closed-form identities, solver contracts, Monte Carlo.

Each suite returns a :class:`SuiteResult` with a pass flag, a worst
statistic (the number the pass condition binds on), and a one-line
detail.  The quick tier is deterministic closed-form and solver work;
the full tier adds the Monte Carlo benchmarks.  Suite outputs contain
no timing or machine information, so reports are byte-identical across
runs and thread counts for a fixed seed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import equilibrium as eq
from . import rates
from .errors import TranscriptionMismatchError
from .params import ModelParams, SocializationProfile
from .simulate import compare_to_closed_form, monte_carlo
from .sweep import detect_peak, numeric_derivative, sweep

_FIG_HOM = dict(c=0.005, d=0.015, V=2.0)
_FIG_HET = dict(c=0.003, d=0.015, h=0.8, Y=2.0)
_BENCH_PROFILE = SocializationProfile.uniform(1.5)


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    worst: float
    detail: str


def _params_hom(a: float, **kw) -> ModelParams:
    base = dict(_FIG_HOM)
    base.update(kw)
    return ModelParams(a=a, **base)


def _params_het(a: float, **kw) -> ModelParams:
    base = dict(_FIG_HET)
    base.update(kw)
    return ModelParams(a=a, **base)


# ---------------------------------------------------------------------------
# quick suites
# ---------------------------------------------------------------------------

def suite_rate_ranges(draws: int = 400) -> SuiteResult:
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(draws):
        params = ModelParams(a=rng.uniform(.02, .98), d=rng.uniform(.002, .9),
                             c=.01, h=rng.uniform(.02, .98),
                             Y=rng.uniform(1, 4))
        profile = SocializationProfile(s_h=rng.uniform(0, 6),
                                       s_l=rng.uniform(.01, 6))
        vals = list(rates.matching_rates(profile, params).as_dict().values())
        vals.append(rates.psi_het("l", "l", profile, params,
                                  ll_form="consistent"))
        s = rng.uniform(0, 6)
        vals.append(rates.psi_homogeneous(s, params.a, params.d))
        vals.append(rates.upsilon_homogeneous(s, params.d))
        for v in vals:
            worst = max(worst, -v, v - 1.0)
    return SuiteResult("rate-ranges", worst <= 0.0, worst,
                       f"max range violation over {draws} draws")


def suite_effort_monotonicity() -> SuiteResult:
    params = _params_het(0.5)
    grid = np.linspace(0.05, 6.0, 120)
    worst = math.inf
    for s0, s1 in zip(grid, grid[1:]):
        worst = min(worst,
                    rates.upsilon_homogeneous(s1, .015)
                    - rates.upsilon_homogeneous(s0, .015),
                    rates.psi_homogeneous(s1, .5, .015)
                    - rates.psi_homogeneous(s0, .5, .015))
        for e, e2 in (("h", "h"), ("l", "h"), ("l", "l")):
            if e == "h":
                p0 = SocializationProfile(s_h=s0, s_l=1.5)
                p1 = SocializationProfile(s_h=s1, s_l=1.5)
            else:
                p0 = SocializationProfile(s_h=1.5, s_l=s0)
                p1 = SocializationProfile(s_h=1.5, s_l=s1)
            worst = min(worst, rates.psi_het(e, e2, p1, params)
                        - rates.psi_het(e, e2, p0, params))
    return SuiteResult("effort-monotonicity", worst > 0.0, worst,
                       "min forward difference in own effort")


def suite_arrival_monotonicity() -> SuiteResult:
    """Fixed profile: every psi form strictly increasing in a, every
    upsilon form constant."""
    grid = [round(.05 + .01 * i, 10) for i in range(91)]
    tbl = sweep("a", grid, _params_het(0.5), model="heterogeneous",
                profile=_BENCH_PROFILE)
    min_diff = math.inf
    max_ups_var = 0.0
    for col in ("psi_hh", "psi_lh", "psi_ll", "psi_ll_consistent"):
        vals = tbl.column(col)
        min_diff = min(min_diff, min(b - a for a, b in zip(vals, vals[1:])))
    for col in ("ups_hh", "ups_hl", "ups_lh", "ups_ll"):
        vals = tbl.column(col)
        max_ups_var = max(max_ups_var, max(vals) - min(vals))
    passed = min_diff > 0.0 and max_ups_var == 0.0
    return SuiteResult("arrival-monotonicity", passed, min_diff,
                       f"min psi forward difference; ups variation "
                       f"{max_ups_var:.3e}")


def suite_limit_reduction(draws: int = 1000) -> SuiteResult:
    rng = np.random.default_rng(202)
    worst = 0.0
    for _ in range(draws):
        a = rng.uniform(.05, .95)
        d = rng.uniform(.005, .6)
        s = rng.uniform(.05, 5.0)
        other = rng.uniform(.05, 5.0)
        high = ModelParams(a=a, d=d, c=.01, h=1.0)
        low = ModelParams(a=a, d=d, c=.01, h=0.0)
        ph = SocializationProfile(s_h=s, s_l=other)
        pl = SocializationProfile(s_h=other, s_l=s)
        worst = max(
            worst,
            abs(rates.psi_het("h", "h", ph, high)
                - rates.psi_homogeneous(s, a, d)),
            abs(rates.upsilon_het("h", "h", ph, high)
                - rates.upsilon_homogeneous(s, d)),
            abs(rates.psi_het("l", "l", pl, low)
                - rates.psi_homogeneous(s, a, d)),
            abs(rates.psi_het("l", "l", pl, low, ll_form="consistent")
                - rates.psi_homogeneous(s, a, d)),
            abs(rates.upsilon_het("l", "l", pl, low)
                - rates.upsilon_homogeneous(s, d)),
            rates.upsilon_het("h", "l", ph, high),
            rates.psi_het("l", "h", pl, low),
        )
    return SuiteResult("limit-reduction", worst <= 1e-12, worst,
                       f"max deviation from one-type forms over {draws} draws")


def suite_deviation_consistency(draws: int = 250) -> SuiteResult:
    rng = np.random.default_rng(303)
    worst = 0.0
    for _ in range(draws):
        a = rng.uniform(.05, .95)
        d = rng.uniform(.005, .5)
        h = rng.uniform(.05, .95)
        s_h = rng.uniform(.05, 4.0)
        s_l = rng.uniform(.05, 4.0)
        params = ModelParams(a=a, d=d, c=.01, h=h, Y=2.0)
        profile = SocializationProfile(s_h=s_h, s_l=s_l)
        # consistency at the symmetric point
        worst = max(
            worst,
            abs(rates.psi_homogeneous_dev(s_h, s_h, a, d)
                - rates.psi_homogeneous(s_h, a, d)),
            abs(rates.psi_het_dev("h", "h", s_h, profile, params)
                - rates.psi_het("h", "h", profile, params)),
            abs(rates.psi_het_dev("l", "h", s_l, profile, params)
                - rates.psi_het("l", "h", profile, params)),
            abs(rates.psi_het_dev("l", "l", s_l, profile, params,
                                  ll_form="standard")
                - rates.psi_het("l", "l", profile, params,
                                ll_form="standard")),
            abs(rates.psi_het_dev("l", "l", s_l, profile, params,
                                  ll_form="consistent")
                - rates.psi_het("l", "l", profile, params,
                                ll_form="consistent")),
        )
        # analytic own-effort slope vs central differences
        agg = h * s_h + (1 - h) * s_l
        alpha = a * (1 - d) * h * (-math.expm1(-d * s_h)) / (d * agg)
        step = 1e-5 * max(1.0, s_h)
        fd = (rates.psi_het_dev("h", "h", s_h + step, profile, params)
              - rates.psi_het_dev("h", "h", s_h - step, profile, params)) \
            / (2 * step)
        analytic = alpha * math.exp(-alpha * s_h)
        worst = max(worst, abs(fd - analytic) / abs(analytic) * 1e-6)
    return SuiteResult("deviation-consistency", worst <= 1e-10, worst,
                       f"max symmetric-point gap over {draws} draws "
                       "(slope check folded in at 1e-6 scale)")


def suite_finite_market_convergence() -> SuiteResult:
    params0 = _params_het(0.5)
    profile = _BENCH_PROFILE
    general = ModelParams(a=.4, d=.02, c=.01, h=.6, Y=2.0)
    gprofile = SocializationProfile(s_h=2.0, s_l=1.0)
    worst = 0.0
    seqs = [
        # (description, phi args, target)
        ("hh printed, uniform profile", ("h", profile, params0, "printed"),
         rates.psi_het("h", "h", profile, params0)),
        ("hh corrected, general profile", ("h", gprofile, general, "corrected"),
         rates.psi_het("h", "h", gprofile, general)),
        ("ll, general profile", ("l", gprofile, general, "printed"),
         rates.psi_het("l", "l", gprofile, general, ll_form="consistent")),
    ]
    for _, (e, prof, base, variant), target in seqs:
        errors = []
        for n in (10_000, 40_000, 160_000, 1_000_000):
            p = base.with_(n=n)
            phi = rates.phi_finite_n(e, prof, p, hh_denominator=variant)
            errors.append(abs(1.0 - phi.value - target))
        if any(b >= a for a, b in zip(errors, errors[1:])):
            worst = max(worst, 1.0)
        worst = max(worst, errors[-1] / 1e-4)
    return SuiteResult("finite-market-convergence", worst < 1.0, worst,
                       "errors shrink along n and end below 1e-4 "
                       "(statistic is final error / 1e-4)")


def suite_existence_boundary() -> SuiteResult:
    worst = 0.0
    n_checked = 0
    for i in range(20):
        a = 0.05 + 0.9 * i / 19
        for j in range(20):
            c = 1e-4 + (5e-3 - 1e-4) * j / 19
            params = ModelParams(a=a, d=.015, c=c, V=1.0)
            threshold = eq.existence_threshold_homogeneous(params)
            if abs(c - threshold) < 1e-9:
                continue
            n_checked += 1
            res = eq.solve_homogeneous(params)
            ok = res.exists == (c < threshold)
            if not ok:
                worst = max(worst, 1.0)
    return SuiteResult("existence-boundary", worst == 0.0, worst,
                       f"mismatches on a {n_checked}-cell (a,c) grid")


def suite_foc_residuals() -> SuiteResult:
    grid = [round(.30 + .01 * i, 10) for i in range(41)]
    worst = 0.0
    for a in grid:
        res = eq.solve_homogeneous(_params_hom(a))
        worst = max(worst, (res.residual or 0.0) / 1e-10)
    tbl = sweep("a", grid, _params_het(0.5), model="heterogeneous")
    for row in tbl.rows:
        if row.get("error"):
            worst = max(worst, math.inf)
            continue
        if row["exists"]:
            worst = max(worst, row["residual_high"] / 1e-9,
                        row["residual_low"] / 1e-9)
    return SuiteResult("foc-residuals", worst <= 1.0, worst,
                       "max residual / tolerance across both benchmark grids")


def suite_implicit_derivative() -> SuiteResult:
    worst = 0.0
    for a in (.35, .45, .55, .65):
        params = _params_hom(a)
        analytic = eq.ds_da_implicit(eq.solve_homogeneous(params).s_star,
                                     params)

        def s_of(p: ModelParams) -> float | None:
            r = eq.solve_homogeneous(p, tol=1e-12)
            return r.s_star if r.exists else None

        fd = numeric_derivative(s_of, params, "a", step=1e-4)
        worst = max(worst, abs(analytic - fd) / abs(fd) / 1e-4)
    # unique sign flip across the existence region
    signs = []
    for i in range(91):
        a = .05 + .01 * i
        params = _params_hom(a)
        res = eq.solve_homogeneous(params)
        if res.exists:
            signs.append(1.0 if eq.ds_da_implicit(res.s_star, params) > 0
                         else -1.0)
    flips = sum(1 for x, y in zip(signs, signs[1:]) if x != y)
    if flips != 1 or signs[0] < 0 or signs[-1] > 0:
        worst = max(worst, math.inf)
    # the bracketed numerator factor vanishes at the flip threshold
    s_ref = eq.solve_homogeneous(_params_hom(0.5)).s_star
    a_thr = eq.a_bar(.015, s_ref)
    x = (1 - .015) * (-math.expm1(-s_ref * .015)) / .015
    residue = abs(1 - 2 * a_thr - a_thr * (1 - a_thr) * x)
    worst = max(worst, residue / 1e-12)
    return SuiteResult("implicit-derivative", worst <= 1.0, worst,
                       "relative FD gap / 1e-4, single sign flip, "
                       "threshold root residue / 1e-12")


def suite_low_foc_transcription(draws: int = 1000) -> SuiteResult:
    rng = np.random.default_rng(404)
    worst = 0.0
    for _ in range(draws):
        params = ModelParams(a=rng.uniform(.05, .95), d=rng.uniform(.005, .5),
                             c=.003, h=rng.uniform(.05, .95),
                             Y=rng.uniform(1.0, 3.0))
        s_h = rng.uniform(.05, 5.0)
        s_l = rng.uniform(.05, 5.0)
        try:
            eq.foc_low_lhs(s_l, s_h, params, verify=True, verify_tol=1e-6)
        except TranscriptionMismatchError:
            worst = max(worst, 1.0)
        # high-type condition against the utility derivative
        profile = SocializationProfile(s_h=s_h, s_l=s_l)
        step = min(1e-3 * max(1.0, s_h), 0.5 * s_h)
        d1 = (rates.expected_utility("h", s_h + step, profile, params)
              - rates.expected_utility("h", s_h - step, profile, params)) \
            / (2 * step)
        d2 = (rates.expected_utility("h", s_h + step / 2, profile, params)
              - rates.expected_utility("h", s_h - step / 2, profile, params)) \
            / step
        numeric = (4 * d2 - d1) / 3 + params.c
        analytic = eq.foc_high_lhs(s_h, s_l, params)
        worst = max(worst, abs(analytic - numeric) / abs(numeric) / 1e-6)
    return SuiteResult("low-foc-transcription", worst <= 1.0, worst,
                       f"relative mismatch / 1e-6 over {draws} draws, "
                       "both first-order conditions")


def suite_hump_shapes(restarts: int = 2) -> SuiteResult:
    grid = [round(.05 + .01 * i, 10) for i in range(91)]
    failures: list[str] = []
    worst = 0.0
    hom = sweep("a", grid, _params_hom(0.5), model="homogeneous")
    hom.rows = [r for r in hom.rows if r["exists"]]
    for col in ("s_star", "psi"):
        rep = detect_peak(hom, col)
        if rep.verdict != "single-peak":
            failures.append(f"one-type {col}: {rep.verdict}")
    rep = detect_peak(hom, "s_star")
    peak_params = _params_hom(rep.peak_axis_value)
    thr = eq.a_bar(peak_params.d, rep.peak_value)
    gap = abs(rep.peak_axis_value - thr)
    worst = max(worst, gap / 0.01)
    het = sweep("a", grid, _params_het(0.5), model="heterogeneous",
                restarts=restarts)
    het.rows = [r for r in het.rows if r.get("exists") and not r.get("error")]
    for col in ("s_h_star", "s_l_star", "psi_hh", "psi_l_total"):
        rep = detect_peak(het, col)
        if rep.verdict != "single-peak":
            failures.append(f"two-type {col}: {rep.verdict}")
    if failures:
        worst = math.inf
    return SuiteResult("hump-shapes", worst <= 1.0, worst,
                       "; ".join(failures) if failures else
                       "all six columns single-peaked; one-type peak within "
                       "one grid step of the closed-form threshold")


def suite_threshold_identities() -> SuiteResult:
    worst = 0.0
    params = _params_hom(0.5, V=1.0)
    thr = eq.existence_threshold_homogeneous(params)
    worst = max(worst, abs(thr - 0.00369375) / 1e-12 * 1e-6)
    lhs0 = eq.foc_homogeneous_lhs(1e-9, params)
    worst = max(worst, abs(lhs0 - thr) / thr / 1e-6)
    # symmetric in a <-> 1-a
    worst = max(worst, abs(
        eq.existence_threshold_homogeneous(_params_hom(0.3))
        - eq.existence_threshold_homogeneous(_params_hom(0.7))))
    # threshold for low types decreasing in s_h
    het = _params_het(0.5)
    grid = np.linspace(0.1, 10.0, 60)
    for s0, s1 in zip(grid, grid[1:]):
        if eq.existence_threshold_low(s1, het) >= \
                eq.existence_threshold_low(s0, het):
            worst = max(worst, math.inf)
    # flip threshold inside (0,1), limit 1/2 at tiny efforts
    rng = np.random.default_rng(505)
    for _ in range(200):
        ab = eq.a_bar(rng.uniform(.005, .9), rng.uniform(.01, 10.0))
        if not 0.0 < ab < 1.0:
            worst = max(worst, math.inf)
    worst = max(worst, abs(eq.a_bar(.015, 1e-9) - 0.5) / 1e-9 * 1e-3)
    return SuiteResult("threshold-identities", worst <= 1.0, worst,
                       "threshold arithmetic, small-effort limits, "
                       "monotone low-type bound")


# ---------------------------------------------------------------------------
# full-tier suites (Monte Carlo)
# ---------------------------------------------------------------------------

def suite_mc_homogeneous(seed: int, n: int, reps: int,
                         threads: int = 1) -> SuiteResult:
    params = ModelParams(a=.5, d=.015, c=.005, h=1.0)
    est = monte_carlo(n, reps, params, _BENCH_PROFILE, seed,
                      threads=threads)
    report = compare_to_closed_form(est, params, _BENCH_PROFILE)
    return SuiteResult("mc-homogeneous", report.passed, report.max_abs_z,
                       f"max |z| over channels at n={n}, reps={reps}")


def suite_mc_heterogeneous(seed: int, n: int, reps: int,
                           threads: int = 1) -> SuiteResult:
    params = ModelParams(a=.5, d=.015, c=.003, h=.8, Y=2.0)
    worst = 0.0
    ok = True
    for rule in ("psi-consistent", "upsilon-consistent"):
        est = monte_carlo(n, reps, params, _BENCH_PROFILE, seed,
                          pass_rule=rule, threads=threads)
        report = compare_to_closed_form(est, params, _BENCH_PROFILE)
        ok = ok and report.passed
        worst = max(worst, report.max_abs_z)
    return SuiteResult("mc-heterogeneous", ok, worst,
                       f"max |z| over applicable channels, both pass rules, "
                       f"n={n}, reps={reps}")


def suite_conflict_decay(seed: int, reps: int = 30,
                         threads: int = 1) -> SuiteResult:
    params = ModelParams(a=.5, d=.015, c=.005, h=1.0)
    rates_seq = []
    for n in (1000, 2000, 4000, 8000, 16000, 32000, 64000):
        est = monte_carlo(n, reps, params, _BENCH_PROFILE, seed,
                          threads=threads)
        rates_seq.append(est.conflict_rate)
    diffs = [b - a for a, b in zip(rates_seq, rates_seq[1:])]
    worst = max(diffs)
    return SuiteResult("conflict-decay", worst < 0.0, worst,
                       f"max forward difference of the conflict rate on the "
                       f"doubling sequence; rates {rates_seq}")


def suite_mc_determinism(seed: int, n: int = 2000, reps: int = 10) -> SuiteResult:
    params = ModelParams(a=.5, d=.015, c=.003, h=.8, Y=2.0)
    a = monte_carlo(n, reps, params, _BENCH_PROFILE, seed, threads=1)
    b = monte_carlo(n, reps, params, _BENCH_PROFILE, seed, threads=4)
    same = a.summary_json() == b.summary_json() \
        and a.replication_csv() == b.replication_csv()
    return SuiteResult("mc-determinism", same, 0.0 if same else 1.0,
                       "thread-count independence of pooled estimates")


def run_suites(full: bool = False, seed: int = 20240, mc_n: int = 20000,
               mc_reps: int = 200, threads: int = 1) -> list[SuiteResult]:
    results = [
        suite_rate_ranges(),
        suite_effort_monotonicity(),
        suite_arrival_monotonicity(),
        suite_limit_reduction(),
        suite_deviation_consistency(),
        suite_finite_market_convergence(),
        suite_existence_boundary(),
        suite_foc_residuals(),
        suite_implicit_derivative(),
        suite_low_foc_transcription(),
        suite_hump_shapes(),
        suite_threshold_identities(),
    ]
    if full:
        results.extend([
            suite_mc_homogeneous(seed, mc_n, mc_reps, threads),
            suite_mc_heterogeneous(seed + 1, mc_n, mc_reps, threads),
            suite_conflict_decay(seed + 2, threads=threads),
            suite_mc_determinism(seed + 3),
        ])
    return results


def render_report(results: list[SuiteResult]) -> str:
    name_w = max(len(r.name) for r in results)
    lines = [f"{'suite':<{name_w}}  result  worst-statistic  detail"]
    for r in results:
        status = "pass" if r.passed else "FAIL"
        worst = "inf" if math.isinf(r.worst) else f"{r.worst:.6g}"
        lines.append(f"{r.name:<{name_w}}  {status:<6}  {worst:<15}  {r.detail}")
    overall = "pass" if all(r.passed for r in results) else "FAIL"
    lines.append(f"overall: {overall}")
    return "\n".join(lines) + "\n"
