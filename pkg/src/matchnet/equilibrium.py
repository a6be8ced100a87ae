"""Equilibrium solvers: one-type bisection, two-type damped alternation.

The one-type first-order condition has a strictly decreasing left side
with known limits (the existence threshold at 0+, zero at infinity), so
plain bisection on a doubling bracket is exact and certified.

The two-type system pairs a hump-shaped high-type condition (zero at
both ends of the effort axis) with a decreasing low-type condition.
The inner 1-D solves therefore target the *rightmost* crossing (the
decreasing branch, where marginal returns fall through marginal cost);
the outer loop is damped Gauss-Seidel alternation with a 2-D Newton
polish once the iterates settle.  Existence is proved, uniqueness is
not, so the solver multi-starts from a coarse grid and reports every
distinct root it finds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import (
    InvariantViolationError,
    ParameterError,
    SolverFailureError,
    TranscriptionMismatchError,
)
from .params import ModelParams, SocializationProfile
from .rates import expected_utility

_exp = math.exp


def _em1(x: float) -> float:
    return -math.expm1(-x)


# ---------------------------------------------------------------------------
# one-type model
# ---------------------------------------------------------------------------

def existence_threshold_homogeneous(params: ModelParams) -> float:
    """Cost bound below which an interior one-type equilibrium exists.

    V * a * d * (1-a) * (1-d); symmetric in a <-> 1-a and vanishing at
    every parameter boundary.
    """
    return params.V * params.a * params.d * (1.0 - params.a) * (1.0 - params.d)


def foc_homogeneous_lhs(s: float, params: ModelParams) -> float:
    """Marginal network return of the one-type model at symmetric effort s.

    V * d(1-a) * [a(1-d)/(d s)] * (1 - e^{-s d}) * exp(-(a(1-d)/d)(1 - e^{-s d}))

    Strictly decreasing in s; tends to the existence threshold as s -> 0
    and to 0 as s -> infinity.
    """
    if s <= 0:
        raise ParameterError(f"s must be > 0, got {s}")
    a, d = params.a, params.d
    g = _em1(s * d)
    return params.V * d * (1.0 - a) * (a * (1.0 - d) / (d * s)) * g \
        * _exp(-a * (1.0 - d) / d * g)


@dataclass(frozen=True)
class EquilibriumResult:
    """Solved investment(s) plus solver diagnostics.

    One-type solves fill ``s_star``/``residual``; two-type solves fill
    the ``s_h_star``/``s_l_star`` pair, both residuals, and
    ``multiplicity`` (every distinct root found, sorted).  ``exists``
    is False for the no-investment outcome, in which case efforts are 0
    and residuals None.
    """

    exists: bool
    threshold: float
    iterations: int
    s_star: float | None = None
    residual: float | None = None
    bracket: tuple[float, float] | None = None
    s_h_star: float | None = None
    s_l_star: float | None = None
    residual_high: float | None = None
    residual_low: float | None = None
    multiplicity: tuple[tuple[float, float], ...] = field(default_factory=tuple)


def solve_homogeneous(params: ModelParams, tol: float = 1e-10) -> EquilibriumResult:
    """Solve the one-type first-order condition by certified bisection.

    Returns the zero-investment outcome (exists=False) when the cost is
    at or above the existence threshold; otherwise brackets the unique
    root by doubling from s=1 and bisects until the bracket width falls
    below 1e-12 or the residual below ``tol``, whichever comes first.
    """
    if tol <= 0:
        raise ParameterError(f"tol must be > 0, got {tol}")
    threshold = existence_threshold_homogeneous(params)
    c = params.c
    if c >= threshold:
        return EquilibriumResult(exists=False, threshold=threshold,
                                 iterations=0, s_star=0.0)
    lo = 1e-12
    hi = 1.0
    doublings = 0
    while foc_homogeneous_lhs(hi, params) > c:
        hi *= 2.0
        doublings += 1
        if doublings > 200:
            raise SolverFailureError(
                "upper bracket not found; the marginal return failed to "
                f"fall below c={c} by s={hi}")
    bracket = (lo, hi)
    iterations = 0
    while hi - lo > 1e-12:
        iterations += 1
        mid = 0.5 * (lo + hi)
        val = foc_homogeneous_lhs(mid, params)
        if abs(val - c) <= tol:
            lo = hi = mid
            break
        if val > c:
            lo = mid
        else:
            hi = mid
        if iterations > 300:
            raise SolverFailureError("bisection failed to converge")
    s_star = 0.5 * (lo + hi)
    residual = abs(foc_homogeneous_lhs(s_star, params) - c)
    if residual > tol:
        raise SolverFailureError(
            f"bisection converged to s={s_star} with residual {residual} > {tol}")
    return EquilibriumResult(exists=True, threshold=threshold,
                             iterations=iterations, s_star=s_star,
                             residual=residual, bracket=bracket)


def a_bar(d: float, s_star: float) -> float:
    """Arrival rate at which the sign of ds*/da flips.

    Root in [0, 1] of 1 - 2a - a(1-a)x = 0 with
    x = (1-d)(1 - e^{-s* d})/d.  Evaluated in the rationalized form
    2/(2 + x + sqrt(4 + x^2)), which is algebraically identical to
    (2 + x - sqrt(4 + x^2))/(2x) and stable as x -> 0 (limit 1/2).
    """
    if not 0.0 < d < 1.0:
        raise ParameterError(f"d must be in (0,1), got {d}")
    if s_star <= 0:
        raise ParameterError(f"s_star must be > 0, got {s_star}")
    x = (1.0 - d) * _em1(s_star * d) / d
    return 2.0 / (2.0 + x + math.hypot(2.0, x))


def ds_da_implicit(s_star: float, params: ModelParams) -> float:
    """Implicit derivative of the one-type equilibrium effort in a.

        (1 - e^{-s d}) [1 - 2a - a(1-a) x]
        ----------------------------------------------------------,
        a(1-a) [(a(1-d)e^{-s d} + 1/s)(1 - e^{-s d}) - d e^{-s d}]

    with x = (1-d)(1 - e^{-s d})/d.  The denominator is provably
    positive at an interior equilibrium; a non-positive value raises
    :class:`InvariantViolationError`.
    """
    if s_star <= 0:
        raise ParameterError(f"s_star must be > 0, got {s_star}")
    a, d = params.a, params.d
    g = _em1(s_star * d)
    e = _exp(-s_star * d)
    x = (1.0 - d) * g / d
    num = g * (1.0 - 2.0 * a - a * (1.0 - a) * x)
    den = a * (1.0 - a) * ((a * (1.0 - d) * e + 1.0 / s_star) * g - d * e)
    if den <= 0.0:
        raise InvariantViolationError(
            f"implicit-derivative denominator must be positive, got {den}")
    return num / den


# ---------------------------------------------------------------------------
# two-type first-order conditions
# ---------------------------------------------------------------------------

def foc_high_lhs(s_h: float, s_l: float, params: ModelParams) -> float:
    """High-type marginal network return at a symmetric two-type profile.

        (1-a) a (1-d) h Y (1 - e^{-d s_h})
        ---------------------------------- * exp(-a(1-d) h s_h (1-e^{-d s_h}) / (d agg))
                    agg

    with agg = h s_h + (1-h) s_l.  Hump-shaped in s_h: tends to 0 at
    both 0 and infinity.
    """
    if s_h <= 0 or s_l <= 0:
        raise ParameterError(f"efforts must be > 0, got s_h={s_h}, s_l={s_l}")
    a, d, h, Y = params.a, params.d, params.h, params.Y
    agg = h * s_h + (1.0 - h) * s_l
    g = _em1(d * s_h)
    return (1.0 - a) * a * (1.0 - d) * h * Y * g / agg \
        * _exp(-a * (1.0 - d) * h * s_h * g / (d * agg))


def foc_low_lhs(s_l: float, s_h: float, params: ModelParams,
                verify: bool = False, verify_tol: float = 1e-6) -> float:
    """Low-type marginal network return at a symmetric two-type profile.

    Transcribed term by term from its source expression (prefactor,
    exponential factor, five-term bracket) with the deviator's effort
    already set to the symmetric low effort.  Because the expression is
    long enough to invite transcription slips, ``verify=True``
    cross-checks it against Richardson-extrapolated central differences
    of the low-type expected utility (gross of cost) and raises
    :class:`TranscriptionMismatchError` on relative disagreement beyond
    ``verify_tol``.
    """
    if s_l <= 0 or s_h <= 0:
        raise ParameterError(f"efforts must be > 0, got s_h={s_h}, s_l={s_l}")
    a, d, h, Y = params.a, params.d, params.h, params.Y
    agg = h * (s_h - s_l) + s_l                      # == h s_h + (1-h) s_l
    q = d * (1.0 - h) * s_l * s_l / agg              # e^{d(h-1)s_l^2/agg} = e^{-q}
    g_h = _em1(d * s_h)
    prefactor = -(a - 1.0) * a * (d - 1.0) / (s_l * agg)
    # exponent of the leading exponential factor, divided by d
    w = a * (d - 1.0) * math.expm1(-q) / d           # (d-1)(e^{-q}-1)/d * a
    x_over_d = w + a * (1.0 - d) * h * s_l * g_h / (d * agg) + d * s_h
    bracket = (
        -h * s_l * (Y - 1.0) * _exp(w + d * s_h)
        + h * s_l * (Y - 1.0) * _exp(w)
        + agg * _exp(d * ((h - 1.0) * s_l * s_l / agg + s_h))
        - _exp(d * s_h) * (h * s_h + s_l)
        + h * s_l
    )
    lhs = prefactor * _exp(-x_over_d) * bracket
    if verify:
        profile = SocializationProfile(s_h=s_h, s_l=s_l)
        # the exponent coefficients are bounded by a(1-d) < 1, so a
        # milli-scale step keeps truncation negligible while dividing
        # the utility's rounding noise by far less than a tiny step would
        step = min(1e-3 * max(1.0, s_l), 0.5 * s_l)

        def gross(si: float) -> float:
            return expected_utility("l", si, profile, params) + params.c * si

        d1 = (gross(s_l + step) - gross(s_l - step)) / (2.0 * step)
        d2 = (gross(s_l + 0.5 * step) - gross(s_l - 0.5 * step)) / step
        numeric = (4.0 * d2 - d1) / 3.0
        rel = abs(lhs - numeric) / max(abs(numeric), 1e-300)
        if rel > verify_tol:
            raise TranscriptionMismatchError(
                f"low-type marginal return {lhs!r} disagrees with the "
                f"numerical utility derivative {numeric!r} "
                f"(relative error {rel:.3e} > {verify_tol:g}) at "
                f"s_l={s_l}, s_h={s_h}, {params}")
    return lhs


def existence_threshold_low(s_h: float, params: ModelParams) -> float:
    """Limit of the low-type marginal return as own effort vanishes.

    a(1-a)(1-d) Y (1 - e^{-d s_h}) / s_h; decreasing in s_h.  An
    interior low-type best response exists iff c lies below it.
    """
    if s_h <= 0:
        raise ParameterError(f"s_h must be > 0, got {s_h}")
    a, d, Y = params.a, params.d, params.Y
    return a * (1.0 - a) * (1.0 - d) * Y * _em1(d * s_h) / s_h


# ---------------------------------------------------------------------------
# two-type solver
# ---------------------------------------------------------------------------

_SCAN_LO = 1e-8
_SCAN_HI = 1e6
_SCAN_POINTS = 48
_START_GRID = (0.1, 0.5, 1.0, 2.0, 5.0)


def _rightmost_root(f, c: float) -> float | None:
    """Rightmost s with f(s) = c, for f that is positive and eventually
    decreasing through c (hump-shaped or decreasing).  None if f stays
    below c everywhere."""
    lo_exp = math.log(_SCAN_LO)
    hi_exp = math.log(_SCAN_HI)
    grid = [math.exp(lo_exp + (hi_exp - lo_exp) * i / (_SCAN_POINTS - 1))
            for i in range(_SCAN_POINTS)]
    vals = [f(s) for s in grid]
    idx = None
    for i in range(_SCAN_POINTS - 1):
        if vals[i] > c >= vals[i + 1]:
            idx = i
    if idx is None:
        if vals[-1] > c:
            # decreasing branch not yet reached: extend upward
            lo, hi = grid[-1], grid[-1] * 2.0
            for _ in range(200):
                if f(hi) <= c:
                    return _bisect_decreasing(f, c, lo, hi)
                lo, hi = hi, hi * 2.0
            return None
        # the scan may have straddled a narrow hump: locate the max
        s_peak, f_peak = _log_ternary_max(f, _SCAN_LO, _SCAN_HI)
        if f_peak <= c:
            return None
        lo, hi = s_peak, s_peak * 2.0
        for _ in range(200):
            if f(hi) <= c:
                return _bisect_decreasing(f, c, lo, hi)
            lo, hi = hi, hi * 2.0
        return None
    return _bisect_decreasing(f, c, grid[idx], grid[idx + 1])


def _bisect_decreasing(f, c: float, lo: float, hi: float) -> float:
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if f(mid) > c:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def _log_ternary_max(f, lo: float, hi: float) -> tuple[float, float]:
    a_, b_ = math.log(lo), math.log(hi)
    for _ in range(120):
        m1 = a_ + (b_ - a_) / 3.0
        m2 = b_ - (b_ - a_) / 3.0
        if f(math.exp(m1)) < f(math.exp(m2)):
            a_ = m1
        else:
            b_ = m2
    s = math.exp(0.5 * (a_ + b_))
    return s, f(s)


def _gauss_seidel(params: ModelParams, start: tuple[float, float],
                  tol: float, damping: float = 0.5,
                  max_outer: int = 10_000) -> tuple[float, float, int] | None:
    """Damped alternation of the two 1-D solves; Newton polish once the
    iterates settle.  Returns (s_h, s_l, outer iterations) or None."""
    c = params.c
    s_h, s_l = start

    def res(sh: float, sl: float) -> float:
        return max(abs(foc_high_lhs(sh, sl, params) - c),
                   abs(foc_low_lhs(sl, sh, params) - c))

    for it in range(1, max_outer + 1):
        nh = _rightmost_root(lambda s: foc_high_lhs(s, s_l, params), c)
        if nh is None:
            return None
        nl = _rightmost_root(lambda s: foc_low_lhs(s, nh, params), c)
        if nl is None:
            return None
        new_h = s_h + damping * (nh - s_h)
        new_l = s_l + damping * (nl - s_l)
        step = max(abs(new_h - s_h), abs(new_l - s_l))
        s_h, s_l = new_h, new_l
        if res(s_h, s_l) <= tol:
            return s_h, s_l, it
        if step < 1e-3 * max(1.0, s_h, s_l):
            # iterates have settled: quadratic polish
            polished = _newton_polish(params, s_h, s_l, tol)
            if polished is not None:
                return polished[0], polished[1], it
    return None


def _newton_polish(params: ModelParams, s_h: float, s_l: float,
                   tol: float, max_iter: int = 60) -> tuple[float, float] | None:
    c = params.c
    for _ in range(max_iter):
        f1 = foc_high_lhs(s_h, s_l, params) - c
        f2 = foc_low_lhs(s_l, s_h, params) - c
        if max(abs(f1), abs(f2)) <= tol:
            return s_h, s_l
        eh = 1e-7 * max(1.0, s_h)
        el = 1e-7 * max(1.0, s_l)
        j11 = (foc_high_lhs(s_h + eh, s_l, params)
               - foc_high_lhs(s_h - eh, s_l, params)) / (2.0 * eh)
        j12 = (foc_high_lhs(s_h, s_l + el, params)
               - foc_high_lhs(s_h, s_l - el, params)) / (2.0 * el)
        j21 = (foc_low_lhs(s_l, s_h + eh, params)
               - foc_low_lhs(s_l, s_h - eh, params)) / (2.0 * eh)
        j22 = (foc_low_lhs(s_l + el, s_h, params)
               - foc_low_lhs(s_l - el, s_h, params)) / (2.0 * el)
        det = j11 * j22 - j12 * j21
        if det == 0.0 or not math.isfinite(det):
            return None
        dh = (f1 * j22 - f2 * j12) / det
        dl = (j11 * f2 - j21 * f1) / det
        # keep iterates strictly positive
        new_h = s_h - dh
        new_l = s_l - dl
        if new_h <= 0 or new_l <= 0 or not math.isfinite(new_h + new_l):
            return None
        s_h, s_l = new_h, new_l
    return None


def solve_heterogeneous(params: ModelParams, tol: float = 1e-9,
                        restarts: int = 25) -> EquilibriumResult:
    """Solve the two-type first-order-condition system.

    Multi-starts damped Gauss-Seidel from (at most ``restarts`` points
    of) the coarse grid {0.1, 0.5, 1, 2, 5}^2 and collects every
    distinct root; existence is guaranteed for low enough cost but
    uniqueness is not, so ``multiplicity`` reports all roots found.
    The returned point is the root reached from the largest number of
    starts (ties broken lexicographically).

    When no start converges, the cost is compared against numerically
    estimated upper bounds of both marginal returns: above them the
    zero-investment outcome is returned (exists=False), below them a
    :class:`SolverFailureError` is raised, since a root should have
    been found.
    """
    if not 0.0 < params.h < 1.0:
        raise ParameterError(
            f"the two-type solver requires h in (0,1), got {params.h}")
    if tol <= 0:
        raise ParameterError(f"tol must be > 0, got {tol}")
    if restarts < 1:
        raise ParameterError(f"restarts must be >= 1, got {restarts}")
    starts = [(sh, sl) for sh in _START_GRID for sl in _START_GRID][:restarts]
    roots: list[tuple[float, float]] = []
    hits: list[int] = []
    total_iters = 0
    for start in starts:
        sol = _gauss_seidel(params, start, tol)
        if sol is None:
            continue
        s_h, s_l, iters = sol
        total_iters += iters
        for k, (rh, rl) in enumerate(roots):
            if (abs(rh - s_h) <= 1e-6 * max(1.0, rh)
                    and abs(rl - s_l) <= 1e-6 * max(1.0, rl)):
                hits[k] += 1
                break
        else:
            roots.append((s_h, s_l))
            hits.append(1)
    c = params.c
    if not roots:
        cap_high, cap_low = _foc_caps(params)
        threshold = min(cap_high, cap_low)
        if c >= threshold * (1.0 - 1e-12):
            return EquilibriumResult(exists=False, threshold=threshold,
                                     iterations=total_iters,
                                     s_h_star=0.0, s_l_star=0.0)
        raise SolverFailureError(
            f"no two-type root found from {len(starts)} starts although "
            f"c={c} lies below the estimated marginal-return caps "
            f"(high {cap_high:.3e}, low {cap_low:.3e})")
    best = max(range(len(roots)), key=lambda k: (hits[k], -roots[k][0], -roots[k][1]))
    s_h, s_l = roots[best]
    res_h = abs(foc_high_lhs(s_h, s_l, params) - c)
    res_l = abs(foc_low_lhs(s_l, s_h, params) - c)
    multiplicity = tuple(sorted(roots))
    return EquilibriumResult(
        exists=True,
        threshold=existence_threshold_low(s_h, params),
        iterations=total_iters,
        s_h_star=s_h, s_l_star=s_l,
        residual_high=res_h, residual_low=res_l,
        multiplicity=multiplicity,
    )


def _foc_caps(params: ModelParams) -> tuple[float, float]:
    """Numeric sups of both marginal returns over a coarse effort grid.

    Only used for the existence verdict when no root is found; the
    high-type cap has no closed form and is estimated as a maximum over
    profiles.
    """
    grid = [10.0 ** k for k in range(-4, 4)]
    cap_high = 0.0
    cap_low = 0.0
    for sh in grid:
        cap_low = max(cap_low, existence_threshold_low(sh, params))
        for sl in grid:
            cap_high = max(cap_high, foc_high_lhs(sh, sl, params))
    return cap_high, cap_low
