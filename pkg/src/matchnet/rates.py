"""Closed-form meeting rates, finite-market products, and expected utilities.

Conventions used throughout:

* ``em1(x)`` evaluates ``1 - exp(-x)`` via ``expm1`` — the exponents of
  interest are tiny at realistic divorce rates (d ~ .015), where the
  naive form loses digits.
* The aggregate per-capita effort is ``agg = h*s_h + (1-h)*s_l``; every
  heterogeneous rate shares this denominator.
* All rates are probabilities of having access to *at least one*
  introduction of the stated kind, conditional on the channel's own
  conditioning event (they are not additive across channels).

There are two circulating closed forms for the low-with-low network
rate ``psi_ll``.  The *standard* form reads (in the exponent)
``a(1-d)(1-h)s_l/(d*agg) * (1 - e^{-q})``; the *consistent* form reads
``a(1-d)/d * (1 - e^{-q})``, with ``q = d(1-h)s_l^2/agg`` in both.  Only
the consistent form agrees with the finite-market product
(:func:`phi_finite_n`), with the low-type first-order condition, and
with pass-along mechanics in which low dates are offered to low singles
only (so the competition pool is own-type).  Functions with an
``ll_form`` switch expose both; utilities and solver code use
``"consistent"``, reporting surfaces default to ``"standard"``.
"""
from __future__ import annotations

import math
from typing import Literal

from .errors import (
    ConfigurationError,
    DegenerateProfileError,
    ParameterError,
    UnsupportedVariantError,
)
from .params import (
    LinkProbability,
    MatchingRates,
    ModelParams,
    SocializationProfile,
    TypeRates,
)

Education = Literal["h", "l"]
LLForm = Literal["standard", "consistent"]


def _em1(x: float) -> float:
    """1 - exp(-x), accurate for small x."""
    return -math.expm1(-x)


def _check_type(e: str) -> None:
    if e not in ("h", "l"):
        raise ParameterError(f"education type must be 'h' or 'l', got {e!r}")


def aggregate_effort(profile: SocializationProfile, params: ModelParams) -> float:
    """Per-capita aggregate effort h*s_h + (1-h)*s_l."""
    return params.h * profile.s_h + (1.0 - params.h) * profile.s_l


# ---------------------------------------------------------------------------
# link technology
# ---------------------------------------------------------------------------

def link_probability(s_i: float, s_j: float, aggregate: float,
                     n: int) -> LinkProbability:
    """Pairwise link probability min(s_i*s_j/aggregate, 1).

    ``aggregate`` is the total same-gender effort.  Returns 0 on a
    degenerate (zero) aggregate, per the piecewise definition of the
    link technology.  ``n`` is accepted for interface symmetry with the
    finite-market operations and only validated.
    """
    if aggregate < 0:
        raise ParameterError(f"aggregate effort must be >= 0, got {aggregate}")
    if n < 2:
        raise ParameterError(f"population size must be >= 2, got {n}")
    if aggregate == 0.0 or s_i == 0.0 or s_j == 0.0:
        return LinkProbability(0.0, False)
    raw = s_i * s_j / aggregate
    if raw > 1.0:
        return LinkProbability(1.0, True)
    return LinkProbability(raw, False)


def pair_link_prob(e: Education, e_other: Education,
                   profile: SocializationProfile,
                   params: ModelParams) -> LinkProbability:
    """Type-pair link probability s_e*s_e'/(n*agg); symmetric in (e, e')."""
    _check_type(e)
    _check_type(e_other)
    if params.n is None:
        raise ConfigurationError("pair_link_prob requires params.n to be set")
    agg = aggregate_effort(profile, params)
    return link_probability(profile.effort(e), profile.effort(e_other),
                            params.n * agg, params.n)


# ---------------------------------------------------------------------------
# one-type closed forms
# ---------------------------------------------------------------------------

def upsilon_homogeneous(s: float, d: float) -> float:
    """One-type rate of meeting a friend of a married direct date: 1 - e^{-s d}.

    Independent of the direct arrival rate.
    """
    if s < 0:
        raise ParameterError(f"s must be >= 0, got {s}")
    return _em1(s * d)


def psi_homogeneous(s: float, a: float, d: float) -> float:
    """One-type network matching rate 1 - exp(-(a(1-d)/d)(1 - e^{-s d}))."""
    if s < 0:
        raise ParameterError(f"s must be >= 0, got {s}")
    return _em1(a * (1.0 - d) / d * _em1(s * d))


def psi_homogeneous_dev(s_i: float, s: float, a: float, d: float) -> float:
    """Deviation form of the one-type network rate.

    Own effort enters the exponent linearly through the deviator's link
    probabilities: 1 - exp(-(a(1-d)/(d s)) s_i (1 - e^{-s d})).  Equals
    :func:`psi_homogeneous` at ``s_i == s``.
    """
    if s_i < 0:
        raise ParameterError(f"s_i must be >= 0, got {s_i}")
    if s <= 0:
        raise DegenerateProfileError(
            "deviation form undefined at zero symmetric effort")
    return _em1(a * (1.0 - d) / (d * s) * s_i * _em1(s * d))


# ---------------------------------------------------------------------------
# two-type closed forms
# ---------------------------------------------------------------------------

def _aggregate_or_raise(profile: SocializationProfile,
                        params: ModelParams) -> float:
    agg = aggregate_effort(profile, params)
    if agg <= 0.0:
        raise DegenerateProfileError(
            f"aggregate effort must be > 0, got {agg}")
    return agg


def upsilon_het(e: Education, e_other: Education,
                profile: SocializationProfile, params: ModelParams) -> float:
    """Two-type rate of being introduced to a friend of a married date.

    ups_hh = 1 - exp(-d h s_h^2/agg); the low-low analogue swaps the
    type share and effort; the cross rates are equal by construction,
    ups_hl = ups_lh = 1 - exp(-d (1-h) s_h s_l/agg).
    """
    _check_type(e)
    _check_type(e_other)
    agg = _aggregate_or_raise(profile, params)
    d, h = params.d, params.h
    if e == "h" and e_other == "h":
        return _em1(d * h * profile.s_h ** 2 / agg)
    if e == "l" and e_other == "l":
        return _em1(d * (1.0 - h) * profile.s_l ** 2 / agg)
    return _em1(d * (1.0 - h) * profile.s_h * profile.s_l / agg)


def _psi_ll_inner(profile: SocializationProfile, params: ModelParams,
                  agg: float) -> float:
    # q = d (1-h) s_l^2 / agg: exponent of the own-type competition pool
    return params.d * (1.0 - params.h) * profile.s_l ** 2 / agg


def psi_het(e: Education, e_other: Education,
            profile: SocializationProfile, params: ModelParams,
            ll_form: LLForm = "standard") -> float:
    """Two-type network matching rate through own married friends.

    psi_hh = 1 - exp(-(a(1-d) h s_h/(d agg))(1 - e^{-d s_h}))
    psi_lh = 1 - exp(-(a(1-d) h s_l/(d agg))(1 - e^{-d s_h}))
    psi_hl = 0 (low dates are never passed to high friends)
    psi_ll has two forms; see the module docstring.
    """
    _check_type(e)
    _check_type(e_other)
    if e == "h" and e_other == "l":
        return 0.0
    agg = _aggregate_or_raise(profile, params)
    a, d, h = params.a, params.d, params.h
    if e_other == "h":
        own = profile.s_h if e == "h" else profile.s_l
        return _em1(a * (1.0 - d) * h * own / (d * agg) * _em1(d * profile.s_h))
    # (l, l)
    inner = _em1(_psi_ll_inner(profile, params, agg))
    if ll_form == "standard":
        return _em1(a * (1.0 - d) * (1.0 - h) * profile.s_l / (d * agg) * inner)
    if ll_form == "consistent":
        return _em1(a * (1.0 - d) / d * inner)
    raise UnsupportedVariantError(f"unknown ll_form {ll_form!r}")


def psi_het_dev(e: Education, e_other: Education, s_i: float,
                profile: SocializationProfile, params: ModelParams,
                ll_form: LLForm = "consistent") -> float:
    """Deviation forms of the two-type network rates.

    The deviator's effort replaces the single own-effort factor in the
    exponent (the factor coming from the deviator's own link
    probabilities); the aggregate is population-level and unaffected by
    one individual.  At ``s_i`` equal to the own-type symmetric effort
    each form reduces to :func:`psi_het` with the same ``ll_form``.
    """
    _check_type(e)
    _check_type(e_other)
    if s_i < 0:
        raise ParameterError(f"s_i must be >= 0, got {s_i}")
    if e == "h" and e_other == "l":
        return 0.0
    agg = _aggregate_or_raise(profile, params)
    a, d, h = params.a, params.d, params.h
    if e_other == "h":
        return _em1(a * (1.0 - d) * h * s_i / (d * agg) * _em1(d * profile.s_h))
    inner = _em1(_psi_ll_inner(profile, params, agg))
    if ll_form == "standard":
        return _em1(a * (1.0 - d) * (1.0 - h) * s_i / (d * agg) * inner)
    if ll_form == "consistent":
        if profile.s_l <= 0:
            raise DegenerateProfileError(
                "deviation form undefined at zero low-type effort")
        return _em1(a * (1.0 - d) * s_i / (d * profile.s_l) * inner)
    raise UnsupportedVariantError(f"unknown ll_form {ll_form!r}")


def matching_rates(profile: SocializationProfile, params: ModelParams,
                   ll_form: LLForm = "standard") -> MatchingRates:
    """All eight channel probabilities at a symmetric profile."""
    return MatchingRates(
        psi_hh=psi_het("h", "h", profile, params),
        psi_lh=psi_het("l", "h", profile, params),
        psi_ll=psi_het("l", "l", profile, params, ll_form=ll_form),
        psi_hl=0.0,
        ups_hh=upsilon_het("h", "h", profile, params),
        ups_hl=upsilon_het("h", "l", profile, params),
        ups_lh=upsilon_het("l", "h", profile, params),
        ups_ll=upsilon_het("l", "l", profile, params),
    )


# ---------------------------------------------------------------------------
# finite-market products
# ---------------------------------------------------------------------------

class FiniteMarketRate:
    """Value of a finite-n miss probability plus a clip warning flag."""

    __slots__ = ("value", "clipped")

    def __init__(self, value: float, clipped: bool):
        self.value = value
        self.clipped = clipped

    def __repr__(self) -> str:  # pragma: no cover
        return f"FiniteMarketRate(value={self.value!r}, clipped={self.clipped})"


def phi_finite_n(e: Education, profile: SocializationProfile,
                 params: ModelParams,
                 hh_denominator: Literal["printed", "corrected"] = "printed",
                 ) -> FiniteMarketRate:
    """Finite-n probability of meeting nobody of type ``e`` through friends.

    ``1 - phi`` converges to the corresponding network rate as n grows:
    the high-high product converges to ``psi_het('h','h', ...)`` and the
    low-low product to ``psi_het('l','l', ..., ll_form='consistent')``.

    The high-high product's pick denominator carries ``(1-h) n p_ll``
    in its source form although the derivation structure calls for
    ``p_hl``; ``hh_denominator`` selects between the two.  The variants
    agree (and share the closed-form limit) whenever ``s_h == s_l`` or
    ``h`` is 0 or 1; the ``"corrected"`` variant converges to the
    closed form for every profile.
    """
    _check_type(e)
    if params.n is None:
        raise ConfigurationError("phi_finite_n requires params.n to be set")
    if hh_denominator not in ("printed", "corrected"):
        raise UnsupportedVariantError(
            f"unknown hh_denominator {hh_denominator!r}")
    n = params.n
    a, d, h = params.a, params.d, params.h
    p_hh = pair_link_prob("h", "h", profile, params)
    p_hl = pair_link_prob("h", "l", profile, params)
    p_ll = pair_link_prob("l", "l", profile, params)
    clipped = p_hh.clipped or p_hl.clipped or p_ll.clipped
    if e == "h":
        px = p_ll.value if hh_denominator == "printed" else p_hl.value
        den = d * (h * (n - 1) * p_hh.value + (1.0 - h) * n * px)
        if den == 0.0 or p_hh.value == 0.0:
            return FiniteMarketRate(1.0, clipped)
        num = 1.0 - (1.0 - p_hh.value) ** (d * h * n) \
            * (1.0 - p_hl.value) ** (d * (1.0 - h) * n)
        base = 1.0 - p_hh.value * num / den
        return FiniteMarketRate(base ** (a * (1.0 - d) * h * n), clipped)
    # e == "l": own-type competition pool only
    den = d * (1.0 - h) * n * p_ll.value
    if den == 0.0 or p_ll.value == 0.0:
        return FiniteMarketRate(1.0, clipped)
    num = 1.0 - (1.0 - p_ll.value) ** (d * (1.0 - h) * n)
    base = 1.0 - p_ll.value * num / den
    return FiniteMarketRate(base ** (a * (1.0 - d) * (1.0 - h) * n), clipped)


# ---------------------------------------------------------------------------
# expected utilities
# ---------------------------------------------------------------------------

def expected_utility(kind: Literal["h", "l", "homogeneous"], s_i: float,
                     profile: SocializationProfile, params: ModelParams,
                     ll_form: LLForm = "consistent") -> float:
    """Expected utility of an individual investing ``s_i`` against ``profile``.

    One-type model (all marriage terms scaled by V; V = 1 recovers the
    normalized payoffs)::

        (1-d)V + d^2 a V + d a (1-d) V ups(s) + d (1-a) V psi(s_i, s) - c s_i

    Two-type model: own effort enters only the psi terms (the ups rates
    depend on the date's friends, not on the deviator), so s_i is
    substituted in the psi deviation forms only::

        EU_h = (1-d)Y + d^2 a Y + d a (1-d)[ups_hh Y + ups_hl]
               + d (1-a) psi_hh(s_i) Y - c s_i
        EU_l = (1-d) + d^2 a + d a (1-d)[ups_lh Y + ups_ll]
               + d (1-a)[psi_lh(s_i) Y + (1 - psi_lh(s_i)) psi_ll(s_i)] - c s_i

    The high-type cross term enters without a (1 - ups_hh) factor and
    the low-type psi term carries (1 - psi_lh): both exactly as the
    model defines them, not symmetrized.  ``ll_form`` defaults to
    ``"consistent"``, the form whose s_i-derivative matches the
    low-type first-order condition.
    """
    if s_i < 0:
        raise ParameterError(f"s_i must be >= 0, got {s_i}")
    a, d, c = params.a, params.d, params.c
    if kind == "homogeneous":
        V = params.V
        s = profile.s_h
        if profile.s_h != profile.s_l:
            raise ParameterError(
                "homogeneous utility requires a uniform profile")
        ups = upsilon_homogeneous(s, d)
        psi = psi_homogeneous_dev(s_i, s, a, d) if s > 0 else 0.0
        return (1.0 - d) * V + d * d * a * V \
            + d * a * (1.0 - d) * V * ups \
            + d * (1.0 - a) * V * psi - c * s_i
    if kind == "h":
        Y = params.Y
        psi_hh = psi_het_dev("h", "h", s_i, profile, params)
        return (1.0 - d) * Y + d * d * a * Y \
            + d * a * (1.0 - d) * (upsilon_het("h", "h", profile, params) * Y
                                   + upsilon_het("h", "l", profile, params)) \
            + d * (1.0 - a) * psi_hh * Y - c * s_i
    if kind == "l":
        Y = params.Y
        psi_lh = psi_het_dev("l", "h", s_i, profile, params)
        psi_ll = psi_het_dev("l", "l", s_i, profile, params, ll_form=ll_form)
        return (1.0 - d) + d * d * a \
            + d * a * (1.0 - d) * (upsilon_het("l", "h", profile, params) * Y
                                   + upsilon_het("l", "l", profile, params)) \
            + d * (1.0 - a) * (psi_lh * Y + (1.0 - psi_lh) * psi_ll) - c * s_i
    raise ParameterError(f"kind must be 'h', 'l' or 'homogeneous', got {kind!r}")


# ---------------------------------------------------------------------------
# marriage rate through friends
# ---------------------------------------------------------------------------

def network_marriage_rate(profile_or_s: SocializationProfile | float,
                          params: ModelParams,
                          variant: Literal["summed", "weighted"] = "summed",
                          ll_form: LLForm = "standard") -> float | TypeRates:
    """Marriage rate through friends.

    Two definitions are in circulation and both are exposed:

    * ``"summed"``: ups_eh + ups_el + psi_eh + psi_el per type (an
      access count, not a probability of a union of events);
    * ``"weighted"``: a(1-d) ups + (1-a) psi, defined only for the
      one-type model.

    A scalar first argument selects the one-type model and returns a
    float; a profile selects the two-type model and returns per-type
    rates.  The weighted variant with a profile raises
    :class:`UnsupportedVariantError`.
    """
    if variant not in ("summed", "weighted"):
        raise UnsupportedVariantError(f"unknown variant {variant!r}")
    if isinstance(profile_or_s, SocializationProfile):
        if variant == "weighted":
            raise UnsupportedVariantError(
                "the weighted marriage rate is defined only for the "
                "one-type model")
        profile = profile_or_s
        m_h = (upsilon_het("h", "h", profile, params)
               + upsilon_het("h", "l", profile, params)
               + psi_het("h", "h", profile, params)
               + psi_het("h", "l", profile, params))
        m_l = (upsilon_het("l", "h", profile, params)
               + upsilon_het("l", "l", profile, params)
               + psi_het("l", "h", profile, params)
               + psi_het("l", "l", profile, params, ll_form=ll_form))
        return TypeRates(high=m_h, low=m_l)
    s = float(profile_or_s)
    ups = upsilon_homogeneous(s, params.d)
    psi = psi_homogeneous(s, params.a, params.d)
    if variant == "summed":
        return ups + psi
    return params.a * (1.0 - params.d) * ups + (1.0 - params.a) * psi
