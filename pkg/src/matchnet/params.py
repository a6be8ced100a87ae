"""Domain types: market parameters, investment profiles, channel rates.

All types are frozen dataclasses; validation happens eagerly in
``__post_init__`` so that downstream numerics never see out-of-range
inputs.  Probabilities that enter solver denominators (``a``, ``d``)
are required to lie strictly inside (0, 1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterator

from .errors import ParameterError


def _check(cond: bool, msg: str) -> None:
    if not cond:
        raise ParameterError(msg)


@dataclass(frozen=True)
class ModelParams:
    """Market primitives.

    a : probability of a direct meeting, in (0, 1)
    d : divorce probability, in (0, 1)
    c : marginal socialization cost, > 0
    h : population share of the high-education type, in [0, 1]
    Y : gains from marrying a high type, >= 1 (low-type marriage pays 1,
        staying single pays 0)
    V : marriage value in the one-type model, >= 1; V = 1 gives the
        normalized one-type payoffs, V = 2 matches the benchmark sweeps
    n : optional finite population size per gender, >= 2
    """

    a: float
    d: float
    c: float
    h: float = 1.0
    Y: float = 1.0
    V: float = 1.0
    n: int | None = None

    def __post_init__(self) -> None:
        _check(0.0 < self.a < 1.0, f"a must be in (0,1), got {self.a}")
        _check(0.0 < self.d < 1.0, f"d must be in (0,1), got {self.d}")
        _check(self.c > 0.0, f"c must be > 0, got {self.c}")
        _check(0.0 <= self.h <= 1.0, f"h must be in [0,1], got {self.h}")
        _check(self.Y >= 1.0, f"Y must be >= 1, got {self.Y}")
        _check(self.V >= 1.0, f"V must be >= 1, got {self.V}")
        if self.n is not None:
            _check(int(self.n) == self.n and self.n >= 2,
                   f"n must be an integer >= 2, got {self.n}")

    def with_(self, **kw) -> "ModelParams":
        """Return a copy with the given fields replaced (re-validated)."""
        return replace(self, **kw)


@dataclass(frozen=True)
class SocializationProfile:
    """Symmetric investment levels, one per education type.

    ``s_i`` optionally carries a single deviating individual's
    investment; operations that do not involve a deviator ignore it.
    The one-type model uses :meth:`uniform`, which sets both levels to
    the same scalar.
    """

    s_h: float
    s_l: float
    s_i: float | None = None

    def __post_init__(self) -> None:
        _check(self.s_h >= 0.0, f"s_h must be >= 0, got {self.s_h}")
        _check(self.s_l >= 0.0, f"s_l must be >= 0, got {self.s_l}")
        if self.s_i is not None:
            _check(self.s_i >= 0.0, f"s_i must be >= 0, got {self.s_i}")

    @classmethod
    def uniform(cls, s: float, s_i: float | None = None) -> "SocializationProfile":
        return cls(s_h=s, s_l=s, s_i=s_i)

    @property
    def is_uniform(self) -> bool:
        return self.s_h == self.s_l

    def effort(self, e: str) -> float:
        if e == "h":
            return self.s_h
        if e == "l":
            return self.s_l
        raise ParameterError(f"education type must be 'h' or 'l', got {e!r}")


@dataclass(frozen=True)
class MatchingRates:
    """The eight channel probabilities.

    ``psi_*``: introduced to a date passed along by an own married
    friend.  ``ups_*``: introduced to a friend of a married person met
    directly.  First index: own type; second: partner type.
    ``psi_hl`` is identically zero (low types do not pass low dates to
    their high friends) and ``ups_hl == ups_lh`` exactly.
    """

    psi_hh: float
    psi_lh: float
    psi_ll: float
    psi_hl: float
    ups_hh: float
    ups_hl: float
    ups_lh: float
    ups_ll: float

    def __post_init__(self) -> None:
        for name, v in self.items():
            _check(0.0 <= v <= 1.0, f"{name} must be in [0,1], got {v}")
        _check(self.psi_hl == 0.0, "psi_hl must be exactly 0")
        _check(self.ups_hl == self.ups_lh, "ups_hl and ups_lh must be equal")

    def items(self) -> Iterator[tuple[str, float]]:
        for name in ("psi_hh", "psi_lh", "psi_ll", "psi_hl",
                     "ups_hh", "ups_hl", "ups_lh", "ups_ll"):
            yield name, getattr(self, name)

    def as_dict(self) -> dict[str, float]:
        return dict(self.items())


@dataclass(frozen=True)
class LinkProbability:
    """A pairwise link probability plus a flag for the min{., 1} clip."""

    value: float
    clipped: bool

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class TypeRates:
    """A per-type pair of scalar rates (high, low)."""

    high: float
    low: float
