"""Comparative-statics engine: grids, peak detection, derivative checks.

A sweep solves (or just evaluates, when a fixed profile is supplied)
the model at every grid point of one parameter axis and assembles an
ordered table.  Points are independent and may be computed
concurrently; the table preserves grid order regardless of completion
order, and per-point solver failures are recorded in-table.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, IO, Literal

from .equilibrium import solve_heterogeneous, solve_homogeneous
from .errors import ParameterError, SolverFailureError, StencilCrossingError
from .params import ModelParams, SocializationProfile
from .rates import (
    network_marriage_rate,
    psi_het,
    psi_homogeneous,
    upsilon_het,
    upsilon_homogeneous,
)

_AXES = ("a", "d", "c", "h", "Y", "V")

# Emitted column order per table kind.  The homogeneous equilibrium
# schema is the documented external contract; extra diagnostics stay on
# the row dicts without entering the CSV.
_COLUMNS = {
    "homogeneous": ("s_star", "psi", "upsilon", "m_weighted", "exists"),
    "heterogeneous": ("s_h_star", "s_l_star", "psi_hh", "psi_lh", "psi_ll",
                      "psi_ll_consistent", "psi_l_total", "ups_hh", "ups_hl",
                      "ups_ll", "m_h", "m_l", "exists", "residual_high",
                      "residual_low", "error"),
    "exogenous-homogeneous": ("psi", "upsilon", "m_weighted", "m_summed"),
    "exogenous-heterogeneous": ("psi_hh", "psi_lh", "psi_ll",
                                "psi_ll_consistent", "psi_hl", "ups_hh",
                                "ups_hl", "ups_lh", "ups_ll"),
}


@dataclass
class SweepTable:
    axis: str
    grid: list[float]
    kind: str
    columns: tuple[str, ...]
    rows: list[dict] = field(default_factory=list)

    def column(self, name: str) -> list:
        return [row.get(name) for row in self.rows]


def _point_homogeneous(axis: str, value: float, params: ModelParams,
                       tol: float) -> dict:
    p = params.with_(**{axis: value})
    res = solve_homogeneous(p, tol=tol)
    s = res.s_star if res.exists else 0.0
    psi = psi_homogeneous(s, p.a, p.d)
    ups = upsilon_homogeneous(s, p.d)
    return {
        axis: value, "s_star": s, "psi": psi, "upsilon": ups,
        "m_weighted": network_marriage_rate(s, p, "weighted"),
        "m_summed": network_marriage_rate(s, p, "summed"),
        "exists": res.exists, "residual": res.residual,
        "iterations": res.iterations,
    }


def _point_heterogeneous(axis: str, value: float, params: ModelParams,
                         tol: float, restarts: int) -> dict:
    p = params.with_(**{axis: value})
    row: dict = {axis: value}
    try:
        res = solve_heterogeneous(p, tol=tol, restarts=restarts)
    except SolverFailureError as exc:
        row.update({c: None for c in _COLUMNS["heterogeneous"]})
        row[axis] = value
        row["exists"] = False
        row["error"] = str(exc)
        return row
    if not res.exists:
        row.update({"s_h_star": 0.0, "s_l_star": 0.0, "psi_hh": 0.0,
                    "psi_lh": 0.0, "psi_ll": 0.0, "psi_ll_consistent": 0.0,
                    "psi_l_total": 0.0, "ups_hh": 0.0, "ups_hl": 0.0,
                    "ups_ll": 0.0, "m_h": 0.0, "m_l": 0.0, "exists": False,
                    "residual_high": None, "residual_low": None, "error": ""})
        return row
    profile = SocializationProfile(s_h=res.s_h_star, s_l=res.s_l_star)
    psi_ll = psi_het("l", "l", profile, p)
    m = network_marriage_rate(profile, p, "summed")
    row.update({
        "s_h_star": res.s_h_star, "s_l_star": res.s_l_star,
        "psi_hh": psi_het("h", "h", profile, p),
        "psi_lh": psi_het("l", "h", profile, p),
        "psi_ll": psi_ll,
        "psi_ll_consistent": psi_het("l", "l", profile, p,
                                     ll_form="consistent"),
        "psi_l_total": psi_het("l", "h", profile, p) + psi_ll,
        "ups_hh": upsilon_het("h", "h", profile, p),
        "ups_hl": upsilon_het("h", "l", profile, p),
        "ups_ll": upsilon_het("l", "l", profile, p),
        "m_h": m.high, "m_l": m.low,
        "exists": True,
        "residual_high": res.residual_high, "residual_low": res.residual_low,
        "error": "",
        "multiplicity": len(res.multiplicity),
    })
    return row


def _point_exogenous(axis: str, value: float, params: ModelParams,
                     profile: SocializationProfile, model: str) -> dict:
    p = params.with_(**{axis: value})
    if model == "homogeneous":
        s = profile.s_h
        return {
            axis: value,
            "psi": psi_homogeneous(s, p.a, p.d),
            "upsilon": upsilon_homogeneous(s, p.d),
            "m_weighted": network_marriage_rate(s, p, "weighted"),
            "m_summed": network_marriage_rate(s, p, "summed"),
        }
    return {
        axis: value,
        "psi_hh": psi_het("h", "h", profile, p),
        "psi_lh": psi_het("l", "h", profile, p),
        "psi_ll": psi_het("l", "l", profile, p),
        "psi_ll_consistent": psi_het("l", "l", profile, p,
                                     ll_form="consistent"),
        "psi_hl": 0.0,
        "ups_hh": upsilon_het("h", "h", profile, p),
        "ups_hl": upsilon_het("h", "l", profile, p),
        "ups_lh": upsilon_het("l", "h", profile, p),
        "ups_ll": upsilon_het("l", "l", profile, p),
    }


def sweep(axis: str, grid: list[float], params: ModelParams,
          model: Literal["homogeneous", "heterogeneous"] = "homogeneous",
          profile: SocializationProfile | None = None,
          tol: float | None = None, restarts: int = 4,
          threads: int = 1) -> SweepTable:
    """Evaluate the model over a strictly increasing parameter grid.

    With ``profile`` set, no equilibrium is solved: the table carries
    the closed-form rates at that fixed profile (the exogenous-network
    comparative statics).  Otherwise each point solves the
    ``model``-appropriate equilibrium.  Two-type sweep points use
    ``restarts`` multi-starts (fewer than the standalone solver's
    default; root multiplicity reporting is the solver's job).
    """
    if axis not in _AXES:
        raise ParameterError(f"axis must be one of {_AXES}, got {axis!r}")
    if len(grid) == 0:
        kind = model if profile is None else f"exogenous-{model}"
        return SweepTable(axis=axis, grid=[], kind=kind,
                          columns=(axis,) + _COLUMNS[kind])
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ParameterError("grid must be strictly increasing")
    if profile is not None:
        kind = f"exogenous-{model}"
        fn: Callable[[float], dict] = lambda v: _point_exogenous(
            axis, v, params, profile, model)
    elif model == "homogeneous":
        kind = "homogeneous"
        fn = lambda v: _point_homogeneous(axis, v, params, tol or 1e-10)
    elif model == "heterogeneous":
        kind = "heterogeneous"
        fn = lambda v: _point_heterogeneous(axis, v, params, tol or 1e-9,
                                            restarts)
    else:
        raise ParameterError(f"unknown model {model!r}")
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(fn, grid))
    else:
        rows = [fn(v) for v in grid]
    return SweepTable(axis=axis, grid=list(grid), kind=kind,
                      columns=(axis,) + _COLUMNS[kind], rows=rows)


# ---------------------------------------------------------------------------
# peak detection
# ---------------------------------------------------------------------------

_PLATEAU_TOL = 1e-12


@dataclass(frozen=True)
class PeakReport:
    column: str
    verdict: Literal["single-peak", "monotone-increasing",
                     "monotone-decreasing", "flat", "inconclusive"]
    peak_axis_value: float
    peak_value: float
    rises_to_falls: int
    falls_to_rises: int
    valid_points: int


def detect_peak(table: SweepTable, column: str) -> PeakReport:
    """Classify the shape of a numeric column using first differences.

    Differences within +-1e-12 of zero are treated as plateau steps and
    dropped.  ``single-peak`` means exactly one rise-to-fall transition
    and none the other way; any fall-to-rise transition makes the
    column ``inconclusive`` rather than forcing a verdict.  Peak
    locations are exact only to one grid step.
    """
    pts = [(row[table.axis], row[column]) for row in table.rows
           if row.get(column) is not None]
    if len(pts) < 3:
        raise ParameterError(
            f"peak detection needs >= 3 valid points, got {len(pts)}")
    values = [v for _, v in pts]
    signs = []
    for a, b in zip(values, values[1:]):
        diff = b - a
        if diff > _PLATEAU_TOL:
            signs.append(1)
        elif diff < -_PLATEAU_TOL:
            signs.append(-1)
    up_down = sum(1 for x, y in zip(signs, signs[1:]) if x > 0 > y)
    down_up = sum(1 for x, y in zip(signs, signs[1:]) if x < 0 < y)
    imax = max(range(len(values)), key=lambda i: values[i])
    if not signs:
        verdict = "flat"
    elif down_up > 0:
        verdict = "inconclusive"
    elif up_down == 1:
        verdict = "single-peak"
    elif all(s > 0 for s in signs):
        verdict = "monotone-increasing"
    elif all(s < 0 for s in signs):
        verdict = "monotone-decreasing"
    else:
        verdict = "inconclusive"
    return PeakReport(column=column, verdict=verdict,
                      peak_axis_value=pts[imax][0], peak_value=values[imax],
                      rises_to_falls=up_down, falls_to_rises=down_up,
                      valid_points=len(pts))


# ---------------------------------------------------------------------------
# numerical derivative of a solved quantity
# ---------------------------------------------------------------------------

def numeric_derivative(solver: Callable[[ModelParams], float | None],
                       params: ModelParams, axis: str,
                       step: float = 1e-4) -> float:
    """Richardson-refined central difference of ``solver`` along ``axis``.

    ``solver`` maps parameters to a scalar (for instance the solved
    equilibrium effort) and returns None where no interior equilibrium
    exists; a None anywhere on the four-point stencil raises
    :class:`StencilCrossingError`.  The two-step Richardson combination
    has fourth-order truncation error, so step-halving must shrink the
    discrepancy against an analytic derivative at order >= 2.
    """
    if axis not in _AXES:
        raise ParameterError(f"axis must be one of {_AXES}, got {axis!r}")
    if step <= 0:
        raise ParameterError(f"step must be > 0, got {step}")
    base = getattr(params, axis)

    def at(delta: float) -> float:
        value = solver(params.with_(**{axis: base + delta}))
        if value is None or (isinstance(value, float) and math.isnan(value)):
            raise StencilCrossingError(
                f"equilibrium vanished inside the stencil at "
                f"{axis}={base + delta}")
        return value

    d_full = (at(step) - at(-step)) / (2.0 * step)
    d_half = (at(0.5 * step) - at(-0.5 * step)) / step
    return (4.0 * d_half - d_full) / 3.0


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------

def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit(table: SweepTable, format: Literal["csv", "json"],
         destination: str | Path | IO[str]) -> None:
    """Write the table; deterministic bytes for identical tables.

    Floats are written with ``repr``, the shortest representation that
    round-trips exactly, so re-reading a CSV reproduces every value
    bit for bit.  An empty grid produces a header-only CSV.
    """
    if format == "csv":
        lines = [",".join(table.columns)]
        for row in table.rows:
            lines.append(",".join(_cell(row.get(c)) for c in table.columns))
        text = "\n".join(lines) + "\n"
    elif format == "json":
        payload = {
            "axis": table.axis,
            "kind": table.kind,
            "columns": list(table.columns),
            "rows": [{c: row.get(c) for c in table.columns}
                     for row in table.rows],
        }
        text = json.dumps(payload, indent=2) + "\n"
    else:
        raise ParameterError(f"format must be 'csv' or 'json', got {format!r}")
    if hasattr(destination, "write"):
        destination.write(text)
        return
    path = Path(destination)
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"failed writing sweep table to {path}: {exc}") from exc
