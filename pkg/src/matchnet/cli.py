"""Command-line front end: rates, solve, sweep, simulate, verify.

Run configurations can be stored in flat ``key = value`` files and
passed with ``--config``; explicit flags win over config values.  JSON
outputs echo the effective configuration (execution-only knobs such as
the thread count are excluded so that outputs are byte-comparable
across machines and worker counts).

Exit codes: 0 success, 2 the model has no interior equilibrium at the
requested parameters (a result, not an error), 1 tool failure or
invalid input.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .equilibrium import solve_heterogeneous, solve_homogeneous
from .errors import MatchnetError
from .params import ModelParams, SocializationProfile
from .rates import matching_rates, network_marriage_rate, psi_het, \
    psi_homogeneous, upsilon_homogeneous
from .simulate import compare_to_closed_form, monte_carlo
from .sweep import emit, sweep
from .verify import render_report, run_suites

_CONFIG_KEYS = {
    "model", "a", "d", "c", "h", "Y", "V", "n", "s", "s_h", "s_l",
    "axis", "from", "to", "step", "reps", "seed", "pass_rule", "format",
    "out", "threads", "mc_n", "mc_reps", "full", "tol", "restarts",
}


def _parse_config_file(path: str) -> dict[str, str]:
    text = Path(path).read_text(encoding="utf-8")
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise MatchnetError(
                f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CONFIG_KEYS:
            raise MatchnetError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value.strip("\"'")
    return values


def _default_threads() -> int:
    env = os.environ.get("MATCHNET_THREADS", "").strip()
    return int(env) if env else 1


def _add_param_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=["homogeneous", "heterogeneous"])
    p.add_argument("--a", type=float)
    p.add_argument("--d", type=float)
    p.add_argument("--c", type=float)
    p.add_argument("--h", type=float, dest="h")
    p.add_argument("--Y", type=float)
    p.add_argument("--V", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--s", type=float, help="uniform investment level")
    p.add_argument("--s-h", type=float, dest="s_h")
    p.add_argument("--s-l", type=float, dest="s_l")
    p.add_argument("--config", help="flat key = value run configuration")
    p.add_argument("--format", choices=["csv", "json", "text"])
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--threads", type=int)


_TYPES = {"a": float, "d": float, "c": float, "h": float, "Y": float,
          "V": float, "n": int, "s": float, "s_h": float, "s_l": float,
          "from": float, "to": float, "step": float, "reps": int,
          "seed": int, "threads": int, "mc_n": int, "mc_reps": int,
          "tol": float, "restarts": int,
          "full": lambda v: v.lower() in ("1", "true", "yes")}


def _effective(args: argparse.Namespace) -> dict:
    """Merge config-file values under explicit flags."""
    merged: dict = {}
    if getattr(args, "config", None):
        for key, raw in _parse_config_file(args.config).items():
            conv = _TYPES.get(key, str)
            merged[key] = conv(raw)
    for key, value in vars(args).items():
        if key in ("config", "command") or value is None:
            continue
        merged[key] = value
    return merged


def _require(cfg: dict, *names: str) -> None:
    missing = [n for n in names if cfg.get(n) is None]
    if missing:
        raise MatchnetError(
            "missing required parameter(s): " + ", ".join(missing))


def _build_params(cfg: dict) -> ModelParams:
    _require(cfg, "a", "d", "c")
    return ModelParams(
        a=cfg["a"], d=cfg["d"], c=cfg["c"],
        h=cfg.get("h", 1.0), Y=cfg.get("Y", 1.0), V=cfg.get("V", 1.0),
        n=cfg.get("n"))


def _build_profile(cfg: dict) -> SocializationProfile:
    if cfg.get("s") is not None:
        return SocializationProfile.uniform(cfg["s"])
    _require(cfg, "s_h", "s_l")
    return SocializationProfile(s_h=cfg["s_h"], s_l=cfg["s_l"])


def _config_echo(cfg: dict) -> dict:
    return {k: v for k, v in sorted(cfg.items())
            if k not in ("threads", "out", "format")}


def _write(text: str, cfg: dict) -> None:
    out = cfg.get("out")
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_rates(cfg: dict) -> int:
    params = _build_params(cfg)
    profile = _build_profile(cfg)
    model = cfg.get("model") or ("heterogeneous" if 0.0 < params.h < 1.0
                                 else "homogeneous")
    if model == "homogeneous":
        s = profile.s_h
        body = {
            "psi": psi_homogeneous(s, params.a, params.d),
            "upsilon": upsilon_homogeneous(s, params.d),
            "m_summed": network_marriage_rate(s, params, "summed"),
            "m_weighted": network_marriage_rate(s, params, "weighted"),
        }
    else:
        body = matching_rates(profile, params).as_dict()
        body["psi_ll_consistent"] = psi_het("l", "l", profile, params,
                                            ll_form="consistent")
        m = network_marriage_rate(profile, params, "summed")
        body["m_summed_h"] = m.high
        body["m_summed_l"] = m.low
    if cfg.get("format") == "json":
        _write(json.dumps({"config": _config_echo(cfg), "rates": body},
                          sort_keys=True, indent=2) + "\n", cfg)
    else:
        lines = [f"{k} = {v!r}" for k, v in body.items()]
        _write("\n".join(lines) + "\n", cfg)
    return 0


def cmd_solve(cfg: dict) -> int:
    params = _build_params(cfg)
    model = cfg.get("model", "homogeneous")
    if model == "homogeneous":
        res = solve_homogeneous(params, tol=cfg.get("tol", 1e-10))
        body = {"exists": res.exists, "s_star": res.s_star,
                "residual": res.residual, "threshold": res.threshold,
                "iterations": res.iterations}
    else:
        res = solve_heterogeneous(params, tol=cfg.get("tol", 1e-9),
                                  restarts=cfg.get("restarts", 25))
        body = {"exists": res.exists, "s_h_star": res.s_h_star,
                "s_l_star": res.s_l_star,
                "residual_high": res.residual_high,
                "residual_low": res.residual_low,
                "threshold": res.threshold,
                "iterations": res.iterations,
                "roots": [list(r) for r in res.multiplicity]}
    if cfg.get("format") == "json":
        _write(json.dumps({"config": _config_echo(cfg), "solution": body},
                          sort_keys=True, indent=2) + "\n", cfg)
    else:
        _write("\n".join(f"{k} = {v!r}" for k, v in body.items()) + "\n", cfg)
    return 0 if res.exists else 2


def cmd_sweep(cfg: dict) -> int:
    params = _build_params(cfg)
    _require(cfg, "axis", "from", "to", "step")
    frm, to, step = cfg["from"], cfg["to"], cfg["step"]
    count = int(round((to - frm) / step))
    grid = [round(frm + i * step, 12) for i in range(count + 1)]
    profile = None
    if cfg.get("s") is not None or cfg.get("s_h") is not None:
        profile = _build_profile(cfg)
    table = sweep(cfg["axis"], grid, params,
                  model=cfg.get("model", "homogeneous"), profile=profile,
                  tol=cfg.get("tol"), restarts=cfg.get("restarts", 4),
                  threads=cfg.get("threads", _default_threads()))
    fmt = cfg.get("format") or "csv"
    if cfg.get("out"):
        emit(table, fmt, cfg["out"])
    else:
        emit(table, fmt, sys.stdout)
    return 0


def cmd_simulate(cfg: dict) -> int:
    params = _build_params(cfg)
    profile = _build_profile(cfg)
    _require(cfg, "n", "reps", "seed")
    est = monte_carlo(cfg["n"], cfg["reps"], params, profile, cfg["seed"],
                      pass_rule=cfg.get("pass_rule", "psi-consistent"),
                      threads=cfg.get("threads", _default_threads()))
    fmt = cfg.get("format") or "json"
    if fmt == "csv":
        _write(est.replication_csv(), cfg)
    else:
        payload = json.loads(est.summary_json())
        payload["config"].update(_config_echo(cfg))
        report = compare_to_closed_form(est, params, profile)
        payload["closed_form_checks"] = [
            {"channel": c.channel, "status": c.status, "estimate": c.estimate,
             "se": c.se, "target": c.target, "z": c.z, "note": c.note}
            for c in report.checks]
        _write(json.dumps(payload, sort_keys=True, indent=2) + "\n", cfg)
    return 0


def cmd_verify(cfg: dict) -> int:
    results = run_suites(full=bool(cfg.get("full")),
                         seed=cfg.get("seed", 20240),
                         mc_n=cfg.get("mc_n", 20000),
                         mc_reps=cfg.get("mc_reps", 200),
                         threads=cfg.get("threads", _default_threads()))
    _write(render_report(results), cfg)
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="matchnet",
        description="Marriage-market matching through friends: rates, "
                    "equilibria, sweeps, simulation, verification.")
    parser.add_argument("--version", action="version",
                        version=f"matchnet {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rates", help="print channel rates at a profile")
    _add_param_flags(p)

    p = sub.add_parser("solve", help="solve for the interior equilibrium")
    _add_param_flags(p)
    p.add_argument("--tol", type=float)
    p.add_argument("--restarts", type=int)

    p = sub.add_parser("sweep", help="comparative-statics sweep along one axis")
    _add_param_flags(p)
    p.add_argument("--axis", choices=["a", "d", "c", "h", "Y", "V"])
    p.add_argument("--from", type=float, dest="from")
    p.add_argument("--to", type=float)
    p.add_argument("--step", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--restarts", type=int)

    p = sub.add_parser("simulate", help="finite-population Monte Carlo")
    _add_param_flags(p)
    p.add_argument("--reps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--pass-rule", dest="pass_rule",
                   choices=["psi-consistent", "upsilon-consistent"])

    p = sub.add_parser("verify", help="run the verification suites")
    _add_param_flags(p)
    p.add_argument("--full", action="store_true", default=None,
                   help="include the Monte Carlo suites")
    p.add_argument("--seed", type=int)
    p.add_argument("--mc-n", type=int, dest="mc_n")
    p.add_argument("--mc-reps", type=int, dest="mc_reps")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _effective(args)
        handler = {"rates": cmd_rates, "solve": cmd_solve,
                   "sweep": cmd_sweep, "simulate": cmd_simulate,
                   "verify": cmd_verify}[args.command]
        return handler(cfg)
    except MatchnetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
