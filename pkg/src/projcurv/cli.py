"""Config-driven experiment runner.

Each subcommand runs one experiment and writes a CSV (byte-identical for
identical config + seed) plus a JSON summary (config echo, build identifier,
runtime, headline numbers).  Config can come from a JSON file (``--config``),
with command-line flags overriding file values.  Exit codes: 0 success,
2 config/regime errors (message cites the failing condition), 3 numerical
failures (message lists offending sample indices when known).

Experiments
-----------
jets-cov           max-entry gap between the degree-d jet covariance and its
                   large-d limit, over a list of degrees, with log-log slope
                   (CSV: d,max_abs_dev,slope_fit)
wishart            Monte Carlo E[det SS*] x density(F=0) against n!/(n-r)!
                   (CSV: n,r,estimate,ci95,expected,n_samples,seed)
volume             deterministic expected volume d^r/(n-r)!
                   (CSV: n,r,d,volume)
disc-tail          discriminant-distance tail CDF and fitted slope
                   (CSV: eps,count,prob,codim,slope_fit)
decay              expected density(curv > -a) vs degree, with fitted slope
                   (CSV: curv,n,r,d,a,estimate,ci95,n_samples,seed + slope row)
cross-validate     estimator vs direct zero-locus sampling on shared params
                   (CSV: system_seed,point_idx,curv_value,below_threshold)
empirical-density  per-point curvature on one sampled system's zero locus
                   (CSV: system_seed,point_idx,curv_value,below_threshold)
"""

from __future__ import annotations

import argparse
import json
import subprocess
import sys as _sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .curvature import CurvatureKind
from .discriminant import codim, tail_experiment
from .errors import NumericalFailure, RegimeError
from .estimator import (
    check_regime,
    decay_curve,
    expected_density_above,
    theorem_exponent,
    volume_identity,
    wishart_check,
)
from .geometry import density_samples
from .jetlaw import cov_bf, kostlan_jet_covariance
from .kostlan import Convention, Dims, sample_system

__all__ = ["main", "run", "RunConfig"]

EXPERIMENTS = ("jets-cov", "wishart", "volume", "disc-tail", "decay",
               "cross-validate", "empirical-density")

_DEFAULTS = {
    "experiment": None,
    "n": 2,
    "r": 1,
    "d": 20,
    "d_list": None,
    "a": 1.0,
    "a_list": None,
    "curv": "hbc",
    "which": "bilinear",
    "n_samples": 100000,
    "n_systems": 100,
    "n_points": 1000,
    "seed": 0,
    "convention": "var_one",
    "restarts": 64,
    "workers": 1,
    "eps_min": 1e-3,
    "eps_max": 1.0,
    "eps_points": 61,
    "out_path": None,
}


class RunConfig(dict):
    """Resolved experiment configuration (defaults < config file < flags)."""

    def __getattr__(self, name):
        try:
            return self[name]
        except KeyError as exc:
            raise AttributeError(name) from exc


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _build_id() -> str:
    try:
        out = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"],
            cwd=Path(__file__).parent, capture_output=True, text=True, timeout=10,
        )
        if out.returncode == 0:
            return out.stdout.strip()
    except OSError:
        pass
    return f"projcurv-{__version__}"


def load_config(path=None, overrides=None) -> RunConfig:
    cfg = dict(_DEFAULTS)
    if path is not None:
        with open(path) as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ValueError("config file must hold a JSON object")
        unknown = set(data) - set(_DEFAULTS)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(data)
    for key, val in (overrides or {}).items():
        if val is not None:
            cfg[key] = val
    if cfg["experiment"] not in EXPERIMENTS:
        raise ValueError(f"experiment must be one of {EXPERIMENTS}, got {cfg['experiment']!r}")
    if cfg["out_path"] is None:
        cfg["out_path"] = f"{cfg['experiment']}.csv"
    return RunConfig(cfg)


def _convention(cfg: RunConfig) -> Convention:
    name = str(cfg.convention).lower()
    if name in ("var_one", "varone", "one", "1"):
        return Convention.VAR_ONE
    if name in ("var_two", "vartwo", "two", "2"):
        return Convention.VAR_TWO
    raise ValueError(f"unknown convention {cfg.convention!r} (use var_one or var_two)")


def _d_list(cfg: RunConfig) -> list:
    if cfg.d_list:
        return [int(x) for x in cfg.d_list]
    return [10, 20, 40, 80, 160]


# ---------------------------------------------------------------------------
# experiment handlers: each returns (csv_text, results_dict)
# ---------------------------------------------------------------------------

def _run_jets_cov(cfg: RunConfig):
    dims = Dims(cfg.n, cfg.r, max(2, cfg.d))
    conv = _convention(cfg)
    limit = cov_bf(dims, convention=conv).matrix
    ds = _d_list(cfg) if cfg.d_list else [10, 20, 40, 80, 160, 320, 640]
    devs = [float(np.abs(kostlan_jet_covariance(dims, d=d, convention=conv).matrix - limit).max())
            for d in ds]
    slope = float(np.polyfit(np.log(ds), np.log(devs), 1)[0])
    lines = ["d,max_abs_dev,slope_fit"]
    for d, dev in zip(ds, devs):
        lines.append(f"{d},{_fmt(dev)},{_fmt(slope)}")
    return "\n".join(lines) + "\n", {"slope_fit": slope, "d_list": ds, "reference_slope": -1.0}


def _run_wishart(cfg: RunConfig):
    est = wishart_check((cfg.n, cfg.r), cfg.n_samples, seed=cfg.seed,
                        convention=_convention(cfg), workers=cfg.workers)
    expected = est.params["expected"]
    lines = ["n,r,estimate,ci95,expected,n_samples,seed",
             f"{cfg.n},{cfg.r},{_fmt(est.value)},{_fmt(est.half_width_95)},"
             f"{expected},{est.n_samples},{est.seed}"]
    return "\n".join(lines) + "\n", {
        "estimate": est.value, "ci95": est.half_width_95, "expected": expected,
    }


def _run_volume(cfg: RunConfig):
    dims = Dims(cfg.n, cfg.r, cfg.d)
    vol = volume_identity(dims)
    lines = ["n,r,d,volume", f"{cfg.n},{cfg.r},{cfg.d},{_fmt(vol)}"]
    return "\n".join(lines) + "\n", {"volume": vol}


def _run_disc_tail(cfg: RunConfig):
    eps = np.geomspace(cfg.eps_min, cfg.eps_max, int(cfg.eps_points))
    res = tail_experiment(cfg.which, cfg.n, cfg.r, cfg.n_samples, eps_grid=eps,
                          seed=cfg.seed, restarts=cfg.restarts, workers=cfg.workers)
    lines = ["eps,count,prob,codim,slope_fit"]
    for e, c, q in zip(res.eps, res.count, res.prob):
        lines.append(f"{_fmt(e)},{int(c)},{_fmt(q)},{res.codim},{_fmt(res.slope_fit)}")
    return "\n".join(lines) + "\n", {
        "codim": res.codim, "slope_fit": res.slope_fit,
        "reference_slope": 2 * res.codim, "fit_window": list(res.fit_window),
    }


def _decay_csv(res) -> str:
    lines = ["curv,n,r,d,a,estimate,ci95,n_samples,seed"]
    for d, row in zip(res.d_list, res.rows):
        lines.append(f"{res.curv.value},{res.n},{res.r},{d},{_fmt(res.a)},"
                     f"{_fmt(row.value)},{_fmt(row.half_width_95)},{row.n_samples},{row.seed}")
    lines.append(f"slope,{res.n},{res.r},0,{_fmt(res.a)},{_fmt(res.slope)},0,0,{res.seed}")
    return "\n".join(lines) + "\n"


def _run_decay(cfg: RunConfig):
    a_values = [float(x) for x in (cfg.a_list or [cfg.a])]
    d_list = _d_list(cfg)
    dims = Dims(cfg.n, cfg.r, d_list[0] if d_list[0] >= 2 else 2)
    conv = _convention(cfg)
    results = []
    for a in a_values:
        results.append(decay_curve(cfg.curv, dims, a, d_list, cfg.n_samples,
                                   seed=cfg.seed, convention=conv, workers=cfg.workers))
    csv_text = _decay_csv(results[0])
    extra = {}
    if len(results) > 1:
        base = Path(cfg.out_path)
        for a, res in zip(a_values[1:], results[1:]):
            path = base.with_name(f"{base.stem}_a{a:g}{base.suffix}")
            path.write_text(_decay_csv(res))
            extra[f"a={a:g}"] = {"out_path": str(path), "slope": res.slope}
    summary = {
        "slopes": {f"a={a:g}": res.slope for a, res in zip(a_values, results)},
        "theorem_exponent": results[0].exponent,
        "n_fit_points": results[0].n_fit_points,
    }
    if extra:
        summary["extra_outputs"] = extra
    return csv_text, summary


def _point_csv_rows(system_seed: int, values, a: float) -> list:
    rows = []
    for idx, val in enumerate(values):
        rows.append(f"{system_seed},{idx},{_fmt(val)},{int(val < -a)}")
    return rows


def _run_cross_validate(cfg: RunConfig):
    dims = Dims(cfg.n, cfg.r, cfg.d)
    conv = _convention(cfg)
    est = expected_density_above(cfg.curv, dims, cfg.d, cfg.a, cfg.n_samples,
                                 seed=cfg.seed, convention=conv, workers=cfg.workers)
    lines = ["system_seed,point_idx,curv_value,below_threshold"]
    fractions = []
    for k in range(int(cfg.n_systems)):
        system_seed = cfg.seed + 1 + k
        sys_k = sample_system(dims, convention=conv, seed=system_seed)
        values = density_samples(sys_k, cfg.curv, int(cfg.n_points), seed=system_seed)
        lines.extend(_point_csv_rows(system_seed, values, cfg.a))
        fractions.append(float((values < -cfg.a).mean()))
    fr = np.asarray(fractions)
    mean_above = float(1.0 - fr.mean())
    hw_geo = float(1.96 * fr.std(ddof=1) / np.sqrt(fr.size))
    gap = abs(mean_above - est.value)
    combined = hw_geo + est.half_width_95
    return "\n".join(lines) + "\n", {
        "estimator_above": est.value, "estimator_ci95": est.half_width_95,
        "geometry_above": mean_above, "geometry_ci95": hw_geo,
        "gap": gap, "combined_ci95": combined, "consistent": bool(gap <= combined),
    }


def _run_empirical_density(cfg: RunConfig):
    dims = Dims(cfg.n, cfg.r, cfg.d)
    conv = _convention(cfg)
    sys_one = sample_system(dims, convention=conv, seed=cfg.seed)
    values = density_samples(sys_one, cfg.curv, int(cfg.n_points), seed=cfg.seed)
    lines = ["system_seed,point_idx,curv_value,below_threshold"]
    lines.extend(_point_csv_rows(cfg.seed, values, cfg.a))
    frac = float((values < -cfg.a).mean())
    return "\n".join(lines) + "\n", {"fraction_below": frac, "n_points": int(cfg.n_points)}


_HANDLERS = {
    "jets-cov": _run_jets_cov,
    "wishart": _run_wishart,
    "volume": _run_volume,
    "disc-tail": _run_disc_tail,
    "decay": _run_decay,
    "cross-validate": _run_cross_validate,
    "empirical-density": _run_empirical_density,
}


def _validate(cfg: RunConfig) -> None:
    """Regime checks before launch; raises RegimeError citing the failing inequality."""
    if cfg.experiment in ("jets-cov", "volume", "decay", "cross-validate", "empirical-density"):
        Dims(cfg.n, cfg.r, max(int(cfg.d), 1))  # validates 1 <= r <= n-1
    if cfg.experiment == "decay":
        check_regime(cfg.curv, cfg.n, cfg.r)
        CurvatureKind(str(cfg.curv).lower())
    if cfg.experiment == "disc-tail":
        codim(cfg.which, cfg.n, cfg.r)
    if cfg.experiment in ("cross-validate", "empirical-density"):
        if cfg.r != 1:
            raise RegimeError(f"direct zero-locus sampling requires r = 1, got r={cfg.r}")
        if cfg.d < 2:
            raise RegimeError(f"conditioned jets require d >= 2, got d={cfg.d}")


def run(cfg: RunConfig) -> int:
    """Execute the configured experiment; writes CSV and JSON summary."""
    _validate(cfg)
    t0 = time.perf_counter()
    csv_text, results = _HANDLERS[cfg.experiment](cfg)
    out = Path(cfg.out_path)
    out.write_text(csv_text)
    summary = {
        "experiment": cfg.experiment,
        "config": {k: cfg[k] for k in sorted(cfg)},
        "build_id": _build_id(),
        "runtime_seconds": time.perf_counter() - t0,
        "results": results,
        "out_path": str(out),
    }
    out.with_suffix(".json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    print(f"wrote {out} and {out.with_suffix('.json')}")
    return 0


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="projcurv",
        description="Monte Carlo experiments on curvatures of random projective zero loci.",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", type=str, default=None, help="JSON config file")
        p.add_argument("--n", type=int)
        p.add_argument("--r", type=int)
        p.add_argument("--d", type=int)
        p.add_argument("--d-list", dest="d_list", type=str,
                       help="comma-separated degrees, e.g. 10,20,40")
        p.add_argument("--a", type=float)
        p.add_argument("--a-list", dest="a_list", type=str,
                       help="comma-separated thresholds")
        p.add_argument("--curv", choices=[c.value for c in CurvatureKind])
        p.add_argument("--which", choices=["bilinear", "quadratic", "linearized"])
        p.add_argument("--n-samples", dest="n_samples", type=int)
        p.add_argument("--n-systems", dest="n_systems", type=int)
        p.add_argument("--n-points", dest="n_points", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--convention", choices=["var_one", "var_two"])
        p.add_argument("--restarts", type=int)
        p.add_argument("--workers", type=int)
        p.add_argument("--eps-min", dest="eps_min", type=float)
        p.add_argument("--eps-max", dest="eps_max", type=float)
        p.add_argument("--eps-points", dest="eps_points", type=int)
        p.add_argument("--out", dest="out_path", type=str)
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    overrides = {k: v for k, v in vars(args).items() if k not in ("config",)}
    for key in ("d_list", "a_list"):
        if overrides.get(key) is not None and isinstance(overrides[key], str):
            overrides[key] = [float(x) for x in overrides[key].split(",") if x.strip()]
    try:
        cfg = load_config(args.config, overrides)
        return run(cfg)
    except NumericalFailure as exc:
        msg = str(exc)
        if exc.indices:
            msg += f" (sample indices: {exc.indices[:20]})"
        print(f"numerical failure: {msg}", file=_sys.stderr)
        return 3
    except np.linalg.LinAlgError as exc:
        print(f"numerical failure: {exc}", file=_sys.stderr)
        return 3
    except (RegimeError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=_sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
