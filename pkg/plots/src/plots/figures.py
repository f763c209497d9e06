"""Render projcurv CSV outputs to SVG figures.

The only coupling to the producing package is the documented CSV schemas:

* decay:   ``curv,n,r,d,a,estimate,ci95,n_samples,seed`` with a final row
           whose ``curv`` column is the literal ``slope`` (its ``estimate``
           field holds the fitted log-log slope);
* tail:    ``eps,count,prob,codim,slope_fit``;
* covconv: ``d,max_abs_dev,slope_fit``;
* points:  ``system_seed,point_idx,curv_value,below_threshold`` (histogram).

Output is deterministic: the Agg backend, a fixed ``svg.hashsalt``, and a
stripped Date field make repeated renders byte-identical.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

__all__ = [
    "FigureResult",
    "plot_decay",
    "plot_tail",
    "plot_cov_convergence",
    "plot_density_hist",
    "render",
    "KINDS",
]

_SVG_SALT = "projcurv-plots"

_HEADERS = {
    "decay": "curv,n,r,d,a,estimate,ci95,n_samples,seed",
    "tail": "eps,count,prob,codim,slope_fit",
    "covconv": "d,max_abs_dev,slope_fit",
    "points": "system_seed,point_idx,curv_value,below_threshold",
}


@dataclass
class FigureResult:
    """What was drawn: output path, row count, and the slopes shown (if any)."""

    kind: str
    out_path: Path
    n_rows: int
    slope: Optional[float] = None
    reference_slope: Optional[float] = None


def _read_rows(csv_path, kind: str) -> list:
    """Rows of a schema-checked CSV as dicts; errors on wrong header or no data."""
    path = Path(csv_path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file (expected header {_HEADERS[kind]!r})")
        expected = _HEADERS[kind].split(",")
        if header != expected:
            raise ValueError(f"{path}: header {','.join(header)!r} does not match "
                             f"the {kind} schema {_HEADERS[kind]!r}")
        rows = [dict(zip(expected, row)) for row in reader if row]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return rows


def _save(fig, out_path) -> Path:
    out = Path(out_path)
    plt.rcParams["svg.hashsalt"] = _SVG_SALT
    fig.savefig(out, format="svg", metadata={"Date": None})
    plt.close(fig)
    return out


def _fitted_line(ax, x, y, slope: float, label: str, style: str, color=None):
    """Draw a log-log line of fixed slope through the least-squares intercept."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    good = (x > 0) & (y > 0)
    if good.sum() == 0:
        return
    intercept = float(np.mean(np.log(y[good]) - slope * np.log(x[good])))
    xs = np.geomspace(x[good].min(), x[good].max(), 64)
    ax.plot(xs, np.exp(intercept) * xs**slope, style, color=color, label=label)


def plot_decay(csv_path, out_path, reference_slope: Optional[float] = None) -> FigureResult:
    """Log-log decay of the estimated density vs degree, with CI bars, the
    fitted-slope line from the CSV's slope row, and an optional dashed
    reference slope."""
    rows = _read_rows(csv_path, "decay")
    slope_rows = [r for r in rows if r["curv"] == "slope"]
    data_rows = [r for r in rows if r["curv"] != "slope"]
    if len(slope_rows) != 1:
        raise ValueError(f"{csv_path}: expected exactly one slope row, found {len(slope_rows)}")
    if not data_rows:
        raise ValueError(f"{csv_path}: no data rows besides the slope row")
    slope = float(slope_rows[0]["estimate"])
    d = np.array([float(r["d"]) for r in data_rows])
    est = np.array([float(r["estimate"]) for r in data_rows])
    ci = np.array([float(r["ci95"]) for r in data_rows])
    curv = data_rows[0]["curv"]
    n, r_, a = data_rows[0]["n"], data_rows[0]["r"], float(data_rows[0]["a"])

    fig, ax = plt.subplots(figsize=(5.4, 4.0))
    ax.errorbar(d, est, yerr=ci, fmt="o", capsize=3, label="estimate (95% CI)")
    _fitted_line(ax, d, est, slope, f"fit: slope {slope:.3f}", "-", color="C1")
    if reference_slope is not None:
        _fitted_line(ax, d, est, reference_slope,
                     f"reference: slope {reference_slope:g}", "--", color="C2")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("degree d")
    ax.set_ylabel(f"E[density({curv} > -a)]")
    ax.set_title(f"decay, (n, r) = ({n}, {r_}), a = {a:g}")
    ax.legend()
    fig.tight_layout()
    out = _save(fig, out_path)
    return FigureResult("decay", out, len(data_rows), slope, reference_slope)


def plot_tail(csv_path, out_path) -> FigureResult:
    """Log-log empirical tail CDF vs epsilon with the fitted decade slope and
    the dashed 2*codim reference."""
    rows = _read_rows(csv_path, "tail")
    eps = np.array([float(r["eps"]) for r in rows])
    prob = np.array([float(r["prob"]) for r in rows])
    codims = {int(r["codim"]) for r in rows}
    slopes = {r["slope_fit"] for r in rows}
    if len(codims) != 1 or len(slopes) != 1:
        raise ValueError(f"{csv_path}: codim/slope_fit columns must be constant")
    codim = codims.pop()
    slope = float(slopes.pop())
    reference = 2.0 * codim

    fig, ax = plt.subplots(figsize=(5.4, 4.0))
    pos = prob > 0
    ax.plot(eps[pos], prob[pos], "o", ms=3, label="empirical tail")
    _fitted_line(ax, eps[pos], prob[pos], slope, f"fit: slope {slope:.3f}", "-", color="C1")
    _fitted_line(ax, eps[pos], prob[pos], reference,
                 f"reference: slope {reference:g}", "--", color="C2")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("epsilon")
    ax.set_ylabel("P[dist/scale < epsilon]")
    ax.set_title(f"discriminant-distance tail, codim {codim}")
    ax.legend()
    fig.tight_layout()
    out = _save(fig, out_path)
    return FigureResult("tail", out, len(rows), slope, reference)


def plot_cov_convergence(csv_path, out_path,
                         reference_slope: Optional[float] = -1.0) -> FigureResult:
    """Log-log max-entry covariance deviation vs degree with fitted slope."""
    rows = _read_rows(csv_path, "covconv")
    d = np.array([float(r["d"]) for r in rows])
    dev = np.array([float(r["max_abs_dev"]) for r in rows])
    slopes = {r["slope_fit"] for r in rows}
    if len(slopes) != 1:
        raise ValueError(f"{csv_path}: slope_fit column must be constant")
    slope = float(slopes.pop())

    fig, ax = plt.subplots(figsize=(5.4, 4.0))
    ax.plot(d, dev, "o", label="max |cov_d - cov_limit|")
    _fitted_line(ax, d, dev, slope, f"fit: slope {slope:.3f}", "-", color="C1")
    if reference_slope is not None:
        _fitted_line(ax, d, dev, reference_slope,
                     f"reference: slope {reference_slope:g}", "--", color="C2")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("degree d")
    ax.set_ylabel("max-entry deviation")
    ax.set_title("jet covariance convergence")
    ax.legend()
    fig.tight_layout()
    out = _save(fig, out_path)
    return FigureResult("covconv", out, len(rows), slope, reference_slope)


def plot_density_hist(csv_path, out_path, bins: int = 60) -> FigureResult:
    """Histogram of per-point curvature values with the below-threshold share."""
    rows = _read_rows(csv_path, "points")
    values = np.array([float(r["curv_value"]) for r in rows])
    below = np.array([int(r["below_threshold"]) for r in rows])
    frac = float(below.mean())

    fig, ax = plt.subplots(figsize=(5.4, 4.0))
    ax.hist(values, bins=bins, color="C0", alpha=0.85)
    ax.set_xlabel("curvature value at sampled locus point")
    ax.set_ylabel("count")
    n_systems = len({r["system_seed"] for r in rows})
    ax.set_title(f"{len(rows)} points, {n_systems} system(s); "
                 f"fraction below threshold {frac:.4f}")
    fig.tight_layout()
    out = _save(fig, out_path)
    return FigureResult("points", out, len(rows))


KINDS = {
    "decay": plot_decay,
    "tail": plot_tail,
    "covconv": plot_cov_convergence,
    "density-hist": plot_density_hist,
}


def render(kind: str, csv_path, out_path, **opts) -> FigureResult:
    """Dispatch on figure kind; ``opts`` are forwarded to the kind's plotter."""
    if kind not in KINDS:
        raise ValueError(f"unknown figure kind {kind!r}; choose from {sorted(KINDS)}")
    return KINDS[kind](csv_path, out_path, **opts)
