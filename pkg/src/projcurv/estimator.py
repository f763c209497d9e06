"""Monte Carlo estimation of expected curvature-negativity volume fractions.

By unitary invariance the zero locus of a random polynomial system looks the
same, in law, at every point of projective space; the expected volume fraction
of the locus where a curvature exceeds a threshold therefore reduces to a
single-point conditional expectation

    E[density(curv > -a)] = E[1_{sup curv > -a} det(S S^*)] / E[det(S S^*)],

where (S, T) is a jet drawn from the degree-d rescaled jet law conditioned on
the value block vanishing, and det(S S^*) is the complex r x r Gram
determinant weight.  The curvature event is evaluated exactly for loci of
complex dimension one (all curvatures coincide), exactly for scalar and Ricci
curvature in any dimension (finite traces / Hermitian eigenvalue problems),
and by multistart optimization for bisectional/sectional suprema otherwise.

Also here: the deterministic expected-volume identity d^r/(n-r)!, the Wishart
determinant identity E[det S S^*] * density(F = 0) = n!/(n-r)!, and log-log
decay curves of the estimate as d grows, fitted against the predicted
exponents.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .curvature import (
    CurvatureKind,
    FilterVerdict,
    OptimizerOpts,
    _batch_scal,
    _batch_sup_ricci,
    _batch_values_m1,
    curvature_report,
    hb_tilde_filter,
)
from .errors import NumericalFailure, RegimeError
from .jetlaw import sample_sym_gaussian
from .kostlan import Convention, Dims, MetricContext
from .streams import BLOCK_SIZE, complex_normal, map_reduce_blocks

__all__ = [
    "EstimateWithCI",
    "DecayResult",
    "theorem_exponent",
    "check_regime",
    "expected_density_above",
    "decay_curve",
    "wishart_check",
    "volume_identity",
]


@dataclass
class EstimateWithCI:
    value: float
    half_width_95: float
    n_samples: int
    seed: int
    runtime_seconds: float
    params: dict


def _as_curv(curv) -> CurvatureKind:
    if isinstance(curv, CurvatureKind):
        return curv
    return CurvatureKind(str(curv).lower())


def theorem_exponent(curv, n: int, r: int) -> float:
    """Predicted decay exponent of E[density(curv > -a)] in the degree d."""
    case = _as_curv(curv)
    p = n - r
    if case is CurvatureKind.HBC:
        return 3 * r - 2 * n + 2
    if case is CurvatureKind.HC:
        return 2 * r - n + 1
    if case is CurvatureKind.RICCI:
        return r * p - (p - 1)
    return 0.5 * r * p * (p + 1)


def check_regime(curv, n: int, r: int) -> None:
    """Raise RegimeError if the decay statement's hypothesis fails for (curv, n, r)."""
    case = _as_curv(curv)
    if case is CurvatureKind.HBC and not 3 * r >= 2 * n - 1:
        raise RegimeError(f"hbc decay requires 3r >= 2n-1; got 3*{r} = {3*r} < {2*n-1}")
    if case is CurvatureKind.HC and not 2 * r >= n:
        raise RegimeError(f"hc decay requires 2r >= n; got 2*{r} = {2*r} < {n}")


def _regime_holds(curv, n: int, r: int) -> bool:
    try:
        check_regime(curv, n, r)
    except RegimeError:
        return False
    return True


# ---------------------------------------------------------------------------
# batched event evaluation
# ---------------------------------------------------------------------------

def _loop_sup_events(curv: CurvatureKind, S, T, a, ctx, c, use_filter, opts) -> np.ndarray:
    """Per-sample optimization fallback for hbc/hc suprema with m >= 2."""
    B = S.shape[0]
    events = np.empty(B, dtype=bool)
    for b in range(B):
        if use_filter and hb_tilde_filter(S[b], T[b], a, d_scale=c, ctx=ctx) is FilterVerdict.CERTIFIED_BELOW:
            events[b] = False
            continue
        rep = curvature_report(S[b], T[b], ctx=ctx, d_scale=c, opts=opts)
        val = rep.sup_hbc if curv is CurvatureKind.HBC else rep.sup_hc
        events[b] = val > -a
    return events


def _batch_events(curv: CurvatureKind, S, T, a: float, ctx: MetricContext,
                  c: float, use_filter: bool, opts: OptimizerOpts) -> np.ndarray:
    m = S.shape[2] - S.shape[1]
    h = ctx.hbc_bound
    if m == 1:
        return _batch_values_m1(S, T, h, c) > -a
    if curv is CurvatureKind.SCAL:
        return _batch_scal(S, T, h, c) > -a
    if curv is CurvatureKind.RICCI:
        return _batch_sup_ricci(S, T, h, c) > -a
    return _loop_sup_events(curv, S, T, a, ctx, c, use_filter, opts)


def _sample_conditioned_jets(rng, size: int, dims: Dims, variance: float):
    """Draw (S, T) from the rescaled degree-d jet law given a vanishing value block.

    The value/first/second blocks of the law are independent, so conditioning
    on the value block simply drops it: S has i.i.d. CN(0, v*pi) entries and T
    is complex symmetric with diagonal variance 2 v pi^2 (1 - 1/d) and
    off-diagonal variance v pi^2 (1 - 1/d).
    """
    v = variance
    S = complex_normal(rng, (size, dims.r, dims.n), var=v * math.pi)
    T = sample_sym_gaussian(rng, (size, dims.r), dims.n,
                            scale=v * math.pi**2 * (1.0 - 1.0 / dims.d))
    return S, T


# ---------------------------------------------------------------------------
# public estimators
# ---------------------------------------------------------------------------

def expected_density_above(curv, dims: Dims, d: int, a: float, n_samples: int,
                           seed: int = 0, convention: Convention = Convention.VAR_ONE,
                           use_filter: bool = True, workers: int = 1,
                           opts: OptimizerOpts = OptimizerOpts(),
                           zero_second_form: bool = False,
                           block_size: int = BLOCK_SIZE) -> EstimateWithCI:
    """Estimate E[density(curv > -a)] for degree-d zero loci.

    Jets are drawn from the exact rescaled law conditioned on a vanishing
    value block; the estimate is the det(S S^*)-weighted fraction of jets
    whose curvature supremum exceeds -a.  ``zero_second_form`` is a degenerate
    diagnostic mode that zeroes T (the locus then inherits ambient curvature
    and the estimate is exactly 1 for a >= 0).  The 95% half-width uses the
    delta method for the ratio of means.
    """
    case = _as_curv(curv)
    dims = dims.with_d(d)
    if d < 2:
        raise RegimeError(f"the rescaled jet law requires d >= 2, got d={d}")
    if a < 0:
        raise RegimeError(f"threshold a must be >= 0, got a={a}")
    ctx = MetricContext.fubini_study()
    c = float(d)  # jets are rescaled, so the form quadratic carries a factor d
    t0 = time.perf_counter()

    def block_fn(_b, size, rng):
        S, T = _sample_conditioned_jets(rng, size, dims, convention.variance)
        if zero_second_form:
            T = np.zeros_like(T)
        A = np.einsum("nik,njk->nij", S, S.conj())
        w = np.linalg.det(A).real
        ev = _batch_events(case, S, T, a, ctx, c, use_filter, opts)
        u = np.where(ev, w, 0.0)
        return (w.sum(), u.sum(), (w * w).sum(), (u * u).sum(), (u * w).sum(), size)

    parts = map_reduce_blocks(seed, n_samples, block_fn, workers=workers, block_size=block_size)
    Sw = sum(p[0] for p in parts)
    Su = sum(p[1] for p in parts)
    Sww = sum(p[2] for p in parts)
    Suu = sum(p[3] for p in parts)
    Suw = sum(p[4] for p in parts)
    N = sum(p[5] for p in parts)
    if Sw <= 0:
        raise NumericalFailure("all Gram determinant weights vanished")
    R = Su / Sw
    mean_w = Sw / N
    var_res = max((Suu - 2.0 * R * Suw + R * R * Sww) / N, 0.0)
    hw = 1.96 * math.sqrt(var_res / N) / mean_w
    return EstimateWithCI(
        value=float(R), half_width_95=float(hw), n_samples=N, seed=seed,
        runtime_seconds=time.perf_counter() - t0,
        params={
            "curv": case.value, "n": dims.n, "r": dims.r, "d": d, "a": a,
            "convention": convention.name, "use_filter": use_filter,
            "zero_second_form": zero_second_form,
            "regime_ok": _regime_holds(case, dims.n, dims.r),
        },
    )


@dataclass
class DecayResult:
    curv: CurvatureKind
    n: int
    r: int
    a: float
    d_list: list
    rows: list            # EstimateWithCI per d
    slope: float
    exponent: float
    n_fit_points: int
    seed: int

    def to_csv(self, path) -> None:
        """One row per degree, plus a final slope row (curv column = 'slope')."""
        with open(path, "w", newline="") as fh:
            fh.write("curv,n,r,d,a,estimate,ci95,n_samples,seed\n")
            for d, row in zip(self.d_list, self.rows):
                fh.write(f"{self.curv.value},{self.n},{self.r},{d},{self.a:.17g},"
                         f"{row.value:.17g},{row.half_width_95:.17g},{row.n_samples},{row.seed}\n")
            fh.write(f"slope,{self.n},{self.r},0,{self.a:.17g},"
                     f"{self.slope:.17g},0,0,{self.seed}\n")


def fit_decay_slope(d_list: Sequence[float], estimates: Sequence[float],
                    half_widths: Sequence[float]):
    """Least-squares log-log slope over points whose estimate exceeds 10x its CI."""
    d_arr = np.asarray(d_list, dtype=float)
    est = np.asarray(estimates, dtype=float)
    hw = np.asarray(half_widths, dtype=float)
    mask = est > 10.0 * hw
    if mask.sum() < 2:
        raise NumericalFailure(
            "decay fit needs at least two points with estimate > 10 x CI half-width",
            indices=np.nonzero(~mask)[0])
    slope = float(np.polyfit(np.log(d_arr[mask]), np.log(est[mask]), 1)[0])
    return slope, int(mask.sum())


def decay_curve(curv, dims: Dims, a: float, d_list: Sequence[int], n_samples: int,
                seed: int = 0, convention: Convention = Convention.VAR_ONE,
                use_filter: bool = True, workers: int = 1,
                opts: OptimizerOpts = OptimizerOpts()) -> DecayResult:
    """Decay of the expected density estimate as d grows, with fitted log-log slope.

    Requires the decay statement's hypothesis for hbc/hc; each degree reuses
    the same master seed (streams are indexed by block, and degrees are
    separate experiments).
    """
    case = _as_curv(curv)
    check_regime(case, dims.n, dims.r)
    d_list = [int(d) for d in d_list]
    if len(d_list) < 2:
        raise RegimeError("decay_curve needs at least two degrees")
    rows = [
        expected_density_above(case, dims, d, a, n_samples, seed=seed,
                               convention=convention, use_filter=use_filter,
                               workers=workers, opts=opts)
        for d in d_list
    ]
    slope, n_fit = fit_decay_slope(d_list, [r.value for r in rows],
                                   [r.half_width_95 for r in rows])
    return DecayResult(
        curv=case, n=dims.n, r=dims.r, a=a, d_list=d_list, rows=rows,
        slope=slope, exponent=theorem_exponent(case, dims.n, dims.r),
        n_fit_points=n_fit, seed=seed,
    )


def wishart_check(dims, n_samples: int, seed: int = 0,
                  convention: Convention = Convention.VAR_TWO,
                  workers: int = 1, block_size: int = BLOCK_SIZE) -> EstimateWithCI:
    """Monte Carlo check of E[det(S S^*)] * density(F = 0) = n!/(n-r)!.

    ``dims`` may be a Dims or a bare (n, r) tuple; the degenerate full
    codimension r = n is allowed (the identity still holds with value n!).
    The product is convention-invariant: the variance factors cancel.
    """
    if isinstance(dims, Dims):
        n, r = dims.n, dims.r
    else:
        n, r = int(dims[0]), int(dims[1])
    if not (n >= 1 and 1 <= r <= n):
        raise RegimeError(f"need 1 <= r <= n, got n={n}, r={r}")
    v = convention.variance
    rho_f0 = (math.pi * v) ** (-r)  # value-block density at zero
    t0 = time.perf_counter()

    def block_fn(_b, size, rng):
        S = complex_normal(rng, (size, r, n), var=v * math.pi)
        w = np.linalg.det(np.einsum("nik,njk->nij", S, S.conj())).real * rho_f0
        return (w.sum(), (w * w).sum(), size)

    parts = map_reduce_blocks(seed, n_samples, block_fn, workers=workers, block_size=block_size)
    Sw = sum(p[0] for p in parts)
    Sww = sum(p[1] for p in parts)
    N = sum(p[2] for p in parts)
    mean = Sw / N
    var = max(Sww / N - mean * mean, 0.0)
    hw = 1.96 * math.sqrt(var / N)
    return EstimateWithCI(
        value=float(mean), half_width_95=float(hw), n_samples=N, seed=seed,
        runtime_seconds=time.perf_counter() - t0,
        params={"n": n, "r": r, "convention": convention.name,
                "expected": math.factorial(n) // math.factorial(n - r)},
    )


def volume_identity(dims: Dims, d: Optional[int] = None) -> float:
    """Deterministic expected zero-locus volume d^r/(n-r)! (normalized ambient volume 1/n!)."""
    dd = dims.d if d is None else int(d)
    if dd < 1:
        raise RegimeError(f"degree must be >= 1, got d={dd}")
    return float(dd ** dims.r) / math.factorial(dims.n - dims.r)
