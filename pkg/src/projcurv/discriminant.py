"""Distances to the discriminants of symmetric bilinear tuples, and tail exponents.

A tuple T = (T_1, ..., T_r) of complex symmetric p x p matrices determines
three associated objects whose degeneracy loci ("discriminants") have known
codimensions:

* Bilinear   — the map (x, y) |-> (x^t T_i y)_i; degenerate iff it has a
  projective zero pair.  codim 3r - 2n + 2 in the regime 3r > 2n - 2.
* Quadratic  — the diagonal restriction x |-> (x^t T_i x)_i; degenerate iff it
  has a projective zero.  codim 2r - n + 1 in the regime 2r > n - 1.
* Linearized — the tuple of linear forms x |-> (T_i(e_j, x))_{ij}; degenerate
  iff the stacked (r p) x p coefficient matrix is rank-deficient.
  codim r(n-r) - (n-r-1), unconditionally.

Here p = n - r.  The L2-distance from T to each discriminant equals
(n - r)^{-1} times the minimum of the corresponding norm over unit spheres,
which this module computes exactly (Linearized: smallest singular value) or by
multistart optimization (Bilinear: alternating exact half-steps; Quadratic:
projected gradient).  ``tail_experiment`` samples Gaussian tuples and fits the
small-deviation tail P(dist <= eps * ||T||) ~ C * eps^(2 codim).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .errors import RegimeError
from .jetlaw import sample_sym_gaussian
from .streams import BLOCK_SIZE, map_reduce_blocks, stream

__all__ = [
    "DiscCase",
    "SymBilinear",
    "MinOpts",
    "TailResult",
    "codim",
    "min_sphere_norm",
    "dist_to_discriminant",
    "tail_experiment",
]


class DiscCase(Enum):
    BILINEAR = "bilinear"
    QUADRATIC = "quadratic"
    LINEARIZED = "linearized"


def _as_case(which) -> DiscCase:
    if isinstance(which, DiscCase):
        return which
    return DiscCase(str(which).lower())


@dataclass
class SymBilinear:
    """A tuple of r complex symmetric p x p matrices, stored symmetrized."""

    matrices: np.ndarray

    def __post_init__(self):
        M = np.asarray(self.matrices, dtype=complex)
        if M.ndim != 3 or M.shape[1] != M.shape[2]:
            raise ValueError(f"matrices must have shape (r, p, p), got {M.shape}")
        skew = np.abs(M - np.swapaxes(M, 1, 2)).max()
        scale = max(np.abs(M).max(), 1.0)
        if skew > 1e-8 * scale:
            raise ValueError(f"matrices are not symmetric (max asymmetry {skew:.3e})")
        self.matrices = 0.5 * (M + np.swapaxes(M, 1, 2))

    @property
    def r(self) -> int:
        return self.matrices.shape[0]

    @property
    def p(self) -> int:
        return self.matrices.shape[1]

    @property
    def dims(self) -> tuple:
        return (self.p, self.r)

    def frobenius_norm(self) -> float:
        return float(np.linalg.norm(self.matrices))


@dataclass(frozen=True)
class MinOpts:
    """Multistart settings for the sphere-minimum searches."""

    restarts: int = 64
    max_iter: int = 200
    tol: float = 1e-12
    seed: int = 0


def codim(which, n: int, r: int) -> int:
    """Complex codimension of the discriminant, in its validity regime."""
    case = _as_case(which)
    if not (isinstance(n, (int, np.integer)) and isinstance(r, (int, np.integer))):
        raise TypeError("n and r must be integers")
    if r < 1 or r > n:
        raise ValueError(f"need 1 <= r <= n, got n={n}, r={r}")
    if case is DiscCase.BILINEAR:
        if not 3 * r > 2 * n - 2:
            raise RegimeError(f"Bilinear codimension requires 3r > 2n-2; got 3*{r} = {3*r} <= {2*n-2}")
        return 3 * r - 2 * n + 2
    if case is DiscCase.QUADRATIC:
        if not 2 * r > n - 1:
            raise RegimeError(f"Quadratic codimension requires 2r > n-1; got 2*{r} = {2*r} <= {n-1}")
        return 2 * r - n + 1
    return r * (n - r) - (n - r - 1)


# ---------------------------------------------------------------------------
# closed-form helpers (batched over leading axes)
# ---------------------------------------------------------------------------

def _lambda_min_2x2(H: np.ndarray) -> np.ndarray:
    """Smallest eigenvalue of Hermitian PSD 2x2 matrices, batched."""
    a = H[..., 0, 0].real
    c = H[..., 1, 1].real
    b = H[..., 0, 1]
    half_tr = 0.5 * (a + c)
    disc = np.sqrt(np.maximum(0.25 * (a - c) ** 2 + np.abs(b) ** 2, 0.0))
    return np.maximum(half_tr - disc, 0.0)


def _eigvec_min_2x2(H: np.ndarray) -> np.ndarray:
    """Unit eigenvector for the smallest eigenvalue of Hermitian 2x2, batched."""
    lam = _lambda_min_2x2(H)
    a = H[..., 0, 0].real
    c = H[..., 1, 1].real
    b = H[..., 0, 1]
    # (H - lam I) v = 0: candidate v1 = (b, lam - a), v2 = (lam - c, conj(b))
    v1 = np.stack([b, (lam - a).astype(complex)], axis=-1)
    v2 = np.stack([(lam - c).astype(complex), np.conj(b)], axis=-1)
    n1 = np.linalg.norm(v1, axis=-1)
    n2 = np.linalg.norm(v2, axis=-1)
    use1 = (n1 >= n2)[..., None]
    v = np.where(use1, v1, v2)
    nv = np.linalg.norm(v, axis=-1, keepdims=True)
    # degenerate (H proportional to identity): any unit vector is an eigenvector
    fallback = np.zeros_like(v)
    fallback[..., 0] = 1.0
    v = np.where(nv > 1e-150, v / np.where(nv == 0.0, 1.0, nv), fallback)
    return v


def _min_eigpair(H: np.ndarray):
    """(lambda_min, eigvec) of Hermitian PSD matrices, batched; closed form at p=2."""
    p = H.shape[-1]
    if p == 2:
        return _lambda_min_2x2(H), _eigvec_min_2x2(H)
    w, V = np.linalg.eigh(H)
    return np.maximum(w[..., 0], 0.0), V[..., :, 0]


def _unit_sphere_grid_cp1(G: int) -> np.ndarray:
    """G well-spread representatives of the complex projective line, as unit vectors in C^2."""
    k = np.arange(G)
    z = -1.0 + 2.0 * (k + 0.5) / G
    theta = np.arccos(z)
    golden = math.pi * (3.0 - math.sqrt(5.0))
    phi = golden * k
    return np.stack([np.cos(theta / 2.0), np.sin(theta / 2.0) * np.exp(1j * phi)], axis=-1)


def _start_grid(p: int, restarts: int, seed: int) -> np.ndarray:
    """Multistart unit vectors in C^p: a spread grid at p = 2, seeded Gaussian otherwise."""
    if p == 1:
        return np.ones((1, 1), dtype=complex)
    if p == 2:
        return _unit_sphere_grid_cp1(max(2, restarts))
    rng = stream(seed, 1)
    X = rng.standard_normal((max(2, restarts), p)) + 1j * rng.standard_normal((max(2, restarts), p))
    return X / np.linalg.norm(X, axis=-1, keepdims=True)


# ---------------------------------------------------------------------------
# batched minimizers: T has shape (B, r, p, p); results have shape (B,)
# ---------------------------------------------------------------------------

def _batch_min_linearized(T: np.ndarray) -> np.ndarray:
    B, r, p, _ = T.shape
    M = T.reshape(B, r * p, p)
    H = np.einsum("bkl,bkm->blm", M.conj(), M)
    lam, _ = _min_eigpair(H)
    return np.sqrt(lam)


def _contract_left(T: np.ndarray, x: np.ndarray) -> np.ndarray:
    """M(x)[..., i, l] = sum_k x_k T[..., i, k, l] for x broadcast over leading axes."""
    return np.einsum("...k,...ikl->...il", x, T)


def _bilinear_objective(T: np.ndarray, x: np.ndarray) -> np.ndarray:
    """lambda_min over y of ||T(x, y)||^2, batched (exact in y)."""
    M = _contract_left(T, x)
    H = np.einsum("...il,...im->...lm", M.conj(), M)
    lam, _ = _min_eigpair(H)
    return lam


def _batch_min_bilinear(T: np.ndarray, restarts: int, top_k: int = 4,
                        polish_iters: int = 40, tol: float = 1e-14,
                        record: Optional[list] = None) -> np.ndarray:
    """min over unit (x, y) of ||T(x, y)||, by grid + exact alternating polish."""
    B, r, p, _ = T.shape
    if p == 1:
        return np.linalg.norm(T[:, :, 0, 0], axis=-1)
    grid = _start_grid(p, restarts, seed=2)  # (G, p)
    lam_grid = _bilinear_objective(T[:, None], grid[None, :])  # (B, G)
    G = grid.shape[0]
    k = min(top_k, G)
    top = np.argpartition(lam_grid, k - 1, axis=1)[:, :k]  # (B, k)
    x = grid[top]  # (B, k, p)
    Tk = T[:, None]  # (B, 1, r, p, p) broadcasting over starts
    lam = np.take_along_axis(lam_grid, top, axis=1)
    for _ in range(polish_iters):
        # exact y-step: smallest right-singular pair of M(x)
        M = np.einsum("...k,...ikl->...il", x, Tk)
        H = np.einsum("...il,...im->...lm", M.conj(), M)
        lam_y, y = _min_eigpair(H)
        # exact x-step for that y (T_i symmetric: T(x, y) = M(y) x)
        My = np.einsum("...l,...ikl->...ik", y, Tk)
        Hx = np.einsum("...ik,...im->...km", My.conj(), My)
        lam_x, x = _min_eigpair(Hx)
        if record is not None:
            record.append((np.sqrt(lam_y), np.sqrt(lam_x)))
        drop = lam - lam_x
        lam = lam_x
        if np.max(drop) < tol:
            break
    return np.sqrt(np.maximum(lam.min(axis=1), 0.0))


def _quadratic_values(T: np.ndarray, x: np.ndarray) -> np.ndarray:
    return np.einsum("...a,...ial,...l->...i", x, T, x)


def _batch_min_quadratic(T: np.ndarray, restarts: int, top_k: int = 4,
                         max_iter: int = 80, tol: float = 1e-14) -> np.ndarray:
    """min over unit x of ||T(x, x)||, by grid + projected gradient polish."""
    B, r, p, _ = T.shape
    if p == 1:
        return np.linalg.norm(T[:, :, 0, 0], axis=-1)
    grid = _start_grid(p, max(restarts, 2), seed=3)
    v = _quadratic_values(T[:, None], grid[None, :])  # (B, G, r)
    q_grid = np.einsum("...i,...i->...", v, v.conj()).real
    G = grid.shape[0]
    k = min(top_k, G)
    top = np.argpartition(q_grid, k - 1, axis=1)[:, :k]
    x = grid[top]  # (B, k, p)
    Tk = T[:, None]
    q = np.take_along_axis(q_grid, top, axis=1)
    step = np.full_like(q, 0.1)
    for _ in range(max_iter):
        v = _quadratic_values(Tk, x)
        Tx = np.einsum("...ial,...l->...ia", Tk, x)
        g = 2.0 * np.einsum("...i,...ia->...a", v, Tx.conj())
        g -= np.einsum("...a,...a->...", g, x.conj())[..., None] * x
        xn = x - step[..., None] * g
        xn /= np.linalg.norm(xn, axis=-1, keepdims=True)
        vn = _quadratic_values(Tk, xn)
        qn = np.einsum("...i,...i->...", vn, vn.conj()).real
        better = qn < q
        x = np.where(better[..., None], xn, x)
        q = np.where(better, qn, q)
        step = np.where(better, step * 1.2, step * 0.5)
        if np.max(step) < max(tol, 1e-16):
            break
    return np.sqrt(np.maximum(q.min(axis=1), 0.0))


def _batch_min(T: np.ndarray, case: DiscCase, restarts: int) -> np.ndarray:
    if case is DiscCase.LINEARIZED:
        return _batch_min_linearized(T)
    if case is DiscCase.BILINEAR:
        return _batch_min_bilinear(T, restarts)
    return _batch_min_quadratic(T, restarts)


# ---------------------------------------------------------------------------
# public single-instance API
# ---------------------------------------------------------------------------

def min_sphere_norm(T: SymBilinear, which, opts: MinOpts = MinOpts()) -> float:
    """Minimum of the case norm over unit spheres.

    Bilinear: min_{|x|=|y|=1} ||(x^t T_i y)_i||; Quadratic: the diagonal
    minimum; Linearized: min_{|x|=1} (sum_{ij} |(T_i x)_j|^2)^{1/2}, computed
    exactly as the smallest singular value of the stacked (r p) x p matrix.
    """
    case = _as_case(which)
    if T.p < 1:
        raise ValueError("p must be >= 1")
    batch = T.matrices[None]
    return float(_batch_min(batch, case, opts.restarts)[0])


def dist_to_discriminant(T: SymBilinear, which) -> float:
    """L2-distance (n-r)^{-1} min_sphere_norm to the case discriminant, in its regime."""
    case = _as_case(which)
    p, r = T.p, T.r
    n = p + r
    if case in (DiscCase.BILINEAR, DiscCase.QUADRATIC):
        if not 3 * r > 2 * n - 2:
            raise RegimeError(
                f"{case.value} distance formula requires 3r > 2n-2; got 3*{r} = {3*r} <= {2*n-2}"
            )
    return min_sphere_norm(T, case) / p


# ---------------------------------------------------------------------------
# tail experiment
# ---------------------------------------------------------------------------

@dataclass
class TailResult:
    which: DiscCase
    n: int
    r: int
    codim: int
    n_samples: int
    eps: np.ndarray
    count: np.ndarray
    prob: np.ndarray
    slope_fit: float
    fit_window: tuple

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("eps,count,prob,codim,slope_fit\n")
            for e, c, q in zip(self.eps, self.count, self.prob):
                fh.write(f"{e:.17g},{int(c)},{q:.17g},{self.codim},{self.slope_fit:.17g}\n")


def fit_tail_slope(eps: np.ndarray, count: np.ndarray, prob: np.ndarray,
                   min_count: int = 100):
    """Least-squares log-log slope over the decade starting at the first grid
    point with at least ``min_count`` hits."""
    eligible = np.nonzero(count >= min_count)[0]
    if eligible.size == 0:
        raise ValueError(f"insufficient samples: no grid point reached {min_count} hits")
    lo = eps[eligible[0]]
    window = eligible[(eps[eligible] >= lo) & (eps[eligible] <= 10.0 * lo)]
    if window.size < 2:
        raise ValueError("insufficient samples: fewer than two grid points in the fitted decade")
    x = np.log(eps[window])
    y = np.log(prob[window])
    slope = np.polyfit(x, y, 1)[0]
    return float(slope), (float(eps[window[0]]), float(eps[window[-1]]))


def tail_experiment(which, n: int, r: int, n_samples: int,
                    eps_grid: Optional[Sequence[float]] = None,
                    seed: int = 0, restarts: int = 64, workers: int = 1,
                    block_size: int = BLOCK_SIZE) -> TailResult:
    """Empirical small-distance tail of Gaussian symmetric tuples.

    Samples T with i.i.d. complex Gaussian entries weighted so diagonal
    variance is twice the off-diagonal variance, computes the scale-invariant
    ratio dist(T)/||T||_F on each sample, and reports the empirical CDF on
    ``eps_grid`` together with the fitted decade slope (expected: 2 codim).
    """
    case = _as_case(which)
    cd = codim(case, n, r)  # validates the regime
    p = n - r
    if p < 1:
        raise ValueError(f"need r < n for a nontrivial kernel, got n={n}, r={r}")
    if eps_grid is None:
        eps_grid = np.geomspace(1e-3, 1.0, 61)
    eps = np.asarray(eps_grid, dtype=float)
    if eps.ndim != 1 or eps.size < 2 or not (np.diff(eps) > 0).all():
        raise ValueError("eps_grid must be an increasing 1-d grid")

    def block_fn(_b, size, rng):
        T = sample_sym_gaussian(rng, (size, r), p)
        norms = np.linalg.norm(T.reshape(size, -1), axis=1)
        msn = _batch_min(T, case, restarts)
        ratio = (msn / p) / norms
        idx = np.searchsorted(eps, ratio, side="left")
        return np.bincount(idx, minlength=eps.size + 1)[: eps.size]

    partials = map_reduce_blocks(seed, n_samples, block_fn, workers=workers,
                                 block_size=block_size)
    count = np.cumsum(sum(partials))
    prob = count / float(n_samples)
    slope, window = fit_tail_slope(eps, count, prob)
    return TailResult(
        which=case, n=n, r=r, codim=cd, n_samples=n_samples,
        eps=eps, count=count, prob=prob, slope_fit=slope, fit_window=window,
    )
