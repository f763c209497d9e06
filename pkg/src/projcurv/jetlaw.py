"""Closed-form Gaussian laws of 2-jets: the local limit model and the exact finite-d law.

Jets are the triple (F, S, T) of value, first and second covariant derivative
in g-orthonormal frames, at a fixed point, of a random system.  Because the
ensemble is unitarily invariant, the law does not depend on the point.  This
module exposes the law in the *rescaled* frame (S divided by sqrt(d), T by d,
overall unit-frame normalization absorbed into the frame), where the exact
finite-d covariance has the closed form

    F-block:  Id_r
    S-block:  pi * Id_{r n}
    T-block:  pi^2 * (1 - 1/d) * Sigma_GOE  (per component)

under the E|a|^2 = 1 convention (multiply by 2 under E|a|^2 = 2), with all
cross-blocks exactly zero.  Sigma_GOE is the covariance of the independent
upper-triangle coordinates of a complex symmetric matrix whose diagonal
variance is twice the off-diagonal variance.  As d -> infinity the law
converges, at rate 1/d in max-entry distance, to the flat local model whose
covariance kernel is ``bargmann_fock_kernel``.

Coordinate ordering of the full covariance matrix: F components F_1..F_r,
then S row-major (component i, direction j) -> index i*n + j, then T
(component i, pair (a <= b) lexicographic).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .kostlan import Convention, Dims
from .streams import stream

__all__ = [
    "sym_pairs",
    "sigma_goe",
    "bargmann_fock_kernel",
    "CovarianceModel",
    "cov_bf",
    "kostlan_jet_covariance",
    "sample_jet",
    "sample_jet_batch",
    "density_at_zero",
    "sym_gaussian_logdensity",
    "sample_sym_gaussian",
]


@lru_cache(maxsize=64)
def sym_pairs(n: int) -> tuple:
    """Index pairs (i <= j) of a symmetric n x n matrix, lexicographic."""
    return tuple((i, j) for i in range(n) for j in range(i, n))


def sigma_goe(n: int) -> np.ndarray:
    """Covariance of the upper-triangle coordinates: diagonal entries 2, off-diagonal pairs 1."""
    pairs = sym_pairs(n)
    return np.diag([2.0 if i == j else 1.0 for (i, j) in pairs])


def bargmann_fock_kernel(z: np.ndarray, w: np.ndarray) -> complex:
    """Covariance kernel exp(-(pi/2)(|z|^2 + |w|^2 - 2<z,w>)) of the flat local model."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    zw = np.sum(z * w.conj())
    return complex(np.exp(-0.5 * math.pi * (np.sum(np.abs(z) ** 2) + np.sum(np.abs(w) ** 2) - 2.0 * zw)))


def _jet_dim(n: int, r: int) -> int:
    return r * (1 + n + n * (n + 1) // 2)


@dataclass
class CovarianceModel:
    """Hermitian PSD covariance over the jet coordinates (see module docstring for ordering)."""

    dims: Dims
    matrix: np.ndarray
    kind: str  # "bargmann_fock" or "kostlan_exact"
    convention: Convention = Convention.VAR_ONE
    d: Optional[int] = None

    def __post_init__(self):
        k = _jet_dim(self.dims.n, self.dims.r)
        self.matrix = np.asarray(self.matrix, dtype=complex)
        if self.matrix.shape != (k, k):
            raise ValueError(f"covariance must be {k} x {k}")
        if np.abs(self.matrix - self.matrix.conj().T).max() > 1e-12 * max(1.0, np.abs(self.matrix).max()):
            raise ValueError("covariance must be Hermitian")
        ev = np.linalg.eigvalsh(self.matrix)
        if ev.min() < -1e-10 * max(1.0, ev.max()):
            raise ValueError(f"covariance not PSD: min eigenvalue {ev.min():.3e}")

    @property
    def n_coords(self) -> int:
        return self.matrix.shape[0]

    def _slices(self):
        n, r = self.dims.n, self.dims.r
        np_ = len(sym_pairs(n))
        sF = slice(0, r)
        sS = slice(r, r + r * n)
        sT = slice(r + r * n, r + r * n + r * np_)
        return sF, sS, sT

    @property
    def f_block(self) -> np.ndarray:
        sF, _, _ = self._slices()
        return self.matrix[sF, sF]

    @property
    def s_block(self) -> np.ndarray:
        _, sS, _ = self._slices()
        return self.matrix[sS, sS]

    @property
    def t_block(self) -> np.ndarray:
        _, _, sT = self._slices()
        return self.matrix[sT, sT]


def _assemble(dims: Dims, f_coeff: float, s_coeff: float, t_pair_block: np.ndarray) -> np.ndarray:
    n, r = dims.n, dims.r
    np_ = len(sym_pairs(n))
    k = _jet_dim(n, r)
    M = np.zeros((k, k), dtype=complex)
    M[:r, :r] = f_coeff * np.eye(r)
    M[r : r + r * n, r : r + r * n] = s_coeff * np.eye(r * n)
    off = r + r * n
    for i in range(r):
        sl = slice(off + i * np_, off + (i + 1) * np_)
        M[sl, sl] = t_pair_block
    return M


def cov_bf(dims: Dims, convention: Convention = Convention.VAR_ONE) -> CovarianceModel:
    """Jet covariance of the flat local model: diag(1, pi Id, pi^2 Sigma_GOE) per component."""
    v = convention.variance
    M = _assemble(dims, v, math.pi * v, math.pi**2 * v * sigma_goe(dims.n))
    return CovarianceModel(dims, M, kind="bargmann_fock", convention=convention)


def kostlan_jet_covariance(dims: Dims, d: Optional[int] = None, convention: Convention = Convention.VAR_ONE) -> CovarianceModel:
    """Exact rescaled-jet covariance of the degree-d ensemble.

    Derived by differentiating the normalized two-point kernel
    N_d(z, w) = (1 + <z, w>)^d (1 + |z|^2)^{-d/2} (1 + |w|^2)^{-d/2}
    at z = w = 0 in g-frames: F-block 1, S-block pi, T-block
    pi^2 (1 - 1/d) Sigma_GOE, cross-blocks exactly zero (every mixed kernel
    derivative at the origin carries an unmatched holomorphic factor).
    """
    d = dims.d if d is None else int(d)
    if d < 2:
        raise ValueError("exact jet law needs d >= 2 (the second-derivative block degenerates at d = 1)")
    v = convention.variance
    M = _assemble(dims, v, math.pi * v, math.pi**2 * (1.0 - 1.0 / d) * v * sigma_goe(dims.n))
    return CovarianceModel(dims, M, kind="kostlan_exact", convention=convention, d=d)


def _chol_with_jitter(M: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        jitter = 1e-10 * np.mean(np.abs(np.diag(M)))
        return np.linalg.cholesky(M + jitter * np.eye(M.shape[0]))


def _conditional_on_f_zero(cov: CovarianceModel) -> np.ndarray:
    """Covariance of (S, T) given F = 0 (Schur complement; conditional mean is zero)."""
    r = cov.dims.r
    M = cov.matrix
    Cff = M[:r, :r]
    Crf = M[r:, :r]
    Crr = M[r:, r:]
    return Crr - Crf @ np.linalg.solve(Cff, Crf.conj().T)


def sample_jet_batch(cov: CovarianceModel, rng: np.random.Generator, size: int, condition_F_zero: bool = False):
    """Draw ``size`` jets; returns (F, S, T) arrays (size, r), (size, r, n), (size, r, n, n)."""
    n, r = cov.dims.n, cov.dims.r
    pairs = sym_pairs(n)
    if condition_F_zero:
        M = _conditional_on_f_zero(cov)
        L = _chol_with_jitter(M)
        xi = (rng.standard_normal((size, M.shape[0])) + 1j * rng.standard_normal((size, M.shape[0]))) / math.sqrt(2.0)
        rest = xi @ L.T
        F = np.zeros((size, r), dtype=complex)
    else:
        L = _chol_with_jitter(cov.matrix)
        xi = (rng.standard_normal((size, cov.n_coords)) + 1j * rng.standard_normal((size, cov.n_coords))) / math.sqrt(2.0)
        full = xi @ L.T
        F = full[:, :r]
        rest = full[:, r:]
    S = rest[:, : r * n].reshape(size, r, n)
    tcoords = rest[:, r * n :].reshape(size, r, len(pairs))
    T = np.zeros((size, r, n, n), dtype=complex)
    for k, (i, j) in enumerate(pairs):
        T[:, :, i, j] = tcoords[:, :, k]
        if i != j:
            T[:, :, j, i] = tcoords[:, :, k]
    return F, S, T


def sample_jet(cov: CovarianceModel, seed: int = 0, condition_F_zero: bool = False):
    """Draw a single jet (F, S, T) from the model (deterministic in ``seed``)."""
    F, S, T = sample_jet_batch(cov, stream(seed, 0), 1, condition_F_zero)
    return F[0], S[0], T[0]


def density_at_zero(cov: CovarianceModel) -> float:
    """Gaussian density of the value block F at 0: 1 / (pi^r det(F-block))."""
    r = cov.dims.r
    detF = np.linalg.det(cov.f_block).real
    if detF <= 0:
        raise ValueError("F-block must be nonsingular")
    return float(1.0 / (math.pi**r * detF))


# ---------------------------------------------------------------------------
# GOE-weighted Gaussian on complex symmetric matrices
# ---------------------------------------------------------------------------

def sym_gaussian_logdensity(T: np.ndarray, scale: float = 2.0) -> np.ndarray:
    """Log-density of complex symmetric matrices under coordinate covariance scale * Sigma_GOE.

    With scale = 2 (diagonal variance 4, off-diagonal 2) the density is
    proportional to exp(-tr(T T*) / 4): the exponent equals tr(T T*)/(2*scale)
    because the trace counts off-diagonal entries twice.
    """
    T = np.asarray(T, dtype=complex)
    n = T.shape[-1]
    tr = np.einsum("...ij,...ij->...", T, T.conj()).real
    n_pairs = n * (n + 1) // 2
    log_norm = n * math.log(math.pi * 2.0 * scale) + (n_pairs - n) * math.log(math.pi * scale)
    return -tr / (2.0 * scale) - log_norm


def sample_sym_gaussian(rng: np.random.Generator, shape: tuple, p: int, scale: float = 2.0) -> np.ndarray:
    """Complex symmetric (..., p, p) matrices with coordinate covariance scale * Sigma_GOE."""
    full = (rng.standard_normal(shape + (p, p)) + 1j * rng.standard_normal(shape + (p, p))) * math.sqrt(scale / 2.0)
    diag_extra = (rng.standard_normal(shape + (p,)) + 1j * rng.standard_normal(shape + (p,))) * math.sqrt(scale / 2.0)
    T = np.zeros(shape + (p, p), dtype=complex)
    iu = np.triu_indices(p, k=1)
    T[..., iu[0], iu[1]] = full[..., iu[0], iu[1]]
    T[..., iu[1], iu[0]] = full[..., iu[0], iu[1]]
    idx = np.arange(p)
    T[..., idx, idx] = diag_extra * math.sqrt(2.0)
    return T
