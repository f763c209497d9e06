"""Random holomorphic polynomial systems on CP^n and their 2-jets.

A sample of the ensemble is an r-tuple of degree-d homogeneous polynomials in
n+1 complex variables with independent Gaussian coefficients in the unitarily
weighted monomial basis

    sqrt((n+d)! / (n! * a_0! * ... * a_n!)) * Z^a,        |a| = d.

The weights make the induced Gaussian field invariant under the unitary group
of C^{n+1}, so every statistic computed at one point of CP^n is the statistic
at every point.  Two coefficient-variance conventions are supported
(``Convention.VAR_TWO``: E|a|^2 = 2, and ``Convention.VAR_ONE``: E|a|^2 = 1);
all curvature statistics downstream are scale-invariant, so the choice only
matters when comparing raw moments.

Geometry conventions.  The Fubini-Study form is normalized so that a
projective line has unit symplectic area.  In the affine chart
z -> [1 : z_1 : ... : z_n] centered at a point, a g-orthonormal complex frame
is sqrt(pi) * d/dz_j, so jet components in g-frames are chart derivatives
multiplied by ``frame_scale = sqrt(pi)`` per derivative order.  With this
normalization the largest holomorphic bisectional curvature of the ambient
space is 4*pi (``hbc_bound``).

2-jets are computed in the holomorphic chart gauge at the chart center.
There both the Chern connection form and the metric Christoffel symbols
vanish, so the covariant value/first/second derivatives are literally the
chart derivatives of the local representative, contracted with a unitary
frame adapted to the point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .streams import complex_normal, stream

__all__ = [
    "Convention",
    "Dims",
    "MetricContext",
    "JetScale",
    "Jet2",
    "PolySystem",
    "degree_exponents",
    "kostlan_basis_coeff",
    "kostlan_weights",
    "kernel_normalization",
    "sample_system",
    "adapted_frame",
    "adapted_frames",
    "physical_jet",
    "rescale_jet",
    "hom_values",
    "hom_value_and_grad",
    "jet_batch_points",
    "jet_batch_systems",
    "sample_coefficient_batch",
]


class Convention(Enum):
    """Coefficient variance convention: the value is E|a|^2 per complex coefficient."""

    VAR_TWO = 2.0
    VAR_ONE = 1.0

    @property
    def variance(self) -> float:
        return float(self.value)


@dataclass(frozen=True)
class Dims:
    """Problem dimensions: CP^n, r equations of degree d, zero locus of complex dim m = n - r."""

    n: int
    r: int
    d: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if not 1 <= self.r <= self.n - 1:
            raise ValueError(f"r must satisfy 1 <= r <= n-1, got r={self.r}, n={self.n}")
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")

    @property
    def m(self) -> int:
        return self.n - self.r

    def with_d(self, d: int) -> "Dims":
        return Dims(self.n, self.r, d)


@dataclass(frozen=True)
class MetricContext:
    """Ambient metric constants used by jet and curvature computations.

    frame_scale: factor turning one chart derivative into a g-frame component.
    hbc_bound:   largest holomorphic bisectional curvature of the ambient space;
                 the ambient curvature form is (hbc_bound/2) * (1 + |<X,Y>|^2).
    """

    frame_scale: float = math.sqrt(math.pi)
    hbc_bound: float = 4.0 * math.pi

    @staticmethod
    def fubini_study() -> "MetricContext":
        return MetricContext()

    @staticmethod
    def flat() -> "MetricContext":
        """Euclidean ambient space: unit frames, zero ambient curvature."""
        return MetricContext(frame_scale=1.0, hbc_bound=0.0)


class JetScale(Enum):
    PHYSICAL = "physical"
    RESCALED = "rescaled"


@dataclass
class Jet2:
    """Value, first and second covariant derivative at a point, in g-orthonormal frames.

    F: (r,) complex; S: (r, n) complex; T: (r, n, n) complex symmetric.
    """

    F: np.ndarray
    S: np.ndarray
    T: np.ndarray
    scale: JetScale

    def __post_init__(self):
        self.F = np.asarray(self.F, dtype=complex)
        self.S = np.asarray(self.S, dtype=complex)
        self.T = np.asarray(self.T, dtype=complex)
        asym = np.abs(self.T - np.swapaxes(self.T, -1, -2)).max()
        norm = max(np.abs(self.T).max(), 1.0)
        if asym > 1e-10 * norm:
            raise ValueError(f"second-derivative block not symmetric: asymmetry {asym:.3e}")
        self.T = 0.5 * (self.T + np.swapaxes(self.T, -1, -2))

    def scaled(self, c: float) -> "Jet2":
        """Multiply all components by a scalar (overall frame renormalization)."""
        return Jet2(self.F * c, self.S * c, self.T * c, self.scale)


@lru_cache(maxsize=64)
def degree_exponents(nvars: int, d: int) -> np.ndarray:
    """All exponent vectors of total degree d in ``nvars`` variables, lex-descending.

    Returns an int array of shape (K, nvars) with K = binom(nvars-1+d, d).
    """

    def gen(v, deg):
        if v == 1:
            yield (deg,)
            return
        for k in range(deg, -1, -1):
            for rest in gen(v - 1, deg - k):
                yield (k,) + rest

    return np.array(list(gen(nvars, d)), dtype=np.int64)


def kostlan_basis_coeff(dims: Dims, alpha) -> float:
    """Weight of the monomial Z^alpha in the unitary basis (log-space, safe to d ~ 200)."""
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != dims.n + 1:
        raise ValueError(f"alpha must have n+1 = {dims.n + 1} entries, got {len(alpha)}")
    if any(a < 0 for a in alpha):
        raise ValueError(f"alpha entries must be nonnegative, got {alpha}")
    if sum(alpha) != dims.d:
        raise ValueError(f"|alpha| must equal d = {dims.d}, got {sum(alpha)}")
    log_w = math.lgamma(dims.n + dims.d + 1) - math.lgamma(dims.n + 1)
    log_w -= sum(math.lgamma(a + 1) for a in alpha)
    return math.exp(0.5 * log_w)


def kostlan_weights(dims: Dims) -> np.ndarray:
    """Vector of basis weights for every degree-d exponent, in ``degree_exponents`` order."""
    expo = degree_exponents(dims.n + 1, dims.d)
    log_w = math.lgamma(dims.n + dims.d + 1) - math.lgamma(dims.n + 1)
    log_w = log_w - np.sum(_lgamma_int(expo + 1), axis=1)
    return np.exp(0.5 * log_w)


@lru_cache(maxsize=8)
def _lgamma_table(nmax: int) -> np.ndarray:
    return np.array([math.lgamma(k) for k in range(1, nmax + 1)])


def _lgamma_int(a: np.ndarray) -> np.ndarray:
    return _lgamma_table(int(a.max()))[a - 1]


def kernel_normalization(dims: Dims) -> float:
    """sqrt(binom(n+d, n)): the unit-frame norm of the ensemble at coincident points.

    Dividing a jet by this factor puts it in the frame where the value
    component has E|F_i|^2 = E|a|^2 (the frame used by the exact jet law).
    """
    log_b = math.lgamma(dims.n + dims.d + 1) - math.lgamma(dims.n + 1) - math.lgamma(dims.d + 1)
    return math.exp(0.5 * log_b)


@dataclass
class PolySystem:
    """An r-tuple of degree-d homogeneous polynomials in unitary-basis coordinates.

    coeffs[i, k] is the coordinate of component i on the k-th weighted monomial
    (ordering given by ``degree_exponents(n+1, d)``).  ``monomial_coeffs`` are
    the plain monomial coefficients, i.e. coordinates times basis weights.
    """

    dims: Dims
    coeffs: np.ndarray
    convention: Convention = Convention.VAR_TWO

    def __post_init__(self):
        K = degree_exponents(self.dims.n + 1, self.dims.d).shape[0]
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.shape != (self.dims.r, K):
            raise ValueError(f"coeffs must have shape (r, K) = ({self.dims.r}, {K})")
        self._mono = None

    @property
    def exponents(self) -> np.ndarray:
        return degree_exponents(self.dims.n + 1, self.dims.d)

    @property
    def monomial_coeffs(self) -> np.ndarray:
        if self._mono is None:
            self._mono = self.coeffs * kostlan_weights(self.dims)[None, :]
        return self._mono

    def coeff(self, i: int, alpha) -> complex:
        """Unitary-basis coordinate of component i on monomial Z^alpha."""
        k = _exponent_index(self.dims, tuple(int(a) for a in alpha))
        return complex(self.coeffs[i, k])

    @staticmethod
    def from_monomials(dims: Dims, entries: dict, convention: Convention = Convention.VAR_TWO) -> "PolySystem":
        """Build a system from plain monomial coefficients {(i, alpha): value}."""
        expo = degree_exponents(dims.n + 1, dims.d)
        coeffs = np.zeros((dims.r, expo.shape[0]), dtype=complex)
        w = kostlan_weights(dims)
        for (i, alpha), val in entries.items():
            k = _exponent_index(dims, tuple(int(a) for a in alpha))
            coeffs[i, k] = val / w[k]
        return PolySystem(dims, coeffs, convention)


@lru_cache(maxsize=64)
def _exponent_lookup(n: int, d: int) -> dict:
    expo = degree_exponents(n + 1, d)
    return {tuple(row): k for k, row in enumerate(expo.tolist())}


def _exponent_index(dims: Dims, alpha: tuple) -> int:
    lut = _exponent_lookup(dims.n, dims.d)
    if alpha not in lut:
        raise ValueError(f"bad exponent {alpha} for (n, d) = ({dims.n}, {dims.d})")
    return lut[alpha]


def sample_system(dims: Dims, convention: Convention = Convention.VAR_TWO, seed: int = 0) -> PolySystem:
    """Draw one system; coefficients are i.i.d. circular Gaussians with E|a|^2 set by the convention."""
    K = degree_exponents(dims.n + 1, dims.d).shape[0]
    rng = stream(seed, 0)
    coeffs = complex_normal(rng, (dims.r, K), var=convention.variance)
    return PolySystem(dims, coeffs, convention)


def sample_coefficient_batch(dims: Dims, n_systems: int, convention: Convention, rng: np.random.Generator) -> np.ndarray:
    """Coefficient array (n_systems, r, K) for vectorized many-system experiments."""
    K = degree_exponents(dims.n + 1, dims.d).shape[0]
    return complex_normal(rng, (n_systems, dims.r, K), var=convention.variance)


# ---------------------------------------------------------------------------
# adapted frames
# ---------------------------------------------------------------------------

def adapted_frames(xs: np.ndarray) -> np.ndarray:
    """Unitary frames U with U e_0 = x for a batch of unit vectors xs (N, n+1).

    Householder construction with a fixed phase rule, so the frame is a
    deterministic function of the point.
    """
    xs = np.asarray(xs, dtype=complex)
    single = xs.ndim == 1
    if single:
        xs = xs[None, :]
    norms = np.linalg.norm(xs, axis=1)
    if np.abs(norms - 1.0).max() > 1e-12:
        raise ValueError("points must be unit vectors of C^{n+1} (tolerance 1e-12)")
    N, np1 = xs.shape
    x0 = xs[:, 0]
    phase = np.where(np.abs(x0) > 0, x0 / np.where(np.abs(x0) > 0, np.abs(x0), 1.0), 1.0)
    e0 = np.zeros(np1, dtype=complex)
    e0[0] = 1.0
    w = xs - phase[:, None] * e0[None, :]
    wn2 = np.sum(np.abs(w) ** 2, axis=1)
    U = np.broadcast_to(np.eye(np1, dtype=complex), (N, np1, np1)).copy()
    ok = wn2 > 1e-28
    if np.any(ok):
        wok = w[ok]
        H = np.eye(np1, dtype=complex)[None] - 2.0 * wok[:, :, None] * wok[:, None, :].conj() / wn2[ok, None, None]
        U[ok] = H
    U[:, :, 0] *= phase[:, None]
    if single:
        return U[0]
    return U


def adapted_frame(x: np.ndarray) -> np.ndarray:
    """Deterministic unitary U with U e_0 = x, for a single unit vector x."""
    return adapted_frames(np.asarray(x))


# ---------------------------------------------------------------------------
# monomial evaluation of values / gradients / Hessians
# ---------------------------------------------------------------------------

def _power_tables(xs: np.ndarray, dmax: int) -> np.ndarray:
    """pw[c, b, e] = xs[b, c]**e for e = 0..dmax."""
    N, nv = xs.shape
    pw = np.empty((nv, N, dmax + 1), dtype=complex)
    pw[:, :, 0] = 1.0
    for e in range(1, dmax + 1):
        pw[:, :, e] = pw[:, :, e - 1] * xs.T
    return pw


def _hom_value_grad_hess(mono_coeffs: np.ndarray, expo: np.ndarray, xs: np.ndarray):
    """Value, gradient and Hessian of homogeneous polynomials at a batch of points.

    mono_coeffs: (r, K) plain monomial coefficients; expo: (K, nv); xs: (N, nv).
    Returns F (N, r), G (N, r, nv), H (N, r, nv, nv).
    """
    N, nv = xs.shape
    K = expo.shape[0]
    d = int(expo.sum(axis=1)[0]) if K else 0
    pw = _power_tables(xs, d)

    # R[c]: (N, K) plain powers; D1[c]: e * x^(e-1); D2[c]: e (e-1) x^(e-2)
    R = np.empty((nv, N, K), dtype=complex)
    D1 = np.empty((nv, N, K), dtype=complex)
    D2 = np.empty((nv, N, K), dtype=complex)
    for c in range(nv):
        e = expo[:, c]
        R[c] = pw[c][:, e]
        em1 = np.maximum(e - 1, 0)
        em2 = np.maximum(e - 2, 0)
        D1[c] = e[None, :] * pw[c][:, em1]
        D2[c] = (e * (e - 1))[None, :] * pw[c][:, em2]

    def prod_excluding(skip):
        out = np.ones((N, K), dtype=complex)
        for c in range(nv):
            if c not in skip:
                out = out * R[c]
        return out

    mono = prod_excluding(())
    F = mono @ mono_coeffs.T

    G = np.empty((N, mono_coeffs.shape[0], nv), dtype=complex)
    for c in range(nv):
        G[:, :, c] = (D1[c] * prod_excluding((c,))) @ mono_coeffs.T

    Hs = np.empty((N, mono_coeffs.shape[0], nv, nv), dtype=complex)
    for c in range(nv):
        Hs[:, :, c, c] = (D2[c] * prod_excluding((c,))) @ mono_coeffs.T
        for c2 in range(c + 1, nv):
            val = (D1[c] * D1[c2] * prod_excluding((c, c2))) @ mono_coeffs.T
            Hs[:, :, c, c2] = val
            Hs[:, :, c2, c] = val
    return F, G, Hs


def hom_values(sys: PolySystem, xs: np.ndarray) -> np.ndarray:
    """Values of the system's homogeneous polynomials at points xs (N, n+1) -> (N, r)."""
    xs = np.asarray(xs, dtype=complex)
    expo = sys.exponents
    pw = _power_tables(xs, sys.dims.d)
    mono = np.ones((xs.shape[0], expo.shape[0]), dtype=complex)
    for c in range(xs.shape[1]):
        mono *= pw[c][:, expo[:, c]]
    return mono @ sys.monomial_coeffs.T


def hom_value_and_grad(sys: PolySystem, xs: np.ndarray):
    """Values and ambient-coordinate gradients at points xs (N, n+1).

    Returns (F, G) with shapes (N, r) and (N, r, n+1); no frame adaptation.
    """
    F, G, _ = _hom_value_grad_hess(sys.monomial_coeffs, sys.exponents,
                                   np.asarray(xs, dtype=complex))
    return F, G


def jet_batch_points(sys: PolySystem, xs: np.ndarray, ctx: MetricContext = MetricContext.fubini_study()):
    """Physical 2-jets of one system at many unit points xs (N, n+1).

    Returns (F, S, T) with shapes (N, r), (N, r, n), (N, r, n, n).
    """
    xs = np.asarray(xs, dtype=complex)
    U = adapted_frames(xs)
    F, G, H = _hom_value_grad_hess(sys.monomial_coeffs, sys.exponents, xs)
    U1 = U[:, :, 1:]
    S = np.einsum("bic,bcj->bij", G, U1) * ctx.frame_scale
    T = np.einsum("bcj,bicd,bdk->bijk", U1, H, U1, optimize=True) * ctx.frame_scale**2
    T = 0.5 * (T + np.swapaxes(T, -1, -2))
    return F, S, T


def jet_batch_systems(dims: Dims, coeff_batch: np.ndarray, x: np.ndarray, ctx: MetricContext = MetricContext.fubini_study()):
    """Physical 2-jets of many systems at one unit point x.

    coeff_batch: (B, r, K) unitary-basis coordinates.
    Returns (F, S, T) with shapes (B, r), (B, r, n), (B, r, n, n).
    """
    coeff_batch = np.asarray(coeff_batch, dtype=complex)
    B, r, K = coeff_batch.shape
    mono = coeff_batch.reshape(B * r, K) * kostlan_weights(dims)[None, :]
    F, G, H = _hom_value_grad_hess(mono, degree_exponents(dims.n + 1, dims.d), np.asarray(x, dtype=complex)[None, :])
    U = adapted_frame(x)
    U1 = U[:, 1:]
    F = F[0].reshape(B, r)
    S = np.einsum("ic,cj->ij", G[0], U1).reshape(B, r, dims.n) * ctx.frame_scale
    T = np.einsum("cj,icd,dk->ijk", U1, H[0], U1, optimize=True).reshape(B, r, dims.n, dims.n) * ctx.frame_scale**2
    T = 0.5 * (T + np.swapaxes(T, -1, -2))
    return F, S, T


def physical_jet(sys: PolySystem, x: np.ndarray, ctx: MetricContext = MetricContext.fubini_study()) -> Jet2:
    """2-jet of the system at a unit point x, in g-orthonormal frames adapted to x."""
    x = np.asarray(x, dtype=complex)
    if x.shape != (sys.dims.n + 1,):
        raise ValueError(f"x must be a vector of C^{sys.dims.n + 1}")
    F, S, T = jet_batch_points(sys, x[None, :], ctx)
    return Jet2(F[0], S[0], T[0], JetScale.PHYSICAL)


def rescale_jet(jet: Jet2, d: int) -> Jet2:
    """Rescaled jets: S / sqrt(d), T / d, F unchanged.

    The overall unit-frame normalization (``kernel_normalization``) is left in
    the frame: every downstream curvature statistic is a ratio in which it
    cancels, and this keeps d = 1 a no-op.
    """
    if jet.scale is not JetScale.PHYSICAL:
        raise ValueError("rescale_jet expects a physical-scale jet")
    if d < 1:
        raise ValueError("d must be >= 1")
    return Jet2(jet.F.copy(), jet.S / math.sqrt(d), jet.T / d, JetScale.RESCALED)
