"""Intrinsic curvature of the zero locus from 2-jets, via the second fundamental form.

At a regular point of the zero locus Z = {s = 0}, with jets (S, T) in
g-orthonormal frames, the induced holomorphic bisectional curvature along
unit tangent directions X, Y in ker S is

    hbc_Z(X, Y) = hbc_M(X, Y) - 2 c * T(X,Y)^* (S S^*)^{-1} T(X,Y)

where T(X, Y) = (X^t T_i Y)_i in C^r, hbc_M(X, Y) = (h/2)(1 + |<X,Y>|^2) is
the ambient curvature form with h = ctx.hbc_bound, and c is 1 for
physical-scale jets and d for rescaled jets (``d_scale``).  Holomorphic
sectional curvature is the diagonal hc(X) = hbc(X, X); Ricci and scalar
curvature are the partial traces

    Ricci_Z(X) = sum_i hbc_Z(X, e_i),      scal_Z = sum_{i,j} hbc_Z(e_i, e_j)

over a g-orthonormal complex basis of ker S (both are basis-independent, and
for one-dimensional loci all four quantities coincide).

The suprema over unit directions are computed by multistart projected
gradient ascent on the unit sphere(s) of ker S, except where an exact
reduction exists: scal is a fixed finite sum, and Ricci(X) is a Hermitian
quadratic form in X, so its extrema are eigenvalues.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .kostlan import MetricContext

__all__ = [
    "OptimizerOpts",
    "CurvatureKind",
    "CurvatureReport",
    "FilterVerdict",
    "ambient_hbc",
    "gram_matrix",
    "sff_quadratic",
    "kernel_basis",
    "hbc_at",
    "restricted_second_form",
    "curvature_report",
    "hb_tilde_filter",
    "batch_curvature_values",
]


class CurvatureKind(Enum):
    HBC = "hbc"
    HC = "hc"
    RICCI = "ricci"
    SCAL = "scal"


class FilterVerdict(Enum):
    CERTIFIED_BELOW = "certified_below"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class OptimizerOpts:
    """Multistart projected-gradient settings for direction suprema."""

    restarts: int = 32
    tol: float = 1e-8
    max_iter: int = 300
    seed: int = 0


@dataclass
class CurvatureReport:
    sup_hbc: float
    sup_hc: float
    sup_ricci: float
    scal: float
    m: int
    converged: bool
    witness_x: np.ndarray
    witness_y: np.ndarray


def ambient_hbc(X: np.ndarray, Y: np.ndarray, ctx: MetricContext = MetricContext.fubini_study()) -> float:
    """Ambient holomorphic bisectional curvature (h/2)(1 + |<X,Y>_g|^2) for unit X, Y."""
    X = np.asarray(X, dtype=complex)
    Y = np.asarray(Y, dtype=complex)
    inner = np.vdot(Y, X)  # Hermitian <X, Y>
    return float(0.5 * ctx.hbc_bound * (1.0 + abs(inner) ** 2))


def gram_matrix(S: np.ndarray) -> np.ndarray:
    """Gram matrix A = S S^* of the first-derivative rows (r x r Hermitian)."""
    S = np.asarray(S, dtype=complex)
    return S @ S.conj().T


def sff_quadratic(A: np.ndarray, v: np.ndarray) -> float:
    """Nonnegative second-fundamental-form quadratic v^* A^{-1} v."""
    v = np.asarray(v, dtype=complex)
    sol = np.linalg.solve(A, v)
    return float(np.vdot(v, sol).real)


def kernel_basis(S: np.ndarray, rel_tol: float = 1e-8) -> np.ndarray:
    """g-orthonormal complex basis of ker S as columns of an n x m matrix.

    Raises if the point is numerically non-transverse (smallest singular value
    below rel_tol times the largest).
    """
    S = np.asarray(S, dtype=complex)
    r, n = S.shape
    _, sv, Vh = np.linalg.svd(S)
    if sv[-1] <= rel_tol * sv[0]:
        raise ValueError(f"non-transverse jet: singular values {sv}")
    return Vh[r:, :].conj().T


def restricted_second_form(S: np.ndarray, T: np.ndarray, rel_tol: float = 1e-8):
    """Restrict T to ker S: returns (B, Ttil) with Ttil_i = B^t T_i B of shape (r, m, m)."""
    B = kernel_basis(S, rel_tol)
    Ttil = np.einsum("pa,ipq,qb->iab", B, np.asarray(T, dtype=complex), B)
    return B, Ttil


def hbc_at(S: np.ndarray, T: np.ndarray, X: np.ndarray, Y: np.ndarray,
           ctx: MetricContext = MetricContext.fubini_study(), d_scale: float = 1.0) -> float:
    """Induced hbc along unit tangent directions X, Y in ker S (ambient coordinates)."""
    S = np.asarray(S, dtype=complex)
    T = np.asarray(T, dtype=complex)
    X = np.asarray(X, dtype=complex)
    Y = np.asarray(Y, dtype=complex)
    for V, name in ((X, "X"), (Y, "Y")):
        if abs(np.linalg.norm(V) - 1.0) > 1e-10:
            raise ValueError(f"{name} must be a unit vector")
        if np.abs(S @ V).max() > 1e-8 * max(1.0, np.abs(S).max()):
            raise ValueError(f"{name} must lie in ker S")
    A = gram_matrix(S)
    v = np.einsum("j,ijk,k->i", X, T, Y)
    return ambient_hbc(X, Y, ctx) - 2.0 * d_scale * sff_quadratic(A, v)


# ---------------------------------------------------------------------------
# suprema over unit directions of the kernel
# ---------------------------------------------------------------------------

def _unit_rows(Z: np.ndarray) -> np.ndarray:
    return Z / np.linalg.norm(Z, axis=-1, keepdims=True)


def _hbc_values(Ttil, Ainv, X, Y, h, c):
    """Vectorized hbc over stacked direction pairs X, Y of shape (R, m)."""
    inner = np.einsum("ra,ra->r", X, Y.conj())
    amb = 0.5 * h * (1.0 + np.abs(inner) ** 2)
    v = np.einsum("ra,iab,rb->ri", X, Ttil, Y)
    q = np.einsum("ri,ij,rj->r", v.conj(), Ainv, v).real
    return amb - 2.0 * c * q


def _sup_hbc_pgd(Ttil, Ainv, h, c, opts: OptimizerOpts):
    """Maximize hbc over unit (X, Y) by projected gradient ascent, all restarts in parallel."""
    r, m, _ = Ttil.shape
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(opts.seed, spawn_key=(7,))))
    R = max(2, opts.restarts)
    X = rng.standard_normal((R, m)) + 1j * rng.standard_normal((R, m))
    Y = rng.standard_normal((R, m)) + 1j * rng.standard_normal((R, m))
    Y[: R // 2] = X[: R // 2]  # half the starts on the diagonal Y = X
    X = _unit_rows(X)
    Y = _unit_rows(Y)
    f = _hbc_values(Ttil, Ainv, X, Y, h, c)
    step = np.full(R, 0.1)
    converged = np.zeros(R, dtype=bool)
    Tc = Ttil.conj()
    for _ in range(opts.max_iter):
        act = ~converged
        if not act.any():
            break
        v = np.einsum("ra,iab,rb->ri", X, Ttil, Y)
        u = v @ Ainv.T  # u_i = (A^{-1} v)_i since Ainv is Hermitian
        inner_yx = np.einsum("ra,ra->r", X, Y.conj())  # <X, Y>_herm = Y^dag X
        gX = 0.5 * h * inner_yx[:, None] * Y - 2.0 * c * np.einsum("ri,iab,rb->ra", u, Tc, Y.conj())
        gY = 0.5 * h * inner_yx.conj()[:, None] * X - 2.0 * c * np.einsum("ri,iab,rb->ra", u, Tc, X.conj())
        gX -= np.einsum("ra,ra->r", gX, X.conj())[:, None] * X
        gY -= np.einsum("ra,ra->r", gY, Y.conj())[:, None] * Y
        Xn = _unit_rows(X + step[:, None] * gX)
        Yn = _unit_rows(Y + step[:, None] * gY)
        fn = _hbc_values(Ttil, Ainv, Xn, Yn, h, c)
        better = fn > f
        upd = act & better
        X[upd] = Xn[upd]
        Y[upd] = Yn[upd]
        gain = np.where(upd, fn - f, 0.0)
        f = np.where(upd, fn, f)
        step = np.where(upd, step * 1.2, step * 0.5)
        converged |= act & (((gain > 0) & (gain < opts.tol)) | (step < 1e-14))
    best = int(np.argmax(f))
    return float(f[best]), X[best], Y[best], bool(converged.all())


def _sup_hc_pgd(Ttil, Ainv, h, c, opts: OptimizerOpts):
    """Maximize hc(X) = hbc(X, X) over the unit sphere (minimize the form quadratic)."""
    r, m, _ = Ttil.shape
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(opts.seed, spawn_key=(11,))))
    R = max(2, opts.restarts)
    X = _unit_rows(rng.standard_normal((R, m)) + 1j * rng.standard_normal((R, m)))

    def q_of(Xc):
        v = np.einsum("ra,iab,rb->ri", Xc, Ttil, Xc)
        return np.einsum("ri,ij,rj->r", v.conj(), Ainv, v).real

    q = q_of(X)
    step = np.full(R, 0.1)
    converged = np.zeros(R, dtype=bool)
    Tc = Ttil.conj()
    for _ in range(opts.max_iter):
        act = ~converged
        if not act.any():
            break
        v = np.einsum("ra,iab,rb->ri", X, Ttil, X)
        u = v @ Ainv.T
        g = 4.0 * np.einsum("ri,iab,rb->ra", u, Tc, X.conj())  # gradient of q; descend
        g -= np.einsum("ra,ra->r", g, X.conj())[:, None] * X
        Xn = _unit_rows(X - step[:, None] * g)
        qn = q_of(Xn)
        better = qn < q
        upd = act & better
        X[upd] = Xn[upd]
        gain = np.where(upd, q - qn, 0.0)
        q = np.where(upd, qn, q)
        step = np.where(upd, step * 1.2, step * 0.5)
        converged |= act & (((gain > 0) & (gain < opts.tol)) | (step < 1e-14))
    best = int(np.argmin(q))
    return float(h - 2.0 * c * q[best]), X[best], bool(converged.all())


def _ricci_form(Ttil, Ainv):
    # H = sum_{ij} Ainv[i, j] conj(Ttil_i) Ttil_j ; Hermitian PSD on ker S coordinates
    return np.einsum("ij,iab,jbc->ac", Ainv, Ttil.conj(), Ttil)


def _scal_exact(Ttil, Ainv, h, c):
    m = Ttil.shape[-1]
    M = np.einsum("iab,jab->ij", Ttil.conj(), Ttil)  # M[i, j] = <Ttil_j, Ttil_i>_F
    q_total = np.sum(Ainv * M).real
    return 0.5 * h * m * (m + 1) - 2.0 * c * q_total


def curvature_report(S: np.ndarray, T: np.ndarray,
                     ctx: MetricContext = MetricContext.fubini_study(),
                     d_scale: float = 1.0,
                     opts: OptimizerOpts = OptimizerOpts()) -> CurvatureReport:
    """Suprema of hbc/hc/Ricci over unit kernel directions, and the scalar curvature."""
    S = np.asarray(S, dtype=complex)
    T = np.asarray(T, dtype=complex)
    B, Ttil = restricted_second_form(S, T)
    A = gram_matrix(S)
    Ainv = np.linalg.inv(A)
    h = ctx.hbc_bound
    c = float(d_scale)
    m = B.shape[1]

    if m == 1:
        v = Ttil[:, 0, 0]
        val = 0.5 * h * 2.0 - 2.0 * c * float(np.vdot(v, Ainv @ v).real)
        X = B[:, 0]
        return CurvatureReport(val, val, val, val, m=1, converged=True, witness_x=X, witness_y=X)

    scal = _scal_exact(Ttil, Ainv, h, c)

    Hric = _ricci_form(Ttil, Ainv)
    ew, evec = np.linalg.eigh(Hric)
    sup_ricci = 0.5 * h * (m + 1) - 2.0 * c * float(ew[0])

    hc_val, x_hc, conv_hc = _sup_hc_pgd(Ttil, Ainv, h, c, opts)
    hbc_val, x_hbc, y_hbc, conv_hbc = _sup_hbc_pgd(Ttil, Ainv, h, c, opts)
    if hc_val > hbc_val:  # the diagonal is a valid hbc pair; keep the sup consistent
        hbc_val, x_hbc, y_hbc = hc_val, x_hc, x_hc

    return CurvatureReport(
        sup_hbc=hbc_val,
        sup_hc=hc_val,
        sup_ricci=sup_ricci,
        scal=scal,
        m=m,
        converged=conv_hc and conv_hbc,
        witness_x=B @ x_hbc,
        witness_y=B @ y_hbc,
    )


# ---------------------------------------------------------------------------
# batched curvature values over samples (axis 0)
# ---------------------------------------------------------------------------

def _batch_kernel_basis(S: np.ndarray) -> np.ndarray:
    """Orthonormal bases of ker S as columns: (B, n, m) from S of shape (B, r, n)."""
    B, r, n = S.shape
    _, _, Vh = np.linalg.svd(S, full_matrices=True)
    return np.conj(np.swapaxes(Vh[:, r:, :], 1, 2))


def _batch_kernel_vector_m1(S: np.ndarray) -> np.ndarray:
    """Unit spanning vector of a one-dimensional kernel, closed form for small n."""
    B, r, n = S.shape
    if n == 2 and r == 1:
        X = np.stack([-S[:, 0, 1], S[:, 0, 0]], axis=-1)
    elif n == 3 and r == 2:
        a, b = S[:, 0, :], S[:, 1, :]
        X = np.stack([
            a[:, 1] * b[:, 2] - a[:, 2] * b[:, 1],
            a[:, 2] * b[:, 0] - a[:, 0] * b[:, 2],
            a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0],
        ], axis=-1)
    else:
        return _batch_kernel_basis(S)[:, :, 0]
    return X / np.linalg.norm(X, axis=-1, keepdims=True)


def _batch_values_m1(S: np.ndarray, T: np.ndarray, h: float, c: float) -> np.ndarray:
    """Curvature values for one-dimensional loci (all four kinds coincide)."""
    X = _batch_kernel_vector_m1(S)
    v = np.einsum("na,niab,nb->ni", X, T, X)
    A = np.einsum("nik,njk->nij", S, S.conj())
    sol = np.linalg.solve(A, v[..., None])[..., 0]
    q = np.einsum("ni,ni->n", v.conj(), sol).real
    return h - 2.0 * c * q


def _batch_restricted(S: np.ndarray, T: np.ndarray):
    Bmat = _batch_kernel_basis(S)
    Ttil = np.einsum("npa,nipq,nqb->niab", Bmat, T, Bmat)
    A = np.einsum("nik,njk->nij", S, S.conj())
    Ainv = np.linalg.inv(A)
    return Ttil, Ainv


def _batch_scal(S: np.ndarray, T: np.ndarray, h: float, c: float) -> np.ndarray:
    Ttil, Ainv = _batch_restricted(S, T)
    m = Ttil.shape[-1]
    M = np.einsum("niab,njab->nij", Ttil.conj(), Ttil)
    q = np.einsum("nij,nij->n", Ainv, M).real
    return 0.5 * h * m * (m + 1) - 2.0 * c * q


def _batch_sup_ricci(S: np.ndarray, T: np.ndarray, h: float, c: float) -> np.ndarray:
    Ttil, Ainv = _batch_restricted(S, T)
    m = Ttil.shape[-1]
    H = np.einsum("nij,niab,njbc->nac", Ainv, Ttil.conj(), Ttil)
    lam_min = np.linalg.eigvalsh(H)[:, 0]
    return 0.5 * h * (m + 1) - 2.0 * c * lam_min


def batch_curvature_values(curv: CurvatureKind, S: np.ndarray, T: np.ndarray,
                           ctx: MetricContext = MetricContext.fubini_study(),
                           d_scale: float = 1.0,
                           opts: OptimizerOpts = OptimizerOpts()) -> np.ndarray:
    """Curvature statistic per sample: exact closed forms where available
    (m = 1; scalar; Ricci), multistart optimization per sample otherwise."""
    S = np.asarray(S, dtype=complex)
    T = np.asarray(T, dtype=complex)
    B, r, n = S.shape
    m = n - r
    h = ctx.hbc_bound
    c = float(d_scale)
    if m == 1:
        return _batch_values_m1(S, T, h, c)
    if curv is CurvatureKind.SCAL:
        return _batch_scal(S, T, h, c)
    if curv is CurvatureKind.RICCI:
        return _batch_sup_ricci(S, T, h, c)
    out = np.empty(B)
    for b in range(B):
        rep = curvature_report(S[b], T[b], ctx=ctx, d_scale=c, opts=opts)
        out[b] = rep.sup_hbc if curv is CurvatureKind.HBC else rep.sup_hc
    return out


def hb_tilde_filter(S: np.ndarray, T: np.ndarray, a: float,
                    d_scale: float = 1.0,
                    ctx: MetricContext = MetricContext.fubini_study()) -> FilterVerdict:
    """Cheap sufficient certificate that sup hbc < -a, via the operator-norm bound.

    Using v^* A^{-1} v >= |v|^2 / ||S||_op^2 with mu = min |T(X, Y)| over unit
    kernel pairs: if h - 2 c mu^2 / ||S||_op^2 < -a the supremum is certified
    below -a; otherwise undecided.
    """
    from .discriminant import SymBilinear, min_sphere_norm  # local import to avoid a cycle

    S = np.asarray(S, dtype=complex)
    T = np.asarray(T, dtype=complex)
    _, Ttil = restricted_second_form(S, T)
    mu = min_sphere_norm(SymBilinear(Ttil), "bilinear")
    s_op = np.linalg.svd(S, compute_uv=False)[0]
    bound = ctx.hbc_bound - 2.0 * float(d_scale) * mu**2 / s_op**2
    return FilterVerdict.CERTIFIED_BELOW if bound < -a else FilterVerdict.UNDECIDED
