"""Induced curvature formulas on the zero locus: closed forms, suprema, filter."""

from __future__ import annotations

import math

import numpy as np
import pytest

from projcurv.curvature import (
    CurvatureKind,
    CurvatureReport,
    FilterVerdict,
    OptimizerOpts,
    ambient_hbc,
    batch_curvature_values,
    curvature_report,
    gram_matrix,
    hb_tilde_filter,
    hbc_at,
    kernel_basis,
    restricted_second_form,
    sff_quadratic,
)
from projcurv.discriminant import SymBilinear, min_sphere_norm
from projcurv.geometry import flat_graph_curvature
from projcurv.jetlaw import kostlan_jet_covariance, sample_jet_batch
from projcurv.kostlan import Dims, MetricContext
from projcurv.streams import stream

FS = MetricContext.fubini_study()
FLAT = MetricContext.flat()
H = FS.hbc_bound  # 4 pi


def random_jet_pair(n: int, r: int, seed: int):
    rng = np.random.default_rng(seed)
    S = rng.standard_normal((r, n)) + 1j * rng.standard_normal((r, n))
    T = rng.standard_normal((r, n, n)) + 1j * rng.standard_normal((r, n, n))
    T = 0.5 * (T + np.swapaxes(T, -1, -2))
    return S, T


def random_kernel_units(S: np.ndarray, count: int, seed: int) -> np.ndarray:
    B = kernel_basis(S)
    m = B.shape[1]
    rng = np.random.default_rng(seed)
    C = rng.standard_normal((count, m)) + 1j * rng.standard_normal((count, m))
    C /= np.linalg.norm(C, axis=1, keepdims=True)
    return C @ B.T  # ambient vectors, unit norm


# ---------------------------------------------------------------------------
# building blocks
# ---------------------------------------------------------------------------

def test_ambient_hbc_extremes():
    X = np.array([1.0, 0.0, 0.0], dtype=complex)
    Y = np.array([0.0, 1.0, 0.0], dtype=complex)
    assert ambient_hbc(X, Y) == pytest.approx(2.0 * math.pi, rel=1e-13)
    assert ambient_hbc(X, X) == pytest.approx(4.0 * math.pi, rel=1e-13)
    assert ambient_hbc(X, Y, FLAT) == 0.0


def test_kernel_basis_is_orthonormal_annihilator():
    S, _ = random_jet_pair(4, 2, seed=0)
    B = kernel_basis(S)
    assert B.shape == (4, 2)
    np.testing.assert_allclose(B.conj().T @ B, np.eye(2), atol=1e-12)
    assert np.abs(S @ B).max() < 1e-12


def test_kernel_basis_rejects_non_transverse():
    S = np.array([[1.0, 0.0, 0.0], [1.0 + 1e-12, 0.0, 0.0]], dtype=complex)
    with pytest.raises(ValueError, match="non-transverse"):
        kernel_basis(S)


def test_sff_quadratic_is_weighted_norm():
    A = np.diag([2.0, 4.0]).astype(complex)
    v = np.array([2.0, 2.0], dtype=complex)
    assert sff_quadratic(A, v) == pytest.approx(4.0 / 2.0 + 4.0 / 4.0, rel=1e-13)


def test_hbc_at_validates_inputs():
    S, T = random_jet_pair(3, 1, seed=1)
    X = random_kernel_units(S, 1, seed=2)[0]
    with pytest.raises(ValueError, match="unit"):
        hbc_at(S, T, 2.0 * X, X)
    bad = np.zeros(3, dtype=complex)
    bad[np.argmax(np.abs(S[0]))] = 1.0
    bad /= np.linalg.norm(bad)
    with pytest.raises(ValueError, match="ker"):
        hbc_at(S, T, X, bad)


# ---------------------------------------------------------------------------
# closed-form values
# ---------------------------------------------------------------------------

def test_flat_parabolic_graph_curvature_is_minus_eight():
    # Graph w = z^2 in flat C^2 at the origin: Gauss curvature -8, both from
    # the jet formula and from finite differences of the graph metric.
    S = np.array([[0.0, 1.0]], dtype=complex)       # gradient of z2 - z1^2 at 0
    T = np.array([[[-2.0, 0.0], [0.0, 0.0]]], dtype=complex)
    X = np.array([1.0, 0.0], dtype=complex)
    val = hbc_at(S, T, X, X, ctx=FLAT)
    assert val == pytest.approx(-8.0, rel=1e-12)
    fd = flat_graph_curvature(lambda z: 2.0 * z, step=1e-3)  # derivative of z^2
    assert fd == pytest.approx(-8.0, abs=1e-8)


def test_zero_second_form_gives_ambient_values():
    # With T = 0 the locus is totally geodesic: scal = (h/2) m (m+1),
    # sup Ricci = (h/2)(m+1), sup hbc = sup hc = h.
    S, _ = random_jet_pair(3, 1, seed=3)
    T = np.zeros((1, 3, 3), dtype=complex)
    rep = curvature_report(S, T)
    assert rep.m == 2
    assert rep.scal == pytest.approx(0.5 * H * 2 * 3, rel=1e-12)      # 12 pi
    assert rep.sup_ricci == pytest.approx(0.5 * H * 3, rel=1e-12)     # 6 pi
    assert rep.sup_hbc == pytest.approx(H, rel=1e-8)                  # 4 pi
    assert rep.sup_hc == pytest.approx(H, rel=1e-8)


def test_m1_all_kinds_coincide_and_match_direct_value():
    S, T = random_jet_pair(2, 1, seed=4)
    rep = curvature_report(S, T)
    assert rep.m == 1
    assert rep.sup_hbc == rep.sup_hc == rep.sup_ricci == rep.scal
    X = rep.witness_x
    direct = hbc_at(S, T, X, X)
    assert rep.sup_hbc == pytest.approx(direct, rel=1e-12)


# ---------------------------------------------------------------------------
# exact reconstructions over a kernel basis
# ---------------------------------------------------------------------------

def test_scal_equals_double_sum_of_hbc_over_basis():
    S, T = random_jet_pair(4, 2, seed=5)
    rep = curvature_report(S, T)
    B = kernel_basis(S)
    total = sum(hbc_at(S, T, B[:, i], B[:, j])
                for i in range(B.shape[1]) for j in range(B.shape[1]))
    assert rep.scal == pytest.approx(total, rel=1e-10)


@pytest.mark.parametrize("n,r", [(3, 1), (4, 1), (4, 2)])
def test_ricci_equals_sum_of_hbc_against_basis(n, r):
    S, T = random_jet_pair(n, r, seed=6)
    B, Ttil = restricted_second_form(S, T)
    Ainv = np.linalg.inv(gram_matrix(S))
    Hric = np.einsum("ij,iab,jbc->ac", Ainv, Ttil.conj(), Ttil)
    m = B.shape[1]
    rng = np.random.default_rng(7)
    u = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    u /= np.linalg.norm(u)
    form_value = 0.5 * H * (m + 1) - 2.0 * float((u.conj() @ Hric @ u).real)
    X = B @ u
    direct = sum(hbc_at(S, T, X, B[:, j]) for j in range(m))
    assert direct == pytest.approx(form_value, rel=1e-10)
    # and the reported supremum is the eigen-minimizer of the same form
    rep = curvature_report(S, T)
    lam_min = np.linalg.eigvalsh(Hric)[0]
    assert rep.sup_ricci == pytest.approx(0.5 * H * (m + 1) - 2.0 * lam_min, rel=1e-12)


def test_sup_hc_matches_quadratic_sphere_minimizer_for_r1():
    # For r = 1 the holomorphic-curvature supremum reduces to the minimal
    # quadratic sphere norm of the restricted second form.
    S, T = random_jet_pair(3, 1, seed=8)
    _, Ttil = restricted_second_form(S, T)
    A = gram_matrix(S)[0, 0].real
    mu = min_sphere_norm(SymBilinear(Ttil), "quadratic")
    rep = curvature_report(S, T)
    assert rep.sup_hc == pytest.approx(H - 2.0 * mu**2 / A, rel=1e-8)


# ---------------------------------------------------------------------------
# suprema: domination, bounds, invariances, witnesses
# ---------------------------------------------------------------------------

def test_suprema_dominate_random_directions():
    S, T = random_jet_pair(4, 1, seed=9)
    rep = curvature_report(S, T)
    X = random_kernel_units(S, 1500, seed=10)
    Y = random_kernel_units(S, 1500, seed=11)
    vals_pairs = [hbc_at(S, T, x, y) for x, y in zip(X, Y)]
    vals_diag = [hbc_at(S, T, x, x) for x in X]
    assert rep.sup_hbc >= max(vals_pairs) - 1e-9
    assert rep.sup_hbc >= rep.sup_hc - 1e-12
    assert rep.sup_hc >= max(vals_diag) - 1e-9
    assert rep.sup_hbc <= H + 1e-12  # SFF only lowers the ambient bound


def test_witnesses_achieve_reported_suprema():
    S, T = random_jet_pair(3, 1, seed=12)
    rep = curvature_report(S, T)
    assert abs(np.linalg.norm(rep.witness_x) - 1.0) < 1e-9
    assert np.abs(S @ rep.witness_x).max() < 1e-7 * np.abs(S).max()
    achieved = hbc_at(S, T, rep.witness_x, rep.witness_y)
    assert achieved == pytest.approx(rep.sup_hbc, rel=1e-7)


def test_report_invariant_under_jet_scaling():
    S, T = random_jet_pair(4, 2, seed=13)
    a = curvature_report(S, T)
    b = curvature_report(5.0 * S, 5.0 * T)
    assert b.scal == pytest.approx(a.scal, rel=1e-10)
    assert b.sup_ricci == pytest.approx(a.sup_ricci, rel=1e-10)
    assert b.sup_hc == pytest.approx(a.sup_hc, rel=1e-7)
    assert b.sup_hbc == pytest.approx(a.sup_hbc, rel=1e-7)


def test_report_invariant_under_frame_rotation():
    # Rotating the chart frame by a unitary W maps S -> S W, T_i -> W^t T_i W
    # and must not change any curvature value.
    S, T = random_jet_pair(3, 1, seed=14)
    rng = np.random.default_rng(15)
    Wr = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    W, _ = np.linalg.qr(Wr)
    S2 = S @ W
    T2 = np.einsum("pa,ipq,qb->iab", W, T, W)
    a = curvature_report(S, T)
    b = curvature_report(S2, T2)
    assert b.scal == pytest.approx(a.scal, rel=1e-10)
    assert b.sup_ricci == pytest.approx(a.sup_ricci, rel=1e-10)
    assert b.sup_hc == pytest.approx(a.sup_hc, rel=1e-6)
    assert b.sup_hbc == pytest.approx(a.sup_hbc, rel=1e-6)


def test_hbc_at_is_phase_invariant():
    S, T = random_jet_pair(3, 1, seed=30)
    X = random_kernel_units(S, 1, seed=31)[0]
    Y = random_kernel_units(S, 1, seed=32)[0]
    base = hbc_at(S, T, X, Y)
    for theta, phi in [(0.3, -1.1), (2.0, 0.7), (-0.5, 3.0)]:
        rotated = hbc_at(S, T, np.exp(1j * theta) * X, np.exp(1j * phi) * Y)
        assert rotated == pytest.approx(base, abs=1e-10)


def test_weighted_quadratic_dominates_operator_norm_bound():
    # v^* A^{-1} v >= |v|^2 / lambda_max(A) for Hermitian positive A, swept
    # over 10^6 random instances (r = 2, closed-form extreme eigenvalue).
    rng = np.random.default_rng(33)
    N = 1_000_000
    G = rng.standard_normal((N, 2, 2)) + 1j * rng.standard_normal((N, 2, 2))
    A = G @ np.conj(np.swapaxes(G, 1, 2))
    v = rng.standard_normal((N, 2)) + 1j * rng.standard_normal((N, 2))
    sol = np.linalg.solve(A, v[..., None])[..., 0]
    quad = np.einsum("ni,ni->n", v.conj(), sol).real
    half_tr = 0.5 * (A[:, 0, 0] + A[:, 1, 1]).real
    disc = np.sqrt(np.maximum(
        0.25 * (A[:, 0, 0] - A[:, 1, 1]).real ** 2 + np.abs(A[:, 0, 1]) ** 2, 0.0))
    lam_max = half_tr + disc
    lower = np.einsum("ni,ni->n", v.conj(), v).real / lam_max
    assert (quad >= lower * (1.0 - 1e-9)).all()


def cp1_lattice(count: int, center: np.ndarray | None = None,
                cap_radius: float = math.pi) -> np.ndarray:
    """Quasi-uniform complex-line representatives in C^2.

    Fibonacci lattice on the unit 2-sphere (optionally restricted to a polar
    cap of the given geodesic radius), lifted through the half-angle spinor
    map and rotated so the cap center goes to ``center``.
    """
    k = np.arange(count)
    golden = (math.sqrt(5.0) - 1.0) / 2.0
    lo = math.cos(min(cap_radius, math.pi))
    cos_t = 1.0 - (1.0 - lo) * (k + 0.5) / count
    theta = np.arccos(np.clip(cos_t, -1.0, 1.0))
    phi = 2.0 * math.pi * ((k * golden) % 1.0)
    pts = np.stack([np.cos(theta / 2.0), np.sin(theta / 2.0) * np.exp(1j * phi)], axis=1)
    if center is not None:
        c = center / np.linalg.norm(center)
        U = np.array([[c[0], -np.conj(c[1])], [c[1], np.conj(c[0])]], dtype=complex)
        pts = pts @ U.T
    return pts


def grid_pair_max(Ttil, Ainv, X, Y):
    """Max of hbc over the direction-pair product grid, plus the argmax pair."""
    inner = X @ Y.conj().T
    amb = 0.5 * H * (1.0 + np.abs(inner) ** 2)
    v = np.einsum("ap,ipq,bq->abi", X, Ttil, Y)
    q = np.einsum("abi,ij,abj->ab", v.conj(), Ainv, v).real
    vals = amb - 2.0 * q
    a, b = np.unravel_index(np.argmax(vals), vals.shape)
    return vals[a, b], X[a], Y[b]


@pytest.mark.parametrize("n,r,seed", [(3, 1, 20), (4, 2, 21)])
def test_sup_hbc_matches_refined_million_point_grid(n, r, seed):
    # Brute-force oracle: hbc on a 10^6-pair quasi-random grid of kernel
    # direction lines, refined once by a finer grid patch around the coarse
    # argmax.  Pure grid search, no gradients.
    S, T = sample_transverse_jets(n, r, d=10, count=1, seed=seed)
    S, T = S[0], T[0]
    rep = curvature_report(S, T)
    B = kernel_basis(S)
    Ainv = np.linalg.inv(gram_matrix(S))
    Ttil = np.einsum("pa,ipq,qb->iab", B, T, B)
    coarse = cp1_lattice(1000)
    val1, xc, yc = grid_pair_max(Ttil, Ainv, coarse, coarse)
    fine_x = cp1_lattice(1000, center=xc, cap_radius=0.25)
    fine_y = cp1_lattice(1000, center=yc, cap_radius=0.25)
    val2, _, _ = grid_pair_max(Ttil, Ainv, fine_x, fine_y)
    grid_max = max(val1, val2)
    assert rep.sup_hbc >= grid_max - 1e-9
    assert rep.sup_hbc == pytest.approx(grid_max, abs=1e-3)


def test_d_scale_enters_linearly_in_the_sff_term():
    S, T = random_jet_pair(2, 1, seed=16)
    r1 = curvature_report(S, T, d_scale=1.0)
    r3 = curvature_report(S, T, d_scale=3.0)
    # m = 1: value = h - 2 c q, so the drop from h scales with c
    assert (H - r3.scal) == pytest.approx(3.0 * (H - r1.scal), rel=1e-12)


# ---------------------------------------------------------------------------
# batched evaluation
# ---------------------------------------------------------------------------

def sample_transverse_jets(n: int, r: int, d: int, count: int, seed: int):
    cov = kostlan_jet_covariance(Dims(n, r, d))
    _, S, T = sample_jet_batch(cov, stream(seed, 0), count, condition_F_zero=True)
    return S, T


@pytest.mark.parametrize("n,r,kind", [
    (2, 1, CurvatureKind.HBC),
    (3, 1, CurvatureKind.SCAL),
    (3, 1, CurvatureKind.RICCI),
    (3, 2, CurvatureKind.HC),
    (4, 1, CurvatureKind.HBC),
])
def test_batch_values_match_per_sample_reports(n, r, kind):
    S, T = sample_transverse_jets(n, r, d=10, count=12, seed=17)
    vals = batch_curvature_values(kind, S, T, d_scale=10.0)
    for b in range(S.shape[0]):
        rep = curvature_report(S[b], T[b], d_scale=10.0)
        expected = {
            CurvatureKind.HBC: rep.sup_hbc,
            CurvatureKind.HC: rep.sup_hc,
            CurvatureKind.RICCI: rep.sup_ricci,
            CurvatureKind.SCAL: rep.scal,
        }[kind]
        assert vals[b] == pytest.approx(expected, rel=1e-8), f"sample {b}"


# ---------------------------------------------------------------------------
# certification filter
# ---------------------------------------------------------------------------

def crafted_certifiable_jet(strength: float):
    """Jet with a 2-dim kernel whose three restricted forms share no isotropic pair.

    The forms K*[[1,0],[0,1]], K*[[1,0],[0,-1]], K*[[0,1],[1,0]] give
    T(X, Y) = K (x1 y1 + x2 y2, x1 y1 - x2 y2, x1 y2 + x2 y1), which cannot
    vanish for nonzero X, Y, so the sphere minimum grows linearly in K.
    """
    S = np.zeros((3, 5), dtype=complex)
    S[:, :3] = np.eye(3)  # kernel spanned by e_4, e_5; ||S||_op = 1
    T = np.zeros((3, 5, 5), dtype=complex)
    T[0, 3:, 3:] = strength * np.array([[1.0, 0.0], [0.0, 1.0]])
    T[1, 3:, 3:] = strength * np.array([[1.0, 0.0], [0.0, -1.0]])
    T[2, 3:, 3:] = strength * np.array([[0.0, 1.0], [1.0, 0.0]])
    return S, T


def test_filter_certifies_strongly_negative_case():
    S, T = crafted_certifiable_jet(strength=50.0)
    assert hb_tilde_filter(S, T, a=1.0) is FilterVerdict.CERTIFIED_BELOW
    assert hb_tilde_filter(S, np.zeros_like(T), a=1.0) is FilterVerdict.UNDECIDED


def test_filter_certification_appears_under_strong_scaling():
    # With S fixed, scaling T up must eventually certify.
    S, T = crafted_certifiable_jet(strength=1.0)
    assert hb_tilde_filter(S, T, a=1.0) is FilterVerdict.UNDECIDED
    assert hb_tilde_filter(S, 100.0 * T, a=1.0) is FilterVerdict.CERTIFIED_BELOW


def test_filter_is_sound_on_random_jets():
    # (n, r) = (5, 3) leaves a 2-dim kernel with three restricted forms, the
    # smallest case where the sphere minimum is generically positive and
    # positive verdicts actually occur.
    S, T = sample_transverse_jets(5, 3, d=40, count=300, seed=18)
    a = 1.0
    certified = 0
    for b in range(S.shape[0]):
        if hb_tilde_filter(S[b], T[b], a, d_scale=40.0) is FilterVerdict.CERTIFIED_BELOW:
            certified += 1
            rep = curvature_report(S[b], T[b], d_scale=40.0)
            assert rep.sup_hbc < -a, f"filter unsound on sample {b}: {rep.sup_hbc}"
    assert certified > 0  # the check must actually exercise positive verdicts
