"""Ground truth on actual zero loci: line slicing and finite-difference curvature.

The closed-form anchors: a projective line (d = 1) is a round sphere of
curvature 4*pi in our normalization (unit line volume); the Fermat conic is
unitarily congruent to the quadratic Veronese image, a round sphere of twice
the volume, hence curvature 2*pi; a smooth plane quartic has genus 3 and
volume 4, so Gauss-Bonnet fixes its mean curvature at -2*pi.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from projcurv.errors import NumericalFailure
from projcurv.geometry import (
    ZeroLocusPoint,
    density_samples,
    empirical_density,
    fd_curvature,
    flat_graph_curvature,
    points_on_line,
    slice_points,
)
from projcurv.kostlan import Dims, PolySystem

E0 = np.array([1.0, 0.0, 0.0], dtype=complex)
E1 = np.array([0.0, 1.0, 0.0], dtype=complex)
E2 = np.array([0.0, 0.0, 1.0], dtype=complex)


def fermat(d: int) -> PolySystem:
    return PolySystem.from_monomials(
        Dims(2, 1, d),
        {(0, (d, 0, 0)): 1.0, (0, (0, d, 0)): 1.0, (0, (0, 0, d)): 1.0})


def r2_system() -> PolySystem:
    return PolySystem.from_monomials(
        Dims(3, 2, 2), {(0, (2, 0, 0, 0)): 1.0, (1, (0, 2, 0, 0)): 1.0})


# ---------------------------------------------------------------------------
# points_on_line
# ---------------------------------------------------------------------------

def test_line_roots_match_closed_form():
    # restricting the degree-7 Fermat polynomial to the coordinate line
    # x2 = 0 gives 1 + t^7, whose roots are the 7th roots of -1
    d = 7
    pts, residuals, multiple = points_on_line(fermat(d), E0, E1)
    assert pts.shape == (d, 3)
    assert residuals.max() < 1e-12
    assert not multiple.any()
    np.testing.assert_allclose(np.abs(pts[:, 2]), 0.0, atol=1e-14)
    got = pts[:, 1] / pts[:, 0]
    want = np.exp(1j * math.pi * (2 * np.arange(d) + 1) / d)
    # each closed-form root is hit by exactly one computed root
    dist = np.abs(got[:, None] - want[None, :])
    assert (dist.min(axis=0) < 1e-12).all()
    assert (dist.min(axis=1) < 1e-12).all()
    np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 1.0, atol=1e-14)


def test_line_requires_single_polynomial():
    with pytest.raises(ValueError, match="r = 1"):
        points_on_line(r2_system(), np.zeros(4, dtype=complex), np.ones(4, dtype=complex))


def test_tangent_line_sets_multiplicity_flag():
    # the line through e0 and e2 is tangent to the smooth conic
    # z0 z1 - z2^2 at e0: the restriction is -t^2, a double root
    conic = PolySystem.from_monomials(
        Dims(2, 1, 2), {(0, (1, 1, 0)): 1.0, (0, (0, 0, 2)): -1.0})
    pts, residuals, multiple = points_on_line(conic, E0, E2)
    assert multiple.all()
    assert residuals.max() < 1e-12
    np.testing.assert_allclose(np.abs(pts @ E0.conj()), 1.0, atol=1e-10)


def test_chart_swap_when_line_meets_locus_at_infinity():
    # v lies on the Fermat conic, so s(u + t v) has degree < 2 in t and the
    # spanning pair must be swapped; both intersections then sit at v
    v = np.array([1.0, 1j, 0.0], dtype=complex) / math.sqrt(2.0)
    pts, residuals, multiple = points_on_line(fermat(2), E2, v)
    assert multiple.all()
    assert residuals.max() < 1e-12
    np.testing.assert_allclose(np.abs(pts @ v.conj()), 1.0, atol=1e-10)


def test_line_inside_locus_direction_fails_both_charts():
    # the line z2 = 0 meets the conic exactly at u and v, which sit at t = 0
    # and t = infinity of this parametrization: degenerate in both charts
    u = np.array([1.0, 1j, 0.0], dtype=complex) / math.sqrt(2.0)
    v = np.array([1.0, -1j, 0.0], dtype=complex) / math.sqrt(2.0)
    with pytest.raises(NumericalFailure, match="degenerate"):
        points_on_line(fermat(2), u, v)


# ---------------------------------------------------------------------------
# slice_points
# ---------------------------------------------------------------------------

def test_slice_points_valid_and_deterministic():
    sys3 = fermat(3)
    pts = slice_points(sys3, seed=5, line_index=2)
    assert len(pts) == 3
    scale = np.linalg.norm(sys3.monomial_coeffs)
    for p in pts:
        assert isinstance(p, ZeroLocusPoint)
        assert abs(np.linalg.norm(p.x) - 1.0) < 1e-12
        assert p.newton_residual < 1e-10
        assert not p.multiple
        u, v = p.source_line
        assert abs(np.vdot(u, v)) < 1e-12
    again = slice_points(sys3, seed=5, line_index=2)
    assert all(np.array_equal(a.x, b.x) for a, b in zip(pts, again))
    other = slice_points(sys3, seed=5, line_index=3)
    assert not np.allclose(pts[0].x, other[0].x)
    _ = scale


def test_slice_points_requires_r1():
    with pytest.raises(ValueError, match="r = 1"):
        slice_points(r2_system(), seed=0)


def test_slice_points_exhausts_attempts_on_zero_system():
    zero = PolySystem.from_monomials(Dims(2, 1, 2), {})
    with pytest.raises(NumericalFailure, match="no transverse line"):
        slice_points(zero, seed=0)


# ---------------------------------------------------------------------------
# finite-difference curvature
# ---------------------------------------------------------------------------

def test_projective_line_has_curvature_4pi():
    line = PolySystem.from_monomials(
        Dims(2, 1, 1), {(0, (1, 0, 0)): 1.0, (0, (0, 1, 0)): 2.0, (0, (0, 0, 1)): -1.0})
    p = slice_points(line, seed=1, line_index=0)[0]
    assert fd_curvature(line, p) == pytest.approx(4.0 * math.pi, rel=1e-6)


def test_fermat_conic_has_curvature_2pi_everywhere():
    f2 = fermat(2)
    pts = slice_points(f2, seed=2, line_index=0) + slice_points(f2, seed=2, line_index=1)
    for p in pts:
        assert fd_curvature(f2, p) == pytest.approx(2.0 * math.pi, rel=1e-6)


def test_jet_curvature_agrees_on_round_conic():
    # the jet pipeline evaluated at sampled conic points must reproduce the
    # constant 2*pi to near machine precision — no finite differences involved
    vals = density_samples(fermat(2), "hc", 6, seed=3)
    np.testing.assert_allclose(vals, 2.0 * math.pi, rtol=1e-10)


def test_fd_accepts_point_or_array():
    f2 = fermat(2)
    p = slice_points(f2, seed=4, line_index=0)[0]
    assert fd_curvature(f2, p) == fd_curvature(f2, p.x)


def test_gauss_bonnet_on_fermat_quartic():
    # genus 3, volume 4: the volume-uniform mean of the Gauss curvature is
    # 2 pi chi / vol = -2 pi; 4000 Crofton-sampled points, fixed seed
    f4 = fermat(4)
    Ks = [fd_curvature(f4, p)
          for li in range(1000) for p in slice_points(f4, seed=7, line_index=li)]
    assert len(Ks) == 4000
    assert abs(np.mean(Ks) + 2.0 * math.pi) < 0.35


def test_fd_curvature_validation():
    f2 = fermat(2)
    with pytest.raises(ValueError, match="does not lie"):
        fd_curvature(f2, E0)
    cubic_3d = PolySystem.from_monomials(Dims(3, 1, 2), {(0, (2, 0, 0, 0)): 1.0})
    with pytest.raises(ValueError, match="plane curves"):
        fd_curvature(cubic_3d, np.zeros(4, dtype=complex))


def test_fd_curvature_singular_point():
    # e2 is the node of the pair of lines z0 z1 = 0: vanishing gradient
    pair = PolySystem.from_monomials(Dims(2, 1, 2), {(0, (1, 1, 0)): 1.0})
    with pytest.raises(NumericalFailure, match="singular"):
        fd_curvature(pair, E2)


def test_flat_graph_curvature_closed_forms():
    # the graph w = z^2 in flat C^2 has K(z) = -8 / (1 + 4 |z|^2)^3
    assert flat_graph_curvature(lambda z: 2.0 * z) == pytest.approx(-8.0, abs=1e-6)
    assert flat_graph_curvature(lambda z: 2.0 * z, at=0.5) == pytest.approx(-1.0, rel=1e-6)
    # w = z^3 is flat to second order at the origin
    assert flat_graph_curvature(lambda z: 3.0 * z**2) == pytest.approx(0.0, abs=1e-6)


# ---------------------------------------------------------------------------
# per-system empirical density
# ---------------------------------------------------------------------------

def test_empirical_density_extreme_thresholds():
    f2 = fermat(2)
    lo = empirical_density(f2, "hc", a=0.0, n_points=6, seed=3)
    assert lo.value == 0.0 and lo.half_width_95 == 0.0   # K = 2 pi > 0 everywhere
    hi = empirical_density(f2, "hc", a=-1e5, n_points=6, seed=3)
    assert hi.value == 1.0 and hi.half_width_95 == 0.0
    assert lo.params["statistic"] == "fraction_below"
    assert lo.n_samples == 6


def test_density_sampling_requires_r1():
    with pytest.raises(ValueError, match="r = 1"):
        density_samples(r2_system(), "hc", 4)
