"""Splittings, projections, and cone families."""

import numpy as np
import pytest

from hkrect.frames import (
    ConeSpec,
    Frame,
    ball_union_gauge,
    cone_gauge,
    cone_inclusion_search,
    cone_member,
    frame_isometry,
    gauge_vt,
    proj_line,
    proj_line_vt,
    proj_vertical,
    proj_vertical_vt,
    random_unit_points,
    sample_ball_union_sphere,
)
from hkrect.hgroup import (
    GroupDim,
    Point,
    compose,
    compose_vt,
    dilate,
    distance_vt,
    is_horizontal_isometry,
    koranyi_norm,
    koranyi_norm_vt,
)


E1 = Frame(np.array([1.0, 0.0]))


def P(v, t):
    return Point(np.asarray(v, dtype=float), float(t))


def test_frame_validation():
    with pytest.raises(ValueError):
        Frame(np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        Frame(np.array([1.0, 0.0, 0.0]))
    f = Frame(np.array([0.6, 0.8]))
    assert f.perp.shape == (2, 1)
    assert abs(float(f.perp[:, 0] @ f.nu)) < 1e-14


def test_projection_hand_example():
    p = P([1, 1], 1)
    pv = proj_vertical(E1, p)
    pl = proj_line(E1, p)
    # w((1,1),(1,0)) = -1 shifts the vertical part to 1.5
    assert np.allclose(pv.v, [0, 1]) and pv.t == pytest.approx(1.5, abs=1e-15)
    assert np.allclose(pl.v, [1, 0]) and pl.t == 0.0
    r = compose(pv, pl)
    assert np.allclose(r.v, p.v) and r.t == pytest.approx(p.t, abs=1e-15)


def test_projection_fixes_its_range():
    p = P([0, 2.0], -0.3)          # already in V_nu
    r = proj_vertical(E1, p)
    assert np.allclose(r.v, p.v) and r.t == p.t
    q = P([1.5, 0.0], 0.0)         # already in L_nu
    r = proj_line(E1, q)
    assert np.allclose(r.v, q.v) and r.t == 0.0


def test_splitting_identity_bulk():
    rng = np.random.default_rng(2)
    for k in (1, 2):
        nu = rng.normal(size=2 * k)
        frame = Frame(nu / np.linalg.norm(nu))
        v, t = GroupDim(k).random_points(10_000, rng)
        vv, tv = proj_vertical_vt(frame, v, t)
        lv, lt = proj_line_vt(frame, v, t)
        rv, rt = compose_vt(vv, tv, lv, lt)
        assert np.allclose(rv, v, rtol=0, atol=1e-12)
        assert np.allclose(rt, t, rtol=1e-12, atol=1e-12)
        # projections commute with dilations
        s = 1.9
        pv2, pt2 = proj_vertical_vt(frame, s * v, s * s * t)
        assert np.allclose(pv2, s * vv, rtol=1e-12, atol=1e-13)
        assert np.allclose(pt2, s * s * tv, rtol=1e-12, atol=1e-12)
        # the line projection never increases the gauge
        assert np.all(koranyi_norm_vt(lv, lt) <= koranyi_norm_vt(v, t) + 1e-12)


def test_cone_gauge_values():
    assert cone_gauge(E1, P([2.5, 0], 0)) == 1.0
    assert cone_gauge(E1, P([0, 1.3], 0.2)) == 0.0
    assert cone_gauge(E1, P([1, 1], 0)) == pytest.approx(1 / 2 ** 0.5, rel=1e-14)
    with pytest.raises(ValueError):
        cone_gauge(E1, P([0, 0], 0))
    rng = np.random.default_rng(3)
    v, t = GroupDim(1).random_points(10_000, rng)
    g = gauge_vt(E1, v, t)
    assert np.all(g <= 1.0) and np.all(g >= 0.0)


def test_cone_member_families():
    line_pt = P([0.7, 0], 0)
    for family, par in (("koranyi", 0.9), ("ball_union", 0.3), ("inf_norm", 0.2)):
        assert cone_member(ConeSpec(family, par, E1), line_pt)
        assert not cone_member(ConeSpec(family, par, E1), P([0, 0], 0))
    # perpendicular point with the hand-checked quartic bound
    assert not cone_member(ConeSpec("ball_union", 0.5, E1), P([0, 1], 0))


def test_cone_spec_validation():
    for family, bad in (("koranyi", 0.0), ("koranyi", 1.0), ("ball_union", 1.2), ("inf_norm", 0.0)):
        with pytest.raises(ValueError):
            ConeSpec(family, bad, E1)
    with pytest.raises(ValueError):
        ConeSpec("wedge", 0.5, E1)


def test_ball_union_gauge_against_dense_scan():
    # independent check: dense scan over the witness parameter
    rng = np.random.default_rng(5)
    from hkrect.hgroup import distance_vt as dvt

    for _ in range(25):
        p = P(rng.normal(size=2), 0.3 * rng.normal())
        norm = koranyi_norm(p)
        if norm < 1e-3:
            continue
        ss = np.concatenate([np.geomspace(norm * 1e-3, 64 * norm, 4000),
                             -np.geomspace(norm * 1e-3, 64 * norm, 4000)])
        ratios = dvt(p.v, p.t, ss[:, None] * E1.nu, np.zeros_like(ss)) / np.abs(ss)
        dense = float(np.min(ratios))
        got = ball_union_gauge(E1, p)
        assert got <= dense + 1e-9
        assert got == pytest.approx(dense, rel=5e-3, abs=1e-6)


def test_cone_nesting_and_dilation_invariance():
    rng = np.random.default_rng(6)
    v, t = random_unit_points(1, 10_000, rng)
    g = gauge_vt(E1, v, t)
    tight = g > 0.7
    assert np.all(g[tight] > 0.3)          # members of C_0.7 lie in C_0.3
    # dilation leaves membership untouched
    s = 5.0
    g2 = gauge_vt(E1, s * v, s * s * t)
    assert np.allclose(g, g2, atol=1e-10)
    # D_beta grows with beta on sampled members
    v1, t1 = sample_ball_union_sphere(E1, 0.3, 2000, np.random.default_rng(7))
    spec = ConeSpec("ball_union", 0.5, E1)
    inside = sum(cone_member(spec, P(v1[i], t1[i])) for i in range(200))
    assert inside == 200


def test_cone_inclusion_search_and_revalidation():
    beta1 = cone_inclusion_search(0.5, E1, samples=20_000, seed=1)
    assert 0.0 < beta1 < 1.0
    beta2 = cone_inclusion_search(0.5, E1, samples=20_000, seed=12)
    assert abs(beta1 - beta2) <= 0.02
    # fresh-seed revalidation with zero violations
    rng = np.random.default_rng(999)
    v, t = sample_ball_union_sphere(E1, beta1, 50_000, rng)
    assert np.all(gauge_vt(E1, v, t) > 0.5)
    # a tighter cone forces a smaller inclusion parameter
    beta_tight = cone_inclusion_search(0.8, E1, samples=20_000, seed=1)
    assert beta_tight <= beta1 + 0.01
    with pytest.raises(ValueError):
        cone_inclusion_search(0.5, E1, samples=50)
    with pytest.raises(ValueError):
        cone_inclusion_search(1.5, E1, samples=1000)


def test_frame_isometry_properties():
    f2 = Frame(np.array([0.0, 1.0]))
    rho = frame_isometry(f2, E1)
    assert np.allclose(rho, [[0, 1], [-1, 0]], atol=1e-14)
    rho_id = frame_isometry(E1, E1)
    assert np.allclose(rho_id, np.eye(2), atol=1e-12)
    rng = np.random.default_rng(8)
    for k in (1, 2):
        a = rng.normal(size=2 * k)
        b = rng.normal(size=2 * k)
        fa = Frame(a / np.linalg.norm(a))
        fb = Frame(b / np.linalg.norm(b))
        rho = frame_isometry(fa, fb)
        assert is_horizontal_isometry(rho, tol=1e-9)
        assert np.allclose(rho @ fa.nu, fb.nu, atol=1e-12)
        # the isometry intertwines the line projections
        v, t = GroupDim(k).random_points(2000, rng)
        lv, lt = proj_line_vt(fa, v, t)
        image_lv, image_lt = (lv @ rho.T), lt
        lv2, lt2 = proj_line_vt(fb, v @ rho.T, t)
        assert np.allclose(lv2, image_lv, atol=1e-12)
        # cone membership transports along the isometry
        g1 = gauge_vt(fa, v, t)
        g2 = gauge_vt(fb, v @ rho.T, t)
        assert np.allclose(g1, g2, atol=1e-11)


def test_isometry_moves_cone_members():
    rng = np.random.default_rng(10)
    f2 = Frame(np.array([0.6, 0.8]))
    rho = frame_isometry(E1, f2)
    v, t = random_unit_points(1, 10_000, rng)
    g = gauge_vt(E1, v, t)
    members = g > 0.5
    g_img = gauge_vt(f2, v[members] @ rho.T, t[members])
    assert np.all(g_img > 0.5 - 1e-12)
