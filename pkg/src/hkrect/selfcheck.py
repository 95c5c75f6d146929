"""Built-in invariant suites behind the ``check`` command.

Each suite re-derives its expected values independently (hand formulas,
grid minimization, direct counting) and returns a pass flag with a short
diagnostic; the CLI exits nonzero if any suite fails.
"""

import numpy as np

from .beta import VerticalPlane, bilateral_beta, dist_point_to_plane
from .carleson import CarlesonQuery, carleson_integral_estimate, i_functional, packing_ratio
from .cloud import PointCloud
from .cubes import build_cube_tree, verify_cube_axioms
from .frames import ConeSpec, Frame, cone_gauge, cone_member, frame_isometry, gauge_vt, proj_line, proj_vertical
from .graphs import cone_condition_check, graph_function_recover, make_bump_graph, vertical_plane_cloud
from .hgroup import (GroupDim, Point, compose, compose_vt, dilate, distance, distance_vt,
                     invert, koranyi_norm, koranyi_norm_vt)

__all__ = ["run_all"]


def _group_suite(n: int):
    worst = 0.0
    for k in (1, 2):
        dim = GroupDim(k)
        rng = np.random.Generator(np.random.PCG64(100 + k))
        v1, t1 = dim.random_points(n, rng)
        v2, t2 = dim.random_points(n, rng)
        v3, t3 = dim.random_points(n, rng)
        av, at = compose_vt(*compose_vt(v1, t1, v2, t2), v3, t3)
        bv, bt = compose_vt(v1, t1, *compose_vt(v2, t2, v3, t3))
        scale = 1.0 + np.abs(at)
        worst = max(worst, float(np.max(np.abs(av - bv))), float(np.max(np.abs(at - bt) / scale)))
        # left invariance and homogeneity of the distance
        d0 = distance_vt(v1, t1, v2, t2)
        lv1, lt1 = compose_vt(v3, t3, v1, t1)
        lv2, lt2 = compose_vt(v3, t3, v2, t2)
        worst = max(worst, float(np.max(np.abs(distance_vt(lv1, lt1, lv2, lt2) - d0) / (1e-30 + d0))))
        s = 1.7
        worst = max(worst, float(np.max(np.abs(
            distance_vt(s * v1, s * s * t1, s * v2, s * s * t2) - s * d0) / (1e-30 + s * d0))))
        # triangle inequality
        d12 = distance_vt(v1, t1, v2, t2)
        d13 = distance_vt(v1, t1, v3, t3)
        d32 = distance_vt(v3, t3, v2, t2)
        if np.any(d12 > d13 + d32 + 1e-12):
            return False, "triangle inequality violated"
    ok = worst <= 1e-11
    return ok, f"worst relative defect {worst:.2e} over {n} cases at k in (1, 2)"


def _projection_suite(n: int):
    worst = 0.0
    for k in (1, 2):
        rng = np.random.Generator(np.random.PCG64(200 + k))
        nu = rng.normal(size=2 * k)
        frame = Frame(nu / np.linalg.norm(nu))
        v, t = GroupDim(k).random_points(n, rng)
        from .frames import proj_line_vt, proj_vertical_vt

        vv, tv = proj_vertical_vt(frame, v, t)
        lv, lt = proj_line_vt(frame, v, t)
        rv, rt = compose_vt(vv, tv, lv, lt)
        worst = max(worst, float(np.max(np.abs(rv - v))), float(np.max(np.abs(rt - t) / (1.0 + np.abs(t)))))
        if np.any(koranyi_norm_vt(lv, lt) > koranyi_norm_vt(v, t) + 1e-12):
            return False, "projection is not norm-contracting"
        s = 2.3
        pv, pt = proj_vertical_vt(frame, s * v, s * s * t)
        worst = max(worst, float(np.max(np.abs(pv - s * vv))), float(np.max(np.abs(pt - s * s * tv) / (1.0 + np.abs(t)))))
    ok = worst <= 1e-11
    return ok, f"splitting and dilation defects at most {worst:.2e}"


def _cone_suite(n: int):
    frame = Frame(np.array([1.0, 0.0]))
    rng = np.random.Generator(np.random.PCG64(300))
    from .frames import random_unit_points

    v, t = random_unit_points(1, n, rng)
    g = gauge_vt(frame, v, t)
    # nesting: members of the tighter cone belong to the looser one
    if np.any((g > 0.7) & ~(g > 0.3)):
        return False, "cone nesting fails"
    # dilation invariance of membership at a random scale
    s = 3.7
    g2 = gauge_vt(frame, s * v, s * s * t)
    if np.max(np.abs(g - g2)) > 1e-9:
        return False, "gauge is not dilation invariant"
    on_line = Point(frame.nu * 2.5, 0.0)
    if abs(cone_gauge(frame, on_line) - 1.0) > 1e-12:
        return False, "gauge != 1 on the horizontal line"
    if cone_member(ConeSpec("ball_union", 0.5, frame), Point(np.array([0.0, 1.0]), 0.0)):
        return False, "ball-union cone admits a perpendicular point"
    rho = frame_isometry(Frame(np.array([0.0, 1.0])), frame)
    if not np.allclose(rho @ np.array([0.0, 1.0]), frame.nu, atol=1e-12):
        return False, "frame isometry misses the target direction"
    return True, f"gauge, nesting, dilation and isometry checks on {n} sphere samples"


def _graph_suite(delta: float):
    frame = Frame(np.array([1.0, 0.0]))
    box = np.array([[-0.3, 0.3], [-0.02, 0.02]])
    spec, cloud = make_bump_graph(frame, 0.5, box, delta, seed=4)
    rep = cone_condition_check(cloud, frame)
    if rep.tightest_lam > 0.5:
        return False, f"cone condition fails: tightest {rep.tightest_lam:.3f}"
    table = graph_function_recover(cloud, frame)
    err = float(np.max(np.abs(np.asarray(spec.phi(table.u, table.tau)) - table.phi)))
    if err > 1e-12:
        return False, f"graph function recovery error {err:.2e}"
    return True, f"{len(cloud)} points, tightest lambda {rep.tightest_lam:.3f}, recovery {err:.1e}"


def _cube_suite(delta: float):
    frame = Frame(np.array([1.0, 0.0]))
    box = np.array([[-0.4, 0.4], [-0.03, 0.03]])
    cloud = vertical_plane_cloud(frame, box, delta, seed=9)
    j_max = int(np.ceil(np.log2(cloud.eccentricity(0))))
    tree = build_cube_tree(cloud, j_max - 3, j_max, seed=2)
    rep = verify_cube_axioms(tree)
    if not rep.all_pass:
        return False, f"axioms fail: {rep.failures[:2]}"
    return True, f"{len(tree.cubes)} cubes, measured C0 {rep.measured_c0:.3g}"


def _grid_zoom_vertical(q: Point, frame: Frame, offset: float, rounds: int = 9):
    """Independent point-to-plane distance by zooming grid minimization.

    The window shrinks by 3.5 per round: slow enough that the next window
    always covers the previous grid resolution in both u and tau (the tau
    window scales quadratically).
    """
    base = q.v + (offset - float(q.v @ frame.nu)) * frame.nu
    span = 2.0 * (1.0 + koranyi_norm(q))
    cu, ct = 0.0, 0.0
    best = np.inf
    for _ in range(rounds):
        us = cu + np.linspace(-span, span, 33)
        ts = ct + np.linspace(-span * span, span * span, 33)
        uu, tt = np.meshgrid(us, ts, indexing="ij")
        wv, wt = frame.vertical_point(uu.ravel()[:, None], tt.ravel())
        xv, xt = compose_vt(base, 0.0, wv, wt)
        d = distance_vt(xv, xt, q.v, q.t)
        i = int(np.argmin(d))
        cu, ct = uu.ravel()[i], tt.ravel()[i]
        best = min(best, float(d[i]))
        span /= 3.5
    return best


def _beta_suite(n_cases: int):
    frame = Frame(np.array([1.0, 0.0]))
    rng = np.random.Generator(np.random.PCG64(700))
    worst = 0.0
    for _ in range(n_cases):
        q = Point(rng.normal(size=2), float(rng.normal()))
        offset = float(rng.normal()) * 0.5
        plane = VerticalPlane(frame, Point(offset * frame.nu, 0.0))
        closed = dist_point_to_plane(q, plane)
        brute = _grid_zoom_vertical(q, frame, offset)
        worst = max(worst, abs(closed - brute))
    if worst > 1e-6:
        return False, f"closed form vs grid minimization off by {worst:.2e}"
    box = np.array([[-0.7, 0.7], [-0.04, 0.04]])
    cloud = vertical_plane_cloud(frame, box, 0.04, seed=3)
    bv = bilateral_beta(cloud, Point(np.zeros(2), 0.0), 0.5, "vertical")
    if bv.value > 2.5 * cloud.resolution / 0.5:
        return False, f"plane-cloud beta too large: {bv.value:.4f}"
    return True, f"distance agreement {worst:.1e} over {n_cases} cases; flat beta {bv.value:.4f}"


def _carleson_suite():
    frame = Frame(np.array([1.0, 0.0]))
    box = np.array([[-0.5, 0.5], [-0.03, 0.03]])
    cloud = vertical_plane_cloud(frame, box, 0.04, seed=6)
    j_max = int(np.ceil(np.log2(cloud.eccentricity(0))))
    tree = build_cube_tree(cloud, j_max - 3, j_max, seed=1)
    empty = packing_ratio(tree, set())
    if empty.gamma_hat != 0.0:
        return False, "empty bad set packs nonzero"
    some = tree.levels[j_max - 2][0]
    single = packing_ratio(tree, {some})
    if abs(single.ratio(some) - 1.0) > 1e-12:
        return False, "single bad cube does not pack to one at itself"
    p = cloud.point(0)
    query = CarlesonQuery(lambda c, s: np.ones(len(c), dtype=bool), p, 0.5, 0.03125)
    est = carleson_integral_estimate(cloud, query)
    expect = est.ball_weight * np.log(0.5 / 0.03125)
    if abs(est.value - expect) > 1e-9 * max(1.0, expect):
        return False, f"full-region integral {est.value:.4g} != {expect:.4g}"
    a = 0.1
    e1 = PointCloud(1, np.zeros((1, 2)), np.zeros(1), np.ones(1), 0.01)
    e2 = PointCloud(1, np.array([[a, 0.0]]), np.zeros(1), np.ones(1), 0.01)
    val = i_functional(e1, e2, Point(np.zeros(2), 0.0), 0.5)
    if abs(val - a / 0.5) > 1e-12:
        return False, f"two-point proximity functional {val} != {a / 0.5}"
    return True, "packing, log integral, and proximity functional behave"


def run_all(fast: bool = False):
    n = 2_000 if fast else 10_000
    results = [
        ("group-metric", *_group_suite(n)),
        ("projections", *_projection_suite(n)),
        ("cones", *_cone_suite(n)),
        ("graphs", *_graph_suite(0.05 if fast else 0.03)),
        ("cubes", *_cube_suite(0.04 if fast else 0.025)),
        ("beta", *_beta_suite(5 if fast else 20)),
        ("carleson", *_carleson_suite()),
    ]
    return [(name, ok, detail) for name, ok, detail in results]
