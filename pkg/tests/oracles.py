"""Independent reference implementations used to freeze expected values.

Everything here recomputes quantities through a different route than the
library (explicit loops, dense grid minimization, direct counting), so
agreement is evidence rather than tautology.
"""

import numpy as np


def slow_compose(v1, t1, v2, t2):
    """Group law written out with explicit index loops."""
    k = len(v1) // 2
    omega = 0.0
    for j in range(k):
        omega += v1[j] * v2[j + k] - v1[j + k] * v2[j]
    return [a + b for a, b in zip(v1, v2)], t1 + t2 + omega / 2.0


def slow_norm(v, t):
    return (sum(x * x for x in v) ** 2 + 16.0 * t * t) ** 0.25


def slow_distance(v1, t1, v2, t2):
    iv = [-x for x in v2]
    dv, dt = slow_compose(iv, -t2, v1, t1)
    return slow_norm(dv, dt)


def zoom_vertical_plane_distance(qv, qt, nu, offset, rounds=9, grid=33):
    """Point-to-vertical-plane distance by zooming grid minimization.

    The plane is {<v, nu> = offset}; plane points are enumerated as
    base * (u e_perp, tau) with base = (offset nu, 0).  The window shrinks
    by 3.5 per round so it always covers the previous grid resolution.
    """
    nu = np.asarray(nu, dtype=float)
    perp = np.array([-nu[1], nu[0]])
    base = offset * nu
    span = 2.0 * (1.0 + slow_norm(qv, qt))
    cu, ct = 0.0, 0.0
    best = np.inf
    for _ in range(rounds):
        us = cu + np.linspace(-span, span, grid)
        ts = ct + np.linspace(-span * span, span * span, grid)
        uu, tt = np.meshgrid(us, ts, indexing="ij")
        pv = base[None, :] + uu.ravel()[:, None] * perp
        # left product base-point coordinates: t = tau + w(base, u e_perp)/2
        pt = tt.ravel() + 0.5 * (base[0] * (uu.ravel() * perp[1]) - base[1] * (uu.ravel() * perp[0]))
        dv = pv - np.asarray(qv)
        dt = qt - pt - 0.5 * (pv[:, 0] * (qv[1] - pv[:, 1]) - pv[:, 1] * (qv[0] - pv[:, 0]))
        d = (np.sum(dv * dv, axis=1) ** 2 + 16.0 * dt * dt) ** 0.25
        i = int(np.argmin(d))
        cu, ct = uu.ravel()[i], tt.ravel()[i]
        best = min(best, float(d[i]))
        span /= 3.5
    return best


def zoom_affine_plane_distance(qv, qt, normal, offset, rounds=10, grid=33):
    """Point-to-affine-plane distance by zooming over plane coordinates.

    The quartic can hold several local basins, so the first round scans a
    dense grid before the window starts shrinking.
    """
    n = np.asarray(normal, dtype=float)
    e1 = np.zeros(n.size)
    e1[0] = 1.0
    u = n - e1
    nn = np.linalg.norm(u)
    h = np.eye(n.size) if nn < 1e-14 else np.eye(n.size) - 2.0 * np.outer(u / nn, u / nn)
    basis = h[:, 1:]
    x0 = offset * n
    center = np.zeros(n.size - 1)
    span = 4.0 * (1.0 + slow_norm(qv, qt))
    best = np.inf
    for r in range(rounds):
        g = 151 if r == 0 else grid
        axes = [center[i] + np.linspace(-span, span, g) for i in range(n.size - 1)]
        mesh = np.meshgrid(*axes, indexing="ij")
        y = np.stack([m.ravel() for m in mesh], axis=1)
        x = x0 + y @ basis.T
        dv = x[:, :-1] - np.asarray(qv)
        om = x[:, 0] * qv[1] - x[:, 1] * qv[0]
        dt = qt - x[:, -1] - 0.5 * om
        d = (np.sum(dv * dv, axis=1) ** 2 + 16.0 * dt * dt) ** 0.25
        i = int(np.argmin(d))
        center = y[i]
        best = min(best, float(d[i]))
        span /= 3.5
    return best


def brute_vertical_beta(cloud, pv, pt, s, n_angles=180, n_offsets=120, patch_delta=None,
                        windows=None):
    """Dense-grid bilateral beta over vertical planes, direct loops.

    Serves as the bracketing oracle on benchmark clouds; the plane-side sup
    walks a coordinate net of the plane inside the ball (clipped to the
    sampled windows when given) and measures nearest cloud distance by a
    full scan.
    """
    from hkrect.cloud import NearestIndex
    from hkrect.hgroup import compose_vt, distance_vt

    patch_delta = patch_delta or cloud.resolution
    d_center = distance_vt(cloud.v, cloud.t, pv, pt)
    ball = d_center < s
    bv, bt = cloud.v[ball], cloud.t[ball]
    index = NearestIndex(cloud.v, cloud.t, 3.0 * cloud.resolution)
    best = np.inf
    for ang in np.linspace(0.0, np.pi, n_angles, endpoint=False):
        nu = np.array([np.cos(ang), np.sin(ang)])
        proj = bv @ nu
        for a in np.linspace(proj.min(), proj.max(), n_offsets):
            sup1 = max(proj.max() - a, a - proj.min())
            if sup1 / s >= best:
                continue
            base_v = pv + (a - float(pv @ nu)) * nu
            perp = np.array([-nu[1], nu[0]])
            us = np.arange(-1.02 * s, 1.02 * s, patch_delta)
            taus = np.arange(-0.6 * s * s, 0.6 * s * s, patch_delta * patch_delta)
            uu, tt2 = np.meshgrid(us, taus, indexing="ij")
            wv = uu.ravel()[:, None] * perp
            xv, xt = compose_vt(base_v, pt, wv, tt2.ravel())
            keep = distance_vt(xv, xt, pv, pt) < s
            xv, xt = xv[keep], xt[keep]
            if windows is not None and len(xt):
                mask = np.zeros(len(xt), dtype=bool)
                for win in windows:
                    mask |= win.contains(xv, xt, 0.51 * cloud.resolution,
                                         0.51 * cloud.resolution ** 2)
                xv, xt = xv[mask], xt[mask]
            sup2 = float(np.max(index.nearest_distances(xv, xt))) if len(xt) else 0.0
            best = min(best, (sup1 + sup2) / s)
    return best


def chain_bad_counts(tree, bad, root_id):
    """Per-point count of bad cubes on the chain inside the root, by walking
    parents upward from each finest cube (independent of the library's
    top-down pass)."""
    import numpy as np

    root = tree.cube(root_id)
    counts = np.zeros(len(tree.cloud), dtype=int)
    ids_below = set(tree.descendants(root_id))
    for cube in tree.cubes:
        if cube.id not in ids_below or cube.child_ids:
            continue
        c = 0
        walk = cube
        while True:
            if walk.id in bad:
                c += 1
            if walk.id == root_id or walk.parent_id is None:
                break
            walk = tree.cube(walk.parent_id)
        counts[cube.members] = c
    return counts
