"""Bilateral beta-numbers over affine and vertical hyperplane families.

The number at center p and scale s is

    s^{-1} inf_P [ sup_{q in B(p,s) cap E} dist(q, P)
                   + sup_{q in B(p,s) cap P} dist(q, E) ],

with P ranging over all affine hyperplanes of R^{2k+1} or over the
vertical ones p0 * V_nu (which in coordinates are exactly the planes with
horizontal normal).  Distances are Koranyi throughout.

Both sups are estimated from below (cloud points for the first, a net of
the plane patch for the second), the inf from above by a budgeted search,
so the reported value is a best-found upper bound whose discretization
error is returned alongside.  Search phases: a coarse candidate grid
ranked by the exact first sup, a probe proxy for the second sup on a
shortlist, optional Nelder-Mead refinement of the proxy objective, and a
full patch evaluation of the finalists.
"""

from dataclasses import dataclass, replace

import numpy as np
from scipy import optimize

from .cloud import NearestIndex, PointCloud
from .frames import Frame
from .hgroup import Point, compose_vt, distance_vt, koranyi_norm_vt

__all__ = [
    "VerticalPlane",
    "AffinePlane",
    "SearchBudget",
    "DEFAULT_BUDGET",
    "SWEEP_BUDGET",
    "BetaValue",
    "dist_point_to_plane",
    "plane_distances",
    "plane_patch",
    "bilateral_beta",
    "beta_for_cube",
    "beta_profile",
]


@dataclass(frozen=True)
class VerticalPlane:
    """Coset p0 * V_nu; as a set, {x : <v_x, nu> = offset}."""

    frame: Frame
    base: Point

    @property
    def kind(self) -> str:
        return "vertical"

    @property
    def offset(self) -> float:
        return float(self.base.v @ self.frame.nu)

    def params_str(self) -> str:
        nu = ",".join(f"{x:.9g}" for x in self.frame.nu)
        return f"nu={nu};offset={self.offset:.9g}"


@dataclass(frozen=True)
class AffinePlane:
    """Euclidean hyperplane {x in R^{2k+1} : <normal, x> = offset}."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        if abs(np.linalg.norm(n) - 1.0) > 1e-9:
            raise ValueError("plane normal must be a unit vector")
        n = n.copy()
        n.setflags(write=False)
        object.__setattr__(self, "normal", n)

    @property
    def kind(self) -> str:
        return "affine"

    def params_str(self) -> str:
        n = ",".join(f"{x:.9g}" for x in self.normal)
        return f"n={n};c={self.offset:.9g}"


def _symplectic_matrix(k: int) -> np.ndarray:
    j = np.zeros((2 * k, 2 * k))
    j[:k, k:] = np.eye(k)
    j[k:, :k] = -np.eye(k)
    return j


def _affine_distances(normal: np.ndarray, offset: float, v: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Koranyi distance from points to an affine plane, in closed form.

    Left translation by q^{-1} maps the plane to one with normal
    m = (n_v + n_t J^T v_q / 2, n_t); minimizing |y|^4 on it reduces to a
    depressed cubic with nonnegative linear coefficient, hence a unique
    real root (Cardano).
    """
    v = np.atleast_2d(np.asarray(v, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    k = v.shape[1] // 2
    nv, nt = normal[:-1], float(normal[-1])
    jmat = _symplectic_matrix(k)
    mv = nv + 0.5 * nt * (v @ jmat)          # J^T v_q rows: v_q^T J
    g = np.linalg.norm(mv, axis=1)
    cprime = offset - (v @ nv + nt * t)
    out = np.empty(t.shape[0])

    vertical_like = np.abs(nt) < 1e-12
    if vertical_like:
        out[:] = np.abs(cprime) / np.maximum(g, 1e-300)
        return out

    flat = g < 1e-12                          # plane constrains t only
    out[flat] = 2.0 * np.sqrt(np.abs(cprime[flat]) / abs(nt))

    gen = ~flat
    if np.any(gen):
        gg = g[gen]
        cc = cprime[gen]
        big_g = 16.0 / (nt * nt)
        p = 0.5 * big_g * gg * gg
        q = -0.5 * big_g * gg * cc
        disc = np.sqrt((0.5 * q) ** 2 + (p / 3.0) ** 3)
        a = np.cbrt(-0.5 * q + disc) + np.cbrt(-0.5 * q - disc)
        fa = a ** 4 + big_g * (cc - a * gg) ** 2
        out[gen] = fa ** 0.25
    return out


def plane_distances(plane, v, t) -> np.ndarray:
    """Vectorized Koranyi point-to-plane distance."""
    if isinstance(plane, VerticalPlane):
        v = np.atleast_2d(np.asarray(v, dtype=float))
        return np.abs(v @ plane.frame.nu - plane.offset)
    return _affine_distances(plane.normal, plane.offset, v, t)


def dist_point_to_plane(q: Point, plane, gtol: float = 1e-10) -> float:
    """Distance from a single point to a hyperplane.

    Vertical planes use the exact closed form |<v_q - v_base, nu>|.  Affine
    planes minimize the quartic d(q, x)^4 over the plane by BFGS descent
    from 8 deterministic starts around the Euclidean foot point, refined to
    the requested gradient norm.
    """
    if isinstance(plane, VerticalPlane):
        return float(abs((q.v - plane.base.v) @ plane.frame.nu))

    n = plane.normal
    dim = n.size
    k = (dim - 1) // 2
    # orthonormal basis of the plane directions via Householder
    e1 = np.zeros(dim)
    e1[0] = 1.0
    u = n - e1
    nn = np.linalg.norm(u)
    h = np.eye(dim) if nn < 1e-14 else np.eye(dim) - 2.0 * np.outer(u / nn, u / nn)
    basis = h[:, 1:]
    x0 = plane.offset * n
    qc = q.coords()
    jmat = _symplectic_matrix(k)

    def objective(y):
        x = x0 + basis @ y
        vz = qc[:-1] - x[:-1]
        tz = qc[-1] - x[-1] - 0.5 * float(x[:-1] @ (jmat @ qc[:-1]))
        vsq = float(vz @ vz)
        f = vsq * vsq + 16.0 * tz * tz
        grad_v = -4.0 * vsq * vz - 16.0 * tz * (jmat @ qc[:-1])
        grad_t = -32.0 * tz
        grad_x = np.append(grad_v, grad_t)
        return f, basis.T @ grad_x

    y_foot = basis.T @ (qc - x0)
    r0 = max(abs(float(n @ qc) - plane.offset), 1e-3 * (1.0 + float(np.linalg.norm(qc))))
    starts = [y_foot]
    for i in range(min(dim - 1, 3)):
        e = np.zeros(dim - 1)
        e[i] = r0
        starts.extend([y_foot + e, y_foot - e])
    starts.append(y_foot + r0 / np.sqrt(dim - 1))
    best = np.inf
    for y in starts[:8]:
        res = optimize.minimize(objective, y, jac=True, method="BFGS",
                                options={"gtol": gtol, "maxiter": 200})
        best = min(best, float(res.fun))
    return best ** 0.25


@dataclass(frozen=True)
class SearchBudget:
    """Knobs of the plane search; larger budgets only tighten the value."""

    angle_grid: int = 64             # vertical directions (exact grid at k=1)
    offset_grid: int = 64            # offsets per direction
    affine_grid: tuple = (32, 32, 32)   # theta, phi, offsets
    proxy_shortlist: int = 24        # candidates probed for the second sup
    full_shortlist: int = 3          # candidates evaluated on the full patch
    refine_iters: int = 40           # Nelder-Mead iterations on the proxy objective
    patch_cap: int = 200_000         # node cap of the full-resolution patch


DEFAULT_BUDGET = SearchBudget()
SWEEP_BUDGET = SearchBudget(angle_grid=24, offset_grid=16, affine_grid=(12, 8, 12),
                            proxy_shortlist=8, full_shortlist=1, refine_iters=0,
                            patch_cap=12_000)


@dataclass(frozen=True)
class BetaValue:
    value: float
    plane: object
    center: Point
    scale: float
    family: str
    grid_error: float
    sup_cloud: float
    sup_plane: float
    n_ball: int
    patch: tuple | None = None    # (node v, node t, nearest distances) when kept


def _vertical_patch(plane: VerticalPlane, p: Point, s: float, delta: float, cap: int):
    """Koranyi net of plane cap B(p, s): u-step delta, tau-step delta^2."""
    frame = plane.frame
    nu = frame.nu
    k = frame.k
    # plane point sharing p's vertical data; the box in V-coordinates around
    # it covers plane cap B(p, s) because |v of w^{-1}(q0^{-1}p)| >= |u|
    q0v = p.v + (plane.offset - float(p.v @ nu)) * nu
    q0t = p.t
    yv, yt = compose_vt(-q0v, -q0t, p.v, p.t)
    # tau extent of the in-ball patch: s^2/4 plus the twist against the
    # nu-offset of the ball center from the plane
    tau_half = s * s / 4.0 + 0.55 * s * float(np.linalg.norm(yv)) + 2.0 * delta * delta
    n_u = 2 * k - 1
    du = delta
    dtau = delta * delta
    count = (2.05 * s / du) ** n_u * (2 * tau_half / dtau)
    if count > cap:
        inflate = (count / cap) ** (1.0 / (n_u + 2))
        du *= inflate
        dtau = du * du
    axes = [np.arange(-1.02 * s, 1.02 * s + du / 2, du) for _ in range(n_u)]
    axes.append(np.arange(-tau_half, tau_half + dtau / 2, dtau) + float(yt))
    mesh = np.meshgrid(*axes, indexing="ij")
    coords = np.stack([m.ravel() for m in mesh], axis=1)
    uu, tt = coords[:, :-1], coords[:, -1]
    wv, wt = frame.vertical_point(uu, tt)
    xv, xt = compose_vt(q0v, q0t, wv, wt)
    keep = distance_vt(xv, xt, p.v, p.t) < s
    return xv[keep], xt[keep], du


def _affine_patch(plane: AffinePlane, p: Point, s: float, delta: float, cap: int):
    """Anisotropic Euclidean grid on the plane, Koranyi-spaced ~delta."""
    n = plane.normal
    dim = n.size
    e1 = np.zeros(dim)
    e1[0] = 1.0
    u = n - e1
    nn = np.linalg.norm(u)
    h = np.eye(dim) if nn < 1e-14 else np.eye(dim) - 2.0 * np.outer(u / nn, u / nn)
    basis = h[:, 1:]
    qc = p.coords()
    x0 = qc + (plane.offset - float(n @ qc)) * n
    ht = s * s / 4.0 + float(np.linalg.norm(p.v)) * s / 2.0 + s * s
    steps = []
    extents = []
    for i in range(dim - 1):
        ev = np.linalg.norm(basis[:-1, i])
        et = abs(basis[-1, i])
        step = min(delta / ev if ev > 1e-12 else np.inf,
                   delta * delta / (4.0 * et) if et > 1e-12 else np.inf)
        extent = 1.05 * (s * ev + ht * et)
        steps.append(step)
        extents.append(extent)
    steps = np.asarray(steps)
    extents = np.asarray(extents)
    count = np.prod(np.maximum(2.0 * extents / steps, 1.0))
    if count > cap:
        steps = steps * (count / cap) ** (1.0 / (dim - 1))
    axes = [np.arange(-extents[i], extents[i] + steps[i] / 2, steps[i]) for i in range(dim - 1)]
    mesh = np.meshgrid(*axes, indexing="ij")
    y = np.stack([m.ravel() for m in mesh], axis=1)
    x = x0 + y @ basis.T
    xv, xt = x[:, :-1], x[:, -1]
    keep = distance_vt(xv, xt, p.v, p.t) < s
    # Koranyi spacing of the grid, including the group twist between nodes
    # (tilted Euclidean grids are not group-adapted; the achieved covering
    # degrades like sqrt(|v| step) and is reported honestly).
    vball = float(np.linalg.norm(p.v)) + s
    kspace = 0.0
    for i in range(dim - 1):
        ev = np.linalg.norm(basis[:-1, i])
        et = abs(basis[-1, i])
        kspace = max(kspace, steps[i] * ev,
                     2.0 * np.sqrt(steps[i] * et),
                     2.0 * np.sqrt(0.5 * vball * steps[i] * ev))
    return xv[keep], xt[keep], max(kspace, delta)


def _window_mask(window, xv, xt, delta) -> np.ndarray:
    """Membership of nodes in the cloud's sampled region.

    The cloud only represents its set inside the region its generators
    sampled; outside it the plane-side sup would measure the sampling
    boundary instead of flatness.  Clouds carrying
    :class:`hkrect.cloud.SampleWindow` metadata are clipped exactly;
    otherwise the coordinate bounding box stands in.
    """
    if not window:
        return np.ones(xt.shape[0], dtype=bool)
    if isinstance(window, tuple) and len(window) == 2 and isinstance(window[0], np.ndarray):
        lo, hi = window
        coords = np.column_stack([xv, xt])
        return np.all((coords >= lo) & (coords <= hi), axis=1)
    mask = np.zeros(xt.shape[0], dtype=bool)
    for win in window:
        # half a net cell: nodes beyond it probe unsampled territory and
        # would report the window edge as a flatness defect
        mask |= win.contains(xv, xt, margin_u=0.51 * delta, margin_tau=0.51 * delta * delta)
    return mask


def plane_patch(plane, p: Point, s: float, delta: float, cap: int = 200_000, window=None):
    """delta-net of plane cap B(p, s); returns (v, t, achieved spacing).

    ``window`` restricts nodes to the sampled region; see
    :func:`_window_mask`.
    """
    if isinstance(plane, VerticalPlane):
        xv, xt, spacing = _vertical_patch(plane, p, s, delta, cap)
    else:
        xv, xt, spacing = _affine_patch(plane, p, s, delta, cap)
    if window is not None and xt.size:
        keep = _window_mask(window, xv, xt, delta)
        xv, xt = xv[keep], xt[keep]
    return xv, xt, spacing


def _sup_plane(plane, p, s, delta, cap, index: NearestIndex, window=None,
               keep_nodes: bool = False):
    xv, xt, spacing = plane_patch(plane, p, s, delta, cap, window)
    if xt.size == 0:
        return 0.0, spacing, ((xv, xt, np.empty(0)) if keep_nodes else None)
    d = index.nearest_distances(xv, xt)
    return float(np.max(d)), spacing, ((xv, xt, d) if keep_nodes else None)


def _probe_nodes(plane, p, s, k, window=None):
    """A handful of in-ball plane nodes for the cheap second-sup proxy."""
    if isinstance(plane, VerticalPlane):
        frame = plane.frame
        nu = frame.nu
        v0 = p.v + (plane.offset - float(p.v @ nu)) * nu
        offs = np.array([-0.66 * s, 0.0, 0.66 * s])
        taus = np.array([-0.4 * s * s, 0.0, 0.4 * s * s])
        uu = np.stack(np.meshgrid(*([offs] * (2 * k - 1)), taus, indexing="ij"), -1).reshape(-1, 2 * k)
        wv, wt = frame.vertical_point(uu[:, :-1], uu[:, -1])
        xv, xt = compose_vt(v0, p.t, wv, wt)
    else:
        n = plane.normal
        dim = n.size
        e1 = np.zeros(dim)
        e1[0] = 1.0
        u = n - e1
        nn = np.linalg.norm(u)
        h = np.eye(dim) if nn < 1e-14 else np.eye(dim) - 2.0 * np.outer(u / nn, u / nn)
        basis = h[:, 1:]
        qc = p.coords()
        x0 = qc + (plane.offset - float(n @ qc)) * n
        offs = np.array([-0.66 * s, 0.0, 0.66 * s])
        grids = np.meshgrid(*([offs] * (dim - 1)), indexing="ij")
        y = np.stack([g.ravel() for g in grids], axis=1)
        scale = np.array([1.0 if np.linalg.norm(basis[:-1, i]) > 0.5 else s / 2.0 for i in range(dim - 1)])
        x = x0 + (y * scale) @ basis.T
        xv, xt = x[:, :-1], x[:, -1]
    keep = distance_vt(xv, xt, p.v, p.t) < s
    xv, xt = xv[keep], xt[keep]
    if window is not None and xt.size:
        delta = s / 64.0
        inside = _window_mask(window, xv, xt, delta)
        xv, xt = xv[inside], xt[inside]
    return xv, xt


def _proxy_sup_plane(plane, p, s, k, index: NearestIndex, window=None) -> float:
    xv, xt = _probe_nodes(plane, p, s, k, window)
    if xt.size == 0:
        return 0.0
    return float(np.max(index.nearest_distances(xv, xt)))


def _vertical_directions(k: int, count: int) -> np.ndarray:
    if k == 1:
        ang = np.linspace(0.0, np.pi, count, endpoint=False)
        return np.column_stack([np.cos(ang), np.sin(ang)])
    rng = np.random.Generator(np.random.PCG64(20240701))
    dirs = rng.normal(size=(count, 2 * k))
    return dirs / np.linalg.norm(dirs, axis=1, keepdims=True)


def _affine_normals(k: int, n_theta: int, n_phi: int) -> np.ndarray:
    if k == 1:
        theta = np.linspace(0.0, 2.0 * np.pi, n_theta, endpoint=False)
        phi = np.linspace(0.0, np.pi / 2.0, n_phi)
        tt, pp = np.meshgrid(theta, phi, indexing="ij")
        return np.column_stack([
            (np.sin(pp) * np.cos(tt)).ravel(),
            (np.sin(pp) * np.sin(tt)).ravel(),
            np.cos(pp).ravel(),
        ])
    rng = np.random.Generator(np.random.PCG64(20240702))
    dirs = rng.normal(size=(n_theta * n_phi, 2 * k + 1))
    dirs[:, -1] = np.abs(dirs[:, -1])
    return dirs / np.linalg.norm(dirs, axis=1, keepdims=True)


def bilateral_beta(
    cloud: PointCloud,
    p: Point,
    s: float,
    family: str = "vertical",
    budget: SearchBudget | None = None,
    index: NearestIndex | None = None,
    extra_planes=(),
    keep_patch: bool = False,
) -> BetaValue:
    """Best-found bilateral beta-number at (p, s) for the given plane family.

    ``extra_planes`` are evaluated on the full patch unconditionally, which
    lets callers seed the search with planes found elsewhere (the reported
    value can only improve).  ``keep_patch`` retains the winning plane's
    patch nodes and their nearest-cloud distances, so callers can reuse the
    evaluation on sub-balls.
    """
    if family not in ("vertical", "affine"):
        raise ValueError(f"unknown plane family {family!r}")
    budget = budget or DEFAULT_BUDGET
    delta = cloud.resolution
    if s < 4.0 * delta:
        raise ValueError(f"scale {s} is below 4x resolution {delta}")
    ball = cloud.ball_indices(p, s)
    if ball.size == 0:
        raise ValueError("no cloud points in the ball")
    bv, bt = cloud.v[ball], cloud.t[ball]
    if index is None:
        index = NearestIndex(cloud.v, cloud.t, max(3.0 * delta, s / 64.0))
    k = cloud.k
    window = cloud.windows if cloud.windows else cloud.bbox(margin=delta)

    if family == "vertical":
        dirs = _vertical_directions(k, budget.angle_grid)
        proj = bv @ dirs.T                            # (n_ball, D)
        hi = proj.max(axis=0)
        lo = proj.min(axis=0)
        cand = []
        for d in range(dirs.shape[0]):
            offs = np.linspace(lo[d], hi[d], budget.offset_grid)
            sup1 = np.maximum(hi[d] - offs, offs - lo[d])
            for a, s1 in zip(offs, sup1):
                cand.append((float(s1), d, float(a)))
        cand.sort(key=lambda c: c[0])

        def make_plane(d, a):
            nu = dirs[d]
            base = Point(a * nu, 0.0)
            return VerticalPlane(Frame(nu / np.linalg.norm(nu)), base)

        shortlist = [(make_plane(d, a), s1) for s1, d, a in cand[: budget.proxy_shortlist]]
    else:
        nt1, nt2, nc = budget.affine_grid
        normals = _affine_normals(k, nt1, nt2)
        coords = np.column_stack([bv, bt])
        cand = []
        for nvec in normals:
            proj = coords @ nvec
            offs = np.linspace(proj.min(), proj.max(), nc)
            for c in offs:
                s1 = float(np.max(_affine_distances(nvec, float(c), bv, bt)))
                cand.append((s1, nvec, float(c)))
        cand.sort(key=lambda c: c[0])
        shortlist = [(AffinePlane(nvec, c), s1) for s1, nvec, c in cand[: budget.proxy_shortlist]]

    # proxy ranking of the shortlist by probe second sup (batched query)
    probe_v, probe_t, probe_id = [], [], []
    for pi, (plane, _) in enumerate(shortlist):
        xv, xt = _probe_nodes(plane, p, s, k, window)
        if xt.size:
            probe_v.append(xv)
            probe_t.append(xt)
            probe_id.append(np.full(xt.size, pi))
    proxy2 = np.zeros(len(shortlist))
    if probe_t:
        dists = index.nearest_distances(np.vstack(probe_v), np.concatenate(probe_t))
        ids = np.concatenate(probe_id)
        for pi in range(len(shortlist)):
            sel = ids == pi
            if np.any(sel):
                proxy2[pi] = float(np.max(dists[sel]))
    ranked = [(s1 + proxy2[pi], plane, s1) for pi, (plane, s1) in enumerate(shortlist)]
    ranked.sort(key=lambda c: c[0])

    # optional Nelder-Mead refinement of the proxy objective (k = 1 only)
    refined = []
    if budget.refine_iters > 0 and k == 1 and ranked:
        if family == "vertical":
            best_plane = ranked[0][1]
            ang0 = float(np.arctan2(best_plane.frame.nu[1], best_plane.frame.nu[0]))
            a0 = best_plane.offset

            def proxy_obj(x):
                nu = np.array([np.cos(x[0]), np.sin(x[0])])
                pr = bv @ nu
                s1 = max(float(pr.max()) - x[1], x[1] - float(pr.min()))
                pl = VerticalPlane(Frame(nu), Point(x[1] * nu, 0.0))
                return s1 + _proxy_sup_plane(pl, p, s, k, index, window)

            res = optimize.minimize(proxy_obj, np.array([ang0, a0]), method="Nelder-Mead",
                                    options={"maxiter": budget.refine_iters, "xatol": 1e-4 * s,
                                             "fatol": 1e-4 * s})
            nu = np.array([np.cos(res.x[0]), np.sin(res.x[0])])
            refined.append(VerticalPlane(Frame(nu), Point(float(res.x[1]) * nu, 0.0)))
        else:
            best_plane = ranked[0][1]
            n0 = best_plane.normal
            th0 = float(np.arctan2(n0[1], n0[0]))
            ph0 = float(np.arccos(np.clip(n0[2], -1.0, 1.0)))
            c0 = best_plane.offset

            def proxy_obj(x):
                nvec = np.array([np.sin(x[1]) * np.cos(x[0]), np.sin(x[1]) * np.sin(x[0]), np.cos(x[1])])
                nrm = np.linalg.norm(nvec)
                if nrm < 1e-9:
                    return np.inf
                nvec = nvec / nrm
                s1 = float(np.max(_affine_distances(nvec, x[2], bv, bt)))
                pl = AffinePlane(nvec, float(x[2]))
                return s1 + _proxy_sup_plane(pl, p, s, k, index, window)

            res = optimize.minimize(proxy_obj, np.array([th0, ph0, c0]), method="Nelder-Mead",
                                    options={"maxiter": budget.refine_iters, "xatol": 1e-4,
                                             "fatol": 1e-4 * s})
            nvec = np.array([np.sin(res.x[1]) * np.cos(res.x[0]),
                             np.sin(res.x[1]) * np.sin(res.x[0]), np.cos(res.x[1])])
            nvec = nvec / np.linalg.norm(nvec)
            refined.append(AffinePlane(nvec, float(res.x[2])))

    finalists = [plane for _, plane, _ in ranked[: budget.full_shortlist]]
    finalists.extend(refined)
    finalists.extend(extra_planes)

    best = None
    for plane in finalists:
        s1 = float(np.max(plane_distances(plane, bv, bt)))
        s2, spacing, nodes = _sup_plane(plane, p, s, delta, budget.patch_cap, index, window,
                                        keep_nodes=keep_patch)
        total = (s1 + s2) / s
        gerr = (1.5 * spacing + delta) / s
        if best is None or total < best.value:
            best = BetaValue(total, plane, p, s, family, gerr, s1 / s, s2 / s,
                             int(ball.size), nodes)
    return best


def beta_for_cube(tree, cube, family: str = "vertical",
                  budget: SearchBudget | None = None,
                  index: NearestIndex | None = None,
                  extra_planes=()) -> BetaValue:
    """Beta-number of a cube at its canonical ball B(p_Q, 2 C0 l(Q))."""
    cube = tree.cube(cube.id) if hasattr(cube, "id") else tree.cube(cube)
    p = tree.center_point(cube)
    s = 2.0 * tree.c0 * tree.side(cube.level)
    return bilateral_beta(tree.cloud, p, s, family, budget, index, extra_planes)


def beta_profile(tree, family: str = "vertical",
                 budget: SearchBudget | None = None,
                 threads: int = 1,
                 min_scale_factor: float = 4.0):
    """BetaValue for every cube whose ball scale is admissible.

    Cubes below ``min_scale_factor * resolution`` are skipped (they live
    under the sampling floor).  Returns a list of (cube_id, BetaValue)
    sorted by cube id; the computation order never affects results.
    """
    budget = budget or SWEEP_BUDGET
    cloud = tree.cloud
    # first query ring at ~3 resolutions: most patch nodes sit within two
    # net spacings of the cloud, so one ring usually settles them
    index = NearestIndex(cloud.v, cloud.t, 3.0 * cloud.resolution)
    jobs = []
    for cube in tree.cubes:
        s = 2.0 * tree.c0 * tree.side(cube.level)
        if s >= min_scale_factor * cloud.resolution:
            jobs.append(cube)

    def work(cube):
        return cube.id, beta_for_cube(tree, cube, family, budget, index)

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, jobs))
    else:
        results = [work(c) for c in jobs]
    return sorted(results, key=lambda r: r[0])
