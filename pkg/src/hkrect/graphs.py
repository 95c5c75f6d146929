"""Finite-sample synthesis and verification of intrinsic Lipschitz graphs.

A graph over the splitting of a frame nu is the image of
``w -> w * (phi(w) nu, 0)`` for a scalar field phi on V_nu-coordinates
(u in R^{2k-1}, tau).  The defining cone condition is pairwise: for every
two sample points p != q the displacement p^{-1} q must have cone gauge
at most lam.  Sampling uses a coordinate grid with horizontal spacing
delta and vertical spacing delta^2, which is a delta-separated set of the
graph for any field (and a genuine Koranyi delta-net of V_nu at k = 1).
"""

from dataclasses import dataclass, field

import numpy as np

from .cloud import PointCloud, SampleWindow
from .frames import Frame, gauge_vt, line_coord, proj_vertical_vt
from .hgroup import Point, compose_vt, distance_vt, koranyi_norm_vt, symplectic_vt

__all__ = [
    "GraphSpec",
    "BumpField",
    "constant_field",
    "ConeConditionReport",
    "graph_point",
    "sample_graph",
    "cone_condition_check",
    "graph_function_recover",
    "GraphTable",
    "condition_b_witness",
    "WitnessRecord",
    "ahlfors_ratio",
    "AhlforsReport",
    "make_bump_graph",
    "vertical_plane_cloud",
]


@dataclass(frozen=True)
class BumpField:
    """Sum of Gaussian bumps over V_nu-coordinates; smooth and bounded."""

    centers: np.ndarray   # (m, 2k-1 + 1): u-centers then tau-center
    amplitudes: np.ndarray
    widths: np.ndarray    # (m, 2): u-width, tau-width

    def __call__(self, u: np.ndarray, tau: np.ndarray) -> np.ndarray:
        u = np.atleast_2d(np.asarray(u, dtype=float))
        tau = np.asarray(tau, dtype=float)
        cu = self.centers[:, :-1]
        ct = self.centers[:, -1]
        du = (u[..., None, :] - cu) / self.widths[:, 0][:, None]
        dt = (tau[..., None] - ct) / self.widths[:, 1]
        bumps = self.amplitudes * np.exp(-np.sum(du * du, axis=-1) - dt * dt)
        return np.sum(bumps, axis=-1)

    def scaled(self, factor: float) -> "BumpField":
        return BumpField(self.centers, self.amplitudes * factor, self.widths)


def constant_field(c: float):
    def phi(u, tau):
        u = np.atleast_2d(np.asarray(u, dtype=float))
        return np.full(u.shape[:-1], float(c))
    return phi


@dataclass(frozen=True)
class GraphSpec:
    """Frame, cone parameter and graph field, with its parameter box.

    ``box`` has one (lo, hi) row per u-coordinate followed by the tau row.
    """

    frame: Frame
    lam: float
    phi: object            # callable (u, tau) -> values, vectorized
    box: np.ndarray

    def __post_init__(self):
        if not 0.0 < self.lam < 1.0:
            raise ValueError(f"lam must lie in (0,1), got {self.lam}")
        box = np.asarray(self.box, dtype=float)
        if box.shape != (2 * self.frame.k, 2) or np.any(box[:, 1] < box[:, 0]):
            raise ValueError(f"box must be ({2 * self.frame.k}, 2) with lo <= hi")
        object.__setattr__(self, "box", box)

    def contains(self, u, tau) -> np.ndarray:
        u = np.atleast_2d(np.asarray(u, dtype=float))
        coords = np.concatenate([u, np.atleast_1d(tau)[..., None]], axis=-1)
        return np.all((coords >= self.box[:, 0] - 1e-12) & (coords <= self.box[:, 1] + 1e-12), axis=-1)


@dataclass(frozen=True)
class ConeConditionReport:
    tightest_lam: float
    worst_pair: tuple
    violations: int

    def is_graph(self, lam: float) -> bool:
        return self.tightest_lam <= lam


def graph_point(spec: GraphSpec, w) -> Point:
    """Map V_nu-coordinates w = (u..., tau) through the graph map."""
    w = np.asarray(w, dtype=float)
    u, tau = w[:-1], w[-1]
    if not bool(spec.contains(u[None, :], np.atleast_1d(tau))[0]):
        raise ValueError(f"coordinates {w} outside the declared parameter box")
    vw, tw = spec.frame.vertical_point(u, tau)
    a = float(np.atleast_1d(spec.phi(u[None, :], np.atleast_1d(tau)))[0])
    v, t = compose_vt(vw, tw, a * spec.frame.nu, 0.0)
    return Point(v, float(t))


def _grid_axis(lo: float, hi: float, step: float, jitter: float) -> np.ndarray:
    start = lo + jitter
    n = int(np.floor((hi - start) / step + 1e-9)) + 1
    if n <= 0:
        return np.array([0.5 * (lo + hi)])
    return start + step * np.arange(n)


def sample_graph(spec: GraphSpec, box=None, delta: float = 0.05, seed: int = 0) -> PointCloud:
    """Grid sample of the graph: u-spacing delta, tau-spacing delta^2.

    Weights are delta^(2k+1) per node.  The grid origin is jittered inside
    one cell by ``seed`` so distinct seeds decorrelate grids reproducibly.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    box = spec.box if box is None else np.asarray(box, dtype=float)
    if np.any(box[:, 1] <= box[:, 0]):
        raise ValueError("degenerate parameter box")
    k = spec.frame.k
    rng = np.random.Generator(np.random.PCG64(seed))
    axes = []
    for i in range(2 * k - 1):
        axes.append(_grid_axis(box[i, 0], box[i, 1], delta, rng.uniform(0.0, delta)))
    axes.append(_grid_axis(box[-1, 0], box[-1, 1], delta * delta, rng.uniform(0.0, delta * delta)))
    mesh = np.meshgrid(*axes, indexing="ij")
    coords = np.stack([m.ravel() for m in mesh], axis=1)
    u, tau = coords[:, :-1], coords[:, -1]
    vw, tw = spec.frame.vertical_point(u, tau)
    a = np.asarray(spec.phi(u, tau), dtype=float)
    v, t = compose_vt(vw, tw, a[:, None] * spec.frame.nu, 0.0)
    w = np.full(len(t), delta ** (2 * k + 1))
    window = SampleWindow(spec.frame, box.copy())
    return PointCloud(k, v, t, w, delta, windows=(window,))


def _pairwise_gauge_scan(v, t, frame: Frame, lam=None, stop_above=None):
    """Blocked scan of gauges of p^{-1} q over unordered pairs.

    Returns (max gauge, worst pair, count of pairs with gauge > lam).
    ``stop_above`` aborts early once the running max exceeds it (used by
    rejection synthesis).  Zero displacements (duplicate points) are skipped.
    """
    n = v.shape[0]
    a = line_coord(frame, v)
    best = 0.0
    worst = (0, 0)
    violations = 0
    block = max(1, 2_000_000 // max(n, 1))
    cols = np.arange(n)
    for lo in range(0, n, block):
        hi = min(lo + block, n)
        dv = v[None, :, :] - v[lo:hi, None, :]
        dt = t[None, :] - t[lo:hi, None] - 0.5 * symplectic_vt(v[lo:hi, None, :], v[None, :, :])
        norm = koranyi_norm_vt(dv, dt)
        da = np.abs(a[None, :] - a[lo:hi, None])
        upper = cols[None, :] > cols[lo:hi, None]
        valid = upper & (norm > 0.0)
        gauge = np.where(valid, da / np.where(norm > 0.0, norm, 1.0), -1.0)
        i, j = np.unravel_index(np.argmax(gauge), gauge.shape)
        g = float(gauge[i, j])
        if g > best:
            best = g
            worst = (lo + int(i), int(j))
        if lam is not None:
            violations += int(np.count_nonzero(gauge > lam))
        if stop_above is not None and best > stop_above:
            return best, worst, violations
    return best, worst, violations


def cone_condition_check(cloud: PointCloud, frame: Frame, lam: float | None = None) -> ConeConditionReport:
    """Tightest cone parameter of a cloud over pairs, per the graph definition.

    The cloud is a lam-graph piece over the frame exactly when the returned
    ``tightest_lam`` does not exceed lam; ``violations`` counts pairs above
    the queried lam (0 when no lam is supplied).
    """
    if len(cloud) == 0:
        raise ValueError("cloud is empty")
    if len(cloud) == 1:
        return ConeConditionReport(0.0, (0, 0), 0)
    best, worst, violations = _pairwise_gauge_scan(cloud.v, cloud.t, frame, lam=lam)
    return ConeConditionReport(min(best, 1.0), worst, violations)


@dataclass
class GraphTable:
    """Recovered graph function: one (u, tau) -> phi entry per cloud point."""

    frame: Frame
    u: np.ndarray
    tau: np.ndarray
    phi: np.ndarray

    def lookup(self, u, tau) -> np.ndarray:
        """Nearest-node interpolation in the parabolic node metric."""
        u = np.atleast_2d(np.asarray(u, dtype=float))
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        out = np.empty(tau.shape[0])
        block = max(1, 2_000_000 // max(len(self.tau), 1))
        for lo in range(0, tau.shape[0], block):
            hi = min(lo + block, tau.shape[0])
            du = self.u[None, :, :] - u[lo:hi, None, :]
            dt = self.tau[None, :] - tau[lo:hi, None]
            cost = np.sum(du * du, axis=-1) ** 2 + 16.0 * dt * dt
            out[lo:hi] = self.phi[np.argmin(cost, axis=1)]
        return out

    def as_field(self):
        return lambda u, tau: self.lookup(u, tau)


def graph_function_recover(cloud: PointCloud, frame: Frame, tol: float = 1e-9) -> GraphTable:
    """Split each point as w * (phi nu, 0) and tabulate phi over pi_V.

    Two distinct points sharing pi_V contradict the cone condition, so they
    raise.  Coordinates are keyed after rounding at ``tol`` resolution.
    """
    if len(cloud) == 0:
        raise ValueError("cloud is empty")
    vv, tv = proj_vertical_vt(frame, cloud.v, cloud.t)
    u, tau = frame.vertical_coords(vv, tv)
    phi = line_coord(frame, cloud.v)
    keys = np.round(np.column_stack([u, tau]) / tol).astype(np.int64)
    order = np.lexsort(keys.T)
    sk = keys[order]
    if len(cloud) > 1:
        same = np.all(np.diff(sk, axis=0) == 0, axis=1)
        for i in np.nonzero(same)[0]:
            a, b = order[i], order[i + 1]
            if abs(phi[a] - phi[b]) > tol:
                raise ValueError(
                    f"points {a} and {b} share pi_V but differ along L_nu: cone condition violated"
                )
    return GraphTable(frame, u, tau, phi)


@dataclass(frozen=True)
class WitnessRecord:
    """Outcome of the two-ball separation probe at (p, r)."""

    p1: Point
    p2: Point
    clearance: tuple          # min cloud distance to p1, p2
    required_clearance: float
    clearance_ok: bool
    in_ball: bool
    h_values: np.ndarray
    sign_change: bool

    @property
    def ok(self) -> bool:
        return self.clearance_ok and self.in_ball and self.sign_change


def condition_b_witness(
    cloud: PointCloud,
    frame: Frame,
    beta: float,
    p: Point,
    r: float,
    path=None,
    n_path: int = 101,
    table: GraphTable | None = None,
) -> WitnessRecord:
    """Two-sided ball witness at (p, r) for a graph sample.

    Places p_i = p * (-+ r/2 nu, 0), checks the balls B(p_i, beta r / 2)
    avoid the cloud up to one net resolution, that both centers stay in
    B(p, r), and that the line offset h along a path from p_1 to p_2
    (relative to the recovered graph function) changes sign.
    """
    if r <= 0:
        raise ValueError("radius must be positive")
    d0 = float(np.min(cloud.distances_to(p)))
    if d0 > 0.5 * cloud.resolution + 1e-12:
        raise ValueError("witness center must belong to the cloud")
    half = 0.5 * r
    v1, t1 = compose_vt(p.v, p.t, -half * frame.nu, 0.0)
    v2, t2 = compose_vt(p.v, p.t, half * frame.nu, 0.0)
    p1 = Point(v1, float(t1))
    p2 = Point(v2, float(t2))
    c1 = float(np.min(cloud.distances_to(p1)))
    c2 = float(np.min(cloud.distances_to(p2)))
    required = beta * half - cloud.resolution
    clearance_ok = min(c1, c2) >= required
    in_ball = max(distance_vt(p1.v, p1.t, p.v, p.t), distance_vt(p2.v, p2.t, p.v, p.t)) < r

    if path is None:
        s = np.linspace(0.0, 1.0, n_path)[:, None]
        path_v = (1 - s) * p1.v + s * p2.v
        path_t = ((1 - s) * p1.t + s * p2.t).ravel()
    else:
        path_v, path_t = path
    if table is None:
        table = graph_function_recover(cloud, frame)
    pv, pt = proj_vertical_vt(frame, path_v, path_t)
    u, tau = frame.vertical_coords(pv, pt)
    h = line_coord(frame, path_v) - table.lookup(u, tau)
    sign_change = bool(np.any(h == 0.0) or np.any(np.sign(h[:-1]) * np.sign(h[1:]) < 0))
    return WitnessRecord(p1, p2, (c1, c2), required, bool(clearance_ok), bool(in_ball), h, sign_change)


@dataclass(frozen=True)
class AhlforsReport:
    min_ratio: float
    max_ratio: float

    @property
    def c_hat(self) -> float:
        """Regularity constant estimate max(max ratio, 1 / min ratio)."""
        if self.min_ratio <= 0.0:
            return np.inf
        return max(self.max_ratio, 1.0 / self.min_ratio)


def ahlfors_ratio(cloud: PointCloud, centers, radii) -> AhlforsReport:
    """Extremes of (weight of cloud in B(p, r)) / r^(2k+1) over queried (p, r).

    Radii must stay within [4 resolution, diameter / 4]; boundary effects
    outside that window are not the estimator's business.
    """
    if len(cloud) == 0:
        raise ValueError("cloud is empty")
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    lo = 4.0 * cloud.resolution
    hi = cloud.diameter_upper() / 4.0
    if lo > hi or radii.size == 0:
        raise ValueError(f"no admissible radii in [{lo}, {hi}]")
    if np.any(radii < lo - 1e-12) or np.any(radii > hi + 1e-12):
        raise ValueError(f"radii must lie within [{lo}, {hi}]")
    expo = 2 * cloud.k + 1
    ratios = []
    for c in centers:
        p = cloud.point(int(c)) if np.isscalar(c) or isinstance(c, (int, np.integer)) else c
        d = cloud.distances_to(p)
        for r in radii:
            mass = float(np.sum(cloud.w[d < r]))
            ratios.append(mass / r ** expo)
    ratios = np.asarray(ratios)
    return AhlforsReport(float(np.min(ratios)), float(np.max(ratios)))


def make_bump_graph(
    frame: Frame,
    lam: float,
    box,
    delta: float,
    seed: int,
    n_bumps: int = 6,
    amplitude: float = 0.5,
    safety: float = 1.0,
    width_range: tuple = (0.15, 0.5),
    tau_width_range: tuple | None = None,
):
    """Random bump field accepted by rejection against the cone condition.

    Candidate fields failing ``tightest <= safety * lam`` on their own
    delta-sample have their amplitudes halved until acceptance; the paper-
    style definition itself is the only filter.  ``width_range`` scales the
    bump widths against the box extents (wide bumps put the flatness
    defects at coarse scales only); ``tau_width_range`` overrides it in the
    vertical coordinate, where desk-scale boxes are thin.  Returns the
    accepted spec together with its accepted sample.
    """
    box = np.asarray(box, dtype=float)
    rng = np.random.Generator(np.random.PCG64(seed))
    k = frame.k
    wlo, whi = width_range
    tlo, thi = tau_width_range if tau_width_range is not None else width_range
    centers = np.column_stack([
        rng.uniform(box[i, 0], box[i, 1], size=n_bumps) for i in range(2 * k)
    ])
    widths = np.column_stack([
        rng.uniform(wlo, whi, size=n_bumps) * (box[:-1, 1] - box[:-1, 0]).max(),
        rng.uniform(tlo, thi, size=n_bumps) * (box[-1, 1] - box[-1, 0]),
    ])
    amps = rng.uniform(-amplitude, amplitude, size=n_bumps)
    fld = BumpField(centers, amps, widths)
    target = safety * lam
    for _ in range(60):
        spec = GraphSpec(frame, lam, fld, box)
        cloud = sample_graph(spec, box, delta, seed)
        tight, _, _ = _pairwise_gauge_scan(cloud.v, cloud.t, frame, stop_above=target)
        if tight <= target:
            return spec, cloud
        fld = fld.scaled(0.5)
    raise RuntimeError("bump field failed to satisfy the cone condition after rescaling")


def vertical_plane_cloud(frame: Frame, box, delta: float, seed: int = 0, offset: float = 0.0) -> PointCloud:
    """Net of the vertical plane at signed nu-offset: the graph of phi == offset."""
    spec = GraphSpec(frame, 0.5, constant_field(offset), np.asarray(box, dtype=float))
    return sample_graph(spec, None, delta, seed)
