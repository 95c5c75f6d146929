"""Carleson-set integrals, packing conditions, bad cubes, and the
two-set proximity functional.

The continuous estimator integrates an indicator over cloud x scale space
against weight x ds/s on a geometric scale grid; the discrete packing
condition sums |Q| = 2^(j(2k+1)) of flagged cubes below every root and
compares against |R|.
"""

from dataclasses import dataclass

import numpy as np

from .beta import SWEEP_BUDGET, beta_profile
from .cloud import PointCloud, nearest_cross_distances
from .cubes import CubeTree
from .hgroup import Point

__all__ = [
    "CarlesonQuery",
    "CarlesonIntegral",
    "carleson_integral_estimate",
    "pointwise_indicator",
    "PackingReport",
    "packing_ratio",
    "bad_cube_set",
    "i_functional",
    "ComparisonReport",
    "comparison_condition_check",
]


def pointwise_indicator(fn):
    """Adapt a (Point, scale) -> bool predicate to the vectorized form."""

    def vec(cloud: PointCloud, s: float) -> np.ndarray:
        return np.fromiter((bool(fn(cloud.point(i), s)) for i in range(len(cloud))),
                           dtype=bool, count=len(cloud))

    return vec


@dataclass(frozen=True)
class CarlesonQuery:
    """Region indicator over (point, scale) with the integration window.

    ``indicator(cloud, s)`` returns the boolean mask of cloud points whose
    pair (point, s) belongs to the region; use :func:`pointwise_indicator`
    to wrap a scalar predicate.
    """

    indicator: object
    center: Point
    radius: float
    s_min: float
    factor: float = 2.0 ** 0.25

    def __post_init__(self):
        if self.factor <= 1.0:
            raise ValueError("scale grid factor must exceed 1")
        if self.s_min <= 0.0 or self.radius <= self.s_min:
            raise ValueError("need 0 < s_min < radius")


@dataclass(frozen=True)
class CarlesonIntegral:
    value: float          # integral of weight x dlog(s) over the region
    normalized: float     # value / r^(2k+1)
    n_slices: int
    ball_weight: float


def carleson_integral_estimate(cloud: PointCloud, query: CarlesonQuery) -> CarlesonIntegral:
    """Riemann sum of the region measure against dH ds/s inside the box.

    The scale grid is geometric from s_min to r with ratio at most
    ``query.factor``; slices are evaluated at geometric midpoints and
    weighted by their exact log-length, so a full indicator integrates to
    ball_weight x ln(r / s_min) exactly.
    """
    if query.s_min < cloud.resolution / 4.0:
        raise ValueError("s_min below a quarter resolution is pure extrapolation")
    log_span = np.log(query.radius / query.s_min)
    n = max(1, int(np.ceil(log_span / np.log(query.factor))))
    dlog = log_span / n
    edges = query.s_min * np.exp(dlog * np.arange(n + 1))
    mids = np.sqrt(edges[:-1] * edges[1:])
    ball = cloud.distances_to(query.center) < query.radius
    wball = float(np.sum(cloud.w[ball]))
    total = 0.0
    for s in mids:
        mask = np.asarray(query.indicator(cloud, float(s)), dtype=bool)
        total += float(np.sum(cloud.w[mask & ball])) * dlog
    expo = 2 * cloud.k + 1
    return CarlesonIntegral(total, total / query.radius ** expo, n, wball)


@dataclass(frozen=True)
class PackingReport:
    gamma_hat: float
    offending_root: int
    ratios: dict            # root id -> packing ratio

    def ratio(self, root_id: int) -> float:
        return self.ratios[root_id]


def packing_ratio(tree: CubeTree, bad) -> PackingReport:
    """sum of |Q| over bad cubes below each root R, divided by |R|.

    Every cube acts as a root, matching the universal quantifier of the
    packing condition.
    """
    bad = set(int(b) for b in bad)
    for b in bad:
        if not 0 <= b < len(tree.cubes):
            raise KeyError(f"unknown cube id {b}")
    badsum = np.zeros(len(tree.cubes))
    for j in sorted(tree.levels):
        for cid in tree.levels[j]:
            cube = tree.cubes[cid]
            own = tree.cube_measure(cube) if cid in bad else 0.0
            badsum[cid] = own + sum(badsum[ch] for ch in cube.child_ids)
    ratios = {}
    gamma = 0.0
    worst = -1
    for cube in tree.cubes:
        r = badsum[cube.id] / tree.cube_measure(cube)
        ratios[cube.id] = float(r)
        if r > gamma:
            gamma = float(r)
            worst = cube.id
    return PackingReport(gamma, worst, ratios)


def bad_cube_set(tree: CubeTree, eps: float, family: str = "vertical",
                 budget=None, profile=None) -> set:
    """Cubes whose beta value minus its grid error exceeds eps.

    Subtracting the reported discretization error keeps packing estimates
    conservative: a cube is flagged only when its flatness defect is
    resolved above the sampling floor.  ``profile`` reuses a precomputed
    :func:`hkrect.beta.beta_profile` result.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0,1), got {eps}")
    if profile is None:
        profile = beta_profile(tree, family, budget or SWEEP_BUDGET)
    return {cid for cid, bv in profile if bv.value - bv.grid_error > eps}


def i_functional(e1: PointCloud, e2: PointCloud, p: Point, s: float,
                 nearest: np.ndarray | None = None) -> float:
    """Scale-normalized farthest near-miss of e1 from e2 inside B(p, s).

    Ranges over q in B(p, s) cap e1 with dist(q, e2) < s; the supremum
    over the empty set is zero.  ``nearest`` may carry precomputed
    dist(q, e2) for every point of e1.
    """
    if s <= 0:
        raise ValueError("scale must be positive")
    if nearest is None:
        nearest = nearest_cross_distances(e1, e2)
    mask = (e1.distances_to(p) < s) & (nearest < s)
    if not np.any(mask):
        return 0.0
    return float(np.max(nearest[mask])) / s


@dataclass(frozen=True)
class ComparisonReport:
    worst_down: float       # sup f(Q) / f(q, s) over the outer window
    worst_up: float         # sup f(q, s) / f(Q) over the inner window
    n_samples: int

    def within(self, bound: float) -> bool:
        return self.worst_down <= bound and self.worst_up <= bound


def comparison_condition_check(tree: CubeTree, f, n_cubes: int = 24,
                               per_cube: int = 3, seed: int = 0,
                               floor: float = 1e-9, levels=None) -> ComparisonReport:
    """Sampled check that f(Q) compares to f(q, s) in the two scale windows
    (4 C0 l(Q), 8 C0 l(Q)] and [C0 l(Q) / 2, C0 l(Q)).

    Ratios with both sides below ``floor`` are skipped (flat regions carry
    no information); a nonzero numerator over a zero denominator reports
    as inf.  ``levels`` restricts the sampled cubes; useful because the
    outer window of a finite sample is only meaningful while 8 C0 l(Q)
    stays below the sampled diameter.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    pool = (np.asarray([cid for j in levels for cid in tree.levels[j]])
            if levels is not None else np.arange(len(tree.cubes)))
    ids = rng.choice(pool, size=min(n_cubes, pool.size), replace=False)
    c0 = tree.c0
    worst_down = 0.0
    worst_up = 0.0
    count = 0
    for cid in ids:
        cube = tree.cubes[int(cid)]
        ell = tree.side(cube.level)
        f_q = f(tree.center_point(cube), 2.0 * c0 * ell)
        members = rng.choice(cube.members, size=min(per_cube, len(cube)), replace=False)
        for m in members:
            q = tree.cloud.point(int(m))
            s_down = rng.uniform(4.0 * c0 * ell, 8.0 * c0 * ell)
            s_up = rng.uniform(0.5 * c0 * ell, c0 * ell)
            f_down = f(q, float(s_down))
            f_up = f(q, float(s_up))
            count += 1
            if f_q > floor or f_down > floor:
                worst_down = max(worst_down, np.inf if f_down <= floor else f_q / f_down)
            if f_up > floor or f_q > floor:
                worst_up = max(worst_up, np.inf if f_q <= floor else f_up / f_q)
    return ComparisonReport(float(worst_down), float(worst_up), count)
