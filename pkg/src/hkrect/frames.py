"""Splittings H^k = V_nu * L_nu, their projections, and the cone families.

A horizontal unit direction nu on the Euclidean sphere S^{2k-1} splits the
group into the vertical subgroup V_nu = R nu^perp x R and the horizontal
line L_nu = R nu x {0}.  Every point factors uniquely as p = pi_V(p) * pi_L(p)
with the explicit formulas

    pi_V(v, t) = (v - <v,nu> nu, t - w(v, <v,nu> nu) / 2),
    pi_L(v, t) = (<v,nu> nu, 0).

Three cone families around L_nu are supported:

* ``koranyi``:    lam |p| < |pi_L(p)|                 (parameter lam in (0,1))
* ``ball_union``: union of balls B(q, beta |q|), q in L_nu \\ {0}
* ``inf_norm``:   |pi_V(p)|_inf < gamma |pi_L(p)|_inf with
  |(v, t)|_inf = max(|v|, 2 sqrt|t|)
"""

from dataclasses import dataclass, field

import numpy as np

from .hgroup import (
    Point,
    distance_vt,
    koranyi_norm_vt,
    symplectic_vt,
)

__all__ = [
    "Frame",
    "ConeSpec",
    "proj_vertical",
    "proj_line",
    "line_coord",
    "cone_gauge",
    "gauge_vt",
    "cone_member",
    "ball_union_gauge",
    "cone_inclusion_search",
    "frame_isometry",
    "random_unit_points",
    "sample_ball_union_sphere",
]

_UNIT_TOL = 1e-12


def _perp_basis(nu: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis of nu^perp (columns), via a Householder
    reflection mapping e_1 to nu."""
    n = nu.size
    e1 = np.zeros(n)
    e1[0] = 1.0
    u = nu - e1
    norm = np.linalg.norm(u)
    if norm < 1e-14:
        h = np.eye(n)
    else:
        u = u / norm
        h = np.eye(n) - 2.0 * np.outer(u, u)
    # column 0 of h is e1 -> nu (up to sign conventions); the rest spans nu^perp
    basis = h[:, 1:]
    return basis


@dataclass(frozen=True)
class Frame:
    """Horizontal unit direction nu with its induced splitting."""

    nu: np.ndarray
    perp: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        nu = np.asarray(self.nu, dtype=float)
        if nu.ndim != 1 or nu.size % 2 != 0 or nu.size == 0:
            raise ValueError(f"direction must be a 2k-vector, got shape {nu.shape}")
        if abs(np.linalg.norm(nu) - 1.0) > _UNIT_TOL:
            raise ValueError(f"direction must be a unit vector, |nu| = {np.linalg.norm(nu)}")
        nu = nu.copy()
        nu.setflags(write=False)
        object.__setattr__(self, "nu", nu)
        perp = _perp_basis(nu)
        perp.setflags(write=False)
        object.__setattr__(self, "perp", perp)

    @property
    def k(self) -> int:
        return self.nu.size // 2

    def vertical_coords(self, v, t):
        """Coordinates (u in R^{2k-1}, tau) of points of V_nu."""
        v = np.asarray(v, dtype=float)
        return v @ self.perp, np.asarray(t, dtype=float)

    def vertical_point(self, u, tau):
        """Inverse of :meth:`vertical_coords`; returns coordinate arrays."""
        u = np.asarray(u, dtype=float)
        return u @ self.perp.T, np.asarray(tau, dtype=float)


@dataclass(frozen=True)
class ConeSpec:
    """A cone around L_nu: one of the families koranyi / ball_union / inf_norm."""

    family: str
    parameter: float
    frame: Frame

    def __post_init__(self):
        if self.family not in ("koranyi", "ball_union", "inf_norm"):
            raise ValueError(f"unknown cone family {self.family!r}")
        p = self.parameter
        if self.family in ("koranyi", "ball_union"):
            if not 0.0 < p < 1.0:
                raise ValueError(f"{self.family} parameter must lie in (0,1), got {p}")
        elif p <= 0.0:
            raise ValueError(f"inf_norm parameter must be positive, got {p}")


def proj_vertical_vt(frame: Frame, v, t):
    """Array form of the V_nu projection; broadcasts over leading axes."""
    v = np.asarray(v, dtype=float)
    a = v @ frame.nu
    vl = a[..., None] * frame.nu
    tv = np.asarray(t, dtype=float) - 0.5 * symplectic_vt(v, vl)
    return v - vl, tv


def proj_line_vt(frame: Frame, v, t):
    v = np.asarray(v, dtype=float)
    a = v @ frame.nu
    return a[..., None] * frame.nu, np.zeros_like(np.asarray(t, dtype=float))


def line_coord(frame: Frame, v) -> np.ndarray:
    """Signed coordinate of pi_L along nu, i.e. <v, nu>."""
    return np.asarray(v, dtype=float) @ frame.nu


def proj_vertical(frame: Frame, p: Point) -> Point:
    if p.v.size != frame.nu.size:
        raise ValueError("dimension mismatch between frame and point")
    v, t = proj_vertical_vt(frame, p.v, p.t)
    return Point(v, float(t))


def proj_line(frame: Frame, p: Point) -> Point:
    if p.v.size != frame.nu.size:
        raise ValueError("dimension mismatch between frame and point")
    v, t = proj_line_vt(frame, p.v, p.t)
    return Point(v, float(t))


def gauge_vt(frame: Frame, v, t) -> np.ndarray:
    """|pi_L(p)| / |p| for nonzero p; equals 1 exactly on L_nu \\ {0}.

    Zero points yield nan (cones live in H^k minus the origin).
    """
    v = np.asarray(v, dtype=float)
    norm = koranyi_norm_vt(v, t)
    a = np.abs(v @ frame.nu)
    with np.errstate(invalid="ignore", divide="ignore"):
        g = np.where(norm > 0.0, a / np.where(norm > 0.0, norm, 1.0), np.nan)
    return np.minimum(g, 1.0)


def cone_gauge(frame: Frame, p: Point) -> float:
    """Scalar gauge; raises on the origin where membership is undefined."""
    g = float(gauge_vt(frame, p.v, p.t))
    if np.isnan(g):
        raise ValueError("cone gauge is undefined at the origin")
    return g


def _inf_norm_vt(v, t):
    v = np.asarray(v, dtype=float)
    return np.maximum(np.linalg.norm(v, axis=-1), 2.0 * np.sqrt(np.abs(np.asarray(t, dtype=float))))


def ball_union_gauge(frame: Frame, p: Point, tol: float = 1e-9) -> float:
    """min over s != 0 of d(p, (s nu, 0)) / |s|.

    The point belongs to D_beta(nu) exactly when this value is < beta.  The
    search brackets |s| by |p| / (1 - beta_max) with beta_max -> 1 handled via
    a fixed factor, scans both sign branches on a coarse grid, and refines by
    golden-section down to an |s|-interval of ``tol``.
    """
    norm = float(koranyi_norm_vt(p.v, p.t))
    if norm == 0.0:
        raise ValueError("ball-union gauge is undefined at the origin")

    vp = p.v
    tp = p.t
    nu = frame.nu

    def ratio(s):
        s = np.asarray(s, dtype=float)
        sv = s[..., None] * nu
        return distance_vt(vp, tp, sv, np.zeros_like(s)) / np.abs(s)

    best = np.inf
    smax = 64.0 * norm  # generous bracket; members with beta<1 have |s| < |p|/(1-beta)
    for sign in (1.0, -1.0):
        grid = sign * np.geomspace(norm * 1e-3, smax, 96)
        vals = ratio(grid)
        i = int(np.argmin(vals))
        lo = grid[max(i - 1, 0)]
        hi = grid[min(i + 1, grid.size - 1)]
        if lo > hi:
            lo, hi = hi, lo
        # golden-section refinement of the bracketed minimum
        invphi = (np.sqrt(5.0) - 1.0) / 2.0
        a, b = lo, hi
        c = b - invphi * (b - a)
        d = a + invphi * (b - a)
        fc, fd = ratio(np.array([c]))[0], ratio(np.array([d]))[0]
        while abs(b - a) > tol:
            if fc < fd:
                b, d, fd = d, c, fc
                c = b - invphi * (b - a)
                fc = ratio(np.array([c]))[0]
            else:
                a, c, fc = c, d, fd
                d = a + invphi * (b - a)
                fd = ratio(np.array([d]))[0]
        best = min(best, float(vals[i]), float(fc), float(fd))
    return best


def cone_member(spec: ConeSpec, p: Point, margin: float = 1e-12) -> bool:
    """Strict membership of p in the open cone; the origin is never a member.

    The ``margin`` guards the ball_union family only, where membership is
    decided by a numerical 1-D minimization and must not flip on noise.
    """
    norm = float(koranyi_norm_vt(p.v, p.t))
    if norm == 0.0:
        return False
    frame = spec.frame
    if spec.family == "koranyi":
        return abs(float(line_coord(frame, p.v))) > spec.parameter * norm
    if spec.family == "inf_norm":
        vv, tv = proj_vertical_vt(frame, p.v, p.t)
        lv, lt = proj_line_vt(frame, p.v, p.t)
        return float(_inf_norm_vt(vv, tv)) < spec.parameter * float(_inf_norm_vt(lv, lt))
    return ball_union_gauge(frame, p) < spec.parameter - margin


def random_unit_points(k: int, n: int, rng: np.random.Generator):
    """Sample the Koranyi unit sphere by dilation-normalizing Gaussian draws."""
    v = rng.normal(size=(n, 2 * k))
    t = rng.normal(size=n)
    norm = koranyi_norm_vt(v, t)
    keep = norm > 1e-12
    v, t, norm = v[keep], t[keep], norm[keep]
    return v / norm[:, None], t / (norm * norm)


def _sample_koranyi_ball(k: int, radius: float, n: int, rng: np.random.Generator):
    """Uniform-ish draws with Koranyi norm < radius, by box rejection."""
    out_v = np.empty((0, 2 * k))
    out_t = np.empty(0)
    while out_v.shape[0] < n:
        m = max(2 * (n - out_v.shape[0]), 64)
        v = rng.uniform(-radius, radius, size=(m, 2 * k))
        t = rng.uniform(-radius * radius / 4.0, radius * radius / 4.0, size=m)
        keep = koranyi_norm_vt(v, t) < radius
        out_v = np.vstack([out_v, v[keep]])
        out_t = np.append(out_t, t[keep])
    return out_v[:n], out_t[:n]


def sample_ball_union_sphere(frame: Frame, beta: float, n: int, rng: np.random.Generator):
    """Points of D_beta(nu) on the unit sphere.

    Every unit-sphere member of D_beta is a dilate of a point of
    B((+-nu, 0), beta), so sampling those balls and renormalizing by
    dilation covers the whole trace D_beta cap S.
    """
    k = frame.k
    wv, wt = _sample_koranyi_ball(k, beta, n, rng)
    signs = rng.choice((-1.0, 1.0), size=n)
    base_v = signs[:, None] * frame.nu
    # left-translate the offsets to the poles (+-nu, 0)
    v = base_v + wv
    t = wt + 0.5 * symplectic_vt(base_v, wv)
    norm = koranyi_norm_vt(v, t)
    keep = norm > 1e-12
    v, t, norm = v[keep], t[keep], norm[keep]
    return v / norm[:, None], t / (norm * norm)


def cone_inclusion_search(
    lam: float,
    frame: Frame,
    samples: int = 100_000,
    seed: int = 0,
    grid: float = 1.0 / 512.0,
) -> float:
    """Empirical largest beta with sampled D_beta(nu) contained in the
    koranyi cone at level lam.

    Bisection over beta in (0, 1) at resolution ``grid``; feasibility of a
    candidate beta means every one of ``samples`` fresh draws of
    D_beta cap S has gauge > lam.  The returned value is revalidated on a
    triple-size fresh batch and stepped down the grid until that batch is
    clean, so it errs on the conservative side.
    """
    if not 0.0 < lam < 1.0:
        raise ValueError(f"lam must lie in (0,1), got {lam}")
    if samples < 100:
        raise ValueError(f"need at least 100 samples, got {samples}")
    root = np.random.SeedSequence([seed, samples])

    def feasible(beta: float, m: int) -> bool:
        rng = np.random.Generator(np.random.PCG64(root.spawn(1)[0]))
        v, t = sample_ball_union_sphere(frame, beta, m, rng)
        g = gauge_vt(frame, v, t)
        return bool(np.all(g > lam))

    lo, hi = 0.0, 1.0
    while hi - lo > grid:
        mid = 0.5 * (lo + hi)
        if feasible(mid, samples):
            lo = mid
        else:
            hi = mid
    # conservative revalidation on larger fresh batches
    while lo > grid and not feasible(lo, 3 * samples):
        lo -= grid
    return lo


def frame_isometry(nu_from: Frame, nu_to: Frame) -> np.ndarray:
    """Orthogonal, symplectic rho with rho(nu_from) = nu_to.

    Built by completing both directions to unitary frames under the
    identification R^{2k} ~ C^k; a unitary map is automatically orthogonal
    and symplectic, and it intertwines the two splittings.
    """
    if nu_from.nu.size != nu_to.nu.size:
        raise ValueError("frames must share dimension")
    k = nu_from.k

    def complex_basis(nu: np.ndarray) -> np.ndarray:
        z = nu[:k] + 1j * nu[k:]
        cols = [z]
        for j in range(k):
            e = np.zeros(k, dtype=complex)
            e[j] = 1.0
            for c in cols:
                e = e - np.vdot(c, e) * c
            n = np.linalg.norm(e)
            if n > 1e-7:
                cols.append(e / n)
            if len(cols) == k:
                break
        if len(cols) < k:
            raise ValueError("failed to complete a unitary frame")
        return np.stack(cols, axis=1)

    qa = complex_basis(nu_from.nu)
    qb = complex_basis(nu_to.nu)
    u = qb @ qa.conj().T
    rho = np.zeros((2 * k, 2 * k))
    rho[:k, :k] = u.real
    rho[:k, k:] = -u.imag
    rho[k:, :k] = u.imag
    rho[k:, k:] = u.real
    return rho
