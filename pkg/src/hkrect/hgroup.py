"""Heisenberg group arithmetic with the Koranyi gauge.

The group H^k is R^{2k} x R with the twisted product

    (v, t) * (v', t') = (v + v', t + t' + w(v, v') / 2),

where w is the standard symplectic form on R^{2k}.  The Koranyi norm
``(|v|^4 + 16 t^2)^(1/4)`` is one-homogeneous under the dilations
``(v, t) -> (s v, s^2 t)`` and induces a left-invariant metric.

Scalar operations act on :class:`Point`; the ``*_vt`` kernels act on
coordinate arrays shaped ``(..., 2k)`` / ``(...,)`` and broadcast, which is
what every cloud-scale computation in this package uses.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "GroupDim",
    "Point",
    "compose",
    "invert",
    "dilate",
    "symplectic",
    "koranyi_norm",
    "distance",
    "horizontal_isometry",
    "compose_vt",
    "invert_vt",
    "dilate_vt",
    "symplectic_vt",
    "koranyi_norm_vt",
    "distance_vt",
]

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class GroupDim:
    """Number of symplectic pairs; the ambient group is R^{2k} x R."""

    k: int

    def __post_init__(self):
        if self.k < 1 or int(self.k) != self.k:
            raise ValueError(f"k must be a positive integer, got {self.k}")

    @property
    def horizontal_dim(self) -> int:
        return 2 * self.k

    @property
    def homogeneous_codim1(self) -> int:
        """Exponent 2k+1 used for codimension-one measures."""
        return 2 * self.k + 1

    def origin(self) -> "Point":
        return Point(np.zeros(2 * self.k), 0.0)

    def point(self, v, t) -> "Point":
        p = Point(np.asarray(v, dtype=float), float(t))
        if p.v.shape != (2 * self.k,):
            raise ValueError(
                f"horizontal component must have length {2 * self.k}, got {p.v.shape}"
            )
        return p

    def random_points(self, n: int, rng: np.random.Generator, spread: float = 1.0):
        """Gaussian sample of points: v ~ N(0, spread^2), t ~ N(0, spread^4)."""
        v = rng.normal(0.0, spread, size=(n, 2 * self.k))
        t = rng.normal(0.0, spread * spread, size=n)
        return v, t


@dataclass(frozen=True)
class Point:
    """Immutable element (v, t) of H^k, v in R^{2k}, t in R."""

    v: np.ndarray
    t: float

    def __post_init__(self):
        v = np.asarray(self.v, dtype=float)
        if v.ndim != 1 or v.size % 2 != 0 or v.size == 0:
            raise ValueError(f"horizontal component must be a 2k-vector, got shape {v.shape}")
        if not (np.all(np.isfinite(v)) and np.isfinite(self.t)):
            raise ValueError("point coordinates must be finite")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "t", float(self.t))

    @property
    def k(self) -> int:
        return self.v.size // 2

    def coords(self) -> np.ndarray:
        """Flat coordinates (v_1, ..., v_2k, t)."""
        return np.append(self.v, self.t)

    def __repr__(self):
        return f"Point(v={self.v.tolist()}, t={self.t})"


def _check_same_dim(p: Point, q: Point):
    if p.v.size != q.v.size:
        raise ValueError(f"dimension mismatch: 2k={p.v.size} vs 2k={q.v.size}")


def symplectic_vt(v: np.ndarray, w: np.ndarray) -> np.ndarray:
    """w(v, w) = sum_j v_j w_{j+k} - v_{j+k} w_j, broadcasting over leading axes."""
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    if v.shape[-1] != w.shape[-1]:
        raise ValueError(f"length mismatch: {v.shape[-1]} vs {w.shape[-1]}")
    k = v.shape[-1] // 2
    if 2 * k != v.shape[-1]:
        raise ValueError(f"vectors must have even length, got {v.shape[-1]}")
    return np.sum(v[..., :k] * w[..., k:] - v[..., k:] * w[..., :k], axis=-1)


def compose_vt(v1, t1, v2, t2):
    """Group product in coordinates; broadcasts."""
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    return v1 + v2, np.asarray(t1) + np.asarray(t2) + 0.5 * symplectic_vt(v1, v2)


def invert_vt(v, t):
    return -np.asarray(v, dtype=float), -np.asarray(t, dtype=float)


def dilate_vt(s, v, t):
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0):
        raise ValueError("dilation factor must be positive")
    sv = s[..., None] if s.ndim else s
    return sv * np.asarray(v, dtype=float), (s * s) * np.asarray(t, dtype=float)


def koranyi_norm_vt(v, t):
    """(|v|^4 + 16 t^2)^(1/4), broadcasting."""
    v = np.asarray(v, dtype=float)
    t = np.asarray(t, dtype=float)
    vsq = np.sum(v * v, axis=-1)
    return (vsq * vsq + 16.0 * t * t) ** 0.25


def distance_vt(v1, t1, v2, t2):
    """Koranyi distance d(p, q) = |q^{-1} p| in coordinates; broadcasts."""
    dv = np.asarray(v1, dtype=float) - np.asarray(v2, dtype=float)
    # t of q^{-1} p is t1 - t2 - w(v2, v1)/2
    dt = np.asarray(t1) - np.asarray(t2) - 0.5 * symplectic_vt(np.asarray(v2, dtype=float), np.asarray(v1, dtype=float))
    return koranyi_norm_vt(dv, dt)


def compose(p: Point, q: Point) -> Point:
    """Group product p * q."""
    _check_same_dim(p, q)
    v, t = compose_vt(p.v, p.t, q.v, q.t)
    return Point(v, float(t))


def invert(p: Point) -> Point:
    """Group inverse (-v, -t)."""
    return Point(-p.v, -p.t)


def dilate(s: float, p: Point) -> Point:
    """Dilation (s v, s^2 t); a group automorphism for every s > 0."""
    if s <= 0:
        raise ValueError(f"dilation factor must be positive, got {s}")
    return Point(s * p.v, s * s * p.t)


def symplectic(v, w) -> float:
    return float(symplectic_vt(np.atleast_1d(v), np.atleast_1d(w)))


def koranyi_norm(p: Point) -> float:
    return float(koranyi_norm_vt(p.v, p.t))


def distance(p: Point, q: Point) -> float:
    """d(p, q) = |q^{-1} * p|: symmetric, left-invariant, one-homogeneous."""
    _check_same_dim(p, q)
    return float(distance_vt(p.v, p.t, q.v, q.t))


def is_horizontal_isometry(rho: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    """True when rho preserves the Euclidean scalar product and the symplectic form."""
    rho = np.asarray(rho, dtype=float)
    n = rho.shape[0]
    if rho.shape != (n, n) or n % 2 != 0:
        return False
    if not np.allclose(rho.T @ rho, np.eye(n), atol=tol, rtol=0.0):
        return False
    k = n // 2
    jmat = np.zeros((n, n))
    jmat[:k, k:] = np.eye(k)
    jmat[k:, :k] = -np.eye(k)
    return bool(np.allclose(rho.T @ jmat @ rho, jmat, atol=tol, rtol=0.0))


def horizontal_isometry(rho: np.ndarray, p: Point, tol: float = DEFAULT_TOL) -> Point:
    """Apply (v, t) -> (rho v, t) for an orthogonal, symplectic rho.

    Such maps are group homomorphisms and Koranyi isometries; the
    preservation properties are checked up to ``tol`` before applying.
    """
    rho = np.asarray(rho, dtype=float)
    if rho.shape != (p.v.size, p.v.size):
        raise ValueError(f"matrix shape {rho.shape} does not match 2k={p.v.size}")
    if not is_horizontal_isometry(rho, tol):
        raise ValueError("matrix does not preserve the scalar product and symplectic form")
    return Point(rho @ p.v, p.t)
