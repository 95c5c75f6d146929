"""Weighted point clouds approximating codimension-one subsets of H^k.

Text format (shared by every tool in this package): first line
``hk <k> <resolution>``, then one record per line holding the 2k+1
coordinates followed by the weight, space separated.  Lines starting with
``#`` are comments and are skipped on load.
"""

import io
from dataclasses import dataclass, field

import numpy as np

from .hgroup import Point, compose_vt, distance_vt, koranyi_norm_vt

__all__ = [
    "PointCloud",
    "SampleWindow",
    "load_cloud",
    "save_cloud",
    "CellIndex",
    "nearest_cross_distances",
]


@dataclass(frozen=True)
class SampleWindow:
    """The V-coordinate region a generator actually sampled.

    A finite cloud only represents its underlying set inside such windows;
    estimators that probe ambient space (the plane-side sup of the beta
    numbers) restrict attention to them.  ``anchor`` left-translates the
    window, so translated clouds keep an exact description.
    """

    frame: object            # frames.Frame
    box: np.ndarray          # (2k, 2) rows: u ranges then tau range
    anchor: Point | None = None

    def __post_init__(self):
        box = np.asarray(self.box, dtype=float)
        object.__setattr__(self, "box", box)

    def contains(self, v: np.ndarray, t: np.ndarray, margin_u: float, margin_tau: float) -> np.ndarray:
        from .frames import proj_vertical_vt

        v = np.atleast_2d(np.asarray(v, dtype=float))
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if self.anchor is not None:
            v, t = compose_vt(-self.anchor.v, -self.anchor.t, v, t)
        vv, tv = proj_vertical_vt(self.frame, v, t)
        u, tau = self.frame.vertical_coords(vv, tv)
        ok = np.ones(t.shape[0], dtype=bool)
        for i in range(u.shape[1]):
            ok &= (u[:, i] >= self.box[i, 0] - margin_u) & (u[:, i] <= self.box[i, 1] + margin_u)
        ok &= (tau >= self.box[-1, 0] - margin_tau) & (tau <= self.box[-1, 1] + margin_tau)
        return ok

    def translated(self, p: Point) -> "SampleWindow":
        if self.anchor is None:
            return SampleWindow(self.frame, self.box, p)
        av, at = compose_vt(p.v, p.t, self.anchor.v, self.anchor.t)
        return SampleWindow(self.frame, self.box, Point(av, float(at)))

    def dilated(self, s: float) -> "SampleWindow":
        box = self.box.copy()
        box[:-1] *= s
        box[-1] *= s * s
        anchor = None if self.anchor is None else Point(s * self.anchor.v, s * s * self.anchor.t)
        return SampleWindow(self.frame, box, anchor)


@dataclass
class PointCloud:
    """Finite weighted sample with a declared Koranyi net spacing.

    ``labels`` is optional per-point metadata (e.g. which synthetic piece a
    point came from); ``windows`` records the sampled V-coordinate regions.
    Both survive the text format via comment lines.
    """

    k: int
    v: np.ndarray          # (n, 2k) horizontal coordinates
    t: np.ndarray          # (n,) vertical coordinates
    w: np.ndarray          # (n,) positive weights
    resolution: float
    labels: np.ndarray | None = None
    windows: tuple = ()

    def __post_init__(self):
        self.v = np.ascontiguousarray(self.v, dtype=float)
        self.t = np.ascontiguousarray(self.t, dtype=float)
        self.w = np.ascontiguousarray(self.w, dtype=float)
        n = self.v.shape[0]
        if self.v.shape != (n, 2 * self.k):
            raise ValueError(f"v must be (n, {2 * self.k}), got {self.v.shape}")
        if self.t.shape != (n,) or self.w.shape != (n,):
            raise ValueError("t and w must be flat arrays matching v")
        if n and not np.all(self.w > 0):
            raise ValueError("weights must be strictly positive")
        if self.resolution <= 0:
            raise ValueError("resolution must be positive")

    def __len__(self) -> int:
        return self.v.shape[0]

    def point(self, i: int) -> Point:
        return Point(self.v[i], float(self.t[i]))

    def total_weight(self) -> float:
        return float(np.sum(self.w))

    def subset(self, indices) -> "PointCloud":
        idx = np.asarray(indices, dtype=np.int64)
        labels = self.labels[idx] if self.labels is not None else None
        return PointCloud(self.k, self.v[idx], self.t[idx], self.w[idx],
                          self.resolution, labels, self.windows)

    def translated(self, p: Point) -> "PointCloud":
        """Left-translate every point (and the sampled windows) by p."""
        v, t = compose_vt(p.v, p.t, self.v, self.t)
        windows = tuple(w.translated(p) for w in self.windows)
        return PointCloud(self.k, v, t, self.w.copy(), self.resolution,
                          None if self.labels is None else self.labels.copy(), windows)

    def distances_to(self, p: Point) -> np.ndarray:
        return distance_vt(self.v, self.t, p.v, p.t)

    def ball_indices(self, p: Point, r: float) -> np.ndarray:
        """Indices of cloud points in the open ball B(p, r)."""
        return np.nonzero(self.distances_to(p) < r)[0]

    def eccentricity(self, i: int = 0) -> float:
        return float(np.max(distance_vt(self.v, self.t, self.v[i], self.t[i]))) if len(self) else 0.0

    def bbox(self, margin: float = 0.0):
        """Coordinate bounding box (lo, hi) over (v..., t), inflated by margin."""
        coords = np.column_stack([self.v, self.t])
        return coords.min(axis=0) - margin, coords.max(axis=0) + margin

    def diameter_upper(self) -> float:
        """Cheap upper bound on the Koranyi diameter (twice an eccentricity)."""
        return 2.0 * self.eccentricity(0)


def save_cloud(cloud: PointCloud, path, header_comments=()) -> None:
    with open(path, "w") as f:
        write_cloud(cloud, f, header_comments)


def _fmt(x) -> str:
    """Shortest round-trip decimal of a float, free of numpy scalar wrappers."""
    return repr(float(x))


def write_cloud(cloud: PointCloud, f: io.TextIOBase, header_comments=()) -> None:
    f.write(f"hk {cloud.k} {_fmt(cloud.resolution)}\n")
    for line in header_comments:
        f.write(f"# {line}\n")
    for win in cloud.windows:
        nu = " ".join(_fmt(x) for x in win.frame.nu)
        box = " ".join(_fmt(x) for x in win.box.ravel())
        if win.anchor is None:
            anchor = "-"
        else:
            anchor = " ".join(_fmt(x) for x in win.anchor.coords())
        f.write(f"# window nu {nu} box {box} anchor {anchor}\n")
    if cloud.labels is not None:
        f.write("# labels " + " ".join(str(int(x)) for x in cloud.labels) + "\n")
    for i in range(len(cloud)):
        coords = " ".join(_fmt(x) for x in cloud.v[i])
        f.write(f"{coords} {_fmt(cloud.t[i])} {_fmt(cloud.w[i])}\n")


def load_cloud(path) -> PointCloud:
    with open(path) as f:
        return read_cloud(f)


def read_cloud(f: io.TextIOBase) -> PointCloud:
    from .frames import Frame

    header = f.readline().split()
    if len(header) != 3 or header[0] != "hk":
        raise ValueError("cloud files start with a 'hk <k> <resolution>' line")
    k = int(header[1])
    resolution = float(header[2])
    rows = []
    windows = []
    labels = None
    for line in f:
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if parts and parts[0] == "window":
                if parts[1] != "nu" or parts[2 + 2 * k] != "box" or parts[3 + 6 * k] != "anchor":
                    raise ValueError(f"malformed window comment: {line!r}")
                nu = np.array([float(x) for x in parts[2: 2 + 2 * k]])
                box = np.array([float(x) for x in parts[3 + 2 * k: 3 + 6 * k]]).reshape(2 * k, 2)
                rest = parts[4 + 6 * k:]
                anchor = None
                if rest != ["-"]:
                    vals = [float(x) for x in rest]
                    anchor = Point(np.asarray(vals[:-1]), vals[-1])
                windows.append(SampleWindow(Frame(nu), box, anchor))
            elif parts and parts[0] == "labels":
                labels = np.array([int(x) for x in parts[1:]], dtype=np.int64)
            continue
        vals = [float(x) for x in line.split()]
        if len(vals) != 2 * k + 2:
            raise ValueError(f"expected {2 * k + 2} fields per record, got {len(vals)}")
        rows.append(vals)
    arr = np.asarray(rows, dtype=float).reshape(len(rows), 2 * k + 2)
    if labels is not None and labels.size != arr.shape[0]:
        raise ValueError("labels comment does not match the record count")
    return PointCloud(k, arr[:, : 2 * k], arr[:, 2 * k], arr[:, 2 * k + 1], resolution,
                      labels, tuple(windows))


def dist4_cross(v1: np.ndarray, t1: np.ndarray, v2: np.ndarray, t2: np.ndarray) -> np.ndarray:
    """Fourth powers of Koranyi distances, (len1, len2)-shaped, lean kernel."""
    k = v1.shape[1] // 2
    dv = v2[None, :, :] - v1[:, None, :]
    om = np.einsum("qtj,qj->qt", dv[:, :, k:], v1[:, :k]) - np.einsum("qtj,qj->qt", dv[:, :, :k], v1[:, k:])
    dt = t2[None, :] - t1[:, None] - 0.5 * om
    vsq = np.einsum("qtj,qtj->qt", dv, dv)
    return vsq * vsq + 16.0 * dt * dt


class CellIndex:
    """Bucket index for Koranyi range and nearest queries on a fixed cloud.

    Points hash on their horizontal coordinates at cell size ``r``; the
    vertical key uses the column-sheared coordinate t - w(v0, v)/2 with v0
    the column center, which bounds the in-ball vertical spread by O(r^2)
    independently of the distance from the group center.  A Koranyi r-ball
    is covered by the 3x...x3 neighboring columns and, within each column,
    one sheared cell and its two vertical neighbors.
    """

    def __init__(self, v: np.ndarray, t: np.ndarray, r: float):
        self.v = np.asarray(v, dtype=float)
        self.t = np.asarray(t, dtype=float)
        self.r = float(r)
        self.k = self.v.shape[1] // 2
        # |t~(x) - t~(q)| <= r^2/4 + 1.5 sqrt(2k) r * r/2 for d(x,q) <= r
        self.tcell = (0.25 + 0.75 * np.sqrt(2 * self.k)) * self.r * self.r * 1.001
        cols = np.floor(self.v / self.r).astype(np.int64)
        centers = (cols + 0.5) * self.r
        sheared = self.t - 0.5 * self._omega(centers, self.v)
        kt = np.floor(sheared / self.tcell).astype(np.int64)
        self._cells: dict[tuple, np.ndarray] = {}
        buckets: dict[tuple, list[int]] = {}
        for i, key in enumerate(map(tuple, np.column_stack([cols, kt]))):
            buckets.setdefault(key, []).append(i)
        self._cells = {k_: np.asarray(ix, dtype=np.int64) for k_, ix in buckets.items()}
        self.dim = self.v.shape[1]

    @staticmethod
    def _omega(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        k = a.shape[-1] // 2
        return np.sum(a[..., :k] * b[..., k:] - a[..., k:] * b[..., :k], axis=-1)

    def candidates(self, vq: np.ndarray, tq: float) -> np.ndarray:
        """Indices of all points whose Koranyi distance to (vq, tq) can be <= r."""
        vq = np.asarray(vq, dtype=float)
        base = np.floor(vq / self.r).astype(np.int64)
        chunks = []
        for offset in np.ndindex(*([3] * self.dim)):
            col = base + np.asarray(offset) - 1
            center = (col + 0.5) * self.r
            sheared_q = tq - 0.5 * float(self._omega(center, vq))
            bt = int(np.floor(sheared_q / self.tcell))
            ckey = tuple(col)
            for dt in (-1, 0, 1):
                arr = self._cells.get(ckey + (bt + dt,))
                if arr is not None:
                    chunks.append(arr)
        if not chunks:
            return np.empty(0, dtype=np.int64)
        return np.concatenate(chunks)

    def within(self, vq: np.ndarray, tq: float, r: float) -> np.ndarray:
        """Indices with d(., q) < r; exact, requires r <= self.r."""
        cand = self.candidates(vq, tq)
        if cand.size == 0:
            return cand
        d4 = dist4_cross(np.asarray(vq, dtype=float)[None, :], np.atleast_1d(tq),
                         self.v[cand], self.t[cand])[0]
        return cand[d4 < r ** 4]

    def group_keys(self, vq: np.ndarray, tq: np.ndarray) -> np.ndarray:
        """Integer keys (own column, own sheared cell) for batching queries."""
        cols = np.floor(vq / self.r).astype(np.int64)
        centers = (cols + 0.5) * self.r
        sheared = tq - 0.5 * self._omega(centers, vq)
        kt = np.floor(sheared / self.tcell).astype(np.int64)
        return np.column_stack([cols, kt])

    def candidates_for_group(self, vq: np.ndarray, tq: np.ndarray) -> np.ndarray:
        """Candidates covering the r-balls of a batch of nearby queries.

        All queries must share a horizontal column; for each neighbor
        column the union of every member's sheared cell and its two
        vertical neighbors is gathered, so each member's own coverage
        guarantee holds exactly.
        """
        base = np.floor(vq[0] / self.r).astype(np.int64)
        chunks = []
        for offset in np.ndindex(*([3] * self.dim)):
            col = base + np.asarray(offset) - 1
            center = (col + 0.5) * self.r
            sheared = tq - 0.5 * self._omega(center[None, :], vq)
            cells = np.unique(np.floor(sheared / self.tcell).astype(np.int64))
            wanted = np.unique(np.concatenate([cells - 1, cells, cells + 1]))
            ckey = tuple(col)
            for bt in wanted:
                arr = self._cells.get(ckey + (int(bt),))
                if arr is not None:
                    chunks.append(arr)
        if not chunks:
            return np.empty(0, dtype=np.int64)
        return np.unique(np.concatenate(chunks))


class NearestIndex:
    """Exact Koranyi nearest-point queries via expanding cell rings.

    A stack of :class:`CellIndex` at geometrically growing radii; a query
    expands until it finds a candidate at distance <= the current radius,
    which certifies exact nearestness (points outside the covered block are
    farther than the radius).
    """

    def __init__(self, v: np.ndarray, t: np.ndarray, r0: float, levels: int = 14):
        self.v = np.asarray(v, dtype=float)
        self.t = np.asarray(t, dtype=float)
        if len(self.t) == 0:
            raise ValueError("cannot index an empty cloud")
        self.radii = [r0 * (2.0 ** i) for i in range(levels)]
        self._indexes = [None] * levels

    def _index(self, level: int) -> CellIndex:
        if self._indexes[level] is None:
            self._indexes[level] = CellIndex(self.v, self.t, self.radii[level])
        return self._indexes[level]

    def nearest_distance(self, vq: np.ndarray, tq: float) -> float:
        for level, r in enumerate(self.radii):
            cand = self._index(level).candidates(vq, tq)
            if cand.size:
                d = float(np.min(distance_vt(self.v[cand], self.t[cand], vq, tq)))
                if d <= r:
                    return d
        # fall back to a full scan for outliers beyond the largest ring
        return float(np.min(distance_vt(self.v, self.t, vq, tq)))

    def nearest_distances(self, vq: np.ndarray, tq: np.ndarray) -> np.ndarray:
        """Batched nearest distances.

        Queries are resolved ring by ring; within a ring, queries sharing a
        cell are evaluated against the candidate block in one vectorized
        pass.  A distance is final once it does not exceed the ring radius.
        """
        vq = np.atleast_2d(np.asarray(vq, dtype=float))
        tq = np.atleast_1d(np.asarray(tq, dtype=float))
        out = np.full(tq.shape[0], np.inf)
        pending = np.arange(tq.shape[0])
        for level, r in enumerate(self.radii):
            if pending.size == 0:
                return out
            index = self._index(level)
            r4 = r ** 4
            keys = index.group_keys(vq[pending], tq[pending])
            order = np.lexsort(keys.T)
            sorted_keys = keys[order]
            breaks = np.nonzero(np.any(np.diff(sorted_keys, axis=0) != 0, axis=1))[0] + 1
            starts = np.concatenate([[0], breaks, [order.size]])
            still = []
            for a, b in zip(starts[:-1], starts[1:]):
                grp = pending[order[a:b]]
                cand = index.candidates_for_group(vq[grp], tq[grp])
                if cand.size == 0:
                    still.extend(grp.tolist())
                    continue
                chunk = max(1, 2_000_000 // cand.size)
                for lo in range(0, grp.size, chunk):
                    sub = grp[lo:lo + chunk]
                    d4 = dist4_cross(vq[sub], tq[sub], self.v[cand], self.t[cand])
                    dmin4 = d4.min(axis=1)
                    done = dmin4 <= r4
                    out[sub[done]] = dmin4[done] ** 0.25
                    still.extend(sub[~done].tolist())
            pending = np.asarray(still, dtype=np.int64)
        for qi in pending:
            out[qi] = float(np.min(distance_vt(self.v, self.t, vq[qi], tq[qi])))
        return out


def nearest_cross_distances(src: PointCloud, dst: PointCloud, r0: float | None = None) -> np.ndarray:
    """Distance from every point of ``src`` to its nearest point of ``dst``."""
    if len(dst) == 0:
        raise ValueError("destination cloud is empty")
    if len(src) * len(dst) <= 4_000_000:
        out = np.empty(len(src))
        block = max(1, 4_000_000 // max(len(dst), 1))
        for lo in range(0, len(src), block):
            hi = min(lo + block, len(src))
            d = distance_vt(src.v[lo:hi, None, :], src.t[lo:hi, None],
                            dst.v[None, :, :], dst.t[None, :])
            out[lo:hi] = d.min(axis=1)
        return out
    index = NearestIndex(dst.v, dst.t, r0 or max(dst.resolution, 1e-9))
    return index.nearest_distances(src.v, src.t)
