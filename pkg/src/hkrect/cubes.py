"""Christ-David dyadic cube systems on weighted point clouds.

Construction: greedy maximal 2^j-separated nets per level, built coarse to
fine in a seed-shuffled point order with coarser net points inserted first
(so the nets are nested).  Each cloud point is assigned to its nearest net
point at the finest level, each net point to its nearest net point one
level up, ties broken by smaller net index; cubes collect members through
these links.  The three dyadic axioms then hold with a measured constant:

(i)   per level the cubes partition the cloud,
(ii)  cubes nest across levels,
(iii) each cube has an inner ball of radius 2^j / C0 (up to one net
      resolution) free of foreign points, and diameter at most C0 2^j.

Diameters are bounded by twice the center eccentricity, which is what the
measured C0 reports.
"""

from dataclasses import dataclass, field

import numpy as np

from .cloud import PointCloud
from .hgroup import distance_vt

__all__ = [
    "Cube",
    "CubeTree",
    "build_cube_tree",
    "verify_cube_axioms",
    "CubeAxiomReport",
    "cube_mass_ratio",
    "dump_tree",
    "load_tree_structure",
]


@dataclass
class Cube:
    id: int
    level: int
    center_index: int
    members: np.ndarray          # sorted cloud indices
    parent_id: int | None = None
    child_ids: list = field(default_factory=list)

    def __len__(self):
        return int(self.members.size)


@dataclass
class CubeTree:
    cloud: PointCloud
    j_min: int
    j_max: int
    cubes: list          # indexed by id
    levels: dict         # level j -> list of cube ids
    nets: dict           # level j -> array of net point cloud indices
    c0: float
    seed: int

    def cube(self, cube_id: int) -> Cube:
        if not 0 <= cube_id < len(self.cubes):
            raise KeyError(f"unknown cube id {cube_id}")
        return self.cubes[cube_id]

    def cubes_at(self, j: int):
        return [self.cubes[i] for i in self.levels[j]]

    def side(self, j: int) -> float:
        return 2.0 ** j

    def cube_measure(self, cube: Cube) -> float:
        """|Q| = 2^(j (2k+1)), the dyadic surrogate measure."""
        return 2.0 ** (cube.level * (2 * self.cloud.k + 1))

    def cube_weight(self, cube: Cube) -> float:
        return float(np.sum(self.cloud.w[cube.members]))

    def center_point(self, cube: Cube):
        return self.cloud.point(cube.center_index)

    def roots(self):
        return [c for c in self.cubes if c.parent_id is None]

    def descendants(self, cube_id: int):
        """Ids of all cubes contained in the given cube (itself included)."""
        out = []
        stack = [cube_id]
        while stack:
            cid = stack.pop()
            out.append(cid)
            stack.extend(self.cubes[cid].child_ids)
        return out


def _packed_cells(cloud: PointCloud, r: float):
    """Collision-free int cell keys at scale r plus the neighbor-key deltas.

    Horizontal cells have size r; the vertical cell size r^2/4 + vmax r/2
    accounts for the group twist, so any Koranyi r-ball around a point is
    covered by the 3x...x3 block of neighboring cells.
    """
    vmax = float(np.max(np.linalg.norm(cloud.v, axis=1))) if len(cloud) else 0.0
    tcell = r * r / 4.0 + vmax * r / 2.0
    keys = np.column_stack([
        np.floor(cloud.v / r).astype(np.int64),
        np.floor(cloud.t / tcell).astype(np.int64),
    ])
    keys -= keys.min(axis=0) - 1          # shift into [1, extent+1)
    extents = keys.max(axis=0) + 2
    strides = np.ones(keys.shape[1], dtype=np.int64)
    for i in range(keys.shape[1] - 2, -1, -1):
        strides[i] = strides[i + 1] * extents[i + 1]
    packed = keys @ strides
    dim = keys.shape[1]
    grids = np.meshgrid(*([np.array([-1, 0, 1])] * dim), indexing="ij")
    offsets = np.stack([g.ravel() for g in grids], axis=1)
    deltas = offsets @ strides
    return packed, deltas


def _group_by_key(packed: np.ndarray, subset: np.ndarray | None = None) -> dict:
    """Map packed key -> array of (subset) indices holding that key."""
    idx = np.arange(packed.size) if subset is None else np.asarray(subset, dtype=np.int64)
    vals = packed[idx]
    order = np.argsort(vals, kind="stable")
    sv = vals[order]
    breaks = np.nonzero(np.diff(sv) != 0)[0] + 1
    starts = np.concatenate([[0], breaks, [sv.size]])
    return {int(sv[a]): idx[order[a:b]] for a, b in zip(starts[:-1], starts[1:])}


def _dist4(cv: np.ndarray, ct: np.ndarray, i: int, idx: np.ndarray) -> np.ndarray:
    """Fourth powers of Koranyi distances from point i to points idx."""
    k = cv.shape[1] // 2
    vi = cv[i]
    dv = cv[idx] - vi
    om = dv[:, k:] @ vi[:k] - dv[:, :k] @ vi[k:]
    dt = ct[idx] - ct[i] - 0.5 * om
    vsq = np.einsum("ij,ij->i", dv, dv)
    return vsq * vsq + 16.0 * dt * dt


def _dist4_batch(cv: np.ndarray, ct: np.ndarray, qidx: np.ndarray, tidx: np.ndarray) -> np.ndarray:
    """d^4 from each query point to each target point, (q, t)-shaped."""
    k = cv.shape[1] // 2
    vq = cv[qidx]
    dv = cv[tidx][None, :, :] - vq[:, None, :]
    om = np.einsum("qtj,qj->qt", dv[:, :, k:], vq[:, :k]) - np.einsum("qtj,qj->qt", dv[:, :, :k], vq[:, k:])
    dt = ct[tidx][None, :] - ct[qidx][:, None] - 0.5 * om
    vsq = np.einsum("qtj,qtj->qt", dv, dv)
    return vsq * vsq + 16.0 * dt * dt


def _greedy_net(cloud: PointCloud, r: float, order: np.ndarray, seeds: np.ndarray) -> np.ndarray:
    """Greedy maximal r-separated net over ``order``; ``seeds`` go first."""
    packed, deltas = _packed_cells(cloud, r)
    keys = packed.tolist()
    deltas = [int(d) for d in deltas]
    cells: dict[int, list] = {}
    accepted: list[int] = []
    cv, ct = cloud.v, cloud.t
    r4 = r ** 4

    def try_insert(i: int) -> None:
        base = keys[i]
        cand: list[int] = []
        for off in deltas:
            arr = cells.get(base + off)
            if arr:
                cand.extend(arr)
        if cand:
            d4 = _dist4(cv, ct, i, np.asarray(cand, dtype=np.int64))
            if np.any(d4 < r4):
                return
        cells.setdefault(base, []).append(i)
        accepted.append(i)

    for i in seeds:
        try_insert(int(i))
    for i in order:
        try_insert(int(i))
    return np.asarray(accepted, dtype=np.int64)


def _assign_nearest(cloud: PointCloud, query_idx: np.ndarray, net_idx: np.ndarray, r: float) -> np.ndarray:
    """Index into ``net_idx`` of the nearest net point for each query point.

    Maximality of the net guarantees a candidate within r; ties break to
    the smaller net index (net points are kept in acceptance order).
    """
    packed, deltas = _packed_cells(cloud, r)
    net_cells = _group_by_key(packed, net_idx)
    net_pos: dict[int, np.ndarray] = {}
    pos_of = {int(i): p for p, i in enumerate(net_idx)}
    for key, arr in net_cells.items():
        net_pos[key] = np.asarray(sorted(pos_of[int(i)] for i in arr), dtype=np.int64)

    out = np.full(query_idx.size, -1, dtype=np.int64)
    groups = _group_by_key(packed, query_idx)
    row_of = {int(i): p for p, i in enumerate(query_idx)}
    for key, qi in groups.items():
        cand_list = [net_pos[key + int(off)] for off in deltas if key + int(off) in net_pos]
        if not cand_list:
            raise RuntimeError("net is not maximal: query point has no candidate within r")
        cand = np.sort(np.concatenate(cand_list))
        d4 = _dist4_batch(cloud.v, cloud.t, qi, net_idx[cand])
        first = np.argmin(d4, axis=1)   # first minimum = smallest net index among ties
        rows = np.asarray([row_of[int(i)] for i in qi], dtype=np.int64)
        out[rows] = cand[first]
    if np.any(out < 0):
        raise RuntimeError("assignment failed")
    return out


def _anchor_candidates(cloud: PointCloud, cube: Cube, extra: int = 6) -> np.ndarray:
    """Members at which the inner ball of the cube may be centered.

    The dyadic axiom only asks for some ball centered on Q, so besides the
    designated net point we try the member nearest the member centroid and
    a deterministic spread of further members.
    """
    cand = [cube.center_index]
    m = cube.members
    if m.size > 1:
        cv = cloud.v[m].mean(axis=0)
        ct = cloud.t[m].mean()
        d4 = dist4_to_point(cloud, m, cv, ct)
        cand.append(int(m[int(np.argmin(d4))]))
        stride = max(1, m.size // extra)
        cand.extend(int(x) for x in m[::stride][:extra])
    return np.unique(np.asarray(cand, dtype=np.int64))


def dist4_to_point(cloud: PointCloud, idx: np.ndarray, vq: np.ndarray, tq: float) -> np.ndarray:
    k = cloud.k
    dv = cloud.v[idx] - vq
    om = dv[:, k:] @ vq[:k] - dv[:, :k] @ vq[k:]
    dt = cloud.t[idx] - tq - 0.5 * om
    vsq = np.einsum("ij,ij->i", dv, dv)
    return vsq * vsq + 16.0 * dt * dt


def _cube_geometry(tree: "CubeTree"):
    """Per-cube eccentricity and inner-ball radius, plus measured C0.

    The inner radius is the best foreign clearance over the anchor
    candidates: the axiom requires a ball centered somewhere on Q, not
    necessarily at the designated net point.
    """
    cloud = tree.cloud
    ecc = np.zeros(len(tree.cubes))
    inner = np.full(len(tree.cubes), np.inf)
    c0 = 1.0
    for j, ids in tree.levels.items():
        r = tree.side(j)
        owner = np.empty(len(cloud), dtype=np.int64)
        for cid in ids:
            owner[tree.cubes[cid].members] = cid
        packed, deltas = _packed_cells(cloud, r)
        cells = _group_by_key(packed)
        for cid in ids:
            cube = tree.cubes[cid]
            d4 = _dist4(cloud.v, cloud.t, cube.center_index, cube.members)
            ecc[cid] = float(np.max(d4)) ** 0.25 if d4.size else 0.0
            best = 0.0
            for anchor in _anchor_candidates(cloud, cube):
                base = int(packed[anchor])
                cand_list = [cells[base + int(off)] for off in deltas if base + int(off) in cells]
                cand = np.concatenate(cand_list)
                foreign = cand[owner[cand] != cid]
                if foreign.size == 0:
                    best = r            # nothing foreign within a full cell block
                else:
                    clearance = float(np.min(_dist4(cloud.v, cloud.t, int(anchor), foreign))) ** 0.25
                    best = max(best, min(clearance, r))
                if best >= r:
                    break
            inner[cid] = best
            c0 = max(c0, 2.0 * ecc[cid] / r, r / (inner[cid] + cloud.resolution))
    return ecc, inner, c0


def build_cube_tree(cloud: PointCloud, j_min: int, j_max: int, seed: int = 0) -> CubeTree:
    """Dyadic cube system over levels j_min..j_max (net scale 2^j)."""
    if len(cloud) == 0:
        raise ValueError("cloud is empty")
    if j_min > j_max:
        raise ValueError(f"inverted level range [{j_min}, {j_max}]")
    if 2.0 ** j_min < cloud.resolution:
        raise ValueError(f"2^j_min = {2.0 ** j_min} is below the cloud resolution {cloud.resolution}")
    if 2.0 ** j_max < cloud.eccentricity(0):
        raise ValueError("2^j_max must reach the cloud diameter scale")

    rng = np.random.Generator(np.random.PCG64(seed))
    order = rng.permutation(len(cloud))
    nets: dict[int, np.ndarray] = {}
    # The net hierarchy always grows from the canonical finest scale (one
    # step above the resolution), each coarser net greedily thinning the
    # previous one.  Trees over the same cloud and seed therefore share
    # their nets at every common level regardless of the requested range:
    # refining a tree reveals a deeper level of the same system instead of
    # rebuilding a different one.
    j_base = min(j_min, int(np.ceil(np.log2(cloud.resolution))))
    nets[j_base] = _greedy_net(cloud, 2.0 ** j_base, order, np.empty(0, dtype=np.int64))
    for j in range(j_base + 1, j_max + 1):
        nets[j] = _greedy_net(cloud, 2.0 ** j, nets[j - 1], np.empty(0, dtype=np.int64))

    # links: cloud -> finest requested net, net(j) -> net(j+1); the thinned
    # net covers the cloud within twice its scale, hence the wider ring
    finest = _assign_nearest(cloud, np.arange(len(cloud)), nets[j_min], 2.0 ** (j_min + 1))
    up: dict[int, np.ndarray] = {}
    for j in range(j_min, j_max):
        up[j] = _assign_nearest(cloud, nets[j], nets[j + 1], 2.0 ** (j + 1))

    tree = CubeTree(cloud, j_min, j_max, [], {}, nets, 1.0, seed)
    # build cubes fine -> coarse
    prev_ids: list[int] = []
    membership = finest
    for j in range(j_min, j_max + 1):
        ids = []
        net = nets[j]
        groups: dict[int, list] = {pos: [] for pos in range(net.size)}
        if j == j_min:
            for i, pos in enumerate(membership):
                groups[int(pos)].append(i)
            members_of = {pos: np.asarray(sorted(g), dtype=np.int64) for pos, g in groups.items()}
            children_of = {pos: [] for pos in range(net.size)}
        else:
            link = up[j - 1]
            children_of = {pos: [] for pos in range(net.size)}
            for child_pos, parent_pos in enumerate(link):
                children_of[int(parent_pos)].append(prev_ids[child_pos])
            members_of = {}
            for pos in range(net.size):
                arrs = [tree.cubes[cid].members for cid in children_of[pos]]
                members_of[pos] = np.sort(np.concatenate(arrs)) if arrs else np.empty(0, dtype=np.int64)
        new_ids = []
        for pos in range(net.size):
            cid = len(tree.cubes)
            cube = Cube(cid, j, int(net[pos]), members_of[pos], None, children_of[pos])
            for ch in children_of[pos]:
                tree.cubes[ch].parent_id = cid
            tree.cubes.append(cube)
            ids.append(cid)
            new_ids.append(cid)
        tree.levels[j] = ids
        prev_ids = new_ids

    _, _, c0 = _cube_geometry(tree)
    tree.c0 = c0
    return tree


@dataclass(frozen=True)
class CubeAxiomReport:
    axiom_i: bool
    axiom_ii: bool
    axiom_iii: bool
    measured_c0: float
    failures: tuple = ()

    @property
    def all_pass(self) -> bool:
        return self.axiom_i and self.axiom_ii and self.axiom_iii


def verify_cube_axioms(tree: CubeTree, c0: float | None = None) -> CubeAxiomReport:
    """Recheck the three dyadic axioms from scratch against a claimed C0.

    Axiom (iii) allows the inner ball to shrink by one net resolution, per
    the discrete reading of the cube definition.
    """
    cloud = tree.cloud
    n = len(cloud)
    c0 = tree.c0 if c0 is None else c0
    failures = []

    axiom_i = True
    for j, ids in tree.levels.items():
        concat = np.concatenate([tree.cubes[i].members for i in ids]) if ids else np.empty(0, dtype=np.int64)
        if concat.size != n or not np.array_equal(np.sort(concat), np.arange(n)):
            axiom_i = False
            failures.append(f"level {j}: members do not partition the cloud")

    axiom_ii = True
    for cube in tree.cubes:
        if cube.parent_id is None:
            continue
        parent = tree.cubes[cube.parent_id]
        pos = np.searchsorted(parent.members, cube.members)
        ok = np.all(pos < parent.members.size) and np.array_equal(parent.members[np.minimum(pos, parent.members.size - 1)], cube.members)
        if not ok:
            axiom_ii = False
            failures.append(f"cube {cube.id}: members not contained in parent {parent.id}")

    ecc, inner, measured = _cube_geometry(tree)
    axiom_iii = True
    for cube in tree.cubes:
        r = tree.side(cube.level)
        if 2.0 * ecc[cube.id] > c0 * r * (1 + 1e-12):
            axiom_iii = False
            failures.append(f"cube {cube.id}: diameter bound exceeds C0 2^j")
        required = r / c0 - cloud.resolution
        if inner[cube.id] < required - 1e-12:
            axiom_iii = False
            failures.append(f"cube {cube.id}: foreign point inside the inner ball")

    return CubeAxiomReport(axiom_i, axiom_ii, axiom_iii, measured, tuple(failures[:20]))


def cube_mass_ratio(tree: CubeTree, cube: Cube) -> float:
    """Weight of the cube's members against |Q| = 2^(j(2k+1))."""
    if not (0 <= cube.id < len(tree.cubes)) or tree.cubes[cube.id] is not cube:
        raise KeyError(f"cube {cube.id} does not belong to this tree")
    return tree.cube_weight(cube) / tree.cube_measure(cube)


def dump_tree(tree: CubeTree, path) -> None:
    """Line-oriented dump: ``cube <id> <level> <parent_id|-> <center_index> <member_count>``."""
    with open(path, "w") as f:
        f.write(f"# cubetree jmin {tree.j_min} jmax {tree.j_max} c0 {float(tree.c0)!r} seed {tree.seed}\n")
        for cube in tree.cubes:
            parent = "-" if cube.parent_id is None else str(cube.parent_id)
            f.write(f"cube {cube.id} {cube.level} {parent} {cube.center_index} {len(cube)}\n")


def load_tree_structure(path):
    """Parse a dump back into plain records (topology only, no members)."""
    rows = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if parts[0] != "cube" or len(parts) != 6:
                raise ValueError(f"bad cube record: {line!r}")
            rows.append({
                "id": int(parts[1]),
                "level": int(parts[2]),
                "parent_id": None if parts[3] == "-" else int(parts[3]),
                "center_index": int(parts[4]),
                "member_count": int(parts[5]),
            })
    return rows
