"""Delimited outputs with provenance headers.

Every file starts with comment lines carrying the manifest hash and the
run parameters, so any number in any output can be traced to the exact
invocation that produced it.
"""

import hashlib
import json

__all__ = ["RunManifest", "write_beta_csv", "write_carleson_csv", "write_transfer_csv"]


_UNHASHED = {"out", "threads"}   # irrelevant to the produced numbers


def _fmt(x) -> str:
    return repr(float(x))


class RunManifest:
    """Command name plus all data-relevant parameters, canonically hashed."""

    def __init__(self, command: str, params: dict):
        self.command = command
        self.params = {str(k): params[k] for k in sorted(params) if k not in _UNHASHED}

    def canonical(self) -> str:
        return json.dumps({"command": self.command, "params": self.params},
                          sort_keys=True, separators=(",", ":"))

    @property
    def hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]

    def header_lines(self, extra: dict | None = None):
        lines = [f"manifest {self.hash}", f"command {self.command}"]
        for key, val in self.params.items():
            lines.append(f"param {key} {val}")
        for key, val in (extra or {}).items():
            lines.append(f"{key} {val}")
        return lines


def _write_csv(path, manifest: RunManifest, extra: dict, columns, rows) -> None:
    with open(path, "w") as f:
        for line in manifest.header_lines(extra):
            f.write(f"# {line}\n")
        f.write(",".join(columns) + "\n")
        for row in rows:
            f.write(",".join(str(x) for x in row) + "\n")


def write_beta_csv(path, manifest: RunManifest, tree, profile, family: str) -> None:
    """Columns: cube_id, level, center_index, scale, family, beta, plane_params, grid_error."""
    rows = []
    for cid, bv in profile:
        cube = tree.cube(cid)
        rows.append([
            cid, cube.level, cube.center_index, _fmt(bv.scale), family,
            _fmt(bv.value), bv.plane.params_str(), _fmt(bv.grid_error),
        ])
    extra = {"resolution": _fmt(tree.cloud.resolution), "c0": _fmt(tree.c0),
             "levels": f"{tree.j_min}..{tree.j_max}"}
    _write_csv(path, manifest, extra,
               ["cube_id", "level", "center_index", "scale", "family", "beta",
                "plane_params", "grid_error"], rows)


def write_carleson_csv(path, manifest: RunManifest, report) -> None:
    """Columns: epsilon, family, gamma_hat, offending_root, levels, resolution."""
    rows = []
    for row in report.rows:
        rows.append([
            _fmt(row.epsilon), row.family, _fmt(row.gamma_hat), row.offending_root,
            f"{report.j_min}..{report.j_max}", _fmt(report.resolution),
        ])
    extra = {"c0": _fmt(report.c0), "n_cubes": report.n_cubes, "n_points": report.n_points,
             "ahlfors_min": _fmt(report.ahlfors.min_ratio),
             "ahlfors_max": _fmt(report.ahlfors.max_ratio),
             "tested_radius_window": "4*resolution .. diameter/4"}
    _write_csv(path, manifest, extra,
               ["epsilon", "family", "gamma_hat", "offending_root", "levels", "resolution"],
               rows)


def write_transfer_csv(path, manifest: RunManifest, records) -> None:
    """Columns: cube_id, lhs, rhs, observed_slack, passed."""
    rows = []
    for rec in records:
        rows.append([rec.cube_id, _fmt(rec.lhs), _fmt(rec.rhs),
                     _fmt(rec.observed_slack), int(rec.passed)])
    _write_csv(path, manifest, {}, ["cube_id", "lhs", "rhs", "observed_slack", "passed"], rows)
