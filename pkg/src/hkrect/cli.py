"""Command-line front end: reproducible generation, computation, reports.

Usage: ``hkrect <command> [key=value ...]`` with commands

* ``gen``      write a synthetic point cloud (graph, plane, or big-piece union)
* ``cubes``    build, dump and verify a dyadic cube tree
* ``beta``     per-cube flatness profile as CSV
* ``carleson`` packing-ratio report as CSV
* ``transfer`` per-cube two-set comparison table
* ``report``   full packing report with figures alongside the CSV
* ``check``    run the built-in invariant suites (exit 1 on failure)

Flags may be spelled ``key=value`` or ``--key value``.  A JSON manifest
given as ``manifest=FILE`` overrides everything else; identical manifests
produce byte-identical outputs.
"""

import json
import sys
from pathlib import Path

import numpy as np

from .reports import RunManifest, write_beta_csv, write_carleson_csv, write_transfer_csv

COMMANDS = ("gen", "cubes", "beta", "carleson", "transfer", "report", "check")


class UsageError(Exception):
    pass


def _parse_args(argv):
    if not argv:
        raise UsageError("missing command")
    command = argv[0]
    if command in ("-h", "--help", "help"):
        print(__doc__)
        return None, None
    if command not in COMMANDS:
        raise UsageError(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")
    params = {}
    tokens = list(argv[1:])
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok in ("-h", "--help"):
            print(__doc__)
            return None, None
        if "=" in tok:
            key, val = tok.lstrip("-").split("=", 1)
            params[key] = val
        elif tok.startswith("--"):
            key = tok[2:]
            if i + 1 < len(tokens) and "=" not in tokens[i + 1] and not tokens[i + 1].startswith("--"):
                params[key] = tokens[i + 1]
                i += 1
            else:
                params[key] = "1"
        else:
            raise UsageError(f"cannot parse argument {tok!r}")
        i += 1
    if "manifest" in params:
        path = params.pop("manifest")
        with open(path) as f:
            overrides = json.load(f)
        if "command" in overrides and overrides["command"] != command:
            raise UsageError("manifest command does not match the invocation")
        params.update({k: v for k, v in overrides.items() if k != "command"})
    return command, params


def _get(params, key, default=None, cast=str):
    if key not in params:
        if default is None:
            raise UsageError(f"missing required parameter {key!r}")
        return default
    return cast(params[key])


def _parse_box(text: str, k: int) -> np.ndarray:
    rows = []
    for chunk in text.split(","):
        lo, hi = chunk.split(":")
        rows.append((float(lo), float(hi)))
    if len(rows) != 2 * k:
        raise UsageError(f"box needs {2 * k} lo:hi ranges for k={k}")
    return np.asarray(rows)


def _parse_nu(text: str) -> np.ndarray:
    nu = np.array([float(x) for x in text.split(",")])
    return nu / np.linalg.norm(nu)


def _default_box(k: int, usize: float, tsize: float) -> np.ndarray:
    rows = [(-usize / 2, usize / 2)] * (2 * k - 1) + [(-tsize / 2, tsize / 2)]
    return np.asarray(rows)


def cmd_gen(params) -> int:
    from .cloud import save_cloud
    from .frames import Frame
    from .graphs import make_bump_graph, vertical_plane_cloud
    from .pipeline import BPiLGSpec, PieceRecipe, synth_bpilg_set

    kind = _get(params, "kind", "graph")
    k = _get(params, "k", 1, int)
    delta = _get(params, "delta", 0.05, float)
    seed = _get(params, "seed", 0, int)
    out = _get(params, "out", "cloud.txt")
    lam = _get(params, "lambda", 0.5, float)
    nu = _parse_nu(_get(params, "nu", ",".join(["1"] + ["0"] * (2 * k - 1))))
    frame = Frame(nu)
    box = (_parse_box(params["box"], k) if "box" in params
           else _default_box(k, _get(params, "usize", 1.28, float), _get(params, "tsize", 0.064, float)))
    if kind == "graph":
        _, cloud = make_bump_graph(frame, lam, box, delta, seed,
                                   n_bumps=_get(params, "nbumps", 5, int),
                                   amplitude=_get(params, "amplitude", 0.3, float))
    elif kind == "plane":
        cloud = vertical_plane_cloud(frame, box, delta, seed,
                                     _get(params, "offset", 0.0, float))
    elif kind == "bpilg":
        theta = _get(params, "theta", 0.05, float)
        n_pieces = _get(params, "pieces", 2, int)
        recipes = []
        for i in range(n_pieces):
            ang = np.pi * i / max(2 * n_pieces - 1, 1) / 4.0
            rot = np.eye(2 * k)
            if k == 1:
                rot = np.array([[np.cos(ang), -np.sin(ang)], [np.sin(ang), np.cos(ang)]])
            recipes.append(PieceRecipe(Frame(rot @ nu), box,
                                       amplitude=_get(params, "amplitude", 0.25, float),
                                       n_bumps=_get(params, "nbumps", 4, int)))
        contamination = None
        if _get(params, "contamination", 0, int):
            contamination = PieceRecipe(frame, box * 0.5, kind="plane",
                                        plane_offset=_get(params, "contamination_offset", 0.3, float))
        spec = BPiLGSpec(lam, theta, tuple(recipes), contamination)
        cloud = synth_bpilg_set(spec, delta, seed)
    else:
        raise UsageError(f"unknown generation kind {kind!r}")
    manifest = RunManifest("gen", params)
    save_cloud(cloud, out, header_comments=[f"manifest {manifest.hash}"])
    print(f"wrote {out}: {len(cloud)} points at resolution {cloud.resolution}")
    return 0


def _load_cloud(params):
    from .cloud import load_cloud

    path = _get(params, "in")
    return load_cloud(path)


def _tree_for(params, cloud, seed):
    from .cubes import build_cube_tree

    ecc = cloud.eccentricity(0)
    j_max = _get(params, "jmax", int(np.ceil(np.log2(max(ecc, 2 * cloud.resolution)))), int)
    j_min = _get(params, "jmin", max(int(np.ceil(np.log2(2 * cloud.resolution))), j_max - 4), int)
    return build_cube_tree(cloud, j_min, j_max, seed)


def cmd_cubes(params) -> int:
    from .cubes import dump_tree, verify_cube_axioms

    cloud = _load_cloud(params)
    seed = _get(params, "seed", 0, int)
    tree = _tree_for(params, cloud, seed)
    out = _get(params, "out", "tree.txt")
    dump_tree(tree, out)
    rep = verify_cube_axioms(tree)
    print(f"wrote {out}: {len(tree.cubes)} cubes, levels {tree.j_min}..{tree.j_max}, "
          f"C0 {tree.c0:.4g}")
    print(f"axioms: partition {rep.axiom_i} nesting {rep.axiom_ii} geometry {rep.axiom_iii}")
    if not rep.all_pass:
        for msg in rep.failures[:10]:
            print(f"  {msg}")
        return 1
    return 0


def _budget(params):
    from .beta import DEFAULT_BUDGET, SWEEP_BUDGET

    name = _get(params, "budget", "sweep")
    if name == "sweep":
        return SWEEP_BUDGET
    if name == "default":
        return DEFAULT_BUDGET
    raise UsageError(f"unknown budget {name!r}")


def cmd_beta(params) -> int:
    from .beta import beta_profile

    cloud = _load_cloud(params)
    seed = _get(params, "seed", 0, int)
    family = _get(params, "family", "vertical")
    threads = _get(params, "threads", 1, int)
    tree = _tree_for(params, cloud, seed)
    profile = beta_profile(tree, family, _budget(params), threads=threads)
    out = _get(params, "out", "beta.csv")
    write_beta_csv(out, RunManifest("beta", params), tree, profile, family)
    print(f"wrote {out}: {len(profile)} cube evaluations")
    return 0


def _report(params, command):
    from .pipeline import bwgl_report

    cloud = _load_cloud(params)
    eps = [float(x) for x in _get(params, "epsilons", "0.1,0.2,0.4").split(",")]
    seed = _get(params, "seed", 0, int)
    family = _get(params, "family", "vertical")
    threads = _get(params, "threads", 1, int)
    kwargs = {}
    if "jmin" in params:
        kwargs["j_min"] = int(params["jmin"])
    if "jmax" in params:
        kwargs["j_max"] = int(params["jmax"])
    rep = bwgl_report(cloud, eps, family, _budget(params), seed=seed, threads=threads, **kwargs)
    return cloud, rep


def cmd_carleson(params) -> int:
    cloud, rep = _report(params, "carleson")
    out = _get(params, "out", "carleson.csv")
    write_carleson_csv(out, RunManifest("carleson", params), rep)
    print(f"wrote {out}")
    for row in rep.rows:
        print(f"  epsilon {row.epsilon}: gamma_hat {row.gamma_hat:.4g} ({row.n_bad} bad cubes)")
    return 0


def cmd_report(params) -> int:
    from . import figures

    cloud, rep = _report(params, "report")
    out = _get(params, "out", "report.csv")
    manifest = RunManifest("report", params)
    write_carleson_csv(out, manifest, rep)
    print(f"wrote {out}")
    for row in rep.rows:
        print(f"  epsilon {row.epsilon}: gamma_hat {row.gamma_hat:.4g} ({row.n_bad} bad cubes)")
    if _get(params, "figures", 1, int):
        stem = Path(out).with_suffix("")
        print(f"wrote {figures.save_gamma_curve(rep, f'{stem}_gamma.png')}")
        print(f"wrote {figures.save_beta_histogram(rep.profile, f'{stem}_beta.png')}")
        print(f"wrote {figures.save_cloud_projection(cloud, f'{stem}_cloud.png')}")
    return 0


def cmd_transfer(params) -> int:
    from .carleson import i_functional
    from .cloud import load_cloud, nearest_cross_distances
    from .pipeline import transfer_inequality_check

    e = _load_cloud(params)
    etilde = load_cloud(_get(params, "companion"))
    seed = _get(params, "seed", 0, int)
    family = _get(params, "family", "vertical")
    n_cubes = _get(params, "cubes", 50, int)
    tree = _tree_for(params, e, seed)
    nearest_fwd = nearest_cross_distances(e, etilde)
    nearest_bwd = nearest_cross_distances(etilde, e)
    shared = np.nonzero(nearest_fwd <= e.resolution)[0]
    if shared.size == 0:
        raise UsageError("the two clouds share no points within one resolution")
    rng = np.random.Generator(np.random.PCG64(seed))
    records = []
    for cube in rng.permutation(tree.cubes).tolist():
        hits = np.intersect1d(cube.members, shared)
        if hits.size == 0:
            continue
        p = e.point(int(hits[0]))
        records.append(transfer_inequality_check(
            e, etilde, tree, cube, p, family, _budget(params),
            nearest_fwd=nearest_fwd, nearest_bwd=nearest_bwd))
        if len(records) >= n_cubes:
            break
    out = _get(params, "out", "transfer.csv")
    write_transfer_csv(out, RunManifest("transfer", params), records)
    n_fail = sum(1 for r in records if not r.passed)
    print(f"wrote {out}: {len(records)} cubes checked, {n_fail} violations")
    return 1 if n_fail else 0


def cmd_check(params) -> int:
    from .selfcheck import run_all

    fast = _get(params, "fast", 0, int)
    results = run_all(fast=bool(fast))
    failures = 0
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        failures += 0 if ok else 1
    print(f"{len(results) - failures}/{len(results)} suites passed")
    return 1 if failures else 0


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        command, params = _parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    if command is None:
        return 0
    handler = {
        "gen": cmd_gen,
        "cubes": cmd_cubes,
        "beta": cmd_beta,
        "carleson": cmd_carleson,
        "transfer": cmd_transfer,
        "report": cmd_report,
        "check": cmd_check,
    }[command]
    try:
        return handler(params)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
