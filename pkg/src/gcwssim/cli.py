"""Command-line pipeline: distance matrices, clustering, evaluation,
benchmark suites and heatmap rendering.

Exit codes: 0 success, 1 usage error, 2 data error, 3 disconnected graph.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import _kernels
from .cluster import kmedoids_restarts
from .cwssim import CwSsimConfig
from .data import (
    DataError,
    LabeledDataset,
    load_dataset,
    save_dataset,
    subset_by_labels,
    synth_rotated_set,
)
from .manifold import (
    DisconnectedGraphError,
    DistanceMatrix,
    MatrixKind,
    geodesic_matrix,
    pairwise_cwssim,
    pairwise_l2,
)
from .matrixio import heatmap_array, read_gdm, write_csv, write_gdm, write_gray
from .metrics import evaluate
from .wavelet import PyramidConfig

log = logging.getLogger("gcwssim")

MEASURES = ("l2", "cwssim", "geo-l2", "gcwssim")
SUITES = ("coil-sets", "large-coil-sets", "olivetti-sets", "synthetic")

_COIL_LAYOUT_HINT = (
    "expected layout: obj<N>__<angle>.<png|pgm|ppm|bmp> files directly under the root "
    "(COIL convention), or pass a manifest of 'relative_path,label' rows"
)
_OLIVETTI_LAYOUT_HINT = (
    "expected layout: one subdirectory per subject (s1 .. s40) containing that "
    "subject's images, or a manifest of 'relative_path,label' rows"
)


class UsageError(Exception):
    """Bad command line or out-of-range flag value."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _positive_int(name, value, minimum=1):
    if value < minimum:
        raise UsageError(f"--{name} must be >= {minimum}, got {value}")
    return value


def _cwssim_config(args) -> CwSsimConfig:
    if args.K <= 0.0:
        raise UsageError(f"--K must be positive, got {args.K}")
    if args.window < 3 or args.window % 2 == 0:
        raise UsageError(f"--window must be odd and >= 3, got {args.window}")
    _positive_int("stride", args.stride)
    _positive_int("scales", args.scales)
    _positive_int("orientations", args.orientations, 2)
    return CwSsimConfig(
        K=args.K,
        window=args.window,
        stride=args.stride,
        pyramid=PyramidConfig(n_scales=args.scales, n_orientations=args.orientations),
    )


def _add_dataset_flags(p):
    p.add_argument("--data", required=True, help="dataset directory")
    p.add_argument("--manifest", default=None, help="manifest file (relative_path,label rows)")


def _add_cwssim_flags(p, stride_default=1):
    p.add_argument("--K", type=float, default=0.01, help="stabilizing constant (default 0.01)")
    p.add_argument("--window", type=int, default=7, help="sliding window side (default 7)")
    p.add_argument(
        "--stride", type=int, default=stride_default,
        help=f"window step (default {stride_default})",
    )
    p.add_argument("--scales", type=int, default=2, help="pyramid scales (default 2)")
    p.add_argument(
        "--orientations", type=int, default=6, help="pyramid orientations (default 6)"
    )


def _add_threads_flag(p):
    p.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")


def _load_measure_matrix(ds, measure, args, cfg) -> DistanceMatrix:
    threads = _positive_int("threads", args.threads)
    if measure == "l2":
        return pairwise_l2(ds)
    if measure == "cwssim":
        return pairwise_cwssim(ds, cfg, threads=threads)
    t = _positive_int("t", args.t)
    if t > len(ds) - 1:
        raise UsageError(f"--t must be <= n-1 = {len(ds) - 1}, got {t}")
    if measure == "geo-l2":
        return geodesic_matrix(pairwise_l2(ds), t, bridge=args.bridge)
    if measure == "gcwssim":
        base = pairwise_cwssim(ds, cfg, threads=threads)
        return geodesic_matrix(base, t, bridge=args.bridge)
    raise UsageError(f"unknown measure {measure!r}; choose from {MEASURES}")


def cmd_distances(args) -> int:
    cfg = _cwssim_config(args)
    ds = load_dataset(args.data, args.manifest)
    started = time.perf_counter()
    matrix = _load_measure_matrix(ds, args.measure, args, cfg)
    elapsed = time.perf_counter() - started
    write_gdm(matrix, args.out)
    if args.csv:
        write_csv(matrix, args.csv)
    log.info(
        "wrote %s: kind=%s n=%d t=%s in %.2fs",
        args.out, matrix.kind.value, matrix.n,
        args.t if args.measure in ("geo-l2", "gcwssim") else "-", elapsed,
    )
    return 0


def cmd_cluster(args) -> int:
    matrix = read_gdm(args.matrix)
    k = _positive_int("k", args.k)
    if k > matrix.n:
        raise UsageError(f"--k must be <= n = {matrix.n}, got {k}")
    restarts = _positive_int("restarts", args.restarts)
    threads = _positive_int("threads", args.threads)
    result = kmedoids_restarts(matrix, k, restarts, args.seed, threads=threads)
    objectives = result.restart_objectives
    report = {
        "matrix": {"path": str(args.matrix), "kind": matrix.kind.value, "n": matrix.n},
        "k": k,
        "restarts": restarts,
        "seed": args.seed,
        "objective": result.objective,
        "medoids": list(result.medoids),
        "assignments": result.assignments.tolist(),
        "iterations": result.iterations,
        "iteration_cap_hits": result.restart_cap_hits,
        "best_restart": objectives.index(min(objectives)),
        "restart_objectives": {
            "min": min(objectives),
            "mean": sum(objectives) / len(objectives),
            "max": max(objectives),
        },
    }
    Path(args.out).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    log.info("wrote %s: objective=%.6f medoids=%s", args.out, result.objective, result.medoids)
    return 0


def cmd_eval(args) -> int:
    try:
        report = json.loads(Path(args.report).read_text())
        assignments = np.asarray(report["assignments"], dtype=np.int64)
    except (OSError, ValueError, KeyError) as exc:
        raise DataError(f"cannot read cluster report {args.report}: {exc}") from exc
    ds = load_dataset(args.data, args.manifest)
    if len(ds) != len(assignments):
        raise DataError(
            f"report covers {len(assignments)} points but dataset has {len(ds)} images"
        )
    rep = evaluate(assignments, ds.labels)
    print(f"r_e={rep.r_e:.1f} r_t={rep.r_t:.1f} r_f={rep.r_f:.1f}")
    if args.out:
        payload = {
            "r_e": rep.r_e,
            "r_t": rep.r_t,
            "r_f": rep.r_f,
            "n": rep.n,
            "k_learned": rep.k_learned,
            "k_true": rep.k_true,
            "label_map": {str(k): v for k, v in sorted(rep.label_map.items())},
        }
        Path(args.out).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_heatmap(args) -> int:
    matrix = read_gdm(args.matrix)
    if args.scale <= 0.0:
        raise UsageError(f"--scale must be positive, got {args.scale}")
    write_gray(heatmap_array(matrix, args.scale), args.out)
    log.info("wrote %s (%dx%d, scale=%g)", args.out, matrix.n, matrix.n, args.scale)
    return 0


def cmd_synth(args) -> int:
    for name in ("objects", "angles"):
        _positive_int(name, getattr(args, name), 1 if name == "objects" else 2)
    if args.size < 32:
        raise UsageError(f"--size must be >= 32, got {args.size}")
    ds = synth_rotated_set(args.objects, args.angles, args.size, args.seed)
    save_dataset(ds, args.out)
    log.info("wrote %d images (%d objects x %d angles) to %s",
             len(ds), args.objects, args.angles, args.out)
    return 0


def _suite_subsets(args) -> list[tuple[str, LabeledDataset]]:
    if args.suite == "synthetic":
        ds = synth_rotated_set(args.objects, args.angles, args.size, args.seed)
        return [(f"Synth-{args.objects}", ds)]

    if args.root is None:
        raise UsageError(f"--root is required for suite {args.suite!r}")
    hint = _OLIVETTI_LAYOUT_HINT if args.suite == "olivetti-sets" else _COIL_LAYOUT_HINT
    root = Path(args.root)
    if not root.is_dir():
        raise DataError(f"dataset root {root} does not exist; {hint}")
    try:
        full = load_dataset(root)
    except DataError as exc:
        raise DataError(f"{exc}; {hint}") from exc

    def defs():
        if args.suite == "coil-sets":
            ten = list(range(2, 21, 2))
            fifteen = [x for x in range(1, 21) if x not in {3, 7, 11, 15, 19}]
            return [
                ("Coil-5", [1, 3, 5, 7, 9]),
                ("Coil-10", ten),
                ("Coil-15", fifteen),
                ("Coil-20", list(range(1, 21))),
            ]
        if args.suite == "large-coil-sets":
            quarter = list(range(1, 98, 4))
            half = list(range(2, 101, 2))
            return [
                ("Coil-25", quarter),
                ("Coil-50", half),
                ("Coil-75", sorted(set(quarter) | set(half))),
                ("Coil-100", list(range(1, 101))),
            ]
        ten = list(range(2, 39, 4))
        twenty = list(range(1, 40, 2))
        return [
            ("Oliv.-10", ten),
            ("Oliv.-20", twenty),
            ("Oliv.-30", sorted(set(ten) | set(twenty))),
            ("Oliv.-40", list(range(1, 41))),
        ]

    return [(name, subset_by_labels(full, keep)) for name, keep in defs()]


def cmd_benchmark(args) -> int:
    cfg = _cwssim_config(args)
    threads = _positive_int("threads", args.threads)
    restarts = 1000 if args.paper_protocol else _positive_int("restarts", args.restarts)
    t = _positive_int("t", args.t)

    subsets = _suite_subsets(args)
    rows = []
    for name, ds in subsets:
        if t > len(ds) - 1:
            raise UsageError(f"--t={t} too large for subset {name} with n={len(ds)}")
        k = ds.n_classes
        started = time.perf_counter()
        log.info("subset %s: n=%d k=%d", name, len(ds), k)
        matrices = {"l2": pairwise_l2(ds)}
        matrices["cwssim"] = pairwise_cwssim(ds, cfg, threads=threads)
        matrices["geo-l2"] = geodesic_matrix(matrices["l2"], t, bridge=args.bridge)
        matrices["gcwssim"] = geodesic_matrix(matrices["cwssim"], t, bridge=args.bridge)
        row = {"dataset": name, "n": len(ds), "k": k}
        for measure in MEASURES:
            best = kmedoids_restarts(matrices[measure], k, restarts, args.seed, threads=threads)
            rep = evaluate(best.assignments, ds.labels)
            row[measure] = (rep.r_e, rep.r_t, rep.r_f)
        rows.append(row)
        log.info("subset %s done in %.1fs", name, time.perf_counter() - started)

    header = [
        f"# suite: {args.suite}",
        f"# t: {t}",
        f"# K: {cfg.K:g}",
        f"# window: {cfg.window}",
        f"# stride: {cfg.stride}",
        f"# scales: {cfg.pyramid.n_scales}",
        f"# orientations: {cfg.pyramid.n_orientations}",
        f"# restarts: {restarts}",
        f"# seed: {args.seed}",
        f"# bridge: {str(args.bridge).lower()}",
    ]
    if args.suite == "synthetic":
        header.append(f"# synthetic: objects={args.objects} angles={args.angles} size={args.size}")
    else:
        header.append(f"# root: {args.root}")
    columns = ["dataset", "n", "k"] + [
        f"{short}_{metric}"
        for short in ("l2", "c", "g", "gc")
        for metric in ("re", "rt", "rf")
    ]
    lines = header + [",".join(columns)]
    for row in rows:
        cells = [row["dataset"], str(row["n"]), str(row["k"])]
        for measure in MEASURES:
            cells.extend(f"{v:.1f}" for v in row[measure])
        lines.append(",".join(cells))
    Path(args.out).write_text("\n".join(lines) + "\n")

    banner = f"{'dataset':<10} {'n':>5} {'k':>3}  " + "  ".join(
        f"{m:>16}" for m in ("L2 re/rt/rf", "C re/rt/rf", "G re/rt/rf", "GC re/rt/rf")
    )
    print(banner)
    for row in rows:
        cells = "  ".join(
            f"{row[m][0]:>5.1f}/{row[m][1]:>4.1f}/{row[m][2]:>4.1f}" for m in MEASURES
        )
        print(f"{row['dataset']:<10} {row['n']:>5} {row['k']:>3}  {cells}")
    log.info("wrote %s", args.out)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="gcwssim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("distances", help="compute a pairwise distance matrix")
    _add_dataset_flags(p)
    p.add_argument("--measure", choices=MEASURES, default="gcwssim")
    p.add_argument("--t", type=int, default=5, help="neighbors per node (default 5)")
    p.add_argument("--bridge", action=argparse.BooleanOptionalAction, default=False,
                   help="connect disconnected components by cheapest base edges")
    _add_cwssim_flags(p)
    _add_threads_flag(p)
    p.add_argument("--out", required=True, help="output .gdm file")
    p.add_argument("--csv", default=None, help="optional comma-separated text export")
    p.set_defaults(func=cmd_distances)

    p = sub.add_parser("cluster", help="k-medoids with restarts on a matrix file")
    p.add_argument("--matrix", required=True, help="input .gdm file")
    p.add_argument("--k", type=int, required=True, help="number of clusters")
    p.add_argument("--restarts", type=int, default=1000,
                   help="random restarts (default 1000)")
    p.add_argument("--seed", type=int, default=0)
    _add_threads_flag(p)
    p.add_argument("--out", required=True, help="output JSON report")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("eval", help="score a cluster report against true labels")
    p.add_argument("--report", required=True, help="cluster JSON report")
    _add_dataset_flags(p)
    p.add_argument("--out", default=None, help="optional JSON output")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("benchmark", help="run a full suite over all four measures")
    p.add_argument("--suite", choices=SUITES, required=True)
    p.add_argument("--root", default=None, help="dataset root (file-based suites)")
    p.add_argument("--t", type=int, default=5, help="neighbors per node (default 5)")
    p.add_argument("--restarts", type=int, default=50,
                   help="random restarts per measure (default 50)")
    p.add_argument("--paper-protocol", action="store_true",
                   help="use 1000 restarts")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bridge", action=argparse.BooleanOptionalAction, default=True,
                   help="bridge disconnected components (default on)")
    p.add_argument("--objects", type=int, default=5, help="synthetic suite: object count")
    p.add_argument("--angles", type=int, default=72, help="synthetic suite: rotations per object")
    p.add_argument("--size", type=int, default=64, help="synthetic suite: image side")
    _add_cwssim_flags(p, stride_default=2)
    _add_threads_flag(p)
    p.add_argument("--out", required=True, help="output table file (CSV with # header)")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("heatmap", help="render a matrix as a grayscale image")
    p.add_argument("--matrix", required=True, help="input .gdm file")
    p.add_argument("--scale", type=float, default=1.0,
                   help="multiply normalized values before clamping at 1")
    p.add_argument("--out", required=True, help="output .pgm or .png image")
    p.set_defaults(func=cmd_heatmap)

    p = sub.add_parser("synth", help="generate a rotated-object dataset on disk")
    p.add_argument("--objects", type=int, default=5)
    p.add_argument("--angles", type=int, default=72)
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=logging.INFO, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s"
    )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return 0 if exc.code in (0, None) else int(exc.code)
    log.debug("kernel backend: %s", _kernels.active_backend())
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DisconnectedGraphError as exc:
        print(f"disconnected graph: {exc}", file=sys.stderr)
        return 3
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
