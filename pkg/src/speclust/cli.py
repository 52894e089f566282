"""Command-line interface: generate / cluster / segment / evaluate / bench."""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import fileio
from .errors import (
    DegenerateEigenvectorError,
    GraphValidationError,
    IllPosedProblemError,
    IterativeSolveError,
    SpeclustError,
)
from .generators import four_moons, noisy_knn, sample_constraints
from .graph import is_connected, largest_component
from .merge import ConstraintSet
from .metrics import rand_index
from .pipeline import PipelineConfig, run_pipeline

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_NUMERICAL_ERROR = 2


def _add_solver_flags(p: argparse.ArgumentParser):
    p.add_argument("--k", type=int, required=True, help="number of clusters (>= 2)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-6, help="eigensolver tolerance")
    p.add_argument("--max-iter", type=int, default=500, help="eigensolver iteration cap")
    p.add_argument("--restarts", type=int, default=20, help="k-means restarts")
    p.add_argument("--refine", action="store_true",
                   help="refine clusters with per-cluster sweeps")
    p.add_argument("--dense-threshold", type=int, default=200,
                   help="use the dense eigensolver at or below this many vertices")
    p.add_argument("--preconditioner", default="auto",
                   choices=["auto", "jacobi", "gauss_seidel", "aggregation", "none"])
    p.add_argument("--embedding-degrees", default="merged", choices=["merged", "data"])
    p.add_argument("--demand-normalization", default="min-edge",
                   choices=["min-edge", "volume"])
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--report", help="write a JSON run report to this path")


def _config_from_args(args) -> PipelineConfig:
    return PipelineConfig(
        k=args.k,
        seed=args.seed,
        eig_tol=args.tol,
        eig_max_iter=args.max_iter,
        dense_threshold=args.dense_threshold,
        preconditioner=args.preconditioner,
        kmeans_restarts=args.restarts,
        refine=args.refine,
        embedding_degrees=args.embedding_degrees,
        demand_normalization=args.demand_normalization,
        threads=args.threads,
    )


def _print_report(report):
    print(f"n={report.n} k={report.k} "
          f"eigenvalues={np.array2string(report.eigenvalues, precision=6)}")
    print(f"eigensolver: {report.eigen_iterations} iterations, "
          f"converged={report.eigen_converged}")
    finite = [f"{v:.4g}" for v in report.quality.per_cluster_badness]
    print(f"badness per cluster: {finite} (max {report.quality.max_badness:.4g})")
    if report.quality.certificate is not None:
        print(f"eigenvalue lower-bound certificate: {report.quality.certificate:.6g}")
    if report.quality.rand_index is not None:
        print(f"rand index vs ground truth: {report.quality.rand_index:.4f}")
    for w in report.warnings + report.quality.warnings:
        print(f"warning: {w}", file=sys.stderr)
    total = sum(report.timings_ms.values())
    stages = ", ".join(f"{k} {v:.0f}" for k, v in report.timings_ms.items())
    print(f"timings_ms: {stages} (total {total:.0f})")


def _write_report(path, report):
    if path:
        with open(path, "w") as fh:
            json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _cmd_generate(args) -> int:
    cloud = four_moons(args.n, noise_sd=args.noise, seed=args.seed)
    graph = noisy_knn(cloud, args.kg, args.lg, seed=args.seed + 1)
    prefix = args.out_prefix
    fileio.write_points(f"{prefix}.points", cloud)
    fileio.write_edge_list(f"{prefix}.edges", graph)
    fileio.write_labels(f"{prefix}.labels", cloud.labels)
    written = [f"{prefix}.points", f"{prefix}.edges", f"{prefix}.labels"]
    if args.labels > 0:
        cs = sample_constraints(cloud.labels, args.labels, seed=args.seed + 2)
        fileio.write_constraints(f"{prefix}.constraints", cs)
        written.append(f"{prefix}.constraints")
    print(f"wrote {', '.join(written)} "
          f"({graph.n} vertices, {graph.num_edges} edges)")
    return EXIT_OK


def _cmd_cluster(args) -> int:
    graph = fileio.read_edge_list(args.graph)
    constraints = fileio.read_constraints(args.constraints) if args.constraints \
        else ConstraintSet()
    original_n = graph.n
    index = None
    if not is_connected(graph):
        graph, index = largest_component(graph)
        print(f"warning: input graph is disconnected; clustering its largest "
              f"component ({graph.n} of {original_n} vertices)", file=sys.stderr)
        if args.labels_out:
            fileio.write_labels(f"{args.labels_out}.idmap", index)
        remap = -np.ones(original_n, dtype=np.int64)
        remap[index] = np.arange(index.size)

        def map_pairs(pairs):
            return [
                (int(remap[u]), int(remap[v]), w)
                for u, v, w in pairs
                if 0 <= u < original_n and 0 <= v < original_n
                and remap[u] >= 0 and remap[v] >= 0
            ]

        dropped = len(constraints) - len(map_pairs(constraints.ml)) - len(
            map_pairs(constraints.cl))
        if dropped:
            print(f"warning: {dropped} constraint(s) touched dropped vertices",
                  file=sys.stderr)
        constraints = ConstraintSet(ml=map_pairs(constraints.ml),
                                    cl=map_pairs(constraints.cl))
    ground_truth = fileio.read_labels(args.ground_truth) if args.ground_truth else None
    if ground_truth is not None and index is not None:
        ground_truth = ground_truth[index]
    report = run_pipeline(graph, constraints, _config_from_args(args), ground_truth)
    if args.labels_out:
        if index is None:
            fileio.write_labels(args.labels_out, report.labels)
        else:
            full = -np.ones(original_n, dtype=np.int64)
            full[index] = report.labels
            fileio.write_labels(args.labels_out, full)
    _print_report(report)
    _write_report(args.report, report)
    return EXIT_OK if report.eigen_converged else EXIT_NUMERICAL_ERROR


def _cmd_segment(args) -> int:
    image = fileio.read_pgm(args.image)
    graph = fileio.image_to_graph(image, sigma=args.sigma,
                                  connectivity=args.connectivity)
    scribbles = fileio.read_scribbles(args.scribbles) if args.scribbles else []
    constraints = fileio.scribbles_to_constraints(scribbles, image.shape) \
        if scribbles else ConstraintSet()
    report = run_pipeline(graph, constraints, _config_from_args(args))
    if args.out:
        step = 255 // max(report.k - 1, 1)
        fileio.write_pgm(args.out, (report.labels.reshape(image.shape) * step))
        print(f"wrote {args.out}")
    _print_report(report)
    _write_report(args.report, report)
    return EXIT_OK if report.eigen_converged else EXIT_NUMERICAL_ERROR


def _cmd_evaluate(args) -> int:
    truth = fileio.read_labels(args.truth)
    predicted = fileio.read_labels(args.predicted)
    if truth.shape != predicted.shape:
        raise GraphValidationError(
            f"label files disagree on length: {truth.size} vs {predicted.size}"
        )
    keep = predicted >= 0  # -1 marks vertices outside the clustered component
    ri = rand_index(truth[keep], predicted[keep])
    print(f"rand index: {ri!r}")
    return EXIT_OK


def _bench_instance(side: int, n_constraints: int, seed: int):
    """Unit-weight grid with a left/right split and sampled constraints."""
    image = np.full((side, side), 128, dtype=np.uint8)
    graph = fileio.image_to_graph(image, sigma=0.1, connectivity=4)
    cols = np.tile(np.arange(side), (side, 1)).ravel()
    truth = (cols >= side // 2).astype(np.int64)
    rng = np.random.default_rng(seed)
    cs = ConstraintSet()
    half = n_constraints // 2
    left = np.flatnonzero(truth == 0)
    right = np.flatnonzero(truth == 1)
    for _ in range(half):  # must-links within a side
        side_ids = left if rng.random() < 0.5 else right
        u, v = rng.choice(side_ids, size=2, replace=False)
        cs.ml.append((int(u), int(v), None))
    for _ in range(n_constraints - half):  # cannot-links across
        u = int(rng.choice(left))
        v = int(rng.choice(right))
        cs.cl.append((u, v, None))
    return graph, cs, truth


def _cmd_bench(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",") if s]
    rows = []
    for side in sizes:
        graph, cs, truth = _bench_instance(side, args.constraints, args.seed)
        config = _config_from_args(args)
        start = time.perf_counter()
        report = run_pipeline(graph, cs, config, ground_truth=truth)
        wall = time.perf_counter() - start
        rows.append((side, graph.n, wall, report))
        stage = " ".join(f"{k}={v:.0f}ms" for k, v in report.timings_ms.items())
        print(f"grid {side}x{side} (n={graph.n}): total {wall:.2f}s | {stage} | "
              f"rand={report.quality.rand_index:.4f} "
              f"converged={report.eigen_converged}")
    if args.report:
        payload = [
            {"side": side, "n": n, "wall_s": wall, **rep.to_dict()}
            for side, n, wall, rep in rows
        ]
        with open(args.report, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="speclust",
        description="Constrained spectral clustering with must-link/cannot-link "
                    "constraints",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a synthetic dataset")
    p.add_argument("dataset", choices=["four-moons"])
    p.add_argument("--n", type=int, default=1500)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--kg", type=int, default=30, help="k-NN neighbors")
    p.add_argument("--lg", type=float, default=15.0,
                   help="expected noise-edge endpoints per vertex")
    p.add_argument("--labels", type=int, default=0,
                   help="reveal this many vertex labels as constraints")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("cluster", help="cluster an edge-list graph")
    p.add_argument("graph", help="edge-list file")
    p.add_argument("--constraints", help="ML/CL constraint file")
    p.add_argument("--ground-truth", help="labels file for a Rand-index score")
    p.add_argument("--labels-out", help="write cluster labels here")
    _add_solver_flags(p)
    p.set_defaults(func=_cmd_cluster)

    p = sub.add_parser("segment", help="segment a PGM image")
    p.add_argument("image", help="PGM (P2 or P5) grayscale image")
    p.add_argument("--scribbles", help="'row col label' annotation file")
    p.add_argument("--sigma", type=float, default=0.1,
                   help="intensity affinity bandwidth")
    p.add_argument("--connectivity", type=int, default=4, choices=[4, 8])
    p.add_argument("--out", help="write the label image (PGM) here")
    _add_solver_flags(p)
    p.set_defaults(func=_cmd_segment)

    p = sub.add_parser("evaluate", help="Rand index between two label files")
    p.add_argument("truth")
    p.add_argument("predicted")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("bench", help="timing sweep on grid graphs")
    p.add_argument("--sizes", default="64,128,316",
                   help="comma-separated grid side lengths")
    p.add_argument("--constraints", type=int, default=100)
    _add_solver_flags(p)
    p.set_defaults(func=_cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (IterativeSolveError, IllPosedProblemError, DegenerateEigenvectorError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL_ERROR
    except (SpeclustError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
