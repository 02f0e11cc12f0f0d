"""Command-line surface: analyze, diff, prune-plan, sweep, synth.

Outputs are a pure function of the input files and flags; repeated
invocations produce byte-identical artifacts. Exit codes: 0 success,
2 usage/parameter error, 3 data/format error, 4 I/O error.
"""

from __future__ import annotations

import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import analysis, graph_builder, plots, synth
from .errors import FormatError, IoError, ModgraphError, ParameterError
from .modularity import ModularityCurve, modularity, modularity_curve, partition_from_labels
from .similarity import METRICS, similarity
from .tensor_io import FeatureMatrix, LabelVector, LayerFeatureSet, load_run, write_run

DEFAULT_OUT = "modgraph_out"
ALL_FORMATS = ("json", "csv", "svg")


@dataclass(frozen=True)
class AnalyzeConfig:
    manifest: str
    k: int = 3
    metric: str = "cosine"
    epsilon: float = analysis.DEFAULT_EPSILON
    out: str = DEFAULT_OUT
    formats: tuple[str, ...] = ALL_FORMATS

    def __post_init__(self):
        if self.k < 1:
            raise ParameterError(f"k must satisfy 1 <= k <= N-1, got {self.k}")
        if self.metric not in METRICS:
            raise ParameterError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if self.epsilon <= 0:
            raise ParameterError(f"epsilon must be positive, got {self.epsilon}")
        unknown = set(self.formats) - set(ALL_FORMATS)
        if unknown:
            raise ParameterError(f"unknown output format(s): {sorted(unknown)}")


def _parse_formats(text: str) -> tuple[str, ...]:
    parts = tuple(p.strip() for p in text.split(",") if p.strip())
    if not parts:
        raise ParameterError("format list is empty")
    return parts


def _parse_int_list(text: str, flag: str) -> list[int]:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise ParameterError(f"{flag} list is empty")
    try:
        return [int(p) for p in parts]
    except ValueError as e:
        raise ParameterError(f"{flag} must be a comma-separated list of integers: {e}") from e


def _resolve_threads(cli_value: int | None) -> int:
    if cli_value is not None:
        value = cli_value
    else:
        env = os.environ.get("MODGRAPH_THREADS")
        value = int(env) if env else 1
    if value < 1:
        raise ParameterError(f"threads must be >= 1, got {value}")
    return value


def _write_text(path: Path, text: str) -> None:
    try:
        path.write_text(text)
    except OSError as e:
        raise IoError(f"cannot write '{path}': {e}") from e


def _write_json(path: Path, doc) -> None:
    _write_text(path, json.dumps(doc, indent=2) + "\n")


def _curve_csv(curve: ModularityCurve) -> str:
    lines = ["layer,name,modularity"]
    lines += [
        f"{i},{name},{float(v)!r}"
        for i, (name, v) in enumerate(zip(curve.layer_names, curve.values))
    ]
    return "\n".join(lines) + "\n"


def _read_curve_csv(path) -> ModularityCurve:
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as e:
        raise IoError(f"cannot read '{path}': {e}") from e
    if not lines or lines[0].strip() != "layer,name,modularity":
        raise FormatError(f"'{path}': expected header 'layer,name,modularity'")
    names, values = [], []
    for line in lines[1:]:
        if not line.strip():
            continue
        try:
            _, name, value = line.split(",")
            names.append(name)
            values.append(float(value))
        except ValueError as e:
            raise FormatError(f"'{path}': malformed curve row {line!r}") from e
    if not values:
        raise FormatError(f"'{path}': curve file has no rows")
    return ModularityCurve(values=np.array(values), layer_names=tuple(names))


def _diff_csv(diff: analysis.DifferenceMatrix) -> str:
    lines = [",".join(diff.layer_names)]
    lines += [",".join(repr(float(v)) for v in row) for row in diff.values]
    return "\n".join(lines) + "\n"


def _similarity_csv(values: np.ndarray) -> str:
    return "\n".join(",".join(repr(float(v)) for v in row) for row in values) + "\n"


def _out_dir(path_str: str) -> Path:
    out = Path(path_str)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise IoError(f"cannot create '{out}': {e}") from e
    return out


def _analyze_pipeline(cfg: AnalyzeConfig, threads: int):
    run = load_run(cfg.manifest)
    graph = graph_builder.build_dynamic_graph(run, metric=cfg.metric, k=cfg.k, threads=threads)
    curve = modularity_curve(graph)
    if curve.n_layers >= 2:
        segments = analysis.detect_segments(curve, cfg.epsilon)
    else:
        segments = analysis.CurveSegments.empty(cfg.epsilon)
    plan = analysis.prune_plan(curve, segments, run.manifest)
    return run, graph, curve, segments, plan


def cmd_analyze(args) -> int:
    cfg = AnalyzeConfig(
        manifest=args.manifest,
        k=args.k,
        metric=args.metric,
        epsilon=args.epsilon,
        out=args.out,
        formats=_parse_formats(args.format),
    )
    threads = _resolve_threads(args.threads)
    run, graph, curve, segments, plan = _analyze_pipeline(cfg, threads)
    report = analysis.build_report(
        curve,
        segments,
        plan,
        [s.clamped_edges for s in graph.snapshots],
        k=cfg.k,
        n=run.n_samples,
        metric=cfg.metric,
    )
    out = _out_dir(cfg.out)
    if "json" in cfg.formats:
        _write_json(out / "report.json", report)
        print(f"wrote {out / 'report.json'}")
    if "csv" in cfg.formats:
        _write_text(out / "curve.csv", _curve_csv(curve))
        print(f"wrote {out / 'curve.csv'}")
    if "svg" in cfg.formats:
        plots.render_curve(curve, out / "curve.svg")
        print(f"wrote {out / 'curve.svg'}")
    if args.dump_similarity:
        for name, fm in zip(run.layer_names, run.features):
            sim = similarity(fm, cfg.metric)
            _write_text(out / f"similarity_{name}.csv", _similarity_csv(sim.values))
    if args.export_edges:
        for name, snapshot in zip(run.layer_names, graph.snapshots):
            graph_builder.export_edge_list(snapshot, out / f"edges_{name}.csv")
    return 0


def cmd_diff(args) -> int:
    if args.curve:
        curve = _read_curve_csv(args.curve)
    elif args.manifest:
        cfg = AnalyzeConfig(
            manifest=args.manifest, k=args.k, metric=args.metric, out=args.out
        )
        _, _, curve, _, _ = _analyze_pipeline(cfg, _resolve_threads(args.threads))
    else:
        raise ParameterError("diff needs --manifest or --curve")
    diff = analysis.difference_matrix(curve)
    formats = _parse_formats(args.format)
    out = _out_dir(args.out)
    if "csv" in formats:
        _write_text(out / "diff.csv", _diff_csv(diff))
        print(f"wrote {out / 'diff.csv'}")
    if "svg" in formats:
        plots.render_heatmap(diff, out / "diff.svg")
        print(f"wrote {out / 'diff.svg'}")
    return 0


def cmd_prune_plan(args) -> int:
    cfg = AnalyzeConfig(
        manifest=args.manifest,
        k=args.k,
        metric=args.metric,
        epsilon=args.epsilon,
        out=args.out,
    )
    _, _, curve, segments, plan = _analyze_pipeline(cfg, _resolve_threads(args.threads))
    out = _out_dir(cfg.out)
    doc = {
        "epsilon": plan.epsilon,
        "candidates": [
            {"layer": c.layer_index, "name": c.name, "reason": c.reason, "eligible": c.eligible}
            for c in plan.candidates
        ],
    }
    _write_json(out / "plan.json", doc)
    if plan.candidates:
        print(f"{'layer':>5}  {'name':<24} {'reason':<8} eligible")
        for c in plan.candidates:
            print(f"{c.layer_index:>5}  {c.name:<24} {c.reason:<8} {'yes' if c.eligible else 'no'}")
    else:
        print("no prune candidates")
    print(f"wrote {out / 'plan.json'}")
    return 0


def _subsample_run(run: LayerFeatureSet, n: int) -> LayerFeatureSet:
    """First n/K rows of each class in file order; remainder spread over low class ids."""
    labels = run.labels.labels
    n_classes = run.labels.n_classes
    if not 2 <= n <= len(labels):
        raise ParameterError(f"n must satisfy 2 <= n <= {len(labels)}, got {n}")
    base, extra = divmod(n, n_classes)
    quotas = np.array([base + (1 if c < extra else 0) for c in range(n_classes)])
    keep: list[int] = []
    counts = np.zeros(n_classes, dtype=np.int64)
    for i, y in enumerate(labels):
        if counts[y] < quotas[y]:
            keep.append(i)
            counts[y] += 1
    if len(keep) < n:
        short = [c for c in range(n_classes) if counts[c] < quotas[c]]
        raise ParameterError(f"not enough samples in class(es) {short} to subsample n={n}")
    idx = np.array(keep)
    return LayerFeatureSet(
        manifest=run.manifest,
        features=tuple(FeatureMatrix(data=fm.data[idx]) for fm in run.features),
        labels=LabelVector(labels=labels[idx], n_classes=n_classes),
    )


def cmd_sweep(args) -> int:
    ks = _parse_int_list(args.k_list, "--k-list")
    run = load_run(args.manifest)
    ns = _parse_int_list(args.n_list, "--n-list") if args.n_list else [run.n_samples]
    if args.metric not in METRICS:
        raise ParameterError(f"metric must be one of {METRICS}, got {args.metric!r}")
    for k in ks:
        if k < 1:
            raise ParameterError(f"k must satisfy 1 <= k <= N-1, got {k}")

    results: dict[tuple[int, int], list[float]] = {}
    for n in ns:
        sub = _subsample_run(run, n)
        partition = partition_from_labels(sub.labels)
        sims = [similarity(fm, args.metric) for fm in sub.features]
        for k in ks:
            values = []
            for layer_index, sim in enumerate(sims):
                snap = graph_builder.build_knn(sim, k, layer_index=layer_index)
                values.append(modularity(snap, partition).q)
            results[(k, n)] = values

    out = _out_dir(args.out)
    formats = _parse_formats(args.format)
    lines = ["k,n,layer,modularity"]
    for k in ks:
        for n in ns:
            lines += [f"{k},{n},{i},{v!r}" for i, v in enumerate(results[(k, n)])]
    if "csv" in formats:
        _write_text(out / "sweep.csv", "\n".join(lines) + "\n")
        print(f"wrote {out / 'sweep.csv'}")
    if "svg" in formats:
        labeled = [(f"k={k},n={n}", np.array(results[(k, n)])) for k in ks for n in ns]
        plots.render_overlay(labeled, out / "sweep.svg")
        print(f"wrote {out / 'sweep.svg'}")
    for n in ns:
        stacked = np.array([results[(k, n)] for k in ks])
        gap = float((stacked.max(axis=0) - stacked.min(axis=0)).max())
        print(f"n={n}: max pairwise curve gap across k values = {gap!r}")
    return 0


def _parse_schedule(text: str, n_layers: int) -> tuple[float, ...]:
    try:
        if ":" in text:
            lo, hi = (float(p) for p in text.split(":"))
            return synth.linear_schedule(lo, hi, n_layers)
        values = tuple(float(p) for p in text.split(",") if p.strip())
    except ValueError as e:
        raise ParameterError(f"bad --schedule value {text!r}: {e}") from e
    return values


def cmd_synth(args) -> int:
    spec = synth.SynthSpec(
        n_samples=args.n,
        n_classes=args.classes,
        n_features=args.features,
        n_layers=args.layers,
        separation_schedule=_parse_schedule(args.schedule, args.layers),
        noise_sigma=args.sigma,
        seed=args.seed,
    )
    if args.plateau:
        try:
            start, end = (int(p) for p in args.plateau.split(":"))
        except ValueError as e:
            raise ParameterError(f"bad --plateau value {args.plateau!r}: {e}") from e
        run = synth.generate_plateau_fixture(spec, (start, end))
    else:
        run = synth.generate(spec)
    manifest_path = write_run(run, args.out)
    print(f"wrote {manifest_path}")
    return 0


def build_parser():
    import argparse

    parser = argparse.ArgumentParser(
        prog="modgraph",
        description="Layer-wise k-NN graph modularity analysis of feature representations",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, manifest_required=True):
        p.add_argument("--manifest", required=manifest_required, help="run manifest JSON")
        p.add_argument("--k", type=int, default=3, help="neighbors per node (default 3)")
        p.add_argument("--metric", default="cosine", choices=METRICS)
        p.add_argument("--out", default=DEFAULT_OUT, help="output directory")
        p.add_argument("--format", default="json,csv,svg", help="comma subset of json,csv,svg")
        p.add_argument("--threads", type=int, default=None,
                       help="layer-level parallelism (or MODGRAPH_THREADS)")

    p = sub.add_parser("analyze", help="modularity curve, segments, and report for one run")
    common(p)
    p.add_argument("--epsilon", type=float, default=analysis.DEFAULT_EPSILON)
    p.add_argument("--dump-similarity", action="store_true", help="debug CSV of S per layer")
    p.add_argument("--export-edges", action="store_true", help="edge-list CSV per snapshot")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("diff", help="layer-pair |Q_i - Q_j| matrix and heatmap")
    common(p, manifest_required=False)
    p.add_argument("--curve", help="precomputed curve CSV instead of a manifest")
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("prune-plan", help="prune candidates from plateaus and descents")
    common(p)
    p.add_argument("--epsilon", type=float, default=analysis.DEFAULT_EPSILON)
    p.set_defaults(func=cmd_prune_plan)

    p = sub.add_parser("sweep", help="curves over k and n grids")
    common(p)
    p.add_argument("--k-list", default="3", help="comma list of k values")
    p.add_argument("--n-list", default=None, help="comma list of sample counts")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("synth", help="generate a synthetic run directory")
    p.add_argument("--out", required=True, help="target run directory")
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("--features", type=int, default=256)
    p.add_argument("--layers", type=int, default=10)
    p.add_argument("--schedule", default="0:4", help="'lo:hi' linear or comma list, length L")
    p.add_argument("--sigma", type=float, default=0.4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--plateau", default=None, help="'start:end' plateau fixture interval")
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else 0
    try:
        return args.func(args)
    except ModgraphError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
