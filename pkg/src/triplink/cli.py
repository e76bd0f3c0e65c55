"""Command-line entry point wiring config, pipeline stages and file outputs."""

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .alignment import AlignmentParams
from .config import load_config, parse_ratio
from .entities import load_associations, load_entities, redundancy_filter
from .errors import PipelineError
from .estimator import GraphContrastiveLinkPredictor
from .evaluation import (
    rank_candidates,
    run_cross_validation,
    write_curve_csv,
    write_metrics_json,
    write_predictions_tsv,
)
from .graph import (
    assemble_hetero_adjacency,
    build_association_store,
    load_graph,
    save_graph,
    write_adjacency_csv,
    write_node_manifest,
)
from .similarity import (
    build_peptide_similarity,
    build_profiles,
    compute_bandwidth,
    gip_kernel,
    write_similarity_csv,
)

logger = logging.getLogger(__name__)

SWEEP_GRIDS = {
    "embed_dim": [32, 64, 128, 256, 512],
    "tau": [0.3, 0.4, 0.5, 0.6, 0.7],
    "ratio": ["1:1", "1:2", "1:5", "1:10"],
}

CANONICAL_DIR = "canonical"
GRAPH_FILE = "graph.npz"
CHECKPOINT_FILE = "checkpoint.json"
METRICS_FILE = "metrics.json"
PREDICTIONS_FILE = "predictions.tsv"


def _write_tsv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write("\t".join(header) + "\n")
        for row in rows:
            handle.write("\t".join(str(cell) for cell in row) + "\n")


def _alignment_params(config):
    return AlignmentParams(
        match=config.match,
        mismatch=config.mismatch,
        gap_open=config.gap_open,
        gap_extend=config.gap_extend,
    )


def _canonical_paths(out_dir):
    base = Path(out_dir) / CANONICAL_DIR
    return {
        "peptides": base / "peptides.tsv",
        "microbes": base / "microbes.tsv",
        "diseases": base / "diseases.tsv",
        "edges": base / "edges.tsv",
    }


def cmd_ingest(config):
    """Canonicalize, filter and re-emit the entity and edge tables."""
    for name in ("peptide_table", "microbe_table", "disease_table", "edge_table"):
        if getattr(config, name) is None:
            raise PipelineError(f"config is missing {name!r}, required by ingest")
    registry = load_entities(config.peptide_table, config.microbe_table, config.disease_table)
    registry = redundancy_filter(registry, config.redundancy_threshold, _alignment_params(config))
    records = load_associations(config.edge_table, registry)

    paths = _canonical_paths(config.out_dir)
    paths["peptides"].parent.mkdir(parents=True, exist_ok=True)
    _write_tsv(paths["peptides"], ("id", "sequence"), registry.peptides)
    _write_tsv(paths["microbes"], ("id", "name"), registry.microbes)
    _write_tsv(paths["diseases"], ("id", "name"), registry.diseases)
    _write_tsv(paths["edges"], ("relation", "src_id", "dst_id"),
               [(r.relation, r.src_id, r.dst_id) for r in records])

    edge_counts = {relation: 0 for relation in ("pm", "pd", "md")}
    for record in records:
        edge_counts[record.relation] += 1
    manifest = {
        "peptides": registry.n_peptides,
        "microbes": registry.n_microbes,
        "diseases": registry.n_diseases,
        "edges": edge_counts,
    }
    with open(Path(config.out_dir) / "ingest_manifest.json", "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, sort_keys=True, indent=2)
        handle.write("\n")
    dedup_log = {
        "merged_microbe_ids": dict(sorted(registry.microbe_aliases.items())),
        "redundant_peptide_ids": dict(sorted(registry.peptide_aliases.items())),
    }
    with open(Path(config.out_dir) / "ingest_log.json", "w", encoding="utf-8") as handle:
        json.dump(dedup_log, handle, sort_keys=True, indent=2)
        handle.write("\n")
    logger.info(
        "ingested %d peptides, %d microbes, %d diseases, %d edges",
        registry.n_peptides, registry.n_microbes, registry.n_diseases, len(records),
    )
    return 0


def _load_canonical(config):
    paths = _canonical_paths(config.out_dir)
    for path in paths.values():
        if not path.exists():
            raise PipelineError(f"missing {path}; run `triplink ingest` first")
    registry = load_entities(paths["peptides"], paths["microbes"], paths["diseases"])
    records = load_associations(paths["edges"], registry)
    return registry, records


def cmd_build(config, emit_similarity=False, emit_adjacency=False):
    """Assemble similarity matrices and the heterogeneous adjacency."""
    registry, records = _load_canonical(config)
    store = build_association_store(records, registry)
    s_p = build_peptide_similarity(registry, _alignment_params(config))
    microbe_profiles, disease_profiles = build_profiles(store)
    gamma_m = compute_bandwidth(microbe_profiles, config.gamma_prime, config.gip_bandwidth_mode)
    gamma_d = compute_bandwidth(disease_profiles, config.gamma_prime, config.gip_bandwidth_mode)
    s_m = gip_kernel(microbe_profiles, gamma_m, "microbe")
    s_d = gip_kernel(disease_profiles, gamma_d, "disease")
    graph = assemble_hetero_adjacency(s_p, s_m, s_d, store)

    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    peptide_ids = [pid for pid, _ in registry.peptides]
    microbe_ids = [mid for mid, _ in registry.microbes]
    disease_ids = [did for did, _ in registry.diseases]
    save_graph(out / GRAPH_FILE, graph, peptide_ids, microbe_ids, disease_ids)
    write_node_manifest(out / "node_manifest.tsv", peptide_ids, microbe_ids, disease_ids)
    if emit_similarity:
        write_similarity_csv(out / "similarity_peptide.csv", s_p, peptide_ids)
        write_similarity_csv(out / "similarity_microbe.csv", s_m, microbe_ids)
        write_similarity_csv(out / "similarity_disease.csv", s_d, disease_ids)
    if emit_adjacency:
        write_adjacency_csv(out / "adjacency.csv", graph)
    logger.info("graph assembled: %d nodes", graph.node_count)
    return 0


def _estimator(config):
    return GraphContrastiveLinkPredictor(**config.estimator_kwargs())


def cmd_train(config):
    """Fit on all known positives plus ratio-sampled negatives; save a checkpoint."""
    graph, _ = load_graph(Path(config.out_dir) / GRAPH_FILE)
    store = graph.association_store()
    positives = np.argwhere(store.a_pd == 1.0)
    zeros = np.argwhere(store.a_pd == 0.0)
    needed = int(round(config.ratio * len(positives)))
    if needed > len(zeros):
        raise PipelineError(
            f"negative pool exhausted: need {needed} unobserved pairs, only {len(zeros)} exist"
        )
    rng = np.random.default_rng(config.seed)
    negatives = zeros[rng.choice(len(zeros), size=needed, replace=False)]
    pairs = np.concatenate([positives, negatives])
    labels = np.concatenate([np.ones(len(positives)), np.zeros(len(negatives))])
    estimator = _estimator(config)
    estimator.fit(graph, pairs, labels)
    estimator.save(Path(config.out_dir) / CHECKPOINT_FILE)
    logger.info("trained on %d pairs; checkpoint written", len(pairs))
    return 0


def cmd_evaluate(config):
    """Cross-validate and write metrics.json plus per-fold curve files."""
    graph, _ = load_graph(Path(config.out_dir) / GRAPH_FILE)
    report = run_cross_validation(
        _estimator(config), graph,
        k=config.k, ratio=config.ratio, repetitions=config.repetitions,
        threshold=config.threshold, seed=config.seed,
    )
    out = Path(config.out_dir)
    write_metrics_json(out / METRICS_FILE, report)
    for result in report.results:
        tag = f"rep{result.repetition}_fold{result.fold}"
        write_curve_csv(out / f"roc_{tag}.csv", result.metrics.roc, "fpr,tpr")
        write_curve_csv(out / f"pr_{tag}.csv", result.metrics.pr, "recall,precision")
    means = report.mean_metrics()
    logger.info("mean auroc=%s auprc=%s", means["auroc"], means["auprc"])
    return 0


def cmd_predict(config, top_n=None):
    """Rank unobserved peptide-disease pairs with a trained checkpoint."""
    out = Path(config.out_dir)
    graph, ids = load_graph(out / GRAPH_FILE)
    checkpoint = out / CHECKPOINT_FILE
    if not checkpoint.exists():
        raise PipelineError(f"missing {checkpoint}; run `triplink train` first")
    estimator = GraphContrastiveLinkPredictor.load(checkpoint)
    rows = rank_candidates(
        estimator, graph, top_n or config.top_n,
        ids["peptide"], ids["microbe"], ids["disease"],
    )
    write_predictions_tsv(out / PREDICTIONS_FILE, rows)
    logger.info("wrote %d ranked candidates", len(rows))
    return 0


def cmd_sweep(config, param, grid=None):
    """Re-run cross-validation along one hyperparameter axis."""
    if param not in SWEEP_GRIDS:
        raise PipelineError(f"unknown sweep parameter {param!r}; choose from {sorted(SWEEP_GRIDS)}")
    values = grid if grid is not None else SWEEP_GRIDS[param]
    graph, _ = load_graph(Path(config.out_dir) / GRAPH_FILE)
    rows = []
    for value in values:
        estimator = _estimator(config)
        ratio = config.ratio
        if param == "ratio":
            ratio = parse_ratio(value)
        else:
            estimator.set_params(**{param: value})
        report = run_cross_validation(
            estimator, graph, k=config.k, ratio=ratio,
            repetitions=config.repetitions, threshold=config.threshold, seed=config.seed,
        )
        means = report.mean_metrics()
        rows.append([param, value] + [means[name] for name in
                                      ("auroc", "auprc", "f1", "accuracy", "recall", "precision")])
        logger.info("sweep %s=%s: auroc=%s auprc=%s", param, value, means["auroc"], means["auprc"])
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / f"sweep_{param}.csv", "w", encoding="utf-8", newline="") as handle:
        handle.write("param,value,auroc,auprc,f1,accuracy,recall,precision\n")
        for row in rows:
            handle.write(",".join(str(cell) for cell in row) + "\n")
    return 0


def _parse_grid_cell(raw):
    for cast in (int, float):
        try:
            return cast(raw)
        except ValueError:
            continue
    return raw


def build_parser():
    parser = argparse.ArgumentParser(
        prog="triplink",
        description="Tripartite peptide-microbe-disease graph learning pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", required=True, help="path to the JSON run configuration")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", default=None, help="override the output directory")

    add_common(sub.add_parser("ingest", help="canonicalize and filter the input tables"))
    build = sub.add_parser("build", help="assemble similarities and the graph")
    add_common(build)
    build.add_argument("--emit-similarity", action="store_true",
                       help="also write the three similarity matrices as CSV")
    build.add_argument("--emit-adjacency", action="store_true",
                       help="also write the full adjacency as CSV")
    add_common(sub.add_parser("train", help="train on all data and save a checkpoint"))
    add_common(sub.add_parser("evaluate", help="run cross-validation and write metrics"))
    predict = sub.add_parser("predict", help="rank unobserved peptide-disease pairs")
    add_common(predict)
    predict.add_argument("--top-n", type=int, default=None, help="number of candidates to keep")
    sweep = sub.add_parser("sweep", help="re-evaluate along one hyperparameter axis")
    add_common(sweep)
    sweep.add_argument("--param", required=True, choices=sorted(SWEEP_GRIDS),
                       help="hyperparameter axis to sweep")
    sweep.add_argument("--grid", default=None,
                       help="comma-separated override of the default grid")
    return parser


def main(argv=None):
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    overrides = {"seed": args.seed, "out_dir": args.out}
    try:
        config = load_config(args.config, overrides=overrides)
        if args.command == "ingest":
            return cmd_ingest(config)
        if args.command == "build":
            return cmd_build(config, emit_similarity=args.emit_similarity,
                             emit_adjacency=args.emit_adjacency)
        if args.command == "train":
            return cmd_train(config)
        if args.command == "evaluate":
            return cmd_evaluate(config)
        if args.command == "predict":
            return cmd_predict(config, top_n=args.top_n)
        if args.command == "sweep":
            grid = None
            if args.grid is not None:
                grid = [_parse_grid_cell(cell.strip()) for cell in args.grid.split(",")]
            return cmd_sweep(config, args.param, grid)
        raise PipelineError(f"unknown command {args.command!r}")
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
