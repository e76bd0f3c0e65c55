"""Cross-validation, ranking metrics, imbalance sweeps and candidate export."""

import json
import logging
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import clone

from .errors import PipelineError
from .graph import HeteroGraph

logger = logging.getLogger(__name__)

METRICS_FORMAT = "triplink-metrics-v1"
METRIC_NAMES = ("auroc", "auprc", "f1", "accuracy", "recall", "precision")


@dataclass
class Fold:
    test_positives: np.ndarray  # (n, 2) local (peptide, disease) indices
    test_negatives: np.ndarray


@dataclass
class FoldPlan:
    k: int
    ratio: float
    seed: int
    folds: list

    def train_pairs(self, fold_index):
        """Training pairs and labels: every other fold's positives and negatives."""
        pos = [f.test_positives for i, f in enumerate(self.folds) if i != fold_index]
        neg = [f.test_negatives for i, f in enumerate(self.folds) if i != fold_index]
        pos = np.concatenate(pos) if pos else np.empty((0, 2), dtype=np.int64)
        neg = np.concatenate(neg) if neg else np.empty((0, 2), dtype=np.int64)
        pairs = np.concatenate([pos, neg])
        labels = np.concatenate([np.ones(len(pos)), np.zeros(len(neg))])
        return pairs, labels

    def test_pairs(self, fold_index):
        fold = self.folds[fold_index]
        pairs = np.concatenate([fold.test_positives, fold.test_negatives])
        labels = np.concatenate(
            [np.ones(len(fold.test_positives)), np.zeros(len(fold.test_negatives))]
        )
        return pairs, labels


def make_folds(store, k=5, ratio=1.0, seed=0):
    """Shuffle positives into k folds and sample fold negatives from zero cells.

    Negatives are drawn uniformly without replacement from the unobserved
    peptide-disease cells, ``ratio`` per positive.
    """
    positives = np.argwhere(store.a_pd == 1.0)
    if len(positives) < k:
        raise PipelineError(f"need at least {k} positives for {k} folds, have {len(positives)}")
    zeros = np.argwhere(store.a_pd == 0.0)
    needed = int(round(ratio * len(positives)))
    if needed > len(zeros):
        raise PipelineError(
            f"negative pool exhausted: need {needed} unobserved pairs, only {len(zeros)} exist"
        )
    rng = np.random.default_rng(seed)
    positives = positives[rng.permutation(len(positives))]
    negatives = zeros[rng.choice(len(zeros), size=needed, replace=False)]
    pos_folds = np.array_split(positives, k)
    folds = []
    start = 0
    for fold_positives in pos_folds:
        count = int(round(ratio * len(fold_positives)))
        count = min(count, needed - start)
        folds.append(
            Fold(
                test_positives=fold_positives.astype(np.int64),
                test_negatives=negatives[start : start + count].astype(np.int64),
            )
        )
        start += count
    return FoldPlan(k=k, ratio=ratio, seed=seed, folds=folds)


def mask_test_edges(graph, test_positives):
    """Copy the graph with held-out positive edges zeroed in both cells."""
    adjacency = graph.adjacency.copy()
    offset = graph.n_peptides + graph.n_microbes
    for p, d in np.asarray(test_positives, dtype=np.int64):
        adjacency[p, offset + d] = 0.0
        adjacency[offset + d, p] = 0.0
    return HeteroGraph(
        adjacency=adjacency,
        n_peptides=graph.n_peptides,
        n_microbes=graph.n_microbes,
        n_diseases=graph.n_diseases,
    )


def compute_confusion(scores, labels, threshold=0.5):
    """Counts at ``score >= threshold``; returns (tp, fp, tn, fn)."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    predicted = scores >= threshold
    actual = labels == 1
    tp = int(np.sum(predicted & actual))
    fp = int(np.sum(predicted & ~actual))
    tn = int(np.sum(~predicted & ~actual))
    fn = int(np.sum(~predicted & actual))
    return tp, fp, tn, fn


def _average_ranks(values):
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(len(values), dtype=np.float64)
    sorted_values = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_values[j + 1] == sorted_values[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def auroc(scores, labels):
    """Probability a random positive outranks a random negative; ties count 1/2.

    Returns None when only one class is present.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    n_pos = int(np.sum(labels == 1))
    n_neg = int(np.sum(labels == 0))
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = _average_ranks(scores)
    rank_sum = ranks[labels == 1].sum()
    return float((rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def _threshold_curve(scores, labels):
    """Cumulative tp/fp counts at each distinct score, descending."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    order = np.argsort(-scores, kind="mergesort")
    sorted_scores = scores[order]
    sorted_labels = labels[order]
    cum_tp = np.cumsum(sorted_labels)
    cum_fp = np.cumsum(1.0 - sorted_labels)
    # keep the last index of each tie group
    distinct = np.flatnonzero(np.diff(np.append(sorted_scores, np.nan)) != 0.0)
    return cum_tp[distinct], cum_fp[distinct]


def auprc(scores, labels):
    """Step integration of the precision-recall curve (no interpolation)."""
    labels = np.asarray(labels)
    n_pos = int(np.sum(labels == 1))
    n_neg = int(np.sum(labels == 0))
    if n_pos == 0 or n_neg == 0:
        return None
    cum_tp, cum_fp = _threshold_curve(scores, labels)
    recall = cum_tp / n_pos
    precision = cum_tp / (cum_tp + cum_fp)
    prev_recall = np.concatenate([[0.0], recall[:-1]])
    return float(np.sum((recall - prev_recall) * precision))


def roc_points(scores, labels):
    """(FPR, TPR) pairs from threshold +inf down; starts at (0, 0)."""
    labels = np.asarray(labels)
    n_pos = max(int(np.sum(labels == 1)), 1)
    n_neg = max(int(np.sum(labels == 0)), 1)
    cum_tp, cum_fp = _threshold_curve(scores, labels)
    fpr = np.concatenate([[0.0], cum_fp / n_neg])
    tpr = np.concatenate([[0.0], cum_tp / n_pos])
    return np.column_stack([fpr, tpr])


def pr_points(scores, labels):
    """(Recall, Precision) pairs in recall order; starts at (0, 1)."""
    labels = np.asarray(labels)
    n_pos = max(int(np.sum(labels == 1)), 1)
    cum_tp, cum_fp = _threshold_curve(scores, labels)
    recall = np.concatenate([[0.0], cum_tp / n_pos])
    precision = np.concatenate([[1.0], cum_tp / (cum_tp + cum_fp)])
    return np.column_stack([recall, precision])


@dataclass
class MetricsEntry:
    """All scores for one evaluation split."""

    auroc: float
    auprc: float
    f1: float
    accuracy: float
    recall: float
    precision: float
    tp: int
    fp: int
    tn: int
    fn: int
    threshold: float
    roc: np.ndarray = field(repr=False, default=None)
    pr: np.ndarray = field(repr=False, default=None)

    def scalar_dict(self):
        return {
            "auroc": self.auroc,
            "auprc": self.auprc,
            "f1": self.f1,
            "accuracy": self.accuracy,
            "recall": self.recall,
            "precision": self.precision,
            "tp": self.tp,
            "fp": self.fp,
            "tn": self.tn,
            "fn": self.fn,
            "threshold": self.threshold,
        }


def _safe_ratio(numerator, denominator):
    return float(numerator / denominator) if denominator else 0.0


def compute_metrics(scores, labels, threshold=0.5):
    """Ranking and confusion metrics for one score vector."""
    tp, fp, tn, fn = compute_confusion(scores, labels, threshold)
    total = tp + fp + tn + fn
    precision = _safe_ratio(tp, tp + fp)
    recall = _safe_ratio(tp, tp + fn)
    return MetricsEntry(
        auroc=auroc(scores, labels),
        auprc=auprc(scores, labels),
        f1=_safe_ratio(2 * tp, 2 * tp + fp + fn),
        accuracy=_safe_ratio(tp + tn, total),
        recall=recall,
        precision=precision,
        tp=tp,
        fp=fp,
        tn=tn,
        fn=fn,
        threshold=threshold,
        roc=roc_points(scores, labels),
        pr=pr_points(scores, labels),
    )


@dataclass
class CVResult:
    repetition: int
    fold: int
    metrics: MetricsEntry


@dataclass
class CVReport:
    k: int
    ratio: float
    repetitions: int
    threshold: float
    seed: int
    results: list

    def mean_metrics(self):
        means = {}
        for name in METRIC_NAMES:
            values = [getattr(r.metrics, name) for r in self.results]
            defined = [v for v in values if v is not None]
            means[name] = float(np.mean(defined)) if defined else None
        return means

    def to_json_dict(self):
        return {
            "format": METRICS_FORMAT,
            "k": self.k,
            "ratio": self.ratio,
            "repetitions": self.repetitions,
            "threshold": self.threshold,
            "seed": self.seed,
            "folds": [
                {"repetition": r.repetition, "fold": r.fold, **r.metrics.scalar_dict()}
                for r in self.results
            ],
            "mean": self.mean_metrics(),
        }


def _derived_seed(*entropy):
    return int(np.random.SeedSequence(list(entropy)).generate_state(1)[0])


def run_cross_validation(estimator, graph, k=5, ratio=1.0, repetitions=1,
                         threshold=0.5, seed=0):
    """Train one model per fold on the masked graph and aggregate test metrics.

    Negatives are redrawn per repetition (never per epoch); held-out positive
    edges are removed from the adjacency before encoding.
    """
    store = graph.association_store()
    results = []
    for repetition in range(repetitions):
        plan = make_folds(store, k=k, ratio=ratio, seed=_derived_seed(seed, repetition))
        for fold_index in range(plan.k):
            fold_graph = mask_test_edges(graph, plan.folds[fold_index].test_positives)
            train_pairs, train_labels = plan.train_pairs(fold_index)
            test_pairs, test_labels = plan.test_pairs(fold_index)
            fold_estimator = clone(estimator)
            fold_estimator.set_params(seed=_derived_seed(seed, repetition, fold_index, 1))
            fold_estimator.fit(fold_graph, train_pairs, train_labels)
            scores = fold_estimator.predict_proba(test_pairs)
            entry = compute_metrics(scores, test_labels, threshold)
            results.append(CVResult(repetition=repetition, fold=fold_index, metrics=entry))
            logger.info(
                "repetition %d fold %d: auroc=%s auprc=%s",
                repetition, fold_index, entry.auroc, entry.auprc,
            )
    return CVReport(
        k=k, ratio=ratio, repetitions=repetitions, threshold=threshold, seed=seed,
        results=results,
    )


def rank_candidates(estimator, graph, top_n, peptide_ids, microbe_ids, disease_ids):
    """Rank unobserved peptide-disease pairs by predicted score, descending.

    Equal scores are broken by ascending (peptide index, disease index). Each
    row lists every microbe linked to both endpoints.
    """
    store = graph.association_store()
    candidates = np.argwhere(store.a_pd == 0.0)
    if len(candidates) == 0:
        return []
    scores = estimator.score_pairs(graph, candidates)
    order = sorted(range(len(candidates)),
                   key=lambda i: (-scores[i], candidates[i, 0], candidates[i, 1]))
    rows = []
    for rank, i in enumerate(order[: min(top_n, len(order))], start=1):
        p, d = int(candidates[i, 0]), int(candidates[i, 1])
        linking = [
            microbe_ids[m]
            for m in range(graph.n_microbes)
            if store.a_pm[p, m] == 1.0 and store.a_md[m, d] == 1.0
        ]
        rows.append(
            {
                "rank": rank,
                "peptide_id": peptide_ids[p],
                "disease_id": disease_ids[d],
                "score": float(scores[i]),
                "linking_microbes": linking,
            }
        )
    return rows


def write_metrics_json(path, report):
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(report.to_json_dict(), handle, sort_keys=True, indent=2)
        handle.write("\n")


def write_curve_csv(path, points, header):
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(header + "\n")
        for x, y in points:
            handle.write(f"{float(x)!r},{float(y)!r}\n")


def write_predictions_tsv(path, rows):
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write("rank\tpeptide_id\tdisease_id\tscore\tlinking_microbes\n")
        for row in rows:
            microbes = ";".join(row["linking_microbes"])
            handle.write(
                f"{row['rank']}\t{row['peptide_id']}\t{row['disease_id']}\t"
                f"{row['score']!r}\t{microbes}\n"
            )
