"""Intra-class similarity matrices: alignment scores and interaction-profile kernels."""

import logging
from dataclasses import dataclass

import numpy as np

from .alignment import DEFAULT_PARAMS, smith_waterman_score
from .errors import ConfigError, PipelineError
from .validation import check_symmetric, check_unit_interval

logger = logging.getLogger(__name__)

BANDWIDTH_MODES = ("paper", "classic")


@dataclass
class SimilarityMatrix:
    """Square symmetric similarity matrix for one entity class."""

    values: np.ndarray
    kind: str  # "peptide" | "microbe" | "disease"

    def __post_init__(self):
        self.values = check_symmetric(self.values, f"{self.kind} similarity")
        check_unit_interval(self.values, f"{self.kind} similarity")


def build_peptide_similarity(registry, params=DEFAULT_PARAMS):
    """Pairwise alignment scores normalized by the geometric mean of self-scores.

    The normalization maps raw scores into [0, 1] so the peptide block shares
    the scale of the kernel and association blocks; the diagonal is exactly 1.
    """
    n = registry.n_peptides
    if n < 1:
        raise PipelineError("peptide similarity requires at least one peptide")
    sequences = [seq for _, seq in registry.peptides]
    self_scores = np.array([smith_waterman_score(s, s, params) for s in sequences])
    for (pid, _), score in zip(registry.peptides, self_scores):
        if score <= 0.0:
            raise PipelineError(f"internal error: zero self-alignment score for peptide {pid!r}")
    values = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            raw = smith_waterman_score(sequences[i], sequences[j], params)
            sim = raw / np.sqrt(self_scores[i] * self_scores[j])
            if sim > 1.0 + 1e-9:
                raise PipelineError(
                    f"internal error: normalized similarity {sim} > 1 for pair ({i}, {j})"
                )
            sim = min(sim, 1.0)
            values[i, j] = sim
            values[j, i] = sim
    return SimilarityMatrix(values=values, kind="peptide")


def build_profiles(store):
    """Binary interaction profiles from the microbe-disease associations.

    Each microbe is profiled over diseases (rows of the microbe-disease
    matrix) and each disease over microbes (its columns).
    """
    microbe_profiles = store.a_md.copy()
    disease_profiles = store.a_md.T.copy()
    return microbe_profiles, disease_profiles


def compute_bandwidth(profiles, gamma_prime=1.0, mode="paper"):
    """Gaussian kernel bandwidth from profile norms.

    ``paper`` multiplies gamma_prime by the mean unsquared profile norm;
    ``classic`` divides gamma_prime by the mean squared norm (the usual
    interaction-profile normalization). Both appear in the literature and the
    choice is config-exposed.
    """
    if mode not in BANDWIDTH_MODES:
        raise ConfigError(f"unknown bandwidth mode {mode!r}; expected one of {BANDWIDTH_MODES}")
    profiles = np.asarray(profiles, dtype=np.float64)
    if profiles.ndim != 2 or profiles.shape[0] == 0:
        raise ValueError("compute_bandwidth requires a nonempty 2-d profile array")
    norms = np.linalg.norm(profiles, axis=1)
    if mode == "paper":
        return float(gamma_prime * norms.mean())
    mean_squared = float((norms**2).mean())
    if mean_squared == 0.0:
        return 0.0
    return float(gamma_prime / mean_squared)


def gip_kernel(profiles, gamma, kind):
    """Gaussian interaction-profile kernel S(i,j) = exp(-gamma * ||G_i - G_j||^2).

    gamma = 0 degenerates to exp(0) = 1 everywhere, which would create a
    meaningless complete graph; the identity matrix is returned instead.
    """
    if gamma < 0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    profiles = np.asarray(profiles, dtype=np.float64)
    n = profiles.shape[0]
    if gamma == 0.0:
        logger.info("%s kernel bandwidth is 0; falling back to identity similarity", kind)
        return SimilarityMatrix(values=np.eye(n), kind=kind)
    diff = profiles[:, None, :] - profiles[None, :, :]
    squared = (diff**2).sum(axis=2)
    return SimilarityMatrix(values=np.exp(-gamma * squared), kind=kind)


def write_similarity_csv(path, sim, ids):
    """Full-precision CSV dump with entity ids as row and column headers."""
    n = sim.values.shape[0]
    if len(ids) != n:
        raise ValueError(f"expected {n} ids, got {len(ids)}")
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write("," + ",".join(ids) + "\n")
        for i in range(n):
            row = ",".join(repr(float(v)) for v in sim.values[i])
            handle.write(f"{ids[i]},{row}\n")
