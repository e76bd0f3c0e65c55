"""Prompt-node selection and prompt-shielded edge perturbation."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

DEFAULT_TAU = 0.4
DEFAULT_DROP_RATE = 0.2

PERTURB_SCOPES = ("all", "association_only")


@dataclass
class PromptSet:
    """Peptides whose mean similarity exceeds the threshold."""

    scores: np.ndarray
    members: np.ndarray  # sorted peptide (= global) indices
    tau: float


@dataclass
class AugmentedView:
    """Edge-dropped copy of the adjacency; prompt-incident cells are untouched."""

    adjacency: np.ndarray
    drop_rate: float
    seed: int


def compute_prompt_scores(s_p):
    """Mean off-diagonal similarity per peptide.

    A single peptide has no neighbors; its score is defined as 0.
    """
    values = np.asarray(s_p, dtype=np.float64)
    n = values.shape[0]
    if n == 1:
        return np.zeros(1)
    return (values.sum(axis=1) - np.diag(values)) / (n - 1)


def select_prompt_nodes(scores, tau=DEFAULT_TAU):
    """Strict threshold: a peptide joins the prompt set only when score > tau."""
    if not math.isfinite(tau):
        raise ConfigError(f"tau must be finite, got {tau}")
    scores = np.asarray(scores, dtype=np.float64)
    members = np.flatnonzero(scores > tau)
    return PromptSet(scores=scores, members=members, tau=tau)


def augment_graph(graph, prompts, drop_rate=DEFAULT_DROP_RATE, seed=0, scope="all"):
    """Drop each eligible edge with probability ``drop_rate``.

    One Bernoulli draw is made per unordered node pair and mirrored to both
    cells, preserving symmetry. Cells incident to a prompt node and the
    diagonal are copied unchanged. With scope "association_only" the
    similarity blocks are also shielded and only cross-type cells are
    eligible.
    """
    if not 0.0 <= drop_rate < 1.0:
        raise ConfigError(f"drop rate must be in [0, 1), got {drop_rate}")
    if scope not in PERTURB_SCOPES:
        raise ConfigError(f"unknown perturb scope {scope!r}; expected one of {PERTURB_SCOPES}")
    adjacency = graph.adjacency
    n = graph.node_count
    rng = np.random.default_rng(seed)
    upper = np.triu(rng.random((n, n)), 1)
    draws = upper + upper.T
    keep = draws < (1.0 - drop_rate)

    eligible = eligible_mask(graph, prompts, scope)
    augmented = np.where(eligible & ~keep, 0.0, adjacency)
    return AugmentedView(adjacency=augmented, drop_rate=drop_rate, seed=seed)


def eligible_mask(graph, prompts, scope="all"):
    """Boolean mask of cells the perturbation may touch."""
    n = graph.node_count
    prompt_flags = np.zeros(n, dtype=bool)
    prompt_flags[prompts.members] = True
    shielded = prompt_flags[:, None] | prompt_flags[None, :]
    eligible = ~shielded & ~np.eye(n, dtype=bool)
    if scope == "association_only":
        types = graph.node_types()
        eligible &= types[:, None] != types[None, :]
    return eligible


def eligible_edge_count(graph, prompts, scope="all"):
    """Number of unordered nonzero eligible pairs (the perturbable edges)."""
    mask = eligible_mask(graph, prompts, scope) & (graph.adjacency != 0.0)
    return int(np.triu(mask, 1).sum())
