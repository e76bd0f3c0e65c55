"""Tripartite peptide-microbe-disease graph learning and association ranking."""

from .alignment import AlignmentParams, local_identity, smith_waterman_score
from .augment import (
    AugmentedView,
    PromptSet,
    augment_graph,
    compute_prompt_scores,
    select_prompt_nodes,
)
from .config import RunConfig, load_config
from .entities import (
    EntityRegistry,
    RawAssociation,
    canonicalize_microbe,
    load_associations,
    load_entities,
    redundancy_filter,
)
from .errors import ConfigError, GraphFormatError, IngestError, PipelineError
from .estimator import GraphContrastiveLinkPredictor
from .evaluation import (
    CVReport,
    FoldPlan,
    MetricsEntry,
    auprc,
    auroc,
    compute_confusion,
    compute_metrics,
    make_folds,
    rank_candidates,
    run_cross_validation,
)
from .graph import (
    AssociationStore,
    HeteroGraph,
    assemble_hetero_adjacency,
    build_association_store,
    load_graph,
    save_graph,
)
from .model import ModelDims, ModelParams, NodeEmbeddings, encode
from .similarity import (
    SimilarityMatrix,
    build_peptide_similarity,
    build_profiles,
    compute_bandwidth,
    gip_kernel,
)
from .tensor import Adam, Tensor, backward

__version__ = "0.1.0"

__all__ = [
    "Adam",
    "AlignmentParams",
    "AssociationStore",
    "AugmentedView",
    "CVReport",
    "ConfigError",
    "EntityRegistry",
    "FoldPlan",
    "GraphContrastiveLinkPredictor",
    "GraphFormatError",
    "HeteroGraph",
    "IngestError",
    "MetricsEntry",
    "ModelDims",
    "ModelParams",
    "NodeEmbeddings",
    "PipelineError",
    "PromptSet",
    "RawAssociation",
    "RunConfig",
    "SimilarityMatrix",
    "Tensor",
    "assemble_hetero_adjacency",
    "augment_graph",
    "auprc",
    "auroc",
    "backward",
    "build_association_store",
    "build_peptide_similarity",
    "build_profiles",
    "canonicalize_microbe",
    "compute_bandwidth",
    "compute_confusion",
    "compute_metrics",
    "compute_prompt_scores",
    "encode",
    "gip_kernel",
    "load_associations",
    "load_config",
    "load_entities",
    "load_graph",
    "local_identity",
    "make_folds",
    "rank_candidates",
    "redundancy_filter",
    "run_cross_validation",
    "save_graph",
    "select_prompt_nodes",
    "smith_waterman_score",
]
