"""Scikit-learn style estimator around the contrastive training loop."""

import logging

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from . import model as M
from .augment import augment_graph, compute_prompt_scores, select_prompt_nodes
from .tensor import Adam, backward
from .validation import check_labels, check_pairs, check_symmetric

logger = logging.getLogger(__name__)

SCORE_CLAMP = 1e-12


def _epoch_seed(base_seed, epoch):
    # one reproducible stream per (run, epoch)
    return int(np.random.SeedSequence([base_seed, epoch]).generate_state(1)[0])


class GraphContrastiveLinkPredictor(BaseEstimator):
    """Predicts peptide-disease association scores from a heterogeneous graph.

    fit() trains the dual encoder, discriminator and scoring head jointly:
    each epoch redraws a prompt-shielded augmented view, encodes both views,
    and takes one Adam step on the joint objective. predict_proba() scores
    (peptide_index, disease_index) pairs against the fitted graph.
    """

    def __init__(self, embed_dim=128, gcn_layers=2, attn_heads=4, mlp_hidden=64,
                 lambda_weight=1.0, tau=0.4, drop_rate=0.2, perturb_scope="all",
                 contrastive=True, epochs=200, lr=1e-3, beta1=0.9, beta2=0.999,
                 eps=1e-8, seed=0):
        self.embed_dim = embed_dim
        self.gcn_layers = gcn_layers
        self.attn_heads = attn_heads
        self.mlp_hidden = mlp_hidden
        self.lambda_weight = lambda_weight
        self.tau = tau
        self.drop_rate = drop_rate
        self.perturb_scope = perturb_scope
        self.contrastive = contrastive
        self.epochs = epochs
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.seed = seed

    def _dims(self, node_count):
        return M.ModelDims(
            input_dim=node_count,
            embed_dim=self.embed_dim,
            gcn_layers=self.gcn_layers,
            attn_heads=self.attn_heads,
            mlp_hidden=self.mlp_hidden,
        )

    def fit(self, graph, pairs, y):
        """Train on labeled (peptide_index, disease_index) pairs over ``graph``."""
        check_symmetric(graph.adjacency, "graph adjacency")
        pairs = check_pairs(pairs, graph.n_peptides, graph.n_diseases)
        labels = check_labels(y, pairs.shape[0])
        counts = (graph.n_peptides, graph.n_microbes, graph.n_diseases)

        prompts = select_prompt_nodes(
            compute_prompt_scores(graph.peptide_similarity()), self.tau
        )
        params = M.ModelParams.initialize(self._dims(graph.node_count), seed=self.seed)
        optimizer = Adam(
            params.parameters(), lr=self.lr, beta1=self.beta1, beta2=self.beta2, eps=self.eps
        )
        adjacency = graph.adjacency
        history = []
        for epoch in range(self.epochs):
            if self.contrastive:
                view = augment_graph(
                    graph, prompts,
                    drop_rate=self.drop_rate,
                    seed=_epoch_seed(self.seed, epoch),
                    scope=self.perturb_scope,
                )
                adjacency_tilde = view.adjacency
            else:
                adjacency_tilde = None
            loss, contrast_value, pred_value = M.training_loss(
                adjacency, adjacency_tilde, pairs, labels, params,
                self.lambda_weight, counts, contrastive=self.contrastive,
            )
            optimizer.zero_grad()
            backward(loss)
            optimizer.step()
            history.append(
                {"epoch": epoch, "loss": float(loss.data),
                 "contrastive": contrast_value, "prediction": pred_value}
            )
            if epoch == 0 or (epoch + 1) % 50 == 0:
                logger.debug("epoch %d: loss=%.6f", epoch, float(loss.data))

        self.params_ = params
        self.counts_ = counts
        self.prompts_ = prompts
        self.history_ = history
        self.embeddings_ = M.encode(adjacency, M.initial_features(adjacency), params)
        return self

    def _check_fitted(self):
        if not hasattr(self, "params_"):
            raise NotFittedError("this estimator is not fitted yet; call fit first")

    def predict_proba(self, pairs):
        """Scores in (0, 1) for pairs, using the graph embeddings from fit()."""
        self._check_fitted()
        if not hasattr(self, "embeddings_"):
            raise NotFittedError(
                "no cached graph embeddings; use score_pairs(graph, pairs) "
                "on an estimator restored from a checkpoint"
            )
        scores = M.predict_pairs(self.embeddings_.z, pairs, self.params_, self.counts_)
        return np.clip(scores.data.reshape(-1), SCORE_CLAMP, 1.0 - SCORE_CLAMP)

    def predict(self, pairs, threshold=0.5):
        return (self.predict_proba(pairs) >= threshold).astype(np.int64)

    def score_pairs(self, graph, pairs):
        """Score pairs against an arbitrary graph using the trained weights."""
        self._check_fitted()
        embeddings = M.encode(graph.adjacency, M.initial_features(graph.adjacency), self.params_)
        counts = (graph.n_peptides, graph.n_microbes, graph.n_diseases)
        scores = M.predict_pairs(embeddings.z, pairs, self.params_, counts)
        return np.clip(scores.data.reshape(-1), SCORE_CLAMP, 1.0 - SCORE_CLAMP)

    def save(self, path):
        """Persist trained weights plus the hyperparameters needed to reload."""
        self._check_fitted()
        self.params_.save(path, meta={"hyperparameters": self.get_params()})

    @classmethod
    def load(cls, path):
        """Rebuild a fitted estimator (without cached embeddings) from a checkpoint."""
        params, meta = M.ModelParams.load(path)
        estimator = cls(**meta.get("hyperparameters", {}))
        estimator.params_ = params
        return estimator
