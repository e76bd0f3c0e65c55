"""Dual-encoder embedding model, contrastive discriminator and pair predictor."""

import math
from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .tensor import Tensor

LOG_CLAMP = 1e-12


@dataclass(frozen=True)
class ModelDims:
    input_dim: int
    embed_dim: int = 128
    gcn_layers: int = 2
    attn_heads: int = 4
    mlp_hidden: int = 64

    def __post_init__(self):
        if self.embed_dim <= 0 or self.embed_dim % self.attn_heads != 0:
            raise ValueError(
                f"embed_dim {self.embed_dim} must be positive and divisible by "
                f"attn_heads {self.attn_heads}"
            )
        if self.gcn_layers < 1:
            raise ValueError("gcn_layers must be >= 1")
        if self.mlp_hidden < 1:
            raise ValueError("mlp_hidden must be >= 1")

    @property
    def head_dim(self):
        return self.embed_dim // self.attn_heads

    @property
    def ffn_hidden(self):
        return 2 * self.embed_dim

    def to_dict(self):
        return {
            "input_dim": self.input_dim,
            "embed_dim": self.embed_dim,
            "gcn_layers": self.gcn_layers,
            "attn_heads": self.attn_heads,
            "mlp_hidden": self.mlp_hidden,
        }


class ModelParams:
    """Named parameter tensors for the encoders, discriminator and predictor."""

    def __init__(self, dims, tensors, order):
        self.dims = dims
        self.tensors = tensors
        self._order = order

    def __getitem__(self, name):
        return self.tensors[name]

    def parameters(self):
        return [self.tensors[name] for name in self._order]

    def named_parameters(self):
        return {name: self.tensors[name] for name in self._order}

    @classmethod
    def initialize(cls, dims, seed=0):
        """Glorot-uniform weights from a seeded generator; norm gains start at 1."""
        rng = np.random.default_rng(seed)
        tensors = {}
        order = []

        def glorot(name, fan_in, fan_out, shape=None):
            limit = math.sqrt(6.0 / (fan_in + fan_out))
            shape = shape or (fan_in, fan_out)
            tensors[name] = Tensor(rng.uniform(-limit, limit, size=shape), requires_grad=True)
            order.append(name)

        def const(name, shape, value):
            tensors[name] = Tensor(np.full(shape, value, dtype=np.float64), requires_grad=True)
            order.append(name)

        e, heads, hd = dims.embed_dim, dims.attn_heads, dims.head_dim
        in_dim = dims.input_dim
        for layer in range(dims.gcn_layers):
            fan_in = in_dim if layer == 0 else e
            glorot(f"gcn{layer}.weight", fan_in, e)
        glorot("trans.in_proj", in_dim, e)
        for h in range(heads):
            glorot(f"trans.h{h}.wq", e, hd)
            glorot(f"trans.h{h}.wk", e, hd)
            glorot(f"trans.h{h}.wv", e, hd)
        glorot("trans.out_proj", e, e)
        const("trans.ln1.gain", (1, e), 1.0)
        const("trans.ln1.bias", (1, e), 0.0)
        glorot("trans.ffn.w1", e, dims.ffn_hidden)
        const("trans.ffn.b1", (1, dims.ffn_hidden), 0.0)
        glorot("trans.ffn.w2", dims.ffn_hidden, e)
        const("trans.ffn.b2", (1, e), 0.0)
        const("trans.ln2.gain", (1, e), 1.0)
        const("trans.ln2.bias", (1, e), 0.0)
        glorot("disc.weight", 4 * e, 1)
        const("disc.bias", (1, 1), 0.0)
        glorot("pred.w1", 4 * e, dims.mlp_hidden)
        const("pred.b1", (1, dims.mlp_hidden), 0.0)
        glorot("pred.w2", dims.mlp_hidden, 1)
        const("pred.b2", (1, 1), 0.0)
        return cls(dims, tensors, order)

    def save(self, path, meta=None):
        payload_meta = {"dims": self.dims.to_dict()}
        payload_meta.update(meta or {})
        T.save_checkpoint(path, self.named_parameters(), meta=payload_meta)

    @classmethod
    def load(cls, path):
        arrays, meta = T.load_checkpoint(path)
        dims = ModelDims(**meta["dims"])
        reference = cls.initialize(dims, seed=0)
        tensors = {}
        for name in reference._order:
            if name not in arrays:
                raise ValueError(f"{path}: checkpoint is missing parameter {name!r}")
            if arrays[name].shape != reference.tensors[name].data.shape:
                raise ValueError(f"{path}: parameter {name!r} has wrong shape")
            tensors[name] = Tensor(arrays[name], requires_grad=True)
        return cls(dims, tensors, list(reference._order)), meta


@dataclass
class NodeEmbeddings:
    """Concatenated per-node embeddings plus the mean-pooled graph vector."""

    z_gcn: Tensor
    z_trans: Tensor
    z: Tensor    # columns [z_gcn | z_trans]
    z_g: Tensor  # (1, 2 * embed_dim)


def normalized_adjacency(adjacency):
    """Symmetric normalization D^{-1/2} (A + I) D^{-1/2}; self-loops keep every degree > 0."""
    a_hat = np.asarray(adjacency, dtype=np.float64) + np.eye(adjacency.shape[0])
    inv_sqrt_degree = 1.0 / np.sqrt(a_hat.sum(axis=1))
    return a_hat * inv_sqrt_degree[:, None] * inv_sqrt_degree[None, :]


def initial_features(adjacency):
    """Node features are the adjacency rows: each node sees its full profile."""
    return np.asarray(adjacency, dtype=np.float64).copy()


def gcn_encode(adjacency, x, params, activation="relu"):
    """Stacked propagation layers over the normalized adjacency."""
    adj_norm = Tensor(normalized_adjacency(np.asarray(adjacency, dtype=np.float64)))
    h = x if isinstance(x, Tensor) else Tensor(x)
    for layer in range(params.dims.gcn_layers):
        h = T.matmul(T.matmul(adj_norm, h), params[f"gcn{layer}.weight"])
        if activation == "relu":
            h = T.relu(h)
    return h


def transformer_encode(x, params, return_attention=False):
    """One self-attention block without positional encoding, then a feed-forward block.

    Node order carries no information, so the encoder is permutation
    equivariant by construction.
    """
    dims = params.dims
    x = x if isinstance(x, Tensor) else Tensor(x)
    projected = T.matmul(x, params["trans.in_proj"])
    head_outputs = []
    attention = []
    scale = 1.0 / math.sqrt(dims.head_dim)
    for h in range(dims.attn_heads):
        q = T.matmul(projected, params[f"trans.h{h}.wq"])
        k = T.matmul(projected, params[f"trans.h{h}.wk"])
        v = T.matmul(projected, params[f"trans.h{h}.wv"])
        weights = T.softmax_rows(T.multiply_scalar(T.matmul(q, T.transpose(k)), scale))
        attention.append(weights)
        head_outputs.append(T.matmul(weights, v))
    merged = T.matmul(T.concat_columns(*head_outputs), params["trans.out_proj"])
    normed = T.layer_norm_rows(
        T.add(projected, merged), params["trans.ln1.gain"], params["trans.ln1.bias"]
    )
    hidden = T.relu(T.add(T.matmul(normed, params["trans.ffn.w1"]), params["trans.ffn.b1"]))
    ffn = T.add(T.matmul(hidden, params["trans.ffn.w2"]), params["trans.ffn.b2"])
    out = T.layer_norm_rows(
        T.add(normed, ffn), params["trans.ln2.gain"], params["trans.ln2.bias"]
    )
    if return_attention:
        return out, attention
    return out


def encode(adjacency, x, params):
    """Run both encoders and pool the concatenated embeddings."""
    z_gcn = gcn_encode(adjacency, x, params)
    z_trans = transformer_encode(x, params)
    z = T.concat_columns(z_gcn, z_trans)
    z_g = T.row_mean(z)
    return NodeEmbeddings(z_gcn=z_gcn, z_trans=z_trans, z=z, z_g=z_g)


def _ones_like(t):
    return Tensor(np.ones_like(t.data))


def _one_minus(t):
    return T.add(_ones_like(t), T.multiply_scalar(t, -1.0))


def _discriminate_rows(rows, params):
    """Sigmoid of a single linear layer over [z | z_g] rows."""
    logits = T.add(T.matmul(rows, params["disc.weight"]), params["disc.bias"])
    return T.sigmoid(logits)


def discriminate(z, z_g, params):
    """Score one (node embedding, graph summary) pair; output strictly in (0, 1)."""
    row = np.concatenate([np.asarray(z).reshape(-1), np.asarray(z_g).reshape(-1)])
    expected = params["disc.weight"].data.shape[0]
    if row.shape[0] != expected:
        raise ValueError(f"discriminate: expected concatenated length {expected}, got {row.shape[0]}")
    out = _discriminate_rows(Tensor(row.reshape(1, -1)), params)
    return float(out.data[0, 0])


def contrastive_loss(embeddings, embeddings_tilde, params):
    """Mean discriminator cross-entropy with the original graph's summary.

    Positives pair original-node embeddings with the pooled summary of the
    original graph; negatives pair augmented-node embeddings with the same
    summary.
    """
    n = embeddings.z.data.shape[0]
    summary = T.tile_rows(embeddings.z_g, n)
    pos = _discriminate_rows(T.concat_columns(embeddings.z, summary), params)
    neg = _discriminate_rows(T.concat_columns(embeddings_tilde.z, summary), params)
    log_pos = T.log(T.clamp_min(pos, LOG_CLAMP))
    log_neg = T.log(T.clamp_min(_one_minus(neg), LOG_CLAMP))
    total = T.sum_all(T.add(log_pos, log_neg))
    return T.multiply_scalar(total, -1.0 / n)


def predict_pairs(z, pairs, params, counts):
    """Association scores for (peptide_index, disease_index) pairs.

    Peptide and disease embeddings are concatenated and passed through the
    two-layer scoring head; outputs lie in (0, 1).
    """
    n_peptides, n_microbes, n_diseases = counts
    pairs = np.asarray(pairs, dtype=np.int64)
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise ValueError(f"pairs must have shape (n, 2), got {pairs.shape}")
    if pairs.size:
        if pairs[:, 0].min() < 0 or pairs[:, 0].max() >= n_peptides:
            raise ValueError(f"peptide index outside [0, {n_peptides})")
        if pairs[:, 1].min() < 0 or pairs[:, 1].max() >= n_diseases:
            raise ValueError(f"disease index outside [0, {n_diseases})")
    offset = n_peptides + n_microbes
    z_p = T.slice_rows(z, pairs[:, 0])
    z_d = T.slice_rows(z, offset + pairs[:, 1])
    h = T.concat_columns(z_p, z_d)
    hidden = T.relu(T.add(T.matmul(h, params["pred.w1"]), params["pred.b1"]))
    return T.sigmoid(T.add(T.matmul(hidden, params["pred.w2"]), params["pred.b2"]))


def prediction_loss(y_hat, y):
    """Mean binary cross-entropy with clamped logs."""
    y = np.asarray(y, dtype=np.float64).reshape(-1, 1)
    if y_hat.data.shape != y.shape:
        raise ValueError(f"prediction_loss: got {y_hat.data.shape} scores for {y.shape} labels")
    n = y.shape[0]
    y_t = Tensor(y)
    pos_term = T.multiply(y_t, T.log(T.clamp_min(y_hat, LOG_CLAMP)))
    neg_term = T.multiply(Tensor(1.0 - y), T.log(T.clamp_min(_one_minus(y_hat), LOG_CLAMP)))
    total = T.sum_all(T.add(pos_term, neg_term))
    return T.multiply_scalar(total, -1.0 / n)


def total_loss(contrast, pred, lambda_weight):
    """Joint objective: contrastive term plus lambda-weighted prediction term."""
    if lambda_weight < 0:
        raise ValueError(f"lambda_weight must be >= 0, got {lambda_weight}")
    return T.add(contrast, T.multiply_scalar(pred, lambda_weight))


def training_loss(adjacency, adjacency_tilde, pairs, labels, params, lambda_weight,
                  counts, contrastive=True):
    """Full forward pass for one step; returns (loss, contrast value, pred value)."""
    embeddings = encode(adjacency, initial_features(adjacency), params)
    if contrastive:
        embeddings_tilde = encode(
            adjacency_tilde, initial_features(adjacency_tilde), params
        )
        contrast = contrastive_loss(embeddings, embeddings_tilde, params)
    else:
        contrast = Tensor(0.0)
    y_hat = predict_pairs(embeddings.z, pairs, params, counts)
    pred = prediction_loss(y_hat, labels)
    loss = total_loss(contrast, pred, lambda_weight)
    return loss, float(contrast.data), float(pred.data)
