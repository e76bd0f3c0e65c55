"""Association matrices and the unified heterogeneous adjacency."""

import zipfile
from dataclasses import dataclass

import numpy as np

from .entities import RELATION_MICROBE_DISEASE, RELATION_PEPTIDE_DISEASE, RELATION_PEPTIDE_MICROBE
from .errors import GraphFormatError
from .validation import check_binary

GRAPH_FORMAT_VERSION = 1

NODE_TYPES = ("peptide", "microbe", "disease")


@dataclass
class AssociationStore:
    """The three binary relation matrices, shaped by the registry counts."""

    a_pm: np.ndarray  # peptides x microbes
    a_pd: np.ndarray  # peptides x diseases
    a_md: np.ndarray  # microbes x diseases

    def __post_init__(self):
        self.a_pm = check_binary(self.a_pm, "a_pm")
        self.a_pd = check_binary(self.a_pd, "a_pd")
        self.a_md = check_binary(self.a_md, "a_md")
        if self.a_pm.shape[0] != self.a_pd.shape[0]:
            raise ValueError("a_pm and a_pd disagree on the peptide count")
        if self.a_pm.shape[1] != self.a_md.shape[0]:
            raise ValueError("a_pm and a_md disagree on the microbe count")
        if self.a_pd.shape[1] != self.a_md.shape[1]:
            raise ValueError("a_pd and a_md disagree on the disease count")


@dataclass
class HeteroGraph:
    """Dense block adjacency over peptide, microbe and disease nodes."""

    adjacency: np.ndarray
    n_peptides: int
    n_microbes: int
    n_diseases: int

    def __post_init__(self):
        side = self.n_peptides + self.n_microbes + self.n_diseases
        if self.adjacency.shape != (side, side):
            raise ValueError(
                f"adjacency shape {self.adjacency.shape} does not match node counts "
                f"({self.n_peptides}, {self.n_microbes}, {self.n_diseases})"
            )

    @property
    def node_count(self):
        return self.n_peptides + self.n_microbes + self.n_diseases

    @property
    def peptide_range(self):
        return range(0, self.n_peptides)

    @property
    def microbe_range(self):
        return range(self.n_peptides, self.n_peptides + self.n_microbes)

    @property
    def disease_range(self):
        return range(self.n_peptides + self.n_microbes, self.node_count)

    def node_types(self):
        """Integer type label per global node index (0=peptide, 1=microbe, 2=disease)."""
        labels = np.empty(self.node_count, dtype=np.int64)
        labels[: self.n_peptides] = 0
        labels[self.n_peptides : self.n_peptides + self.n_microbes] = 1
        labels[self.n_peptides + self.n_microbes :] = 2
        return labels

    def peptide_similarity(self):
        return self.adjacency[: self.n_peptides, : self.n_peptides]

    def association_store(self):
        """Recover the binary association blocks from the adjacency."""
        p, m = self.n_peptides, self.n_microbes
        return AssociationStore(
            a_pm=self.adjacency[:p, p : p + m].copy(),
            a_pd=self.adjacency[:p, p + m :].copy(),
            a_md=self.adjacency[p : p + m, p + m :].copy(),
        )


def build_association_store(records, registry):
    """Set one matrix cell per record; repeated pairs stay binary."""
    a_pm = np.zeros((registry.n_peptides, registry.n_microbes))
    a_pd = np.zeros((registry.n_peptides, registry.n_diseases))
    a_md = np.zeros((registry.n_microbes, registry.n_diseases))
    for record in records:
        if record.relation == RELATION_PEPTIDE_MICROBE:
            a_pm[registry.peptide_index(record.src_id), registry.microbe_index(record.dst_id)] = 1.0
        elif record.relation == RELATION_PEPTIDE_DISEASE:
            a_pd[registry.peptide_index(record.src_id), registry.disease_index(record.dst_id)] = 1.0
        elif record.relation == RELATION_MICROBE_DISEASE:
            a_md[registry.microbe_index(record.src_id), registry.disease_index(record.dst_id)] = 1.0
        else:
            raise ValueError(f"unknown relation {record.relation!r}")
    return AssociationStore(a_pm=a_pm, a_pd=a_pd, a_md=a_md)


def _require_shape(matrix, shape, block):
    if matrix.shape != shape:
        raise ValueError(f"block {block}: expected shape {shape}, got {matrix.shape}")


def assemble_hetero_adjacency(s_p, s_m, s_d, store):
    """Lay the similarity blocks on the diagonal and association blocks off it.

    Symmetry is exact by construction: each association block is mirrored by
    its transpose and similarity inputs must already be exactly symmetric.
    """
    n_p, n_m = store.a_pm.shape
    n_d = store.a_pd.shape[1]
    _require_shape(s_p.values, (n_p, n_p), "S_p")
    _require_shape(s_m.values, (n_m, n_m), "S_m")
    _require_shape(s_d.values, (n_d, n_d), "S_d")
    for sim, name in ((s_p, "S_p"), (s_m, "S_m"), (s_d, "S_d")):
        if not np.array_equal(sim.values, sim.values.T):
            raise ValueError(f"block {name}: must be exactly symmetric")
    side = n_p + n_m + n_d
    adjacency = np.zeros((side, side))
    p, m = n_p, n_p + n_m
    adjacency[:p, :p] = s_p.values
    adjacency[p:m, p:m] = s_m.values
    adjacency[m:, m:] = s_d.values
    adjacency[:p, p:m] = store.a_pm
    adjacency[p:m, :p] = store.a_pm.T
    adjacency[:p, m:] = store.a_pd
    adjacency[m:, :p] = store.a_pd.T
    adjacency[p:m, m:] = store.a_md
    adjacency[m:, p:m] = store.a_md.T
    return HeteroGraph(adjacency=adjacency, n_peptides=n_p, n_microbes=n_m, n_diseases=n_d)


def save_graph(path, graph, peptide_ids, microbe_ids, disease_ids):
    """Serialize the graph plus node ids; the format is versioned."""
    np.savez(
        path,
        format_version=np.int64(GRAPH_FORMAT_VERSION),
        adjacency=graph.adjacency,
        n_peptides=np.int64(graph.n_peptides),
        n_microbes=np.int64(graph.n_microbes),
        n_diseases=np.int64(graph.n_diseases),
        peptide_ids=np.asarray(peptide_ids, dtype=np.str_),
        microbe_ids=np.asarray(microbe_ids, dtype=np.str_),
        disease_ids=np.asarray(disease_ids, dtype=np.str_),
    )


def load_graph(path):
    """Read a saved graph; returns (HeteroGraph, {type: id list})."""
    try:
        with np.load(path, allow_pickle=False) as data:
            if "format_version" not in data.files:
                raise GraphFormatError(f"{path}: not a graph file (no format_version)")
            version = int(data["format_version"])
            if version != GRAPH_FORMAT_VERSION:
                raise GraphFormatError(
                    f"{path}: unsupported graph format version {version} "
                    f"(expected {GRAPH_FORMAT_VERSION})"
                )
            graph = HeteroGraph(
                adjacency=data["adjacency"],
                n_peptides=int(data["n_peptides"]),
                n_microbes=int(data["n_microbes"]),
                n_diseases=int(data["n_diseases"]),
            )
            ids = {
                "peptide": [str(x) for x in data["peptide_ids"]],
                "microbe": [str(x) for x in data["microbe_ids"]],
                "disease": [str(x) for x in data["disease_ids"]],
            }
    except (OSError, zipfile.BadZipFile, ValueError, KeyError) as exc:
        raise GraphFormatError(f"{path}: cannot read graph file: {exc}") from exc
    return graph, ids


def write_node_manifest(path, peptide_ids, microbe_ids, disease_ids):
    """TSV of (global_index, type, id) in block order."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write("global_index\ttype\tid\n")
        index = 0
        for type_name, ids in zip(NODE_TYPES, (peptide_ids, microbe_ids, disease_ids)):
            for entity_id in ids:
                handle.write(f"{index}\t{type_name}\t{entity_id}\n")
                index += 1


def write_adjacency_csv(path, graph):
    """Full-precision CSV dump of the adjacency for debugging."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        for row in graph.adjacency:
            handle.write(",".join(repr(float(v)) for v in row) + "\n")
