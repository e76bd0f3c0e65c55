"""Entity ingestion: canonical identities, index assignment, association records."""

import csv
import logging
from dataclasses import dataclass, field

from .alignment import DEFAULT_PARAMS, local_identity
from .errors import ConfigError, IngestError

logger = logging.getLogger(__name__)

AMINO_ALPHABET = frozenset("ACDEFGHIKLMNPQRSTVWYX")
MIN_PEPTIDE_LENGTH = 2
MAX_PEPTIDE_LENGTH = 9

RELATION_PEPTIDE_MICROBE = "pm"
RELATION_PEPTIDE_DISEASE = "pd"
RELATION_MICROBE_DISEASE = "md"
RELATIONS = (RELATION_PEPTIDE_MICROBE, RELATION_PEPTIDE_DISEASE, RELATION_MICROBE_DISEASE)

PEPTIDE_HEADER = ("id", "sequence")
NAMED_HEADER = ("id", "name")
EDGE_HEADER = ("relation", "src_id", "dst_id")


@dataclass(frozen=True)
class RawAssociation:
    """One validated edge record; endpoint ids are already canonical."""

    relation: str
    src_id: str
    dst_id: str


@dataclass
class EntityRegistry:
    """Canonical peptides, microbes and diseases with dense index maps.

    ``peptide_aliases`` / ``microbe_aliases`` map ids that were merged or
    filtered away to their retained representative, so association tables
    referring to them still resolve. The finished registry is treated as
    immutable.
    """

    peptides: list = field(default_factory=list)  # (id, sequence)
    microbes: list = field(default_factory=list)  # (id, canonical name)
    diseases: list = field(default_factory=list)  # (id, name)
    peptide_aliases: dict = field(default_factory=dict)
    microbe_aliases: dict = field(default_factory=dict)

    def __post_init__(self):
        self._peptide_index = {pid: i for i, (pid, _) in enumerate(self.peptides)}
        self._microbe_index = {mid: i for i, (mid, _) in enumerate(self.microbes)}
        self._disease_index = {did: i for i, (did, _) in enumerate(self.diseases)}

    @property
    def n_peptides(self):
        return len(self.peptides)

    @property
    def n_microbes(self):
        return len(self.microbes)

    @property
    def n_diseases(self):
        return len(self.diseases)

    def _resolve(self, entity_id, index, aliases, kind):
        seen = set()
        current = entity_id
        while current not in index:
            if current in seen or current not in aliases:
                raise IngestError(f"unknown {kind} id {current!r}")
            seen.add(current)
            current = aliases[current]
        return current

    def resolve_peptide(self, peptide_id):
        return self._resolve(peptide_id, self._peptide_index, self.peptide_aliases, "peptide")

    def resolve_microbe(self, microbe_id):
        return self._resolve(microbe_id, self._microbe_index, self.microbe_aliases, "microbe")

    def resolve_disease(self, disease_id):
        return self._resolve(disease_id, self._disease_index, {}, "disease")

    def peptide_index(self, peptide_id):
        return self._peptide_index[self.resolve_peptide(peptide_id)]

    def microbe_index(self, microbe_id):
        return self._microbe_index[self.resolve_microbe(microbe_id)]

    def disease_index(self, disease_id):
        return self._disease_index[self.resolve_disease(disease_id)]


def canonicalize_microbe(name):
    """Collapse a microbe name to 'Genus species', trimming strain suffixes.

    Single-token names cannot be resolved to a binomial and are returned
    unchanged (logged).
    """
    if not name or not name.strip():
        raise IngestError("microbe name must be nonempty")
    tokens = name.split()
    if len(tokens) == 1:
        logger.info("microbe name %r has no species token; left unresolved", name)
        return name
    return f"{tokens[0].capitalize()} {tokens[1].lower()}"


def _read_table(path, expected_header):
    try:
        handle = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise IngestError(f"cannot open {path}: {exc}") from exc
    with handle:
        reader = csv.reader(handle, delimiter="\t")
        try:
            header = next(reader)
        except StopIteration:
            raise IngestError(f"{path}: missing header row") from None
        if tuple(header) != tuple(expected_header):
            raise IngestError(
                f"{path}: expected header {list(expected_header)}, got {header}"
            )
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(expected_header):
                raise IngestError(f"{path}:{line_no}: expected {len(expected_header)} columns")
            rows.append((line_no, [cell.strip() for cell in row]))
    return rows


def _load_peptides(path):
    peptides = []
    seen = set()
    dropped_length = 0
    for line_no, (pid, sequence) in _read_table(path, PEPTIDE_HEADER):
        if pid in seen:
            raise IngestError(f"{path}:{line_no}: duplicate peptide id {pid!r}")
        seen.add(pid)
        sequence = sequence.upper()
        for ch in sequence:
            if ch not in AMINO_ALPHABET:
                raise IngestError(
                    f"{path}:{line_no}: invalid residue {ch!r} in sequence for {pid!r}"
                )
        if not MIN_PEPTIDE_LENGTH <= len(sequence) <= MAX_PEPTIDE_LENGTH:
            dropped_length += 1
            continue
        peptides.append((pid, sequence))
    if dropped_length:
        logger.info(
            "dropped %d peptide(s) outside length [%d, %d]",
            dropped_length, MIN_PEPTIDE_LENGTH, MAX_PEPTIDE_LENGTH,
        )
    return peptides, dropped_length


def _load_microbes(path):
    microbes = []
    aliases = {}
    seen = set()
    by_name = {}
    merged = 0
    for line_no, (mid, raw_name) in _read_table(path, NAMED_HEADER):
        if mid in seen:
            raise IngestError(f"{path}:{line_no}: duplicate microbe id {mid!r}")
        seen.add(mid)
        if not raw_name:
            raise IngestError(f"{path}:{line_no}: empty microbe name for {mid!r}")
        name = canonicalize_microbe(raw_name)
        if name in by_name:
            # strain-level duplicate of an already-seen species
            aliases[mid] = by_name[name]
            merged += 1
            continue
        by_name[name] = mid
        microbes.append((mid, name))
    if merged:
        logger.info("merged %d strain-level microbe id(s) into species representatives", merged)
    return microbes, aliases, merged


def _load_named(path, kind):
    entries = []
    seen = set()
    for line_no, (eid, name) in _read_table(path, NAMED_HEADER):
        if eid in seen:
            raise IngestError(f"{path}:{line_no}: duplicate {kind} id {eid!r}")
        seen.add(eid)
        if not name:
            raise IngestError(f"{path}:{line_no}: empty {kind} name for {eid!r}")
        entries.append((eid, name))
    return entries


def load_entities(peptide_table, microbe_table, disease_table):
    """Read the three entity tables into a validated registry.

    Peptides outside the retained length range are dropped (counted in the
    log); microbe names are canonicalized and strain-level duplicates merge
    into the first id carrying the species name.
    """
    peptides, _ = _load_peptides(peptide_table)
    microbes, microbe_aliases, _ = _load_microbes(microbe_table)
    diseases = _load_named(disease_table, "disease")
    return EntityRegistry(
        peptides=peptides,
        microbes=microbes,
        diseases=diseases,
        microbe_aliases=microbe_aliases,
    )


def redundancy_filter(registry, threshold, params=DEFAULT_PARAMS):
    """Drop near-duplicate peptides by greedy normalized-identity filtering.

    Peptides are considered longest first (ties keep input order); a peptide
    is dropped when its normalized identity to an already-retained peptide
    exceeds ``threshold`` and is thereafter remapped to that representative.
    Retained peptides keep their input order, so index order is unchanged.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ConfigError(f"redundancy threshold must be in [0, 1], got {threshold}")
    order = sorted(range(len(registry.peptides)), key=lambda i: -len(registry.peptides[i][1]))
    retained_in_pass_order = []
    keep = [False] * len(registry.peptides)
    new_aliases = dict(registry.peptide_aliases)
    for i in order:
        pid, seq = registry.peptides[i]
        representative = None
        for rid, rseq in retained_in_pass_order:
            if local_identity(seq, rseq, params) > threshold:
                representative = rid
                break
        if representative is None:
            retained_in_pass_order.append((pid, seq))
            keep[i] = True
        else:
            new_aliases[pid] = representative
            logger.info("peptide %s dropped as redundant with %s", pid, representative)
    # re-point pre-existing aliases that now reach a dropped peptide
    retained_ids = {pid for i, (pid, _) in enumerate(registry.peptides) if keep[i]}
    for alias, target in list(new_aliases.items()):
        seen = {alias}
        while target not in retained_ids:
            if target in seen or target not in new_aliases:
                break
            seen.add(target)
            target = new_aliases[target]
        new_aliases[alias] = target
    return EntityRegistry(
        peptides=[p for flag, p in zip(keep, registry.peptides) if flag],
        microbes=list(registry.microbes),
        diseases=list(registry.diseases),
        peptide_aliases=new_aliases,
        microbe_aliases=dict(registry.microbe_aliases),
    )


_RELATION_RESOLVERS = {
    RELATION_PEPTIDE_MICROBE: ("resolve_peptide", "resolve_microbe"),
    RELATION_PEPTIDE_DISEASE: ("resolve_peptide", "resolve_disease"),
    RELATION_MICROBE_DISEASE: ("resolve_microbe", "resolve_disease"),
}


def load_associations(edge_table, registry):
    """Read and resolve the edge table; duplicate rows collapse to one record."""
    records = []
    seen = set()
    for line_no, (relation, src_id, dst_id) in _read_table(edge_table, EDGE_HEADER):
        if relation not in RELATIONS:
            raise IngestError(f"{edge_table}:{line_no}: unknown relation tag {relation!r}")
        src_resolver, dst_resolver = _RELATION_RESOLVERS[relation]
        try:
            src = getattr(registry, src_resolver)(src_id)
            dst = getattr(registry, dst_resolver)(dst_id)
        except IngestError as exc:
            raise IngestError(f"{edge_table}:{line_no}: {exc}") from None
        key = (relation, src, dst)
        if key in seen:
            continue
        seen.add(key)
        records.append(RawAssociation(relation=relation, src_id=src, dst_id=dst))
    return records
