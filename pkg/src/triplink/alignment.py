"""Smith-Waterman local alignment with affine gap costs (Gotoh recurrences)."""

from dataclasses import dataclass

NEG_INF = float("-inf")


@dataclass(frozen=True)
class AlignmentParams:
    """Scoring constants for local alignment.

    Gap runs cost ``gap_open`` for the first gapped position and
    ``gap_extend`` for each further position in the same run.
    """

    match: float = 2.0
    mismatch: float = -1.0
    gap_open: float = -2.0
    gap_extend: float = -1.0

    def __post_init__(self):
        if self.match <= 0:
            raise ValueError(f"match score must be positive, got {self.match}")
        if self.mismatch > 0:
            raise ValueError(f"mismatch score must be <= 0, got {self.mismatch}")
        if self.gap_open > 0 or self.gap_extend > 0:
            raise ValueError("gap costs must be <= 0")


DEFAULT_PARAMS = AlignmentParams()


def substitution_score(x, y, params):
    # 'X' marks an unknown residue and never matches, not even itself
    if x == y and x != "X":
        return params.match
    return params.mismatch


def _dp(a, b, params):
    """Affine-gap local alignment over (score, matches) pairs.

    Tuples are compared lexicographically, so the result is the optimal
    score together with the largest match count among score-optimal
    alignments. Alignments end on an aligned pair; trailing gaps can never
    raise the score because gap costs are non-positive.
    """
    if not a or not b:
        raise ValueError("alignment requires nonempty sequences")
    n, m = len(a), len(b)
    none = (NEG_INF, 0)
    zero = (0.0, 0)
    # h: last column aligns a[i-1] with b[j-1]
    # e: last column is a gap in `a` (consumes b[j-1])
    # f: last column is a gap in `b` (consumes a[i-1])
    h = [[none] * (m + 1) for _ in range(n + 1)]
    e = [[none] * (m + 1) for _ in range(n + 1)]
    f = [[none] * (m + 1) for _ in range(n + 1)]
    go, ge = params.gap_open, params.gap_extend
    best = zero
    for i in range(1, n + 1):
        ai = a[i - 1]
        for j in range(1, m + 1):
            s = substitution_score(ai, b[j - 1], params)
            hit = 1 if (ai == b[j - 1] and ai != "X") else 0
            prev = max(zero, h[i - 1][j - 1], e[i - 1][j - 1], f[i - 1][j - 1])
            hij = (prev[0] + s, prev[1] + hit)
            h[i][j] = hij
            e[i][j] = max(
                (h[i][j - 1][0] + go, h[i][j - 1][1]),
                (e[i][j - 1][0] + ge, e[i][j - 1][1]),
                (f[i][j - 1][0] + go, f[i][j - 1][1]),
            )
            f[i][j] = max(
                (h[i - 1][j][0] + go, h[i - 1][j][1]),
                (f[i - 1][j][0] + ge, f[i - 1][j][1]),
                (e[i - 1][j][0] + go, e[i - 1][j][1]),
            )
            if hij > best:
                best = hij
    return best


def smith_waterman_score(a, b, params=DEFAULT_PARAMS):
    """Maximum local alignment score over all alignment paths (never < 0)."""
    return _dp(a, b, params)[0]


def local_identity(a, b, params=DEFAULT_PARAMS):
    """Normalized identity: matches in the optimal local alignment / shorter length.

    When several alignments share the optimal score, the largest match count
    among them is used.
    """
    _, matches = _dp(a, b, params)
    return matches / min(len(a), len(b))
