"""Independent reference implementations used only to cross-check the package.

Nothing here shares code with src/triplink; these are deliberately slow,
brute-force formulations.
"""

import numpy as np

_SUB, _GAP_IN_A, _GAP_IN_B = 0, 1, 2


def _column_score(x, y, match, mismatch):
    # 'X' is an unknown residue and never matches, not even itself
    if x == y and x != "X":
        return match, 1
    return mismatch, 0


def enumerate_local_alignment(a, b, match, mismatch, gap_open, gap_extend):
    """Best local alignment by explicit enumeration of every alignment.

    A local alignment is a non-empty column sequence that starts and ends
    with an aligned residue pair; interior gap columns pay ``gap_open`` when
    opening and ``gap_extend`` when continuing a same-direction gap run.
    Returns ``(score, matches)`` where ``matches`` is the largest number of
    identical aligned pairs among all score-optimal alignments.
    """
    n, m = len(a), len(b)
    best = (0.0, 0)

    def walk(i, j, score, matches, last):
        nonlocal best
        if last == _SUB and (score, matches) > best:
            best = (score, matches)
        if i < n and j < m:
            s, hit = _column_score(a[i], b[j], match, mismatch)
            walk(i + 1, j + 1, score + s, matches + hit, _SUB)
        if j < m:
            cost = gap_extend if last == _GAP_IN_A else gap_open
            walk(i, j + 1, score + cost, matches, _GAP_IN_A)
        if i < n:
            cost = gap_extend if last == _GAP_IN_B else gap_open
            walk(i + 1, j, score + cost, matches, _GAP_IN_B)

    for i in range(n):
        for j in range(m):
            s, hit = _column_score(a[i], b[j], match, mismatch)
            walk(i + 1, j + 1, float(s), hit, _SUB)
    return best


def finite_difference_gradient(f, x, step=1e-5):
    """Central finite differences of a scalar function w.r.t. array x.

    ``f`` takes no arguments and must read ``x`` in place (x is mutated and
    restored entry by entry).
    """
    grad = np.zeros_like(x)
    flat_x = x.reshape(-1)
    flat_g = grad.reshape(-1)
    for k in range(flat_x.size):
        orig = flat_x[k]
        flat_x[k] = orig + step
        up = f()
        flat_x[k] = orig - step
        down = f()
        flat_x[k] = orig
        flat_g[k] = (up - down) / (2.0 * step)
    return grad


def relative_error(got, want):
    denom = max(np.linalg.norm(got), np.linalg.norm(want), 1e-12)
    return np.linalg.norm(got - want) / denom


def brute_force_auroc(scores, labels):
    """Probability a random positive outranks a random negative, ties 1/2."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    if pos.size == 0 or neg.size == 0:
        return None
    wins = 0.0
    for sp in pos:
        for sn in neg:
            if sp > sn:
                wins += 1.0
            elif sp == sn:
                wins += 0.5
    return wins / (pos.size * neg.size)


def brute_force_confusion(scores, labels, threshold):
    tp = fp = tn = fn = 0
    for s, y in zip(scores, labels):
        predicted = s >= threshold
        if predicted and y == 1:
            tp += 1
        elif predicted and y == 0:
            fp += 1
        elif not predicted and y == 0:
            tn += 1
        else:
            fn += 1
    return tp, fp, tn, fn
