"""Pure-Python restricted Damerau-Levenshtein kernel.

Fallback twin of the compiled `_editdist` extension.  Costs: insertion,
deletion, substitution and adjacent transposition are all 1.  The
transposition is the restricted kind: each character participates in at
most one swap, so the recurrence only consults the row two steps back.
"""

from __future__ import annotations


def char_dl_distance(a: str, b: str) -> int:
    """Restricted Damerau-Levenshtein distance between two strings."""
    la, lb = len(a), len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    two_ago: list[int] = [0] * (lb + 1)
    one_ago = list(range(lb + 1))
    cur = [0] * (lb + 1)
    for i in range(la):
        cur[0] = i + 1
        ai = a[i]
        for j in range(1, lb + 1):
            cost = 0 if ai == b[j - 1] else 1
            best = one_ago[j] + 1
            if cur[j - 1] + 1 < best:
                best = cur[j - 1] + 1
            if one_ago[j - 1] + cost < best:
                best = one_ago[j - 1] + cost
            if i > 0 and j > 1 and ai == b[j - 2] and a[i - 1] == b[j - 1]:
                if two_ago[j - 2] + 1 < best:
                    best = two_ago[j - 2] + 1
            cur[j] = best
        two_ago, one_ago, cur = one_ago, cur, two_ago
    return one_ago[lb]


def char_dl_distance_many(a: str, bs) -> list:
    """Distances from `a` to every string in `bs`."""
    return [char_dl_distance(a, b) for b in bs]
