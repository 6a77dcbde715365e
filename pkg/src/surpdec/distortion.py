"""Distortion between an input sentence and a candidate representation.

Two components, kept separate so candidate sets can be reused across
different semantic weights:

* form distance: character-level restricted Damerau-Levenshtein edits,
  with whole-word transpositions tried first.  A word swap over gap
  j - i costs j - i, swaps are limited to gaps of at most 7 positions,
  and at most two swaps are searched exhaustively before the character
  edits are charged on the rearranged string.
* semantic distance: one minus embedding cosine.  When the two
  sentences differ in exactly one aligned word the differing words are
  embedded (trailing punctuation stripped); otherwise the full
  sentences are.

`total_distortion` combines them as form + semantic_scale * semantic.
"""

from __future__ import annotations

import numpy as np

from surpdec.editdist import char_dl_distance
from surpdec.errors import ZeroNormEmbedding

MAX_SWAP_GAP = 7
MAX_SWAPS = 2

_TRAILING_PUNCT = ".,;:!?…\"')"


def form_distance(w: str, x: str) -> float:
    """Minimal swap-then-edit cost transforming `w` into `x`."""
    best = char_dl_distance(w, x)
    if best == 0:
        return 0.0
    words = w.split()
    n = len(words)
    len_x = len(x)
    swaps = [
        (i, j, j - i)
        for i in range(n - 1)
        for j in range(i + 1, min(n, i + MAX_SWAP_GAP + 1))
    ]
    for i, j, cost in swaps:
        if cost >= best:
            continue
        once = words.copy()
        once[i], once[j] = once[j], once[i]
        s1 = " ".join(once)
        if cost + abs(len(s1) - len_x) < best:
            best = min(best, cost + char_dl_distance(s1, x))
        if MAX_SWAPS < 2:
            continue
        for k, l, cost2 in swaps:
            total = cost + cost2
            if total >= best:
                continue
            twice = once.copy()
            twice[k], twice[l] = twice[l], twice[k]
            s2 = " ".join(twice)
            if total + abs(len(s2) - len_x) >= best:
                continue
            best = min(best, total + char_dl_distance(s2, x))
    return float(best)


def strip_trailing_punct(word: str) -> str:
    """Drop trailing punctuation unless that would empty the token."""
    stripped = word.rstrip(_TRAILING_PUNCT)
    return stripped if stripped else word


def align_word_pair(w: str, x: str):
    """The single differing word pair, or None when alignment fails.

    Alignment succeeds only when both sentences have the same number of
    whitespace tokens and exactly one position differs.
    """
    wt = w.split()
    xt = x.split()
    if len(wt) != len(xt):
        return None
    diffs = [i for i, (a, b) in enumerate(zip(wt, xt)) if a != b]
    if len(diffs) != 1:
        return None
    i = diffs[0]
    return wt[i], xt[i]


def cosine_distance(u: np.ndarray, v: np.ndarray) -> float:
    """1 - cos(u, v), clipped into [0, 2]."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu < 1e-12 or nv < 1e-12:
        raise ZeroNormEmbedding(f"embedding norm too small: {min(nu, nv)!r}")
    return float(np.clip(1.0 - float(np.dot(u, v)) / (nu * nv), 0.0, 2.0))


def semantic_distance(w: str, x: str, embedder) -> float:
    """Embedding cosine distance between `w` and `x`.

    `embedder` is anything with an `embed(text) -> vector` method (a
    scoring backend or a word-vector table).
    """
    if w == x:
        return 0.0
    pair = align_word_pair(w, x)
    if pair is not None:
        a, b = strip_trailing_punct(pair[0]), strip_trailing_punct(pair[1])
        if a == b:
            return 0.0
        return cosine_distance(embedder.embed(a), embedder.embed(b))
    return cosine_distance(embedder.embed(w), embedder.embed(x))


def distortion_components(w: str, x: str, embedder) -> tuple[float, float]:
    """(form, semantic) distances between `w` and `x`."""
    return form_distance(w, x), semantic_distance(w, x, embedder)


def total_distortion(w: str, x: str, embedder, semantic_scale: float = 8.0) -> float:
    """Combined distortion form + semantic_scale * semantic."""
    form, sem = distortion_components(w, x, embedder)
    return form + semantic_scale * sem
