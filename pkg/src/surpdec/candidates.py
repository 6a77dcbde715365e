"""Candidate-set construction.

Three strategies for deciding which alternative readings enter the
policy's support: ingest whole-sentence corrections from a file, pair
each experimental sentence with its minimal control counterpart, or
pool lexical neighbors of the target word (phonological, semantic,
contextual) and substitute them at the target position.

All three share the same shape: build Candidate rows with backend
priors and distortion components against the veridical sentence, then
push them through `validate_candidate_set`, which deduplicates and
enforces the structural invariants.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from surpdec.distortion import (
    _TRAILING_PUNCT,
    cosine_distance,
    distortion_components,
    strip_trailing_punct,
)
from surpdec.editdist import char_dl_distance_many
from surpdec.errors import (
    ContextMismatch,
    MissingEntry,
    SchemaError,
    UnknownItemId,
    UnpairedItem,
)
from surpdec.types import (
    Candidate,
    CandidateSet,
    Generator,
    Stimulus,
    validate_candidate_set,
)

MAX_LEXICON_SIZE = 60000


@dataclass(frozen=True)
class Lexicon:
    """Frequency-ranked word list; rank 1 is the most frequent word."""

    entries: tuple[tuple[str, int], ...]

    def __post_init__(self):
        if len(self.entries) > MAX_LEXICON_SIZE:
            raise SchemaError(
                f"lexicon has {len(self.entries)} entries, cap is {MAX_LEXICON_SIZE}"
            )
        seen_ranks = set()
        for word, rank in self.entries:
            if word != word.lower():
                raise SchemaError(f"lexicon word {word!r} is not lowercase")
            if rank in seen_ranks:
                raise SchemaError(f"duplicate lexicon rank {rank}")
            seen_ranks.add(rank)

    @classmethod
    def load(cls, path) -> "Lexicon":
        """Read a 2-column (word, rank) TSV, lowercasing words.

        Case-folded duplicates keep their best rank.
        """
        best: dict[str, int] = {}
        with open(path, encoding="utf-8", newline="") as f:
            for lineno, row in enumerate(csv.reader(f, delimiter="\t"), start=1):
                if not row or (len(row) == 1 and not row[0].strip()):
                    continue
                if len(row) != 2:
                    raise SchemaError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
                word = row[0].strip().lower()
                try:
                    rank = int(row[1])
                except ValueError:
                    raise SchemaError(f"{path}:{lineno}: rank {row[1]!r} is not an integer") from None
                if not word:
                    raise SchemaError(f"{path}:{lineno}: empty word")
                if word not in best or rank < best[word]:
                    best[word] = rank
        entries = tuple(sorted(best.items(), key=lambda e: e[1]))
        return cls(entries=entries)

    @property
    def words(self) -> list[str]:
        return [w for w, _ in self.entries]

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, word: str) -> bool:
        return any(w == word for w, _ in self.entries)


@dataclass(frozen=True)
class SamplerConfig:
    """Pool sizes for the three neighbor sources."""

    n_phonological: int = 100
    n_semantic: int = 100
    n_contextual: int = 100

    def __post_init__(self):
        for name in ("n_phonological", "n_semantic", "n_contextual"):
            v = getattr(self, name)
            if v < 1:
                raise ValueError(f"{name} must be >= 1, got {v}")


def _score_sentence(stimulus: Stimulus, sentence: str, lm) -> float:
    """Prior logprob of a candidate sentence.

    A candidate that keeps the stimulus context is scored as its
    continuation; a whole-sentence rewrite is scored unconditionally.
    """
    if stimulus.context and sentence.startswith(stimulus.context + " "):
        return lm.logprob(stimulus.context, " " + sentence[len(stimulus.context) + 1 :])
    return lm.logprob("", sentence)


def _candidate(stimulus: Stimulus, sentence: str, lm, embedder, veridical: bool) -> Candidate:
    if veridical:
        form, sem = 0.0, 0.0
    else:
        form, sem = distortion_components(sentence, stimulus.sentence, embedder)
    return Candidate(
        text=sentence,
        prior_logprob=_score_sentence(stimulus, sentence, lm),
        form_distance=form,
        semantic_distance=sem,
        is_veridical=veridical,
    )


def _repair_final_punct(correction: str, veridical: str) -> str:
    """Carry the veridical sentence's final punctuation onto a correction."""
    tail = veridical[len(veridical.rstrip(_TRAILING_PUNCT)) :]
    if tail and correction and correction[-1] not in _TRAILING_PUNCT:
        return correction + tail
    return correction


def ingest_external(
    corrections: Mapping[str, Sequence[str]],
    stimuli: Sequence[Stimulus],
    lm,
    embedder=None,
) -> dict[str, CandidateSet]:
    """Candidate sets from pre-generated whole-sentence corrections.

    `corrections` maps item ids to correction sentences.  Each listed
    stimulus gets a set of its corrections plus the veridical sentence;
    stimuli without an entry are omitted.  Ids that match no stimulus
    raise UnknownItemId.
    """
    embedder = embedder if embedder is not None else lm
    by_id = {s.item_id: s for s in stimuli}
    unknown = sorted(set(corrections) - set(by_id))
    if unknown:
        raise UnknownItemId(f"corrections for unknown item ids: {', '.join(unknown)}")
    sets = {}
    for stimulus in stimuli:
        if stimulus.item_id not in corrections:
            continue
        rows = [_candidate(stimulus, stimulus.sentence, lm, embedder, veridical=True)]
        for text in corrections[stimulus.item_id]:
            sentence = _repair_final_punct(text.strip(), stimulus.sentence)
            rows.append(_candidate(stimulus, sentence, lm, embedder, veridical=False))
        sets[stimulus.item_id] = validate_candidate_set(
            stimulus.item_id, rows, Generator.EXTERNAL
        )
    return sets


def control_counterpart(
    stimuli: Sequence[Stimulus],
    lm,
    embedder=None,
) -> dict[str, CandidateSet]:
    """Minimal candidate sets pairing each item with its counterpart.

    An experimental item competes with its control sentence; a control
    item competes with every experimental sentence paired to it, which
    reduces to the usual two-candidate set when the pairing is 1:1.
    Contexts must match exactly within a pair.
    """
    embedder = embedder if embedder is not None else lm
    by_id = {s.item_id: s for s in stimuli}
    siblings: dict[str, list[Stimulus]] = {}
    for s in stimuli:
        if not s.is_control:
            siblings.setdefault(s.control_item_id, []).append(s)

    def check_context(a: Stimulus, b: Stimulus):
        if a.context != b.context:
            raise ContextMismatch(
                f"{a.item_id} and {b.item_id} have different contexts"
            )

    sets = {}
    for stimulus in stimuli:
        if stimulus.is_control:
            rivals = siblings.get(stimulus.item_id, [])
            if not rivals:
                raise UnpairedItem(f"{stimulus.item_id}: no experimental item pairs it")
        else:
            control = by_id.get(stimulus.control_item_id)
            if control is None:
                raise UnpairedItem(
                    f"{stimulus.item_id}: control {stimulus.control_item_id!r} not in dataset"
                )
            rivals = [control]
        rows = [_candidate(stimulus, stimulus.sentence, lm, embedder, veridical=True)]
        for rival in rivals:
            check_context(stimulus, rival)
            rows.append(_candidate(stimulus, rival.sentence, lm, embedder, veridical=False))
        sets[stimulus.item_id] = validate_candidate_set(
            stimulus.item_id, rows, Generator.COUNTERPART
        )
    return sets


def _embeddable(words: Sequence[str], embedder) -> list[str]:
    """Words the embedder can serve; table-backed embedders may skip some."""
    if hasattr(embedder, "__contains__"):
        return [w for w in words if w in embedder]
    usable = []
    for w in words:
        try:
            embedder.embed(w)
        except MissingEntry:
            continue
        usable.append(w)
    return usable


def _is_clean_word(token: str) -> bool:
    t = token.strip()
    return bool(t) and not any(ch.isspace() for ch in t)


def multiple_sampler(
    stimulus: Stimulus,
    lexicon: Lexicon,
    lm,
    config: Optional[SamplerConfig] = None,
    word_vectors=None,
) -> CandidateSet:
    """Candidate set pooled from three neighbor sources of the target.

    Phonological neighbors are the lexicon words closest in character
    edit distance (ties by frequency rank, then alphabetically),
    semantic neighbors the closest in embedding cosine distance, and
    contextual neighbors the backend's most probable next words.  Each
    pooled word replaces the target, keeping its trailing punctuation.
    """
    config = config or SamplerConfig()
    embedder = word_vectors if word_vectors is not None else lm
    core = strip_trailing_punct(stimulus.target)
    trailing = stimulus.target[len(core) :]
    lower_core = core.lower()

    words = lexicon.words
    ranks = dict(lexicon.entries)
    dists = char_dl_distance_many(lower_core, words)
    by_form = sorted(zip(dists, words), key=lambda p: (p[0], ranks[p[1]], p[1]))
    phonological = [w for _, w in by_form[: config.n_phonological]]

    pool = _embeddable(words, embedder)
    target_vec = embedder.embed(lower_core)
    sem_dist = {w: cosine_distance(target_vec, embedder.embed(w)) for w in pool}
    semantic = sorted(pool, key=lambda w: (sem_dist[w], ranks[w], w))
    semantic = semantic[: config.n_semantic]

    # the backend ranks tokens; keep the first clean single words
    raw_topk = lm.topk(stimulus.context, 4 * config.n_contextual)
    contextual = [t.strip() for t, _ in raw_topk if _is_clean_word(t)]
    contextual = contextual[: config.n_contextual]

    stem = stimulus.continuation[: -len(stimulus.target)]
    seen = set()
    rows = []
    for word in [*phonological, *semantic, *contextual]:
        if word in seen:
            continue
        seen.add(word)
        continuation = stem + word + trailing
        sentence = (
            stimulus.context + " " + continuation if stimulus.context else continuation
        )
        rows.append(_candidate(stimulus, sentence, lm, embedder, veridical=False))
    rows.append(_candidate(stimulus, stimulus.sentence, lm, embedder, veridical=True))
    return validate_candidate_set(stimulus.item_id, rows, Generator.SAMPLER)
