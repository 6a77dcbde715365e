"""Causal language models behind a tiny uniform scoring interface.

Two implementations live here.  ``ByteLm`` is a deterministically
initialised byte-level transformer that ships with the service: it needs
no downloads, loads in well under a second, and gives every byte string
a finite log-probability.  Its weights are random, so the numbers carry
no linguistic signal, but every contract the wire protocol promises
(nats, chain rule, normalisation, determinism) holds exactly.  ``HubLm``
wraps any locally available pretrained checkpoint for real use.

All scores are natural-log probabilities computed in float64 on CPU.
"""

from __future__ import annotations

import math

import torch
from torch.nn.functional import log_softmax

BUILTIN_MODEL_ID = "builtin:tiny"

# Weight-init seed for the builtin model.  Fixed forever: clients
# compare scores across service restarts.
_BUILTIN_SEED = 7


class ModelLoadError(Exception):
    """The requested model could not be constructed or fetched."""


class ByteLm:
    """Byte-level causal transformer with frozen random weights.

    Text maps to its UTF-8 bytes, one token per byte, with a BOS token
    prepended so that the first byte is itself conditioned on something.
    Vocabulary is the 256 byte values plus BOS.  The architecture is a
    miniature GPT-2 stack; weights come from a seeded initialiser and
    are never trained.
    """

    def __init__(self) -> None:
        # Imported lazily so that a missing transformers install fails
        # here with a clear error rather than at module import.
        try:
            from transformers import GPT2Config, GPT2LMHeadModel
        except ImportError as exc:  # pragma: no cover
            raise ModelLoadError(f"transformers is not available: {exc}")

        self.model_id = BUILTIN_MODEL_ID
        self._bos = 256
        n_positions = 512
        config = GPT2Config(
            vocab_size=257,
            n_positions=n_positions,
            n_embd=32,
            n_layer=2,
            n_head=2,
            bos_token_id=self._bos,
            eos_token_id=self._bos,
            attn_pdrop=0.0,
            embd_pdrop=0.0,
            resid_pdrop=0.0,
        )
        torch.manual_seed(_BUILTIN_SEED)
        self._model = GPT2LMHeadModel(config).double().eval()
        for p in self._model.parameters():
            p.requires_grad_(False)
        # One position is spent on BOS.
        self.max_bytes = n_positions - 1
        self.hidden_size = 32
        self.vocab_size = 257

    def _ids(self, text: str) -> list[int]:
        return list(text.encode("utf-8"))

    def _forward(self, ids: list[int]) -> torch.Tensor:
        """Log-probability table, one row per position, over the vocab."""
        x = torch.tensor([[self._bos] + ids], dtype=torch.long)
        with torch.no_grad():
            logits = self._model(x).logits[0]
        return log_softmax(logits, dim=-1)

    def score(self, context: str, continuation: str) -> float:
        """Sum of next-byte log-probabilities for ``continuation``.

        An empty continuation scores exactly 0.0 (the probability of
        adding nothing is one) and skips the forward pass.
        """
        cont = self._ids(continuation)
        if not cont:
            return 0.0
        ctx = self._ids(context)
        table = self._forward(ctx + cont)
        # Row i of the table conditions on everything up to and
        # including token i of [BOS] + ids, so the byte at position j
        # of ids is predicted by row j.
        total = 0.0
        for j in range(len(ctx), len(ctx) + len(cont)):
            total += float(table[j, (ctx + cont)[j]])
        return total

    def score_many(self, context: str, continuations: list[str]) -> list[float]:
        return [self.score(context, c) for c in continuations]

    def embed(self, text: str) -> list[float]:
        """Mean of the final hidden states over [BOS] + bytes."""
        ids = self._ids(text)
        x = torch.tensor([[self._bos] + ids], dtype=torch.long)
        with torch.no_grad():
            out = self._model(x, output_hidden_states=True)
        vec = out.hidden_states[-1][0].mean(dim=0)
        return [float(v) for v in vec]

    def next_logprobs(self, context: str) -> torch.Tensor:
        """Distribution over the next token given ``context``."""
        ids = self._ids(context)
        table = self._forward(ids)
        return table[len(ids)]

    def topk(self, context: str, k: int) -> list[tuple[str, float]]:
        """Most probable next bytes, best first.

        BOS never appears mid-string, so it is excluded.  Bytes decode
        through latin-1, which maps every value to a distinct one-char
        string, keeping the (score, token) sort free of collisions.
        """
        row = self.next_logprobs(context)
        entries = [
            (bytes([b]).decode("latin-1"), float(row[b])) for b in range(256)
        ]
        entries.sort(key=lambda e: (-e[1], e[0]))
        return entries[:k]

    def info(self) -> dict:
        return {
            "model_id": self.model_id,
            "kind": "byte-level transformer, frozen random weights",
            "vocab_size": self.vocab_size,
            "hidden_size": self.hidden_size,
            "max_bytes": self.max_bytes,
        }


class HubLm:
    """A pretrained causal checkpoint loaded from the local cache.

    Continuations are scored by encoding context and context plus
    continuation, then summing next-token log-probabilities over the
    suffix.  When the tokenizer merges tokens across the boundary the
    suffix starts at the longest shared prefix, which keeps the chain
    rule exact at the cost of attributing the merged token to the
    continuation.
    """

    def __init__(self, model_id: str) -> None:
        try:
            from transformers import AutoModelForCausalLM, AutoTokenizer
        except ImportError as exc:  # pragma: no cover
            raise ModelLoadError(f"transformers is not available: {exc}")
        try:
            self._tok = AutoTokenizer.from_pretrained(model_id)
            self._model = (
                AutoModelForCausalLM.from_pretrained(model_id).double().eval()
            )
        except Exception as exc:
            raise ModelLoadError(f"could not load {model_id!r}: {exc}")
        self.model_id = model_id
        for p in self._model.parameters():
            p.requires_grad_(False)
        n_positions = int(getattr(self._model.config, "n_positions", 0) or 1024)
        # Rough byte budget: a token is at least one byte.
        self.max_bytes = max(256, n_positions - 8)
        self.hidden_size = int(
            getattr(self._model.config, "hidden_size", 0)
            or getattr(self._model.config, "n_embd", 0)
        )
        self.vocab_size = int(self._model.config.vocab_size)

    def _encode(self, text: str) -> list[int]:
        ids = self._tok.encode(text, add_special_tokens=False)
        bos = self._tok.bos_token_id
        if bos is None:
            bos = self._tok.eos_token_id
        if bos is None:
            raise ModelLoadError(
                f"{self.model_id!r} defines neither BOS nor EOS"
            )
        return [int(bos)] + [int(i) for i in ids]

    def _table(self, ids: list[int]) -> torch.Tensor:
        x = torch.tensor([ids], dtype=torch.long)
        with torch.no_grad():
            logits = self._model(x).logits[0]
        return log_softmax(logits, dim=-1)

    def score(self, context: str, continuation: str) -> float:
        if continuation == "":
            return 0.0
        ctx_ids = self._encode(context)
        full_ids = self._encode(context + continuation)
        shared = 0
        for a, b in zip(ctx_ids, full_ids):
            if a != b:
                break
            shared += 1
        if shared == len(full_ids):
            # Continuation vanished under tokenisation (e.g. stripped
            # whitespace); treat it as certain.
            return 0.0
        table = self._table(full_ids)
        total = 0.0
        for j in range(shared, len(full_ids)):
            total += float(table[j - 1, full_ids[j]])
        return total

    def score_many(self, context: str, continuations: list[str]) -> list[float]:
        return [self.score(context, c) for c in continuations]

    def embed(self, text: str) -> list[float]:
        ids = self._encode(text)
        x = torch.tensor([ids], dtype=torch.long)
        with torch.no_grad():
            out = self._model(x, output_hidden_states=True)
        vec = out.hidden_states[-1][0].mean(dim=0)
        return [float(v) for v in vec]

    def next_logprobs(self, context: str) -> torch.Tensor:
        ids = self._encode(context)
        return self._table(ids)[len(ids) - 1]

    def topk(self, context: str, k: int) -> list[tuple[str, float]]:
        ids = self._encode(context)
        row = self._table(ids)[len(ids) - 1]
        scores, idx = torch.sort(row, descending=True)
        take = min(k, row.shape[0])
        entries = []
        for s, i in zip(scores[: take * 2], idx[: take * 2]):
            token = self._tok.decode([int(i)])
            entries.append((token, float(s)))
        entries.sort(key=lambda e: (-e[1], e[0]))
        return entries[:take]

    def info(self) -> dict:
        return {
            "model_id": self.model_id,
            "kind": "pretrained causal checkpoint",
            "vocab_size": self.vocab_size,
            "hidden_size": self.hidden_size,
            "max_bytes": self.max_bytes,
        }


def load_model(model_id: str):
    """Build the scorer named by ``model_id``.

    ``builtin:tiny`` selects the bundled byte-level model; anything else
    is handed to the transformers hub loader, which only succeeds when
    the checkpoint is already present locally (the service never assumes
    network access).
    """
    if model_id == BUILTIN_MODEL_ID:
        return ByteLm()
    if model_id.startswith("builtin:"):
        raise ModelLoadError(
            f"unknown builtin {model_id!r}; only {BUILTIN_MODEL_ID!r} exists"
        )
    return HubLm(model_id)


def is_finite_score(value: float) -> bool:
    return math.isfinite(value) and value <= 1e-9
