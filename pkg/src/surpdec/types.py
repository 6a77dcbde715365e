"""Core value types.

Everything here is an immutable record with its invariants checked at
construction time, plus a lossless JSON round-trip (`to_dict` /
`from_dict`).  Log probabilities are natural-log throughout; distances
are non-negative floats.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from surpdec.errors import EmptySet, MissingVeridical, SchemaError
from surpdec.numerics import logsumexp

SCHEMA_VERSION = "1"


class Generator(enum.Enum):
    """How a candidate set was produced."""

    EXTERNAL = "external"
    COUNTERPART = "counterpart"
    SAMPLER = "sampler"


@dataclass(frozen=True)
class Stimulus:
    """One experimental sentence, split into context and continuation.

    `target` is the word (or words) of interest and must be a suffix of
    `continuation`.  Experimental items carry the id of their paired
    control item; control items carry none.
    """

    experiment_id: str
    item_id: str
    condition: str
    context: str
    continuation: str
    target: str
    is_control: bool = False
    control_item_id: Optional[str] = None

    def __post_init__(self):
        if not self.continuation.endswith(self.target):
            raise SchemaError(
                f"{self.item_id}: target {self.target!r} is not a suffix of "
                f"continuation {self.continuation!r}"
            )
        if self.is_control and self.control_item_id is not None:
            raise SchemaError(f"{self.item_id}: control items must not reference a control")
        if not self.is_control and self.control_item_id is None:
            raise SchemaError(f"{self.item_id}: experimental items must reference a control")

    @property
    def sentence(self) -> str:
        """Full input string: context plus continuation."""
        if not self.context:
            return self.continuation
        return self.context + " " + self.continuation

    @property
    def scoring_suffix(self) -> str:
        """Continuation as passed to a scoring backend (leading space kept)."""
        if not self.context:
            return self.continuation
        return " " + self.continuation

    def to_dict(self) -> dict:
        return {
            "experiment_id": self.experiment_id,
            "item_id": self.item_id,
            "condition": self.condition,
            "context": self.context,
            "continuation": self.continuation,
            "target": self.target,
            "is_control": self.is_control,
            "control_item_id": self.control_item_id,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Stimulus":
        try:
            return cls(
                experiment_id=d["experiment_id"],
                item_id=d["item_id"],
                condition=d["condition"],
                context=d["context"],
                continuation=d["continuation"],
                target=d["target"],
                is_control=bool(d.get("is_control", False)),
                control_item_id=d.get("control_item_id"),
            )
        except KeyError as e:
            raise SchemaError(f"stimulus record is missing key {e.args[0]!r}") from None


@dataclass(frozen=True)
class Candidate:
    """One representation a comprehender might entertain for the input.

    `prior_logprob` is the raw backend score ln p0(w|c); renormalization
    over the candidate support happens later, in the policy module.  The
    two distance components are stored separately so one candidate set
    can be reused across different semantic weights.
    """

    text: str
    prior_logprob: float
    form_distance: float
    semantic_distance: float
    is_veridical: bool = False

    def __post_init__(self):
        if not math.isfinite(self.prior_logprob):
            raise ValueError(f"non-finite prior logprob for {self.text!r}")
        for name in ("form_distance", "semantic_distance"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {v!r}")
        if self.is_veridical and (self.form_distance != 0 or self.semantic_distance != 0):
            raise ValueError(
                f"veridical candidate {self.text!r} must have zero distances"
            )

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "prior_logprob": self.prior_logprob,
            "form_distance": self.form_distance,
            "semantic_distance": self.semantic_distance,
            "is_veridical": self.is_veridical,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Candidate":
        try:
            return cls(
                text=d["text"],
                prior_logprob=float(d["prior_logprob"]),
                form_distance=float(d["form_distance"]),
                semantic_distance=float(d["semantic_distance"]),
                is_veridical=bool(d.get("is_veridical", False)),
            )
        except KeyError as e:
            raise SchemaError(f"candidate record is missing key {e.args[0]!r}") from None


@dataclass(frozen=True)
class CandidateSet:
    """Validated support for one stimulus: distinct texts, one veridical."""

    stimulus_ref: str
    generator: Generator
    candidates: tuple[Candidate, ...]

    def __post_init__(self):
        if len(self.candidates) < 2:
            raise EmptySet(
                f"{self.stimulus_ref}: need at least 2 candidates, "
                f"got {len(self.candidates)}"
            )
        texts = [c.text for c in self.candidates]
        if len(set(texts)) != len(texts):
            raise ValueError(f"{self.stimulus_ref}: duplicate candidate texts")
        n_veridical = sum(c.is_veridical for c in self.candidates)
        if n_veridical == 0:
            raise MissingVeridical(f"{self.stimulus_ref}: no veridical candidate")
        if n_veridical > 1:
            raise ValueError(f"{self.stimulus_ref}: {n_veridical} veridical candidates")

    @property
    def veridical(self) -> Candidate:
        for c in self.candidates:
            if c.is_veridical:
                return c
        raise MissingVeridical(self.stimulus_ref)  # unreachable after validation

    def to_dict(self) -> dict:
        return {
            "stimulus_ref": self.stimulus_ref,
            "generator": self.generator.value,
            "candidates": [c.to_dict() for c in self.candidates],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CandidateSet":
        try:
            return cls(
                stimulus_ref=d["stimulus_ref"],
                generator=Generator(d["generator"]),
                candidates=tuple(Candidate.from_dict(c) for c in d["candidates"]),
            )
        except KeyError as e:
            raise SchemaError(f"candidate set is missing key {e.args[0]!r}") from None
        except ValueError as e:
            raise SchemaError(str(e)) from None


def validate_candidate_set(
    stimulus_ref: str,
    candidates: Iterable[Candidate],
    generator: Generator,
) -> CandidateSet:
    """Merge textual duplicates and build a validated CandidateSet.

    Duplicates keep the highest prior logprob; the veridical flag
    survives the merge.  Raises EmptySet if fewer than two distinct
    candidates remain and MissingVeridical if none is flagged.
    """
    merged: dict[str, Candidate] = {}
    order: list[str] = []
    for c in candidates:
        prev = merged.get(c.text)
        if prev is None:
            merged[c.text] = c
            order.append(c.text)
            continue
        keep = c if c.prior_logprob > prev.prior_logprob else prev
        if (prev.is_veridical or c.is_veridical) and not keep.is_veridical:
            veridical = prev if prev.is_veridical else c
            keep = Candidate(
                text=keep.text,
                prior_logprob=keep.prior_logprob,
                form_distance=veridical.form_distance,
                semantic_distance=veridical.semantic_distance,
                is_veridical=True,
            )
        merged[c.text] = keep
    deduped = [merged[t] for t in order]
    if len(deduped) < 2:
        raise EmptySet(f"{stimulus_ref}: {len(deduped)} distinct candidates")
    if not any(c.is_veridical for c in deduped):
        raise MissingVeridical(f"{stimulus_ref}: no veridical candidate")
    return CandidateSet(stimulus_ref=stimulus_ref, generator=generator, candidates=tuple(deduped))


@dataclass(frozen=True)
class PolicyParams:
    """Knobs of the representation policy.

    `depth_weight` scales how strongly distortion is penalized (the CLI
    exposes it as --lambda); `semantic_scale` converts semantic distance
    into form-distance units (--gamma).
    """

    depth_weight: float = 1.0
    semantic_scale: float = 8.0

    def __post_init__(self):
        if not math.isfinite(self.depth_weight) or self.depth_weight < 0:
            raise ValueError(f"depth_weight must be finite and >= 0, got {self.depth_weight!r}")
        if not math.isfinite(self.semantic_scale) or self.semantic_scale < 0:
            raise ValueError(
                f"semantic_scale must be finite and >= 0, got {self.semantic_scale!r}"
            )

    def to_dict(self) -> dict:
        return {"lambda": self.depth_weight, "gamma": self.semantic_scale}

    @classmethod
    def from_dict(cls, d: dict) -> "PolicyParams":
        try:
            return cls(depth_weight=float(d["lambda"]), semantic_scale=float(d["gamma"]))
        except KeyError as e:
            raise SchemaError(f"policy params are missing key {e.args[0]!r}") from None


@dataclass(frozen=True)
class PolicyDistribution:
    """Tilted distribution over a candidate set, in candidate order.

    `log_Z` is the log normalizer of the tilt applied to the
    renormalized prior, so it is 0 at depth_weight=0 and non-positive
    otherwise.
    """

    log_probs: tuple[float, ...]
    log_Z: float
    depth_weight: float

    def __post_init__(self):
        total = logsumexp(np.array(self.log_probs))
        if abs(total) > 1e-9:
            raise ValueError(f"log_probs sum to exp({total}), not 1")

    def probs(self) -> np.ndarray:
        return np.exp(np.array(self.log_probs))

    def to_dict(self) -> dict:
        return {
            "log_probs": list(self.log_probs),
            "log_Z": self.log_Z,
            "lambda": self.depth_weight,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PolicyDistribution":
        try:
            return cls(
                log_probs=tuple(float(x) for x in d["log_probs"]),
                log_Z=float(d["log_Z"]),
                depth_weight=float(d["lambda"]),
            )
        except KeyError as e:
            raise SchemaError(f"policy distribution is missing key {e.args[0]!r}") from None


@dataclass(frozen=True)
class DecompositionResult:
    """Split of the veridical surprisal into shallow and deep parts.

    `veridical` is the surprisal of the true input under the prior
    renormalized over the candidate support; `lm_surprisal` is the raw
    backend surprisal before renormalization.  The parts satisfy
    shallow + deep = veridical to within 1e-9 nats, with tiny negative
    deep values clamped to zero at construction upstream.
    """

    shallow: float
    deep: float
    veridical: float
    lm_surprisal: float
    params: PolicyParams

    def __post_init__(self):
        if self.shallow < 0:
            raise ValueError(f"shallow must be >= 0, got {self.shallow!r}")
        if self.deep < -1e-9:
            raise ValueError(f"deep must be >= -1e-9, got {self.deep!r}")
        if abs(self.shallow + self.deep - self.veridical) > 1e-9:
            raise ValueError(
                f"shallow {self.shallow!r} + deep {self.deep!r} != veridical {self.veridical!r}"
            )

    def to_dict(self) -> dict:
        return {
            "shallow": self.shallow,
            "deep": self.deep,
            "veridical": self.veridical,
            "lm_surprisal": self.lm_surprisal,
            "params": self.params.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DecompositionResult":
        try:
            return cls(
                shallow=float(d["shallow"]),
                deep=float(d["deep"]),
                veridical=float(d["veridical"]),
                lm_surprisal=float(d["lm_surprisal"]),
                params=PolicyParams.from_dict(d["params"]),
            )
        except KeyError as e:
            raise SchemaError(f"decomposition result is missing key {e.args[0]!r}") from None


@dataclass(frozen=True)
class FrontierPoint:
    """One point on the depth / expected-distortion trade-off curve."""

    depth_weight: float
    depth: float
    expected_distortion: float

    def to_dict(self) -> dict:
        return {
            "lambda": self.depth_weight,
            "depth": self.depth,
            "expected_distortion": self.expected_distortion,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FrontierPoint":
        try:
            return cls(
                depth_weight=float(d["lambda"]),
                depth=float(d["depth"]),
                expected_distortion=float(d["expected_distortion"]),
            )
        except KeyError as e:
            raise SchemaError(f"frontier point is missing key {e.args[0]!r}") from None


@dataclass(frozen=True)
class ErpPrediction:
    """Linear read-out of a decomposition into component amplitudes."""

    n400: float
    p600: float

    def to_dict(self) -> dict:
        return {"n400": self.n400, "p600": self.p600}

    @classmethod
    def from_dict(cls, d: dict) -> "ErpPrediction":
        try:
            return cls(n400=float(d["n400"]), p600=float(d["p600"]))
        except KeyError as e:
            raise SchemaError(f"erp prediction is missing key {e.args[0]!r}") from None


def erp_prediction(
    result: DecompositionResult, scale_n400: float = 1.0, scale_p600: float = 1.0
) -> ErpPrediction:
    """Scale the two components into predicted amplitudes."""
    return ErpPrediction(n400=scale_n400 * result.shallow, p600=scale_p600 * result.deep)
