"""Startup checks that gate readiness.

A model that loads but scores inconsistently is worse than no model, so
the service refuses to come up until every check here passes.  The
checks probe the contracts clients rely on rather than model quality:
batch scoring must agree with one-at-a-time scoring, log-probabilities
must add along the chain rule, the next-token distribution must be
normalised, an empty continuation must cost nothing, and top-k output
must be sorted.
"""

from __future__ import annotations

import torch

# Tolerances, loosest first.  Normalisation crosses a full-vocab
# logsumexp, so it gets the widest band.
BATCH_TOL = 1e-6
CHAIN_TOL = 1e-5
NORM_TOL = 1e-4

_CONTEXT = "the cat sat on the"
_PARTS = (" mat", " quietly.")


class SelfTestError(Exception):
    """A consistency check failed; the model must not serve traffic."""


def _check(ok: bool, label: str, detail: str) -> None:
    if not ok:
        raise SelfTestError(f"{label}: {detail}")


def run_selftests(model) -> dict[str, float]:
    """Run every check against ``model``; return measured gaps.

    Raises ``SelfTestError`` on the first failure.
    """
    gaps: dict[str, float] = {}

    single = [model.score(_CONTEXT, p) for p in _PARTS]
    batch = model.score_many(_CONTEXT, list(_PARTS))
    gap = max(abs(s - b) for s, b in zip(single, batch))
    gaps["batch_vs_single"] = gap
    _check(gap <= BATCH_TOL, "batch scoring", f"disagrees by {gap:.3e}")

    a, b = _PARTS
    joint = model.score(_CONTEXT, a + b)
    chained = model.score(_CONTEXT, a) + model.score(_CONTEXT + a, b)
    gap = abs(joint - chained)
    gaps["chain_rule"] = gap
    _check(gap <= CHAIN_TOL, "chain rule", f"joint vs chained gap {gap:.3e}")

    empty = model.score(_CONTEXT, "")
    gaps["empty_continuation"] = abs(empty)
    _check(empty == 0.0, "empty continuation", f"scored {empty!r}, want 0.0")

    row = model.next_logprobs(_CONTEXT)
    mass = float(torch.logsumexp(row, dim=0))
    gaps["normalisation"] = abs(mass)
    _check(
        abs(mass) <= NORM_TOL,
        "normalisation",
        f"next-token log-mass {mass:.3e}, want 0",
    )

    entries = model.topk(_CONTEXT, 5)
    _check(len(entries) > 0, "topk", "returned no entries")
    values = [lp for _, lp in entries]
    _check(
        all(x >= y for x, y in zip(values, values[1:])),
        "topk",
        f"scores not descending: {values}",
    )
    _check(
        all(isinstance(t, str) and t != "" for t, _ in entries),
        "topk",
        "empty or non-string token",
    )

    return gaps
