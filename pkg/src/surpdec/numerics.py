"""Small log-space helpers shared across modules.

All probabilities in this package live in natural-log space; these
helpers are the only place the exp/log shuffling happens.
"""

from __future__ import annotations

import numpy as np


def logsumexp(a: np.ndarray) -> float:
    """ln(sum(exp(a))) with the usual max shift.

    Handles -inf entries; returns -inf for an all--inf input.
    """
    a = np.asarray(a, dtype=np.float64)
    m = np.max(a)
    if not np.isfinite(m):
        # all -inf (m = -inf) or a stray +inf/nan, which we let propagate
        return float(m)
    return float(m + np.log(np.sum(np.exp(a - m))))


def normalize_logs(a: np.ndarray) -> np.ndarray:
    """Shift log weights so they sum to one in probability space."""
    return np.asarray(a, dtype=np.float64) - logsumexp(a)
