"""Tilted representation policies and the shallow/deep split.

The comprehender's prior over candidate representations is the backend
logprobs renormalized over the candidate support.  A policy of depth
weight L reweights that prior by exp(-L * d) where d is the total
distortion of each candidate against the true input, then renormalizes:

    log p_L(w) = log prior(w) - L * d(w) + const

The shallow surprisal is the KL divergence from the tilted policy to
the renormalized prior, computed in its closed form

    shallow = -log_Z - L * E_p[d]

which is exact because the veridical candidate has zero distortion.  It
grows monotonically in L from 0 toward the renormalized veridical
surprisal, so depths can be inverted by bisection.  The deep surprisal
is whatever remains of the veridical surprisal.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from surpdec.errors import (
    IterationLimit,
    NegativeDeep,
    NumericalUnderflow,
    TargetUnreachable,
)
from surpdec.numerics import logsumexp, normalize_logs
from surpdec.types import (
    CandidateSet,
    DecompositionResult,
    FrontierPoint,
    PolicyDistribution,
    PolicyParams,
)

MAX_DEPTH_WEIGHT = 2.0**60
DEPTH_TOLERANCE = 1e-6
MAX_ITERATIONS = 200


def renormalized_prior(cset: CandidateSet) -> np.ndarray:
    """Log prior over the candidate support, in candidate order."""
    raw = np.array([c.prior_logprob for c in cset.candidates], dtype=np.float64)
    return normalize_logs(raw)


def distortions(cset: CandidateSet, semantic_scale: float) -> np.ndarray:
    """Total distortion of each candidate against the veridical input."""
    form = np.array([c.form_distance for c in cset.candidates], dtype=np.float64)
    sem = np.array([c.semantic_distance for c in cset.candidates], dtype=np.float64)
    return form + semantic_scale * sem


def reweight(cset: CandidateSet, params: PolicyParams) -> PolicyDistribution:
    """Tilt the renormalized prior by exp(-depth_weight * distortion).

    depth_weight=0 returns the renormalized prior exactly, with
    log_Z = 0.
    """
    prior = renormalized_prior(cset)
    if params.depth_weight == 0:
        return PolicyDistribution(
            log_probs=tuple(float(x) for x in prior),
            log_Z=0.0,
            depth_weight=0.0,
        )
    tilted = prior - params.depth_weight * distortions(cset, params.semantic_scale)
    log_z = logsumexp(tilted)
    if not math.isfinite(log_z):
        raise NumericalUnderflow(
            f"{cset.stimulus_ref}: all tilted weights vanished at "
            f"depth_weight={params.depth_weight}"
        )
    log_probs = tilted - log_z
    return PolicyDistribution(
        log_probs=tuple(float(x) for x in log_probs),
        log_Z=float(log_z),
        depth_weight=params.depth_weight,
    )


def expected_distortion(
    dist: PolicyDistribution, cset: CandidateSet, params: PolicyParams
) -> float:
    """E[d] under the tilted policy."""
    d = distortions(cset, params.semantic_scale)
    return float(np.dot(np.exp(np.array(dist.log_probs)), d))


def shallow_surprisal(
    dist: PolicyDistribution, cset: CandidateSet, params: PolicyParams
) -> float:
    """KL from the tilted policy to the renormalized prior, closed form.

    Equals sum p_L * (log p_L - log prior) but is computed as
    -log_Z - depth_weight * E[d]; the two must agree to 1e-9 and the
    test suite holds them to it.
    """
    if dist.depth_weight == 0:
        return 0.0
    value = -dist.log_Z - dist.depth_weight * expected_distortion(dist, cset, params)
    return max(0.0, value)


def veridical_surprisal(cset: CandidateSet) -> float:
    """Surprisal of the veridical candidate under the renormalized prior."""
    prior = renormalized_prior(cset)
    idx = next(i for i, c in enumerate(cset.candidates) if c.is_veridical)
    return float(-prior[idx])


def decompose(cset: CandidateSet, params: PolicyParams) -> DecompositionResult:
    """Split the veridical surprisal into shallow and deep parts.

    `lm_surprisal` reports the raw backend surprisal of the veridical
    candidate, before renormalization over the support.
    """
    dist = reweight(cset, params)
    veridical = veridical_surprisal(cset)
    shallow = shallow_surprisal(dist, cset, params)
    deep = veridical - shallow
    if deep < -1e-6:
        raise NegativeDeep(
            f"{cset.stimulus_ref}: deep = {deep!r}; distortions or the veridical "
            "flag are inconsistent upstream"
        )
    if -1e-9 <= deep < 0:
        deep = 0.0
    return DecompositionResult(
        shallow=shallow,
        deep=deep,
        veridical=veridical,
        lm_surprisal=-cset.veridical.prior_logprob,
        params=params,
    )


def max_depth(cset: CandidateSet, semantic_scale: float) -> float:
    """Supremum of the shallow surprisal over all depth weights.

    As depth_weight grows, the policy concentrates on the
    minimum-distortion candidates; the depth approaches the negative
    log prior mass of that set.
    """
    prior = renormalized_prior(cset)
    d = distortions(cset, semantic_scale)
    at_min = d <= d.min()
    return float(-logsumexp(prior[at_min]))


def solve_lambda(
    cset: CandidateSet, target_depth: float, semantic_scale: float = 8.0
) -> float:
    """Depth weight whose shallow surprisal hits `target_depth`.

    Bisection on the monotone depth curve, to within 1e-6 nats.  Raises
    TargetUnreachable when the target exceeds the attainable supremum
    by more than the tolerance, IterationLimit if bisection stalls.
    """
    if not math.isfinite(target_depth) or target_depth < 0:
        raise ValueError(f"target_depth must be finite and >= 0, got {target_depth!r}")
    if target_depth == 0:
        return 0.0
    supremum = max_depth(cset, semantic_scale)
    if target_depth > supremum + DEPTH_TOLERANCE:
        raise TargetUnreachable(
            f"{cset.stimulus_ref}: target depth {target_depth} exceeds "
            f"supremum {supremum}"
        )

    def depth_at(weight: float) -> float:
        params = PolicyParams(depth_weight=weight, semantic_scale=semantic_scale)
        return shallow_surprisal(reweight(cset, params), cset, params)

    lo, hi = 0.0, 1.0
    iterations = 0
    while True:
        f_hi = depth_at(hi)
        iterations += 1
        if abs(f_hi - target_depth) <= DEPTH_TOLERANCE:
            return hi
        if f_hi > target_depth or hi >= MAX_DEPTH_WEIGHT:
            break
        lo, hi = hi, hi * 2
    while iterations < MAX_ITERATIONS:
        mid = 0.5 * (lo + hi)
        f_mid = depth_at(mid)
        iterations += 1
        if abs(f_mid - target_depth) <= DEPTH_TOLERANCE:
            return mid
        if f_mid < target_depth:
            lo = mid
        else:
            hi = mid
    raise IterationLimit(
        f"{cset.stimulus_ref}: no convergence to depth {target_depth} in "
        f"{MAX_ITERATIONS} evaluations"
    )


def frontier(
    cset: CandidateSet, depth_weights: Sequence[float], semantic_scale: float = 8.0
) -> list[FrontierPoint]:
    """Depth / expected-distortion curve over the given weights.

    Sorted by weight, depths are nondecreasing and expected distortions
    nonincreasing.
    """
    points = []
    for weight in depth_weights:
        params = PolicyParams(depth_weight=weight, semantic_scale=semantic_scale)
        dist = reweight(cset, params)
        points.append(
            FrontierPoint(
                depth_weight=float(weight),
                depth=shallow_surprisal(dist, cset, params),
                expected_distortion=expected_distortion(dist, cset, params),
            )
        )
    return points


def noisy_channel_posterior(
    cset: CandidateSet, noise_logliks: Sequence[float]
) -> PolicyDistribution:
    """Bayes posterior over candidates given per-candidate noise log-likelihoods.

    Identical to reweight at depth_weight=1 with distortion equal to
    the negative noise log-likelihood: exponential tilting with the
    surprisal of the corruption process as the distortion is exact
    Bayesian inference over what was meant.
    """
    lls = np.asarray(noise_logliks, dtype=np.float64)
    if lls.shape != (len(cset.candidates),):
        raise ValueError(
            f"expected {len(cset.candidates)} noise log-likelihoods, got {lls.shape}"
        )
    prior = renormalized_prior(cset)
    joint = prior + lls
    log_z = logsumexp(joint)
    if not math.isfinite(log_z):
        raise NumericalUnderflow(f"{cset.stimulus_ref}: posterior mass vanished")
    return PolicyDistribution(
        log_probs=tuple(float(x) for x in (joint - log_z)),
        log_Z=float(log_z),
        depth_weight=1.0,
    )
