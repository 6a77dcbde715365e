import numpy as np

from surpdec.types import Candidate, CandidateSet, Generator


def random_candidate_set(
    rng: np.random.Generator,
    n_min: int = 2,
    n_max: int = 300,
    allow_zero_distortion_rivals: bool = False,
    ref: str = "random",
) -> CandidateSet:
    """A random validated candidate set with a wide prior spread.

    Raw priors span more than 30 nats to exercise the log-space paths.
    Non-veridical candidates get strictly positive distances unless
    `allow_zero_distortion_rivals`, in which case a few may sit at zero
    distortion alongside the veridical candidate.
    """
    n = int(rng.integers(n_min, n_max + 1))
    priors = rng.uniform(-35.0, 0.0, size=n)
    forms = rng.uniform(0.5, 12.0, size=n)
    sems = rng.uniform(0.005, 2.0, size=n)
    if allow_zero_distortion_rivals and n > 2:
        dup = rng.integers(1, n)
        forms[dup] = 0.0
        sems[dup] = 0.0
    forms[0] = 0.0
    sems[0] = 0.0
    candidates = [
        Candidate(
            text=f"w{i:04d}",
            prior_logprob=float(priors[i]),
            form_distance=float(forms[i]),
            semantic_distance=float(sems[i]),
            is_veridical=(i == 0),
        )
        for i in range(n)
    ]
    return CandidateSet(
        stimulus_ref=ref, generator=Generator.SAMPLER, candidates=tuple(candidates)
    )
