"""surpdec: shallow/deep decomposition of per-word information content.

A comprehender that trades representation fidelity against processing
cost can be modeled as a tilted reweighting of a language model prior
over candidate readings of the input.  This package computes that
policy, splits the surprisal of the true input into the part absorbed
by the tilted policy (shallow) and the remainder (deep), and provides
the experiment tooling around it: candidate generation, distortion
measures, mock and HTTP scoring backends, condition summaries, grid
search, and regression checks.
"""

from surpdec.types import (
    Candidate,
    CandidateSet,
    DecompositionResult,
    ErpPrediction,
    FrontierPoint,
    Generator,
    PolicyDistribution,
    PolicyParams,
    Stimulus,
    erp_prediction,
    validate_candidate_set,
)

__version__ = "0.1.0"

__all__ = [
    "Candidate",
    "CandidateSet",
    "DecompositionResult",
    "ErpPrediction",
    "FrontierPoint",
    "Generator",
    "PolicyDistribution",
    "PolicyParams",
    "Stimulus",
    "erp_prediction",
    "validate_candidate_set",
    "__version__",
]
