"""Exception taxonomy.

Every error raised on purpose by this package derives from
`SurpdecError`, so callers can catch one type at the boundary.  The
subclasses are deliberately narrow: each names a single contract
violation.
"""


class SurpdecError(Exception):
    """Base class for all package errors."""


class SchemaError(SurpdecError):
    """An input file does not match its documented schema."""


class EmptySet(SurpdecError):
    """A candidate set has fewer than two distinct candidates."""


class MissingVeridical(SurpdecError):
    """No candidate in the set is flagged as the veridical input."""


class ZeroNormEmbedding(SurpdecError):
    """An embedding vector has (near-)zero norm, so cosine is undefined."""


class MissingEntry(SurpdecError):
    """A mock backend table has no entry for the requested key."""


class BackendUnavailable(SurpdecError):
    """A remote scoring backend could not be reached after retries."""


class NegativeDeep(SurpdecError):
    """Deep surprisal came out below -1e-6 nats, which signals a bug upstream."""


class TargetUnreachable(SurpdecError):
    """Requested depth exceeds the supremum attainable on this candidate set."""


class IterationLimit(SurpdecError):
    """Root finding failed to converge within the iteration budget."""


class NumericalUnderflow(SurpdecError):
    """All reweighted candidates underflowed to zero probability."""


class UnknownItemId(SurpdecError):
    """A corrections file references an item id absent from the stimuli."""


class UnpairedItem(SurpdecError):
    """A stimulus has no usable experimental/control pairing."""


class ContextMismatch(SurpdecError):
    """Paired stimuli do not share an identical context."""


class DanglingControlRef(SurpdecError):
    """A stimulus references a control item id that does not resolve."""


class RankDeficient(SurpdecError):
    """The regression design matrix does not have full column rank."""


class JoinError(SurpdecError):
    """Measurement rows reference item ids absent from the model results."""
