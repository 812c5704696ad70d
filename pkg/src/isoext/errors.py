"""Exception types raised by the isoext library.

Every guard failure has a dedicated type so callers (and the CLI exit-code
mapping) can distinguish "bad input" from "the construction refuses to
proceed at these parameters".
"""


class IsoextError(Exception):
    """Base class for all isoext errors."""


class InvalidInputError(IsoextError):
    """Malformed input: dimension mismatch, empty set, bad parameter range."""


class InvalidSpecError(InvalidInputError):
    """Ill-formed construction spec (e.g. r_in >= r_out, overlapping supports)."""


class RankDeficiencyError(IsoextError):
    """A set of vectors or a simplex is numerically rank deficient."""


class NotAnIsometryError(IsoextError):
    """Pairwise distances of a correspondence do not match within tolerance."""


class OrientationInfeasibleError(IsoextError):
    """A proper motion was requested but only an improper one exists."""


class OrientationMismatchError(IsoextError):
    """Two motions of opposite orientation where matching orientations are required."""


class DistortionTooLargeError(IsoextError):
    """A construction guard on the distortion budget was violated."""


class PreconditionViolatedError(IsoextError):
    """A documented precondition of an operation does not hold."""


class AmbiguousGeodesicError(IsoextError):
    """Rotation pair is antipodal (some plane rotates by exactly pi); the
    interpolating geodesic is not unique.  Perturb one motion slightly to
    break the tie."""


class DeltaTooLargeError(IsoextError):
    """The correspondence distorts distances more than the extension guard
    allows.  Carries the name of the failed guard."""

    def __init__(self, message, guard=None, value=None, limit=None):
        super().__init__(message)
        self.guard = guard
        self.value = value
        self.limit = limit


class NegativeBlockDetectedError(IsoextError):
    """The correspondence has a negative block, so no proper extension exists.
    Carries the witness block(s)."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class GluePreconditionError(PreconditionViolatedError):
    """A sampled gluing precondition failed.  Carries the offending region."""

    def __init__(self, message, region=None):
        super().__init__(message)
        self.region = region


class InternalConsistencyError(IsoextError):
    """A cross-check between two internal computations disagreed."""
