from fractions import Fraction


__all__ = [
    "AffineSolveError",
    "AmbientModeError",
    "ArtifactFormatError",
    "BoundDomainError",
    "BoundViolationError",
    "CACHE_ENV_VAR",
    "CSV_SIGNIFICANT_DIGITS",
    "CoxeterOverlapError",
    "DEFAULT_PERTURBATION",
    "DEFAULT_PIECE_CAP",
    "DEFAULT_PRECISION",
    "DEFAULT_SEED",
    "DEFAULT_VERTEX_CAP",
    "DegenerateHyperplaneError",
    "DimensionMismatchError",
    "FoldingError",
    "INVARIANCE_SAMPLES",
    "InconsistentError",
    "MissingBaseValueError",
    "NonConvexPieceError",
    "OrbitCountError",
    "OutsideDomainError",
    "PieceCapExceededError",
    "PresetError",
    "UnboundedPolytopeError",
    "UnderdeterminedError",
    "UnstableArrangementError",
    "UnstableBoxError",
]


DEFAULT_SEED = 0
DEFAULT_PIECE_CAP = 10**6
DEFAULT_VERTEX_CAP = 14
DEFAULT_PRECISION = 50
DEFAULT_PERTURBATION = Fraction(1, 1000)
CSV_SIGNIFICANT_DIGITS = 12
INVARIANCE_SAMPLES = 16
CACHE_ENV_VAR = "PWL_COMPLEXITY_CACHE"


class DimensionMismatchError(ValueError):
    """Raised when vectors, matrices or constraints disagree on their dimensions"""

    pass


class UnboundedPolytopeError(ValueError):
    """Raised when a bounded polytope is required but the input is unbounded"""

    pass


class AffineSolveError(ValueError):
    """Base class for failures to reconstruct an affine map from point pairs"""

    pass


class UnderdeterminedError(AffineSolveError):
    """Raised when the source points are affinely dependent"""

    pass


class InconsistentError(AffineSolveError):
    """Raised when no affine map sends every source point to its target"""

    pass


class DegenerateHyperplaneError(ValueError):
    """Raised when a hyperplane is built from a zero normal vector"""

    pass


class AmbientModeError(ValueError):
    """Raised when chambers are enumerated without a clip box or explicit ambient mode"""

    pass


class UnstableArrangementError(ValueError):
    """Raised when a permutation maps a hyperplane outside of the arrangement"""

    pass


class CoxeterOverlapError(ValueError):
    """Raised when an arrangement already contains a Coxeter plane x_i = x_j"""

    pass


class OrbitCountError(ValueError):
    """Raised when orbit counts are not integral or two counting methods disagree"""

    pass


class FoldingError(ValueError):
    """Raised when a folding construction is given invalid parts or head"""

    pass


class UnstableBoxError(ValueError):
    """Raised when a box is not stable under coordinate permutations"""

    pass


class PieceCapExceededError(ValueError):
    """Raised when the number of linear pieces would exceed the configured cap"""

    pass


class OutsideDomainError(ValueError):
    """Raised when a point lies outside the domain box"""

    pass


class NonConvexPieceError(ValueError):
    """Raised when the single polytope of a non-convex merged piece is requested"""

    pass


class BoundDomainError(ValueError):
    """Raised when a bound is evaluated outside of its validity range"""

    pass


class BoundViolationError(ValueError):
    """Raised when a computed value is not inside the interval a bound guarantees"""

    pass


class MissingBaseValueError(ValueError):
    """Raised when a recurrence is missing one of its base values"""

    pass


class PresetError(ValueError):
    """Raised when a preset expression is unknown or malformed"""

    pass


class ArtifactFormatError(ValueError):
    """Raised when a JSON artifact cannot be decoded"""

    pass
