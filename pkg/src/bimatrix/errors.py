"""Exception hierarchy.

Every error carries a short machine-readable ``code`` so the command-line
front end can report failures without parsing messages.
"""


class BimatrixError(Exception):
    """Base class for all library errors."""

    code = "bimatrix_error"


class NonHermitianModel(BimatrixError):
    """The real-line contour does not define a convergent measure."""

    code = "non_hermitian_model"


class QuadratureNotConverged(BimatrixError):
    code = "quadrature_not_converged"


class OracleTooLarge(BimatrixError):
    code = "oracle_too_large"


class SingularMinor(BimatrixError):
    code = "singular_minor"


class TruncationTooSmall(BimatrixError):
    code = "truncation_too_small"


class UnsupportedOrder(BimatrixError):
    code = "unsupported_order"


class ChainNotMixed(BimatrixError):
    code = "chain_not_mixed"


class ConstructionsDisagree(BimatrixError):
    code = "constructions_disagree"


class InterpolationInconsistent(BimatrixError):
    code = "interpolation_inconsistent"


class NearDegenerateSpectrum(BimatrixError):
    code = "near_degenerate_spectrum"


class SingularShift(BimatrixError):
    code = "singular_shift"


class TruncationNotConverged(BimatrixError):
    code = "truncation_not_converged"


class NewtonDiverged(BimatrixError):
    code = "newton_diverged"


class CoincidentPoints(BimatrixError):
    code = "coincident_points"


class DegenerateBranchPoint(BimatrixError):
    code = "degenerate_branch_point"


class OutsideCut(BimatrixError):
    code = "outside_cut"


class PathCrossesCut(BimatrixError):
    code = "path_crosses_cut"


class InsideCutRegion(BimatrixError):
    code = "inside_cut_region"


class ConfigInvalid(BimatrixError):
    code = "config_invalid"
