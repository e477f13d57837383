"""Exception types shared across the package."""


class MeshChromaError(Exception):
    """Base class for every error raised by this package."""


class NonManifoldError(MeshChromaError):
    """Three or more elements share a single surface."""


class DanglingVertexError(MeshChromaError):
    """An element references a vertex id outside the vertex table."""


class UnsupportedVersionError(MeshChromaError):
    """Input file declares a format version the reader does not handle."""


class MalformedSectionError(MeshChromaError):
    """A file section is missing, truncated, or holds unparseable data."""


class SwapBudgetExceededError(MeshChromaError):
    """Conflict resolution spent its swap budget without finishing."""


class RestartsExhaustedError(MeshChromaError):
    """Every restart attempt ran out of swap budget."""


class LevelConstraintError(MeshChromaError):
    """A refinement request would nest more than one level deep."""


class UnrefinableKindError(MeshChromaError):
    """Refinement was requested for an element kind that cannot be split."""


class PartialFamilyError(MeshChromaError):
    """Coarsening addressed an element that is not a currently refined parent."""


class PlanMeshMismatchError(MeshChromaError):
    """A reordering plan does not match the mesh it is applied to."""


class WriteConflictError(MeshChromaError):
    """Two sweep workers in the same color group touched one element."""
