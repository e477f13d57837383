"""Surface coloring for race-free parallel mesh sweeps.

Partitions the edges or faces of a mesh into the minimum number of
color classes such that no element sees one color twice, so each class
can be accumulated concurrently without write conflicts or per-surface
buffers.  Colors survive 1:4 triangle refinement (palette doubles to
six) and drive an element renumbering that makes sweep memory access
consecutive.
"""

from .amr import (
    FamilyRecord,
    RefinedMesh,
    RefinementMap,
    child_color,
    coarsen,
    max_refined_neighbors,
    reconstruct_refinement,
    refine,
)
from .coloring import (
    ColoringConfig,
    ColoringReport,
    SurfaceColoring,
    color,
    color_set_size,
    modified_greedy,
    naive_greedy,
    resolve_conflicts,
    verify_coloring,
)
from .errors import (
    DanglingVertexError,
    LevelConstraintError,
    MalformedSectionError,
    MeshChromaError,
    NonManifoldError,
    PartialFamilyError,
    PlanMeshMismatchError,
    RestartsExhaustedError,
    SwapBudgetExceededError,
    UnrefinableKindError,
    UnsupportedVersionError,
    WriteConflictError,
)
from .generators import (
    FAMILIES,
    GeneratorSpec,
    gen_quad_rect,
    gen_tet_prism,
    gen_tri_rect,
    generate,
    shuffle_elements,
)
from .mesh import (
    ConnectivityGraph,
    Diagnostic,
    Element,
    ElementKind,
    Mesh,
    Surface,
    build_surfaces,
    connectivity_graph,
    validate,
    vizing_bound,
)
from .meshio import (
    NativeMesh,
    read_msh,
    read_native,
    write_native,
    write_report,
)
from .reorder import (
    CoalescingReport,
    ReorderingPlan,
    apply_plan,
    build_plan,
    coalescing_metric,
    invert_plan,
)
from .scaling import (
    ScalingPoint,
    ScalingSeries,
    fit_loglog_slope,
    run_series,
)
from .sweeps import (
    AccumulationState,
    MemoryEstimate,
    assert_race_free,
    basis_count,
    default_payload,
    memory_saved,
    surface_buffer,
    sweep_buffered,
    sweep_colored,
    sweep_sequential,
)

__version__ = "0.1.0"

__all__ = [
    "AccumulationState",
    "CoalescingReport",
    "ColoringConfig",
    "ColoringReport",
    "ConnectivityGraph",
    "DanglingVertexError",
    "Diagnostic",
    "Element",
    "ElementKind",
    "FAMILIES",
    "FamilyRecord",
    "GeneratorSpec",
    "LevelConstraintError",
    "MalformedSectionError",
    "MemoryEstimate",
    "Mesh",
    "MeshChromaError",
    "NativeMesh",
    "NonManifoldError",
    "PartialFamilyError",
    "PlanMeshMismatchError",
    "RefinedMesh",
    "RefinementMap",
    "ReorderingPlan",
    "RestartsExhaustedError",
    "ScalingPoint",
    "ScalingSeries",
    "Surface",
    "SurfaceColoring",
    "SwapBudgetExceededError",
    "UnrefinableKindError",
    "UnsupportedVersionError",
    "WriteConflictError",
    "apply_plan",
    "assert_race_free",
    "basis_count",
    "build_plan",
    "build_surfaces",
    "child_color",
    "coalescing_metric",
    "coarsen",
    "color",
    "color_set_size",
    "connectivity_graph",
    "default_payload",
    "fit_loglog_slope",
    "gen_quad_rect",
    "gen_tet_prism",
    "gen_tri_rect",
    "generate",
    "invert_plan",
    "max_refined_neighbors",
    "memory_saved",
    "modified_greedy",
    "naive_greedy",
    "read_msh",
    "read_native",
    "reconstruct_refinement",
    "refine",
    "resolve_conflicts",
    "run_series",
    "shuffle_elements",
    "surface_buffer",
    "sweep_buffered",
    "sweep_colored",
    "sweep_sequential",
    "validate",
    "verify_coloring",
    "vizing_bound",
    "write_native",
    "write_report",
]
