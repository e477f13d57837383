"""Command-line front end tying the pipeline together.

    meshchroma generate --family tri_rect --nx 64 --ny 64 -o mesh.mm
    meshchroma color -i mesh.mm -o colored.mm --seed 0
    meshchroma verify -i colored.mm
    meshchroma reorder -i colored.mm -o final.mm --metric
    meshchroma race-check -i final.mm

Exit codes: 0 success, 1 invalid mesh or coloring, 2 coloring failed,
3 refinement constraint violated, 4 I/O failure, 64 usage error.
MESHCHROMA_SEED supplies the default seed where --seed is accepted.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .amr import RefinedMesh, coarsen, reconstruct_refinement, refine
from .coloring import ColoringConfig, color, verify_coloring
from .errors import (
    DanglingVertexError,
    LevelConstraintError,
    MalformedSectionError,
    NonManifoldError,
    PartialFamilyError,
    PlanMeshMismatchError,
    RestartsExhaustedError,
    SwapBudgetExceededError,
    UnrefinableKindError,
    UnsupportedVersionError,
    WriteConflictError,
)
from .generators import FAMILIES, GeneratorSpec, generate
from .mesh import validate
from .meshio import (
    NativeMesh,
    read_msh,
    read_native,
    write_native,
    write_report,
)
from .reorder import apply_plan, build_plan, coalescing_metric
from .scaling import run_series
from .sweeps import (
    default_payload,
    memory_saved,
    sweep_buffered,
    sweep_colored,
    sweep_sequential,
)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_COLORING = 2
EXIT_AMR = 3
EXIT_IO = 4
EXIT_USAGE = 64


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer")
    if value < 1:
        raise argparse.ArgumentTypeError(f"{value} is not positive")
    return value


def _nonnegative(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer")
    if value < 0:
        raise argparse.ArgumentTypeError(f"{value} is negative")
    return value


def _id_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"{text!r} is not a comma-separated integer list"
        )


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="meshchroma",
        description="Surface coloring, refinement, and reordering "
                    "for race-free parallel mesh sweeps.",
    )
    sub = parser.add_subparsers(dest="command", required=True,
                                metavar="command", parser_class=_Parser)

    p = sub.add_parser("generate", help="build a structured test mesh")
    p.add_argument("--family", required=True, choices=FAMILIES)
    p.add_argument("--nx", required=True, type=_positive)
    p.add_argument("--ny", required=True, type=_positive)
    p.add_argument("--nz", type=_positive, default=1)
    p.add_argument("--periodic", action="store_true",
                   help="wrap both axes (tri_rect / quad_rect)")
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("color", help="color all surfaces")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--report", default=None,
                   help="write the report here instead of stdout")

    p = sub.add_parser("verify",
                       help="check mesh consistency and coloring validity")
    p.add_argument("-i", "--input", required=True)

    p = sub.add_parser("refine",
                       help="split selected triangles 1:4, keeping "
                            "surfaces race-free under 6 colors")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--elements", type=_id_list,
                       help="comma-separated element ids")
    group.add_argument("--all", action="store_true")

    p = sub.add_parser("coarsen",
                       help="merge refinement families back together")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--parents", required=True, type=_id_list,
                   help="base element ids whose children to merge")

    p = sub.add_parser("reorder",
                       help="renumber elements and surfaces by color")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--metric", action="store_true",
                   help="print coalescing fractions before and after")

    p = sub.add_parser("race-check",
                       help="run all three sweep strategies and compare")
    p.add_argument("-i", "--input", required=True)

    p = sub.add_parser("memsave",
                       help="buffer bytes a colored sweep avoids")
    p.add_argument("--p", required=True, type=_nonnegative,
                   help="polynomial degree")
    p.add_argument("--neq", required=True, type=_positive,
                   help="equations per basis function")
    p.add_argument("--ns", required=True, type=_positive,
                   help="surface count")

    p = sub.add_parser("stats", help="coloring scaling study")
    p.add_argument("--family", required=True, choices=FAMILIES)
    p.add_argument("--sizes", required=True, type=_id_list,
                   help="comma-separated linear cell counts")
    p.add_argument("--seed", type=int, default=None)

    return parser


def _resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("MESHCHROMA_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise _UsageError(
            f"MESHCHROMA_SEED={env!r} is not an integer"
        ) from None


def _read_mesh_file(path) -> NativeMesh:
    if str(path).endswith(".msh"):
        return NativeMesh(mesh=read_msh(path))
    return read_native(path)


def _require_coloring(nm: NativeMesh):
    if nm.coloring is None:
        raise ValueError("input file has no COLORS section; color it first")
    return nm.coloring


def _cmd_generate(args) -> int:
    spec = GeneratorSpec(family=args.family, nx=args.nx, ny=args.ny,
                         nz=args.nz, periodic_x=args.periodic,
                         periodic_y=args.periodic)
    mesh = generate(spec)
    write_native(args.output, mesh)
    print(f"{mesh.n_elements} elements, {mesh.n_surfaces} surfaces "
          f"-> {args.output}")
    return EXIT_OK


def _cmd_color(args) -> int:
    nm = _read_mesh_file(args.input)
    config = ColoringConfig(rng_seed=_resolve_seed(args))
    coloring, report = color(nm.mesh, config)
    write_native(args.output, nm.mesh, coloring=coloring,
                 parents=nm.parents)
    write_report(report, args.report)
    return EXIT_OK


def _cmd_verify(args) -> int:
    nm = _read_mesh_file(args.input)
    issues = validate(nm.mesh)
    for diag in issues:
        print(f"{diag.code}: {diag.message}")
    if issues:
        return EXIT_INVALID
    if nm.coloring is None:
        print("mesh has no coloring")
        return EXIT_INVALID
    diags = verify_coloring(nm.mesh, nm.coloring)
    for diag in diags:
        print(f"{diag.code}: {diag.message}")
    if diags:
        return EXIT_INVALID
    used = sorted(set(nm.coloring.colors.tolist()))
    print(f"complete valid coloring with {len(used)} colors")
    return EXIT_OK


def _cmd_refine(args) -> int:
    nm = read_native(args.input)
    coloring = _require_coloring(nm)
    if nm.parents is not None and (nm.parents >= 0).any():
        raise LevelConstraintError(
            "input is already refined; one level is the maximum"
        )
    ids = (range(nm.mesh.n_elements) if args.all else args.elements)
    refined, fine_coloring = refine(nm.mesh, coloring, ids)
    write_native(args.output, refined.mesh, coloring=fine_coloring,
                 parents=refined.parents)
    print(f"refined {len(refined.map.refined)} elements; "
          f"{refined.mesh.n_elements} elements, "
          f"{refined.mesh.n_surfaces} surfaces -> {args.output}")
    return EXIT_OK


def _cmd_coarsen(args) -> int:
    nm = read_native(args.input)
    coloring = _require_coloring(nm)
    if nm.parents is None or not (np.asarray(nm.parents) >= 0).any():
        raise PartialFamilyError("input has no refinement to coarsen")
    refined, fine_coloring = reconstruct_refinement(
        nm.mesh, nm.parents, coloring
    )
    result, out_coloring = coarsen(refined, fine_coloring, args.parents)
    if isinstance(result, RefinedMesh):
        write_native(args.output, result.mesh, coloring=out_coloring,
                     parents=result.parents)
        print(f"{len(result.map.refined)} elements stay refined "
              f"-> {args.output}")
    else:
        write_native(args.output, result, coloring=out_coloring)
        print(f"fully coarsened -> {args.output}")
    return EXIT_OK


def _cmd_reorder(args) -> int:
    nm = _read_mesh_file(args.input)
    coloring = _require_coloring(nm)
    plan = build_plan(nm.mesh, coloring)
    new_mesh, new_coloring = apply_plan(nm.mesh, coloring, plan)
    write_native(args.output, new_mesh, coloring=new_coloring,
                 element_perm=plan.element_perm,
                 surface_perm=plan.surface_perm)
    if args.metric:
        before = coalescing_metric(nm.mesh, coloring)
        after = coalescing_metric(new_mesh, new_coloring)
        write_report({
            "aggregate_before": f"{before.aggregate:.6f}",
            "aggregate_after": f"{after.aggregate:.6f}",
            "used_fallback": int(plan.used_fallback),
        })
    return EXIT_OK


def _cmd_race_check(args) -> int:
    nm = _read_mesh_file(args.input)
    coloring = _require_coloring(nm)
    mesh = nm.mesh
    payload = default_payload(mesh.n_surfaces)
    seq = sweep_sequential(mesh, payload)
    col = sweep_colored(mesh, coloring, payload)
    buf = sweep_buffered(mesh, payload)
    ok = (np.array_equal(seq.totals, col.totals)
          and np.array_equal(seq.totals, buf.totals))
    lines = {
        "sequential_checksum": seq.checksum(),
        "colored_checksum": col.checksum(),
        "buffered_checksum": buf.checksum(),
    }
    closed = bool((mesh.surf_elems[:, 1] >= 0).all())
    if closed:
        total = int(seq.totals.sum())
        lines["accumulator_total"] = total
        ok = ok and total == 0
    lines["result"] = "PASS" if ok else "FAIL"
    write_report(lines)
    return EXIT_OK if ok else EXIT_INVALID


def _cmd_memsave(args) -> int:
    est = memory_saved(args.p, args.neq, args.ns)
    print(f"{est.n_bytes} bytes ({est.gb_truncated} GB)")
    return EXIT_OK


def _cmd_stats(args) -> int:
    series = run_series(args.family, args.sizes,
                        seed=_resolve_seed(args))
    for point in series.points:
        write_report({"family": series.family, **point.as_dict()})
        print()
    time_slope = series.time_slope
    conflict_slope = series.conflict_slope
    write_report({
        "points": len(series.points),
        "time_slope": ("none" if time_slope is None
                       else f"{time_slope:.4f}"),
        "conflict_slope": ("none" if conflict_slope is None
                           else f"{conflict_slope:.4f}"),
    })
    return EXIT_OK


_HANDLERS = {
    "generate": _cmd_generate,
    "color": _cmd_color,
    "verify": _cmd_verify,
    "refine": _cmd_refine,
    "coarsen": _cmd_coarsen,
    "reorder": _cmd_reorder,
    "race-check": _cmd_race_check,
    "memsave": _cmd_memsave,
    "stats": _cmd_stats,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return _HANDLERS[args.command](args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RestartsExhaustedError, SwapBudgetExceededError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COLORING
    except (LevelConstraintError, UnrefinableKindError,
            PartialFamilyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_AMR
    except (UnsupportedVersionError, MalformedSectionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NonManifoldError, DanglingVertexError, WriteConflictError,
            PlanMeshMismatchError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
