"""Color-preserving 1:4 triangle refinement and its inverse.

Refining a triangle adds a midpoint to each edge and connects them,
producing three corner children plus one interior child.  Each parent
edge splits into two half edges; the half containing the parent edge's
lower-numbered endpoint keeps the parent color ``c`` and the other half
takes ``c + 3``.  Anchoring the rule at the lower global vertex id makes
the two elements flanking a shared edge agree on the split without any
communication, so the whole propagation is per-element independent.
Each of the three interior edges copies the color of the parent edge it
runs parallel to.

Three colors in, six colors out, and every element, coarse or fine,
still sees pairwise distinct colors on its own surfaces: a corner child
sees two halves of differently colored parent edges (distinct mod 3)
plus an interior copy of the third color, and the interior child sees
all three parent colors.

Coarsening reads the parent's edge colors back off the interior child's
edges, which by construction carry exactly the pre-refinement colors,
so refine followed by coarsen over the same element set is an exact
identity on both topology and coloring.

Only one level of refinement is supported: refining a refinement child
raises LevelConstraintError.  Interfaces between a refined and an
unrefined element are nonconforming; the coarse side keeps its full
edge as a surface record (with no element on the other side) while the
fine side contributes the two halves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coloring import SurfaceColoring, verify_coloring
from .errors import (
    LevelConstraintError,
    MalformedSectionError,
    PartialFamilyError,
    UnrefinableKindError,
)
from .mesh import ElementKind, Mesh, build_surfaces

# Interior child side k runs parallel to parent side _PARALLEL[k].
_PARALLEL = (2, 0, 1)

FINE_PALETTE = 6


def child_color(color: int, half: int) -> int:
    """Color of half ``half`` (1 or 2) of a parent edge colored ``color``.

    Half 1 is the one containing the parent edge's lower-numbered
    endpoint; it keeps the parent color.  Half 2 is shifted by three.
    """
    return (color + 3 * half - 4) % 6 + 1


@dataclass(frozen=True)
class FamilyRecord:
    """One refined parent: its children and every color the split made.

    ``children`` lists fine element ids: the corner child at local
    vertex 0, 1, 2, then the interior child.  ``child_edge_colors[k]``
    gives the two half colors of parent side k with the half containing
    the lower-numbered endpoint first.  ``interior_edge_colors[k]`` is
    the color of interior-child side k (the copy of parent side
    ``_PARALLEL[k]``).
    """

    parent: int
    children: tuple[int, int, int, int]
    parent_edge_colors: tuple[int, int, int]
    child_edge_colors: tuple[
        tuple[int, int], tuple[int, int], tuple[int, int]
    ]
    interior_edge_colors: tuple[int, int, int]


@dataclass(frozen=True)
class RefinementMap:
    """Which elements were refined and what each split produced."""

    refined: tuple[int, ...]
    families: tuple[FamilyRecord, ...]

    def family(self, parent: int) -> FamilyRecord:
        lo, hi = 0, len(self.refined)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.refined[mid] < parent:
                lo = mid + 1
            else:
                hi = mid
        if lo < len(self.refined) and self.refined[lo] == parent:
            return self.families[lo]
        raise KeyError(parent)


@dataclass(frozen=True, eq=False)
class RefinedMesh:
    """A base mesh, its refined counterpart, and the bookkeeping
    linking the two.

    ``origin`` maps each fine element to the base element it came from
    (itself for unrefined copies); ``child_slot`` is -1 for unrefined
    copies and 0..3 for children, interior child last.  ``surf_origin``
    classifies each fine surface: 0 = a base edge kept whole, 1 = half
    of a split base edge, 2 = interior edge of a refined parent.
    ``base_surface`` names the related base edge in all three cases
    (the parallel one for interior edges) and ``half_index`` is 1 or 2
    for halves, 0 otherwise.
    """

    base: Mesh
    mesh: Mesh
    origin: np.ndarray
    child_slot: np.ndarray
    map: RefinementMap
    surf_origin: np.ndarray
    base_surface: np.ndarray
    half_index: np.ndarray

    def __post_init__(self):
        for arr in (self.origin, self.child_slot, self.surf_origin,
                    self.base_surface, self.half_index):
            arr.setflags(write=False)

    @property
    def parents(self) -> np.ndarray:
        """Per fine element: parent base id, or -1 for unrefined copies."""
        return np.where(self.child_slot >= 0, self.origin, -1)

    @property
    def n_unrefined(self) -> int:
        return int((self.child_slot < 0).sum())

    def hanging_interfaces(self) -> tuple[tuple[int, int, int], ...]:
        """(coarse full edge, lower half, upper half) fine surface ids
        for every nonconforming interface."""
        halves: dict[int, list[int]] = {}
        for s in np.nonzero(self.surf_origin == 1)[0]:
            halves.setdefault(int(self.base_surface[s]), []).append(int(s))
        out = []
        for s in np.nonzero(self.surf_origin == 0)[0]:
            pair = halves.get(int(self.base_surface[s]))
            if pair is None:
                continue
            first, second = pair
            if self.half_index[first] != 1:
                first, second = second, first
            out.append((int(s), first, second))
        return tuple(sorted(out))


def _derive_fine_colors(surf_origin, base_surface, half_index,
                        base_colors) -> np.ndarray:
    colors = base_colors[base_surface].astype(np.int32)
    halves = surf_origin == 1
    m = half_index[halves]
    colors[halves] = (colors[halves] + 3 * m - 4) % 6 + 1
    return colors


def _materialize(base: Mesh, base_colors: np.ndarray,
                 refined) -> tuple[RefinedMesh, SurfaceColoring]:
    """Build the fine mesh for a refinement set.  Pure: the result is a
    function of (base, base_colors, refined) alone."""
    refined = tuple(sorted({int(e) for e in refined}))
    rset = set(refined)
    nbv = base.n_vertices

    split_sids = sorted({
        int(s) for p in refined for s in base.elem_surfs[p, :3]
    })
    mid_of = {s: nbv + i for i, s in enumerate(split_sids)}
    edge_of_mid = {
        mid_of[s]: (int(base.surf_verts[s, 0]), int(base.surf_verts[s, 1]))
        for s in split_sids
    }
    if split_sids:
        ends = base.surf_verts[split_sids]
        mid_coords = 0.5 * (base.vertices[ends[:, 0]]
                            + base.vertices[ends[:, 1]])
        fine_verts = np.vstack([base.vertices, mid_coords])
    else:
        fine_verts = base.vertices

    fine_elements: list[tuple[ElementKind, tuple[int, ...]]] = []
    origin: list[int] = []
    child_slot: list[int] = []
    for e in range(base.n_elements):
        if e in rset:
            continue
        kind = base.kind_of(e)
        vids = tuple(int(v) for v in base.elem_verts[e, : kind.n_vertices])
        fine_elements.append((kind, vids))
        origin.append(e)
        child_slot.append(-1)

    first_child = {}
    for p in refined:
        v0, v1, v2 = (int(v) for v in base.elem_verts[p, :3])
        s0, s1, s2 = (int(s) for s in base.elem_surfs[p, :3])
        m01, m12, m20 = mid_of[s0], mid_of[s1], mid_of[s2]
        first_child[p] = len(fine_elements)
        for vids in ((v0, m01, m20), (v1, m12, m01),
                     (v2, m20, m12), (m01, m12, m20)):
            fine_elements.append((ElementKind.TRIANGLE, vids))
            origin.append(p)
        child_slot.extend((0, 1, 2, 3))

    fine = build_surfaces(fine_verts, fine_elements)

    base_sid = {
        (int(u), int(w)): s
        for s, (u, w) in enumerate(base.surf_verts)
    }
    ns = fine.n_surfaces
    surf_origin = np.empty(ns, dtype=np.int8)
    base_surface = np.empty(ns, dtype=np.int64)
    half_index = np.zeros(ns, dtype=np.int8)
    for s in range(ns):
        a, b = int(fine.surf_verts[s, 0]), int(fine.surf_verts[s, 1])
        if b < nbv:
            surf_origin[s] = 0
            base_surface[s] = base_sid[(a, b)]
        elif a < nbv:
            u, w = edge_of_mid[b]
            surf_origin[s] = 1
            base_surface[s] = base_sid[(u, w)]
            half_index[s] = 1 if a == u else 2
        else:
            u1, w1 = edge_of_mid[a]
            u2, w2 = edge_of_mid[b]
            shared = {u1, w1} & {u2, w2}
            if len(shared) != 1:
                raise AssertionError("interior edge spans two parents")
            common = shared.pop()
            x = u1 + w1 - common
            y = u2 + w2 - common
            surf_origin[s] = 2
            base_surface[s] = base_sid[(min(x, y), max(x, y))]

    base_colors = np.asarray(base_colors, dtype=np.int32)
    colors = _derive_fine_colors(surf_origin, base_surface, half_index,
                                 base_colors)

    families = []
    for p in refined:
        sids = tuple(int(s) for s in base.elem_surfs[p, :3])
        pcol = tuple(int(base_colors[s]) for s in sids)
        k0 = first_child[p]
        families.append(FamilyRecord(
            parent=p,
            children=(k0, k0 + 1, k0 + 2, k0 + 3),
            parent_edge_colors=pcol,
            child_edge_colors=tuple(
                (child_color(c, 1), child_color(c, 2)) for c in pcol
            ),
            interior_edge_colors=tuple(pcol[_PARALLEL[k]] for k in range(3)),
        ))

    refined_mesh = RefinedMesh(
        base=base,
        mesh=fine,
        origin=np.asarray(origin, dtype=np.int64),
        child_slot=np.asarray(child_slot, dtype=np.int8),
        map=RefinementMap(refined=refined, families=tuple(families)),
        surf_origin=surf_origin,
        base_surface=base_surface,
        half_index=half_index,
    )
    return refined_mesh, SurfaceColoring(colors, FINE_PALETTE)


def _check_base_coloring(mesh: Mesh, coloring: SurfaceColoring) -> None:
    colors = coloring.colors
    if len(colors) != mesh.n_surfaces:
        raise ValueError("coloring does not match the mesh")
    if not coloring.is_complete:
        raise ValueError("refinement needs a complete coloring")
    if colors.min() < 1 or colors.max() > 3:
        raise ValueError("refinement needs a three-color base coloring")
    if verify_coloring(mesh, coloring):
        raise ValueError("refinement needs a valid coloring")


def _recover_base_colors(refined: RefinedMesh, coloring: SurfaceColoring,
                         coarsened=()) -> np.ndarray:
    """Read the base coloring back out of a fine coloring.

    Elements being coarsened use the documented rule: parent side n
    takes the color of the interior child edge parallel to it.  All
    other base edges read the full edge, or the half containing the
    lower endpoint, which carries the parent color unchanged.
    """
    fc = np.asarray(coloring.colors)
    if len(fc) != refined.mesh.n_surfaces:
        raise ValueError("coloring does not match the fine mesh")
    out = np.full(refined.base.n_surfaces, -1, dtype=np.int32)

    for p in coarsened:
        rec = refined.map.family(p)
        interior_child = rec.children[3]
        for k in range(3):
            fine_sid = int(refined.mesh.elem_surfs[interior_child, k])
            bsid = int(refined.base.elem_surfs[p, _PARALLEL[k]])
            c = int(fc[fine_sid])
            if out[bsid] >= 0 and out[bsid] != c:
                raise ValueError(
                    f"inconsistent colors recovered for base edge {bsid}"
                )
            out[bsid] = c

    keep = (refined.surf_origin == 0) | (
        (refined.surf_origin == 1) & (refined.half_index == 1)
    )
    direct = fc[keep].astype(np.int32)
    targets = refined.base_surface[keep]
    clash = (out[targets] >= 0) & (out[targets] != direct)
    if clash.any():
        raise ValueError("coloring was not produced by this refinement")
    out[targets] = direct

    if (out < 1).any() or (out > 3).any():
        raise ValueError("coloring was not produced by this refinement")
    rederived = _derive_fine_colors(
        refined.surf_origin, refined.base_surface, refined.half_index, out
    )
    if not np.array_equal(rederived, fc):
        raise ValueError("coloring was not produced by this refinement")
    return out


def refine(source, coloring: SurfaceColoring,
           elements) -> tuple[RefinedMesh, SurfaceColoring]:
    """Refine the given elements 1:4 and propagate colors.

    ``source`` is a conforming triangle mesh with a complete, valid
    3-coloring, or an existing RefinedMesh (with its 6-coloring) whose
    unrefined elements may be refined further.  Returns the refined
    mesh and a complete, valid coloring over at most six colors.
    """
    if isinstance(source, RefinedMesh):
        fine_ids = sorted({int(e) for e in elements})
        for f in fine_ids:
            if not 0 <= f < source.mesh.n_elements:
                raise ValueError(f"no element {f} in the mesh")
            if source.child_slot[f] >= 0:
                raise LevelConstraintError(
                    f"element {f} is already a refinement child; "
                    f"adjacent elements may differ by one level only"
                )
        base_colors = _recover_base_colors(source, coloring)
        new_set = set(source.map.refined)
        new_set.update(int(source.origin[f]) for f in fine_ids)
        return _materialize(source.base, base_colors, new_set)

    mesh: Mesh = source
    if mesh.element_kind_profile != {ElementKind.TRIANGLE}:
        raise UnrefinableKindError(
            "1:4 refinement is defined for triangle meshes only"
        )
    ids = sorted({int(e) for e in elements})
    for e in ids:
        if not 0 <= e < mesh.n_elements:
            raise ValueError(f"no element {e} in the mesh")
    _check_base_coloring(mesh, coloring)
    return _materialize(mesh, coloring.colors, ids)


def coarsen(refined: RefinedMesh, coloring: SurfaceColoring,
            parents) -> tuple[Mesh | RefinedMesh, SurfaceColoring]:
    """Merge each listed parent's four children back into the parent.

    Parent edge colors are recovered from the interior child.  Returns
    the base mesh and its 3-coloring when nothing stays refined, else a
    RefinedMesh over the remaining set with its 6-coloring.
    """
    ps = sorted({int(p) for p in parents})
    rset = set(refined.map.refined)
    for p in ps:
        if p not in rset:
            raise PartialFamilyError(
                f"element {p} has no complete refinement family"
            )
    base_colors = _recover_base_colors(refined, coloring, coarsened=ps)
    remaining = rset - set(ps)
    if not remaining:
        return refined.base, SurfaceColoring(base_colors, 3)
    return _materialize(refined.base, base_colors, remaining)


def max_refined_neighbors(refined: RefinedMesh) -> int:
    """Largest number of refinement children adjacent to any unrefined
    element.  Each refined edge neighbor contributes two children, so a
    triangle with all three neighbors refined scores six."""
    rset = set(refined.map.refined)
    counts: dict[int, int] = {}
    base = refined.base
    for s in range(base.n_surfaces):
        left = int(base.surf_elems[s, 0])
        right = int(base.surf_elems[s, 1])
        if right < 0:
            continue
        if left in rset and right not in rset:
            counts[right] = counts.get(right, 0) + 2
        elif right in rset and left not in rset:
            counts[left] = counts.get(left, 0) + 2
    return max(counts.values(), default=0)


def reconstruct_refinement(
    fine: Mesh, parents, coloring: SurfaceColoring
) -> tuple[RefinedMesh, SurfaceColoring]:
    """Rebuild a RefinedMesh from serialized (mesh, parents, colors).

    Only canonical layouts are accepted: unrefined elements first, then
    four consecutive children per refined parent in ascending parent
    order.  The base mesh is reassembled, re-refined, and required to
    reproduce the input exactly; anything else is malformed.
    """
    parents = np.asarray(parents, dtype=np.int64)
    nf = fine.n_elements
    if parents.shape != (nf,):
        raise MalformedSectionError("parent table length mismatch")
    child_rows = np.nonzero(parents >= 0)[0]
    groups: dict[int, list[int]] = {}
    for fid in child_rows:
        groups.setdefault(int(parents[fid]), []).append(int(fid))
    for p, kids in groups.items():
        if len(kids) != 4:
            raise PartialFamilyError(
                f"parent {p} has {len(kids)} children, expected 4"
            )
    refined_ids = sorted(groups)
    n_unref = nf - 4 * len(refined_ids)
    n_base = n_unref + len(refined_ids)
    if refined_ids and not (0 <= refined_ids[0]
                            and refined_ids[-1] < n_base):
        raise MalformedSectionError("parent id out of range")
    expected = [-1] * n_unref
    for p in refined_ids:
        expected.extend((p, p, p, p))
    if parents.tolist() != expected:
        raise MalformedSectionError(
            "parent table is not in canonical order"
        )

    unref_base_ids = sorted(set(range(n_base)) - set(refined_ids))
    base_elements: list = [None] * n_base
    for j, b in enumerate(unref_base_ids):
        kind = fine.kind_of(j)
        vids = tuple(int(v) for v in fine.elem_verts[j, : kind.n_vertices])
        base_elements[b] = (kind, vids)
    for idx, p in enumerate(refined_ids):
        k0 = n_unref + 4 * idx
        for t in range(4):
            if fine.kind_of(k0 + t) is not ElementKind.TRIANGLE:
                raise MalformedSectionError(
                    "refinement children must be triangles"
                )
        corners = tuple(int(fine.elem_verts[k0 + t, 0]) for t in range(3))
        base_elements[p] = (ElementKind.TRIANGLE, corners)

    nbv = 1 + max(v for _, vids in base_elements for v in vids)
    if nbv > fine.n_vertices:
        raise MalformedSectionError("base vertex id out of range")
    try:
        base = build_surfaces(fine.vertices[:nbv], base_elements)
    except Exception as exc:
        raise MalformedSectionError(
            f"could not reassemble the base mesh: {exc}"
        ) from None

    fc = np.asarray(coloring.colors)
    if len(fc) != fine.n_surfaces:
        raise MalformedSectionError("colors do not match the fine mesh")
    fine_sid = {
        (int(u), int(w)): s for s, (u, w) in enumerate(fine.surf_verts)
    }
    base_sid = {
        (int(u), int(w)): s for s, (u, w) in enumerate(base.surf_verts)
    }
    base_colors = np.full(base.n_surfaces, -1, dtype=np.int32)

    def put(bsid, c):
        if not 1 <= c <= 3:
            raise MalformedSectionError(
                f"recovered color {c} is outside the base palette"
            )
        if base_colors[bsid] >= 0 and base_colors[bsid] != c:
            raise MalformedSectionError(
                f"conflicting colors recovered for base edge {bsid}"
            )
        base_colors[bsid] = c

    split = set()
    for idx, p in enumerate(refined_ids):
        k0 = n_unref + 4 * idx
        v = base_elements[p][1]
        mids = (int(fine.elem_verts[k0, 1]),      # midpoint of (v0, v1)
                int(fine.elem_verts[k0 + 1, 1]),  # midpoint of (v1, v2)
                int(fine.elem_verts[k0 + 2, 1]))  # midpoint of (v2, v0)
        cross = (int(fine.elem_verts[k0 + 1, 2]),
                 int(fine.elem_verts[k0 + 2, 2]),
                 int(fine.elem_verts[k0, 2]))
        if mids != cross:
            raise MalformedSectionError(
                f"children of parent {p} do not share midpoints"
            )
        for k in range(3):
            u, w = v[k], v[(k + 1) % 3]
            m = mids[k]
            if not np.array_equal(
                fine.vertices[m],
                0.5 * (fine.vertices[u] + fine.vertices[w]),
            ):
                raise MalformedSectionError(
                    f"vertex {m} is not the midpoint of ({u}, {w})"
                )
            lo = min(u, w)
            half = fine_sid.get((min(lo, m), max(lo, m)))
            bsid = base_sid.get((min(u, w), max(u, w)))
            if half is None or bsid is None:
                raise MalformedSectionError(
                    f"half edges of base edge ({u}, {w}) are missing"
                )
            put(bsid, int(fc[half]))
            split.add(bsid)

    for bsid in range(base.n_surfaces):
        if bsid in split:
            continue
        u, w = int(base.surf_verts[bsid, 0]), int(base.surf_verts[bsid, 1])
        s = fine_sid.get((u, w))
        if s is None:
            raise MalformedSectionError(
                f"base edge ({u}, {w}) has no fine counterpart"
            )
        put(bsid, int(fc[s]))

    rebuilt, recolored = _materialize(base, base_colors, refined_ids)
    same = (
        np.array_equal(rebuilt.mesh.vertices, fine.vertices)
        and np.array_equal(rebuilt.mesh.elem_kind, fine.elem_kind)
        and np.array_equal(rebuilt.mesh.elem_verts, fine.elem_verts)
        and np.array_equal(rebuilt.mesh.surf_verts, fine.surf_verts)
        and np.array_equal(rebuilt.mesh.surf_elems, fine.surf_elems)
        and np.array_equal(recolored.colors, fc)
    )
    if not same:
        raise MalformedSectionError(
            "mesh is not a canonical single-level refinement"
        )
    return rebuilt, recolored
