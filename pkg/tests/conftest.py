"""Shared fixtures and brute-force oracles.

The oracles here recompute counts and colorability the slow, obvious
way so the fast implementations have something independent to answer
to.
"""

from __future__ import annotations

import numpy as np
import pytest

from meshchroma import build_surfaces

_SIDES = {
    "tri": ((0, 1), (1, 2), (2, 0)),
    "quad": ((0, 1), (1, 2), (2, 3), (3, 0)),
    "tet": ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)),
}


def brute_surface_count(elements):
    """Count distinct surfaces by enumerating element sides as
    sorted vertex tuples."""
    seen = set()
    for kind, vids in elements:
        for side in _SIDES[kind]:
            seen.add(tuple(sorted(vids[p] for p in side)))
    return len(seen)


def brute_interior_count(elements):
    """Surfaces listed by exactly two elements."""
    hits = {}
    for kind, vids in elements:
        for side in _SIDES[kind]:
            key = tuple(sorted(vids[p] for p in side))
            hits[key] = hits.get(key, 0) + 1
    return sum(1 for n in hits.values() if n == 2)


def mesh_elements(mesh):
    """Back-convert a Mesh to (kind, vids) pairs for the oracles."""
    out = []
    for i in range(mesh.n_elements):
        e = mesh.element(i)
        out.append((e.kind.value, list(e.vertex_ids)))
    return out


def colorable_with(mesh, limit):
    """Exact backtracking: does a complete valid coloring with at most
    ``limit`` colors exist?  Only for small meshes."""
    ns = mesh.n_surfaces
    left = mesh.surf_elems[:, 0].tolist()
    right = mesh.surf_elems[:, 1].tolist()
    used = [0] * mesh.n_elements
    order = sorted(range(ns), key=lambda s: min(left[s], right[s]) if right[s] >= 0 else left[s])

    def bt(i):
        if i == ns:
            return True
        s = order[i]
        l, r = left[s], right[s]
        mask = used[l] | (used[r] if r >= 0 else 0)
        for c in range(1, limit + 1):
            bit = 1 << c
            if mask & bit:
                continue
            used[l] |= bit
            if r >= 0:
                used[r] |= bit
            if bt(i + 1):
                return True
            used[l] &= ~bit
            if r >= 0:
                used[r] &= ~bit
        return False

    return bt(0)


def hybrid_patch(nx, ny):
    """Conforming mix of quads and triangles on an nx-by-ny grid.

    Cells with even i+j are split along their diagonal, odd cells stay
    quads.  Splits are interior to cells so every shared edge matches.
    """
    verts = [(i, j) for j in range(ny + 1) for i in range(nx + 1)]

    def vid(i, j):
        return j * (nx + 1) + i

    elems = []
    for j in range(ny):
        for i in range(nx):
            a, b = vid(i, j), vid(i + 1, j)
            c, d = vid(i + 1, j + 1), vid(i, j + 1)
            if (i + j) % 2 == 0:
                elems.append(("tri", (a, b, c)))
                elems.append(("tri", (a, c, d)))
            else:
                elems.append(("quad", (a, b, c, d)))
    return build_surfaces(np.asarray(verts, dtype=float), elems)


@pytest.fixture
def two_tri():
    """Two triangles sharing one edge; 5 surfaces."""
    return build_surfaces(
        [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)],
        [("tri", (0, 1, 2)), ("tri", (0, 2, 3))],
    )


@pytest.fixture
def single_quad():
    return build_surfaces(
        [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)],
        [("quad", (0, 1, 2, 3))],
    )


@pytest.fixture
def single_tet():
    return build_surfaces(
        [(0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)],
        [("tet", (0, 1, 2, 3))],
    )
