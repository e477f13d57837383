"""Concurrent surface accumulation, three ways, with proof hooks.

Each surface k carries an integer payload f(k); processing it adds
+f(k) to its left element's accumulator and -f(k) to its right one
(boundary surfaces have no right).  Payloads are integers so results
compare bit-exactly across strategies, with no reassociation slack:

* sweep_sequential: one worker, surfaces in id order.  The oracle.
* sweep_colored: surfaces of one color at a time, split across a
  thread pool, with a barrier between colors.  A valid coloring means
  no two surfaces in flight touch the same element, so the unguarded
  read-modify-writes are safe; that safety is what the coloring buys.
* sweep_buffered: no coloring needed.  Workers first write surface k's
  two contributions to private buffer slots 2k and 2k+1, then, after a
  barrier, workers gather each element's slots.  Trades 2 * n_surfaces
  extra storage for independence.

assert_race_free checks the static property directly: within each
color class, no element id appears twice.

Also here: the memory cost of the buffered strategy's extra buffers
for a hypothetical degree-p solver, which is what the buffered->colored
switch saves.
"""

from __future__ import annotations

import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .coloring import SurfaceColoring
from .errors import WriteConflictError
from .mesh import Mesh

_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_MASK = (1 << 64) - 1


@dataclass
class AccumulationState:
    """Per-element integer accumulators plus the payload that fed them."""

    totals: np.ndarray
    payload: np.ndarray

    def checksum(self) -> int:
        return zlib.crc32(self.totals.astype("<i8").tobytes())


def default_payload(n_surfaces: int, seed: int = 0) -> np.ndarray:
    """Deterministic 20-bit signed payload per surface id (splitmix64)."""
    z = np.arange(1, n_surfaces + 1, dtype=np.uint64)
    z = z * np.uint64(_GOLDEN) + np.uint64((seed * _MIX2) & _MASK)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(44)).astype(np.int64) - (1 << 19)


def _payload_for(mesh: Mesh, payload) -> np.ndarray:
    if payload is None:
        return default_payload(mesh.n_surfaces)
    payload = np.asarray(payload, dtype=np.int64)
    if payload.shape != (mesh.n_surfaces,):
        raise ValueError("payload must provide one integer per surface")
    return payload


def sweep_sequential(mesh: Mesh, payload=None) -> AccumulationState:
    """Single-worker reference: surfaces in id order."""
    payload = _payload_for(mesh, payload)
    totals = [0] * mesh.n_elements
    left = mesh.surf_elems[:, 0].tolist()
    right = mesh.surf_elems[:, 1].tolist()
    values = payload.tolist()
    for k in range(mesh.n_surfaces):
        totals[left[k]] += values[k]
        r = right[k]
        if r >= 0:
            totals[r] -= values[k]
    return AccumulationState(np.asarray(totals, dtype=np.int64), payload)


def assert_race_free(mesh: Mesh, coloring: SurfaceColoring) -> None:
    """Check that no color class writes any element twice."""
    colors = coloring.colors
    left = mesh.surf_elems[:, 0]
    right = mesh.surf_elems[:, 1]
    for c in range(1, coloring.n_colors + 1):
        mask = colors == c
        touched = np.concatenate([
            left[mask], right[mask & (right >= 0)]
        ])
        uniq, counts = np.unique(touched, return_counts=True)
        dup = uniq[counts > 1]
        if dup.size:
            raise WriteConflictError(
                f"color {c} writes element {int(dup[0])} "
                f"{int(counts[counts > 1][0])} times"
            )


def _chunks(items: list, n: int):
    step = max(1, -(-len(items) // n))
    for i in range(0, len(items), step):
        yield items[i: i + step]


def sweep_colored(mesh: Mesh, coloring: SurfaceColoring, payload=None,
                  workers: int = 4, check: bool = True) -> AccumulationState:
    """Color-by-color concurrent accumulation.

    Workers within one color class write to the shared totals without
    any locking; a barrier (joining the class's futures) separates the
    classes.  With ``check`` the static no-duplicate-writes property is
    verified first and a violation raises WriteConflictError.
    """
    if not coloring.is_complete:
        raise ValueError("colored sweep needs a complete coloring")
    if len(coloring.colors) != mesh.n_surfaces:
        raise ValueError("coloring does not match the mesh")
    if check:
        assert_race_free(mesh, coloring)
    payload = _payload_for(mesh, payload)
    totals = [0] * mesh.n_elements
    left = mesh.surf_elems[:, 0].tolist()
    right = mesh.surf_elems[:, 1].tolist()
    values = payload.tolist()
    colors = coloring.colors

    def run(sids: list) -> None:
        for s in sids:
            totals[left[s]] += values[s]
            r = right[s]
            if r >= 0:
                totals[r] -= values[s]

    with ThreadPoolExecutor(max_workers=workers) as pool:
        for c in range(1, coloring.n_colors + 1):
            group = np.nonzero(colors == c)[0].tolist()
            if not group:
                continue
            futures = [pool.submit(run, chunk)
                       for chunk in _chunks(group, workers)]
            for f in futures:
                f.result()
    return AccumulationState(np.asarray(totals, dtype=np.int64), payload)


def surface_buffer(mesh: Mesh, payload=None,
                   workers: int = 4) -> np.ndarray:
    """Phase one of the buffered strategy: slot 2k takes surface k's
    left contribution, slot 2k+1 the right one (0 on the boundary)."""
    payload = _payload_for(mesh, payload)
    buffer = [0] * (2 * mesh.n_surfaces)
    right = mesh.surf_elems[:, 1].tolist()
    values = payload.tolist()

    def fill(sids: list) -> None:
        for s in sids:
            buffer[2 * s] = values[s]
            if right[s] >= 0:
                buffer[2 * s + 1] = -values[s]

    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fill, chunk)
                   for chunk in _chunks(list(range(mesh.n_surfaces)),
                                        workers)]
        for f in futures:
            f.result()
    return np.asarray(buffer, dtype=np.int64)


def sweep_buffered(mesh: Mesh, payload=None,
                   workers: int = 4) -> AccumulationState:
    """Two-phase accumulation through a 2 * n_surfaces buffer: fill
    concurrently, barrier, then gather each element's slots."""
    payload = _payload_for(mesh, payload)
    buffer = surface_buffer(mesh, payload, workers).tolist()
    totals = [0] * mesh.n_elements
    left = mesh.surf_elems[:, 0].tolist()
    elem_surfs = mesh.elem_surfs.tolist()

    def gather(eids: list) -> None:
        for e in eids:
            acc = 0
            for s in elem_surfs[e]:
                if s < 0:
                    break
                acc += buffer[2 * s] if left[s] == e else buffer[2 * s + 1]
            totals[e] = acc

    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(gather, chunk)
                   for chunk in _chunks(list(range(mesh.n_elements)),
                                        workers)]
        for f in futures:
            f.result()
    return AccumulationState(np.asarray(totals, dtype=np.int64), payload)


def basis_count(p: int, kind: str = "tri") -> int:
    """Nodal basis size for polynomial degree p on one element."""
    if p < 0:
        raise ValueError("degree must be nonnegative")
    if kind == "tri":
        return (p + 1) * (p + 2) // 2
    if kind == "quad":
        return (p + 1) ** 2
    if kind == "tet":
        return (p + 1) * (p + 2) * (p + 3) // 6
    raise ValueError(f"unknown element kind {kind!r}")


@dataclass(frozen=True)
class MemoryEstimate:
    """Bytes the buffered strategy needs for its two surface buffers:
    2 * n_basis * n_equations * n_surfaces doubles."""

    n_basis: int
    n_equations: int
    n_surfaces: int
    n_bytes: int

    def __post_init__(self):
        if min(self.n_basis, self.n_equations,
               self.n_surfaces, self.n_bytes) <= 0:
            raise ValueError("estimate fields must be positive")

    @property
    def gb_truncated(self) -> str:
        """Decimal GB, truncated (not rounded) to two decimals."""
        hundredths = self.n_bytes * 100 // 10**9
        return f"{hundredths // 100}.{hundredths % 100:02d}"


def memory_saved(p: int, n_equations: int, n_surfaces: int,
                 kind: str = "tri") -> MemoryEstimate:
    """Buffer memory a colored sweep avoids, for a degree-p solver."""
    n_basis = basis_count(p, kind)
    if n_equations < 1 or n_surfaces < 1:
        raise ValueError("equation and surface counts must be positive")
    n_bytes = 2 * n_basis * n_equations * n_surfaces * 8
    return MemoryEstimate(n_basis, n_equations, n_surfaces, n_bytes)
