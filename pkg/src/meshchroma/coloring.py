"""Surface coloring with a fixed palette and randomized conflict repair.

The palette has 3 colors for pure triangle meshes and 4 as soon as any
quad or tetrahedron is present.  A first greedy pass assigns each
surface a random color that conflicts with neither incident element and
leaves -1 where no such color exists.  A repair pass then walks each
leftover conflict: it recolors the surface if a free color appeared,
otherwise it swaps the conflict onto a neighboring surface without
increasing the conflict count.  A chain that revisits a surface is a
loop; the loop is broken by giving the conflict surface a color carried
by one surface on each side and uncoloring those two, which trades one
conflict for two but changes the layout enough for the walk to escape.

Everything is driven by one seeded RNG, so identical seeds reproduce
identical colorings.
"""

from __future__ import annotations

import random
import time
import weakref
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import RestartsExhaustedError, SwapBudgetExceededError
from .mesh import (Diagnostic, ElementKind, Mesh, connectivity_graph,
                   vizing_bound)

# colors per available-mask, for masks over color bits 1..7
_MASK_CHOICES = tuple(
    tuple(c for c in range(1, 8) if (m >> c) & 1) for m in range(1 << 8)
)


def color_set_size(mesh: Mesh) -> int:
    """3 for pure triangle meshes, 4 once quads or tets are present."""
    if mesh.element_kind_profile == frozenset({ElementKind.TRIANGLE}):
        return 3
    return 4


@dataclass(frozen=True)
class ColoringConfig:
    rng_seed: int = 0
    # swap budget per conflict chain; None means 10 * n_surfaces
    max_swaps_per_conflict: int | None = None
    max_restarts: int = 5
    # recheck full validity after every repair step (tests only, slow)
    audit: bool = False


@dataclass(eq=False)
class SurfaceColoring:
    """Color per surface (-1 = uncolored) plus the palette size."""

    colors: np.ndarray  # (ns,) int32
    n_colors: int

    @property
    def is_complete(self) -> bool:
        return bool((self.colors >= 1).all())

    def conflict_ids(self) -> np.ndarray:
        return np.flatnonzero(self.colors < 0)

    def color_counts(self) -> tuple[int, ...]:
        counts = np.bincount(self.colors[self.colors >= 1],
                             minlength=self.n_colors + 1)
        return tuple(int(c) for c in counts[1:self.n_colors + 1])

    def copy(self) -> "SurfaceColoring":
        return SurfaceColoring(self.colors.copy(), self.n_colors)


@dataclass(frozen=True)
class ColoringReport:
    n_elements: int
    n_surfaces: int
    n_colors: int
    vizing_bound: int
    greedy_conflicts: int
    resolutions: int
    swaps: int
    loop_breaks: int
    no_swap_breaks: int
    forced_reswaps: int
    restarts: int
    color_counts: tuple[int, ...]
    greedy_seconds: float
    resolve_seconds: float
    total_seconds: float

    def as_dict(self) -> dict[str, object]:
        d: dict[str, object] = {
            "n_elements": self.n_elements,
            "n_surfaces": self.n_surfaces,
            "n_colors": self.n_colors,
            "vizing_bound": self.vizing_bound,
            "greedy_conflicts": self.greedy_conflicts,
            "resolutions": self.resolutions,
            "swaps": self.swaps,
            "loop_breaks": self.loop_breaks,
            "no_swap_breaks": self.no_swap_breaks,
            "forced_reswaps": self.forced_reswaps,
            "restarts": self.restarts,
        }
        for i, n in enumerate(self.color_counts, start=1):
            d[f"color_count_{i}"] = n
        d["greedy_seconds"] = round(self.greedy_seconds, 6)
        d["resolve_seconds"] = round(self.resolve_seconds, 6)
        d["total_seconds"] = round(self.total_seconds, 6)
        return d


_incidence_cache: "weakref.WeakKeyDictionary[Mesh, tuple]" = (
    weakref.WeakKeyDictionary()
)


def _incidence(mesh: Mesh):
    """Plain-list incidence for the hot loops, cached per mesh."""
    got = _incidence_cache.get(mesh)
    if got is not None:
        return got
    left = mesh.surf_elems[:, 0].tolist()
    right = mesh.surf_elems[:, 1].tolist()
    elem_surfs = tuple(
        tuple(s for s in row if s >= 0) for row in mesh.elem_surfs.tolist()
    )
    got = (left, right, elem_surfs)
    _incidence_cache[mesh] = got
    return got


def _greedy_pass(left, right, n_elements, n_colors, rng):
    """One pass in surface-id order; returns colors, per-element color
    bitmasks, and the ids left unresolved."""
    full = ((1 << n_colors) - 1) << 1
    choices = _MASK_CHOICES
    used = [0] * n_elements
    ns = len(left)
    colors = [-1] * ns
    conflicts = []
    rand = rng.random
    push = conflicts.append
    for k in range(ns):
        l = left[k]
        r = right[k]
        ul = used[l]
        ur = used[r] if r >= 0 else 0
        m = full & ~(ul | ur)
        if m:
            t = choices[m]
            n = len(t)
            c = t[0] if n == 1 else t[int(rand() * n)]
            colors[k] = c
            b = 1 << c
            used[l] = ul | b
            if r >= 0:
                used[r] = ur | b
        else:
            push(k)
    return colors, used, conflicts


def _rebuild_used(colors, left, right, n_elements):
    used = [0] * n_elements
    for k, c in enumerate(colors):
        if c < 1:
            continue
        b = 1 << c
        l = left[k]
        if used[l] & b:
            raise ValueError(
                f"input coloring repeats color {c} on element {l}"
            )
        used[l] |= b
        r = right[k]
        if r >= 0:
            if used[r] & b:
                raise ValueError(
                    f"input coloring repeats color {c} on element {r}"
                )
            used[r] |= b
    return used


@dataclass
class _RepairStats:
    resolutions: int = 0
    swaps: int = 0
    loop_breaks: int = 0
    no_swap_breaks: int = 0
    forced_reswaps: int = 0


def _carrier(surfaces, colors, c):
    for s in surfaces:
        if colors[s] == c:
            return s
    raise AssertionError(f"no surface of color {c} on element")


def _repair(left, right, elem_surfs, colors, used, conflicts, n_colors,
            rng, chain_budget, total_budget, audit=None) -> _RepairStats:
    """Walk every conflict until the coloring is complete.

    Mutates ``colors`` and ``used`` in place.  Raises
    ``SwapBudgetExceededError`` when a single chain exceeds
    ``chain_budget`` swaps or the whole repair exceeds ``total_budget``.
    """
    full = ((1 << n_colors) - 1) << 1
    choices = _MASK_CHOICES
    rand = rng.random
    stats = _RepairStats()
    queue = deque(conflicts)
    total_swaps = 0

    while queue:
        e = queue.popleft()
        if colors[e] != -1:
            continue
        visited = {e}
        chain_swaps = 0
        while True:
            l = left[e]
            r = right[e]
            ul = used[l]
            ur = used[r] if r >= 0 else 0
            m = full & ~(ul | ur)
            if m:
                t = choices[m]
                n = len(t)
                c = t[0] if n == 1 else t[int(rand() * n)]
                colors[e] = c
                b = 1 << c
                used[l] = ul | b
                if r >= 0:
                    used[r] = ur | b
                stats.resolutions += 1
                if audit:
                    audit()
                break

            # Every color is taken.  A color carried by exactly one
            # surface across both elements can be swapped onto e; a
            # color carried on both sides by two distinct surfaces is a
            # loop-break option (uncolor both, +1 conflict).  The walk
            # prefers surfaces it has not occupied yet; a loop exists
            # only when every swap target is already visited.
            both = ul & ur
            single = (ul | ur) ^ both
            cand = []
            stale = []
            breaks = []
            if single:
                for c in choices[single]:
                    owner = l if (ul >> c) & 1 else r
                    s = _carrier(elem_surfs[owner], colors, c)
                    (stale if s in visited else cand).append((c, s))
            if both:
                for c in choices[both]:
                    ea = _carrier(elem_surfs[l], colors, c)
                    eb = _carrier(elem_surfs[r], colors, c)
                    if ea == eb:
                        (stale if ea in visited else cand).append((c, ea))
                    else:
                        breaks.append((c, ea, eb))

            if not cand:
                if breaks:
                    n = len(breaks)
                    c, ea, eb = (breaks[0] if n == 1
                                 else breaks[int(rand() * n)])
                    b = 1 << c
                    for s in (ea, eb):
                        colors[s] = -1
                        used[left[s]] &= ~b
                        rs = right[s]
                        if rs >= 0:
                            used[rs] &= ~b
                    colors[e] = c
                    used[l] |= b
                    if r >= 0:
                        used[r] |= b
                    queue.append(ea)
                    queue.append(eb)
                    if stale or single:
                        stats.loop_breaks += 1
                    else:
                        stats.no_swap_breaks += 1
                    if audit:
                        audit()
                    break
                if not stale:
                    # unreachable on conforming meshes; bail to restart
                    raise SwapBudgetExceededError(
                        f"conflict on surface {e} has no admissible move"
                    )
                # nowhere fresh to go and nothing to break: re-enter the
                # visited region and let the RNG reshuffle it
                cand = stale
                stats.forced_reswaps += 1

            n = len(cand)
            c, es = cand[0] if n == 1 else cand[int(rand() * n)]
            b = 1 << c
            colors[es] = -1
            used[left[es]] &= ~b
            rs = right[es]
            if rs >= 0:
                used[rs] &= ~b
            colors[e] = c
            used[l] |= b
            if r >= 0:
                used[r] |= b
            stats.swaps += 1
            chain_swaps += 1
            total_swaps += 1
            if audit:
                audit()
            if chain_swaps > chain_budget or total_swaps > total_budget:
                raise SwapBudgetExceededError(
                    f"spent {chain_swaps} swaps on one conflict chain "
                    f"({total_swaps} in total)"
                )
            visited.add(es)
            e = es
    return stats


def _make_audit(left, right, elem_surfs, colors, n_elements):
    def audit():
        seen = [0] * n_elements
        for k, c in enumerate(colors):
            if c < 1:
                continue
            b = 1 << c
            for e in (left[k], right[k]):
                if e >= 0:
                    assert not seen[e] & b, (
                        f"color {c} repeated on element {e}"
                    )
                    seen[e] |= b
    return audit


def modified_greedy(mesh: Mesh,
                    config: ColoringConfig | None = None) -> SurfaceColoring:
    """Single greedy pass that leaves unresolvable surfaces at -1
    instead of growing the palette."""
    config = config or ColoringConfig()
    if mesh.n_surfaces == 0:
        raise ValueError("mesh has no surfaces")
    n_colors = color_set_size(mesh)
    left, right, _ = _incidence(mesh)
    rng = random.Random(config.rng_seed)
    colors, _, _ = _greedy_pass(left, right, mesh.n_elements, n_colors, rng)
    return SurfaceColoring(np.asarray(colors, dtype=np.int32), n_colors)


def resolve_conflicts(mesh: Mesh, coloring: SurfaceColoring,
                      config: ColoringConfig | None = None,
                      stats_out: dict | None = None) -> SurfaceColoring:
    """Repair a partial coloring into a complete one.

    The input must be valid per element (no repeated colors); the
    returned coloring is complete and valid.  ``stats_out``, when given,
    receives the repair counters.
    """
    config = config or ColoringConfig()
    n_colors = coloring.n_colors
    left, right, elem_surfs = _incidence(mesh)
    colors = coloring.colors.tolist()
    used = _rebuild_used(colors, left, right, mesh.n_elements)
    conflicts = [k for k, c in enumerate(colors) if c < 1]
    budget = config.max_swaps_per_conflict
    if budget is None:
        budget = 10 * mesh.n_surfaces
    audit = None
    if config.audit:
        audit = _make_audit(left, right, elem_surfs, colors,
                            mesh.n_elements)
    rng = random.Random(config.rng_seed)
    stats = _repair(left, right, elem_surfs, colors, used, conflicts,
                    n_colors, rng, budget, 5 * budget, audit)
    if stats_out is not None:
        stats_out.update(vars(stats))
    return SurfaceColoring(np.asarray(colors, dtype=np.int32), n_colors)


def color(mesh: Mesh,
          config: ColoringConfig | None = None
          ) -> tuple[SurfaceColoring, ColoringReport]:
    """Produce a complete valid coloring plus a work report.

    Runs the greedy pass and the repair pass with one RNG stream.  If a
    repair runs out of swap budget the whole thing restarts from seed+1,
    up to ``max_restarts`` times, after which
    ``RestartsExhaustedError`` is raised.
    """
    config = config or ColoringConfig()
    if mesh.n_surfaces == 0:
        raise ValueError("mesh has no surfaces")
    n_colors = color_set_size(mesh)
    left, right, elem_surfs = _incidence(mesh)
    budget = config.max_swaps_per_conflict
    if budget is None:
        budget = 10 * mesh.n_surfaces

    t_start = time.perf_counter()
    last_error: SwapBudgetExceededError | None = None
    for attempt in range(config.max_restarts + 1):
        rng = random.Random(config.rng_seed + attempt)
        t0 = time.perf_counter()
        colors, used, conflicts = _greedy_pass(
            left, right, mesh.n_elements, n_colors, rng
        )
        t1 = time.perf_counter()
        n_conflicts = len(conflicts)
        audit = None
        if config.audit:
            audit = _make_audit(left, right, elem_surfs, colors,
                                mesh.n_elements)
        try:
            stats = _repair(left, right, elem_surfs, colors, used,
                            conflicts, n_colors, rng, budget, 5 * budget,
                            audit)
        except SwapBudgetExceededError as err:
            last_error = err
            continue
        t2 = time.perf_counter()
        coloring = SurfaceColoring(np.asarray(colors, dtype=np.int32),
                                   n_colors)
        report = ColoringReport(
            n_elements=mesh.n_elements,
            n_surfaces=mesh.n_surfaces,
            n_colors=n_colors,
            vizing_bound=vizing_bound(connectivity_graph(mesh)),
            greedy_conflicts=n_conflicts,
            resolutions=stats.resolutions,
            swaps=stats.swaps,
            loop_breaks=stats.loop_breaks,
            no_swap_breaks=stats.no_swap_breaks,
            forced_reswaps=stats.forced_reswaps,
            restarts=attempt,
            color_counts=coloring.color_counts(),
            greedy_seconds=t1 - t0,
            resolve_seconds=t2 - t1,
            total_seconds=t2 - t_start,
        )
        return coloring, report
    raise RestartsExhaustedError(
        f"no complete coloring after {config.max_restarts + 1} attempts "
        f"(last: {last_error})"
    )


def naive_greedy(mesh: Mesh) -> SurfaceColoring:
    """First-fit greedy with an unbounded palette.

    Baseline only: it needs up to 5 colors on triangles and 7 on quads
    or tets, which is what the fixed-palette pipeline exists to avoid.
    """
    if mesh.n_surfaces == 0:
        raise ValueError("mesh has no surfaces")
    left, right, _ = _incidence(mesh)
    used = [0] * mesh.n_elements
    colors = [0] * mesh.n_surfaces
    top = 0
    for k in range(mesh.n_surfaces):
        l = left[k]
        r = right[k]
        m = used[l] | (used[r] if r >= 0 else 0)
        c = 1
        while (m >> c) & 1:
            c += 1
        colors[k] = c
        if c > top:
            top = c
        b = 1 << c
        used[l] |= b
        if r >= 0:
            used[r] |= b
    return SurfaceColoring(np.asarray(colors, dtype=np.int32), top)


def verify_coloring(mesh: Mesh, coloring: SurfaceColoring
                    ) -> list[Diagnostic]:
    """List every element with a repeated color and every uncolored
    surface.  An empty list means complete and valid."""
    colors = np.asarray(coloring.colors)
    diags: list[Diagnostic] = []

    gathered = np.full((mesh.n_elements, mesh.elem_surfs.shape[1]), -2,
                       dtype=np.int64)
    has = mesh.elem_surfs >= 0
    gathered[has] = colors[mesh.elem_surfs[has]]
    filled = np.where(gathered >= 1, gathered, -2)
    srt = np.sort(filled, axis=1)
    dup_rows = np.flatnonzero(
        ((srt[:, 1:] == srt[:, :-1]) & (srt[:, 1:] >= 1)).any(axis=1)
    )
    for e in dup_rows:
        row = gathered[e]
        vals, counts = np.unique(row[row >= 1], return_counts=True)
        repeated = [int(v) for v in vals[counts > 1]]
        sids = [int(s) for s in mesh.elem_surfs[e]
                if s >= 0 and int(colors[s]) in repeated]
        diags.append(Diagnostic(
            "conflict",
            f"element {e} repeats color(s) {repeated} on surfaces {sids}",
            element_id=int(e),
        ))
    for k in np.flatnonzero(colors < 1):
        diags.append(Diagnostic(
            "uncolored", f"surface {k} has no color", surface_id=int(k),
        ))
    return diags
