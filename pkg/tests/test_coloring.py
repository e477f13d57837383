"""Two-stage coloring: greedy pass, conflict repair, verification."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from meshchroma import (
    ColoringConfig,
    RestartsExhaustedError,
    SurfaceColoring,
    SwapBudgetExceededError,
    color,
    color_set_size,
    gen_quad_rect,
    gen_tet_prism,
    gen_tri_rect,
    modified_greedy,
    naive_greedy,
    resolve_conflicts,
    shuffle_elements,
    verify_coloring,
)
from conftest import colorable_with, hybrid_patch


def test_color_set_size_by_profile(two_tri, single_quad, single_tet):
    assert color_set_size(two_tri) == 3
    assert color_set_size(single_quad) == 4
    assert color_set_size(single_tet) == 4
    assert color_set_size(hybrid_patch(2, 2)) == 4


def assert_complete_valid(mesh, coloring):
    assert coloring.is_complete
    assert verify_coloring(mesh, coloring) == []
    assert coloring.colors.min() >= 1
    assert coloring.colors.max() <= coloring.n_colors


def test_small_meshes_reach_the_exact_optimum():
    for mesh in (gen_tri_rect(3, 3), gen_tri_rect(4, 4, (True, True))):
        assert colorable_with(mesh, 3)
        coloring, _ = color(mesh)
        assert coloring.n_colors == 3
        assert_complete_valid(mesh, coloring)
    for mesh in (gen_quad_rect(3, 3), gen_tet_prism(2, 2, 1)):
        assert colorable_with(mesh, 4)
        coloring, _ = color(mesh)
        assert coloring.n_colors == 4
        assert_complete_valid(mesh, coloring)


def test_hybrid_mesh_colors_with_four():
    mesh = hybrid_patch(4, 4)
    coloring, _ = color(mesh)
    assert coloring.n_colors == 4
    assert_complete_valid(mesh, coloring)


def test_modified_greedy_never_grows_the_palette(two_tri):
    mesh = gen_tri_rect(8, 8)
    partial = modified_greedy(mesh)
    assert partial.n_colors == 3
    assert partial.colors.max() <= 3
    assert (partial.colors >= 1).sum() + len(partial.conflict_ids()) == mesh.n_surfaces
    codes = {d.code for d in verify_coloring(mesh, partial)}
    assert "conflict" not in codes  # colored part is valid, only gaps remain


def test_resolve_completes_a_partial_coloring():
    mesh = gen_tri_rect(8, 8)
    partial = modified_greedy(mesh)
    assert len(partial.conflict_ids()) > 0
    stats = {}
    full = resolve_conflicts(mesh, partial, stats_out=stats)
    assert_complete_valid(mesh, full)
    assert stats["resolutions"] >= len(partial.conflict_ids())


def test_single_swap_chain(two_tri):
    # elem 0 carries {1,2}, elem 1 carries {2,3}: the shared edge is stuck
    # until one single-presence color moves, then a free boundary slot opens
    shared = next(k for k in range(5) if two_tri.surf_elems[k, 1] >= 0)
    colors = np.empty(5, dtype=np.int32)
    e0 = [s for s in two_tri.element(0).surface_ids if s != shared]
    e1 = [s for s in two_tri.element(1).surface_ids if s != shared]
    colors[e0[0]], colors[e0[1]] = 1, 2
    colors[e1[0]], colors[e1[1]] = 2, 3
    colors[shared] = -1
    stats = {}
    full = resolve_conflicts(two_tri, SurfaceColoring(colors, 3),
                             stats_out=stats)
    assert_complete_valid(two_tri, full)
    assert stats["swaps"] == 1
    assert stats["resolutions"] == 1
    assert stats["loop_breaks"] == 0


GOLDEN = [
    # mesh constructor, conflicts, swaps, loop breaks (seed 0, frozen)
    (lambda: gen_tri_rect(8, 8), 10, 62, 1),
    (lambda: gen_tri_rect(8, 8, (True, True)), 15, 136, 2),
    (lambda: gen_tri_rect(6, 6, (True, True)), 8, 164, 1),
]


@pytest.mark.parametrize("build,conflicts,swaps,breaks", GOLDEN)
def test_repair_goldens(build, conflicts, swaps, breaks):
    mesh = build()
    coloring, report = color(mesh)
    assert_complete_valid(mesh, coloring)
    assert report.greedy_conflicts == conflicts
    assert report.swaps == swaps
    assert report.loop_breaks == breaks
    assert report.resolutions == (report.greedy_conflicts
                                  + report.loop_breaks
                                  + report.no_swap_breaks)


def test_closed_tri_classes_are_balanced():
    mesh = gen_tri_rect(6, 6, (True, True))
    coloring, report = color(mesh)
    assert coloring.color_counts() == (36, 36, 36)
    assert report.color_counts == (36, 36, 36)


def test_same_seed_same_coloring():
    mesh = gen_tri_rect(10, 10)
    a, _ = color(mesh, ColoringConfig(rng_seed=7))
    b, _ = color(mesh, ColoringConfig(rng_seed=7))
    assert (a.colors == b.colors).all()
    c, _ = color(mesh, ColoringConfig(rng_seed=8))
    assert not (a.colors == c.colors).all()


def test_swap_budget_raises():
    mesh = gen_tri_rect(8, 8)
    partial = modified_greedy(mesh)
    with pytest.raises(SwapBudgetExceededError):
        resolve_conflicts(mesh, partial,
                          ColoringConfig(max_swaps_per_conflict=1))


def test_restarts_exhausted_on_an_impossible_mesh():
    # odd fully periodic quad grids have no 4-coloring at all
    mesh = gen_quad_rect(5, 5, (True, True))
    with pytest.raises(RestartsExhaustedError):
        color(mesh, ColoringConfig(max_swaps_per_conflict=60,
                                   max_restarts=2))


def test_audit_mode_runs_clean():
    mesh = gen_tri_rect(8, 8, (True, True))
    coloring, _ = color(mesh, ColoringConfig(audit=True))
    assert_complete_valid(mesh, coloring)


def test_report_as_dict_round_trips_counts():
    mesh = gen_tri_rect(6, 6)
    coloring, report = color(mesh)
    d = report.as_dict()
    assert d["n_surfaces"] == mesh.n_surfaces
    assert d["n_colors"] == 3
    assert sum(report.color_counts) == mesh.n_surfaces
    assert d["color_count_1"] == report.color_counts[0]
    assert report.vizing_bound == 4


def test_naive_greedy_bounds():
    for mesh, bound in ((gen_tri_rect(10, 10), 5),
                        (gen_quad_rect(8, 8), 7),
                        (gen_tet_prism(3, 3, 3), 7)):
        nv = naive_greedy(mesh)
        assert_complete_valid(mesh, nv)
        assert nv.n_colors <= bound


def test_naive_greedy_overshoots_on_incoherent_numbering():
    mesh = shuffle_elements(gen_tri_rect(16, 16), 0)
    nv = naive_greedy(mesh)
    assert nv.n_colors == 5
    optimal, _ = color(mesh)
    assert optimal.n_colors == 3


def test_verify_flags_planted_conflict(two_tri):
    shared = next(k for k in range(5) if two_tri.surf_elems[k, 1] >= 0)
    colors = np.full(5, -1, dtype=np.int32)
    e0 = [s for s in two_tri.element(0).surface_ids if s != shared]
    colors[shared] = 1
    colors[e0[0]] = 1  # element 0 now repeats color 1
    colors[e0[1]] = 2
    diags = verify_coloring(two_tri, SurfaceColoring(colors, 3))
    codes = {d.code for d in diags}
    assert "conflict" in codes
    assert "uncolored" in codes


def test_surface_coloring_helpers():
    colors = np.array([1, 2, -1, 3], dtype=np.int32)
    c = SurfaceColoring(colors, 3)
    assert not c.is_complete
    assert c.conflict_ids().tolist() == [2]
    assert c.color_counts() == (1, 1, 1)
    d = c.copy()
    d.colors[2] = 1
    assert c.colors[2] == -1


@settings(deadline=None, max_examples=20)
@given(
    nx=st.integers(min_value=2, max_value=6),
    ny=st.integers(min_value=2, max_value=6),
    seed=st.integers(min_value=0, max_value=99),
    fam=st.sampled_from(["tri", "quad"]),
)
def test_color_always_lands_the_minimum_palette(nx, ny, seed, fam):
    gen = gen_tri_rect if fam == "tri" else gen_quad_rect
    mesh = gen(nx, ny)
    coloring, _ = color(mesh, ColoringConfig(rng_seed=seed))
    assert coloring.n_colors == (3 if fam == "tri" else 4)
    assert_complete_valid(mesh, coloring)


@settings(deadline=None, max_examples=10)
@given(seed=st.integers(min_value=0, max_value=999))
def test_shuffled_meshes_still_color_optimally(seed):
    mesh = shuffle_elements(gen_tri_rect(6, 6, (True, True)), seed)
    coloring, _ = color(mesh, ColoringConfig(rng_seed=seed))
    assert coloring.n_colors == 3
    assert_complete_valid(mesh, coloring)
