"""Exit codes, file round trips, and output text of the command line."""

import numpy as np
import pytest

from meshchroma import SurfaceColoring, color, gen_tri_rect, read_native, write_native
from meshchroma.cli import main

MSH_TRI = """$MeshFormat
2.2 0 8
$EndMeshFormat
$Nodes
4
1 0 0 0
2 1 0 0
3 1 1 0
4 0 1 0
$EndNodes
$Elements
2
1 2 2 0 1 1 2 3
2 2 2 0 1 1 3 4
$EndElements
"""


def gen(tmp_path, name="m.mesh", family="tri_rect", nx=4, ny=4,
        periodic=False):
    path = tmp_path / name
    args = ["generate", "--family", family, "--nx", str(nx),
            "--ny", str(ny), "-o", str(path)]
    if periodic:
        args.append("--periodic")
    assert main(args) == 0
    return path


def test_generate_verify_roundtrip(tmp_path, capsys):
    path = gen(tmp_path)
    assert main(["verify", "-i", str(path)]) == 0
    out = capsys.readouterr().out
    assert "no coloring" in out or "valid" in out


def test_generate_is_deterministic(tmp_path):
    a = gen(tmp_path, "a.mesh")
    b = gen(tmp_path, "b.mesh")
    assert a.read_bytes() == b.read_bytes()


def test_color_writes_valid_output_and_report(tmp_path, capsys):
    path = gen(tmp_path)
    out = tmp_path / "c.mesh"
    report = tmp_path / "report.txt"
    assert main(["color", "-i", str(path), "-o", str(out),
                 "--report", str(report)]) == 0
    assert main(["verify", "-i", str(out)]) == 0
    text = capsys.readouterr().out
    assert "complete valid coloring with 3 colors" in text
    assert "n_colors 3" in report.read_text()


def test_color_seed_determinism(tmp_path):
    path = gen(tmp_path)
    a, b, c = (tmp_path / n for n in ("a.mesh", "b.mesh", "c.mesh"))
    assert main(["color", "-i", str(path), "-o", str(a), "--seed", "5"]) == 0
    assert main(["color", "-i", str(path), "-o", str(b), "--seed", "5"]) == 0
    assert main(["color", "-i", str(path), "-o", str(c), "--seed", "6"]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes() != c.read_bytes()


def test_seed_env_var(tmp_path, monkeypatch):
    path = gen(tmp_path)
    a, b = tmp_path / "a.mesh", tmp_path / "b.mesh"
    monkeypatch.setenv("MESHCHROMA_SEED", "5")
    assert main(["color", "-i", str(path), "-o", str(a)]) == 0
    monkeypatch.delenv("MESHCHROMA_SEED")
    assert main(["color", "-i", str(path), "-o", str(b), "--seed", "5"]) == 0
    assert a.read_bytes() == b.read_bytes()
    monkeypatch.setenv("MESHCHROMA_SEED", "not a number")
    assert main(["color", "-i", str(path), "-o", str(a)]) == 64


def test_refine_coarsen_round_trip_bytes(tmp_path):
    path = gen(tmp_path)
    colored = tmp_path / "c.mesh"
    fine = tmp_path / "fine.mesh"
    back = tmp_path / "back.mesh"
    assert main(["color", "-i", str(path), "-o", str(colored)]) == 0
    assert main(["refine", "-i", str(colored), "-o", str(fine),
                 "--elements", "0,3,7"]) == 0
    data = read_native(fine)
    assert data.parents is not None
    assert data.coloring.n_colors == 6
    assert main(["coarsen", "-i", str(fine), "-o", str(back),
                 "--parents", "0,3,7"]) == 0
    assert back.read_bytes() == colored.read_bytes()


def test_refine_all_and_partial_coarsen(tmp_path):
    path = gen(tmp_path, nx=3, ny=3)
    colored = tmp_path / "c.mesh"
    fine = tmp_path / "fine.mesh"
    part = tmp_path / "part.mesh"
    assert main(["color", "-i", str(path), "-o", str(colored)]) == 0
    assert main(["refine", "-i", str(colored), "-o", str(fine),
                 "--all"]) == 0
    assert read_native(fine).mesh.n_elements == 4 * 18
    assert main(["coarsen", "-i", str(fine), "-o", str(part),
                 "--parents", "0,1"]) == 0
    partial = read_native(part)
    assert partial.parents is not None  # still a refined mesh
    assert main(["verify", "-i", str(part)]) == 0


def test_refining_refined_input_is_a_level_error(tmp_path):
    path = gen(tmp_path)
    colored, fine = tmp_path / "c.mesh", tmp_path / "f.mesh"
    main(["color", "-i", str(path), "-o", str(colored)])
    main(["refine", "-i", str(colored), "-o", str(fine), "--all"])
    assert main(["refine", "-i", str(fine), "-o",
                 str(tmp_path / "x.mesh"), "--all"]) == 3


def test_coarsen_without_parents_fails(tmp_path):
    path = gen(tmp_path)
    colored = tmp_path / "c.mesh"
    main(["color", "-i", str(path), "-o", str(colored)])
    assert main(["coarsen", "-i", str(colored), "-o",
                 str(tmp_path / "x.mesh"), "--parents", "0"]) == 3


def test_uncolorable_input_exits_two(tmp_path):
    # odd fully periodic quad grids cannot be 4-colored
    path = gen(tmp_path, family="quad_rect", nx=5, ny=5, periodic=True)
    assert main(["color", "-i", str(path), "-o",
                 str(tmp_path / "c.mesh")]) == 2


def test_reorder_and_metric(tmp_path, capsys):
    path = gen(tmp_path, nx=6, ny=6)
    colored, re = tmp_path / "c.mesh", tmp_path / "r.mesh"
    main(["color", "-i", str(path), "-o", str(colored)])
    capsys.readouterr()
    assert main(["reorder", "-i", str(colored), "-o", str(re),
                 "--metric"]) == 0
    out = capsys.readouterr().out
    assert "aggregate_before" in out
    assert "aggregate_after" in out
    assert "used_fallback" in out
    data = read_native(re)
    assert data.element_perm is not None
    assert data.surface_perm is not None
    assert main(["verify", "-i", str(re)]) == 0


def test_reorder_requires_colors(tmp_path):
    path = gen(tmp_path)
    assert main(["reorder", "-i", str(path), "-o",
                 str(tmp_path / "r.mesh")]) == 1


def test_race_check_closed_mesh(tmp_path, capsys):
    path = gen(tmp_path, family="tri_closed", nx=6, ny=6)
    colored = tmp_path / "c.mesh"
    main(["color", "-i", str(path), "-o", str(colored)])
    capsys.readouterr()
    assert main(["race-check", "-i", str(colored)]) == 0
    out = capsys.readouterr().out
    assert "result PASS" in out
    assert "accumulator_total 0" in out


def test_race_check_flags_a_planted_conflict(tmp_path):
    mesh = gen_tri_rect(4, 4)
    coloring, _ = color(mesh)
    bad = coloring.copy()
    e = next(i for i in range(mesh.n_elements))
    s0, s1 = mesh.element(e).surface_ids[:2]
    bad.colors[s1] = bad.colors[s0]
    path = tmp_path / "bad.mesh"
    write_native(path, mesh, bad)
    assert main(["race-check", "-i", str(path)]) == 1


def test_memsave_exact_line(capsys):
    assert main(["memsave", "--p", "1", "--neq", "4",
                 "--ns", "3774165"]) == 0
    out = capsys.readouterr().out
    assert "724639680 bytes (0.72 GB)" in out


def test_stats_reports_points_and_slopes(tmp_path, capsys):
    assert main(["stats", "--family", "tri_rect", "--sizes", "4,8,16",
                 "--seed", "0"]) == 0
    out = capsys.readouterr().out
    assert out.count("n_surfaces") == 3
    assert "time_slope" in out
    assert "conflict_slope" in out


def test_msh_input_by_extension(tmp_path):
    p = tmp_path / "two.msh"
    p.write_text(MSH_TRI)
    out = tmp_path / "c.mesh"
    assert main(["color", "-i", str(p), "-o", str(out)]) == 0
    assert read_native(out).coloring.n_colors == 3


def test_io_failures_exit_four(tmp_path):
    missing = tmp_path / "nope.mesh"
    assert main(["color", "-i", str(missing), "-o",
                 str(tmp_path / "c.mesh")]) == 4
    garbled = tmp_path / "bad.mesh"
    garbled.write_text("MESHCHROMA 1\nVERTICES 5\n0 0\n")
    assert main(["verify", "-i", str(garbled)]) == 4
    badmsh = tmp_path / "v4.msh"
    badmsh.write_text("$MeshFormat\n4.1 0 8\n$EndMeshFormat\n")
    assert main(["verify", "-i", str(badmsh)]) == 4


def test_usage_errors_exit_sixtyfour(tmp_path):
    assert main([]) == 64
    assert main(["frobnicate"]) == 64
    assert main(["generate", "--family", "tri_rect", "--nx", "4"]) == 64
    assert main(["generate", "--family", "hexes", "--nx", "1",
                 "--ny", "1", "-o", "x.mesh"]) == 64
    assert main(["refine", "-i", "a", "-o", "b",
                 "--elements", "1,two"]) == 64
    assert main(["memsave", "--p", "0", "--neq", "4", "--ns", "10"]) == 64
    assert main(["stats", "--family", "tri_rect", "--sizes", ""]) == 64


def test_module_entry_point(tmp_path):
    import subprocess
    import sys

    path = tmp_path / "m.mesh"
    proc = subprocess.run(
        [sys.executable, "-m", "meshchroma.cli", "generate", "--family",
         "tri_rect", "--nx", "2", "--ny", "2", "-o", str(path)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert path.exists()
