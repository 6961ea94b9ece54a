"""CLI surface tests: exit codes, CSV schemas, overrides, fixtures."""

from __future__ import annotations

from pseudosusp.cli import fixture_path, list_fixtures, main


def run(argv):
    return main(argv)


def test_version_and_fixture_listing(capsys):
    assert run(["--version"]) == 0
    out = capsys.readouterr().out
    assert "pseudosusp" in out and "0.1.0" in out

    assert run(["--list-fixtures"]) == 0
    out = capsys.readouterr().out
    for name in ("hak_toy.ini", "tent_horseshoe.ini", "three_branch_horseshoe.ini",
                 "golden_mean.ini", "thue_morse.ini", "odometer_222.ini"):
        assert name in out


def test_pattern_prints_kfold(capsys):
    assert run(["pattern", "--kfold", "3"]) == 0
    assert capsys.readouterr().out.strip() == "1,2,3,4,5,4,3,4,5,6,7"
    assert run(["pattern", "--kfold", "4"]) == 3


def test_hak_verify_exit_codes(tmp_path):
    out = tmp_path / "hak.csv"
    assert run(["hak-verify", "-c", fixture_path("hak_toy.ini"),
                "--out", str(out)]) == 0
    header = out.read_text().splitlines()[0]
    assert header == "condition,stage,value,bound,margin,passed"
    for mutant in ("hak_mut_band.ini", "hak_mut_alpha.ini", "hak_mut_support.ini"):
        assert run(["hak-verify", "-c", fixture_path(mutant),
                    "--out", str(tmp_path / mutant.replace(".ini", ".csv"))]) == 2


def test_hak_config_error_exit(tmp_path):
    assert run(["hak-verify", "-c", fixture_path("hak_toy.ini"),
                "--override", "stage 2.q=577",
                "--out", str(tmp_path / "x.csv")]) == 3


def test_horseshoe_exit_codes(tmp_path):
    good = tmp_path / "h3.csv"
    assert run(["horseshoe", "--map", fixture_path("three_branch_horseshoe.ini"),
                "--out", str(good)]) == 0
    lines = good.read_text().splitlines()
    assert lines[0] == "word,lo,hi"
    assert len(lines) == 1 + 729

    assert run(["horseshoe", "--map", fixture_path("tent_horseshoe.ini"),
                "--out", str(tmp_path / "tent.csv")]) == 2
    assert run(["horseshoe", "--map", fixture_path("three_branch_horseshoe.ini"),
                "--k", "4", "--out", str(tmp_path / "bad.csv")]) == 3


def test_suspend_entropy_schema_and_capacity(tmp_path):
    out = tmp_path / "e.csv"
    assert run(["suspend-entropy", "-c", fixture_path("entropy_halfspeed.ini"),
                "--override", "experiment.budget=3000", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "eps,n,budget,lower,upper,target,alpha,h_entropy"
    assert len(lines) == 2

    assert run(["suspend-entropy", "-c", fixture_path("entropy_unit.ini"),
                "--override", "cantor.window=8",
                "--override", "experiment.budget=500",
                "--out", str(tmp_path / "cap.csv")]) == 4


def test_suspend_orbit_schema(tmp_path):
    out = tmp_path / "o.csv"
    assert run(["suspend-orbit", "-c", fixture_path("orbit_demo.ini"),
                "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "k,t,r,w,component"
    assert lines[1] == "0,0.2,0.9,0,0"
    assert len(lines) == 27  # header + points 0..25


def test_missing_config_and_keys(tmp_path):
    assert run(["rotation", "-c", str(tmp_path / "nope.ini")]) == 3
    bad = tmp_path / "bad.ini"
    bad.write_text("[map]\nmap = rotation:abc\n")
    assert run(["rotation", "-c", str(bad)]) == 3
    nomap = tmp_path / "nomap.ini"
    nomap.write_text("[experiment]\nn = 4\n")
    assert run(["rotation", "-c", str(nomap)]) == 3


def test_mixing_witness_modes(tmp_path):
    out = tmp_path / "w.csv"
    assert run(["mixing-witness", "-c", fixture_path("golden_mean.ini"),
                "--out", str(out)]) == 0
    assert out.read_text().splitlines()[1] == "symbolic,16,1,2"
    assert run(["mixing-witness", "-c", fixture_path("thue_morse.ini"),
                "--out", str(out)]) == 0
    assert out.read_text().splitlines()[1] == "symbolic,32,1,2"


def test_dense_orbit_cli(tmp_path):
    out = tmp_path / "d.csv"
    assert run(["dense-orbit", "-c", fixture_path("dense_demo.ini"),
                "--out", str(out)]) == 0
    row = out.read_text().splitlines()[1]
    assert row.startswith("1,")


def test_render_cli(tmp_path):
    out = tmp_path / "c.svg"
    assert run(["render", "--levels", fixture_path("render_demo.ini"),
                "--out", str(out)]) == 0
    svg = out.read_text()
    assert svg.count("<polygon") == 29

    explicit = tmp_path / "levels.ini"
    explicit.write_text(
        "[level 0]\nlinks = 0/1,1/1,0/1,1/4; 0/1,1/1,1/5,1/2\n")
    assert run(["render", "--levels", str(explicit),
                "--out", str(tmp_path / "e.svg")]) == 0
    assert (tmp_path / "e.svg").read_text().count("<polygon") == 2


def test_rotation_family_cli(tmp_path):
    out = tmp_path / "f.csv"
    assert run(["rotation-family", "-c", fixture_path("family_demo.ini"),
                "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "n,bit,b_n,term"
    assert len(lines) == 9

    assert run(["rotation-family", "-c", fixture_path("family_demo.ini"),
                "--override", "family.bits=10x1",
                "--out", str(out)]) == 3


def test_fixture_descriptions_present():
    for name, desc in list_fixtures():
        assert desc, f"fixture {name} lacks a description comment"
