import json

import pytest

from hypercone import cli, delaunay
from hypercone.cone import format_rational


def run_cli(capsys, *args):
    code = cli.main(list(args))
    out = capsys.readouterr().out
    return code, out


def test_facets_n2(capsys):
    code, out = run_cli(capsys, "facets", "-n", "2")
    assert code == 0
    assert "total inequalities: 3" in out
    assert "geometric classes: 1" in out


def test_facets_n6_fast_path(capsys):
    code, out = run_cli(capsys, "facets", "-n", "6")
    assert code == 0
    assert "14 orbits" in out
    assert "total inequalities: 3773" in out
    assert "geometric classes: 9" in out


def test_facets_catalog_export(tmp_path, capsys):
    out_file = tmp_path / "catalog.txt"
    code, _ = run_cli(capsys, "facets", "-n", "4", "--out", str(out_file))
    assert code == 0
    text = out_file.read_text()
    assert text.startswith("# orbit 0 size 30")
    assert len([l for l in text.splitlines() if not l.startswith("#")]) == 40


def test_facets_corrupted_rep_fails(capsys):
    code, out = run_cli(capsys, "facets", "-n", "6", "--selftest-corrupt")
    assert code == 1
    assert "MISMATCH" in out


def test_verify_basic(capsys):
    code, out = run_cli(capsys, "verify-basic")
    assert code == 0
    assert "10/10 decompositions found" in out
    assert "INFEASIBLE" not in out


def test_annulator_command(tmp_path, capsys):
    d = delaunay.cube_basis_distvec(3)
    f = tmp_path / "cube.dist"
    f.write_text(" ".join(format_rational(x) for x in d.d))
    code, out = run_cli(capsys, "annulator", "--dist", str(f))
    assert code == 0
    assert "annulator size: 8" in out
    assert "radius_sq 3/4" in out


def test_annulator_rejects_outside_vector(tmp_path, capsys):
    f = tmp_path / "bad.dist"
    f.write_text("1 1 3")
    code, out = run_cli(capsys, "annulator", "--dist", str(f))
    assert code == 1
    assert "outside the cone" in out


def test_annulator_degenerate(tmp_path, capsys):
    f = tmp_path / "cut.dist"
    f.write_text("1 0 1")
    code, out = run_cli(capsys, "annulator", "--dist", str(f))
    assert code == 1
    assert "degenerate" in out


def test_classify_and_report_n2(tmp_path, capsys):
    ck = tmp_path / "ck2"
    code, out = run_cli(capsys, "classify", "-n", "2",
                        "--checkpoint", str(ck))
    assert code == 0
    assert "heredity violations: 0" in out
    code, out = run_cli(capsys, "report", str(ck))
    assert code == 0
    assert "rank  3:     1" in out
    assert "rank  2:     1" in out
    assert "total types over completed levels: 2" in out


def test_classify_resume_reproduces_fresh_run(tmp_path, capsys):
    full = tmp_path / "full"
    code, _ = run_cli(capsys, "classify", "-n", "3", "--checkpoint", str(full))
    assert code == 0
    fresh_report = run_cli(capsys, "report", str(full))[1]

    twostep = tmp_path / "twostep"
    code, _ = run_cli(capsys, "classify", "-n", "3", "--max-corank", "2",
                      "--checkpoint", str(twostep))
    assert code == 0
    code, _ = run_cli(capsys, "classify", "-n", "3",
                      "--checkpoint", str(twostep))
    assert code == 0
    resumed_report = run_cli(capsys, "report", str(twostep))[1]
    assert resumed_report == fresh_report

    for name in sorted(p.name for p in full.iterdir()):
        a = (full / name).read_bytes()
        b = (twostep / name).read_bytes()
        assert a == b, f"checkpoint file {name} differs after resume"


def test_classify_thread_count_does_not_change_output(tmp_path, capsys):
    a = tmp_path / "t1"
    b = tmp_path / "t4"
    run_cli(capsys, "classify", "-n", "2", "--checkpoint", str(a),
            "--threads", "1")
    run_cli(capsys, "classify", "-n", "2", "--checkpoint", str(b),
            "--threads", "4")
    for name in sorted(p.name for p in a.iterdir()):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_classify_rejects_stale_checkpoint(tmp_path, capsys):
    ck = tmp_path / "stale"
    code, _ = run_cli(capsys, "classify", "-n", "2", "--checkpoint", str(ck))
    assert code == 0
    manifest = json.loads((ck / "manifest.json").read_text())
    manifest["inventory_hash"] = "0" * 64
    (ck / "manifest.json").write_text(json.dumps(manifest))
    from hypercone import pipeline
    from hypercone.faces import build_lattice
    with pytest.raises(pipeline.ChecksumMismatch):
        pipeline.classify(build_lattice(2),
                          pipeline.RunConfig(n=2, checkpoint_dir=str(ck)))


def test_gzip_checkpoints_roundtrip(tmp_path, monkeypatch, capsys):
    from hypercone import pipeline
    from hypercone.faces import build_lattice
    monkeypatch.setattr(pipeline, "GZIP_THRESHOLD_BYTES", 64)
    ck = tmp_path / "gz"
    cfg = pipeline.RunConfig(n=2, checkpoint_dir=str(ck))
    pipeline.classify(build_lattice(2), cfg)
    names = sorted(p.name for p in ck.iterdir())
    assert any(name.endswith(".jsonl.gz") for name in names)
    summary = pipeline.load_summary(str(ck))
    assert summary.counts_by_rank() == {3: 1, 2: 1, 1: 0}


def test_report_marks_reference_column(tmp_path, capsys):
    # n=3 has no reference column; n=6 output is exercised in acceptance.
    ck = tmp_path / "ck3"
    run_cli(capsys, "classify", "-n", "3", "--checkpoint", str(ck))
    code, out = run_cli(capsys, "report", str(ck))
    assert code == 0
    assert "maximal types: 1" in out
