"""Table formats and the command line surface."""

import io
import math

import numpy as np
import pytest

from mfbm.cli import main, parse_grid
from mfbm.expansion import (
    ModelParams,
    TruncationSpec,
    covariance_partial,
    resolve_truncation,
)
from mfbm.io_formats import format_cell, read_table, write_table
from mfbm.spherical_harmonics import enumerate_basis


def test_cell_formatting():
    assert format_cell(True) == "true"
    assert format_cell(False) == "false"
    assert format_cell(3) == "3"
    assert format_cell(0.1) == repr(0.1)
    assert format_cell("disk:9") == "disk:9"


@pytest.mark.parametrize("fmt", ["csv", "jsonl"])
def test_table_roundtrip_is_exact(tmp_path, fmt):
    meta = {"command": "demo", "q": 256.0, "flag": True}
    columns = ["n", "value", "label"]
    rows = [
        (1, 0.1 + 0.2, "a"),
        (2, -1.0 / 3.0, "b"),
        (3, 1e-300, "c"),
    ]
    path = tmp_path / f"t.{fmt}"
    with open(path, "w", encoding="utf-8") as fh:
        write_table(fh, meta, columns, rows, fmt)
    meta2, cols2, rows2 = read_table(path)
    assert cols2 == columns
    assert meta2["q"] == 256.0
    assert meta2["flag"] is True
    for (n, v, s), rec in zip(rows, rows2):
        assert rec["n"] == n
        assert rec["value"] == v  # repr round-trip, bit exact
        assert rec["label"] == s


def test_write_table_rejects_unknown_format():
    with pytest.raises(ValueError):
        write_table(io.StringIO(), {}, ["a"], [(1,)], "xml")


def test_grid_shorthands():
    disk = parse_grid("disk:33", 2)
    assert disk.shape == (797, 2)
    assert float(np.linalg.norm(disk, axis=1).max()) <= 1.0 + 1e-12
    assert int((disk == 0.0).all(axis=1).sum()) == 1
    # even counts skip the lattice origin, so it gets appended
    disk_even = parse_grid("disk:32", 2)
    assert int((disk_even == 0.0).all(axis=1).sum()) == 1
    ball = parse_grid("ball:9", 3)
    assert ball.shape == (257, 3)
    halton = parse_grid("halton:50", 3)
    assert halton.shape == (50, 3)
    for bad in ("mesh:5", "disk:0", "disk:x", "disk"):
        with pytest.raises(ValueError):
            parse_grid(bad, 2)


def _run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_zeros_command_half_integer(capsys, tmp_path):
    code, out, _ = _run(capsys, ["zeros", "--nu", "0.5", "--count", "3"])
    assert code == 0
    meta, cols, rows = read_table(io.StringIO(out))
    assert meta["command"] == "zeros"
    assert cols == ["n", "zero"]
    for rec, n in zip(rows, (1, 2, 3)):
        assert rec["zero"] == pytest.approx(n * math.pi, abs=1e-10)
    # same rows through a file, bit identical cells
    path = tmp_path / "zeros.csv"
    code2 = main(["zeros", "--nu", "0.5", "--count", "3", "--output", str(path)])
    assert code2 == 0
    _, _, rows2 = read_table(path)
    assert [r["zero"] for r in rows2] == [r["zero"] for r in rows]


def test_zeros_jsonl_format(capsys):
    code, out, _ = _run(
        capsys, ["zeros", "--nu", "0.5", "--count", "2", "--format", "json-lines"]
    )
    assert code == 0
    assert out.startswith("{")
    meta, cols, rows = read_table(io.StringIO(out))
    assert cols == ["n", "zero"]
    assert len(rows) == 2


def test_sample_is_reproducible_across_runs_and_threads(tmp_path):
    base = ["sample", "--dim", "2", "--hurst", "0.5", "--q", "256",
            "--grid", "disk:33", "--seed", "7"]
    paths = [tmp_path / f"s{i}.csv" for i in range(3)]
    assert main(base + ["--output", str(paths[0])]) == 0
    assert main(base + ["--output", str(paths[1])]) == 0
    assert main(base + ["--threads", "4", "--output", str(paths[2])]) == 0
    blobs = [p.read_bytes() for p in paths]
    assert blobs[0] == blobs[1]
    assert blobs[0] == blobs[2]
    meta, cols, rows = read_table(paths[0])
    assert cols == ["x_1", "x_2", "value"]
    assert len(rows) == 797
    origin = [r for r in rows if r["x_1"] == 0.0 and r["x_2"] == 0.0]
    assert len(origin) == 1 and origin[0]["value"] == 0.0


def test_sample_seed_changes_output(tmp_path):
    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    argv = ["sample", "--dim", "2", "--hurst", "0.5", "--q", "64", "--grid", "halton:20"]
    assert main(argv + ["--seed", "7", "--output", str(out_a)]) == 0
    assert main(argv + ["--seed", "8", "--output", str(out_b)]) == 0
    assert out_a.read_bytes() != out_b.read_bytes()


def test_cov_probe_rows_and_pairs(capsys):
    code, out, _ = _run(
        capsys,
        ["cov", "--dim", "3", "--hurst", "0.3", "--q", "64", "--count", "2",
         "--seed", "20259"],
    )
    assert code == 0
    meta, cols, rows = read_table(io.StringIO(out))
    assert meta["probes"] == 4
    assert meta["pairs"] == 2
    assert len(rows) == 6
    params = ModelParams(dim=3, hurst=0.3)
    trunc = resolve_truncation(params, TruncationSpec.level(64.0))
    for rec, r in zip(rows[:4], (0.25, 0.5, 0.75, 1.0)):
        x = [rec["x_1"], rec["x_2"], rec["x_3"]]
        assert x == [r, 0.0, 0.0]
        assert [rec["y_1"], rec["y_2"], rec["y_3"]] == x
        assert rec["closed"] == r**0.6
        assert rec["partial"] == covariance_partial(params, trunc, x, x)
        assert rec["abs_error"] == abs(rec["partial"] - rec["closed"])
    for rec in rows[4:]:
        y = [rec["y_1"], rec["y_2"], rec["y_3"]]
        assert any(v != 0.0 for v in y)


def test_rate_command_smoke(capsys):
    # dim 1 needs the taller ladder for its term counts to span a decade
    code, out, _ = _run(
        capsys,
        ["rate", "--dim", "1", "--hurst", "0.5", "--q", "4096",
         "--grid", "halton:24", "--reps", "100", "--seed", "3"],
    )
    assert code == 0
    meta, cols, rows = read_table(io.StringIO(out))
    assert cols == ["q", "terms", "tail_sup"]
    assert [r["q"] for r in rows] == [16.0 * 2**k for k in range(8)]
    assert all(rows[i]["terms"] < rows[i + 1]["terms"] for i in range(7))
    assert "fitted_slope" in meta and "count_exponent" in meta
    assert meta["expected_slope"] == -0.5


def test_rate_needs_enough_levels(capsys):
    code, _, err = _run(
        capsys,
        ["rate", "--dim", "1", "--hurst", "0.5", "--q", "256", "--grid",
         "halton:8", "--reps", "100"],
    )
    assert code == 3
    assert err.startswith("error:")


def test_harmonics_command(capsys):
    code, out, _ = _run(capsys, ["harmonics", "--dim", "3", "--count", "2"])
    assert code == 0
    meta, cols, rows = read_table(io.StringIO(out))
    assert cols == ["degree", "ordinal", "chain", "sign", "l_norm"]
    assert len(rows) == 1 + 3 + 5
    expected = [(m, i) for m in range(3) for i, _ in enumerate(enumerate_basis(m, 3))]
    assert [(r["degree"], r["ordinal"]) for r in rows] == expected
    assert all(r["l_norm"] > 0 for r in rows)


def test_invalid_flag_values_exit_two(capsys):
    cases = [
        (["sample", "--dim", "2", "--hurst", "1.5"], "--hurst"),
        (["sample", "--dim", "0", "--hurst", "0.5"], "--dim"),
        (["sample", "--dim", "2", "--hurst", "0.5", "--q", "0.5"], "--q"),
        (["sample", "--dim", "2", "--hurst", "0.5", "--rect", "2"], "--rect"),
        (["sample", "--dim", "2", "--hurst", "0.5", "--grid", "mesh:4"], "--grid"),
        (["sample", "--dim", "2", "--hurst", "0.5", "--threads", "-1"], "--threads"),
        (["zeros", "--nu", "-1.5"], "--nu"),
        (["rate", "--dim", "1", "--hurst", "0.5", "--reps", "10"], "--reps"),
    ]
    for argv, flag in cases:
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 2
        err = capsys.readouterr().err
        assert flag in err, (argv, err)


def test_unknown_flag_exits_two(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["zeros", "--nu", "0.5", "--wibble", "3"])
    assert exc.value.code == 2


def test_rect_and_level_are_mutually_exclusive(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["sample", "--dim", "2", "--hurst", "0.5", "--q", "64",
              "--rect", "3,4"])
    assert exc.value.code == 2


def test_help_documents_every_flag(capsys):
    all_flags = ["--dim", "--hurst", "--q", "--rect", "--grid", "--seed",
                 "--reps", "--nu", "--count", "--output", "--format",
                 "--threads"]
    combined = ""
    for argv in (["--help"], ["zeros", "--help"], ["sample", "--help"],
                 ["cov", "--help"], ["rate", "--help"], ["harmonics", "--help"]):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 0
        combined += capsys.readouterr().out
    for flag in all_flags:
        assert flag in combined, flag
