import json
import os
import subprocess
import sys
from collections import Counter

import pytest

from plots.csvdata import CsvFormatError
from plots.figures import FIGURE_KINDS, FigureSpec, render, render_all

from conftest import make_row


def _sidecar(path):
    with open(path) as fh:
        return json.load(fh)


def test_render_single_point_marker_no_line(csv_file, tmp_path):
    path = csv_file([make_row()])
    out = str(tmp_path / "fig6.png")
    sidecar = _sidecar(render(FigureSpec("fig6", path, out)))
    assert os.path.exists(out)
    measured = [s for s in sidecar["series"] if s["kind"] == "measured"]
    assert len(measured) == 1
    assert measured[0]["points"] == 1
    theory = [s for s in sidecar["series"] if s["kind"] == "theory"]
    assert theory[0]["line"] is False  # one marker, no fit line


def test_render_groups_and_counts(csv_file, rich_rows, tmp_path):
    path = csv_file(rich_rows)
    out = str(tmp_path / "fig6.png")
    sidecar = _sidecar(render(FigureSpec("fig6", path, out)))
    # direct rows only: 3 rule-beta x 2 eps groups, 3 n-points each
    measured = [s for s in sidecar["series"] if s["kind"] == "measured"]
    assert len(measured) == 6
    assert all(s["points"] == 3 for s in measured)
    names = {s["name"] for s in sidecar["series"]}
    for m in measured:
        assert m["name"].replace("(measured)", "(theory)") in names


def test_render_fig9_uniform_policies(csv_file, rich_rows, tmp_path):
    path = csv_file(rich_rows)
    sidecar = _sidecar(render(FigureSpec("fig9", path, str(tmp_path / "f9.png"))))
    measured = [s for s in sidecar["series"] if s["kind"] == "measured"]
    # 2 eps x 2 policies
    assert len(measured) == 4


def test_render_fig10_uses_largest_beta(csv_file, rich_rows, tmp_path):
    path = csv_file(rich_rows)
    sidecar = _sidecar(render(FigureSpec("fig10", path, str(tmp_path / "f10.png"))))
    assert all("beta=2.5" in s["name"] for s in sidecar["series"])


def test_render_all_five(csv_file, rich_rows, tmp_path):
    path = csv_file(rich_rows)
    outs = render_all(path, str(tmp_path))
    assert set(outs) == set(FIGURE_KINDS)
    for kind, sidecar_path in outs.items():
        assert os.path.exists(str(tmp_path / f"{kind}.png"))
        assert os.path.exists(sidecar_path)


def test_render_rejects_empty(tmp_path, csv_file):
    from plots.csvdata import COLUMNS, SCHEMA_LINE

    p = tmp_path / "empty.csv"
    p.write_text(SCHEMA_LINE + "\n" + ",".join(COLUMNS) + "\n")
    with pytest.raises(CsvFormatError, match="no data rows"):
        render(FigureSpec("fig6", str(p), str(tmp_path / "x.png")))


def test_figure_kind_validation(tmp_path):
    with pytest.raises(ValueError):
        FigureSpec("fig11", "x.csv", "y.png")


def _run_cli(args):
    return subprocess.run([sys.executable, "-m", "plots.cli", *args],
                          capture_output=True, text=True)


def test_cli_renders(csv_file, rich_rows, tmp_path):
    path = csv_file(rich_rows)
    out = str(tmp_path / "fig7.png")
    res = _run_cli(["--csv", path, "--fig", "7", "--out", out])
    assert res.returncode == 0, res.stderr
    assert os.path.exists(out)
    assert os.path.exists(out + ".json")


def test_cli_schema_error_message(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("nope\n")
    res = _run_cli(["--csv", str(p), "--fig", "6",
                    "--out", str(tmp_path / "x.png")])
    assert res.returncode == 2
    assert "line 1" in res.stderr
