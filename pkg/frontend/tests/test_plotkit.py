"""plotkit: schema validation, rendering, CLI behavior, determinism."""

import pytest

from plotkit import PlotSpec, SchemaError, read_csv, render
from plotkit.cli import main

OBS_HEADER = "t,mass,hamiltonian,h1,h2,h4,d2k_norm,moment2k,E_mod,S_term,R_term,residual"


def growth_csv(tmp_path, name="obs.csv"):
    p = tmp_path / name
    lines = ["# config_hash = 00000000deadbeef", OBS_HEADER]
    for j in range(12):
        t = 0.5 * j
        lines.append(f"{t},1.0,1.5,1.2,{2.0 + 0.1 * j},3.0,,,,,,")
    p.write_text("\n".join(lines) + "\n")
    return p


def ratio_csv(tmp_path, name="ratios.csv"):
    p = tmp_path / name
    lines = [
        "# config_hash = 0000000000000001",
        "N,M,T,trials,seed,max_ratio,median_ratio",
        "1,1,3.14,5,7,0.5,0.5",
        "2,1,3.14,5,7,0.31,0.22",
        "4,1,3.14,5,7,0.27,0.15",
    ]
    p.write_text("\n".join(lines) + "\n")
    return p


def residual_csv(tmp_path, name="res.csv"):
    p = tmp_path / name
    lines = ["# config_hash = 02", OBS_HEADER]
    for j in range(8):
        res = "" if j in (0, 7) else f"{1e-6 / (j + 1)}"
        lines.append(f"{0.01 * j},,,,,,,,1.0,0.1,0.01,{res}")
    p.write_text("\n".join(lines) + "\n")
    return p


class TestSchema:
    def test_unknown_columns_ignored(self, tmp_path):
        p = tmp_path / "x.csv"
        p.write_text("t,h2,bonus\n1.0,2.0,9\n")
        table = read_csv(str(p), ("t", "h2"))
        assert table["bonus"] == ["9"]

    def test_missing_column_diagnostic(self, tmp_path):
        p = tmp_path / "x.csv"
        p.write_text("foo,bar\n1,2\n")
        with pytest.raises(SchemaError, match=r"missing required column"):
            read_csv(str(p), ("t", "h2"))

    def test_empty_file(self, tmp_path):
        p = tmp_path / "x.csv"
        p.write_text("")
        with pytest.raises(SchemaError, match="empty"):
            read_csv(str(p), ("t",))

    def test_header_only(self, tmp_path):
        p = tmp_path / "x.csv"
        p.write_text("t,h2\n")
        with pytest.raises(SchemaError, match="no data rows"):
            read_csv(str(p), ("t", "h2"))

    def test_ragged_row(self, tmp_path):
        p = tmp_path / "x.csv"
        p.write_text("t,h2\n1.0\n")
        with pytest.raises(SchemaError, match="row width"):
            read_csv(str(p), ("t", "h2"))

    def test_bad_kind(self):
        with pytest.raises(SchemaError, match="unknown plot kind"):
            PlotSpec(kind="pie", inputs=["x"], output="y")


class TestRender:
    def test_growth(self, tmp_path):
        src = growth_csv(tmp_path)
        out = tmp_path / "g.png"
        res = render(PlotSpec(kind="growth", inputs=[str(src)], output=str(out)))
        assert out.exists() and out.stat().st_size > 0
        assert res.fit_constant is not None and res.fit_constant > 0

    def test_heatmap_annotations(self, tmp_path):
        src = ratio_csv(tmp_path)
        out = tmp_path / "h.png"
        res = render(PlotSpec(kind="ratio-heatmap", inputs=[str(src)], output=str(out)))
        assert out.exists() and out.stat().st_size > 0
        assert res.annotations == {(1, 1): 0.5, (2, 1): 0.31, (4, 1): 0.27}

    def test_residual(self, tmp_path):
        src = residual_csv(tmp_path)
        out = tmp_path / "r.png"
        res = render(PlotSpec(kind="residual", inputs=[str(src)], output=str(out), logy=True))
        assert out.exists() and out.stat().st_size > 0

    def test_deterministic_bytes(self, tmp_path):
        src = growth_csv(tmp_path)
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        render(PlotSpec(kind="growth", inputs=[str(src)], output=str(a)))
        render(PlotSpec(kind="growth", inputs=[str(src)], output=str(b)))
        assert a.read_bytes() == b.read_bytes()


class TestCli:
    def test_success(self, tmp_path, capsys):
        src = ratio_csv(tmp_path)
        out = tmp_path / "h.png"
        code = main(["--kind", "ratio-heatmap", "--in", str(src), "--out", str(out)])
        assert code == 0
        assert "wrote:" in capsys.readouterr().out
        assert out.exists()

    def test_schema_error_exit(self, tmp_path, capsys):
        p = tmp_path / "bad.csv"
        p.write_text("foo,bar\n1,2\n")
        code = main(["--kind", "growth", "--in", str(p), "--out", str(tmp_path / "x.png")])
        assert code == 1
        assert "missing required column" in capsys.readouterr().err

    def test_missing_file_exit(self, tmp_path):
        code = main(["--kind", "growth", "--in", str(tmp_path / "nope.csv")])
        assert code == 1
