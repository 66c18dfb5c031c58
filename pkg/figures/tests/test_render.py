from pathlib import Path

import pytest

from potfigs import FIGURE_IDS, FigureSpec, SchemaError, load_rows, render
from potfigs.__main__ import main

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.mark.parametrize("figure_id", FIGURE_IDS)
def test_renders_nonempty_png(figure_id, tmp_path):
    out = tmp_path / f"{figure_id}.png"
    render(FigureSpec(figure_id, FIXTURES / f"{figure_id}.csv", out, "png"))
    assert out.exists() and out.stat().st_size > 1000


@pytest.mark.parametrize("figure_id", FIGURE_IDS)
def test_rendering_is_deterministic(figure_id, tmp_path):
    a, b = tmp_path / "a.png", tmp_path / "b.png"
    src = FIXTURES / f"{figure_id}.csv"
    render(FigureSpec(figure_id, src, a, "png"))
    render(FigureSpec(figure_id, src, b, "png"))
    assert a.read_bytes() == b.read_bytes()


def test_svg_output_is_deterministic(tmp_path):
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    render(FigureSpec("fig5", FIXTURES / "fig5.csv", a, "svg"))
    render(FigureSpec("fig5", FIXTURES / "fig5.csv", b, "svg"))
    assert a.read_bytes() == b.read_bytes()
    assert b"<svg" in a.read_bytes()


def test_schema_mismatch_is_hard_error(tmp_path):
    with pytest.raises(SchemaError, match="does not match the fig5 schema"):
        load_rows(FIXTURES / "fig2.csv", "fig5")


def test_renamed_column_rejected(tmp_path):
    src = (FIXTURES / "fig8.csv").read_text().splitlines()
    src[1] = src[1].replace("n_types", "types")
    bad = tmp_path / "bad.csv"
    bad.write_text("\n".join(src))
    with pytest.raises(SchemaError):
        load_rows(bad, "fig8")


def test_empty_csv_rejected(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(SchemaError, match="no header"):
        load_rows(empty, "fig2")


def test_header_only_rejected(tmp_path):
    header_only = tmp_path / "h.csv"
    header_only.write_text((FIXTURES / "fig3.csv").read_text().splitlines()[1] + "\n")
    with pytest.raises(SchemaError, match="no data rows"):
        load_rows(header_only, "fig3")


def test_null_fields_parse_to_none():
    rows = load_rows(FIXTURES / "fig5.csv", "fig5")
    empty_bins = [r for r in rows if r["n_games"] == 0]
    assert empty_bins and all(r["convergence_fraction"] is None for r in empty_bins)


class TestCli:
    def test_renders_via_module_entry(self, tmp_path, capsys):
        out = tmp_path / "fig7.png"
        code = main(["--figure", "fig7", "--in", str(FIXTURES / "fig7.csv"), "--out", str(out)])
        assert code == 0
        assert out.exists() and out.stat().st_size > 1000

    def test_schema_mismatch_exits_nonzero(self, tmp_path, capsys):
        out = tmp_path / "x.png"
        code = main(["--figure", "fig4", "--in", str(FIXTURES / "fig2.csv"), "--out", str(out)])
        assert code != 0
        assert not out.exists()
        assert "schema" in capsys.readouterr().err

    def test_empty_input_exits_nonzero_without_image(self, tmp_path, capsys):
        empty = tmp_path / "empty.csv"
        empty.write_text("# nothing\n")
        out = tmp_path / "x.png"
        code = main(["--figure", "fig2", "--in", str(empty), "--out", str(out)])
        assert code != 0
        assert not out.exists()

    def test_unknown_figure_rejected(self):
        with pytest.raises(SystemExit):
            main(["--figure", "fig99", "--in", "x.csv", "--out", "y.png"])

    def test_format_from_suffix(self, tmp_path):
        out = tmp_path / "fig8.svg"
        code = main(["--figure", "fig8", "--in", str(FIXTURES / "fig8.csv"), "--out", str(out)])
        assert code == 0
        assert out.read_bytes().lstrip().startswith(b"<?xml")
