from pathlib import Path

import pytest

from rmsim_plots import EmptyInput, FigureSpec, SchemaMismatch, render
from rmsim_plots.cli import main
from rmsim_plots.schemas import load_survival

FIXTURES = Path(__file__).parent / "fixtures"


def _png_ok(path: Path) -> bool:
    data = path.read_bytes()
    return data[:8] == b"\x89PNG\r\n\x1a\n" and len(data) > 2000


class TestFigureKinds:
    def test_born_renders(self, tmp_path):
        out = tmp_path / "born.png"
        render(
            FigureSpec(
                kind="born",
                inputs=(str(FIXTURES / "born_report.json"),),
                output=str(out),
            )
        )
        assert _png_ok(out)

    def test_survival_renders_and_exact_curve_anchors(self, tmp_path):
        data = load_survival(str(FIXTURES / "survival.csv"))
        # the drawn exact-law curve passes through (1, 0.5) and (2, 0.375)
        assert data["n"][0] == 1 and data["exact_survival"][0] == 0.5
        assert data["n"][1] == 2 and data["exact_survival"][1] == 0.375
        out = tmp_path / "survival.png"
        render(
            FigureSpec(
                kind="survival",
                inputs=(str(FIXTURES / "survival.csv"),),
                output=str(out),
                log_y=True,
            )
        )
        assert _png_ok(out)

    def test_trace_renders_with_detection_band(self, tmp_path):
        out = tmp_path / "trace.png"
        render(
            FigureSpec(
                kind="trace",
                inputs=(str(FIXTURES / "trace_run0.csv"),),
                output=str(out),
                detect_s=0.0,
            )
        )
        assert _png_ok(out)

    def test_trajectory_renders_with_renewal_envelope(self, tmp_path):
        out = tmp_path / "trajectory.png"
        render(
            FigureSpec(
                kind="trajectory",
                inputs=(
                    str(FIXTURES / "trajectory_mean.csv"),
                    str(FIXTURES / "cycles.csv"),
                ),
                output=str(out),
            )
        )
        assert _png_ok(out)

    def test_rendering_is_deterministic(self, tmp_path):
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        for out in (a, b):
            render(
                FigureSpec(
                    kind="survival",
                    inputs=(str(FIXTURES / "survival.csv"),),
                    output=str(out),
                )
            )
        assert a.read_bytes() == b.read_bytes()

    def test_inputs_not_mutated(self, tmp_path):
        src = FIXTURES / "survival.csv"
        before = src.read_bytes()
        render(
            FigureSpec(
                kind="survival", inputs=(str(src),), output=str(tmp_path / "o.png")
            )
        )
        assert src.read_bytes() == before


class TestErrors:
    def test_schema_mismatch_names_column(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("n,empirical_survival\n1,0.5\n")
        with pytest.raises(SchemaMismatch, match="exact_survival"):
            render(
                FigureSpec(
                    kind="survival", inputs=(str(bad),), output=str(tmp_path / "o.png")
                )
            )

    def test_empty_input(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text("step,tau,s\n")
        with pytest.raises(EmptyInput):
            render(
                FigureSpec(
                    kind="trace", inputs=(str(empty),), output=str(tmp_path / "o.png")
                )
            )

    def test_born_missing_key_named(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"weights": [1.0], "counts": [3], "n_runs": 3}')
        with pytest.raises(SchemaMismatch, match="chi2_p"):
            render(
                FigureSpec(
                    kind="born", inputs=(str(bad),), output=str(tmp_path / "o.png")
                )
            )

    def test_unknown_kind_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            FigureSpec(kind="pie", inputs=("x",), output=str(tmp_path / "o.png"))


class TestCli:
    def test_render_subcommand(self, tmp_path):
        out = tmp_path / "fig.png"
        code = main(
            [
                "render",
                "--kind",
                "survival",
                "--in",
                str(FIXTURES / "survival.csv"),
                "--out",
                str(out),
            ]
        )
        assert code == 0
        assert _png_ok(out)

    def test_schema_error_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n1,2\n")
        code = main(
            ["render", "--kind", "trace", "--in", str(bad), "--out", str(tmp_path / "o.png")]
        )
        assert code == 2
        assert "missing column" in capsys.readouterr().err

    def test_missing_file_exit_code(self, tmp_path):
        code = main(
            [
                "render",
                "--kind",
                "trace",
                "--in",
                str(tmp_path / "nope.csv"),
                "--out",
                str(tmp_path / "o.png"),
            ]
        )
        assert code == 2
