"""Tests for the frokaweil command line."""

from __future__ import annotations

import json
from collections.abc import Callable
from pathlib import Path

import numpy as np
import pytest
from typer.testing import CliRunner

from frokaweil.cli import EXIT_INPUT, EXIT_PASS, app
from frokaweil.mattuple import MatrixTuple

runner = CliRunner()


def read_report(path: Path) -> dict:  # type: ignore[type-arg]
    return json.loads(path.read_text())


class TestEval:
    """Tests for the eval command."""

    def test_jordan_square_vanishes(
        self, tmp_path: Path, jordan2: MatrixTuple, point_file: Callable[[MatrixTuple], Path]
    ) -> None:
        out = tmp_path / "eval.json"

        result = runner.invoke(
            app, ["eval", "--poly", "x1*x1 + 2", "--d", "1", "--point", str(point_file(jordan2)), "--out", str(out)]
        )

        assert result.exit_code == EXIT_PASS
        report = read_report(out)
        assert report["schema"] == 1
        value = np.array([[complex(re, im) for re, im in row] for row in report["summary"]["value"]])
        np.testing.assert_allclose(value, 2 * np.eye(2))

    def test_random_point(self, tmp_path: Path) -> None:
        out = tmp_path / "eval.json"

        result = runner.invoke(app, ["eval", "--poly", "x1*x2 - x2*x1", "--level", "3", "--out", str(out)])

        assert result.exit_code == EXIT_PASS
        assert read_report(out)["records"][0]["level"] == 3

    def test_syntax_error(self) -> None:
        result = runner.invoke(app, ["eval", "--poly", "x1 +* x2"])

        assert result.exit_code == EXIT_INPUT

    def test_variable_out_of_range(self) -> None:
        result = runner.invoke(app, ["eval", "--poly", "x3", "--d", "2"])

        assert result.exit_code == EXIT_INPUT


class TestConfig:
    """Tests for --config files and flag validation."""

    def test_unknown_key(self, write_json: Callable[[str, object], Path]) -> None:
        path = write_json("run.json", {"trails": 3})

        result = runner.invoke(app, ["axioms", "--config", str(path)])

        assert result.exit_code == EXIT_INPUT

    def test_missing_file(self, tmp_path: Path) -> None:
        result = runner.invoke(app, ["axioms", "--config", str(tmp_path / "absent.json")])

        assert result.exit_code == EXIT_INPUT

    def test_bad_format(self) -> None:
        result = runner.invoke(app, ["axioms", "--trials", "1", "--format", "xml"])

        assert result.exit_code == EXIT_INPUT

    def test_flags_override_file(self, tmp_path: Path, write_json: Callable[[str, object], Path]) -> None:
        path = write_json("run.json", {"trials": 50, "seed": 3})
        out = tmp_path / "axioms.json"

        result = runner.invoke(app, ["axioms", "--config", str(path), "--trials", "2", "--out", str(out)])

        assert result.exit_code == EXIT_PASS
        assert read_report(out)["inputs"] == {"experiment": "axioms", "seed": 3, "trials": 2, "d": 2}


class TestRealizeAndSynth:
    """Tests for realize, its colligation export, and synth."""

    def test_export_then_synth(self, tmp_path: Path) -> None:
        exported = tmp_path / "col.json"
        realize_out = tmp_path / "realize.json"
        synth_out = tmp_path / "synth.json"

        realized = runner.invoke(
            app,
            ["realize", "--samples", "6", "--seed", "4", "--export", str(exported), "--out", str(realize_out)],
        )
        synthesized = runner.invoke(
            app, ["synth", "--colligation", str(exported), "--N", "2", "--out", str(synth_out)]
        )

        assert realized.exit_code == EXIT_PASS
        assert read_report(realize_out)["summary"]["schur_sup_estimate"] <= 1.0 + 1e-9
        assert synthesized.exit_code == EXIT_PASS
        assert read_report(synth_out)["inputs"]["colligation"] == read_report(realize_out)["inputs"]["colligation"]

    def test_swap_synthesizes_x1(self, tmp_path: Path, colligation_file: Path) -> None:
        out = tmp_path / "synth.json"

        result = runner.invoke(
            app, ["synth", "--q", "x1", "--d", "1", "--colligation", str(colligation_file), "--out", str(out)]
        )

        assert result.exit_code == EXIT_PASS
        assert read_report(out)["summary"]["poly"] == "(1.0+0.0i)*x1"

    def test_degree_cap_is_input_error(self) -> None:
        result = runner.invoke(app, ["synth", "--N", "40"])

        assert result.exit_code == EXIT_INPUT


class TestOkaWeil:
    """Tests for the okaweil command."""

    def test_base_outside_domain(
        self, point_file: Callable[[MatrixTuple], Path], colligation_file: Path
    ) -> None:
        base = point_file(MatrixTuple.from_matrices([[[2.0]]]))

        result = runner.invoke(
            app, ["okaweil", "--q", "x1", "--d", "1", "--colligation", str(colligation_file), "--base", str(base)]
        )

        assert result.exit_code == EXIT_INPUT

    def test_single_base(
        self, tmp_path: Path, point_file: Callable[[MatrixTuple], Path], colligation_file: Path
    ) -> None:
        base = point_file(MatrixTuple.from_matrices([np.diag([0.4, -0.3])]))
        out = tmp_path / "okaweil.json"

        result = runner.invoke(
            app,
            [
                "okaweil",
                "--q",
                "x1",
                "--d",
                "1",
                "--colligation",
                str(colligation_file),
                "--base",
                str(base),
                "--hull-count",
                "5",
                "--out",
                str(out),
            ],
        )

        assert result.exit_code == EXIT_PASS
        assert read_report(out)["summary"]["D_star"] == 1

    @pytest.mark.parametrize("flag", [["--q", "x1"], ["--mode", "unitary"], ["--d", "1"]])
    def test_suite_rejects_fixed_problem(self, flag: list[str]) -> None:
        result = runner.invoke(app, ["okaweil", "--configs", "1", *flag])

        assert result.exit_code == EXIT_INPUT

    def test_suite_rejects_colligation_file(self, colligation_file: Path) -> None:
        result = runner.invoke(app, ["okaweil", "--colligation", str(colligation_file)])

        assert result.exit_code == EXIT_INPUT


class TestZariski:
    """Tests for the zariski command."""

    def test_export(
        self, tmp_path: Path, diagonal_pair: MatrixTuple, point_file: Callable[[MatrixTuple], Path]
    ) -> None:
        export = tmp_path / "ideal.json"
        out = tmp_path / "zariski.json"

        result = runner.invoke(
            app, ["zariski", "--point", str(point_file(diagonal_pair)), "--export", str(export), "--out", str(out)]
        )

        assert result.exit_code == EXIT_PASS
        basis = json.loads(export.read_text())
        assert basis["D"] == 1
        assert basis["ranks"][-1] == 2
        assert len(basis["polys"]) == 1
        assert read_report(out)["summary"]["D_star"] == 1


class TestDilate:
    """Tests for the dilate command."""

    def test_manifest(self, tmp_path: Path) -> None:
        manifest = tmp_path / "hull.json"
        out = tmp_path / "dilate.json"

        result = runner.invoke(
            app,
            ["dilate", "--witnesses", "6", "--manifest", str(manifest), "--hull-count", "3", "--out", str(out)],
        )

        assert result.exit_code == EXIT_PASS
        entries = json.loads(manifest.read_text())
        assert len(entries) == 3
        assert all("tuple" in entry and "witness" in entry for entry in entries)


class TestAxiomsCommand:
    """Tests for the axioms command."""

    def test_csv(self, tmp_path: Path) -> None:
        out = tmp_path / "axioms.csv"

        result = runner.invoke(app, ["-v", "axioms", "--trials", "2", "--format", "csv", "--out", str(out)])

        assert result.exit_code == EXIT_PASS
        lines = out.read_text().splitlines()
        assert lines[0] == "point_id,level,defect,norm,pass"
        assert len(lines) == 5

    def test_same_seed_same_bytes(self, tmp_path: Path) -> None:
        first, second = tmp_path / "a.json", tmp_path / "b.json"

        for path in (first, second):
            runner.invoke(app, ["axioms", "--trials", "2", "--seed", "9", "--out", str(path)])

        assert first.read_bytes() == second.read_bytes()


@pytest.mark.acceptance
class TestExperimentCommands:
    """Tests for scaled, converge and intertwine at small sizes."""

    def test_scaled(self, tmp_path: Path, colligation_file: Path) -> None:
        out = tmp_path / "scaled.json"

        result = runner.invoke(
            app,
            [
                "scaled",
                "--q",
                "x1",
                "--d",
                "1",
                "--colligation",
                str(colligation_file),
                "--r-list",
                "0.5,0.9",
                "--samples",
                "8",
                "--out",
                str(out),
            ],
        )

        assert result.exit_code == EXIT_PASS
        assert [row["r"] for row in read_report(out)["table"]] == [0.5, 0.9]

    def test_converge(self, tmp_path: Path, colligation_file: Path) -> None:
        out = tmp_path / "converge.json"

        result = runner.invoke(
            app,
            [
                "converge",
                "--q",
                "x1",
                "--d",
                "1",
                "--colligation",
                str(colligation_file),
                "--n-list",
                "0,1,2",
                "--hull-count",
                "4",
                "--out",
                str(out),
            ],
        )

        assert result.exit_code == EXIT_PASS
        assert [row["N"] for row in read_report(out)["table"]] == [0, 1, 2]

    def test_converge_bad_list(self) -> None:
        result = runner.invoke(app, ["converge", "--n-list", "0,one"])

        assert result.exit_code == EXIT_INPUT

    def test_intertwine(self, tmp_path: Path) -> None:
        out = tmp_path / "intertwine.json"

        result = runner.invoke(app, ["intertwine", "--trials", "2", "--seed", "1", "--out", str(out)])

        assert result.exit_code == EXIT_PASS
        assert len(read_report(out)["records"]) == 2


class TestConsistencyCommand:
    """Tests for the consistency command."""

    def test_row_ball(self, tmp_path: Path) -> None:
        out = tmp_path / "consistency.json"

        result = runner.invoke(app, ["consistency", "--points", "6", "--seed", "3", "--out", str(out)])

        assert result.exit_code == EXIT_PASS
        report = read_report(out)
        assert len(report["records"]) == 6
        assert report["summary"]["tail_violations"] == 0
        assert report["summary"]["synth_orders"] == [0, 1, 2, 3, 4]

    def test_points_must_be_positive(self) -> None:
        result = runner.invoke(app, ["consistency", "--points", "0"])

        assert result.exit_code == EXIT_INPUT
