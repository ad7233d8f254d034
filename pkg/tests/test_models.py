"""Tests for the JSON wire formats, run configuration and reports."""

from __future__ import annotations

import json
from collections.abc import Callable
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

from frokaweil.dilation import DilationWitness, sample_hull
from frokaweil.domain import parse_Q
from frokaweil.exceptions import ColligationError, ShapeMismatchError
from frokaweil.mattuple import MatrixTuple, random_tuple
from frokaweil.models import (
    ColligationModel,
    ExperimentReport,
    HullSampleModel,
    IdealBasisExport,
    MatrixPolyQModel,
    MatrixTupleModel,
    PointRecord,
    RunConfig,
    WitnessModel,
    decode_matrix,
    encode_matrix,
)
from frokaweil.realization import random_colligation
from frokaweil.zariski import ideal_basis


def make_report(wall_time: float = 0.0) -> ExperimentReport:
    records = [
        PointRecord(point_id=0, level=2, defect=0.5, norm=1.0, passed=True),
        PointRecord(point_id=1, level=1, defect=0.25, norm=2.0, passed=False, extra={"k": 3}),
    ]
    return ExperimentReport.create("demo", {"seed": 1}, records, {"max_defect": 0.5}, False, wall_time=wall_time)


class TestMatrixEncoding:
    """Tests for [re, im] pair matrices."""

    def test_encode(self) -> None:
        assert encode_matrix([[1 + 2j, 0]]) == [[[1.0, 2.0], [0.0, 0.0]]]

    def test_decode(self) -> None:
        np.testing.assert_array_equal(decode_matrix([[[1.0, -1.0]], [[0.0, 3.0]]]), [[1 - 1j], [3j]])

    def test_decode_ragged(self) -> None:
        with pytest.raises(ValueError):
            decode_matrix([[[1.0, 0.0]], [[1.0, 0.0], [2.0, 0.0]]])


class TestMatrixTupleModel:
    """Tests for the point file format."""

    def test_round_trip(self) -> None:
        x = random_tuple(3, 2, seed=0)

        assert MatrixTupleModel.from_domain(x).to_domain() == x

    def test_wrong_count(self) -> None:
        with pytest.raises(ValidationError):
            MatrixTupleModel.model_validate({"level": 1, "d": 2, "mats": [[[[1.0, 0.0]]]]})

    def test_wrong_level(self) -> None:
        with pytest.raises(ValidationError):
            MatrixTupleModel.model_validate({"level": 2, "d": 1, "mats": [[[[1.0, 0.0]]]]})

    def test_pair_length(self) -> None:
        with pytest.raises(ValidationError):
            MatrixTupleModel.model_validate({"level": 1, "d": 1, "mats": [[[[1.0, 0.0, 0.0]]]]})

    def test_from_file(self, tmp_path: Path) -> None:
        x = MatrixTuple.scalars([0.5, -0.25j])
        path = tmp_path / "x.json"
        path.write_text(MatrixTupleModel.from_domain(x).model_dump_json())

        assert MatrixTupleModel.from_file(path).to_domain() == x

    def test_digest_is_stable(self) -> None:
        x = random_tuple(2, 2, seed=1)

        assert MatrixTupleModel.from_domain(x).digest() == MatrixTupleModel.from_domain(x).digest()
        assert MatrixTupleModel.from_domain(x).digest() != MatrixTupleModel.from_domain(x.scaled(0.5)).digest()


class TestColligationModel:
    """Tests for the colligation file format."""

    def test_round_trip(self) -> None:
        col = random_colligation(1, 2, 2, seed=3)

        back = ColligationModel.from_domain(col).to_domain()

        np.testing.assert_array_equal(back.U, col.U)
        assert back.mode == col.mode

    def test_expansive_is_rejected_on_load(self) -> None:
        model = ColligationModel(
            s=1,
            r=1,
            m=1,
            A=[[[2.0, 0.0]]],
            B=[[[0.0, 0.0]]],
            C=[[[0.0, 0.0]]],
            D=[[[0.0, 0.0]]],
        )

        with pytest.raises(ColligationError):
            model.to_domain()

    def test_unknown_mode(self) -> None:
        with pytest.raises(ValidationError):
            ColligationModel.model_validate(
                {"s": 1, "r": 1, "m": 1, "A": [], "B": [], "C": [], "D": [], "mode": "isometric"}
            )

    def test_q_model(self) -> None:
        Q = parse_Q("x1,0;0,x2", 2)

        assert MatrixPolyQModel.from_domain(Q).to_domain() == Q

    def test_q_model_grid(self) -> None:
        with pytest.raises(ValidationError):
            MatrixPolyQModel(s=2, r=1, d=1, entries=[["x1"]])


class TestWitnessModel:
    """Tests for the (k, V) wire format."""

    def test_round_trip(self) -> None:
        V = np.kron(np.array([[0.6], [0.8j]]), np.eye(2))
        model = WitnessModel.from_domain(DilationWitness(k=2, V=V))

        restored = WitnessModel.model_validate_json(model.model_dump_json()).to_domain()

        assert restored.k == 2
        np.testing.assert_array_equal(restored.V, V)

    def test_multiplicity_must_be_positive(self) -> None:
        with pytest.raises(ValidationError):
            WitnessModel(k=0, V=encode_matrix(np.eye(2)))

    def test_row_count_checked_on_load(self) -> None:
        """Test that V must have a multiple of k rows once converted."""
        model = WitnessModel(k=2, V=encode_matrix(np.eye(3)))

        with pytest.raises(ShapeMismatchError):
            model.to_domain()


class TestExports:
    """Tests for ideal basis and hull manifest exports."""

    def test_ideal_basis(self) -> None:
        basis = ideal_basis(MatrixTuple.from_matrices([[[0.0]]]), 2)

        export = IdealBasisExport.from_domain(basis)

        assert (export.level, export.d, export.D) == (1, 1, 2)
        assert export.ranks == basis.ranks
        assert len(export.polys) == 2
        assert len(export.base_digest) == 64

    def test_hull_sample_alias(self) -> None:
        x = random_tuple(2, 2, seed=4)
        sample = sample_hull(x, 1, seed=5)[0]

        data = json.loads(HullSampleModel.from_domain(sample).model_dump_json(by_alias=True))

        assert set(data) == {"tuple", "witness", "structural_defect", "strategy"}
        assert data["witness"]["k"] == sample.witness.k


class TestRunConfig:
    """Tests for config files and flag overrides."""

    def test_defaults(self) -> None:
        cfg = RunConfig()

        assert cfg.seed == 0
        assert cfg.r_list == [0.5, 0.9, 0.99]

    def test_merged_ignores_none(self) -> None:
        cfg = RunConfig(seed=7).merged(seed=None, trials=5)

        assert cfg.seed == 7
        assert cfg.trials == 5

    def test_merged_revalidates(self) -> None:
        with pytest.raises(ValidationError):
            RunConfig().merged(trials=0)

    def test_unknown_key(self) -> None:
        with pytest.raises(ValidationError):
            RunConfig.model_validate({"sead": 1})

    def test_strict_types(self) -> None:
        with pytest.raises(ValidationError):
            RunConfig.model_validate_json('{"seed": "3"}')

    def test_from_file(self, write_json: Callable[[str, object], Path]) -> None:
        path = write_json("run.json", {"seed": 11, "q": "x1;x2", "format": "csv"})

        cfg = RunConfig.from_file(path)

        assert (cfg.seed, cfg.q, cfg.format) == (11, "x1;x2", "csv")


class TestExperimentReport:
    """Tests for deterministic report serialization."""

    def test_json_is_deterministic(self) -> None:
        assert make_report(wall_time=1.0).to_json() == make_report(wall_time=2.5).to_json()

    def test_json_fields(self) -> None:
        text = make_report(wall_time=3.0).to_json()
        data = json.loads(text)

        assert '"schema": 1' in text
        assert "wall_time" not in data
        assert data["passed"] is False
        assert data["records"][1]["extra"] == {"k": 3}

    def test_digest_tracks_inputs(self) -> None:
        first = ExperimentReport.create("a", {"seed": 1}, [], {}, True)
        second = ExperimentReport.create("a", {"seed": 2}, [], {}, True)

        assert first.digest != second.digest

    def test_csv(self) -> None:
        lines = make_report().to_csv().splitlines()

        assert lines[0] == "point_id,level,defect,norm,pass"
        assert lines[1] == "0,2,0.5,1.0,true"
        assert lines[2] == "1,1,0.25,2.0,false"

    def test_max_defect(self) -> None:
        assert make_report().max_defect == 0.5
        assert ExperimentReport.create("empty", {}, [], {}, True).max_defect == 0.0

    def test_write(self, tmp_path: Path) -> None:
        path = tmp_path / "report.csv"

        make_report().write(path, "csv")

        assert path.read_text().startswith("point_id,")
