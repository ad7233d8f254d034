"""Experiment reports: per-point records, summary and deterministic serialization."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field

REPORT_SCHEMA = 1
CSV_COLUMNS = ("point_id", "level", "defect", "norm", "pass")

Scalar = float | int | str | bool | None


def inputs_digest(inputs: dict[str, Any]) -> str:
    """SHA-256 of the canonical JSON of the inputs."""
    canonical = json.dumps(inputs, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode()).hexdigest()


class PointRecord(BaseModel):
    """One evaluated point of an experiment."""

    model_config = ConfigDict(extra="forbid")

    point_id: int
    level: int
    defect: float
    norm: float
    passed: bool
    extra: dict[str, Scalar] = Field(default_factory=dict)


class ExperimentReport(BaseModel):
    """Result of one experiment run.

    ``wall_time`` is kept for display but never serialized, so two runs with the
    same inputs produce byte-identical JSON.
    """

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    schema_version: Literal[1] = Field(default=REPORT_SCHEMA, alias="schema")
    name: str
    inputs: dict[str, Any]
    digest: str
    records: list[PointRecord] = Field(default_factory=list)
    table: list[dict[str, Scalar]] = Field(default_factory=list)
    summary: dict[str, Any] = Field(default_factory=dict)
    passed: bool
    wall_time: float = Field(default=0.0, exclude=True)

    @classmethod
    def create(
        cls,
        name: str,
        inputs: dict[str, Any],
        records: list[PointRecord],
        summary: dict[str, Any],
        passed: bool,
        table: list[dict[str, Scalar]] | None = None,
        wall_time: float = 0.0,
    ) -> ExperimentReport:
        return cls(
            name=name,
            inputs=inputs,
            digest=inputs_digest(inputs),
            records=records,
            table=table or [],
            summary=summary,
            passed=passed,
            wall_time=wall_time,
        )

    @property
    def max_defect(self) -> float:
        return max((rec.defect for rec in self.records), default=0.0)

    def to_json(self) -> str:
        return self.model_dump_json(by_alias=True, indent=2) + "\n"

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for rec in self.records:
            writer.writerow([rec.point_id, rec.level, repr(rec.defect), repr(rec.norm), str(rec.passed).lower()])
        return buffer.getvalue()

    def render(self, fmt: Literal["json", "csv"] = "json") -> str:
        return self.to_csv() if fmt == "csv" else self.to_json()

    def write(self, path: str | Path, fmt: Literal["json", "csv"] = "json") -> None:
        Path(path).write_text(self.render(fmt))
