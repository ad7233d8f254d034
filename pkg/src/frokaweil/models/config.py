"""Run configuration for the command line, loaded from --config files."""

from __future__ import annotations

from pathlib import Path
import sys
from typing import Any, Literal

if sys.version_info >= (3, 11):
    from typing import Self
else:
    from typing_extensions import Self

from pydantic import BaseModel, ConfigDict, Field


class RunConfig(BaseModel):
    """Experiment parameters; flags given on the command line override file values."""

    model_config = ConfigDict(strict=True, extra="forbid")

    seed: int = Field(default=0, ge=0)
    out: str | None = None
    format: Literal["json", "csv"] = "json"
    tol: float | None = Field(default=None, gt=0)

    # Problem data
    d: int = Field(default=2, ge=1)
    q: str = "x1,x2"
    level: int = Field(default=2, ge=1)
    m: int = Field(default=2, ge=1)
    mode: Literal["unitary", "contractive"] = "contractive"
    margin: float | None = Field(default=None, ge=0, lt=1)

    # Experiment sizes
    hull_count: int = Field(default=50, ge=1)
    configs: int = Field(default=10, ge=1)
    trials: int = Field(default=100, ge=1)
    sample_count: int = Field(default=200, ge=1)
    points: int = Field(default=50, ge=1)
    max_order: int = Field(default=12, ge=0)
    witnesses: int = Field(default=200, ge=1)
    word_degree: int = Field(default=6, ge=1)
    N: int = Field(default=3, ge=0)
    degree: int | None = Field(default=None, ge=0)
    r: float = Field(default=1.0, gt=0, le=1)
    N_list: list[int] | None = None
    r_list: list[float] = Field(default_factory=lambda: [0.5, 0.9, 0.99])
    cross_check: bool = False

    @classmethod
    def from_file(cls, file_path: str | Path) -> Self:
        """Load and validate config from JSON file."""
        return cls.model_validate_json(Path(file_path).read_text())

    def merged(self, **overrides: Any) -> Self:
        """A copy with every non-None override applied and re-validated."""
        data = self.model_dump()
        data.update({key: value for key, value in overrides.items() if value is not None})
        return type(self).model_validate(data)
