"""JSON wire formats.

Complex numbers travel as [re, im] pairs and matrices as row-major lists of
rows. Every model converts to and from its domain object and loads from a file.
"""

from __future__ import annotations

import hashlib
from pathlib import Path
import sys
from typing import Annotated, Literal

if sys.version_info >= (3, 11):
    from typing import Self
else:
    from typing_extensions import Self

import numpy as np
from numpy.typing import ArrayLike
from pydantic import BaseModel, ConfigDict, Field, model_validator

from frokaweil.dilation import DilationWitness, HullSample
from frokaweil.domain import MatrixPolyQ
from frokaweil.mattuple import ComplexMatrix, MatrixTuple
from frokaweil.ncalg import format_poly
from frokaweil.realization import Colligation
from frokaweil.zariski import IdealBasis

ComplexPair = Annotated[list[float], Field(min_length=2, max_length=2)]
MatrixData = list[list[ComplexPair]]


def encode_matrix(M: ArrayLike) -> MatrixData:
    arr = np.atleast_2d(np.asarray(M, dtype=np.complex128))
    return [[[float(v.real), float(v.imag)] for v in row] for row in arr]


def decode_matrix(data: MatrixData) -> ComplexMatrix:
    if not data or len({len(row) for row in data}) != 1:
        raise ValueError("matrix rows must be non-empty and of equal length")
    return np.array([[complex(re, im) for re, im in row] for row in data], dtype=np.complex128)


class _WireModel(BaseModel):
    model_config = ConfigDict(strict=True, extra="forbid", populate_by_name=True)

    @classmethod
    def from_file(cls, file_path: str | Path) -> Self:
        """Load and validate from a JSON file."""
        return cls.model_validate_json(Path(file_path).read_text())

    def digest(self) -> str:
        return hashlib.sha256(self.model_dump_json(by_alias=True).encode()).hexdigest()


class MatrixTupleModel(_WireModel):
    level: int = Field(ge=1)
    d: int = Field(ge=1)
    mats: list[MatrixData]

    @model_validator(mode="after")
    def check_shape(self) -> Self:
        if len(self.mats) != self.d:
            raise ValueError(f"expected {self.d} matrices, got {len(self.mats)}")
        for M in self.mats:
            if len(M) != self.level or any(len(row) != self.level for row in M):
                raise ValueError(f"every matrix must be {self.level}x{self.level}")
        return self

    @classmethod
    def from_domain(cls, x: MatrixTuple) -> MatrixTupleModel:
        return cls(level=x.level, d=x.d, mats=[encode_matrix(M) for M in x.mats])

    def to_domain(self) -> MatrixTuple:
        return MatrixTuple.from_matrices([decode_matrix(M) for M in self.mats])


class MatrixPolyQModel(_WireModel):
    s: int = Field(ge=1)
    r: int = Field(ge=1)
    d: int = Field(ge=1)
    entries: list[list[str]]

    @model_validator(mode="after")
    def check_shape(self) -> Self:
        if len(self.entries) != self.s or any(len(row) != self.r for row in self.entries):
            raise ValueError(f"entries must form a {self.s}x{self.r} grid")
        return self

    @classmethod
    def from_domain(cls, Q: MatrixPolyQ) -> MatrixPolyQModel:
        return cls(s=Q.s, r=Q.r, d=Q.d, entries=Q.strings())

    def to_domain(self) -> MatrixPolyQ:
        return MatrixPolyQ.from_strings(self.entries, self.d)


class ColligationModel(_WireModel):
    s: int = Field(ge=1)
    r: int = Field(ge=1)
    m: int = Field(ge=1)
    A: MatrixData
    B: MatrixData
    C: MatrixData
    D: MatrixData
    mode: Literal["unitary", "contractive"] = "contractive"

    @classmethod
    def from_domain(cls, col: Colligation) -> ColligationModel:
        return cls(
            s=col.s,
            r=col.r,
            m=col.m,
            A=encode_matrix(col.A),
            B=encode_matrix(col.B),
            C=encode_matrix(col.C),
            D=encode_matrix(col.D),
            mode=col.mode,
        )

    def to_domain(self) -> Colligation:
        return Colligation(
            s=self.s,
            r=self.r,
            m=self.m,
            A=decode_matrix(self.A),
            B=decode_matrix(self.B),
            C=decode_matrix(self.C),
            D=decode_matrix(self.D),
            mode=self.mode,
        )


class WitnessModel(_WireModel):
    k: int = Field(ge=1)
    V: MatrixData

    @classmethod
    def from_domain(cls, w: DilationWitness) -> WitnessModel:
        return cls(k=w.k, V=encode_matrix(w.V))

    def to_domain(self) -> DilationWitness:
        return DilationWitness(k=self.k, V=decode_matrix(self.V))


class HullSampleModel(_WireModel):
    point: MatrixTupleModel = Field(alias="tuple")
    witness: WitnessModel
    structural_defect: float
    strategy: str = "unitary"

    @classmethod
    def from_domain(cls, sample: HullSample) -> HullSampleModel:
        return cls(
            point=MatrixTupleModel.from_domain(sample.point),
            witness=WitnessModel.from_domain(sample.witness),
            structural_defect=sample.structural_defect,
            strategy=sample.strategy,
        )


class IdealBasisExport(_WireModel):
    base_digest: str
    level: int
    d: int
    D: int
    rank_tol: float
    ranks: list[int]
    polys: list[str]

    @classmethod
    def from_domain(cls, basis: IdealBasis) -> IdealBasisExport:
        return cls(
            base_digest=MatrixTupleModel.from_domain(basis.base).digest(),
            level=basis.base.level,
            d=basis.base.d,
            D=basis.D,
            rank_tol=basis.rank_tol,
            ranks=basis.ranks,
            polys=[format_poly(p) for p in basis.polys],
        )
