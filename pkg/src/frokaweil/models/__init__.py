"""Wire formats and report models for frokaweil."""

from frokaweil.models.config import RunConfig
from frokaweil.models.report import ExperimentReport, PointRecord
from frokaweil.models.wire import (
    ColligationModel,
    HullSampleModel,
    IdealBasisExport,
    MatrixPolyQModel,
    MatrixTupleModel,
    WitnessModel,
    decode_matrix,
    encode_matrix,
)

__all__ = [
    "ColligationModel",
    "ExperimentReport",
    "HullSampleModel",
    "IdealBasisExport",
    "MatrixPolyQModel",
    "MatrixTupleModel",
    "PointRecord",
    "RunConfig",
    "WitnessModel",
    "decode_matrix",
    "encode_matrix",
]
