"""frokaweil - computational free function theory on matrix tuples."""

from frokaweil.dilation import (
    DilationWitness,
    HullSample,
    compose_witnesses,
    direct_sum_witnesses,
    sample_hull,
    verify_dilation_structural,
    verify_dilation_words,
)
from frokaweil.domain import MatrixPolyQ, eval_Q, in_DQ, parse_Q, random_domain_point
from frokaweil.exceptions import (
    DomainError,
    FrokaweilError,
    InputError,
    NotIsometryError,
    NumericalError,
    PolynomialSyntaxError,
    SchurBoundError,
    SizeCapError,
    StabilizationError,
)
from frokaweil.mattuple import MatrixTuple, ampliate, conjugate, direct_sum, random_tuple, spectral_norm
from frokaweil.models import ExperimentReport, PointRecord, RunConfig
from frokaweil.ncalg import FreePolynomial, Word, eval_poly, format_poly, parse_poly
from frokaweil.realization import Colligation, eval_closed, eval_neumann, random_colligation, synthesize
from frokaweil.settings import settings
from frokaweil.zariski import ideal_basis, in_zariski, interpolate, stabilization_degree

__version__ = "0.1.0"

__all__ = [
    "Colligation",
    "DilationWitness",
    "DomainError",
    "ExperimentReport",
    "FreePolynomial",
    "FrokaweilError",
    "HullSample",
    "InputError",
    "MatrixPolyQ",
    "MatrixTuple",
    "NotIsometryError",
    "NumericalError",
    "PointRecord",
    "PolynomialSyntaxError",
    "RunConfig",
    "SchurBoundError",
    "SizeCapError",
    "StabilizationError",
    "Word",
    "ampliate",
    "compose_witnesses",
    "conjugate",
    "direct_sum",
    "direct_sum_witnesses",
    "eval_Q",
    "eval_closed",
    "eval_neumann",
    "eval_poly",
    "format_poly",
    "ideal_basis",
    "in_DQ",
    "in_zariski",
    "interpolate",
    "parse_Q",
    "parse_poly",
    "random_colligation",
    "random_domain_point",
    "random_tuple",
    "sample_hull",
    "settings",
    "spectral_norm",
    "stabilization_degree",
    "synthesize",
    "verify_dilation_structural",
    "verify_dilation_words",
]
