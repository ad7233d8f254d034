"""
Shared pytest fixtures for frokaweil tests.

This module provides fixtures for:
- Hand-checkable matrix tuples (nilpotent Jordan blocks, commuting diagonals)
- Small colligations with closed-form transfer functions
- Matrix polynomial domains (disc, row ball)
- JSON input files for the command line
"""

from __future__ import annotations

import json
from collections.abc import Callable
from pathlib import Path

import numpy as np
import pytest

from frokaweil.domain import MatrixPolyQ, parse_Q
from frokaweil.mattuple import MatrixTuple
from frokaweil.models.wire import ColligationModel, MatrixTupleModel
from frokaweil.realization import Colligation

SQRT_HALF = 1.0 / np.sqrt(2.0)


# =============================================================================
# Matrix tuples
# =============================================================================


def jordan_block(n: int) -> np.ndarray:
    """Nilpotent n x n Jordan block with ones on the superdiagonal."""
    return np.eye(n, k=1, dtype=np.complex128)


@pytest.fixture
def jordan2() -> MatrixTuple:
    """The single 2x2 Jordan block as a d=1 tuple."""
    return MatrixTuple.from_matrices([jordan_block(2)])


@pytest.fixture
def diagonal_pair() -> MatrixTuple:
    """(diag(1, 2), diag(3, 4)): a commuting d=2 tuple."""
    return MatrixTuple.from_matrices([np.diag([1.0, 2.0]), np.diag([3.0, 4.0])])


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


# =============================================================================
# Domains and colligations
# =============================================================================


@pytest.fixture
def disc() -> MatrixPolyQ:
    """Q = [x1] over one variable: D_Q is the matrix unit ball."""
    return parse_Q("x1", 1)


@pytest.fixture
def row_ball() -> MatrixPolyQ:
    """Q = [x1 x2]: the row ball."""
    return parse_Q("x1,x2", 2)


@pytest.fixture
def swap_colligation() -> Colligation:
    """U = [[0, 1], [1, 0]]: A = 0, B = C = 1, D = 0, so f(z) = z1 on the disc."""
    return Colligation.from_operator(np.array([[0.0, 1.0], [1.0, 0.0]]), 1, 1, 1, "unitary")


@pytest.fixture
def hadamard_colligation() -> Colligation:
    """U = [[1, 1], [1, -1]] / sqrt(2): the scalar Moebius map d + cqb / (1 - aq)."""
    return Colligation.from_operator(SQRT_HALF * np.array([[1.0, 1.0], [1.0, -1.0]]), 1, 1, 1, "unitary")


@pytest.fixture
def constant_colligation() -> Colligation:
    """U = diag(0.5, 0.5): B = C = 0, so f is the constant 0.5."""
    return Colligation.from_operator(np.diag([0.5, 0.5]), 1, 1, 1)


# =============================================================================
# Files for the command line
# =============================================================================


@pytest.fixture
def write_json(tmp_path: Path) -> Callable[[str, object], Path]:
    """Write a JSON document into tmp_path and return its path."""

    def _write(name: str, payload: object) -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(payload))
        return path

    return _write


@pytest.fixture
def point_file(tmp_path: Path) -> Callable[[MatrixTuple], Path]:
    """Serialize a MatrixTuple to a file the command line can read."""

    def _write(x: MatrixTuple) -> Path:
        path = tmp_path / "point.json"
        path.write_text(MatrixTupleModel.from_domain(x).model_dump_json())
        return path

    return _write


@pytest.fixture
def colligation_file(tmp_path: Path, swap_colligation: Colligation) -> Path:
    path = tmp_path / "colligation.json"
    path.write_text(ColligationModel.from_domain(swap_colligation).model_dump_json())
    return path
