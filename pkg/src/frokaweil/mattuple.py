"""Matrix tuples: points of the disjoint union of all levels M_n^d.

A ``MatrixTuple`` holds d complex n x n matrices at a single level n. The
operations here are the ones the nc constructions need: direct sums,
ampliations, similarities, intertwining checks, compressions and norms.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray

from frokaweil.exceptions import (
    InvalidParameterError,
    NonFiniteError,
    NotIsometryError,
    ShapeMismatchError,
    SingularMatrixError,
)
from frokaweil.settings import settings

logger = logging.getLogger(__name__)

ComplexMatrix = NDArray[np.complex128]
SeedLike = int | np.random.Generator | None


def make_rng(seed: SeedLike) -> np.random.Generator:
    """Generators pass through so callers can thread one stream through helpers."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _as_matrix(M: ArrayLike, name: str = "matrix") -> ComplexMatrix:
    arr = np.asarray(M, dtype=np.complex128)
    if arr.ndim != 2:
        raise ShapeMismatchError(f"{name} must be 2-D, got shape {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class MatrixTuple:
    """d complex n x n matrices at level n, stored as a read-only (d, n, n) array."""

    mats: ComplexMatrix

    def __post_init__(self) -> None:
        arr = np.array(self.mats, dtype=np.complex128)
        if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
            raise ShapeMismatchError(f"expected d square matrices of one size, got array of shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ShapeMismatchError(f"need d >= 1 and n >= 1, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise NonFiniteError("matrix tuple has non-finite entries")
        arr.setflags(write=False)
        object.__setattr__(self, "mats", arr)

    @classmethod
    def from_matrices(cls, mats: Sequence[ArrayLike]) -> MatrixTuple:
        arrays = [_as_matrix(M, f"coordinate {j + 1}") for j, M in enumerate(mats)]
        shapes = {a.shape for a in arrays}
        if len(shapes) != 1:
            raise ShapeMismatchError(f"coordinates have different shapes: {sorted(shapes)}")
        return cls(np.stack(arrays))

    @classmethod
    def scalars(cls, values: Sequence[complex]) -> MatrixTuple:
        """A level-1 point from d complex numbers."""
        return cls(np.asarray(values, dtype=np.complex128).reshape(-1, 1, 1))

    @property
    def level(self) -> int:
        return int(self.mats.shape[1])

    @property
    def d(self) -> int:
        return int(self.mats.shape[0])

    def __getitem__(self, j: int) -> ComplexMatrix:
        return self.mats[j]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MatrixTuple):
            return NotImplemented
        return self.mats.shape == other.mats.shape and bool(np.array_equal(self.mats, other.mats))

    __hash__ = None  # type: ignore[assignment]

    def max_norm(self) -> float:
        """max_j ||x_j|| in the operator norm."""
        return max(spectral_norm(M) for M in self.mats)

    def scaled(self, t: complex) -> MatrixTuple:
        return MatrixTuple(t * self.mats)

    def adjoint(self) -> MatrixTuple:
        return MatrixTuple(np.conj(np.transpose(self.mats, (0, 2, 1))))


@dataclass(frozen=True)
class IntertwineCheck:
    """Result of testing alpha x = y alpha."""

    ok: bool
    defect: float


# ── Norms ────────────────────────────────────────────────────


def spectral_norm(M: ArrayLike) -> float:
    """Largest singular value (operator norm); 0 for empty matrices."""
    arr = np.asarray(M, dtype=np.complex128)
    if arr.size == 0:
        return 0.0
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError("spectral norm of a matrix with non-finite entries")
    return float(scipy.linalg.svdvals(np.atleast_2d(arr), check_finite=False)[0])


def isometry_defect(V: ArrayLike) -> float:
    """||V*V - I|| in the operator norm."""
    V = _as_matrix(V, "V")
    return spectral_norm(V.conj().T @ V - np.eye(V.shape[1]))


def relative_defect(a: ArrayLike, b: ArrayLike) -> float:
    """||a - b||_F / max(1, ||b||_F)."""
    a_arr = np.asarray(a, dtype=np.complex128)
    b_arr = np.asarray(b, dtype=np.complex128)
    if a_arr.shape != b_arr.shape:
        return float("inf")
    return float(np.linalg.norm(a_arr - b_arr) / max(1.0, float(np.linalg.norm(b_arr))))


# ── Constructions ────────────────────────────────────────────


def _check_same_d(x: MatrixTuple, y: MatrixTuple) -> None:
    if x.d != y.d:
        raise ShapeMismatchError(f"variable-count mismatch: d={x.d} vs d={y.d}")


def direct_sum(x: MatrixTuple, y: MatrixTuple) -> MatrixTuple:
    """Coordinate-wise block diagonal [x_j 0; 0 y_j]."""
    _check_same_d(x, y)
    return MatrixTuple(np.stack([scipy.linalg.block_diag(a, b) for a, b in zip(x.mats, y.mats, strict=True)]))


def ampliate(x: MatrixTuple, k: int) -> MatrixTuple:
    """x^(k): the direct sum of k copies of x."""
    if k < 1:
        raise InvalidParameterError(f"ampliation multiplicity must be >= 1, got {k}")
    if k == 1:
        return x
    eye = np.eye(k, dtype=np.complex128)
    return MatrixTuple(np.stack([np.kron(eye, M) for M in x.mats]))


def conjugate(x: MatrixTuple, S: ArrayLike) -> MatrixTuple:
    """Coordinate-wise S x_j S^-1, applied through an LU solve."""
    S = _as_matrix(S, "S")
    n = x.level
    if S.shape != (n, n):
        raise ShapeMismatchError(f"similarity must be {n}x{n}, got {S.shape}")
    if np.linalg.matrix_rank(S) < n:
        raise SingularMatrixError("similarity is rank-deficient", float(np.linalg.cond(S)))
    cond = float(np.linalg.cond(S))
    if cond > settings.similarity_cond_warn:
        logger.warning(f"similarity is ill-conditioned: cond(S) = {cond:.3e}")
    lu = scipy.linalg.lu_factor(S)
    # (S x_j) S^-1 = (S^-T (S x_j)^T)^T
    mats = [scipy.linalg.lu_solve(lu, (S @ M).T, trans=1).T for M in x.mats]
    return MatrixTuple(np.stack(mats))


def check_intertwine(x: MatrixTuple, y: MatrixTuple, alpha: ArrayLike, tol: float = 1e-10) -> IntertwineCheck:
    """Test alpha x_j = y_j alpha for every j, relative to ||alpha|| max_j ||x_j||."""
    _check_same_d(x, y)
    alpha = _as_matrix(alpha, "alpha")
    if alpha.shape != (y.level, x.level):
        raise ShapeMismatchError(f"intertwiner must be {y.level}x{x.level}, got {alpha.shape}")
    defect = max(spectral_norm(alpha @ xj - yj @ alpha) for xj, yj in zip(x.mats, y.mats, strict=True))
    threshold = tol * (1.0 + spectral_norm(alpha) * x.max_norm())
    return IntertwineCheck(ok=defect <= threshold, defect=defect)


def compress(x: MatrixTuple, V: ArrayLike, tol: float | None = None) -> MatrixTuple:
    """Coordinate-wise V* x_j V for an isometry V."""
    tol = settings.isometry_tol if tol is None else tol
    V = _as_matrix(V, "V")
    if V.shape[0] != x.level or V.shape[1] < 1:
        raise ShapeMismatchError(f"isometry must have {x.level} rows and >= 1 column, got {V.shape}")
    defect = isometry_defect(V)
    if defect > tol:
        raise NotIsometryError(defect, tol)
    Vh = V.conj().T
    return MatrixTuple(np.stack([Vh @ M @ V for M in x.mats]))


def block_inclusion(n_top: int, n_bottom: int, which: Literal["top", "bottom"] = "top") -> ComplexMatrix:
    """The isometries [I; 0] and [0; I] of a summand into a direct sum."""
    n = n_top + n_bottom
    if which == "top":
        return np.eye(n, n_top, dtype=np.complex128)
    return np.eye(n, n_bottom, k=-n_top, dtype=np.complex128)


# ── Random instances ─────────────────────────────────────────


def _complex_gaussian(rng: np.random.Generator, shape: tuple[int, ...]) -> ComplexMatrix:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def random_tuple(n: int, d: int, scale: float = 1.0, seed: SeedLike = None) -> MatrixTuple:
    """Complex Gaussian tuple rescaled so that max_j ||x_j|| <= scale."""
    if n < 1 or d < 1:
        raise InvalidParameterError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    if scale <= 0:
        raise InvalidParameterError(f"scale must be positive, got {scale}")
    rng = make_rng(seed)
    G = _complex_gaussian(rng, (d, n, n))
    top = max(spectral_norm(M) for M in G)
    return MatrixTuple(G * (scale * (1.0 - 1e-12) / top))


def random_isometry(n_big: int, n_small: int, seed: SeedLike = None) -> ComplexMatrix:
    """Orthonormalized complex Gaussian columns, phases fixed so the law is Haar."""
    if n_small < 1 or n_big < n_small:
        raise InvalidParameterError(f"need n_big >= n_small >= 1, got {n_big} x {n_small}")
    rng = make_rng(seed)
    Q, R = scipy.linalg.qr(_complex_gaussian(rng, (n_big, n_small)), mode="economic")
    phases = np.diagonal(R) / np.abs(np.diagonal(R))
    return np.asarray(Q * phases, dtype=np.complex128)


def random_unitary(n: int, seed: SeedLike = None) -> ComplexMatrix:
    return random_isometry(n, n, seed)


def random_similarity(n: int, cond: float, seed: SeedLike = None) -> ComplexMatrix:
    """U diag(sigma) W with singular values spread geometrically over [1, cond]."""
    if cond < 1:
        raise InvalidParameterError(f"condition number must be >= 1, got {cond}")
    rng = make_rng(seed)
    sigma = np.geomspace(1.0, cond, n) if n > 1 else np.ones(1)
    return random_unitary(n, rng) @ np.diag(sigma) @ random_unitary(n, rng)
