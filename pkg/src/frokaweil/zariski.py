"""Truncated ideals I_lambda, Zariski membership and interpolation at a point.

Everything here reads off the evaluation matrix E whose column for the word w
is the row-major vectorization of w(lambda). The kernel of E is the degree-D
part of the ideal of polynomials vanishing at lambda, and the column span is
the set of values {p(lambda) : deg p <= D}.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike

from frokaweil.exceptions import (
    AlphabetMismatchError,
    InvalidParameterError,
    ShapeMismatchError,
    SizeCapError,
    StabilizationError,
)
from frokaweil.mattuple import ComplexMatrix, MatrixTuple, spectral_norm
from frokaweil.ncalg import FreePolynomial, Word, eval_words, word_count, words_up_to
from frokaweil.settings import settings

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EvaluationMatrix:
    base: MatrixTuple
    D: int
    words: list[Word]
    E: ComplexMatrix

    @property
    def W(self) -> int:
        return len(self.words)

    def prefix(self, degree: int) -> ComplexMatrix:
        """Columns of the words of length <= degree (words are graded)."""
        return self.E[:, : word_count(self.base.d, degree)]


@dataclass(frozen=True, eq=False)
class IdealBasis:
    """Orthonormal coefficient basis of ker E, one polynomial per kernel vector."""

    base: MatrixTuple
    D: int
    words: list[Word]
    polys: list[FreePolynomial]
    coeffs: ComplexMatrix
    rank: int
    rank_tol: float
    ranks: list[int] = field(default_factory=list)

    @property
    def dimension(self) -> int:
        return len(self.polys)


@dataclass(frozen=True)
class ZariskiCheck:
    member: bool
    max_defect: float
    D: int
    basis_size: int


@dataclass(frozen=True, eq=False)
class Interpolant:
    poly: FreePolynomial
    residual: float
    D: int
    rank: int


def evaluation_matrix(lam: MatrixTuple, D: int, cap: int | None = None) -> EvaluationMatrix:
    """E with one row-major vec(w(lambda)) column per word of length <= D."""
    if D < 0:
        raise InvalidParameterError(f"degree cutoff must be nonnegative, got {D}")
    words = words_up_to(lam.d, D, cap)
    products = eval_words(lam, [w.letters for w in words])
    E = np.column_stack([products[w.letters].reshape(-1) for w in words])
    return EvaluationMatrix(base=lam, D=D, words=words, E=E)


def _default_tol(sigma: np.ndarray, rows: int, cols: int) -> float:
    sigma_max = float(sigma[0]) if sigma.size else 0.0
    return settings.rank_rtol * sigma_max * max(rows, cols)


def numerical_rank(E: ArrayLike, rank_tol: float | None = None) -> int:
    """Number of singular values above rank_tol (default relative to sigma_max)."""
    E = np.asarray(E, dtype=np.complex128)
    if E.size == 0:
        return 0
    sigma = scipy.linalg.svdvals(E)
    tol = _default_tol(sigma, *E.shape) if rank_tol is None else rank_tol
    return int(np.count_nonzero(sigma > tol))


def rank_profile(lam: MatrixTuple, D: int, cap: int | None = None) -> list[int]:
    """rank(E_0), ..., rank(E_D)."""
    em = evaluation_matrix(lam, D, cap)
    return [numerical_rank(em.prefix(k)) for k in range(D + 1)]


def ideal_basis(lam: MatrixTuple, D: int, rank_tol: float | None = None) -> IdealBasis:
    """Kernel of E via a full SVD; kernel dimension is W - rank(E)."""
    em = evaluation_matrix(lam, D)
    _, sigma, Vh = scipy.linalg.svd(em.E, full_matrices=True)
    tol = _default_tol(sigma, *em.E.shape) if rank_tol is None else rank_tol
    rank = int(np.count_nonzero(sigma > tol))
    kernel = Vh[rank:].conj()
    polys = [FreePolynomial.from_coefficients(em.words, row) for row in kernel]
    ranks = [numerical_rank(em.prefix(k)) for k in range(D + 1)]
    logger.debug(f"ideal basis at level {lam.level}, D={D}: rank {rank}, kernel dimension {len(polys)}")
    return IdealBasis(
        base=lam, D=D, words=em.words, polys=polys, coeffs=kernel, rank=rank, rank_tol=tol, ranks=ranks
    )


def stabilization_degree(lam: MatrixTuple, cap: int | None = None) -> int:
    """Smallest D with rank(E_D) = rank(E_(D+1)); at most level**2."""
    cap = lam.level**2 + 1 if cap is None else cap
    ranks: list[int] = []
    for D in range(cap + 1):
        try:
            em = evaluation_matrix(lam, D + 1)
        except SizeCapError as exc:
            raise StabilizationError(
                f"evaluation span at level {lam.level} still growing at degree {D}", exc.requested, exc.cap, ranks
            ) from exc
        if not ranks:
            ranks.append(numerical_rank(em.prefix(D)))
        ranks.append(numerical_rank(em.E))
        if ranks[-1] == ranks[-2]:
            logger.debug(f"evaluation span stabilized at D*={D}, ranks {ranks}")
            return D
    raise StabilizationError(f"evaluation span did not stabilize by degree {cap}", cap + 1, cap, ranks)


def in_zariski(
    lam: MatrixTuple,
    x: MatrixTuple,
    D: int,
    tol: float = 1e-8,
    basis: IdealBasis | None = None,
) -> ZariskiCheck:
    """Does every degree-<=D element of I_lambda vanish at x, up to scale?"""
    if lam.d != x.d:
        raise AlphabetMismatchError(f"base point has d={lam.d}, tested point has d={x.d}")
    basis = ideal_basis(lam, D) if basis is None else basis
    if not basis.polys:
        return ZariskiCheck(member=True, max_defect=0.0, D=basis.D, basis_size=0)

    products = eval_words(x, [w.letters for w in basis.words])
    Ex = np.column_stack([products[w.letters].reshape(-1) for w in basis.words])
    values = (Ex @ basis.coeffs.T).T.reshape(len(basis.polys), x.level, x.level)
    x_norm = x.max_norm()
    worst = 0.0
    for p, value in zip(basis.polys, values, strict=True):
        growth = 1.0 + p.coefficient_norm() * x_norm ** (p.degree or 0)
        worst = max(worst, spectral_norm(value) / growth)
    return ZariskiCheck(member=worst <= tol, max_defect=worst, D=basis.D, basis_size=len(basis.polys))


def interpolate(target: ArrayLike, lam: MatrixTuple, D: int) -> Interpolant:
    """Minimal-norm least-squares p of degree <= D with p(lambda) close to target."""
    target = np.asarray(target, dtype=np.complex128)
    n = lam.level
    if target.shape != (n, n):
        raise ShapeMismatchError(f"target must be {n}x{n}, got {target.shape}")
    em = evaluation_matrix(lam, D)
    b = target.reshape(-1)
    cond = settings.rank_rtol * max(n * n, em.W)
    c, _, rank, _ = scipy.linalg.lstsq(em.E, b, cond=cond)
    residual = float(np.linalg.norm(em.E @ c - b))
    poly = FreePolynomial.from_coefficients(em.words, c)
    return Interpolant(poly=poly, residual=residual, D=D, rank=int(rank))
