"""Colligations and the transfer-function realization over D_Q.

A colligation U = [[A, B], [C, D]] with A of shape (r*m, s*m) defines

    f(z) = D I_n + C^ (I - Q^(z) A^)^-1 Q^(z) B^

where the lifts act on the index (i, p, a): i is the block row or column of Q,
p indexes the auxiliary space of dimension m, and the level index a is
innermost. Expanding the resolvent as a geometric series gives the partial sums
p_N and their scaled versions f_{N,r}; ``synthesize`` produces those sums as
free polynomials by running the same recursion over the polynomial ring.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from typing import Literal, NamedTuple

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray

from frokaweil.domain import MatrixPolyQ, eval_Q
from frokaweil.exceptions import (
    ColligationError,
    DomainError,
    InvalidParameterError,
    SchurBoundError,
    ShapeMismatchError,
    SizeCapError,
)
from frokaweil.mattuple import ComplexMatrix, MatrixTuple, SeedLike, make_rng, random_unitary, spectral_norm
from frokaweil.ncalg import FreePolynomial, poly_combination, poly_mul
from frokaweil.settings import settings

logger = logging.getLogger(__name__)

ColligationMode = Literal["unitary", "contractive"]

CONTRACTIVE_NORM = 0.95
SCHUR_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class Colligation:
    """A finite-dimensional colligation with auxiliary dimension m."""

    s: int
    r: int
    m: int
    A: ComplexMatrix
    B: ComplexMatrix
    C: ComplexMatrix
    D: ComplexMatrix
    mode: ColligationMode = "contractive"

    def __post_init__(self) -> None:
        if min(self.s, self.r, self.m) < 1:
            raise ColligationError(f"block sizes must be positive, got s={self.s}, r={self.r}, m={self.m}")
        expected = {
            "A": (self.r * self.m, self.s * self.m),
            "B": (self.r * self.m, 1),
            "C": (1, self.s * self.m),
            "D": (1, 1),
        }
        for name, shape in expected.items():
            block = np.array(getattr(self, name), dtype=np.complex128)
            if block.shape != shape:
                raise ColligationError(f"{name} must have shape {shape}, got {block.shape}")
            block.setflags(write=False)
            object.__setattr__(self, name, block)

        norm = self.norm
        if norm > 1.0 + settings.contractive_tol:
            raise ColligationError(f"colligation is not contractive: ||U|| = {norm:.12g}")
        if self.mode == "unitary":
            if self.s != self.r:
                raise ColligationError(f"unitary colligations need s = r, got s={self.s}, r={self.r}")
            U = self.U
            defect = spectral_norm(U.conj().T @ U - np.eye(U.shape[1]))
            if defect > settings.isometry_tol:
                raise ColligationError(f"colligation flagged unitary but ||U*U - I|| = {defect:.3e}")

    @classmethod
    def from_operator(cls, U: ArrayLike, s: int, r: int, m: int, mode: ColligationMode = "contractive") -> Colligation:
        """Split a (r*m + 1) x (s*m + 1) operator into its four blocks."""
        U = np.asarray(U, dtype=np.complex128)
        if U.shape != (r * m + 1, s * m + 1):
            raise ColligationError(f"operator must have shape {(r * m + 1, s * m + 1)}, got {U.shape}")
        rows, cols = r * m, s * m
        return cls(s, r, m, U[:rows, :cols], U[:rows, cols:], U[rows:, :cols], U[rows:, cols:], mode)

    @property
    def U(self) -> ComplexMatrix:
        return np.block([[self.A, self.B], [self.C, self.D]])

    @property
    def norm(self) -> float:
        return spectral_norm(self.U)

    @property
    def d_value(self) -> complex:
        return complex(self.D[0, 0])


class Lift(NamedTuple):
    """The level-n lifts of A, Q(z), B and C."""

    A: ComplexMatrix
    Q: ComplexMatrix
    B: ComplexMatrix
    C: ComplexMatrix


def random_colligation(
    s: int,
    r: int,
    m: int,
    seed: SeedLike = None,
    mode: ColligationMode = "contractive",
) -> Colligation:
    """A Haar-unitary colligation (s = r only) or a Gaussian one rescaled to ||U|| = 0.95."""
    rng = make_rng(seed)
    if mode == "unitary":
        if s != r:
            raise InvalidParameterError(f"unitary colligations need s = r, got s={s}, r={r}")
        return Colligation.from_operator(random_unitary(r * m + 1, rng), s, r, m, mode)
    shape = (r * m + 1, s * m + 1)
    G = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    return Colligation.from_operator(G * (CONTRACTIVE_NORM / spectral_norm(G)), s, r, m, mode)


def _check_shapes(col: Colligation, Q: MatrixPolyQ) -> None:
    if (col.s, col.r) != (Q.s, Q.r):
        raise ShapeMismatchError(f"colligation is {col.s}x{col.r} but Q is {Q.s}x{Q.r}")


def lift(col: Colligation, Q: MatrixPolyQ, z: MatrixTuple) -> Lift:
    """Kronecker lifts with the level index innermost."""
    _check_shapes(col, Q)
    n, m = z.level, col.m
    eye = np.eye(n, dtype=np.complex128)
    Qz = eval_Q(Q, z).reshape(Q.s, n, Q.r, n)
    Qhat = np.einsum("iajb,pq->ipajqb", Qz, np.eye(m)).reshape(Q.s * m * n, Q.r * m * n)
    return Lift(A=np.kron(col.A, eye), Q=Qhat, B=np.kron(col.B, eye), C=np.kron(col.C, eye))


def _lu_with_rcond(K: ComplexMatrix) -> tuple[tuple[ComplexMatrix, NDArray[np.int32]], float]:
    """LU factors of K and LAPACK's reciprocal 1-norm condition estimate from them."""
    lu, piv = scipy.linalg.lu_factor(K)
    gecon = scipy.linalg.get_lapack_funcs("gecon", (lu,))
    rcond, info = gecon(lu, np.linalg.norm(K, 1), norm="1")
    if info != 0:
        return (lu, piv), 0.0
    return (lu, piv), float(rcond)


def eval_closed(col: Colligation, Q: MatrixPolyQ, z: MatrixTuple, check_schur: bool = True) -> ComplexMatrix:
    """f(z) through an LU solve of the resolvent."""
    L = lift(col, Q, z)
    q_norm = spectral_norm(L.Q)
    if q_norm >= 1.0:
        raise DomainError("point lies outside D_Q", q_norm)
    K = np.eye(L.Q.shape[0]) - L.Q @ L.A
    factors, rcond = _lu_with_rcond(K)
    if not rcond >= settings.rcond_floor:
        raise DomainError(f"resolvent is numerically singular (rcond {rcond:.3e})", q_norm)
    X = scipy.linalg.lu_solve(factors, L.Q @ L.B)
    f = col.d_value * np.eye(z.level) + L.C @ X
    if check_schur:
        f_norm = spectral_norm(f)
        if f_norm > 1.0 + SCHUR_SLACK:
            raise SchurBoundError(f"||f(z)|| = {f_norm:.12g} exceeds the Schur-Agler bound")
    return f


def eval_neumann(col: Colligation, Q: MatrixPolyQ, z: MatrixTuple, N: int, r: float = 1.0) -> ComplexMatrix:
    """f_{N,r}(z) = D I + sum_{k<=N} C^ (r Q^ A^)^k (r Q^) B^."""
    _check_order(N, r, allow_one=True)
    L = lift(col, Q, z)
    V = r * (L.Q @ L.B)
    acc = L.C @ V
    for _ in range(N):
        V = r * (L.Q @ (L.A @ V))
        acc += L.C @ V
    return col.d_value * np.eye(z.level) + acc


def _check_order(N: int, r: float, allow_one: bool) -> None:
    if N < 0:
        raise InvalidParameterError(f"series order must be nonnegative, got {N}")
    upper_ok = r <= 1.0 if allow_one else r < 1.0
    if not (r > 0.0 and upper_ok):
        interval = "(0, 1]" if allow_one else "(0, 1)"
        raise InvalidParameterError(f"scaling r must lie in {interval}, got {r}")


def synthesize(
    col: Colligation,
    Q: MatrixPolyQ,
    N: int,
    r: float = 1.0,
    degree_cap: int | None = None,
) -> FreePolynomial:
    """f_{N,r} as a free polynomial.

    Runs v_0 = Q~ B, v_{k+1} = Q~ (A v_k) with Q~[(i,p),(j,q)] = delta_pq r q_ij over
    the polynomial ring and returns D + sum_k C v_k. Polynomial entries multiply
    from the left so the word order matches evaluation of the numeric series.
    """
    _check_order(N, r, allow_one=True)
    _check_shapes(col, Q)
    cap = settings.degree_cap if degree_cap is None else degree_cap
    requested = (N + 1) * Q.degree
    if requested > cap:
        raise SizeCapError(f"synthesized polynomial of order N={N} over Q of degree {Q.degree}", requested, cap)

    d, m = Q.d, col.m
    scaled_Q = [[r * q for q in row] for row in Q.entries]

    def apply_Q(w: Sequence[FreePolynomial]) -> list[FreePolynomial]:
        # w is indexed by (j, p) -> j * m + p; the result by (i, p) -> i * m + p
        out = []
        for i in range(Q.s):
            for p in range(m):
                terms = [poly_mul(scaled_Q[i][j], w[j * m + p]) for j in range(Q.r)]
                out.append(poly_combination([1.0] * Q.r, terms, d))
        return out

    def apply_scalar(M: ComplexMatrix, v: Sequence[FreePolynomial]) -> list[FreePolynomial]:
        return [poly_combination(list(row), v, d) for row in M]

    v = apply_Q([FreePolynomial.constant(b, d) for b in col.B[:, 0]])
    result = FreePolynomial.constant(col.d_value, d) + apply_scalar(col.C, v)[0]
    for _ in range(N):
        v = apply_Q(apply_scalar(col.A, v))
        result = result + apply_scalar(col.C, v)[0]
    logger.debug(f"synthesized f_(N={N}, r={r}) with {len(result)} terms, degree {result.degree}")
    return result


# ── Bounds ───────────────────────────────────────────────────


def certified_tail_bound(col: Colligation, r: float, N: int) -> float:
    """||C|| ||B|| r^(N+2) / (1 - r), a bound for sup_{D_Q} ||f_{N,r} - f_r||."""
    _check_order(N, r, allow_one=False)
    if spectral_norm(col.A) > 1.0 + settings.contractive_tol:
        raise ColligationError("certified tail bound needs ||A|| <= 1")
    return spectral_norm(col.C) * spectral_norm(col.B) * r ** (N + 2) / (1.0 - r)


def find_N0(col: Colligation, r: float) -> int:
    """Smallest N with r (1 + T(N, r)) <= 1."""
    _check_order(0, r, allow_one=False)
    K = spectral_norm(col.C) * spectral_norm(col.B)

    def holds(N: int) -> bool:
        return r * (1.0 + certified_tail_bound(col, r, N)) <= 1.0

    if K == 0.0 or holds(0):
        return 0
    # r^(N+2) <= (1 - r)^2 / (r K), then settle rounding by direct checks
    N = max(0, math.ceil(math.log((1.0 - r) ** 2 / (r * K)) / math.log(r)) - 2)
    while not holds(N):
        N += 1
    while N > 0 and holds(N - 1):
        N -= 1
    return N


def neumann_ratio(col: Colligation, Q: MatrixPolyQ, z: MatrixTuple) -> float:
    """rho = ||Q^(z) A^||, the pointwise contraction rate of the series."""
    L = lift(col, Q, z)
    return spectral_norm(L.Q @ L.A)


def tail_bound_at(col: Colligation, Q: MatrixPolyQ, z: MatrixTuple, N: int) -> float:
    """||C|| ||B|| rho^(N+1) ||Q^(z)|| / (1 - rho); infinite when rho >= 1."""
    L = lift(col, Q, z)
    rho = spectral_norm(L.Q @ L.A)
    if rho >= 1.0:
        return math.inf
    return spectral_norm(col.C) * spectral_norm(col.B) * rho ** (N + 1) * spectral_norm(L.Q) / (1.0 - rho)


def schur_sup_estimate(col: Colligation, Q: MatrixPolyQ, points: Iterable[MatrixTuple]) -> float:
    """Largest ||f(z)|| over the given points."""
    return max((spectral_norm(eval_closed(col, Q, z, check_schur=False)) for z in points), default=0.0)


def default_N(bound: float, tol: float = 1e-10) -> int:
    """ceil(log(tol) / log(bound)): the order where bound^N drops below tol."""
    if not 0.0 <= bound < 1.0:
        raise InvalidParameterError(f"norm bound must lie in [0, 1), got {bound}")
    if bound == 0.0:
        return 0
    return max(0, math.ceil(math.log(tol) / math.log(bound)))
