"""Dilation witnesses, their verification, and samplers for dilation hulls.

A witness (k, V) certifies that y dilates to x when p(y) = V* p(x^(k)) V for
every free polynomial p. Word checks test this up to a degree; the structural
check is exact: compression to ran V is multiplicative on the algebra generated
by x^(k) iff ran V = M - N with N inside M both invariant. Taking M as the
smallest invariant subspace containing ran V, that reduces to invariance of
N = M intersected with (ran V)^perp. See docs/semi_invariance.md.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike

from frokaweil.exceptions import InvalidParameterError, ShapeMismatchError, SizeCapError
from frokaweil.mattuple import (
    ComplexMatrix,
    MatrixTuple,
    SeedLike,
    ampliate,
    block_inclusion,
    compress,
    isometry_defect,
    make_rng,
    random_unitary,
    spectral_norm,
)
from frokaweil.ncalg import Word, eval_words, words_up_to
from frokaweil.settings import settings

logger = logging.getLogger(__name__)

HullStrategy = Literal["unitary", "summand", "krylov", "quotient"]
STRATEGIES: tuple[HullStrategy, ...] = ("unitary", "summand", "krylov", "quotient")
CorruptionKind = Literal["isometry", "semi_invariance"]


@dataclass(frozen=True, eq=False)
class DilationWitness:
    """Ampliation multiplicity k and a (k*m) x n matrix V, meant to be an isometry.

    Only shapes are validated here; isometry is checked where a witness is used
    so that corrupted witnesses can be represented and rejected.
    """

    k: int
    V: ComplexMatrix

    def __post_init__(self) -> None:
        V = np.array(self.V, dtype=np.complex128)
        if self.k < 1:
            raise InvalidParameterError(f"ampliation multiplicity must be >= 1, got {self.k}")
        if V.ndim != 2 or V.shape[1] < 1 or V.shape[0] % self.k != 0:
            raise ShapeMismatchError(f"V of shape {V.shape} does not fit multiplicity k={self.k}")
        if V.shape[0] < V.shape[1]:
            raise ShapeMismatchError(f"V of shape {V.shape} has more columns than rows")
        V.setflags(write=False)
        object.__setattr__(self, "V", V)

    @property
    def base_level(self) -> int:
        return self.V.shape[0] // self.k

    @property
    def level(self) -> int:
        return int(self.V.shape[1])

    def isometry_defect(self) -> float:
        return isometry_defect(self.V)


@dataclass(frozen=True)
class WordCheck:
    ok: bool
    worst_word: Word
    defect: float


@dataclass(frozen=True)
class StructuralCheck:
    ok: bool
    compression_defect: float
    invariance_defect: float
    leak_defect: float
    score: float
    subspace_dims: tuple[int, int]


@dataclass(frozen=True, eq=False)
class HullSample:
    point: MatrixTuple
    witness: DilationWitness
    strategy: HullStrategy
    structural_defect: float


def _check_base(x: MatrixTuple, w: DilationWitness) -> None:
    if w.base_level != x.level:
        raise ShapeMismatchError(f"witness expects base level {w.base_level}, tuple has level {x.level}")


def compress_witness(x: MatrixTuple, w: DilationWitness) -> MatrixTuple:
    """The only y compatible with the witness: y_j = V* x_j^(k) V."""
    _check_base(x, w)
    return compress(ampliate(x, w.k), w.V)


def _compressed_word(P: ComplexMatrix, V: ComplexMatrix, k: int) -> ComplexMatrix:
    # V* (I_k kron P) V summed block by block
    blocks = V.reshape(k, P.shape[0], V.shape[1])
    return np.einsum("tai,ab,tbj->ij", blocks.conj(), P, blocks)


def verify_dilation_words(
    y: MatrixTuple,
    x: MatrixTuple,
    w: DilationWitness,
    D: int,
    tol: float = 1e-9,
) -> WordCheck:
    """Check p(y) = V* p(x)^(k) V on every word of length <= D."""
    _check_base(x, w)
    if y.level != w.level or y.d != x.d:
        raise ShapeMismatchError(f"point of level {y.level} does not match witness of level {w.level}")
    unit = Word((), x.d)
    iso = w.isometry_defect()
    if iso > settings.isometry_tol:
        return WordCheck(ok=False, worst_word=unit, defect=iso)

    words = words_up_to(x.d, D)
    letters = [wd.letters for wd in words]
    at_y = eval_words(y, letters)
    at_x = eval_words(x, letters)
    scale = max(1.0, x.max_norm())
    worst_word, worst = unit, 0.0
    for wd in words:
        gap = spectral_norm(at_y[wd.letters] - _compressed_word(at_x[wd.letters], w.V, w.k))
        normalized = gap / scale**wd.degree
        if normalized > worst:
            worst_word, worst = wd, normalized
    return WordCheck(ok=worst <= tol, worst_word=worst_word, defect=worst)


def krylov_invariant_subspace(x: MatrixTuple, seeds: ArrayLike, tol: float | None = None) -> ComplexMatrix:
    """Orthonormal basis of the smallest x-invariant subspace containing the seeds.

    Breadth-first: every accepted vector is pushed through each coordinate and
    kept when its component outside the current span exceeds tol relative to
    the size of what produced it. Re-orthogonalization runs twice.
    """
    tol = settings.krylov_growth_tol if tol is None else tol
    n = x.level
    seeds = np.asarray(seeds, dtype=np.complex128).reshape(n, -1)
    basis = np.zeros((n, 0), dtype=np.complex128)
    norms = [spectral_norm(M) for M in x.mats]

    def extend(v: ComplexMatrix, scale: float) -> ComplexMatrix | None:
        nonlocal basis
        for _ in range(2):
            v = v - basis @ (basis.conj().T @ v)
        size = float(np.linalg.norm(v))
        if basis.shape[1] >= n or size <= tol * scale:
            return None
        v = v / size
        basis = np.column_stack([basis, v])
        return v

    queue = []
    for seed in seeds.T:
        added = extend(seed, float(np.linalg.norm(seed)))
        if added is not None:
            queue.append(added)
    while queue:
        v = queue.pop(0)
        for M, norm in zip(x.mats, norms, strict=True):
            added = extend(M @ v, norm)
            if added is not None:
                queue.append(added)
    return basis


def _invariance_defect(X: MatrixTuple, Nb: ComplexMatrix) -> float:
    if Nb.shape[1] == 0:
        return 0.0
    return max(spectral_norm(M @ Nb - Nb @ (Nb.conj().T @ M @ Nb)) for M in X.mats)


def verify_dilation_structural(
    y: MatrixTuple,
    x: MatrixTuple,
    w: DilationWitness,
    tol: float = 1e-9,
) -> StructuralCheck:
    """Exact check: y is the compression of x^(k) and ran V is semi-invariant.

    With M the smallest invariant subspace containing ran V and N = M ⊖ ran V,
    every degree-two word defect factors as (V* X_a N)(N* X_b V). The first
    factor is bounded by the invariance defect of N, the second by the leak of
    X ran V into N, and V is valid exactly when their product vanishes. The
    score is the compression defect over max(1, ‖x‖) and that product over
    max(1, ‖x‖)², the same normalization ``verify_dilation_words`` applies per
    degree, so both checks accept and reject at the same tol.
    """
    _check_base(x, w)
    if y.level != w.level or y.d != x.d:
        raise ShapeMismatchError(f"point of level {y.level} does not match witness of level {w.level}")
    iso = w.isometry_defect()
    if iso > settings.isometry_tol:
        inf = float("inf")
        return StructuralCheck(
            ok=False,
            compression_defect=iso,
            invariance_defect=inf,
            leak_defect=inf,
            score=inf,
            subspace_dims=(0, 0),
        )

    X = ampliate(x, w.k)
    V = w.V
    scale = max(1.0, x.max_norm())
    compression = max(spectral_norm(yj - V.conj().T @ Xj @ V) for yj, Xj in zip(y.mats, X.mats, strict=True))

    Mb = krylov_invariant_subspace(X, V)
    Nb = Mb @ scipy.linalg.null_space(V.conj().T @ Mb)
    invariance = _invariance_defect(X, Nb)
    leak = max(spectral_norm(Nb.conj().T @ Xj @ V) for Xj in X.mats) if Nb.shape[1] else 0.0
    score = max(compression / scale, invariance * leak / scale**2)
    return StructuralCheck(
        ok=score <= tol,
        compression_defect=compression,
        invariance_defect=invariance,
        leak_defect=leak,
        score=score,
        subspace_dims=(Mb.shape[1], Nb.shape[1]),
    )


# ── Witness algebra ──────────────────────────────────────────


def compose_witnesses(w_xy: DilationWitness, w_yz: DilationWitness) -> DilationWitness:
    """Witness for z from x given y from x and z from y: V = (I_k2 kron V1) V2."""
    if w_yz.base_level != w_xy.level:
        raise ShapeMismatchError(f"second witness expects level {w_yz.base_level}, first produces {w_xy.level}")
    eye = np.eye(w_yz.k, dtype=np.complex128)
    return DilationWitness(k=w_xy.k * w_yz.k, V=np.kron(eye, w_xy.V) @ w_yz.V)


def direct_sum_witnesses(x: MatrixTuple, b: MatrixTuple) -> tuple[DilationWitness, DilationWitness]:
    """Block inclusions showing x and b both lie in the hull of x + b."""
    return (
        DilationWitness(k=1, V=block_inclusion(x.level, b.level, "top")),
        DilationWitness(k=1, V=block_inclusion(x.level, b.level, "bottom")),
    )


def corrupt_witness(
    w: DilationWitness,
    eps: float,
    kind: CorruptionKind = "isometry",
    seed: SeedLike = None,
) -> DilationWitness:
    """A near miss: V + eps G off the isometry manifold, or its nearby isometry."""
    rng = make_rng(seed)
    G = rng.standard_normal(w.V.shape) + 1j * rng.standard_normal(w.V.shape)
    perturbed = w.V + eps * G / spectral_norm(G)
    if kind == "isometry":
        return DilationWitness(k=w.k, V=perturbed)
    Qf, R = scipy.linalg.qr(perturbed, mode="economic")
    phases = np.diagonal(R) / np.abs(np.diagonal(R))
    return DilationWitness(k=w.k, V=Qf * phases)


# ── Hull sampling ────────────────────────────────────────────


def _random_vectors(rng: np.random.Generator, n: int, count: int) -> ComplexMatrix:
    return rng.standard_normal((n, count)) + 1j * rng.standard_normal((n, count))


def _unitary_witness(x: MatrixTuple, rng: np.random.Generator) -> DilationWitness:
    return DilationWitness(k=1, V=random_unitary(x.level, rng))


def _summand_witness(x: MatrixTuple, rng: np.random.Generator, k_max: int) -> DilationWitness:
    k = int(rng.integers(1, k_max + 1))
    u = _random_vectors(rng, k, 1)
    u /= np.linalg.norm(u)
    return DilationWitness(k=k, V=np.kron(u, np.eye(x.level)))


def _subspace_witness(k: int, basis: ComplexMatrix, rng: np.random.Generator) -> DilationWitness:
    # rotate inside the subspace so the compressed point is not in a fixed basis
    return DilationWitness(k=k, V=basis @ random_unitary(basis.shape[1], rng))


def _krylov_witness(x: MatrixTuple, rng: np.random.Generator, k_max: int) -> DilationWitness | None:
    k = int(rng.integers(1, k_max + 1))
    X = ampliate(x, k)
    M = krylov_invariant_subspace(X, _random_vectors(rng, X.level, 1))
    return _subspace_witness(k, M, rng) if M.shape[1] else None


def _quotient_witness(x: MatrixTuple, rng: np.random.Generator, k_max: int) -> DilationWitness | None:
    k = int(rng.integers(min(2, k_max), k_max + 1))
    X = ampliate(x, k)
    seeds = _random_vectors(rng, X.level, 2)
    N = krylov_invariant_subspace(X, seeds[:, :1])
    M = krylov_invariant_subspace(X, seeds)
    gap = M.shape[1] - N.shape[1]
    if gap < 1:
        return None
    left, _, _ = scipy.linalg.svd(M - N @ (N.conj().T @ M), full_matrices=False)
    return _subspace_witness(k, left[:, :gap], rng)


def sample_hull(
    x: MatrixTuple,
    count: int,
    seed: SeedLike = None,
    strategy: HullStrategy | Literal["mix"] = "mix",
    tol: float = 1e-9,
    k_max: int | None = None,
) -> list[HullSample]:
    """Certified points of the dilation hull of x.

    Every returned witness passes ``verify_dilation_structural``. Subspace
    strategies that produce an empty subspace or a witness that fails
    verification fall back to unitary conjugation.
    """
    if count < 1:
        raise InvalidParameterError(f"sample count must be >= 1, got {count}")
    k_cap = settings.max_ampliation if k_max is None else k_max
    k_max = max(1, min(k_cap, settings.max_dilation_dim // x.level))
    if k_max * x.level > settings.max_dilation_dim:
        raise SizeCapError(f"dilation of a level-{x.level} point", k_max * x.level, settings.max_dilation_dim)
    rng = make_rng(seed)
    samples = []
    for _ in range(count):
        chosen: HullStrategy = STRATEGIES[int(rng.integers(len(STRATEGIES)))] if strategy == "mix" else strategy
        witness: DilationWitness | None
        if chosen == "summand":
            witness = _summand_witness(x, rng, k_max)
        elif chosen == "krylov":
            witness = _krylov_witness(x, rng, k_max)
        elif chosen == "quotient":
            witness = _quotient_witness(x, rng, k_max)
        else:
            witness = _unitary_witness(x, rng)

        if witness is None:
            logger.debug(f"strategy {chosen} found no subspace, using unitary conjugation")
            chosen, witness = "unitary", _unitary_witness(x, rng)
        y = compress_witness(x, witness)
        check = verify_dilation_structural(y, x, witness, tol)
        if not check.ok:
            logger.debug(f"strategy {chosen} witness failed verification, using unitary conjugation")
            chosen, witness = "unitary", _unitary_witness(x, rng)
            y = compress_witness(x, witness)
            check = verify_dilation_structural(y, x, witness, tol)
        samples.append(HullSample(point=y, witness=witness, strategy=chosen, structural_defect=check.score))
    return samples
