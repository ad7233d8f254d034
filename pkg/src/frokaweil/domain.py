"""Basic free open sets D_Q = {z : ||Q(z)|| < 1} for a matrix Q of free polynomials."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from frokaweil.exceptions import (
    AlphabetMismatchError,
    DomainError,
    InvalidParameterError,
    ShapeMismatchError,
)
from frokaweil.mattuple import ComplexMatrix, MatrixTuple, SeedLike, make_rng, random_tuple, spectral_norm
from frokaweil.ncalg import FreePolynomial, eval_words, format_poly, parse_poly
from frokaweil.settings import settings

logger = logging.getLogger(__name__)

MAX_HALVINGS = 60


@dataclass(frozen=True)
class MatrixPolyQ:
    """An s x r matrix of free polynomials over a common alphabet."""

    entries: tuple[tuple[FreePolynomial, ...], ...]

    def __post_init__(self) -> None:
        rows = tuple(tuple(row) for row in self.entries)
        if not rows or not rows[0]:
            raise ShapeMismatchError("Q must have at least one entry")
        if len({len(row) for row in rows}) != 1:
            raise ShapeMismatchError(f"Q rows have unequal lengths: {[len(row) for row in rows]}")
        alphabets = {p.d for row in rows for p in row}
        if len(alphabets) != 1:
            raise AlphabetMismatchError(f"Q entries use different alphabets: {sorted(alphabets)}")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def from_strings(cls, rows: Sequence[Sequence[str]], d: int) -> MatrixPolyQ:
        return cls(tuple(tuple(parse_poly(text, d) for text in row) for row in rows))

    @property
    def s(self) -> int:
        return len(self.entries)

    @property
    def r(self) -> int:
        return len(self.entries[0])

    @property
    def d(self) -> int:
        return self.entries[0][0].d

    @property
    def degree(self) -> int:
        """Largest entry degree; 0 when every entry is zero."""
        return max((p.degree or 0) for row in self.entries for p in row)

    def strings(self) -> list[list[str]]:
        return [[format_poly(p) for p in row] for row in self.entries]

    def __str__(self) -> str:
        return ";".join(",".join(row) for row in self.strings())


@dataclass(frozen=True)
class DomainCheck:
    member: bool
    norm: float


def parse_Q(text: str, d: int) -> MatrixPolyQ:
    """Parse "x1,x2;x3,x4": commas separate entries, semicolons separate rows."""
    rows = [[entry.strip() for entry in row.split(",")] for row in text.split(";")]
    if any(entry == "" for row in rows for entry in row):
        raise ShapeMismatchError(f"empty entry in Q {text!r}")
    return MatrixPolyQ.from_strings(rows, d)


def eval_Q(Q: MatrixPolyQ, z: MatrixTuple) -> ComplexMatrix:
    """The (s*n) x (r*n) block matrix whose (i, j) block is q_ij(z)."""
    if Q.d != z.d:
        raise AlphabetMismatchError(f"Q over d={Q.d} evaluated at a tuple with d={z.d}")
    n = z.level
    words = sorted({letters for row in Q.entries for p in row for letters in p.terms})
    products = eval_words(z, words)

    def block(p: FreePolynomial) -> ComplexMatrix:
        out = np.zeros((n, n), dtype=np.complex128)
        for letters, c in p.terms.items():
            out += c * products[letters]
        return out

    return np.block([[block(p) for p in row] for row in Q.entries])


def in_DQ(Q: MatrixPolyQ, z: MatrixTuple, margin: float = 0.0) -> DomainCheck:
    """Membership in D_Q with a quantitative buffer; the boundary ||Q(z)|| = 1 is excluded."""
    norm = spectral_norm(eval_Q(Q, z))
    return DomainCheck(member=norm < 1.0 and norm <= 1.0 - margin, norm=norm)


def random_domain_point(
    Q: MatrixPolyQ,
    level: int,
    seed: SeedLike = None,
    margin: float | None = None,
    scale: float = 1.0,
) -> MatrixTuple:
    """A random tuple at the given level, halved until ||Q(z)|| <= 1 - margin."""
    margin = settings.domain_margin if margin is None else margin
    if not 0.0 <= margin < 1.0:
        raise InvalidParameterError(f"margin must lie in [0, 1), got {margin}")
    rng = make_rng(seed)
    z = random_tuple(level, Q.d, scale=scale * rng.uniform(0.25, 1.0), seed=rng)
    check = in_DQ(Q, z, margin)
    for _ in range(MAX_HALVINGS):
        if check.member:
            return z
        z = z.scaled(0.5)
        check = in_DQ(Q, z, margin)
    if check.member:
        return z
    raise DomainError(f"no point of D_Q with margin {margin} found along the ray", check.norm)
