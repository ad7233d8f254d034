"""Free polynomials over d noncommuting letters.

Elements of the free algebra are finite linear combinations of words. Terms are
kept in canonical form: words in graded length-then-lexicographic order and no
stored zero coefficients. Arithmetic on coefficients is exact bookkeeping over
complex doubles; floating point only enters in evaluation on matrix tuples.

Polynomial strings follow the grammar

    poly   := term (('+'|'-') term)*
    term   := coeff ('*' factor)* | factor ('*' factor)*
    factor := var ('^' uint)?
    var    := 'x' uint
    coeff  := a | ai | (a+bi) | (a-bi)

with an optional sign in front of the first term.
"""

from __future__ import annotations

import cmath
import itertools
import logging
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass
from functools import cache
from types import MappingProxyType
from typing import TYPE_CHECKING

import numpy as np
import pyparsing as pp
from numpy.typing import NDArray

from frokaweil.exceptions import (
    AlphabetMismatchError,
    InvalidParameterError,
    NonFiniteError,
    PolynomialSyntaxError,
    SizeCapError,
    VariableRangeError,
)
from frokaweil.mattuple import make_rng
from frokaweil.settings import settings

if TYPE_CHECKING:
    from frokaweil.mattuple import MatrixTuple, SeedLike

logger = logging.getLogger(__name__)

# Coefficients below this magnitude are true zeros (underflow), not small numbers.
ZERO_CUTOFF = 1e-300

Letters = tuple[int, ...]
ComplexMatrix = NDArray[np.complex128]


def _graded_key(letters: Letters) -> tuple[int, Letters]:
    return (len(letters), letters)


def _format_letters(letters: Letters) -> str:
    if not letters:
        return "1"
    parts = []
    for letter, run in itertools.groupby(letters):
        power = len(list(run))
        parts.append(f"x{letter}" if power == 1 else f"x{letter}^{power}")
    return "*".join(parts)


@dataclass(frozen=True, slots=True)
class Word:
    """A word in the letters 1..d; the empty word is the unit."""

    letters: Letters
    d: int

    def __post_init__(self) -> None:
        if self.d < 1:
            raise InvalidParameterError(f"alphabet size must be positive, got {self.d}")
        letters = tuple(int(i) for i in self.letters)
        for letter in letters:
            if not 1 <= letter <= self.d:
                raise VariableRangeError(f"letter x{letter} outside alphabet x1..x{self.d}")
        object.__setattr__(self, "letters", letters)

    @property
    def degree(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        return _format_letters(self.letters)


class FreePolynomial:
    """An element of the free algebra on d letters.

    Instances are immutable. ``terms`` maps letter tuples to nonzero complex
    coefficients and iterates in graded lexicographic order.
    """

    __slots__ = ("_d", "_terms")

    def __init__(self, d: int, terms: Mapping[Sequence[int], complex] | None = None) -> None:
        if d < 1:
            raise InvalidParameterError(f"alphabet size must be positive, got {d}")
        clean: dict[Letters, complex] = {}
        for raw_letters, raw_coeff in (terms or {}).items():
            letters = Word(tuple(raw_letters), d).letters
            coeff = complex(raw_coeff)
            if not cmath.isfinite(coeff):
                raise NonFiniteError(f"non-finite coefficient {coeff!r} on word {_format_letters(letters)}")
            clean[letters] = clean.get(letters, 0j) + coeff
        self._d = d
        self._terms = _canonical(clean)

    @classmethod
    def _wrap(cls, d: int, terms: dict[Letters, complex]) -> FreePolynomial:
        # Trusted constructor: letters are already validated.
        poly = cls.__new__(cls)
        poly._d = d
        poly._terms = _canonical(terms)
        return poly

    @classmethod
    def zero(cls, d: int) -> FreePolynomial:
        return cls(d)

    @classmethod
    def constant(cls, c: complex, d: int) -> FreePolynomial:
        return cls(d, {(): c})

    @classmethod
    def variable(cls, i: int, d: int) -> FreePolynomial:
        return cls(d, {(i,): 1.0})

    @classmethod
    def from_coefficients(cls, words: Sequence[Word], coeffs: Iterable[complex]) -> FreePolynomial:
        """Assemble sum c_w * w over a word list (e.g. a coefficient vector)."""
        coeffs = list(coeffs)
        if len(coeffs) != len(words):
            raise InvalidParameterError(f"{len(coeffs)} coefficients for {len(words)} words")
        if not words:
            raise InvalidParameterError("cannot infer alphabet from an empty word list")
        d = words[0].d
        return cls(d, {w.letters: c for w, c in zip(words, coeffs, strict=True)})

    @property
    def d(self) -> int:
        return self._d

    @property
    def terms(self) -> Mapping[Letters, complex]:
        return self._terms

    @property
    def degree(self) -> int | None:
        """Maximal word length; None for the zero polynomial."""
        if not self._terms:
            return None
        return max(len(letters) for letters in self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def coefficient(self, word: Word | Sequence[int]) -> complex:
        letters = word.letters if isinstance(word, Word) else tuple(word)
        return self._terms.get(letters, 0j)

    def coefficient_norm(self) -> float:
        return float(np.linalg.norm(np.fromiter(self._terms.values(), dtype=np.complex128, count=len(self._terms))))

    def __iter__(self) -> Iterator[tuple[Letters, complex]]:
        return iter(self._terms.items())

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FreePolynomial):
            return NotImplemented
        return self._d == other._d and dict(self._terms) == dict(other._terms)

    def __hash__(self) -> int:
        return hash((self._d, frozenset(self._terms.items())))

    def __add__(self, other: FreePolynomial) -> FreePolynomial:
        return poly_add(self, other)

    def __sub__(self, other: FreePolynomial) -> FreePolynomial:
        return poly_sub(self, other)

    def __neg__(self) -> FreePolynomial:
        return poly_scale(-1.0, self)

    def __mul__(self, other: FreePolynomial | complex) -> FreePolynomial:
        if isinstance(other, FreePolynomial):
            return poly_mul(self, other)
        return poly_scale(other, self)

    def __rmul__(self, other: complex) -> FreePolynomial:
        return poly_scale(other, self)

    def __str__(self) -> str:
        return format_poly(self)

    def __repr__(self) -> str:
        return f"FreePolynomial(d={self._d}, {format_poly(self)!r})"


def _canonical(terms: dict[Letters, complex]) -> Mapping[Letters, complex]:
    kept = {w: c for w, c in terms.items() if abs(c) >= ZERO_CUTOFF}
    return MappingProxyType(dict(sorted(kept.items(), key=lambda item: _graded_key(item[0]))))


def _check_alphabet(p: FreePolynomial, q: FreePolynomial) -> None:
    if p.d != q.d:
        raise AlphabetMismatchError(f"alphabet mismatch: d={p.d} vs d={q.d}")


def poly_add(p: FreePolynomial, q: FreePolynomial) -> FreePolynomial:
    _check_alphabet(p, q)
    acc = dict(p.terms)
    for letters, c in q.terms.items():
        acc[letters] = acc.get(letters, 0j) + c
    return FreePolynomial._wrap(p.d, acc)


def poly_sub(p: FreePolynomial, q: FreePolynomial) -> FreePolynomial:
    return poly_add(p, poly_scale(-1.0, q))


def poly_scale(c: complex, p: FreePolynomial) -> FreePolynomial:
    c = complex(c)
    return FreePolynomial._wrap(p.d, {letters: c * coeff for letters, coeff in p.terms.items()})


def poly_mul(p: FreePolynomial, q: FreePolynomial) -> FreePolynomial:
    """Concatenation product: (sum a_u u)(sum b_v v) = sum a_u b_v uv."""
    _check_alphabet(p, q)
    acc: dict[Letters, complex] = {}
    for u, a in p.terms.items():
        for v, b in q.terms.items():
            uv = u + v
            acc[uv] = acc.get(uv, 0j) + a * b
    return FreePolynomial._wrap(p.d, acc)


def poly_combination(coeffs: Sequence[complex], polys: Sequence[FreePolynomial], d: int) -> FreePolynomial:
    """sum_k coeffs[k] * polys[k], accumulated in one pass."""
    acc: dict[Letters, complex] = {}
    for c, p in zip(coeffs, polys, strict=True):
        if c == 0 or p.is_zero:
            continue
        if p.d != d:
            raise AlphabetMismatchError(f"alphabet mismatch: d={p.d} vs d={d}")
        for letters, coeff in p.terms.items():
            acc[letters] = acc.get(letters, 0j) + c * coeff
    return FreePolynomial._wrap(d, acc)


# ── Evaluation ───────────────────────────────────────────────


def eval_words(z: MatrixTuple, words: Iterable[Letters]) -> dict[Letters, ComplexMatrix]:
    """Evaluate words on a tuple, sharing prefix products.

    Every prefix product is computed once, left to right, so a graded list of
    words costs one matrix product per word.
    """
    n = z.level
    cache: dict[Letters, ComplexMatrix] = {(): np.eye(n, dtype=np.complex128)}
    out: dict[Letters, ComplexMatrix] = {}
    for letters in words:
        k = len(letters)
        while letters[:k] not in cache:
            k -= 1
        for j in range(k, len(letters)):
            cache[letters[: j + 1]] = cache[letters[:j]] @ z.mats[letters[j] - 1]
        out[letters] = cache[letters]
    return out


def eval_poly(p: FreePolynomial, z: MatrixTuple) -> ComplexMatrix:
    """Evaluate p at a matrix tuple; the unit word evaluates to the identity."""
    if p.d != z.d:
        raise AlphabetMismatchError(f"polynomial over d={p.d} evaluated at a tuple with d={z.d}")
    result = np.zeros((z.level, z.level), dtype=np.complex128)
    products = eval_words(z, p.terms.keys())
    for letters, c in p.terms.items():
        result += c * products[letters]
    return result


# ── Word enumeration ─────────────────────────────────────────


def word_count(d: int, D: int) -> int:
    """Number of words of length <= D over d letters."""
    if D < 0:
        return 0
    if d == 1:
        return D + 1
    return (d ** (D + 1) - 1) // (d - 1)


def words_up_to(d: int, D: int, cap: int | None = None) -> list[Word]:
    """All words of length <= D in graded length-then-lexicographic order."""
    if d < 1:
        raise InvalidParameterError(f"alphabet size must be positive, got {d}")
    if D < 0:
        raise InvalidParameterError(f"degree must be nonnegative, got {D}")
    cap = settings.word_cap if cap is None else cap
    count = word_count(d, D)
    if count > cap:
        raise SizeCapError(f"word enumeration over d={d} up to degree {D}", count, cap)
    alphabet = range(1, d + 1)
    return [
        Word(letters, d) for length in range(D + 1) for letters in itertools.product(alphabet, repeat=length)
    ]


def random_poly(d: int, degree: int, seed: SeedLike = None, density: float = 0.6) -> FreePolynomial:
    """A random polynomial with complex Gaussian coefficients on a random subset of words."""
    rng = make_rng(seed)
    words = words_up_to(d, degree)
    keep = rng.random(len(words)) < density
    coeffs = rng.standard_normal(len(words)) + 1j * rng.standard_normal(len(words))
    return FreePolynomial(d, {w.letters: c for w, c, k in zip(words, coeffs, keep, strict=True) if k})


# ── Parsing and printing ─────────────────────────────────────

_UNSIGNED = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"


@dataclass(frozen=True)
class _Term:
    coeff: complex
    letters: Letters


@cache
def _grammar() -> pp.ParserElement:
    unsigned = pp.Regex(_UNSIGNED)
    signed = pp.Combine(pp.Opt(pp.one_of("+ -")) + unsigned, adjacent=False)
    imag = pp.Combine(unsigned + pp.Literal("i"), adjacent=False)
    imag.set_parse_action(lambda t: complex(0.0, float(t[0][:-1])))
    real = unsigned.copy().set_parse_action(lambda t: complex(float(t[0]), 0.0))
    paren = pp.Suppress("(") + signed + pp.one_of("+ -") + unsigned + pp.Suppress("i") + pp.Suppress(")")
    paren.set_parse_action(lambda t: complex(float(t[0]), float(t[2]) if t[1] == "+" else -float(t[2])))
    coeff = paren | imag | real

    var = pp.Combine(pp.Literal("x") + pp.Word(pp.nums), adjacent=False).set_parse_action(lambda t: int(t[0][1:]))
    factor = (var + pp.Opt(pp.Suppress("^") + pp.Regex(r"\d+"))).set_parse_action(
        lambda t: [tuple([t[0]] * (int(t[1]) if len(t) > 1 else 1))]
    )
    factors = pp.ZeroOrMore(pp.Suppress("*") + factor)

    def _term(tokens: pp.ParseResults) -> _Term:
        items = list(tokens)
        c = items.pop(0) if items and isinstance(items[0], complex) else 1.0 + 0j
        letters: Letters = tuple(itertools.chain.from_iterable(items))
        return _Term(c, letters)

    term = ((coeff + factors) | (factor + factors)).set_parse_action(_term)
    sign = pp.one_of("+ -")
    return pp.Opt(sign) + term + pp.ZeroOrMore(sign + term)


def parse_poly(text: str, d: int) -> FreePolynomial:
    """Parse a polynomial string over the letters x1..xd."""
    try:
        tokens = _grammar().parse_string(text, parse_all=True)
    except pp.ParseBaseException as exc:
        raise PolynomialSyntaxError(f"cannot parse polynomial {text!r}: {exc.msg}", exc.loc) from exc

    acc: dict[Letters, complex] = {}
    sign = 1.0
    for token in tokens:
        if isinstance(token, str):
            sign = -1.0 if token == "-" else 1.0
            continue
        for letter in token.letters:
            if not 1 <= letter <= d:
                raise VariableRangeError(f"variable x{letter} outside x1..x{d} in {text!r}")
        acc[token.letters] = acc.get(token.letters, 0j) + sign * token.coeff
        sign = 1.0
    logger.debug(f"parsed {text!r} into {len(acc)} raw terms")
    return FreePolynomial._wrap(d, acc)


def _format_float(v: float) -> str:
    return repr(float(v))


def _format_coeff(c: complex) -> str:
    imag_sign = "-" if np.signbit(c.imag) else "+"
    return f"({_format_float(c.real)}{imag_sign}{_format_float(abs(c.imag))}i)"


def format_poly(p: FreePolynomial) -> str:
    """Canonical print: graded lex term order, coefficients as (a+bi)."""
    if p.is_zero:
        return "0"
    parts = []
    for letters, c in p.terms.items():
        coeff = _format_coeff(c)
        parts.append(coeff if not letters else f"{coeff}*{_format_letters(letters)}")
    return " + ".join(parts)
