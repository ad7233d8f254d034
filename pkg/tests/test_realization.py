"""Unit tests for colligations, the transfer-function realization and its series."""

from __future__ import annotations

import numpy as np
import pytest
import scipy.linalg

from frokaweil.domain import MatrixPolyQ, parse_Q, random_domain_point
from frokaweil.exceptions import (
    ColligationError,
    DomainError,
    InvalidParameterError,
    ShapeMismatchError,
    SizeCapError,
)
from frokaweil.mattuple import MatrixTuple, random_tuple, spectral_norm
from frokaweil.ncalg import eval_poly
from frokaweil.realization import (
    Colligation,
    _lu_with_rcond,
    certified_tail_bound,
    default_N,
    eval_closed,
    eval_neumann,
    find_N0,
    neumann_ratio,
    random_colligation,
    schur_sup_estimate,
    synthesize,
    tail_bound_at,
)

SQRT_HALF = 1.0 / np.sqrt(2.0)


class TestColligation:
    """Tests for colligation validation and random colligations."""

    def test_unitary_small(self) -> None:
        col = random_colligation(1, 1, 1, seed=0, mode="unitary")
        U = col.U

        assert U.shape == (2, 2)
        assert spectral_norm(U.conj().T @ U - np.eye(2)) <= 1e-12

    def test_contractive_norm(self) -> None:
        col = random_colligation(1, 2, 3, seed=0)

        assert col.A.shape == (6, 3)
        assert col.norm == pytest.approx(0.95, abs=1e-10)

    def test_same_seed_same_bytes(self) -> None:
        first = random_colligation(2, 2, 2, seed=7, mode="unitary")
        second = random_colligation(2, 2, 2, seed=7, mode="unitary")

        assert first.U.tobytes() == second.U.tobytes()

    def test_rejects_expansive(self) -> None:
        with pytest.raises(ColligationError):
            Colligation.from_operator(np.diag([2.0, 0.0]), 1, 1, 1)

    def test_rejects_false_unitary_flag(self) -> None:
        with pytest.raises(ColligationError):
            Colligation.from_operator(np.diag([0.5, 0.5]), 1, 1, 1, "unitary")

    def test_rejects_bad_block_shape(self) -> None:
        with pytest.raises(ColligationError):
            Colligation(s=1, r=1, m=2, A=np.zeros((2, 2)), B=np.zeros((1, 1)), C=np.zeros((1, 2)), D=np.zeros((1, 1)))

    def test_unitary_needs_square_q(self) -> None:
        with pytest.raises(InvalidParameterError):
            random_colligation(1, 2, 1, seed=0, mode="unitary")


class TestEvalClosed:
    """Tests for f(z) = D + C^ (I - Q^ A^)^-1 Q^ B^."""

    @pytest.mark.parametrize("level", [1, 2, 4])
    def test_swap_is_identity_map(self, swap_colligation: Colligation, disc: MatrixPolyQ, level: int) -> None:
        z = random_tuple(level, 1, scale=0.9, seed=level)

        np.testing.assert_allclose(eval_closed(swap_colligation, disc, z), z[0], atol=1e-14)

    def test_moebius_at_zero(self, hadamard_colligation: Colligation, disc: MatrixPolyQ) -> None:
        f = eval_closed(hadamard_colligation, disc, MatrixTuple.from_matrices([[[0.0]]]))

        assert f[0, 0] == pytest.approx(-SQRT_HALF, abs=1e-12)

    def test_moebius_at_half(self, hadamard_colligation: Colligation, disc: MatrixPolyQ) -> None:
        f = eval_closed(hadamard_colligation, disc, MatrixTuple.from_matrices([[[0.5]]]))
        expected = -SQRT_HALF + 0.5 * 0.5 / (1.0 - 0.5 * SQRT_HALF)

        assert f[0, 0] == pytest.approx(expected, abs=1e-12)

    def test_outside_domain(self, swap_colligation: Colligation, disc: MatrixPolyQ) -> None:
        with pytest.raises(DomainError) as exc_info:
            eval_closed(swap_colligation, disc, MatrixTuple.from_matrices([[[1.0]]]))

        assert exc_info.value.norm == pytest.approx(1.0)

    def test_shape_mismatch(self, swap_colligation: Colligation, row_ball: MatrixPolyQ) -> None:
        with pytest.raises(ShapeMismatchError):
            eval_closed(swap_colligation, row_ball, random_tuple(2, 2, scale=0.3, seed=0))

    def test_schur_bound(self, row_ball: MatrixPolyQ) -> None:
        col = random_colligation(1, 2, 2, seed=3)
        points = [random_domain_point(row_ball, 1 + i % 3, seed=i, margin=0.0) for i in range(30)]

        assert schur_sup_estimate(col, row_ball, points) <= 1.0 + 1e-9

    def test_similarity_equivariant(self, row_ball: MatrixPolyQ) -> None:
        col = random_colligation(1, 2, 2, seed=4)
        z = random_domain_point(row_ball, 2, seed=5, margin=0.3)
        S = np.array([[1.0, 0.2], [0.0, 1.0]])
        Sinv = np.linalg.inv(S)
        w = MatrixTuple.from_matrices([S @ zj @ Sinv for zj in z.mats])

        np.testing.assert_allclose(eval_closed(col, row_ball, w), S @ eval_closed(col, row_ball, z) @ Sinv, atol=1e-12)

    def test_rcond_from_lu_factors(self) -> None:
        """Test the LAPACK estimate against the exact 1-norm condition number."""
        K = np.array([[1.0, 0.5j], [0.25, 1.0]], dtype=np.complex128)

        factors, rcond = _lu_with_rcond(K)

        exact = 1.0 / np.linalg.cond(K, 1)
        assert exact * (1.0 - 1e-12) <= rcond <= 3.0 * exact
        np.testing.assert_allclose(scipy.linalg.lu_solve(factors, np.eye(2)) @ K, np.eye(2), atol=1e-14)

    @pytest.mark.filterwarnings("ignore::scipy.linalg.LinAlgWarning")
    def test_rcond_of_singular_matrix(self) -> None:
        K = np.array([[1.0, 2.0], [2.0, 4.0]], dtype=np.complex128)

        _, rcond = _lu_with_rcond(K)

        assert rcond < 1e-14


class TestNeumann:
    """Tests for the partial sums f_{N,r}."""

    def test_nilpotent_series_is_exact(self, swap_colligation: Colligation, disc: MatrixPolyQ) -> None:
        z = random_tuple(3, 1, scale=0.8, seed=1)

        np.testing.assert_allclose(eval_neumann(swap_colligation, disc, z, 0), eval_closed(swap_colligation, disc, z))

    def test_zero_point_gives_constant(self, disc: MatrixPolyQ) -> None:
        col = random_colligation(1, 1, 2, seed=2)
        z = MatrixTuple.from_matrices([np.zeros((3, 3))])

        for N, r in [(0, 1.0), (4, 0.5)]:
            np.testing.assert_allclose(eval_neumann(col, disc, z, N, r), col.d_value * np.eye(3))

    def test_converges_to_closed_form(self, row_ball: MatrixPolyQ) -> None:
        col = random_colligation(1, 2, 2, seed=6)
        z = random_domain_point(row_ball, 2, seed=7, margin=0.2)
        N = default_N(neumann_ratio(col, row_ball, z), 1e-13)

        gap = spectral_norm(eval_neumann(col, row_ball, z, N) - eval_closed(col, row_ball, z))

        assert gap <= 1e-10
        assert gap <= tail_bound_at(col, row_ball, z, N) + 1e-15

    def test_rejects_bad_order(self, swap_colligation: Colligation, disc: MatrixPolyQ) -> None:
        z = random_tuple(1, 1, scale=0.5, seed=0)
        with pytest.raises(InvalidParameterError):
            eval_neumann(swap_colligation, disc, z, -1)
        with pytest.raises(InvalidParameterError):
            eval_neumann(swap_colligation, disc, z, 1, r=1.5)


class TestSynthesize:
    """Tests for symbolic f_{N,r}."""

    def test_swap_gives_x1(self, swap_colligation: Colligation, disc: MatrixPolyQ) -> None:
        p = synthesize(swap_colligation, disc, 3)

        assert dict(p.terms) == {(1,): pytest.approx(1.0)}

    def test_scalar_expansion(self, hadamard_colligation: Colligation, disc: MatrixPolyQ) -> None:
        """Test dd + cb r x1 + cab r^2 x1^2 for N = 1."""
        a = b = c = SQRT_HALF
        r = 0.5

        p = synthesize(hadamard_colligation, disc, 1, r)

        assert p.coefficient(()) == pytest.approx(-SQRT_HALF)
        assert p.coefficient((1,)) == pytest.approx(c * b * r)
        assert p.coefficient((1, 1)) == pytest.approx(c * a * b * r**2)
        assert p.degree == 2

    def test_agrees_with_numeric_series(self, row_ball: MatrixPolyQ) -> None:
        col = random_colligation(1, 2, 2, seed=11)
        p = synthesize(col, row_ball, 3)
        rng = np.random.default_rng(12)

        for i in range(20):
            z = random_domain_point(row_ball, 1 + i % 3, rng, margin=0.0)
            gap = spectral_norm(eval_poly(p, z) - eval_neumann(col, row_ball, z, 3))
            assert gap <= 1e-10

    def test_word_order_with_noncommuting_q(self) -> None:
        """Test a degree-2 Q entry whose letters do not commute."""
        Q = parse_Q("x1*x2", 2)
        col = random_colligation(1, 1, 2, seed=13)
        z = random_domain_point(Q, 3, seed=14, margin=0.1)
        p = synthesize(col, Q, 2, 0.9)

        np.testing.assert_allclose(eval_poly(p, z), eval_neumann(col, Q, z, 2, 0.9), atol=1e-11)

    def test_degree_cap(self, row_ball: MatrixPolyQ) -> None:
        col = random_colligation(1, 2, 1, seed=0)

        with pytest.raises(SizeCapError):
            synthesize(col, row_ball, 10)


class TestBounds:
    """Tests for the certified tail bound and N0."""

    def test_tail_bound_formula(self, swap_colligation: Colligation) -> None:
        assert certified_tail_bound(swap_colligation, 0.5, 0) == pytest.approx(0.5)

    def test_tail_bound_decreases(self, swap_colligation: Colligation) -> None:
        bounds = [certified_tail_bound(swap_colligation, 0.9, N) for N in range(0, 40, 5)]

        assert all(b < a for a, b in zip(bounds, bounds[1:], strict=False))

    def test_constant_function(self, constant_colligation: Colligation) -> None:
        assert certified_tail_bound(constant_colligation, 0.9, 0) == 0.0
        assert find_N0(constant_colligation, 0.9) == 0

    def test_n0_at_half(self, swap_colligation: Colligation) -> None:
        assert find_N0(swap_colligation, 0.5) == 0

    def test_n0_is_minimal_and_monotone(self, swap_colligation: Colligation) -> None:
        N0s = []
        for r in (0.5, 0.9, 0.99):
            N0 = find_N0(swap_colligation, r)
            assert r * (1.0 + certified_tail_bound(swap_colligation, r, N0)) <= 1.0
            if N0 > 0:
                assert r * (1.0 + certified_tail_bound(swap_colligation, r, N0 - 1)) > 1.0
            N0s.append(N0)

        assert N0s == sorted(N0s)
        assert N0s[-1] > N0s[0]

    def test_r_one_rejected(self, swap_colligation: Colligation) -> None:
        with pytest.raises(InvalidParameterError):
            find_N0(swap_colligation, 1.0)

    def test_default_n(self) -> None:
        assert default_N(0.5, 1e-3) == 10
        assert default_N(0.0) == 0
        with pytest.raises(InvalidParameterError):
            default_N(1.0)
