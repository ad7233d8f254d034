"""End-to-end experiments that produce pass/fail reports.

"Compact set" is operationalized throughout as a finite sample of the dilation
hull of a base point, each sample certified by a verified witness. Per-point
work goes through ``_ordered_map`` so results are collected in input order
whether or not a thread pool is used.
"""

from __future__ import annotations

import contextvars
import itertools
import logging
import time
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Literal, TypeVar

import numpy as np
import scipy.linalg

from frokaweil.dilation import (
    DilationWitness,
    HullSample,
    compress_witness,
    corrupt_witness,
    direct_sum_witnesses,
    sample_hull,
    verify_dilation_structural,
    verify_dilation_words,
)
from frokaweil.domain import MatrixPolyQ, in_DQ, parse_Q, random_domain_point
from frokaweil.exceptions import DomainError, InvalidParameterError, SizeCapError
from frokaweil.mattuple import (
    ComplexMatrix,
    MatrixTuple,
    check_intertwine,
    conjugate,
    direct_sum,
    random_similarity,
    random_tuple,
    relative_defect,
    spectral_norm,
)
from frokaweil.models.report import ExperimentReport, PointRecord
from frokaweil.models.wire import ColligationModel, MatrixTupleModel
from frokaweil.ncalg import eval_poly, random_poly
from frokaweil.realization import (
    Colligation,
    ColligationMode,
    certified_tail_bound,
    default_N,
    eval_closed,
    eval_neumann,
    find_N0,
    lift,
    neumann_ratio,
    random_colligation,
    synthesize,
    tail_bound_at,
)
from frokaweil.settings import settings
from frokaweil.zariski import ideal_basis, in_zariski, interpolate, stabilization_degree

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

COMPACT_SET_NOTE = "finite sample of the dilation hull of the base point, every sample certified by a witness"
NEGATIVE_CONTROL_DEFECT = 1e-3
NEGATIVE_CONTROL_RATE = 0.9
NEAR_BOUNDARY_FRACTION = 0.9
SCHUR_SLACK = 1e-9
MONOTONE_SLACK = 1e-6
POLY_TOL = 1e-11
SIMILARITY_TOL = 1e-9
REALIZATION_TOL = 1e-9
REALIZATION_SYMBOLIC_TOL = 1e-10
CORRUPTION_EPSILONS = (1e-6, 1e-3, 1e-1)
REJECT_EPSILON = 1e-1
WITNESS_KINDS: tuple[Literal["valid", "isometry", "semi_invariance"], ...] = ("valid", "isometry", "semi_invariance")

# Q matrices cycled by the Oka-Weil suite: row ball, column ball, and a square
# diagonal Q that admits unitary colligations.
SUITE_QS: tuple[tuple[str, ColligationMode], ...] = (
    ("x1,x2", "contractive"),
    ("x1;x2", "contractive"),
    ("x1,0;0,x2", "unitary"),
)


# ── Helpers ──────────────────────────────────────────────────


def _ordered_map(fn: Callable[[T], R], items: Iterable[T], workers: int | None = None) -> list[R]:
    """map() that may run on a thread pool; results keep input order."""
    workers = settings.workers if workers is None else workers
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    # workers see the caller's run context
    parent = contextvars.copy_context()
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda item: parent.copy().run(fn, item), items))


def _seed_stream(seed: int, count: int) -> list[int]:
    """Independent child seeds, one per work item."""
    return [int(child.generate_state(1)[0]) for child in np.random.SeedSequence(seed).spawn(count)]


def _nonincreasing(values: Sequence[float], floor: float) -> bool:
    slack = floor * 1e-3
    return all(b <= a * (1.0 + MONOTONE_SLACK) + slack for a, b in itertools.pairwise(values))


def _col_digest(col: Colligation) -> str:
    return ColligationModel.from_domain(col).digest()


def _point_digest(x: MatrixTuple) -> str:
    return MatrixTupleModel.from_domain(x).digest()


def _approximants(
    col: Colligation,
    Q: MatrixPolyQ,
    points: Sequence[MatrixTuple],
    N: int,
    r: float,
) -> tuple[list[ComplexMatrix], str]:
    """f_{N,r} at every point, symbolically when the degree cap allows it."""
    try:
        poly = synthesize(col, Q, N, r)
    except SizeCapError:
        return _ordered_map(lambda z: eval_neumann(col, Q, z, N, r), points), "numeric"
    return _ordered_map(lambda z: eval_poly(poly, z), points), "symbolic"


def _finish(name: str, start: float, report: ExperimentReport) -> ExperimentReport:
    report.wall_time = time.perf_counter() - start
    verdict = "PASS" if report.passed else "FAIL"
    logger.info(f"{name}: {verdict} in {report.wall_time:.2f}s")
    return report


# ── Refined Oka-Weil ─────────────────────────────────────────


def okaweil_exact(
    col: Colligation,
    Q: MatrixPolyQ,
    lam: MatrixTuple,
    hull_count: int = 50,
    tol: float | None = None,
    seed: int = 0,
    margin: float | None = None,
) -> ExperimentReport:
    """One interpolating polynomial at lambda must agree with f on the sampled hull."""
    start = time.perf_counter()
    tol = settings.exact_tol if tol is None else tol
    margin = settings.domain_margin if margin is None else margin
    base = in_DQ(Q, lam, margin)
    if not base.member:
        raise DomainError(f"base point is not inside D_Q with margin {margin}", base.norm)
    rng = np.random.default_rng(seed)

    D_star = stabilization_degree(lam)
    f_lam = eval_closed(col, Q, lam)
    interp = interpolate(f_lam, lam, D_star)
    p = interp.poly
    residual_ok = interp.residual <= tol * (1.0 + spectral_norm(f_lam))

    samples = sample_hull(lam, hull_count, rng)
    kept = [sample for sample in samples if in_DQ(Q, sample.point).member]
    discarded = len(samples) - len(kept)
    near_boundary = discarded > NEAR_BOUNDARY_FRACTION * len(samples)
    if near_boundary:
        logger.warning(f"base point is near the boundary: {discarded} samples discarded")
    elif discarded:
        logger.warning(f"discarded {discarded} hull samples outside D_Q")

    def measure(item: tuple[int, HullSample]) -> tuple[PointRecord, float]:
        idx, sample = item
        y = sample.point
        fy = eval_closed(col, Q, y)
        py = eval_poly(p, y)
        defect = spectral_norm(fy - py)
        f_norm = spectral_norm(fy)
        p_norm = spectral_norm(py)
        record = PointRecord(
            point_id=idx,
            level=y.level,
            defect=defect,
            norm=f_norm,
            passed=defect <= tol * (1.0 + f_norm),
            extra={
                "strategy": sample.strategy,
                "k": sample.witness.k,
                "structural_defect": sample.structural_defect,
                "interpolant_norm": p_norm,
            },
        )
        return record, p_norm

    measured = _ordered_map(measure, list(enumerate(kept)))
    records = [record for record, _ in measured]

    z = random_domain_point(Q, lam.level, rng, margin)
    control_defect = spectral_norm(eval_closed(col, Q, z) - eval_poly(p, z))

    if not records:
        logger.warning(f"no hull samples inside D_Q")
    interpolant_sup = max([spectral_norm(eval_poly(p, lam))] + [p_norm for _, p_norm in measured])
    passed = residual_ok and bool(records) and all(rec.passed for rec in records)
    summary = {
        "compact_set": COMPACT_SET_NOTE,
        "base_norm": base.norm,
        "D_star": D_star,
        "interpolant": str(p),
        "interpolant_degree": p.degree,
        "interpolation_residual": interp.residual,
        "residual_ok": residual_ok,
        "samples": len(samples),
        "samples_used": len(kept),
        "discarded": discarded,
        "near_boundary": near_boundary,
        "max_defect": max((rec.defect for rec in records), default=0.0),
        "interpolant_sup_estimate": interpolant_sup,
        "negative_control_defect": control_defect,
        "negative_control_detected": control_defect > NEGATIVE_CONTROL_DEFECT,
    }
    inputs = {
        "experiment": "okaweil",
        "seed": seed,
        "hull_count": hull_count,
        "tol": tol,
        "margin": margin,
        "Q": str(Q),
        "colligation": _col_digest(col),
        "base": _point_digest(lam),
    }
    report = ExperimentReport.create("okaweil", inputs, records, summary, passed)
    return _finish("okaweil", start, report)


def okaweil_suite(
    configs: int = 10,
    hull_count: int = 50,
    seed: int = 0,
    tol: float | None = None,
    level: int = 2,
    m: int = 2,
    cross_check: bool = False,
) -> ExperimentReport:
    """okaweil_exact over random (colligation, Q, lambda) configurations."""
    start = time.perf_counter()
    tol = settings.exact_tol if tol is None else tol

    def run(item: tuple[int, int]) -> PointRecord:
        idx, child = item
        rng = np.random.default_rng(child)
        q_text, mode = SUITE_QS[idx % len(SUITE_QS)]
        Q = parse_Q(q_text, 2)
        col = random_colligation(Q.s, Q.r, m, rng, mode)
        lam = random_domain_point(Q, level, rng)
        sub = okaweil_exact(col, Q, lam, hull_count, tol, seed=child)
        extra: dict[str, Any] = {
            "q": q_text,
            "mode": mode,
            "D_star": sub.summary["D_star"],
            "interpolation_residual": sub.summary["interpolation_residual"],
            "near_boundary": sub.summary["near_boundary"],
            "negative_control_detected": sub.summary["negative_control_detected"],
        }
        passed = sub.passed
        if cross_check and sub.passed:
            conv = uniform_convergence_table(col, Q, lam, hull_count=min(hull_count, 10), seed=child)
            extra["cross_check"] = conv.passed
            passed = passed and conv.passed
        return PointRecord(
            point_id=idx,
            level=lam.level,
            defect=sub.max_defect,
            norm=float(sub.summary["negative_control_defect"]),
            passed=passed,
            extra=extra,
        )

    records = _ordered_map(run, list(enumerate(_seed_stream(seed, configs))))
    detected = sum(1 for rec in records if rec.extra["negative_control_detected"])
    rate = detected / configs
    passed = all(rec.passed for rec in records) and rate >= NEGATIVE_CONTROL_RATE
    summary = {
        "compact_set": COMPACT_SET_NOTE,
        "configs_passed": sum(1 for rec in records if rec.passed),
        "negative_controls_detected": detected,
        "negative_control_rate": rate,
        "max_defect": max((rec.defect for rec in records), default=0.0),
    }
    inputs = {
        "experiment": "okaweil_suite",
        "seed": seed,
        "configs": configs,
        "hull_count": hull_count,
        "tol": tol,
        "level": level,
        "m": m,
        "cross_check": cross_check,
    }
    report = ExperimentReport.create("okaweil_suite", inputs, records, summary, passed)
    return _finish("okaweil_suite", start, report)


# ── Classical Oka-Weil ───────────────────────────────────────


def default_N_list(floor: float | None = None) -> list[int]:
    """Doubling orders up to the order where 0.95^N falls below the floor."""
    floor = settings.approx_floor if floor is None else floor
    final = default_N(0.95, floor)
    return sorted({0, 1, 2, 3, 4, *(2**j for j in range(3, 9) if 2**j < final), final})


def uniform_convergence_table(
    col: Colligation,
    Q: MatrixPolyQ,
    lam: MatrixTuple,
    hull_count: int = 20,
    N_list: Sequence[int] | None = None,
    r: float = 1.0,
    seed: int = 0,
    floor: float | None = None,
) -> ExperimentReport:
    """sup over hull samples of ||f - p_N|| for each N."""
    start = time.perf_counter()
    floor = settings.approx_floor if floor is None else floor
    orders = sorted(set(N_list)) if N_list else default_N_list(floor)
    samples = sample_hull(lam, hull_count, np.random.default_rng(seed))
    points = [lam] + [sample.point for sample in samples if in_DQ(Q, sample.point).member]
    f_values = _ordered_map(lambda z: eval_closed(col, Q, z), points)
    rho_max = max(neumann_ratio(col, Q, z) for z in points)

    table: list[dict[str, Any]] = []
    errors: list[float] = []
    last_gaps: list[float] = []
    for N in orders:
        approx, path = _approximants(col, Q, points, N, r)
        gaps = [spectral_norm(f - a) for f, a in zip(f_values, approx, strict=True)]
        error = max(gaps)
        bound = max(tail_bound_at(col, Q, z, N) for z in points) if r == 1.0 else None
        table.append({"N": N, "error": error, "tail_bound": bound, "path": path})
        errors.append(error)
        last_gaps = gaps
        logger.debug(f"N={N}: sup error {error:.3e} ({path})")

    ratios = []
    for (n_a, a), (n_b, b) in itertools.pairwise(zip(orders, errors, strict=True)):
        if a > floor and b > 0.0:
            ratios.append((b / a) ** (1.0 / (n_b - n_a)))
    monotone = _nonincreasing(errors, floor)
    final_ok = errors[-1] <= floor
    records = [
        PointRecord(
            point_id=idx,
            level=z.level,
            defect=gap,
            norm=spectral_norm(f),
            passed=gap <= floor,
            extra={"rho": neumann_ratio(col, Q, z)},
        )
        for idx, (z, f, gap) in enumerate(zip(points, f_values, last_gaps, strict=True))
    ]
    summary = {
        "compact_set": COMPACT_SET_NOTE,
        "points": len(points),
        "monotone": monotone,
        "final_error": errors[-1],
        "final_ok": final_ok,
        "rho_max": rho_max,
        "geometric_ratio_estimate": max(ratios) if ratios else None,
    }
    inputs = {
        "experiment": "converge",
        "seed": seed,
        "hull_count": hull_count,
        "N_list": orders,
        "r": r,
        "floor": floor,
        "Q": str(Q),
        "colligation": _col_digest(col),
        "base": _point_digest(lam),
    }
    report = ExperimentReport.create("converge", inputs, records, summary, monotone and final_ok, table=table)
    return _finish("converge", start, report)


# ── Realization consistency ──────────────────────────────────


def _root_rate(error: float, constant: float, N: int) -> float:
    """(e_N / K)^(1/(N+1)); the tail bound e_N <= K rho^(N+1) caps it at rho."""
    return float((error / constant) ** (1.0 / (N + 1)))


def realization_consistency(
    col: Colligation,
    Q: MatrixPolyQ,
    points: int = 50,
    max_order: int = 12,
    synth_order: int = 4,
    seed: int = 0,
    floor: float | None = None,
) -> ExperimentReport:
    """Closed form against the Neumann series, and the symbolic series against the numeric one.

    At each random point of D_Q the errors e_N = ||f_N - f|| must stay under the
    pointwise tail bound K rho^(N+1), K = ||C|| ||B|| ||Q^(z)|| / (1 - rho), and the
    measured rate max_N (e_N / K)^(1/(N+1)) must not exceed rho = ||Q^(z) A^||.
    Rates are taken only where e_N is above the floor. Consecutive ratios
    e_(N+1) / e_N are reported but not checked; single steps can exceed rho.
    """
    start = time.perf_counter()
    if points < 1 or max_order < 0:
        raise InvalidParameterError(f"need points >= 1 and max_order >= 0, got {points} and {max_order}")
    floor = settings.approx_floor if floor is None else floor
    cap_order = settings.degree_cap // Q.degree - 1 if Q.degree else synth_order
    orders = list(range(min(synth_order, cap_order, max_order) + 1))
    polys = {N: synthesize(col, Q, N) for N in orders}
    c_norm, b_norm = spectral_norm(col.C), spectral_norm(col.B)

    def trial(item: tuple[int, int]) -> tuple[PointRecord, float, float | None]:
        idx, child = item
        z = random_domain_point(Q, 1 + idx % 4, np.random.default_rng(child))
        f = eval_closed(col, Q, z)
        L = lift(col, Q, z)
        rho = spectral_norm(L.Q @ L.A)
        constant = c_norm * b_norm * spectral_norm(L.Q) / (1.0 - rho)
        partial = [eval_neumann(col, Q, z, N) for N in range(max_order + 1)]
        errors = [spectral_norm(f_N - f) for f_N in partial]
        roundoff = POLY_TOL * (1.0 + spectral_norm(f))

        tail_ok = all(
            e <= tail_bound_at(col, Q, z, N) * (1.0 + MONOTONE_SLACK) + roundoff for N, e in enumerate(errors)
        )
        above = [(N, e) for N, e in enumerate(errors) if e > floor]
        rate = max((_root_rate(e, constant, N) for N, e in above), default=0.0)
        rate_ok = rate <= rho * (1.0 + MONOTONE_SLACK)
        steps = [b / a for (n_a, a), (n_b, b) in itertools.pairwise(above) if n_b == n_a + 1]
        window = (above[-1][1] / above[0][1]) ** (1.0 / (above[-1][0] - above[0][0])) if len(above) > 1 else None
        symbolic_gap = max((spectral_norm(eval_poly(polys[N], z) - partial[N]) for N in orders), default=0.0)
        step = max(steps) if steps else None

        record = PointRecord(
            point_id=idx,
            level=z.level,
            defect=symbolic_gap,
            norm=spectral_norm(f),
            passed=tail_ok and rate_ok and symbolic_gap <= REALIZATION_SYMBOLIC_TOL,
            extra={
                "rho": rho,
                "measured_rate": rate,
                "rate_ok": rate_ok,
                "tail_ok": tail_ok,
                "max_step_ratio": step,
                "window_ratio": window,
                "final_error": errors[-1],
                "symbolic_gap": symbolic_gap,
            },
        )
        if rho == 0.0:
            return record, 0.0, None
        return record, rate / rho, None if step is None else step / rho

    results = _ordered_map(trial, list(enumerate(_seed_stream(seed, points))))
    records = [rec for rec, _, _ in results]
    rates = [rate for _, rate, _ in results]
    step_ratios = [step for _, _, step in results if step is not None]
    summary = {
        "points": points,
        "synth_orders": orders,
        "max_rate_over_rho": max(rates, default=0.0),
        "max_step_ratio_over_rho": max(step_ratios, default=None),
        "tail_violations": sum(1 for rec in records if not rec.extra["tail_ok"]),
        "rate_violations": sum(1 for rec in records if not rec.extra["rate_ok"]),
        "max_symbolic_gap": max(rec.defect for rec in records),
    }
    inputs = {
        "experiment": "consistency",
        "seed": seed,
        "points": points,
        "max_order": max_order,
        "synth_order": synth_order,
        "floor": floor,
        "Q": str(Q),
        "colligation": _col_digest(col),
    }
    passed = all(rec.passed for rec in records)
    report = ExperimentReport.create("consistency", inputs, records, summary, passed)
    return _finish("consistency", start, report)


# ── Scaled approximants ──────────────────────────────────────


def scaled_norm_experiment(
    col: Colligation,
    Q: MatrixPolyQ,
    r_list: Sequence[float] = (0.5, 0.9, 0.99),
    sample_count: int = 200,
    seed: int = 0,
) -> ExperimentReport:
    """N0(r) and the sampled sup of ||r f_{N0,r}|| over D_Q for each r."""
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    points = [random_domain_point(Q, 1 + idx % 4, rng, margin=0.0) for idx in range(sample_count)]
    anchor = points[0]
    f_anchor = eval_closed(col, Q, anchor)

    records: list[PointRecord] = []
    table: list[dict[str, Any]] = []
    for idx, r in enumerate(sorted(r_list)):
        N0 = find_N0(col, r)
        bound = certified_tail_bound(col, r, N0)
        certified = r * (1.0 + bound) <= 1.0
        values, path = _approximants(col, Q, points, N0, r)
        sup = max(spectral_norm(r * v) for v in values)
        error = spectral_norm(f_anchor - r * values[0])
        records.append(
            PointRecord(
                point_id=idx,
                level=anchor.level,
                defect=error,
                norm=sup,
                passed=certified and sup <= 1.0 + SCHUR_SLACK,
                extra={"r": r, "N0": N0, "tail_bound": bound, "path": path},
            )
        )
        table.append({"r": r, "N0": N0, "tail_bound": bound, "sup_norm": sup, "anchor_error": error, "path": path})
        logger.debug(f"r={r}: N0={N0}, sampled sup {sup:.6f}")

    N0s = [int(row["N0"]) for row in table]
    N0_monotone = all(a <= b for a, b in itertools.pairwise(N0s))
    error_monotone = _nonincreasing([rec.defect for rec in records], settings.approx_floor)
    passed = all(rec.passed for rec in records) and N0_monotone and error_monotone
    summary = {
        "points": len(points),
        "N0_monotone": N0_monotone,
        "error_monotone": error_monotone,
        "max_sup_norm": max(rec.norm for rec in records),
    }
    inputs = {
        "experiment": "scaled",
        "seed": seed,
        "r_list": sorted(r_list),
        "sample_count": sample_count,
        "Q": str(Q),
        "colligation": _col_digest(col),
    }
    report = ExperimentReport.create("scaled", inputs, records, summary, passed, table=table)
    return _finish("scaled", start, report)


# ── nc axioms ────────────────────────────────────────────────


def _entrywise_conjugate(z: MatrixTuple) -> ComplexMatrix:
    """Graded and additive over direct sums, but not similarity-equivariant."""
    return np.conj(z.mats[0])


def _axiom_defects(
    f: Callable[[MatrixTuple], ComplexMatrix],
    x: MatrixTuple,
    b: MatrixTuple,
    S: ComplexMatrix,
) -> dict[str, float]:
    fx, fb = f(x), f(b)
    graded = 0.0 if fx.shape == (x.level, x.level) else float("inf")
    sums = relative_defect(f(direct_sum(x, b)), scipy.linalg.block_diag(fx, fb))

    y = conjugate(x, S)
    expected = scipy.linalg.solve(S.T, (S @ fx).T).T
    similarity = relative_defect(f(y), expected)

    # alpha = [S; 0] intertwines x with y + b
    alpha = np.vstack([S, np.zeros((b.level, x.level))])
    target = direct_sum(y, b)
    intertwining = relative_defect(alpha @ fx, f(target) @ alpha)
    return {"graded": graded, "direct_sum": sums, "similarity": similarity, "intertwining": intertwining}


def _shrink_into_domain(
    Q: MatrixPolyQ,
    x: MatrixTuple,
    b: MatrixTuple,
    S: ComplexMatrix,
    margin: float,
) -> tuple[MatrixTuple, MatrixTuple]:
    """Halve x and b until x, b and S x S^-1 all sit in D_Q with the margin."""
    for _ in range(60):
        if all(in_DQ(Q, z, margin).member for z in (x, b, conjugate(x, S))):
            return x, b
        x, b = x.scaled(0.5), b.scaled(0.5)
    raise DomainError("could not shrink the trial points into D_Q", in_DQ(Q, conjugate(x, S)).norm)


def nc_axiom_suite(seed: int = 0, trials: int = 100, d: int = 2) -> ExperimentReport:
    """Randomized checks of gradedness, direct sums, similarities and intertwinings."""
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    Q = parse_Q("x1,x2", d) if d >= 2 else parse_Q("x1", d)
    col = random_colligation(Q.s, Q.r, 2, rng)
    margin = settings.domain_margin

    def trial(item: tuple[int, int]) -> tuple[PointRecord, PointRecord, float]:
        t, child = item
        trng = np.random.default_rng(child)
        n = 1 + t % 4
        p = random_poly(d, 3, trng)
        x = random_tuple(n, d, 1.0, trng)
        b = random_tuple(int(trng.integers(1, 5)), d, 1.0, trng)
        cond = float(trng.uniform(1.0, 100.0))
        S = random_similarity(n, cond, trng)

        poly = _axiom_defects(lambda z: eval_poly(p, z), x, b, S)
        xr, br = _shrink_into_domain(Q, x, b, S, margin)
        real = _axiom_defects(lambda z: eval_closed(col, Q, z), xr, br, S)
        control = _axiom_defects(_entrywise_conjugate, x, b, S)

        poly_ok = (
            poly["graded"] == 0.0
            and poly["direct_sum"] <= POLY_TOL
            and poly["similarity"] <= SIMILARITY_TOL
            and poly["intertwining"] <= SIMILARITY_TOL
        )
        real_ok = real["graded"] == 0.0 and max(real.values()) <= REALIZATION_TOL
        records = (
            PointRecord(
                point_id=2 * t,
                level=n,
                defect=max(poly.values()),
                norm=spectral_norm(eval_poly(p, x)),
                passed=poly_ok,
                extra={"family": "polynomial", "cond": cond, **poly},
            ),
            PointRecord(
                point_id=2 * t + 1,
                level=n,
                defect=max(real.values()),
                norm=spectral_norm(eval_closed(col, Q, xr)),
                passed=real_ok,
                extra={"family": "realization", "cond": cond, **real},
            ),
        )
        return records[0], records[1], max(control["similarity"], control["intertwining"])

    results = _ordered_map(trial, list(enumerate(_seed_stream(seed, trials))))
    records = [rec for poly_rec, real_rec, _ in results for rec in (poly_rec, real_rec)]
    control_defect = max(defect for _, _, defect in results)
    control_detected = control_defect > SIMILARITY_TOL
    passed = all(rec.passed for rec in records) and control_detected
    summary = {
        "trials": trials,
        "polynomial_failures": sum(1 for rec in records if rec.extra["family"] == "polynomial" and not rec.passed),
        "realization_failures": sum(1 for rec in records if rec.extra["family"] == "realization" and not rec.passed),
        "negative_control_defect": control_defect,
        "negative_control_detected": control_detected,
        "thresholds": {"polynomial": POLY_TOL, "similarity": SIMILARITY_TOL, "realization": REALIZATION_TOL},
    }
    inputs = {"experiment": "axioms", "seed": seed, "trials": trials, "d": d}
    report = ExperimentReport.create("axioms", inputs, records, summary, passed)
    return _finish("axioms", start, report)


# ── Intertwinings through hulls ──────────────────────────────


def intertwining_via_hull(
    col: Colligation,
    Q: MatrixPolyQ,
    seed: int = 0,
    trials: int = 5,
    tol: float | None = None,
    level: int = 1,
) -> ExperimentReport:
    """For alpha x = y alpha, one polynomial interpolating f at x + y also matches f at x and y."""
    start = time.perf_counter()
    tol = settings.exact_tol if tol is None else tol
    margin = settings.domain_margin

    def trial(item: tuple[int, int]) -> PointRecord:
        t, child = item
        rng = np.random.default_rng(child)
        x = random_domain_point(Q, level, rng, margin)
        b = random_domain_point(Q, level, rng, margin)
        S = random_similarity(level, float(rng.uniform(1.0, 10.0)), rng)
        x, b = _shrink_into_domain(Q, x, b, S, margin)
        y = direct_sum(conjugate(x, S), b)
        alpha = np.vstack([S, np.zeros((b.level, level))])
        intertwines = check_intertwine(x, y, alpha)

        z = direct_sum(x, y)
        f_z = eval_closed(col, Q, z)
        interp = interpolate(f_z, z, stabilization_degree(z))
        w_x, w_y = direct_sum_witnesses(x, y)
        certified = all(verify_dilation_structural(pt, z, w).ok for pt, w in ((x, w_x), (y, w_y)))

        fx, fy = eval_closed(col, Q, x), eval_closed(col, Q, y)
        defect_x = spectral_norm(fx - eval_poly(interp.poly, x)) / (1.0 + spectral_norm(fx))
        defect_y = spectral_norm(fy - eval_poly(interp.poly, y)) / (1.0 + spectral_norm(fy))
        defect_alpha = spectral_norm(alpha @ fx - fy @ alpha) / (1.0 + spectral_norm(alpha) * spectral_norm(fx))
        residual_ok = interp.residual <= tol * (1.0 + spectral_norm(f_z))
        worst = max(defect_x, defect_y, defect_alpha)
        return PointRecord(
            point_id=t,
            level=z.level,
            defect=worst,
            norm=spectral_norm(f_z),
            passed=intertwines.ok and certified and residual_ok and worst <= tol,
            extra={
                "intertwine_defect": intertwines.defect,
                "defect_x": defect_x,
                "defect_y": defect_y,
                "defect_alpha": defect_alpha,
                "residual": interp.residual,
                "certified": certified,
            },
        )

    records = _ordered_map(trial, list(enumerate(_seed_stream(seed, trials))))
    passed = all(rec.passed for rec in records)
    summary = {"trials": trials, "max_defect": max(rec.defect for rec in records)}
    inputs = {
        "experiment": "intertwine",
        "seed": seed,
        "trials": trials,
        "tol": tol,
        "level": level,
        "Q": str(Q),
        "colligation": _col_digest(col),
    }
    report = ExperimentReport.create("intertwine", inputs, records, summary, passed)
    return _finish("intertwine", start, report)


# ── Dilation machinery ───────────────────────────────────────


def _expects_rejection(kind: str, eps: float, x: MatrixTuple, witness: DilationWitness) -> bool:
    # A generic base of level >= 2 generates all of M_n, so its semi-invariant
    # subspaces are W kron C^n and a perturbed proper subspace leaves that family.
    if kind == "isometry":
        return True
    return kind == "semi_invariance" and eps >= REJECT_EPSILON and x.level >= 2 and witness.V.shape[0] > witness.level


def dilation_agreement(
    seed: int = 0,
    witnesses: int = 200,
    D: int = 6,
    tol: float = 1e-9,
    d: int = 2,
) -> ExperimentReport:
    """Structural and word-based verification must agree on valid and corrupted witnesses.

    Every valid sample must also pass structural verification and lie in the
    truncated Zariski closure of its base. Isometry corruptions fail the shared
    V*V = I pre-check in both verifiers, so they are counted as negative controls
    and kept out of the comparison. Semi-invariance corruptions at eps >= 1e-1 of a
    proper subspace over a level >= 2 base must be rejected by both checks; smaller
    ones are near misses that only need one verdict.
    """
    start = time.perf_counter()

    def trial(item: tuple[int, int]) -> PointRecord:
        i, child = item
        rng = np.random.default_rng(child)
        x = random_tuple(1 + i % 2, d, 1.0, rng)
        sample = sample_hull(x, 1, rng, tol=tol)[0]
        kind = WITNESS_KINDS[i % len(WITNESS_KINDS)]
        eps = CORRUPTION_EPSILONS[(i // 3) % len(CORRUPTION_EPSILONS)]
        witness: DilationWitness = sample.witness
        y = sample.point
        if kind != "valid":
            witness = corrupt_witness(sample.witness, eps, kind, rng)
            if kind == "semi_invariance":
                y = compress_witness(x, witness)

        structural = verify_dilation_structural(y, x, witness, tol)
        words_low = verify_dilation_words(y, x, witness, D - 1, tol)
        words = verify_dilation_words(y, x, witness, D, tol)
        stable = words_low.ok == words.ok
        agree = structural.ok == words.ok
        must_reject = kind != "valid" and _expects_rejection(kind, eps, x, witness)
        rejected = not structural.ok and not words.ok

        extra: dict[str, Any] = {
            "kind": kind,
            "eps": eps if kind != "valid" else 0.0,
            "strategy": sample.strategy,
            "structural_ok": structural.ok,
            "words_ok": words.ok,
            "stable": stable,
            "worst_word": str(words.worst_word),
            "must_reject": must_reject,
        }
        hull_ok = True
        if kind == "valid":
            D_star = stabilization_degree(x)
            zariski = in_zariski(x, y, D_star, 1e-8, basis=ideal_basis(x, D_star))
            extra["zariski_defect"] = zariski.max_defect
            hull_ok = structural.ok and zariski.member
            extra["hull_ok"] = hull_ok
        return PointRecord(
            point_id=i,
            level=y.level,
            defect=structural.score,
            norm=words.defect,
            passed=(agree or not stable) and hull_ok and (rejected or not must_reject),
            extra=extra,
        )

    records = _ordered_map(trial, list(enumerate(_seed_stream(seed, witnesses))))
    compared = [rec for rec in records if rec.extra["kind"] != "isometry"]
    stable_records = [rec for rec in compared if rec.extra["stable"]]
    disagreements = sum(1 for rec in stable_records if rec.extra["structural_ok"] != rec.extra["words_ok"])
    hull_failures = sum(1 for rec in records if rec.extra.get("hull_ok") is False)
    controls = [rec for rec in records if rec.extra["must_reject"]]
    missed = sum(1 for rec in controls if rec.extra["structural_ok"] or rec.extra["words_ok"])
    isometry_controls = sum(1 for rec in records if rec.extra["kind"] == "isometry")
    passed = disagreements == 0 and hull_failures == 0 and missed == 0 and len(controls) > 0
    summary = {
        "witnesses": witnesses,
        "compared": len(compared),
        "stable_cases": len(stable_records),
        "disagreements": disagreements,
        "hull_failures": hull_failures,
        "isometry_controls": isometry_controls,
        "semi_invariance_controls": len(controls) - isometry_controls,
        "missed_rejections": missed,
        "near_miss_rejections": sum(
            1
            for rec in compared
            if rec.extra["kind"] == "semi_invariance" and not rec.extra["must_reject"] and not rec.extra["words_ok"]
        ),
    }
    inputs = {"experiment": "dilate", "seed": seed, "witnesses": witnesses, "D": D, "tol": tol, "d": d}
    report = ExperimentReport.create("dilate", inputs, records, summary, passed)
    return _finish("dilate", start, report)
