"""frokaweil command line.

Every subcommand builds an ExperimentReport, writes it to --out (or stdout) as
JSON or CSV, prints a summary panel to stderr and exits 0 on pass, 1 on
experiment failure and 2 on bad input.
"""

from __future__ import annotations

import logging
import sys
from collections.abc import Callable
from pathlib import Path
from typing import Annotated, Any, NoReturn

import numpy as np
import typer
from pydantic import TypeAdapter, ValidationError
from rich import box
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from frokaweil.dilation import sample_hull
from frokaweil.domain import MatrixPolyQ, in_DQ, parse_Q, random_domain_point
from frokaweil.exceptions import DomainError, FrokaweilError, InputError, InvalidParameterError, SizeCapError
from frokaweil.experiments import (
    dilation_agreement,
    intertwining_via_hull,
    nc_axiom_suite,
    okaweil_exact,
    okaweil_suite,
    realization_consistency,
    scaled_norm_experiment,
    uniform_convergence_table,
)
from frokaweil.logging import configure_logging, run_context
from frokaweil.mattuple import MatrixTuple, random_tuple, spectral_norm
from frokaweil.models.config import RunConfig
from frokaweil.models.report import ExperimentReport, PointRecord
from frokaweil.models.wire import (
    ColligationModel,
    HullSampleModel,
    IdealBasisExport,
    MatrixPolyQModel,
    MatrixTupleModel,
    encode_matrix,
)
from frokaweil.ncalg import eval_poly, parse_poly
from frokaweil.realization import (
    Colligation,
    default_N,
    eval_closed,
    eval_neumann,
    neumann_ratio,
    random_colligation,
    schur_sup_estimate,
    synthesize,
)
from frokaweil.settings import settings
from frokaweil.zariski import ideal_basis, stabilization_degree

# ── Brand ────────────────────────────────────────────────────

BRAND = "bright_magenta"
ACCENT = "cyan"
DIM = "dim"

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INPUT = 2

SCHUR_SLACK = 1e-9
SYNTH_TOL = 1e-10
MANIFEST_ADAPTER = TypeAdapter(list[HullSampleModel])

console = Console(stderr=True)
app = typer.Typer(add_completion=False, help="Workbench for free holomorphic functions and nc Oka-Weil checks.")

# ── Shared options ───────────────────────────────────────────

SeedOpt = Annotated[int | None, typer.Option("--seed", help="Random seed (u64).")]
OutOpt = Annotated[Path | None, typer.Option("--out", help="Write the report here instead of stdout.")]
FormatOpt = Annotated[str | None, typer.Option("--format", help="Report format: json or csv.")]
TolOpt = Annotated[float | None, typer.Option("--tol", help="Pass/fail tolerance.")]
ConfigOpt = Annotated[Path | None, typer.Option("--config", help="JSON run configuration; flags override it.")]
QOpt = Annotated[str | None, typer.Option("--q", help='Q as "x1,x2;x3,x4" (commas split entries, semicolons rows).')]
QFileOpt = Annotated[Path | None, typer.Option("--q-file", help="MatrixPolyQ JSON file.")]
DOpt = Annotated[int | None, typer.Option("--d", help="Number of noncommuting variables.")]
CollOpt = Annotated[Path | None, typer.Option("--colligation", help="Colligation JSON file.")]
MOpt = Annotated[int | None, typer.Option("--m", help="Auxiliary dimension of a random colligation.")]
ModeOpt = Annotated[str | None, typer.Option("--mode", help="Random colligation mode: unitary or contractive.")]
LevelOpt = Annotated[int | None, typer.Option("--level", help="Matrix level of random points.")]
PointOpt = Annotated[Path | None, typer.Option("--point", help="MatrixTuple JSON file.")]


# ── Helpers ──────────────────────────────────────────────────


def _input_error(exc: BaseException) -> NoReturn:
    console.print(f"  [bold red]✗[/]  {type(exc).__name__}: {exc}", highlight=False)
    raise typer.Exit(EXIT_INPUT)


def _config(config: Path | None, **flags: Any) -> RunConfig:
    try:
        base = RunConfig.from_file(config) if config else RunConfig()
        return base.merged(**flags)
    except (ValidationError, OSError) as exc:
        _input_error(exc)


def _parse_list(text: str | None, cast: Callable[[str], Any]) -> list[Any] | None:
    if text is None:
        return None
    try:
        return [cast(item) for item in text.split(",") if item.strip()]
    except ValueError as exc:
        _input_error(exc)


def _load_Q(cfg: RunConfig, q_file: Path | None) -> MatrixPolyQ:
    if q_file is not None:
        return MatrixPolyQModel.from_file(q_file).to_domain()
    return parse_Q(cfg.q, cfg.d)


def _load_colligation(cfg: RunConfig, Q: MatrixPolyQ, path: Path | None, rng: np.random.Generator) -> Colligation:
    if path is not None:
        return ColligationModel.from_file(path).to_domain()
    return random_colligation(Q.s, Q.r, cfg.m, rng, cfg.mode)


def _load_point(
    cfg: RunConfig,
    Q: MatrixPolyQ,
    path: Path | None,
    rng: np.random.Generator,
) -> MatrixTuple:
    if path is not None:
        return MatrixTupleModel.from_file(path).to_domain()
    return random_domain_point(Q, cfg.level, rng, cfg.margin)


def _summary(report: ExperimentReport) -> None:
    verdict = f"[bold {ACCENT}]PASS[/]" if report.passed else "[bold red]FAIL[/]"
    table = Table(box=box.SIMPLE, show_header=False)
    table.add_column(style=DIM)
    table.add_column()
    table.add_row("experiment", report.name)
    table.add_row("verdict", verdict)
    table.add_row("records", str(len(report.records)))
    table.add_row("max defect", f"{report.max_defect:.3e}")
    table.add_row("digest", report.digest[:16])
    table.add_row("wall time", f"{report.wall_time:.2f}s")
    console.print(Panel(table, title=f"[bold {BRAND}] frokaweil [/]", border_style=BRAND, box=box.ROUNDED))


def _execute(name: str, cfg: RunConfig, build: Callable[[], ExperimentReport]) -> NoReturn:
    """Run under the command's log context, emit, and exit with the report's verdict."""
    try:
        with run_context(name, cfg.seed):
            report = build()
    except (InputError, SizeCapError, DomainError, ValidationError, OSError) as exc:
        _input_error(exc)
    except FrokaweilError as exc:
        console.print(f"  [bold red]✗[/]  {type(exc).__name__}: {exc}", highlight=False)
        raise typer.Exit(EXIT_FAIL) from exc

    text = report.render("csv" if cfg.format == "csv" else "json")
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()
    _summary(report)
    raise typer.Exit(EXIT_PASS if report.passed else EXIT_FAIL)


# ── Commands ─────────────────────────────────────────────────


@app.callback()
def main(verbose: Annotated[bool, typer.Option("--verbose", "-v", help="Debug logging.")] = False) -> None:
    """Free polynomials, realizations, dilation hulls and nc Oka-Weil experiments."""
    configure_logging(logging.DEBUG if verbose else logging.WARNING)


@app.command("eval")
def eval_command(
    poly: Annotated[str, typer.Option("--poly", help="Polynomial in x1..xd.")],
    d: DOpt = None,
    level: LevelOpt = None,
    point: PointOpt = None,
    seed: SeedOpt = None,
    out: OutOpt = None,
    fmt: FormatOpt = None,
    config: ConfigOpt = None,
) -> None:
    """Evaluate a free polynomial at a matrix tuple."""
    cfg = _config(config, d=d, level=level, seed=seed, out=str(out) if out else None, format=fmt)

    def build() -> ExperimentReport:
        p = parse_poly(poly, cfg.d)
        if point is not None:
            z = MatrixTupleModel.from_file(point).to_domain()
        else:
            z = random_tuple(cfg.level, cfg.d, 1.0, cfg.seed)
        value = eval_poly(p, z)
        record = PointRecord(point_id=0, level=z.level, defect=0.0, norm=spectral_norm(value), passed=True)
        inputs = {
            "experiment": "eval",
            "poly": str(p),
            "d": cfg.d,
            "seed": cfg.seed,
            "point": MatrixTupleModel.from_domain(z).digest(),
        }
        summary = {"poly": str(p), "value": encode_matrix(value)}
        return ExperimentReport.create("eval", inputs, [record], summary, True)

    _execute("eval", cfg, build)


@app.command()
def realize(
    q: QOpt = None,
    q_file: QFileOpt = None,
    d: DOpt = None,
    colligation: CollOpt = None,
    m: MOpt = None,
    mode: ModeOpt = None,
    samples: Annotated[int | None, typer.Option("--samples", help="Random in-domain points.")] = None,
    export: Annotated[Path | None, typer.Option("--export", help="Write the colligation JSON here.")] = None,
    seed: SeedOpt = None,
    out: OutOpt = None,
    fmt: FormatOpt = None,
    tol: TolOpt = None,
    config: ConfigOpt = None,
) -> None:
    """Evaluate a colligation's transfer function and check the Schur-Agler bound."""
    cfg = _config(
        config,
        q=q,
        d=d,
        m=m,
        mode=mode,
        sample_count=samples,
        seed=seed,
        out=str(out) if out else None,
        format=fmt,
        tol=tol,
    )

    def build() -> ExperimentReport:
        rng = np.random.default_rng(cfg.seed)
        Q = _load_Q(cfg, q_file)
        col = _load_colligation(cfg, Q, colligation, rng)
        if export is not None:
            export.write_text(ColligationModel.from_domain(col).model_dump_json(indent=2))
        points = [random_domain_point(Q, 1 + idx % 4, rng, cfg.margin) for idx in range(cfg.sample_count)]
        records = []
        for idx, z in enumerate(points):
            f = eval_closed(col, Q, z, check_schur=False)
            N = default_N(neumann_ratio(col, Q, z))
            gap = spectral_norm(f - eval_neumann(col, Q, z, N))
            f_norm = spectral_norm(f)
            records.append(
                PointRecord(
                    point_id=idx,
                    level=z.level,
                    defect=gap,
                    norm=f_norm,
                    passed=f_norm <= 1.0 + SCHUR_SLACK and gap <= (cfg.tol or settings.exact_tol),
                    extra={"N": N},
                )
            )
        sup = schur_sup_estimate(col, Q, points)
        summary = {"schur_sup_estimate": sup, "colligation_norm": col.norm, "mode": col.mode}
        inputs = {
            "experiment": "realize",
            "seed": cfg.seed,
            "Q": str(Q),
            "colligation": ColligationModel.from_domain(col).digest(),
            "samples": cfg.sample_count,
            "tol": cfg.tol,
        }
        return ExperimentReport.create("realize", inputs, records, summary, all(rec.passed for rec in records))

    _execute("realize", cfg, build)


@app.command()
def synth(
    q: QOpt = None,
    q_file: QFileOpt = None,
    d: DOpt = None,
    colligation: CollOpt = None,
    m: MOpt = None,
    mode: ModeOpt = None,
    order: Annotated[int | None, typer.Option("--N", help="Series order.")] = None,
    r: Annotated[float | None, typer.Option("--r", help="Scaling in (0, 1].")] = None,
    seed: SeedOpt = None,
    out: OutOpt = None,
    fmt: FormatOpt = None,
    tol: TolOpt = None,
    config: ConfigOpt = None,
) -> None:
    """Synthesize f_{N,r} as a free polynomial and check it against the numeric series."""
    cfg = _config(
        config, q=q, d=d, m=m, mode=mode, N=order, r=r, seed=seed, out=str(out) if out else None, format=fmt, tol=tol
    )

    def build() -> ExperimentReport:
        rng = np.random.default_rng(cfg.seed)
        Q = _load_Q(cfg, q_file)
        col = _load_colligation(cfg, Q, colligation, rng)
        p = synthesize(col, Q, cfg.N, cfg.r)
        threshold = cfg.tol or SYNTH_TOL
        records = []
        for idx in range(20):
            z = random_domain_point(Q, 1 + idx % 3, rng, margin=0.0)
            gap = spectral_norm(eval_poly(p, z) - eval_neumann(col, Q, z, cfg.N, cfg.r))
            records.append(PointRecord(point_id=idx, level=z.level, defect=gap, norm=0.0, passed=gap <= threshold))
        summary = {"poly": str(p), "degree": p.degree, "terms": len(p)}
        inputs = {
            "experiment": "synth",
            "seed": cfg.seed,
            "Q": str(Q),
            "colligation": ColligationModel.from_domain(col).digest(),
            "N": cfg.N,
            "r": cfg.r,
            "tol": threshold,
        }
        return ExperimentReport.create("synth", inputs, records, summary, all(rec.passed for rec in records))

    _execute("synth", cfg, build)


@app.command()
def consistency(
    q: QOpt = None,
    q_file: QFileOpt = None,
    d: DOpt = None,
    colligation: CollOpt = None,
    m: MOpt = None,
    mode: ModeOpt = None,
    points: Annotated[int | None, typer.Option("--points", help="Random in-domain points.")] = None,
    max_order: Annotated[int | None, typer.Option("--max-order", help="Largest series order compared.")] = None,
    seed: SeedOpt = None,
    out: OutOpt = None,
    fmt: FormatOpt = None,
    config: ConfigOpt = None,
) -> None:
    """Tail bound and convergence rate of the series, and symbolic against numeric partial sums."""
    cfg = _config(
        config,
        q=q,
        d=d,
        m=m,
        mode=mode,
        points=points,
        max_order=max_order,
        seed=seed,
        out=str(out) if out else None,
        format=fmt,
    )

    def build() -> ExperimentReport:
        rng = np.random.default_rng(cfg.seed)
        Q = _load_Q(cfg, q_file)
        col = _load_colligation(cfg, Q, colligation, rng)
        return realization_consistency(col, Q, cfg.points, cfg.max_order, seed=cfg.seed)

    _execute("consistency", cfg, build)


@app.command()
def okaweil(
    q: QOpt = None,
    q_file: QFileOpt = None,
    d: DOpt = None,
    colligation: CollOpt = None,
    m: MOpt = None,
    mode: ModeOpt = None,
    base: Annotated[Path | None, typer.Option("--base", help="Run once at this base point (MatrixTuple JSON).")] = None,
    level: LevelOpt = None,
    configs: Annotated[int | None, typer.Option("--configs", help="Random configurations in suite mode.")] = None,
    hull_count: Annotated[int | None, typer.Option("--hull-count", help="Hull samples per base point.")] = None,
    cross_check: Annotated[bool, typer.Option("--cross-check", help="Also run the convergence table.")] = False,
    seed: SeedOpt = None,
    out: OutOpt = None,
    fmt: FormatOpt = None,
    tol: TolOpt = None,
    config: ConfigOpt = None,
) -> None:
    """Exact agreement of f with one interpolating polynomial on dilation hulls."""
    cfg = _config(
        config,
        q=q,
        d=d,
        m=m,
        mode=mode,
        level=level,
        configs=configs,
        hull_count=hull_count,
        cross_check=cross_check or None,
        seed=seed,
        out=str(out) if out else None,
        format=fmt,
        tol=tol,
    )

    def build() -> ExperimentReport:
        if base is None:
            fixed = {"--q": q, "--q-file": q_file, "--d": d, "--colligation": colligation, "--mode": mode}
            given = [name for name, value in fixed.items() if value is not None]
            if given:
                raise InvalidParameterError(f"{', '.join(given)} need --base; the suite draws its own configurations")
            return okaweil_suite(cfg.configs, cfg.hull_count, cfg.seed, cfg.tol, cfg.level, cfg.m, cfg.cross_check)
        rng = np.random.default_rng(cfg.seed)
        Q = _load_Q(cfg, q_file)
        col = _load_colligation(cfg, Q, colligation, rng)
        lam = MatrixTupleModel.from_file(base).to_domain()
        return okaweil_exact(col, Q, lam, cfg.hull_count, cfg.tol, cfg.seed, cfg.margin)

    _execute("okaweil", cfg, build)


@app.command()
def dilate(
    witnesses: Annotated[int | None, typer.Option("--witnesses", help="Valid and corrupted witnesses to test.")] = None,
    degree: Annotated[int | None, typer.Option("--word-degree", help="Word check degree.")] = None,
    manifest: Annotated[Path | None, typer.Option("--manifest", help="Write a hull-sample manifest here.")] = None,
    point: PointOpt = None,
    level: LevelOpt = None,
    d: DOpt = None,
    hull_count: Annotated[int | None, typer.Option("--hull-count", help="Samples in the manifest.")] = None,
    seed: SeedOpt = None,
    out: OutOpt = None,
    fmt: FormatOpt = None,
    tol: TolOpt = None,
    config: ConfigOpt = None,
) -> None:
    """Structural versus word-based witness verification, plus hull sampling."""
    cfg = _config(
        config,
        witnesses=witnesses,
        word_degree=degree,
        level=level,
        d=d,
        hull_count=hull_count,
        seed=seed,
        out=str(out) if out else None,
        format=fmt,
        tol=tol,
    )

    def build() -> ExperimentReport:
        if manifest is not None:
            if point is not None:
                x = MatrixTupleModel.from_file(point).to_domain()
            else:
                x = random_tuple(cfg.level, cfg.d, 1.0, cfg.seed)
            samples = sample_hull(x, cfg.hull_count, cfg.seed)
            entries = [HullSampleModel.from_domain(s) for s in samples]
            manifest.write_bytes(MANIFEST_ADAPTER.dump_json(entries, by_alias=True, indent=2))
        return dilation_agreement(cfg.seed, cfg.witnesses, cfg.word_degree, cfg.tol or 1e-9, cfg.d)

    _execute("dilate", cfg, build)


@app.command()
def zariski(
    point: PointOpt = None,
    level: LevelOpt = None,
    d: DOpt = None,
    degree: Annotated[int | None, typer.Option("--degree", help="Truncation degree; defaults to D*.")] = None,
    export: Annotated[Path | None, typer.Option("--export", help="Write the ideal basis JSON here.")] = None,
    seed: SeedOpt = None,
    out: OutOpt = None,
    fmt: FormatOpt = None,
    config: ConfigOpt = None,
) -> None:
    """Truncated ideal of a point, its stabilization degree and rank profile."""
    cfg = _config(config, level=level, d=d, degree=degree, seed=seed, out=str(out) if out else None, format=fmt)

    def build() -> ExperimentReport:
        if point is not None:
            lam = MatrixTupleModel.from_file(point).to_domain()
        else:
            lam = random_tuple(cfg.level, cfg.d, 1.0, cfg.seed)
        D_star = stabilization_degree(lam)
        D = D_star if cfg.degree is None else cfg.degree
        basis = ideal_basis(lam, D)
        exported = IdealBasisExport.from_domain(basis)
        if export is not None:
            export.write_text(exported.model_dump_json(indent=2))
        records = []
        for idx, p in enumerate(basis.polys):
            value = spectral_norm(eval_poly(p, lam))
            records.append(
                PointRecord(
                    point_id=idx,
                    level=lam.level,
                    defect=value,
                    norm=p.coefficient_norm(),
                    passed=value <= 10 * basis.rank_tol,
                    extra={"degree": p.degree},
                )
            )
        summary = {
            "D_star": D_star,
            "D": D,
            "rank": basis.rank,
            "ranks": basis.ranks,
            "basis_size": basis.dimension,
            "rank_tol": basis.rank_tol,
        }
        inputs = {"experiment": "zariski", "seed": cfg.seed, "base": exported.base_digest, "D": D}
        return ExperimentReport.create("zariski", inputs, records, summary, all(rec.passed for rec in records))

    _execute("zariski", cfg, build)


@app.command()
def axioms(
    trials: Annotated[int | None, typer.Option("--trials", help="Random trials.")] = None,
    d: DOpt = None,
    seed: SeedOpt = None,
    out: OutOpt = None,
    fmt: FormatOpt = None,
    config: ConfigOpt = None,
) -> None:
    """Randomized nc-function axioms for polynomials and realizations, with a negative control."""
    cfg = _config(config, trials=trials, d=d, seed=seed, out=str(out) if out else None, format=fmt)
    _execute("axioms", cfg, lambda: nc_axiom_suite(cfg.seed, cfg.trials, cfg.d))


@app.command()
def scaled(
    q: QOpt = None,
    q_file: QFileOpt = None,
    d: DOpt = None,
    colligation: CollOpt = None,
    m: MOpt = None,
    mode: ModeOpt = None,
    r_list: Annotated[str | None, typer.Option("--r-list", help='Scalings, e.g. "0.5,0.9,0.99".')] = None,
    samples: Annotated[int | None, typer.Option("--samples", help="Random in-domain points.")] = None,
    seed: SeedOpt = None,
    out: OutOpt = None,
    fmt: FormatOpt = None,
    config: ConfigOpt = None,
) -> None:
    """N0(r) and the uniform norm bound of the scaled approximants."""
    cfg = _config(
        config,
        q=q,
        d=d,
        m=m,
        mode=mode,
        r_list=_parse_list(r_list, float),
        sample_count=samples,
        seed=seed,
        out=str(out) if out else None,
        format=fmt,
    )

    def build() -> ExperimentReport:
        rng = np.random.default_rng(cfg.seed)
        Q = _load_Q(cfg, q_file)
        col = _load_colligation(cfg, Q, colligation, rng)
        return scaled_norm_experiment(col, Q, cfg.r_list, cfg.sample_count, cfg.seed)

    _execute("scaled", cfg, build)


@app.command()
def converge(
    q: QOpt = None,
    q_file: QFileOpt = None,
    d: DOpt = None,
    colligation: CollOpt = None,
    m: MOpt = None,
    mode: ModeOpt = None,
    base: Annotated[Path | None, typer.Option("--base", help="Base point (MatrixTuple JSON).")] = None,
    level: LevelOpt = None,
    n_list: Annotated[str | None, typer.Option("--n-list", help='Orders, e.g. "0,1,2,4,8".')] = None,
    hull_count: Annotated[int | None, typer.Option("--hull-count", help="Hull samples.")] = None,
    seed: SeedOpt = None,
    out: OutOpt = None,
    fmt: FormatOpt = None,
    tol: TolOpt = None,
    config: ConfigOpt = None,
) -> None:
    """Uniform error of the partial sums p_N over a sampled hull."""
    cfg = _config(
        config,
        q=q,
        d=d,
        m=m,
        mode=mode,
        level=level,
        N_list=_parse_list(n_list, int),
        hull_count=hull_count,
        seed=seed,
        out=str(out) if out else None,
        format=fmt,
        tol=tol,
    )

    def build() -> ExperimentReport:
        rng = np.random.default_rng(cfg.seed)
        Q = _load_Q(cfg, q_file)
        col = _load_colligation(cfg, Q, colligation, rng)
        lam = _load_point(cfg, Q, base, rng)
        check = in_DQ(Q, lam)
        if not check.member:
            raise DomainError("base point lies outside D_Q", check.norm)
        return uniform_convergence_table(col, Q, lam, cfg.hull_count, cfg.N_list, 1.0, cfg.seed, cfg.tol)

    _execute("converge", cfg, build)


@app.command()
def intertwine(
    q: QOpt = None,
    q_file: QFileOpt = None,
    d: DOpt = None,
    colligation: CollOpt = None,
    m: MOpt = None,
    mode: ModeOpt = None,
    trials: Annotated[int | None, typer.Option("--trials", help="Random trials.")] = None,
    level: LevelOpt = None,
    seed: SeedOpt = None,
    out: OutOpt = None,
    fmt: FormatOpt = None,
    tol: TolOpt = None,
    config: ConfigOpt = None,
) -> None:
    """Intertwined points share one interpolant through their direct sum's hull."""
    cfg = _config(
        config,
        q=q,
        d=d,
        m=m,
        mode=mode,
        trials=trials,
        level=level,
        seed=seed,
        out=str(out) if out else None,
        format=fmt,
        tol=tol,
    )

    def build() -> ExperimentReport:
        rng = np.random.default_rng(cfg.seed)
        Q = _load_Q(cfg, q_file)
        col = _load_colligation(cfg, Q, colligation, rng)
        return intertwining_via_hull(col, Q, cfg.seed, cfg.trials, cfg.tol, cfg.level)

    _execute("intertwine", cfg, build)


if __name__ == "__main__":
    app()
