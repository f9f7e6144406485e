"""Soliton benchmark driver: single runs, lambda sweeps, convergence studies.

Configuration files are flat ``key = value`` text.  Recognised keys are the
fields of :class:`ExperimentConfig` plus the Newton settings ``residual_tol``,
``max_iters`` and ``step_tol``; ``lambda`` is accepted for ``lam``.  Blank
lines and ``#`` comments are ignored, anything else is an error.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .conservation import ErrorReport, InvariantSeries, error_metrics, record_invariants
from .grid import GridFunction
from .scheme import (
    ConfigError,
    NewtonConfig,
    NewtonError,
    NewtonStats,
    SchemeConfig,
    SingularSystemError,
    baseline_step,
    step,
)

log = logging.getLogger(__name__)

SQRT5 = math.sqrt(5.0)
AMPLITUDE = math.sqrt(30.0)

# Published EC rows at dx=0.1, dt=0.01 on [-20, 20], t in [0, 2].
REFERENCE_ROWS = {
    0.023: {"err1": 1.69e-14, "err2": 1.41e-04, "err3": 1.24e-13, "sol_err": 0.0036},
    -0.07: {"err1": 1.78e-14, "err2": 9.50e-05, "err3": 1.88e-13, "sol_err": 0.0587},
}


def exact_solution(x, t):
    """Single soliton ``sqrt(30) sech(sqrt(5) x - 5 sqrt(5) (t - 1))``."""
    arg = SQRT5 * np.asarray(x, dtype=np.float64) - 5.0 * SQRT5 * (t - 1.0)
    # sech via exp(-|a|) avoids overflow in cosh for large |a|
    e = np.exp(-np.abs(arg))
    return AMPLITUDE * 2.0 * e / (1.0 + e * e)


class RunFailure(RuntimeError):
    """A time step failed; carries the step index and Newton diagnostics."""

    def __init__(self, step_index: int, cause: Exception):
        super().__init__(f"step {step_index} failed: {cause}")
        self.step_index = step_index
        self.cause = cause
        self.residual_norm = getattr(cause, "residual_norm", math.nan)


@dataclass(frozen=True)
class ExperimentConfig:
    scheme: str = "ec"
    lam: float = 0.0
    domain_a: float = -20.0
    domain_b: float = 20.0
    n_points: int = 400
    delta_t: float = 0.01
    t_end: float = 2.0
    record_every: int = 1
    newton: NewtonConfig = field(default_factory=NewtonConfig)
    output_path: str | None = None

    def __post_init__(self):
        if self.scheme not in ("ec", "baseline"):
            raise ConfigError(f"scheme must be 'ec' or 'baseline', got {self.scheme!r}")
        if self.n_points < 5:
            raise ConfigError("n_points must be >= 5")
        if not self.domain_b > self.domain_a:
            raise ConfigError("domain_b must exceed domain_a")
        if not self.delta_t > 0:
            raise ConfigError("delta_t must be positive")
        if self.t_end < 0:
            raise ConfigError("t_end must be non-negative")
        if self.record_every < 1:
            raise ConfigError("record_every must be >= 1")
        ratio = self.t_end / self.delta_t
        if not math.isclose(ratio, round(ratio), rel_tol=1e-12, abs_tol=1e-9):
            raise ConfigError(f"t_end/delta_t = {ratio!r} is not a whole number of steps")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.delta_t))

    @property
    def delta_x(self) -> float:
        return (self.domain_b - self.domain_a) / self.n_points

    @property
    def label(self) -> str:
        return f"EC({self.lam:g})" if self.scheme == "ec" else "baseline"

    def scheme_config(self) -> SchemeConfig:
        return SchemeConfig(self.lam, self.delta_t, self.n_points, self.domain_a, self.domain_b)

    def refined(self, factor: int) -> "ExperimentConfig":
        """Same problem with dx and dt divided by ``factor``."""
        return replace(
            self,
            n_points=self.n_points * factor,
            delta_t=self.delta_t / factor,
            record_every=self.record_every * factor,
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(d.pop("newton"))
        return d


_FLOAT_KEYS = {"lam", "domain_a", "domain_b", "delta_t", "t_end"}
_INT_KEYS = {"n_points", "record_every"}
_NEWTON_KEYS = {"residual_tol": float, "max_iters": int, "step_tol": float}


def parse_config(text: str) -> ExperimentConfig:
    values: dict = {}
    newton: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "lambda":
            key = "lam"
        try:
            if key in _FLOAT_KEYS:
                values[key] = float(value)
            elif key in _INT_KEYS:
                values[key] = int(value)
            elif key in _NEWTON_KEYS:
                newton[key] = _NEWTON_KEYS[key](value)
            elif key == "scheme":
                values[key] = value.lower()
            elif key == "output_path":
                values[key] = value or None
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from exc
    if newton:
        values["newton"] = NewtonConfig(**newton)
    return ExperimentConfig(**values)


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


@dataclass
class RunResult:
    config: ExperimentConfig
    report: ErrorReport
    series: InvariantSeries
    final: GridFunction
    newton: NewtonStats
    wall_time: float

    def summary(self) -> dict:
        return {
            "report": asdict(self.report),
            "config": self.config.to_dict(),
            "steps": self.config.n_steps,
            "newton_iterations": self.newton.iterations,
            "newton_max_iterations_per_step": self.newton.max_iterations,
            "wall_time_s": self.wall_time,
        }

    def write(self, directory) -> None:
        out = Path(directory)
        out.mkdir(parents=True, exist_ok=True)
        (out / "invariants.csv").write_text(self.series.to_csv())
        (out / "summary.json").write_text(json.dumps(self.summary(), indent=2) + "\n")


def initial_condition(cfg: ExperimentConfig) -> GridFunction:
    return GridFunction.from_function(
        lambda x: exact_solution(x, 0.0), cfg.domain_a, cfg.domain_b, cfg.n_points
    )


def run(cfg: ExperimentConfig) -> RunResult:
    """Integrate the soliton problem to ``t_end`` and score it against the exact solution."""
    start = time.perf_counter()
    scfg = cfg.scheme_config()
    advance = step if cfg.scheme == "ec" else baseline_step
    stats = NewtonStats()
    u = initial_condition(cfg)
    series = record_invariants(u, 0.0, InvariantSeries())
    nsteps = cfg.n_steps
    for k in range(1, nsteps + 1):
        try:
            u = advance(u, scfg, cfg.newton, stats)
        except (NewtonError, SingularSystemError) as exc:
            raise RunFailure(k, exc) from exc
        if k % cfg.record_every == 0 or k == nsteps:
            record_invariants(u, k * cfg.delta_t, series)
    t_final = nsteps * cfg.delta_t
    exact = u.like(exact_solution(u.x, t_final))
    report = error_metrics(series, u, exact, cfg.label, cfg.lam, cfg.delta_t)
    wall = time.perf_counter() - start
    log.info("%s: %d steps, %d Newton iterations, %.2fs", cfg.label, nsteps, stats.iterations, wall)
    return RunResult(cfg, report, series, u, stats, wall)


@dataclass(frozen=True)
class SweepRow:
    lam: float
    report: ErrorReport | None
    error: str | None = None


def _sweep_one(cfg: ExperimentConfig) -> SweepRow:
    try:
        return SweepRow(cfg.lam, run(cfg).report)
    except RunFailure as exc:
        return SweepRow(cfg.lam, None, str(exc))


def sweep_lambda(base: ExperimentConfig, lambdas, jobs: int = 1) -> list[SweepRow]:
    """One independent run per lambda, in input order; failures become rows."""
    lambdas = list(lambdas)
    if not lambdas:
        raise ConfigError("lambda list is empty")
    configs = [replace(base, lam=float(lam), scheme="ec") for lam in lambdas]
    if jobs > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_one, configs))
    return [_sweep_one(c) for c in configs]


@dataclass(frozen=True)
class ConvergenceRow:
    level: int
    n_points: int
    dx: float
    dt: float
    sol_err: float
    order: float | None


def convergence_study(base: ExperimentConfig, levels: int) -> list[ConvergenceRow]:
    """Halve dx and dt ``levels - 1`` times; order is log2 of successive error ratios."""
    if levels < 2:
        raise ConfigError("a convergence study needs at least 2 levels")
    rows: list[ConvergenceRow] = []
    for level in range(levels):
        cfg = base.refined(2**level)
        err = run(cfg).report.sol_err
        order = math.log2(rows[-1].sol_err / err) if rows else None
        rows.append(ConvergenceRow(level, cfg.n_points, cfg.delta_x, cfg.delta_t, err, order))
    return rows


def paper_config(lam: float) -> ExperimentConfig:
    return ExperimentConfig(scheme="ec", lam=lam)


def table1(lambdas=(0.023, -0.07)) -> list[RunResult]:
    return [run(paper_config(lam)) for lam in lambdas]


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ErrorReport.csv_header())
    for r in reports:
        w.writerow(r.csv_row())
    return buf.getvalue()


def rows_to_csv(rows) -> str:
    """CSV for a list of flat dataclass rows."""
    rows = list(rows)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if rows:
        header = list(asdict(rows[0]))
        w.writerow(header)
        for r in rows:
            w.writerow(
                [
                    "" if v is None else (repr(v) if isinstance(v, float) else v)
                    for v in asdict(r).values()
                ]
            )
    return buf.getvalue()
