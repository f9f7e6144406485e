"""Discrete densities, the energy flux, global invariants and error metrics.

Mass and energy laws hold in the form ``density(u1) - density(u0) over dt plus
D_m(flux) = characteristic * residual``, so that on a periodic grid the plain
Riemann sums ``dx * sum(density)`` are conserved to solver/roundoff level.
Momentum is monitored with the pointwise density u^2/2 and is not conserved.
"""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .grid import (
    GridFunction,
    TwoLevelState,
    avg_m,
    avg_n,
    diff2_m,
    diff_m,
    diff_n,
    shift,
)
from .scheme import SchemeConfig, phi, residual


def mass_density(u: GridFunction) -> GridFunction:
    return u.like(u.values)


def momentum_density(u: GridFunction) -> GridFunction:
    return u.like(0.5 * u.values**2)


def energy_density(u: GridFunction) -> GridFunction:
    """``u^4/12 + u * (centred second difference of u) / 2``."""
    return u.like(u.values**4 / 12.0 + 0.5 * u.values * diff2_m(u).values)


def energy_flux(s: TwoLevelState, cfg: SchemeConfig) -> GridFunction:
    """Energy flux, entry ``i`` located at offset 0 of the stencil.

    Built from the grid operators: products are taken at offset -1 and then
    shifted, which keeps the transcription literal.
    """
    p = phi(s, cfg).values
    dn = diff_n(s)
    cross = diff_m(avg_n(s)) * diff_n(s.map(avg_m)) - avg_m(avg_n(s)) * diff_m(dn)
    return 0.5 * (
        shift(p, -1) * p + shift(cross, -1) + cfg.lam * cfg.delta_x**2 * dn * shift(dn, -1)
    )


def divergence_identity_residual(s: TwoLevelState, cfg: SchemeConfig) -> GridFunction:
    """``phi * residual - (D_m F3 + D_n G3)``; vanishes for every state."""
    lhs = phi(s, cfg).values * residual(s, cfg)
    g = s.map(energy_density)
    return lhs - (diff_m(energy_flux(s, cfg)) + diff_n(g))


def global_invariants(u: GridFunction) -> tuple[float, float, float]:
    dx = u.delta_x
    return (
        dx * float(np.sum(mass_density(u).values)),
        dx * float(np.sum(momentum_density(u).values)),
        dx * float(np.sum(energy_density(u).values)),
    )


@dataclass
class InvariantSeries:
    times: list = field(default_factory=list)
    mass: list = field(default_factory=list)
    momentum: list = field(default_factory=list)
    energy: list = field(default_factory=list)

    def __len__(self):
        return len(self.times)

    def drifts(self) -> np.ndarray:
        """Array (len, 3) of invariant minus its first recorded value."""
        a = np.column_stack([self.mass, self.momentum, self.energy])
        return a - a[0]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "mass", "momentum", "energy"])
        for row in zip(self.times, self.mass, self.momentum, self.energy):
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()


def record_invariants(u: GridFunction, t: float, series: InvariantSeries) -> InvariantSeries:
    m, p, e = global_invariants(u)
    series.times.append(float(t))
    series.mass.append(m)
    series.momentum.append(p)
    series.energy.append(e)
    return series


@dataclass(frozen=True)
class ErrorReport:
    method: str
    lam: float
    dx: float
    dt: float
    err1: float
    err2: float
    err3: float
    sol_err: float

    @classmethod
    def csv_header(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def csv_row(self) -> list[str]:
        return [v if isinstance(v, str) else repr(float(v)) for v in asdict(self).values()]


def error_metrics(
    series: InvariantSeries,
    numeric_final: GridFunction,
    exact_final: GridFunction,
    method: str = "",
    lam: float = float("nan"),
    dt: float = float("nan"),
) -> ErrorReport:
    """Max invariant drift from the first record, and relative l2 solution error."""
    if len(series) == 0:
        raise ValueError("invariant series is empty")
    if not numeric_final.same_grid(exact_final):
        raise ValueError("numeric and exact solutions live on different grids")
    err1, err2, err3 = np.max(np.abs(series.drifts()), axis=0)
    diff = np.linalg.norm(numeric_final.values - exact_final.values)
    ref = np.linalg.norm(exact_final.values)
    sol_err = float(diff / ref) if ref > 0 else float(diff)
    return ErrorReport(
        method, lam, numeric_final.delta_x, dt, float(err1), float(err2), float(err3), sol_err
    )
