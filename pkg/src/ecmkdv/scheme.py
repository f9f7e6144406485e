"""The EC(lambda) scheme for u_t + u^2 u_x + u_xxx = 0 and its Newton stepper.

On the 10-point stencil (offsets i = -2..2, time rows j = 0, 1) the scheme is

    D_m(mu_m phi_{-1,0}) + D_n u_{0,0} = 0,

    phi_{-1,0} = 1/3 (mu_n u^2_{-1,0})(mu_n u_{-1,0}) + mu_n D_m^2 u_{-2,0}
                 + lam dx^2 D_m D_n mu_m u_{-2,0}.

Everything below indexes ``phi`` by its offset-0 form: ``phi[i]`` is the
expression above shifted by one, i.e. centred on grid point ``i``.  Written
out, the lam-term of ``phi[i]`` is ``lam*dx*(d[i+1] - d[i-1])/(2*dt)`` with
``d = u1 - u0``, and ``residual[i] = (phi[i+1] - phi[i-1])/(2 dx) + d[i]/dt``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .banded import CyclicBandedMatrix, SingularSystemError
from .grid import MIN_STENCIL_POINTS, GridFunction, TwoLevelState

_EPS = float(np.finfo(np.float64).eps)

__all__ = [
    "ConfigError",
    "NewtonConfig",
    "NewtonError",
    "NewtonStats",
    "PhiField",
    "SchemeConfig",
    "SingularSystemError",
    "baseline_jacobian",
    "baseline_residual",
    "baseline_step",
    "jacobian",
    "phi",
    "residual",
    "step",
]


class ConfigError(ValueError):
    """Inconsistent scheme or grid configuration."""


class NewtonError(RuntimeError):
    """Newton iteration failed to reach the residual tolerance."""

    def __init__(self, message, residual_norm=math.nan, iterations=0):
        super().__init__(message)
        self.residual_norm = residual_norm
        self.iterations = iterations


@dataclass(frozen=True)
class SchemeConfig:
    lam: float
    delta_t: float
    n_points: int
    domain_a: float = -20.0
    domain_b: float = 20.0

    def __post_init__(self):
        if self.n_points < MIN_STENCIL_POINTS:
            raise ConfigError(f"n_points must be >= {MIN_STENCIL_POINTS}")
        if not self.domain_b > self.domain_a:
            raise ConfigError("domain_b must exceed domain_a")
        if not self.delta_t > 0:
            raise ConfigError("delta_t must be positive")

    @property
    def delta_x(self) -> float:
        return (self.domain_b - self.domain_a) / self.n_points

    @classmethod
    def for_grid(cls, u: GridFunction, lam: float, delta_t: float) -> "SchemeConfig":
        """Config whose grid matches ``u``."""
        return cls(lam, delta_t, u.n, u.x0, u.x0 + u.n * u.delta_x)

    def check(self, s: TwoLevelState) -> None:
        if s.n != self.n_points:
            raise ConfigError(f"state has {s.n} points, config expects {self.n_points}")
        if not math.isclose(s.delta_x, self.delta_x, rel_tol=1e-12):
            raise ConfigError(f"state delta_x={s.delta_x} but config gives {self.delta_x}")
        if not math.isclose(s.delta_t, self.delta_t, rel_tol=1e-12):
            raise ConfigError(f"state delta_t={s.delta_t} but config has {self.delta_t}")


@dataclass(frozen=True)
class NewtonConfig:
    residual_tol: float = 1e-12
    max_iters: int = 25
    step_tol: float = 1e-13

    def __post_init__(self):
        if not (self.residual_tol > 0 and self.step_tol > 0):
            raise ConfigError("Newton tolerances must be positive")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be >= 1")


@dataclass
class NewtonStats:
    """Running totals over the steps that were handed this object."""

    steps: int = 0
    iterations: int = 0
    max_iterations: int = 0
    last_residual: float = 0.0
    per_step: list = field(default_factory=list)

    def record(self, iterations, residual_norm):
        self.steps += 1
        self.iterations += iterations
        self.max_iterations = max(self.max_iterations, iterations)
        self.last_residual = residual_norm
        self.per_step.append(iterations)


@dataclass(frozen=True)
class PhiField:
    values: GridFunction


def _levels(s: TwoLevelState):
    return s.level0.values, s.level1.values


def _phi_values(u0, u1, dx, dt, lam):
    w = 0.5 * (u0 + u1)
    sq = 0.5 * (u0 * u0 + u1 * u1)
    d = u1 - u0
    return (
        sq * w / 3.0
        + (np.roll(w, -1) - 2.0 * w + np.roll(w, 1)) / dx**2
        + lam * dx * (np.roll(d, -1) - np.roll(d, 1)) / (2.0 * dt)
    )


def phi(s: TwoLevelState, cfg: SchemeConfig) -> PhiField:
    """The stencil function, ``phi[i]`` centred on grid point ``i``."""
    cfg.check(s)
    u0, u1 = _levels(s)
    return PhiField(s.level0.like(_phi_values(u0, u1, cfg.delta_x, cfg.delta_t, cfg.lam)))


def residual(s: TwoLevelState, cfg: SchemeConfig) -> GridFunction:
    cfg.check(s)
    u0, u1 = _levels(s)
    dx, dt = cfg.delta_x, cfg.delta_t
    p = _phi_values(u0, u1, dx, dt, cfg.lam)
    return s.level0.like((np.roll(p, -1) - np.roll(p, 1)) / (2.0 * dx) + (u1 - u0) / dt)


def jacobian(s: TwoLevelState, cfg: SchemeConfig) -> CyclicBandedMatrix:
    """d residual[i] / d u1[k] as a cyclic pentadiagonal matrix."""
    cfg.check(s)
    u0, u1 = _levels(s)
    dx, dt = cfg.delta_x, cfg.delta_t
    n = u0.size
    c = cfg.lam * dx / (2.0 * dt)
    side = 1.0 / (2.0 * dx**2)
    # d phi[i] / d u1[i]
    g = (u1 * 0.5 * (u0 + u1) + 0.25 * (u0 * u0 + u1 * u1)) / 3.0 - 1.0 / dx**2
    h = 1.0 / (2.0 * dx)
    diags = np.empty((5, n))
    diags[0] = -(side - c) * h
    diags[1] = -np.roll(g, 1) * h
    diags[2] = 1.0 / dt - c / dx
    diags[3] = np.roll(g, -1) * h
    diags[4] = (side + c) * h
    return CyclicBandedMatrix(diags)


def baseline_residual(s: TwoLevelState, cfg: SchemeConfig) -> GridFunction:
    """Implicit midpoint with centred differences; conserves mass but not energy."""
    cfg.check(s)
    u0, u1 = _levels(s)
    dx, dt = cfg.delta_x, cfg.delta_t
    w = 0.5 * (u0 + u1)
    r = lambda k: np.roll(w, -k)  # noqa: E731
    ux = (r(1) - r(-1)) / (2.0 * dx)
    uxxx = (r(2) - 2.0 * r(1) + 2.0 * r(-1) - r(-2)) / (2.0 * dx**3)
    return s.level0.like((u1 - u0) / dt + w * w * ux + uxxx)


def baseline_jacobian(s: TwoLevelState, cfg: SchemeConfig) -> CyclicBandedMatrix:
    cfg.check(s)
    u0, u1 = _levels(s)
    dx, dt = cfg.delta_x, cfg.delta_t
    w = 0.5 * (u0 + u1)
    n = w.size
    diags = np.empty((5, n))
    # d/du1 = 1/2 d/dw
    diags[0] = -0.25 / dx**3
    diags[1] = 0.5 * (-w * w / (2.0 * dx) + 1.0 / dx**3)
    diags[2] = 1.0 / dt + 0.5 * w * (np.roll(w, -1) - np.roll(w, 1)) / dx
    diags[3] = 0.5 * (w * w / (2.0 * dx) - 1.0 / dx**3)
    diags[4] = 0.25 / dx**3
    return CyclicBandedMatrix(diags)


def _term_scale(s: TwoLevelState, cfg: SchemeConfig) -> float:
    """Largest sum of absolute values of the terms making up one EC residual entry."""
    u0, u1 = _levels(s)
    dx, dt = cfg.delta_x, cfg.delta_t
    w = np.abs(0.5 * (u0 + u1))
    sq = 0.5 * (u0 * u0 + u1 * u1)
    d = np.abs(u1 - u0)
    p = (
        sq * w / 3.0
        + (np.roll(w, -1) + 2.0 * w + np.roll(w, 1)) / dx**2
        + abs(cfg.lam) * dx * (np.roll(d, -1) + np.roll(d, 1)) / (2.0 * dt)
    )
    return float(
        np.max((np.roll(p, -1) + np.roll(p, 1)) / (2.0 * dx) + (np.abs(u0) + np.abs(u1)) / dt)
    )


def _baseline_term_scale(s: TwoLevelState, cfg: SchemeConfig) -> float:
    u0, u1 = _levels(s)
    dx, dt = cfg.delta_x, cfg.delta_t
    w = np.abs(0.5 * (u0 + u1))
    r = lambda k: np.roll(w, -k)  # noqa: E731
    return float(
        np.max(
            (np.abs(u0) + np.abs(u1)) / dt
            + w * w * (r(1) + r(-1)) / (2.0 * dx)
            + (r(2) + 2.0 * r(1) + 2.0 * r(-1) + r(-2)) / (2.0 * dx**3)
        )
    )


def _newton(u0, cfg, ncfg, res_fn, jac_fn, scale_fn, stats, method):
    s = TwoLevelState(u0, u0, cfg.delta_t)
    cfg.check(s)
    if not np.all(np.isfinite(u0.values)):
        raise ValueError("initial level contains non-finite values")
    u1 = u0.values.copy()
    stalled = False
    for it in range(ncfg.max_iters + 1):
        s = TwoLevelState(u0, u0.like(u1), cfg.delta_t)
        r = res_fn(s, cfg).values
        rnorm = float(np.max(np.abs(r)))
        # residual_tol below the rounding level of the residual terms is unattainable
        tol = max(ncfg.residual_tol, _EPS * scale_fn(s, cfg))
        if rnorm <= tol:
            if stats is not None:
                stats.record(it, rnorm)
            return s.level1
        if stalled:
            raise NewtonError(f"Newton stagnated with residual {rnorm:.3e}", rnorm, it)
        if it == ncfg.max_iters or not math.isfinite(rnorm):
            break
        delta = jac_fn(s, cfg).solve(-r, method=method)
        u1 = u1 + delta
        stalled = np.max(np.abs(delta)) <= ncfg.step_tol * max(1.0, float(np.max(np.abs(u1))))
    raise NewtonError(
        f"Newton did not converge in {ncfg.max_iters} iterations (residual {rnorm:.3e})",
        rnorm,
        ncfg.max_iters,
    )


def step(u0, cfg, ncfg=None, stats=None, method="banded") -> GridFunction:
    """Advance one time step of EC(lam): solve ``residual(u0, u1) = 0`` for ``u1``.

    The Newton iteration starts from ``u0`` and solves each linearised system
    directly.  The max-norm residual must fall below ``ncfg.residual_tol`` or,
    if that is smaller, below machine epsilon times the summed magnitude of the
    residual's terms.  Raises :class:`NewtonError` if the residual tolerance is not met
    and :class:`SingularSystemError` if a Jacobian cannot be inverted.
    """
    return _newton(u0, cfg, ncfg or NewtonConfig(), residual, jacobian, _term_scale, stats, method)


def baseline_step(u0, cfg, ncfg=None, stats=None, method="banded") -> GridFunction:
    return _newton(
        u0,
        cfg,
        ncfg or NewtonConfig(),
        baseline_residual,
        baseline_jacobian,
        _baseline_term_scale,
        stats,
        method,
    )
