"""Periodic grid functions and the forward difference/average operators.

Offset convention: for every operator here, entry ``i`` of the result is the
operator applied at lattice offset 0 with ``u_0 = f[i]``.  So ``diff_m(f)[i]``
is ``(f[i+1] - f[i]) / dx``.  The one exception is :func:`diff2_m`, which
returns ``D_m^2`` evaluated at offset -1, i.e. the centred second difference
at ``i``.  Periodicity is handled by index reduction mod N (``np.roll``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Smallest grid on which the 10-point stencil's offsets -2..2 are distinct.
MIN_STENCIL_POINTS = 5


@dataclass(frozen=True, eq=False)
class GridFunction:
    """One time level of a periodic grid function.

    Parameters
    ----------
    values : array_like
        The N samples; ``values[i]`` approximates ``u(x0 + i*delta_x)``.
    delta_x : float
        Grid spacing.
    x0 : float
        Left endpoint of the periodic domain.
    """

    values: np.ndarray
    delta_x: float
    x0: float = 0.0

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.ndim != 1:
            raise ValueError("grid values must be one-dimensional")
        if v.size == 0:
            raise ValueError("grid function needs at least one point")
        if not self.delta_x > 0:
            raise ValueError("delta_x must be positive")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "delta_x", float(self.delta_x))
        object.__setattr__(self, "x0", float(self.x0))

    @classmethod
    def from_function(cls, func, a: float, b: float, n: int) -> "GridFunction":
        """Sample ``func`` at ``a + i*(b-a)/n`` for ``i = 0..n-1``."""
        dx = (b - a) / n
        return cls(func(a + dx * np.arange(n)), dx, a)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.delta_x * np.arange(self.n)

    def like(self, values) -> "GridFunction":
        """New grid function on the same grid."""
        return GridFunction(values, self.delta_x, self.x0)

    def same_grid(self, other: "GridFunction") -> bool:
        return (
            self.n == other.n
            and np.isclose(self.delta_x, other.delta_x, rtol=1e-12, atol=0.0)
            and np.isclose(self.x0, other.x0, rtol=1e-12, atol=1e-12)
        )

    def _values_of(self, other):
        if isinstance(other, GridFunction):
            if not self.same_grid(other):
                raise ValueError("grid functions live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return self.like(self.values + self._values_of(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self.like(self.values - self._values_of(other))

    def __rsub__(self, other):
        return self.like(self._values_of(other) - self.values)

    def __mul__(self, other):
        return self.like(self.values * self._values_of(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self.like(self.values / self._values_of(other))

    def __neg__(self):
        return self.like(-self.values)

    def __pow__(self, p):
        return self.like(self.values**p)

    def __len__(self):
        return self.n

    def __getitem__(self, i):
        if isinstance(i, (int, np.integer)):
            return self.values[i % self.n]
        return self.values[i]

    def __repr__(self):
        return f"GridFunction(n={self.n}, delta_x={self.delta_x!r}, x0={self.x0!r})"


@dataclass(frozen=True, eq=False)
class TwoLevelState:
    """The rows j=0 (``level0``) and j=1 (``level1``) of the 10-point stencil."""

    level0: GridFunction
    level1: GridFunction
    delta_t: float

    def __post_init__(self):
        if not self.level0.same_grid(self.level1):
            raise ValueError("the two time levels must share N, delta_x and x0")
        if not self.delta_t > 0:
            raise ValueError("delta_t must be positive")
        object.__setattr__(self, "delta_t", float(self.delta_t))

    @property
    def n(self) -> int:
        return self.level0.n

    @property
    def delta_x(self) -> float:
        return self.level0.delta_x

    def map(self, op, *args) -> "TwoLevelState":
        """Apply a single-level operator to both levels."""
        return TwoLevelState(op(self.level0, *args), op(self.level1, *args), self.delta_t)

    def __add__(self, other: "TwoLevelState") -> "TwoLevelState":
        return TwoLevelState(self.level0 + other.level0, self.level1 + other.level1, self.delta_t)

    def __mul__(self, c: float) -> "TwoLevelState":
        return TwoLevelState(self.level0 * c, self.level1 * c, self.delta_t)

    __rmul__ = __mul__


def shift(f: GridFunction, k: int) -> GridFunction:
    """``S_m^k``: result[i] = f[i+k] (periodic)."""
    return f.like(np.roll(f.values, -k))


def diff_m(f: GridFunction) -> GridFunction:
    return f.like((np.roll(f.values, -1) - f.values) / f.delta_x)


def avg_m(f: GridFunction) -> GridFunction:
    return f.like(0.5 * (np.roll(f.values, -1) + f.values))


def diff2_m(f: GridFunction) -> GridFunction:
    """Centred second difference, ``(f[i+1] - 2 f[i] + f[i-1]) / dx**2``.

    This is ``D_m^2`` applied at offset -1, so ``diff2_m(f) == shift(diff_m(diff_m(f)), -1)``.
    """
    v = f.values
    return f.like((np.roll(v, -1) - 2.0 * v + np.roll(v, 1)) / f.delta_x**2)


def diff_n(s: TwoLevelState) -> GridFunction:
    return s.level0.like((s.level1.values - s.level0.values) / s.delta_t)


def avg_n(s: TwoLevelState) -> GridFunction:
    return s.level0.like(0.5 * (s.level1.values + s.level0.values))
