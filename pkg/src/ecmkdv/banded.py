"""Cyclic pentadiagonal matrices and their direct solution.

The periodic Newton Jacobians are banded with bandwidth 2 plus four wrapped
corner entries in each of rows 0, 1, N-2 and N-1.  We factor the non-wrapped
banded part with LAPACK (``scipy.linalg.solve_banded``) and put the corners
back with a Woodbury correction of rank 4, which costs O(N).
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import LinAlgError, solve_banded

OFFSETS = (-2, -1, 0, 1, 2)


class SingularSystemError(ArithmeticError):
    """The cyclic banded system could not be solved."""


class CyclicBandedMatrix:
    """N x N matrix with ``A[i, (i+o) % N] = diagonals[o+2, i]`` for o in -2..2.

    Parameters
    ----------
    diagonals : ndarray, shape (5, N)
        Row-aligned diagonals: row ``o+2`` holds the entries at column offset ``o``.
    """

    def __init__(self, diagonals):
        d = np.asarray(diagonals, dtype=np.float64)
        if d.ndim != 2 or d.shape[0] != 5:
            raise ValueError("diagonals must have shape (5, N)")
        if d.shape[1] < 5:
            raise ValueError("cyclic pentadiagonal storage needs N >= 5")
        self.diagonals = d

    @property
    def n(self) -> int:
        return self.diagonals.shape[1]

    def to_dense(self) -> np.ndarray:
        n = self.n
        a = np.zeros((n, n))
        rows = np.arange(n)
        for o in OFFSETS:
            a[rows, (rows + o) % n] += self.diagonals[o + 2]
        return a

    def matvec(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return sum(self.diagonals[o + 2] * np.roll(x, -o) for o in OFFSETS)

    def nonzero_offsets(self, row: int) -> set[int]:
        """Column offsets (in -2..2) holding nonzero entries of ``row``."""
        return {o for o in OFFSETS if self.diagonals[o + 2, row] != 0.0}

    def _split(self):
        """Banded (LAPACK layout) part and the wrapped corner rows."""
        n = self.n
        ab = np.zeros((5, n))
        rows = np.arange(n)
        corner_rows = np.array([0, 1, n - 2, n - 1])
        corners = np.zeros((4, n))
        for o in OFFSETS:
            cols = rows + o
            inside = (cols >= 0) & (cols < n)
            # scipy layout: ab[u + i - j, j] = a[i, j] with u = 2
            ab[2 - o, cols[inside]] = self.diagonals[o + 2, inside]
            for k, r in enumerate(corner_rows):
                c = r + o
                if c < 0 or c >= n:
                    corners[k, c % n] += self.diagonals[o + 2, r]
        return ab, corner_rows, corners

    def solve(self, b, method: str = "banded") -> np.ndarray:
        """Solve ``A x = b``.

        ``method="banded"`` is the O(N) route; ``"dense"`` uses a full LU and is
        meant for small systems and cross-checks.  A banded failure (singular
        non-wrapped part) falls back to the dense route.
        """
        b = np.asarray(b, dtype=np.float64)
        if method == "dense":
            return self._solve_dense(b)
        if method != "banded":
            raise ValueError(f"unknown method {method!r}")
        try:
            x = self._solve_woodbury(b)
        except (LinAlgError, ValueError):
            return self._solve_dense(b)
        if not np.all(np.isfinite(x)):
            return self._solve_dense(b)
        return x

    def _solve_woodbury(self, b):
        n = self.n
        ab, corner_rows, corners = self._split()
        # A = B + E W, E selects corner_rows, W holds their wrapped entries
        rhs = np.zeros((n, 5))
        rhs[:, 0] = b
        rhs[corner_rows, np.arange(1, 5)] = 1.0
        sol = solve_banded((2, 2), ab, rhs, check_finite=False)
        y, z = sol[:, 0], sol[:, 1:]
        cap = np.eye(4) + corners @ z
        return y - z @ np.linalg.solve(cap, corners @ y)

    def _solve_dense(self, b):
        try:
            x = np.linalg.solve(self.to_dense(), b)
        except LinAlgError as exc:
            raise SingularSystemError(str(exc)) from exc
        if not np.all(np.isfinite(x)):
            raise SingularSystemError("non-finite solution")
        return x
