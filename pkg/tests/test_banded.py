import numpy as np
import pytest

from ecmkdv.banded import CyclicBandedMatrix, SingularSystemError


def random_matrix(rng, n, diag_shift=0.0):
    d = rng.normal(size=(5, n))
    d[2] += diag_shift
    return CyclicBandedMatrix(d)


@pytest.mark.parametrize("n", [5, 6, 7, 12, 33, 200])
def test_solve_matches_dense(rng, n):
    a = random_matrix(rng, n)
    b = rng.normal(size=n)
    x = a.solve(b)
    np.testing.assert_allclose(a.to_dense() @ x, b, atol=1e-9 * max(1, np.abs(b).max()))
    np.testing.assert_allclose(x, a.solve(b, method="dense"), rtol=1e-8, atol=1e-10)


def test_dense_layout(rng):
    n = 7
    a = random_matrix(rng, n)
    dense = a.to_dense()
    for i in range(n):
        for o in range(-2, 3):
            assert dense[i, (i + o) % n] == a.diagonals[o + 2, i]
    assert np.count_nonzero(dense) == 5 * n


def test_matvec(rng):
    a = random_matrix(rng, 11)
    x = rng.normal(size=11)
    np.testing.assert_allclose(a.matvec(x), a.to_dense() @ x, atol=1e-13)


def test_falls_back_when_banded_part_is_singular():
    # the cyclic shift has an invertible full matrix but a singular non-wrapped part
    n = 6
    d = np.zeros((5, n))
    d[3] = 1.0
    a = CyclicBandedMatrix(d)
    b = np.arange(1.0, n + 1)
    np.testing.assert_allclose(a.to_dense() @ a.solve(b), b)


def test_singular_raises():
    with pytest.raises(SingularSystemError):
        CyclicBandedMatrix(np.zeros((5, 6))).solve(np.ones(6))


def test_rejects_small_or_misshaped():
    with pytest.raises(ValueError):
        CyclicBandedMatrix(np.ones((5, 4)))
    with pytest.raises(ValueError):
        CyclicBandedMatrix(np.ones((3, 8)))
