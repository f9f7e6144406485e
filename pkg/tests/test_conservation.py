import math

import numpy as np
import pytest
from fractions import Fraction
from scipy.integrate import quad

from conftest import random_state
from ecmkdv.conservation import (
    ErrorReport,
    InvariantSeries,
    divergence_identity_residual,
    energy_density,
    energy_flux,
    error_metrics,
    global_invariants,
    mass_density,
    momentum_density,
    record_invariants,
)
from ecmkdv.experiment import exact_solution
from ecmkdv.grid import GridFunction, TwoLevelState, shift
from ecmkdv.scheme import SchemeConfig
from ecmkdv.symbolic import energy_flux_symbolic

SQRT30, SQRT5 = math.sqrt(30), math.sqrt(5)


def soliton(n=400, t=0.0):
    return GridFunction.from_function(lambda x: exact_solution(x, t), -20.0, 20.0, n)


def test_densities_trivial():
    z = GridFunction(np.zeros(6), 0.1)
    for dens in (mass_density, momentum_density, energy_density):
        assert np.all(dens(z).values == 0)
    two = GridFunction(np.full(6, 2.0), 0.1)
    np.testing.assert_array_equal(momentum_density(two).values, 2.0)
    c = GridFunction(np.full(6, -1.5), 0.1)
    np.testing.assert_allclose(energy_density(c).values, 1.5**4 / 12)


def test_mass_of_soliton():
    # integral of sqrt(30) sech(sqrt(5) x) over R is pi*sqrt(6)
    u = soliton()
    m = u.delta_x * mass_density(u).values.sum()
    assert m == pytest.approx(math.pi * math.sqrt(6), abs=1e-12)
    assert u.delta_x * mass_density(shift(u, 17)).values.sum() == pytest.approx(m, abs=1e-13)


def test_momentum_of_soliton():
    analytic = 0.5 * 30 * 2 / SQRT5
    numeric = quad(lambda x: 0.5 * (SQRT30 / math.cosh(SQRT5 * x)) ** 2, -40, 40, limit=200)[0]
    assert numeric == pytest.approx(analytic, rel=1e-12)
    u = soliton()
    assert u.delta_x * momentum_density(u).values.sum() == pytest.approx(analytic, abs=1e-12)


def _continuum_energy():
    u = lambda x: SQRT30 / math.cosh(SQRT5 * x)  # noqa: E731
    ux = lambda x: -SQRT30 * SQRT5 * math.tanh(SQRT5 * x) / math.cosh(SQRT5 * x)  # noqa: E731
    return quad(lambda x: u(x) ** 4 / 12 - 0.5 * ux(x) ** 2, -40, 40, limit=200)[0]


def test_energy_of_soliton_second_order():
    cont = _continuum_energy()
    assert cont == pytest.approx(10 * SQRT5, rel=1e-12)
    errs = []
    for n in (400, 800, 1600):
        u = soliton(n)
        errs.append(u.delta_x * energy_density(u).values.sum() - cont)
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)
    assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.05)
    # regression target at dx = 0.1
    u = soliton(400)
    assert u.delta_x * energy_density(u).values.sum() == pytest.approx(
        22.490432897834182, abs=1e-11
    )


def _dyadic_state(rng, n=8):
    """State, config and exact copies with floats that are exact binary fractions."""
    dx, dt, lam = Fraction(1, 8), Fraction(1, 64), Fraction(int(rng.integers(-16, 17)), 16)
    a = [Fraction(int(k), 32) for k in rng.integers(-64, 65, size=n)]
    b = [Fraction(int(k), 32) for k in rng.integers(-64, 65, size=n)]
    cfg = SchemeConfig(float(lam), float(dt), n, 0.0, float(dx) * n)
    s = TwoLevelState(
        GridFunction([float(v) for v in a], cfg.delta_x),
        GridFunction([float(v) for v in b], cfg.delta_x),
        cfg.delta_t,
    )
    return s, cfg, (a, b), (dx, dt, lam)


def test_energy_flux_trivial():
    cfg = SchemeConfig(0.4, 0.01, 8, 0.0, 1.0)
    z = GridFunction(np.zeros(8), cfg.delta_x)
    assert np.all(energy_flux(TwoLevelState(z, z, 0.01), cfg).values == 0)
    c = GridFunction(np.full(8, 1.2), cfg.delta_x)
    np.testing.assert_allclose(
        energy_flux(TwoLevelState(c, c, 0.01), cfg).values, 0.5 * (1.2**3 / 3) ** 2, rtol=1e-14
    )


def test_energy_flux_matches_symbolic(rng):
    flux = energy_flux_symbolic()
    for _ in range(5):
        s, cfg, (a, b), (dx, dt, lam) = _dyadic_state(rng)
        numeric = energy_flux(s, cfg).values
        n = s.n
        for i in range(n):
            exact = flux.evaluate(lambda o: (a, b)[o[1]][(i + o[0]) % n], dx, dt, lam)
            assert abs(numeric[i] - float(exact)) <= 1e-13 * max(abs(float(exact)), 1.0)


def test_divergence_identity_zero_state():
    cfg = SchemeConfig(0.1, 0.01, 16, 0.0, 1.6)
    z = GridFunction(np.zeros(16), cfg.delta_x)
    assert np.all(divergence_identity_residual(TwoLevelState(z, z, 0.01), cfg).values == 0)


def _term_scale(s, cfg):
    from ecmkdv.scheme import phi, residual

    p = np.abs(phi(s, cfg).values.values)
    r = np.abs(residual(s, cfg).values)
    return max(p.max() * r.max(), np.abs(energy_flux(s, cfg).values).max() / cfg.delta_x, 1.0)


def test_divergence_identity_random(rng):
    for _ in range(20):
        s, cfg = random_state(rng, n=16)
        d = np.abs(divergence_identity_residual(s, cfg).values).max()
        assert d <= 1e-10 * _term_scale(s, cfg)


def test_divergence_identity_soliton_pair():
    n, dt = 400, 0.01
    cfg = SchemeConfig(0.023, dt, n)
    s = TwoLevelState(soliton(n, 1.0), soliton(n, 1.0 + dt), dt)
    d = np.abs(divergence_identity_residual(s, cfg).values).max()
    assert d <= 1e-10 * _term_scale(s, cfg)


def test_record_invariants_grows():
    series = InvariantSeries()
    u = soliton()
    record_invariants(u, 0.0, series)
    assert len(series) == 1
    record_invariants(u, 0.1, series)
    record_invariants(u, 0.2, series)
    assert len(series) == 3
    assert series.mass[0] == pytest.approx(math.pi * math.sqrt(6), abs=1e-12)
    assert series.to_csv().splitlines()[0] == "t,mass,momentum,energy"


def test_error_metrics_trivial():
    u = soliton()
    series = InvariantSeries()
    for t in (0.0, 0.5, 1.0):
        record_invariants(u, t, series)
    rep = error_metrics(series, u, u)
    assert (rep.err1, rep.err2, rep.err3, rep.sol_err) == (0, 0, 0, 0)


def test_error_metrics_values():
    u = soliton()
    series = InvariantSeries([0, 1, 2], [1.0, 1.5, 0.2], [2.0, 2.0, 2.1], [3.0, 2.0, 3.0])
    v = u.like(u.values * 1.01)
    rep = error_metrics(series, v, u)
    assert rep.err1 == pytest.approx(0.8)
    assert rep.err2 == pytest.approx(0.1)
    assert rep.err3 == pytest.approx(1.0)
    assert rep.sol_err == pytest.approx(0.01)
    relabeled = InvariantSeries([5, 7, 100], series.mass, series.momentum, series.energy)
    assert error_metrics(relabeled, v, u) == rep


def test_error_metrics_rejects_empty():
    u = soliton()
    with pytest.raises(ValueError):
        error_metrics(InvariantSeries(), u, u)


def test_error_report_csv_row():
    rep = ErrorReport("EC(0.023)", 0.023, 0.1, 0.01, 1e-14, 2e-4, 3e-13, 0.0037)
    assert ErrorReport.csv_header() == [
        "method",
        "lam",
        "dx",
        "dt",
        "err1",
        "err2",
        "err3",
        "sol_err",
    ]
    row = rep.csv_row()
    assert row[0] == "EC(0.023)" and float(row[4]) == 1e-14


def test_global_invariants_match_densities():
    u = soliton(200)
    m, p, e = global_invariants(u)
    assert p == pytest.approx(u.delta_x * np.sum(0.5 * u.values**2))
