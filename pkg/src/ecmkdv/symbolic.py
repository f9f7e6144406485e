"""Exact polynomials in shifted grid variables and the difference Euler operator.

A :class:`GridPolynomial` is a polynomial in the formal symbols ``u[i,j]``
whose coefficients are :class:`SymCoeff` values, i.e. exact rational
combinations of ``dx**p * dt**q * lam**r`` (``p``, ``q`` may be negative).
Nothing here touches floating point.

The Euler operator ``E = sum_{i,j} S_m^{-i} S_n^{-j} d/du[i,j]`` annihilates
exactly the discrete divergences ``D_m F + D_n G``, so a scheme (or a product
characteristic * scheme) is a conservation law iff :func:`euler` returns zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Callable, Iterable, Mapping

Offset = tuple[int, int]


class SymCoeff:
    """Exact Laurent polynomial in ``dx``, ``dt`` and polynomial in ``lam``."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple[int, int, int], Fraction] | None = None):
        clean = {}
        for key, c in (terms or {}).items():
            c = Fraction(c)
            if c:
                if key[2] < 0:
                    raise ValueError("negative powers of lam are not allowed")
                clean[tuple(key)] = c
        self.terms = clean

    @classmethod
    def const(cls, c) -> "SymCoeff":
        return cls({(0, 0, 0): Fraction(c)})

    @classmethod
    def monomial(cls, p=0, q=0, r=0, c=1) -> "SymCoeff":
        return cls({(p, q, r): Fraction(c)})

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, SymCoeff):
            other = SymCoeff.const(other)
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other: "SymCoeff") -> "SymCoeff":
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return SymCoeff(out)

    def __neg__(self):
        return SymCoeff({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, SymCoeff):
            other = SymCoeff.const(other)
        out: dict = {}
        for (p1, q1, r1), c1 in self.terms.items():
            for (p2, q2, r2), c2 in other.terms.items():
                k = (p1 + p2, q1 + q2, r1 + r2)
                out[k] = out.get(k, 0) + c1 * c2
        return SymCoeff(out)

    __rmul__ = __mul__

    def evaluate(self, dx, dt, lam) -> Fraction:
        dx, dt, lam = Fraction(dx), Fraction(dt), Fraction(lam)
        return sum((c * dx**p * dt**q * lam**r for (p, q, r), c in self.terms.items()), Fraction(0))

    def max_lam_power(self) -> int:
        return max((k[2] for k in self.terms), default=0)

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (p, q, r), c in sorted(self.terms.items()):
            factors = [str(c)]
            for name, e in (("dx", p), ("dt", q), ("lam", r)):
                if e:
                    factors.append(name if e == 1 else f"{name}^{e}")
            parts.append("*".join(factors))
        return " + ".join(parts)

    def __repr__(self):
        return f"SymCoeff({self.to_text()})"


class GridMonomial:
    """Product of ``u[i,j]**e``; stored as sorted ``((i, j), e)`` pairs."""

    __slots__ = ("exponents", "_hash")

    def __init__(self, exponents: Mapping[Offset, int] | Iterable[tuple[Offset, int]] = ()):
        items = exponents.items() if isinstance(exponents, Mapping) else exponents
        merged: dict = {}
        for off, e in items:
            if e < 0:
                raise ValueError("exponents must be non-negative")
            merged[tuple(off)] = merged.get(tuple(off), 0) + e
        self.exponents = tuple(sorted((o, e) for o, e in merged.items() if e > 0))
        self._hash = hash(self.exponents)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return isinstance(other, GridMonomial) and self.exponents == other.exponents

    def sort_key(self):
        return (tuple(o for o, _ in self.exponents), tuple(e for _, e in self.exponents))

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    @property
    def degree(self) -> int:
        return sum(e for _, e in self.exponents)

    def offsets(self) -> list[Offset]:
        return [o for o, _ in self.exponents]

    def __mul__(self, other: "GridMonomial") -> "GridMonomial":
        return GridMonomial(self.exponents + other.exponents)

    def shifted(self, a: int, b: int) -> "GridMonomial":
        return GridMonomial(tuple(((i + a, j + b), e) for (i, j), e in self.exponents))

    def derivative(self, var: Offset) -> tuple[int, "GridMonomial"]:
        """``(multiplicity, monomial)`` of d/du[var]; multiplicity 0 if absent."""
        d = dict(self.exponents)
        e = d.get(var, 0)
        if not e:
            return 0, self
        d[var] = e - 1
        return e, GridMonomial(d)

    def to_text(self) -> str:
        if not self.exponents:
            return "1"
        return "*".join(f"u[{i},{j}]" + (f"^{e}" if e > 1 else "") for (i, j), e in self.exponents)

    def __repr__(self):
        return f"GridMonomial({self.to_text()})"


class GridPolynomial:
    """Canonical map ``GridMonomial -> SymCoeff`` with no zero coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[GridMonomial, SymCoeff] | None = None):
        self.terms = {m: c for m, c in (terms or {}).items() if c}

    @classmethod
    def var(cls, i: int, j: int = 0) -> "GridPolynomial":
        return cls({GridMonomial({(i, j): 1}): SymCoeff.const(1)})

    @classmethod
    def const(cls, c) -> "GridPolynomial":
        if not isinstance(c, SymCoeff):
            c = SymCoeff.const(c)
        return cls({GridMonomial(): c})

    @classmethod
    def zero(cls) -> "GridPolynomial":
        return cls()

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, GridPolynomial):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    @staticmethod
    def _coerce(x) -> "GridPolynomial":
        return x if isinstance(x, GridPolynomial) else GridPolynomial.const(x)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out[m] + c if m in out else c
        return GridPolynomial(out)

    __radd__ = __add__

    def __neg__(self):
        return GridPolynomial({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (SymCoeff, int, Fraction)):
            c = other if isinstance(other, SymCoeff) else SymCoeff.const(other)
            return GridPolynomial({m: k * c for m, k in self.terms.items()})
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = m1 * m2
                c = c1 * c2
                out[m] = out[m] + c if m in out else c
        return GridPolynomial(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not polynomial")
        return reduce(lambda a, b: a * b, [self] * k, GridPolynomial.const(1))

    @property
    def degree(self) -> int:
        return max((m.degree for m in self.terms), default=0)

    def variables(self) -> set[Offset]:
        return {o for m in self.terms for o in m.offsets()}

    def homogeneous_part(self, degree: int) -> "GridPolynomial":
        return GridPolynomial({m: c for m, c in self.terms.items() if m.degree == degree})

    def map_coeffs(self, fn: Callable[[SymCoeff], SymCoeff]) -> "GridPolynomial":
        return GridPolynomial({m: fn(c) for m, c in self.terms.items()})

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda mc: mc[0].sort_key())

    def to_text(self) -> str:
        """Deterministic one-term-per-line rendering."""
        if not self.terms:
            return "0\n"
        return "".join(f"({c.to_text()}) * {m.to_text()}\n" for m, c in self.sorted_terms())

    def __repr__(self):
        return f"GridPolynomial({len(self.terms)} terms)"

    def evaluate(self, values, dx, dt, lam) -> Fraction:
        """Exact value with ``values[(i, j)]`` (or ``values(i, j)``) substituted for u[i,j]."""
        get = values if callable(values) else values.__getitem__
        total = Fraction(0)
        for m, c in self.terms.items():
            prod = c.evaluate(dx, dt, lam)
            for off, e in m.exponents:
                prod *= Fraction(get(off)) ** e
            total += prod
        return total


u = GridPolynomial.var
DX = SymCoeff.monomial(p=1)
DT = SymCoeff.monomial(q=1)
LAM = SymCoeff.monomial(r=1)
_INV_DX = SymCoeff.monomial(p=-1)
_INV_DT = SymCoeff.monomial(q=-1)
_HALF = Fraction(1, 2)


def poly_add(a: GridPolynomial, b: GridPolynomial) -> GridPolynomial:
    return a + b


def poly_mul(a: GridPolynomial, b: GridPolynomial) -> GridPolynomial:
    return a * b


def sym_shift(p: GridPolynomial, a: int, b: int) -> GridPolynomial:
    if a == 0 and b == 0:
        return p
    return GridPolynomial({m.shifted(a, b): c for m, c in p.terms.items()})


def sym_diff_m(p: GridPolynomial) -> GridPolynomial:
    return (sym_shift(p, 1, 0) - p) * _INV_DX


def sym_diff_n(p: GridPolynomial) -> GridPolynomial:
    return (sym_shift(p, 0, 1) - p) * _INV_DT


def sym_avg_m(p: GridPolynomial) -> GridPolynomial:
    return (sym_shift(p, 1, 0) + p) * _HALF


def sym_avg_n(p: GridPolynomial) -> GridPolynomial:
    return (sym_shift(p, 0, 1) + p) * _HALF


def partial(p: GridPolynomial, var: Offset) -> GridPolynomial:
    out: dict = {}
    for m, c in p.terms.items():
        e, dm = m.derivative(var)
        if e:
            out[dm] = out[dm] + c * e if dm in out else c * e
    return GridPolynomial(out)


def euler(p: GridPolynomial) -> GridPolynomial:
    """Difference Euler operator: sum of d/du[i,j] shifted back by (-i, -j)."""
    total = GridPolynomial.zero()
    for i, j in sorted(p.variables()):
        total = total + sym_shift(partial(p, (i, j)), -i, -j)
    return total


def specialize_lambda(p: GridPolynomial, value=0) -> GridPolynomial:
    """Substitute an exact number for ``lam``."""
    value = Fraction(value)

    def sub(c: SymCoeff) -> SymCoeff:
        out: dict = {}
        for (a, b, r), k in c.terms.items():
            if r and not value:
                continue
            out[(a, b, 0)] = out.get((a, b, 0), 0) + k * value**r
        return SymCoeff(out)

    return p.map_coeffs(sub)


def lambda_derivative(p: GridPolynomial) -> GridPolynomial:
    def d(c: SymCoeff) -> SymCoeff:
        return SymCoeff({(a, b, r - 1): k * r for (a, b, r), k in c.terms.items() if r})

    return p.map_coeffs(d)


# --- the EC(lam) scheme and its energy law ---------------------------------


def _phi_minus_one(with_lambda: bool = True) -> GridPolynomial:
    """The stencil function at offset -1, as written on the 10-point stencil."""
    um1, um2 = u(-1, 0), u(-2, 0)
    p = Fraction(1, 3) * sym_avg_n(um1 * um1) * sym_avg_n(um1) + sym_avg_n(
        sym_diff_m(sym_diff_m(um2))
    )
    if with_lambda:
        p = p + sym_diff_m(sym_diff_n(sym_avg_m(um2))) * (LAM * DX * DX)
    return p


def build_scheme_symbolic(with_lambda: bool = True) -> GridPolynomial:
    """``D_m(mu_m phi_{-1,0}) + D_n u_{0,0}`` with symbolic lam, dx, dt."""
    return sym_diff_m(sym_avg_m(_phi_minus_one(with_lambda))) + sym_diff_n(u(0, 0))


def build_characteristic_symbolic(with_lambda: bool = True) -> GridPolynomial:
    """Energy characteristic ``phi_{0,0}``."""
    return sym_shift(_phi_minus_one(with_lambda), 1, 0)


def energy_density_symbolic() -> GridPolynomial:
    u0 = u(0, 0)
    return Fraction(1, 12) * u0**4 + _HALF * u0 * sym_diff_m(sym_diff_m(u(-1, 0)))


def energy_flux_symbolic(with_lambda: bool = True, include_lambda_term: bool = True):
    um1 = u(-1, 0)
    flux = (
        _phi_minus_one(with_lambda) * build_characteristic_symbolic(with_lambda)
        + sym_diff_m(sym_avg_n(um1)) * sym_diff_n(sym_avg_m(um1))
        - sym_avg_m(sym_avg_n(um1)) * sym_diff_m(sym_diff_n(um1))
    )
    if with_lambda and include_lambda_term:
        flux = flux + sym_diff_n(u(0, 0)) * sym_diff_n(um1) * (LAM * DX * DX)
    return flux * _HALF


@dataclass(frozen=True)
class KernelCheck:
    """Outcome of a kernel test; ``witness`` is the nonzero Euler image on failure."""

    name: str
    passed: bool
    witness: GridPolynomial

    def __bool__(self):
        return self.passed


def verify_kernel(p: GridPolynomial, name: str = "kernel") -> KernelCheck:
    w = euler(p)
    return KernelCheck(name, w.is_zero(), w)


def energy_divergence_defect(
    scheme: GridPolynomial | None = None,
    characteristic: GridPolynomial | None = None,
    flux: GridPolynomial | None = None,
    density: GridPolynomial | None = None,
) -> GridPolynomial:
    """``Q3*A - D_m(F3) - D_n(G3)`` expanded exactly."""
    scheme = build_scheme_symbolic() if scheme is None else scheme
    characteristic = build_characteristic_symbolic() if characteristic is None else characteristic
    flux = energy_flux_symbolic() if flux is None else flux
    density = energy_density_symbolic() if density is None else density
    return characteristic * scheme - sym_diff_m(flux) - sym_diff_n(density)


def verify_energy_divergence(**parts) -> KernelCheck:
    d = energy_divergence_defect(**parts)
    return KernelCheck("energy divergence", d.is_zero(), d)


def verify_all(
    scheme: GridPolynomial | None = None,
    characteristic: GridPolynomial | None = None,
    flux: GridPolynomial | None = None,
    density: GridPolynomial | None = None,
) -> list[KernelCheck]:
    """Mass kernel, energy kernel and the explicit energy divergence."""
    scheme = build_scheme_symbolic() if scheme is None else scheme
    characteristic = build_characteristic_symbolic() if characteristic is None else characteristic
    energy = verify_energy_divergence(
        scheme=scheme, characteristic=characteristic, flux=flux, density=density
    )
    return [
        verify_kernel(scheme, "mass: E(A) = 0"),
        verify_kernel(characteristic * scheme, "energy: E(Q3 A) = 0"),
        KernelCheck("energy: Q3 A = D_m F3 + D_n G3", energy.passed, energy.witness),
    ]
