"""Polynomial matrices in z with exponents in (1/3)Z, gauge actions and a
term-by-term formal gauge solver.

Exponents are stored as integer numerators over the fixed denominator 3, so
all z-bookkeeping is exact.  Coefficients are complex doubles, except that
exact numbers (int, Fraction) pass through untouched, which gives an exact
rational mode for free.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Number

import numpy as np

DENOM = 3
PRUNE_TOL = 1e-14


class SingularGaugeError(ValueError):
    """Raised when a gauge matrix has no inverse over Laurent polynomials."""


class ResonanceObstruction(ArithmeticError):
    """The formal gauge equation has no solution at a given order."""

    def __init__(self, order: int, residual: float):
        super().__init__(f"resonance obstruction at order {order} (residual {residual:.3e})")
        self.order = order
        self.residual = residual


def _negligible(c) -> bool:
    if isinstance(c, (int, Fraction)):
        return c == 0
    return abs(c) <= PRUNE_TOL


def _numerator(exponent) -> int:
    num = Fraction(exponent) * DENOM
    if num.denominator != 1:
        raise ValueError(f"exponent {exponent} is not a multiple of 1/{DENOM}")
    return int(num)


class ThirdPoly:
    """Laurent–Puiseux polynomial sum_k c_k z^(k/3), immutable."""

    __slots__ = ("_c",)

    def __init__(self, coeffs: dict[int, Number] | None = None):
        c = {}
        for k, v in (coeffs or {}).items():
            if not _negligible(v):
                c[int(k)] = v
        self._c = c

    @classmethod
    def const(cls, c) -> "ThirdPoly":
        return cls({0: c})

    @classmethod
    def monomial(cls, c, exponent=1) -> "ThirdPoly":
        """c * z**exponent, exponent an int or a Fraction with denominator 3."""
        return cls({_numerator(exponent): c})

    @staticmethod
    def coerce(x) -> "ThirdPoly":
        if isinstance(x, ThirdPoly):
            return x
        return ThirdPoly.const(x)

    @property
    def terms(self) -> dict[int, Number]:
        """Copy of the {numerator: coefficient} map."""
        return dict(self._c)

    def coefficient(self, exponent) -> Number:
        return self._c.get(_numerator(exponent), 0)

    def exponents(self) -> list[Fraction]:
        return [Fraction(k, DENOM) for k in sorted(self._c)]

    def is_zero(self) -> bool:
        return not self._c

    def max_abs(self) -> float:
        return max((abs(v) for v in self._c.values()), default=0.0)

    def __add__(self, other):
        other = ThirdPoly.coerce(other)
        c = dict(self._c)
        for k, v in other._c.items():
            c[k] = c.get(k, 0) + v
        return ThirdPoly(c)

    __radd__ = __add__

    def __neg__(self):
        return ThirdPoly({k: -v for k, v in self._c.items()})

    def __sub__(self, other):
        return self + (-ThirdPoly.coerce(other))

    def __rsub__(self, other):
        return ThirdPoly.coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, ThirdPoly):
            return ThirdPoly({k: v * other for k, v in self._c.items()})
        c: dict[int, Number] = {}
        for k1, v1 in self._c.items():
            for k2, v2 in other._c.items():
                c[k1 + k2] = c.get(k1 + k2, 0) + v1 * v2
        return ThirdPoly(c)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return ThirdPoly({k: v / scalar for k, v in self._c.items()})

    def __eq__(self, other):
        if isinstance(other, Number):
            other = ThirdPoly.const(other)
        if not isinstance(other, ThirdPoly):
            return NotImplemented
        return self._c == other._c

    def __hash__(self):
        return hash(frozenset(self._c.items()))

    def allclose(self, other, tol: float = 1e-12) -> bool:
        return (self - ThirdPoly.coerce(other)).max_abs() <= tol

    def euler_derivative(self) -> "ThirdPoly":
        """Apply z d/dz: z^e -> e z^e."""
        return ThirdPoly({k: v * Fraction(k, DENOM) if isinstance(v, (int, Fraction))
                          else v * (k / DENOM) for k, v in self._c.items()})

    def monomial_inverse(self) -> "ThirdPoly":
        if len(self._c) != 1:
            raise ZeroDivisionError("only monomials are invertible")
        (k, v), = self._c.items()
        inv = Fraction(1) / v if isinstance(v, (int, Fraction)) else 1 / v
        return ThirdPoly({-k: inv})

    def __call__(self, z: complex) -> complex:
        """Numerical value, principal branch of z**(1/3)."""
        r = cmath.exp(cmath.log(z) / DENOM) if self._c and z != 0 else 0
        return sum(v * r ** k for k, v in self._c.items())

    def __repr__(self):
        if not self._c:
            return "ThirdPoly(0)"
        parts = [f"({v})*z^({Fraction(k, DENOM)})" for k, v in sorted(self._c.items())]
        return "ThirdPoly(" + " + ".join(parts) + ")"


def poly_arith(a: ThirdPoly, b, op: str) -> ThirdPoly:
    """Dispatch form of the ring operations: op in {'add', 'mul', 'scale'}."""
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "scale":
        return a * b
    raise ValueError(f"unknown op {op!r}")


def euler_derivative(p):
    return p.euler_derivative()


Z = ThirdPoly.monomial(1, 1)


class MatPoly:
    """Square matrix of ThirdPoly entries (n = 2 or 3 in practice)."""

    __slots__ = ("rows",)

    def __init__(self, rows):
        rows = tuple(tuple(ThirdPoly.coerce(e) for e in r) for r in rows)
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ValueError("MatPoly must be square")
        self.rows = rows

    @property
    def n(self) -> int:
        return len(self.rows)

    @classmethod
    def identity(cls, n: int) -> "MatPoly":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def diag(cls, *entries) -> "MatPoly":
        n = len(entries)
        return cls([[entries[i] if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def from_coefficients(cls, coeffs: dict) -> "MatPoly":
        """Build sum_e C_e z^e from {exponent: n x n array}."""
        items = list(coeffs.items())
        n = np.asarray(items[0][1]).shape[0]
        out = cls.zeros(n)
        for e, C in items:
            C = np.asarray(C)
            out = out + cls([[ThirdPoly.monomial(C[i, j], e) for j in range(n)] for i in range(n)])
        return out

    @classmethod
    def zeros(cls, n: int) -> "MatPoly":
        return cls([[0] * n for _ in range(n)])

    def __getitem__(self, ij) -> ThirdPoly:
        i, j = ij
        return self.rows[i][j]

    def map(self, fn) -> "MatPoly":
        return MatPoly([[fn(e) for e in r] for r in self.rows])

    def __add__(self, other):
        return MatPoly([[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)])

    def __sub__(self, other):
        return MatPoly([[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)])

    def __neg__(self):
        return self.map(lambda e: -e)

    def __mul__(self, scalar):
        return self.map(lambda e: e * scalar)

    __rmul__ = __mul__

    def __matmul__(self, other):
        n = self.n
        out = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = ThirdPoly()
                for k in range(n):
                    a, b = self.rows[i][k], other.rows[k][j]
                    if a._c and b._c:
                        acc = acc + a * b
                row.append(acc)
            out.append(row)
        return MatPoly(out)

    def trace(self) -> ThirdPoly:
        acc = ThirdPoly()
        for i in range(self.n):
            acc = acc + self.rows[i][i]
        return acc

    def transpose(self) -> "MatPoly":
        return MatPoly([list(c) for c in zip(*self.rows)])

    def det(self) -> ThirdPoly:
        m = self.rows
        if self.n == 1:
            return m[0][0]
        if self.n == 2:
            return m[0][0] * m[1][1] - m[0][1] * m[1][0]
        if self.n == 3:
            return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                    - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                    + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))
        raise NotImplementedError("det only for n <= 3")

    def adjugate(self) -> "MatPoly":
        m = self.rows
        n = self.n
        if n == 2:
            return MatPoly([[m[1][1], -m[0][1]], [-m[1][0], m[0][0]]])
        if n != 3:
            raise NotImplementedError("adjugate only for n = 2, 3")
        cof = [[None] * 3 for _ in range(3)]
        for i in range(3):
            for j in range(3):
                r = [x for x in range(3) if x != i]
                c = [x for x in range(3) if x != j]
                minor = m[r[0]][c[0]] * m[r[1]][c[1]] - m[r[0]][c[1]] * m[r[1]][c[0]]
                cof[j][i] = minor if (i + j) % 2 == 0 else -minor
        return MatPoly(cof)

    def inverse(self) -> "MatPoly":
        """Inverse over Laurent polynomials; the determinant must be a monomial."""
        try:
            dinv = self.det().monomial_inverse()
        except ZeroDivisionError:
            raise SingularGaugeError("singular gauge") from None
        return self.adjugate() * dinv

    def euler_derivative(self) -> "MatPoly":
        return self.map(ThirdPoly.euler_derivative)

    def max_abs(self) -> float:
        return max(e.max_abs() for r in self.rows for e in r)

    def exponents(self) -> list[Fraction]:
        ex = {e for r in self.rows for p in r for e in p.exponents()}
        return sorted(ex)

    def coefficient(self, exponent) -> np.ndarray:
        return np.array([[e.coefficient(exponent) for e in r] for r in self.rows], dtype=complex)

    def is_zero(self) -> bool:
        return all(e.is_zero() for r in self.rows for e in r)

    def allclose(self, other: "MatPoly", tol: float = 1e-12) -> bool:
        return (self - other).max_abs() <= tol

    def __eq__(self, other):
        return isinstance(other, MatPoly) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __call__(self, z: complex) -> np.ndarray:
        return np.array([[e(z) for e in r] for r in self.rows], dtype=complex)

    def __repr__(self):
        return "MatPoly(" + repr([list(r) for r in self.rows]) + ")"


def commutator(a: MatPoly, b: MatPoly) -> MatPoly:
    return a @ b - b @ a


def gauge_transform(A: MatPoly, g: MatPoly) -> MatPoly:
    """Return g^-1 A g + g^-1 (z d/dz g).

    If (z d/dz + A) v = 0 and v = g w, then (z d/dz + A') w = 0.
    """
    ginv = g.inverse()
    return ginv @ A @ g + ginv @ g.euler_derivative()


@dataclass(frozen=True)
class GaugeSeries:
    """Truncated formal gauge U = sum_k U_k w^k with w = z (at 0) or 1/z (at infinity)."""

    terms: tuple
    direction: str
    order: int
    _cond: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_cond", float(np.linalg.cond(self.terms[0])))

    @property
    def condition_number(self) -> float:
        return self._cond

    def as_matpoly(self) -> MatPoly:
        sign = 1 if self.direction == "0" else -1
        return MatPoly.from_coefficients({sign * k: U for k, U in enumerate(self.terms)})

    def residual(self, A: MatPoly, A2: MatPoly) -> float:
        """Max coefficient of A U + z dU/dz - U A2 up to the truncation order."""
        U = self.as_matpoly()
        R = A @ U + U.euler_derivative() - U @ A2
        sign = 1 if self.direction == "0" else -1
        return max(np.abs(R.coefficient(sign * k)).max() for k in range(self.order + 1))


def _series_coefficients(A: MatPoly, sign: int, order: int) -> list[np.ndarray]:
    for e in A.exponents():
        if e.denominator != 1 or sign * e < 0:
            where = "0" if sign == 1 else "infinity"
            raise ValueError(f"operator has exponent {e}, not holomorphic at {where}")
    return [A.coefficient(sign * k) for k in range(order + 1)]


def formal_gauge_equivalence(A: MatPoly, A2: MatPoly, point: str = "0", order: int = 8,
                             u0=None, tol: float = 1e-10) -> GaugeSeries:
    """Solve A U + z dU/dz = U A2 term by term for a formal series U.

    ``point`` is "0" (U in C[[z]]) or "inf" (U in C[[1/z]]).  U_0 defaults to
    the identity.  Each order k is the Sylvester-type system
    (s k + L_{A_0} - R_{A2_0}) U_k = rhs, s = +1 at 0 and -1 at infinity.
    A singular system is accepted when the right-hand side is in its range
    (minimal-norm solution); otherwise ResonanceObstruction is raised.
    """
    if point in ("0", 0):
        sign, direction = 1, "0"
    elif point in ("inf", "infinity", "oo"):
        sign, direction = -1, "inf"
    else:
        raise ValueError(f"point must be '0' or 'inf', got {point!r}")
    n = A.n
    Ac = _series_coefficients(A, sign, order)
    Bc = _series_coefficients(A2, sign, order)
    U = [np.eye(n, dtype=complex) if u0 is None else np.asarray(u0, dtype=complex)]
    r0 = np.abs(Ac[0] @ U[0] - U[0] @ Bc[0]).max()
    if r0 > tol:
        raise ResonanceObstruction(0, r0)
    eye = np.eye(n)
    base = np.kron(Ac[0], eye) - np.kron(eye, Bc[0].T)
    for k in range(1, order + 1):
        rhs = np.zeros((n, n), dtype=complex)
        for j in range(1, k + 1):
            rhs -= Ac[j] @ U[k - j] - U[k - j] @ Bc[j]
        op = sign * k * np.eye(n * n) + base
        sol, *_ = np.linalg.lstsq(op, rhs.reshape(-1), rcond=1e-13)
        res = np.abs(op @ sol - rhs.reshape(-1)).max()
        if res > tol * max(1.0, np.abs(rhs).max()):
            raise ResonanceObstruction(k, res)
        U.append(sol.reshape(n, n))
    return GaugeSeries(tuple(U), direction, order)
