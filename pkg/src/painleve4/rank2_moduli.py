"""Rank-2 connections z d/dz + [[a, b], [c, -a]] on O e1 + O(-[0]) e2.

a = a0 + a1 z + a2 z^2, b = b_{-1}/z + b0 + b1 z + b2 z^2, c = c1 z + c2 z^2.
The two standard charts ST1 (c1 = 1, a = a2 z^2) and ST2 (c2 = 1, a = a0)
cover the moduli space; ``normalize_to_chart`` moves a general point into
either chart with an element of the group
G = {e1 -> e1, e2 -> lam e2 + (x0 + x1/z) e1}.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .algebra import MatPoly, ThirdPoly, gauge_transform

RELATION_TOL = 1e-10


class ChartDomainError(ValueError):
    """The point is not in the domain of the requested chart."""


@dataclass(frozen=True)
class ThetaParams:
    theta0: complex
    thetainf: complex

    @property
    def beta(self) -> complex:
        return cmath.exp(1j * cmath.pi * self.theta0)

    @property
    def alpha(self) -> complex:
        return cmath.exp(1j * cmath.pi * self.thetainf)

    @property
    def b_minus1_st1(self) -> complex:
        h = self.theta0 / 2
        return h * (h - 1)


def _infinity_rhs(p: ThetaParams, t: complex) -> complex:
    return p.thetainf + t * t / 4


@dataclass(frozen=True)
class ST1Point:
    """First standard form: a = a2 z^2, c = z + c2 z^2."""

    a2: complex
    c2: complex
    t: complex
    b0: complex
    params: ThetaParams

    def __post_init__(self):
        r = self.relation()
        if abs(r) > RELATION_TOL * max(1.0, abs(self.a2) ** 2):
            raise ValueError(f"ST1 relation violated (residual {abs(r):.3e})")

    def relation(self) -> complex:
        X = _infinity_rhs(self.params, self.t) - self.b0 * self.c2
        return self.a2 ** 2 + self.c2 * self.t - self.c2 ** 2 * X - 1

    @classmethod
    def from_free(cls, c2, t, b0, params: ThetaParams, branch: int = 1) -> "ST1Point":
        """Solve the chart relation for a2 (branch +1/-1 picks the square root)."""
        X = _infinity_rhs(params, t) - b0 * c2
        a2 = branch * cmath.sqrt(1 - c2 * t + c2 ** 2 * X)
        return cls(a2, c2, t, b0, params)


@dataclass(frozen=True)
class ST2Point:
    """Second standard form: a = a0, c = c1 z + z^2, b2 = 1."""

    a0: complex
    c1: complex
    t: complex
    b_1: complex
    params: ThetaParams

    def __post_init__(self):
        r = self.relation()
        if abs(r) > RELATION_TOL * max(1.0, abs(self.a0) ** 2, abs(self.b_1 * self.c1)):
            raise ValueError(f"ST2 relation violated (residual {abs(r):.3e})")

    def relation(self) -> complex:
        return self.a0 * (self.a0 - 1) + self.b_1 * self.c1 - self.params.b_minus1_st1

    @classmethod
    def from_free(cls, a0, c1, t, params: ThetaParams) -> "ST2Point":
        """Solve the chart relation for b_{-1}; needs c1 != 0."""
        if c1 == 0:
            raise ValueError("c1 = 0: b_{-1} is not determined by the relation")
        b_1 = (params.b_minus1_st1 - a0 * (a0 - 1)) / c1
        return cls(a0, c1, t, b_1, params)


@dataclass(frozen=True)
class GeneralPoint:
    a0: complex
    a1: complex
    a2: complex
    b_1: complex
    b0: complex
    b1: complex
    b2: complex
    c1: complex
    c2: complex
    t: complex
    params: ThetaParams

    def matrix(self) -> MatPoly:
        z = ThirdPoly.monomial
        a = ThirdPoly({0: self.a0, 3: self.a1, 6: self.a2})
        b = ThirdPoly({-3: self.b_1, 0: self.b0, 3: self.b1, 6: self.b2})
        c = z(self.c1, 1) + z(self.c2, 2)
        return MatPoly([[a, b], [c, -a]])

    @classmethod
    def from_matrix(cls, A: MatPoly, t, params: ThetaParams, tol: float = 1e-9) -> "GeneralPoint":
        a, b, c = A[0, 0], A[0, 1], A[1, 0]
        if not (A[1, 1] + a).max_abs() <= tol:
            raise ValueError("matrix is not traceless")
        allowed = {"a": (0, 1, 2), "b": (-1, 0, 1, 2), "c": (1, 2)}
        for name, p in (("a", a), ("b", b), ("c", c)):
            for e in p.exponents():
                if e not in allowed[name] and abs(p.coefficient(e)) > tol:
                    raise ValueError(f"entry {name} has a term z^{e} outside the chart shape")
        return cls(a.coefficient(0), a.coefficient(1), a.coefficient(2),
                   b.coefficient(-1), b.coefficient(0), b.coefficient(1), b.coefficient(2),
                   c.coefficient(1), c.coefficient(2), t, params)


def st1_general(p: ST1Point) -> GeneralPoint:
    X = _infinity_rhs(p.params, p.t) - p.b0 * p.c2
    b2 = -p.c2 * X + p.t
    return GeneralPoint(0, 0, p.a2, p.params.b_minus1_st1, p.b0, X, b2, 1, p.c2, p.t, p.params)


def st2_general(p: ST2Point) -> GeneralPoint:
    b1 = p.t - p.c1
    b0 = _infinity_rhs(p.params, p.t) - b1 * p.c1
    return GeneralPoint(p.a0, 0, 0, p.b_1, b0, b1, 1, p.c1, 1, p.t, p.params)


def st1_matrix(p: ST1Point) -> MatPoly:
    return st1_general(p).matrix()


def st2_matrix(p: ST2Point) -> MatPoly:
    return st2_general(p).matrix()


def check_local_data(g: GeneralPoint) -> np.ndarray:
    """Residuals of the three equations at z = infinity and the one at z = 0."""
    t, p = g.t, g.params
    return np.array([
        g.a2 ** 2 + g.b2 * g.c2 - 1,
        2 * g.a1 * g.a2 + g.b2 * g.c1 + g.b1 * g.c2 - t,
        2 * g.a0 * g.a2 + g.a1 ** 2 + g.b1 * g.c1 + g.b0 * g.c2 - _infinity_rhs(p, t),
        g.a0 * (g.a0 - 1) + g.b_1 * g.c1 - p.b_minus1_st1,
    ], dtype=complex)


def group_element(lam, x0, x1) -> MatPoly:
    """Gauge matrix of e2 -> lam e2 + (x0 + x1/z) e1."""
    if lam == 0:
        raise ValueError("lam must be nonzero")
    return MatPoly([[1, ThirdPoly({0: x0, -3: x1})], [0, lam]])


def act(g: GeneralPoint, lam, x0, x1) -> GeneralPoint:
    A = gauge_transform(g.matrix(), group_element(lam, x0, x1))
    return GeneralPoint.from_matrix(A, g.t, g.params)


def normalize_to_chart(g: GeneralPoint, prefer: str = "ST2") -> ST1Point | ST2Point:
    """Gauge a general point into ST1 or ST2.

    lam normalizes the leading c-coefficient, then x0 and x1 are fixed by
    back-substitution so that the unwanted a-coefficients vanish.
    """
    if prefer == "ST2":
        if abs(g.c2) == 0:
            raise ChartDomainError("not in chart domain: c2 = 0")
        lam = g.c2
        x0 = g.a2
        x1 = (g.a1 * g.c2 - x0 * g.c1) / g.c2
        h = act(g, lam, x0, x1)
        return ST2Point(h.a0, h.c1, h.t, h.b_1, h.params)
    if prefer == "ST1":
        if abs(g.c1) == 0:
            raise ChartDomainError("not in chart domain: c1 = 0")
        lam = g.c1
        x1 = g.a0
        x0 = (g.a1 * g.c1 - x1 * g.c2) / g.c1
        h = act(g, lam, x0, x1)
        return ST1Point(h.a2, h.c2, h.t, h.b0, h.params)
    raise ValueError(f"prefer must be 'ST1' or 'ST2', got {prefer!r}")


def st1_to_st2(p: ST1Point) -> ST2Point:
    return normalize_to_chart(st1_general(p), "ST2")


def st2_to_st1(p: ST2Point) -> ST1Point:
    return normalize_to_chart(st2_general(p), "ST1")


def detect_singular_st2(p: ST2Point, tol: float = 1e-10) -> bool:
    """The unique singular point of the ST2 surface: theta0 = 1, a0 = 1/2, b_{-1} = c1 = 0."""
    return (abs(p.params.theta0 - 1) <= tol and abs(p.a0 - 0.5) <= tol
            and abs(p.b_1) <= tol and abs(p.c1) <= tol)


def _exact(x) -> Fraction:
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    raise TypeError(f"presence predicates need exact rationals, got {type(x).__name__}")


def _is_int(x: Fraction) -> bool:
    return x.denominator == 1


def reducible_presence(theta0, thetainf) -> tuple[bool, bool]:
    """Which reducible types (1), (2) are present in M(theta0, thetainf).

    Needs theta0/2 in +-thetainf/2 + Z; the inequalities are exact.
    """
    t0, ti = _exact(theta0), _exact(thetainf)
    plus = _is_int((t0 - ti) / 2)
    minus = _is_int((t0 + ti) / 2)
    if plus and not minus:
        return t0 >= ti, t0 <= ti + 2
    if minus and not plus:
        return t0 <= -ti + 2, t0 >= -ti
    if plus and minus:
        return t0 >= ti or t0 <= -ti + 2, t0 <= ti + 2 or t0 >= -ti
    return False, False


# branch -> (sign of a2, sign inside the theta0 relation)
_B0_BRANCHES = {1: (1, 1), 2: (1, -1), 3: (-1, 1), 4: (-1, -1)}
# reducible type whose inequality is an equality on each branch
B0_BRANCH_TYPE = {1: 1, 2: 1, 3: 2, 4: 2}


def b0_branch_constraint(theta0, thetainf, branch: int):
    """s*thetainf/2 - (1/2 + e (theta0/2 - 1/2)); zero on the branch."""
    s, e = _B0_BRANCHES[branch]
    half = Fraction(1, 2) if isinstance(theta0, (int, Fraction)) and isinstance(thetainf, (int, Fraction)) else 0.5
    return s * thetainf * half - (half + e * (theta0 * half - half))


def reducible_family_b0(theta0, thetainf, t, branch: int, c=(1, 0), tol: float = 1e-12) -> GeneralPoint:
    """The b = 0 reducible families; ``c`` = (c1, c2) is any nonzero pair."""
    if branch not in _B0_BRANCHES:
        raise ValueError("branch must be 1, 2, 3 or 4")
    if abs(b0_branch_constraint(theta0, thetainf, branch)) > tol:
        raise ValueError(f"branch {branch} constraint violated for theta=({theta0}, {thetainf})")
    if c[0] == 0 and c[1] == 0:
        raise ValueError("c must be nonzero")
    s = _B0_BRANCHES[branch][0]
    params = ThetaParams(complex(theta0), complex(thetainf))
    return GeneralPoint(s * thetainf / 2, s * t / 2, s, 0, 0, 0, 0, c[0], c[1], t, params)
