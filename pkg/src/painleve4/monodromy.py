"""Monodromy data: rank-2 Stokes products, the rank-3 space of x = (x1..x4),
its characteristic polynomial, singular fibres, Jordan data and flags."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.linalg import null_space

RANK_THRESHOLD = 1e-8
INDETERMINATE_BAND = (1e-10, 1e-6)


class InternalConsistencyError(AssertionError):
    """Two routes to the same matrix disagree."""


def _exact(*xs) -> bool:
    return all(isinstance(x, (int, Fraction)) for x in xs)


def _array(rows, exact: bool) -> np.ndarray:
    if exact:
        return np.array([[Fraction(v) for v in r] for r in rows], dtype=object)
    return np.array(rows, dtype=complex)


# --- rank 2 -----------------------------------------------------------------

@dataclass(frozen=True)
class Rank2Stokes:
    alpha: complex
    a1: complex
    a2: complex
    a3: complex
    a4: complex
    allow_zero: bool = False

    def __post_init__(self):
        if self.alpha == 0:
            raise ValueError("alpha must be nonzero")
        if not self.allow_zero and self.a1 == self.a2 == self.a3 == self.a4 == 0:
            raise ValueError("a1 = a2 = a3 = a4 = 0 is the excluded direct-sum case")


def rank2_top_monodromy(s: Rank2Stokes) -> np.ndarray:
    """diag(alpha, 1/alpha) L(a1) U(a2) L(a3) U(a4)."""
    ex = _exact(s.alpha, s.a1, s.a2, s.a3, s.a4)
    one = Fraction(1) if ex else 1
    factors = [
        _array([[s.alpha, 0], [0, one / s.alpha]], ex),
        _array([[1, 0], [s.a1, 1]], ex),
        _array([[1, s.a2], [0, 1]], ex),
        _array([[1, 0], [s.a3, 1]], ex),
        _array([[1, s.a4], [0, 1]], ex),
    ]
    out = factors[0]
    for f in factors[1:]:
        out = out.dot(f)
    return out


def is_reducible_rank2(s: Rank2Stokes) -> bool:
    return (s.a2 == 0 and s.a4 == 0) or (s.a1 == 0 and s.a3 == 0)


@dataclass(frozen=True)
class Rank2FiberData:
    trace: complex
    alpha: complex
    singular: bool


def rank2_fiber_data(s: Rank2Stokes, tol: float = 1e-10) -> Rank2FiberData:
    """(trace of top, alpha) and whether top = +-identity (singular point of the fibre)."""
    M = np.asarray(rank2_top_monodromy(s), dtype=complex)
    sing = any(np.abs(M - sgn * np.eye(2)).max() <= tol for sgn in (1, -1))
    return Rank2FiberData(complex(np.trace(M)), s.alpha, sing)


def rank2_level_param(s: Rank2Stokes, eigchoice=0, tol: float = 1e-9) -> tuple[complex, complex]:
    """Level structure on the parameter side: an eigenvalue beta of top.

    ``eigchoice`` is 0/1 (index into the sorted eigenvalues) or a value that
    must be an eigenvalue.
    """
    M = np.asarray(rank2_top_monodromy(s), dtype=complex)
    tr = np.trace(M)
    if isinstance(eigchoice, int) and eigchoice in (0, 1) and not isinstance(eigchoice, bool):
        ev = sorted(np.linalg.eigvals(M), key=lambda v: (round(v.real, 9), round(v.imag, 9)))
        beta = complex(ev[eigchoice])
    else:
        beta = complex(eigchoice)
        if abs(beta * beta - tr * beta + 1) > tol * max(1, abs(beta) ** 2):
            raise ValueError(f"{beta} is not an eigenvalue of top")
    if abs(beta + 1 / beta - tr) > 1e-8 * max(1.0, abs(tr)):
        raise ValueError("eigenvalue inconsistent with the trace")
    return beta, complex(s.alpha)


# --- rank 3 -----------------------------------------------------------------

@dataclass(frozen=True)
class Rank3Stokes:
    x1: complex
    x2: complex
    x3: complex
    x4: complex

    @property
    def x(self):
        return (self.x1, self.x2, self.x3, self.x4)

    @classmethod
    def special(cls, a) -> "Rank3Stokes":
        """The point (-1/a, a, -1/a, a) where the fibre is singular."""
        inv = Fraction(1) / a if _exact(a) else 1 / a
        return cls(-inv, a, -inv, a)


def stokes_factors(x: Rank3Stokes) -> list[np.ndarray]:
    """Formal monodromy followed by the four Stokes matrices for directions in [0, 2 pi)."""
    ex = _exact(*x.x)
    x1, x2, x3, x4 = x.x
    return [
        _array([[0, 0, 1], [1, 0, 0], [0, 1, 0]], ex),
        _array([[1, 0, 0], [0, 1, 0], [x4, 0, 1]], ex),
        _array([[1, 0, 0], [x3, 1, 0], [0, 0, 1]], ex),
        _array([[1, 0, 0], [0, 1, x2], [0, 0, 1]], ex),
        _array([[1, 0, x1], [0, 1, 0], [0, 0, 1]], ex),
    ]


def closed_form_monodromy(x: Rank3Stokes) -> np.ndarray:
    x1, x2, x3, x4 = x.x
    return _array([[x4, 0, x1 * x4 + 1], [1, 0, x1], [x3, 1, x1 * x3 + x2]], _exact(*x.x))


def rank3_top_monodromy(x: Rank3Stokes, tol: float = 1e-13) -> np.ndarray:
    """Product of the Stokes factors, cross-checked against the closed form."""
    out = None
    for f in stokes_factors(x):
        out = f if out is None else out.dot(f)
    closed = closed_form_monodromy(x)
    if out.dtype == object:
        if not np.all(out == closed):
            raise InternalConsistencyError("Stokes product differs from the closed form")
    else:
        scale = max(1.0, np.abs(closed).max())
        if np.abs(out - closed).max() > tol * scale:
            raise InternalConsistencyError("Stokes product differs from the closed form")
    return out


@dataclass(frozen=True)
class CharPoly3:
    """lambda^3 - e1 lambda^2 + e2 lambda - 1."""

    e1: complex
    e2: complex

    def coefficients(self) -> tuple:
        return (1, -self.e1, self.e2, -1)

    def __call__(self, lam):
        return lam ** 3 - self.e1 * lam ** 2 + self.e2 * lam - 1

    def roots(self) -> np.ndarray:
        return np.roots([1, -complex(self.e1), complex(self.e2), -1])


def rank3_charpoly(x: Rank3Stokes) -> CharPoly3:
    x1, x2, x3, x4 = x.x
    return CharPoly3(x2 + x4 + x1 * x3, -x1 - x3 + x2 * x4)


def charpoly_from_matrix(M: np.ndarray) -> tuple:
    """Coefficients of det(lambda I - M) for 3x3 M by principal minors (exact on Fractions)."""
    tr = M[0, 0] + M[1, 1] + M[2, 2]
    minors = sum(M[i, i] * M[j, j] - M[i, j] * M[j, i] for i, j in ((0, 1), (0, 2), (1, 2)))
    det = (M[0, 0] * (M[1, 1] * M[2, 2] - M[1, 2] * M[2, 1])
           - M[0, 1] * (M[1, 0] * M[2, 2] - M[1, 2] * M[2, 0])
           + M[0, 2] * (M[1, 0] * M[2, 1] - M[1, 1] * M[2, 0]))
    return (1, -tr, minors, -det)


def charpoly_deviation(x: Rank3Stokes) -> float:
    """max |formula - determinant expansion| over the four coefficients."""
    ref = charpoly_from_matrix(rank3_top_monodromy(x))
    got = rank3_charpoly(x).coefficients()
    return float(max(abs(complex(r - g)) for r, g in zip(ref, got)))


def charpoly_jacobian(x: Rank3Stokes) -> np.ndarray:
    """d(e1, e2)/d(x1, x2, x3, x4)."""
    x1, x2, x3, x4 = x.x
    return np.array([[x3, 1, x1, 1], [-1, x4, -1, x2]], dtype=complex)


def _rank(A: np.ndarray) -> tuple[int, bool]:
    """Numerical rank and whether a singular value falls in the indeterminate band."""
    sv = np.linalg.svd(A, compute_uv=False)
    lo, hi = INDETERMINATE_BAND
    return int(np.sum(sv > RANK_THRESHOLD)), bool(np.any((sv >= lo) & (sv <= hi)))


@dataclass(frozen=True)
class SingularityInfo:
    kind: str  # "regular", "A1" or "A2"
    jacobian_rank: int
    eigenvalues: tuple
    geometric_multiplicities: tuple
    jordan_blocks: int
    indeterminate: bool


def _special_parameter(x: Rank3Stokes, tol: float = 1e-8):
    """a with x = (-1/a, a, -1/a, a), or None."""
    x1, x2, x3, x4 = (complex(v) for v in x.x)
    a = x2
    if a == 0:
        return None
    if max(abs(x4 - a), abs(x1 + 1 / a), abs(x3 + 1 / a)) <= tol * max(1, abs(a), abs(1 / a)):
        return a
    return None


def discriminant(cp: CharPoly3) -> complex:
    b, c, d = -complex(cp.e1), complex(cp.e2), -1.0
    return b * b * c * c - 4 * c ** 3 - 4 * b ** 3 * d - 27 * d * d + 18 * b * c * d


def distinct_eigenvalues(cp: CharPoly3, tol: float = 1e-9) -> list[complex]:
    """Distinct roots of cp; repeated roots are read off cp itself rather than
    from clustered eigenvalues, whose spread is of order eps^(1/m)."""
    e1, e2 = complex(cp.e1), complex(cp.e2)
    scale = max(1.0, abs(e1), abs(e2))
    # cp = (lambda - e1/3)^3 + e1^3/27 - 1 when e1^2 = 3 e2
    if abs(e1 * e1 - 3 * e2) <= tol * scale ** 2 and abs(e1 ** 3 - 27) <= tol * scale ** 3:
        return [e1 / 3]
    if abs(discriminant(cp)) <= tol * scale ** 4:
        # double root: the root of P' that is also a root of P
        crit = np.roots([3, -2 * e1, e2])
        a = complex(min(crit, key=lambda r: abs(cp(r))))
        return [a, 1 / (a * a)]
    return [complex(r) for r in cp.roots()]


def fiber_singularity(x: Rank3Stokes) -> SingularityInfo:
    """Classify x in its fibre of (e1, e2) and report Jordan data of M(x).

    The Jacobian of (e1, e2) drops rank exactly at x = (-1/a, a, -1/a, a);
    that point is A2 when a^3 = 1 (triple eigenvalue) and A1 otherwise.
    Geometric multiplicities come from the numerical rank of M - mu I.
    """
    M = np.asarray(rank3_top_monodromy(x), dtype=complex)
    jr, jind = _rank(charpoly_jacobian(x))
    a = _special_parameter(x)
    if jr < 2 and a is not None:
        if abs(a ** 3 - 1) <= 1e-8:
            kind, eig = "A2", [a]
        else:
            kind, eig = "A1", [a, a ** -2]
    else:
        kind = "regular"
        eig = distinct_eigenvalues(rank3_charpoly(x))
    geo, ind = [], jind
    for mu in eig:
        r, flag = _rank(M - mu * np.eye(3))
        geo.append(3 - r)
        ind = ind or flag
    return SingularityInfo(kind, jr, tuple(complex(e) for e in eig), tuple(geo), sum(geo), ind)


# --- flags ------------------------------------------------------------------

@dataclass(frozen=True)
class Flag:
    """Line C y inside the plane ker(zdual), both M(x)-invariant."""

    y: np.ndarray
    zdual: np.ndarray
    mu: tuple

    def residuals(self, M: np.ndarray) -> tuple[float, float, float]:
        y = self.y / np.linalg.norm(self.y)
        z = self.zdual / np.linalg.norm(self.zdual)
        return (float(np.abs(M @ y - self.mu[0] * y).max()),
                float(np.abs(z @ M - self.mu[2] * z).max()),
                float(abs(np.sum(y * z))))


@dataclass(frozen=True)
class FlagFamily:
    component: str  # "empty", "point", "P1", "two-intersecting-P1", "P1xP1"
    flags: tuple
    right_dim: int
    left_dim: int
    pairing_rank: int


def _null(A, tol=RANK_THRESHOLD):
    u, s, vh = np.linalg.svd(A)
    rank = int(np.sum(s > tol))
    return vh[rank:].conj().T


def invariant_flags(x: Rank3Stokes, mu, tol: float = 1e-8, samples: int = 3) -> FlagFamily:
    """All (y, z) with M y = mu1 y, z M = mu3 z and sum y_j z_j = 0.

    The solution set is described by the eigenspace dimensions and the rank of
    the pairing z^T y between them; a few representatives are returned.
    """
    M = np.asarray(rank3_top_monodromy(x), dtype=complex)
    mu = tuple(complex(m) for m in mu)
    if len(mu) != 3 or abs(mu[0] * mu[1] * mu[2] - 1) > tol:
        raise ValueError("mu must be a triple with product 1")
    cp = rank3_charpoly(x)
    roots = sorted(cp.roots(), key=lambda v: (v.real, v.imag))
    want = sorted(mu, key=lambda v: (v.real, v.imag))
    if (max(abs(cp(m)) for m in mu) > tol
            or max(abs(np.poly(mu)[1:] - np.array(cp.coefficients()[1:], dtype=complex))) > 1e-6):
        raise ValueError(f"mu {mu} does not match the spectrum {roots}")
    del want
    Y = _null(M - mu[0] * np.eye(3))
    Zt = _null((M - mu[2] * np.eye(3)).T)
    d1, d3 = Y.shape[1], Zt.shape[1]
    G = Zt.T @ Y  # G[j, i] = z_j . y_i
    gr = int(np.sum(np.linalg.svd(G, compute_uv=False) > tol)) if G.size else 0

    def flag(u, v):
        return Flag(Y @ u, Zt @ v, mu)

    flags = []
    if d1 == 1 and d3 == 1:
        comp = "point" if gr == 0 else "empty"
        if gr == 0:
            flags.append(flag(np.ones(1), np.ones(1)))
    elif (d1, d3) in ((2, 1), (1, 2)):
        if gr == 0:
            comp = "P1"
            for k in range(samples):
                w = np.array([math.cos(k + 0.3), math.sin(k + 0.3)], dtype=complex)
                flags.append(flag(w, np.ones(1)) if d1 == 2 else flag(np.ones(1), w))
        else:
            comp = "point"
            if d1 == 2:
                flags.append(flag(null_space(G)[:, 0], np.ones(1)))
            else:
                flags.append(flag(np.ones(1), null_space(G.T)[:, 0]))
    elif d1 == 2 and d3 == 2:
        if gr == 0:
            comp = "P1xP1"
        elif gr == 1:
            comp = "two-intersecting-P1"
            # G = s * outer(l, r): zero set {r . u = 0} x P1  union  P1 x {l . v = 0}
            U, s, Vh = np.linalg.svd(G)
            u0 = Vh[1].conj()  # r . u0 = 0
            v0 = U[:, 1].conj()  # l . v0 = 0
            flags.append(flag(u0, v0))  # the intersection point
            for k in range(samples):
                w = np.array([math.cos(k + 0.7), math.sin(k + 0.7)], dtype=complex)
                flags.append(flag(u0, w))
                flags.append(flag(w, v0))
        else:
            comp = "P1"  # smooth conic
            for k in range(samples):
                u = np.array([math.cos(k + 0.5), math.sin(k + 0.5)], dtype=complex)
                v = null_space((G @ u)[None, :])[:, 0]
                flags.append(flag(u, v))
    else:
        comp = f"dims({d1},{d3})"
    return FlagFamily(comp, tuple(flags), d1, d3, gr)


# --- singular directions ------------------------------------------------------

ZETA = complex(math.cos(2 * math.pi / 3), math.sin(2 * math.pi / 3))
TABLE_ORDER = ((0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1))


def singular_directions() -> list[tuple[int, int, float, float]]:
    """Rows (k, l, phi, d): phi = arg(zeta^2k - zeta^2l) in [0, 2pi),
    d = 3pi/2 - 3phi/2 reduced to [0, 3pi)."""
    rows = []
    for k, l in TABLE_ORDER:
        w = ZETA ** (2 * k) - ZETA ** (2 * l)
        phi = math.atan2(w.imag, w.real) % (2 * math.pi)
        d = (1.5 * math.pi - 1.5 * phi) % (3 * math.pi)
        rows.append((k, l, phi, d))
    return rows


# (k, l, phi/pi, d/pi) as tabulated for the rank-3 problem
REFERENCE_DIRECTIONS = (
    (0, 1, Fraction(1, 6), Fraction(5, 4)),
    (1, 0, Fraction(7, 6), Fraction(11, 4)),
    (0, 2, Fraction(11, 6), Fraction(7, 4)),
    (2, 0, Fraction(5, 6), Fraction(1, 4)),
    (1, 2, Fraction(9, 6), Fraction(9, 4)),
    (2, 1, Fraction(3, 6), Fraction(3, 4)),
)


def direction_table_deviation() -> float:
    """Largest |computed - reference| over the six (phi, d) pairs."""
    dev = 0.0
    for (k, l, phi, d), (rk, rl, rphi, rd) in zip(singular_directions(), REFERENCE_DIRECTIONS):
        if (k, l) != (rk, rl):
            return math.inf
        dev = max(dev, abs(phi - float(rphi) * math.pi), abs(d - float(rd) * math.pi))
    return dev
