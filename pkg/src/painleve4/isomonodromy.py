"""The rank-2 Lax pair above the ST2 chart, its isomonodromy flow and PIV.

Compatibility convention: d/dt A = z d/dz B + [A, B].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import MatPoly, ThirdPoly, commutator
from .ode import PoleError, Trajectory, fd_derivative, integrate, uniform_spacing
from .rank2_moduli import ThetaParams

__all__ = [
    "PIVState", "LaxPairData", "PoleError", "Trajectory", "piv_rhs", "piv_system",
    "lax_A", "lax_B", "lax_residual", "flow_rhs", "flow_system", "integrate",
    "riccati_rhs", "reducible_lax_residual", "piv_fd_residual",
]


@dataclass(frozen=True)
class PIVState:
    t: complex
    q: complex
    qprime: complex


def piv_rhs(s: PIVState, p: ThetaParams) -> complex:
    """q'' of PIV with parameters (theta0, thetainf)."""
    t, q, qp = s.t, s.q, s.qprime
    if q == 0:
        raise PoleError("PIV right-hand side is singular at q = 0")
    return (qp * qp / (2 * q) + 1.5 * q ** 3 + t * q * q
            + q * (4 * p.thetainf + t * t) / 8 - (p.theta0 - 1) ** 2 / (8 * q))


def piv_system(p: ThetaParams):
    """First-order form y = (q, q') for ``integrate``."""
    def rhs(t, y):
        return np.array([y[1], piv_rhs(PIVState(t, y[0], y[1]), p)])
    return rhs


@dataclass(frozen=True)
class LaxPairData:
    q: complex
    a0: complex
    t: complex
    params: ThetaParams

    def __post_init__(self):
        if self.q == 0:
            raise PoleError("q = 0: b_{-1} has a pole")

    @property
    def b1(self):
        return self.t + self.q

    @property
    def b0(self):
        return self.q * (self.t + self.q) + self.params.thetainf + self.t ** 2 / 4

    @property
    def b_1(self):
        k = self.params.theta0 / 2 - 0.5
        return ((self.a0 - 0.5) ** 2 - k * k) / self.q


def lax_A(d: LaxPairData) -> MatPoly:
    b = ThirdPoly({6: 1, 3: d.b1, 0: d.b0, -3: d.b_1})
    c = ThirdPoly({6: 1, 3: -d.q})
    return MatPoly([[d.a0, b], [c, -d.a0]])


def lax_B(d: LaxPairData) -> MatPoly:
    B1 = ThirdPoly({-3: (d.q * (d.q + d.b1) + d.b0) / 2, 0: (d.b1 + d.q) / 2, 3: 0.5})
    B2 = ThirdPoly({3: 0.5})
    return MatPoly([[0, B1], [B2, 0]])


def _dA_dt(d: LaxPairData, qdot, a0dot) -> MatPoly:
    """Total t-derivative of lax_A by the chain rule through t, q, a0."""
    q, a0, t = d.q, d.a0, d.t
    k = d.params.theta0 / 2 - 0.5
    num = (a0 - 0.5) ** 2 - k * k
    db_1 = (2 * (a0 - 0.5) * a0dot * q - num * qdot) / q ** 2
    db1 = 1 + qdot
    db0 = qdot * (t + q) + q * (1 + qdot) + t / 2
    db = ThirdPoly({3: db1, 0: db0, -3: db_1})
    dc = ThirdPoly({3: -qdot})
    return MatPoly([[a0dot, db], [dc, -a0dot]])


def lax_residual(d: LaxPairData, qdot, a0dot) -> MatPoly:
    """dA/dt - z dB/dz - [A, B]; the zero polynomial exactly on the flow."""
    A, B = lax_A(d), lax_B(d)
    return _dA_dt(d, qdot, a0dot) - B.euler_derivative() - commutator(A, B)


def flow_rhs(t, state, p: ThetaParams) -> tuple[complex, complex]:
    """(q', a0') of the isomonodromy flow."""
    q, a0 = state
    d = LaxPairData(q, a0, t, p)
    return a0 - 0.5, (d.b_1 + q * (q * (d.b1 + q) + d.b0)) / 2


def flow_system(p: ThetaParams):
    def rhs(t, y):
        return np.array(flow_rhs(t, (y[0], y[1]), p))
    return rhs


def riccati_rhs(t, q, d, sign: int = 1) -> complex:
    if sign == 1:
        return q * q + t * q / 2 + (d - 1) / 2
    if sign == -1:
        return -q * q - t * q / 2 - (d + 1) / 2
    raise ValueError("sign must be +1 or -1")


def reducible_lax_residual(q, qdot, t, d, sign: int = 1) -> MatPoly:
    """Compatibility residual of the reducible pair

    z d/dz + [[s w, 0], [z^2 - q z, -s w]],  d/dt + [[tau, 0], [z/2, -tau]],
    w = z^2 + t z/2 + d/2, tau = s (2z + 2q + t)/4 (s = sign).
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    w = ThirdPoly({6: sign, 3: sign * t / 2, 0: sign * d / 2})
    tau = ThirdPoly({3: sign / 2, 0: sign * (2 * q + t) / 4})
    A = MatPoly([[w, 0], [ThirdPoly({6: 1, 3: -q}), -w]])
    B = MatPoly([[tau, 0], [ThirdPoly({3: 0.5}), -tau]])
    dA = MatPoly([[ThirdPoly({3: sign / 2}), 0], [ThirdPoly({3: -qdot}), ThirdPoly({3: -sign / 2})]])
    return dA - B.euler_derivative() - commutator(A, B)


def piv_fd_residual(t, q, qp, p: ThetaParams) -> np.ndarray:
    """|d(q')/dt - piv_rhs| with d/dt taken by fourth-order finite differences.

    ``t`` must be uniformly spaced along a straight segment.
    """
    h = uniform_spacing(t)
    qpp = fd_derivative(qp, h)
    rhs = np.array([piv_rhs(PIVState(*s), p) for s in zip(t, q, qp)])
    return np.abs(qpp - rhs)
