"""Symmetries of the monodromy parameters and Bäcklund maps of PIV.

Group words are sequences of generator indices 1, 2, 3 and always act
right-to-left: ``(2, 1)`` means apply sigma_1 first, then sigma_2.
"""

from __future__ import annotations

import itertools
import warnings
from collections import deque
from dataclasses import dataclass, replace
from fractions import Fraction

from .isomonodromy import PIVState, piv_rhs
from .rank2_moduli import ThetaParams

SINGULAR_MARGIN_WARN = 1e-3


class SingularLocusError(ZeroDivisionError):
    """The Bäcklund map is undefined: the point lies on a Riccati leaf."""

    def __init__(self, leaf_value):
        super().__init__(f"singular locus: Riccati leaf identity value {leaf_value!r}")
        self.leaf_value = leaf_value


def parse_word(word) -> tuple[int, ...]:
    """Accept (2, 1), "21", "s2 s1" or "" (identity)."""
    if isinstance(word, str):
        digits = [ch for ch in word if ch.isdigit()]
        w = tuple(int(ch) for ch in digits)
    else:
        w = tuple(int(x) for x in word)
    if any(g not in (1, 2, 3) for g in w):
        raise ValueError(f"invalid generator in word {word!r}")
    return w


@dataclass(frozen=True)
class MonodromyParamState:
    """(beta, alpha) with t and z scaled by i**t_phase, i**z_phase."""

    beta: complex
    alpha: complex
    t_phase: int = 0
    z_phase: int = 0

    def __post_init__(self):
        if self.beta == 0 or self.alpha == 0:
            raise ValueError("beta and alpha must be nonzero")
        object.__setattr__(self, "t_phase", self.t_phase % 4)
        object.__setattr__(self, "z_phase", self.z_phase % 4)


@dataclass(frozen=True)
class LiftedParamState:
    theta0: complex
    thetainf: complex
    t_phase: int = 0
    z_phase: int = 0

    def __post_init__(self):
        object.__setattr__(self, "t_phase", self.t_phase % 4)
        object.__setattr__(self, "z_phase", self.z_phase % 4)

    def project(self) -> MonodromyParamState:
        p = ThetaParams(self.theta0, self.thetainf)
        return MonodromyParamState(p.beta, p.alpha, self.t_phase, self.z_phase)


def _inv(x):
    return Fraction(1) / x if isinstance(x, (int, Fraction)) else 1 / x


def _sigma(g: int, s: MonodromyParamState) -> MonodromyParamState:
    if g == 1:
        return replace(s, beta=_inv(s.beta))
    if g == 2:
        return replace(s, beta=-s.beta, alpha=-s.alpha)
    return MonodromyParamState(s.beta, _inv(s.alpha), s.t_phase + 1, s.z_phase + 1)


def _sigma_tilde(g: int, s: LiftedParamState) -> LiftedParamState:
    if g == 1:
        return replace(s, theta0=2 - s.theta0)
    if g == 2:
        return replace(s, theta0=s.theta0 + 1, thetainf=s.thetainf + 1)
    return LiftedParamState(s.theta0, -s.thetainf, s.t_phase + 1, s.z_phase + 1)


def sigma_apply(word, s: MonodromyParamState) -> MonodromyParamState:
    for g in reversed(parse_word(word)):
        s = _sigma(g, s)
    return s


def tilde_apply(word, s: LiftedParamState) -> LiftedParamState:
    for g in reversed(parse_word(word)):
        s = _sigma_tilde(g, s)
    return s


# generic probe points with trivial stabilizers; exact rationals
_PROBES = (
    MonodromyParamState(Fraction(2, 3), Fraction(5, 7)),
    MonodromyParamState(Fraction(-11, 4), Fraction(3, 13)),
)


def _signature(word) -> tuple:
    return tuple(sigma_apply(word, p) for p in _PROBES)


def enumerate_sigma_group(max_len: int = 8) -> dict[tuple, tuple[int, ...]]:
    """Breadth-first enumeration of <sigma_1, sigma_2, sigma_3>.

    Elements are identified by their action on exact generic probe points;
    returns {signature: shortest word}.
    """
    seen = {_signature(()): ()}
    queue = deque([()])
    while queue:
        w = queue.popleft()
        if len(w) >= max_len:
            continue
        for g in (1, 2, 3):
            w2 = (g,) + w
            sig = _signature(w2)
            if sig not in seen:
                seen[sig] = w2
                queue.append(w2)
    return seen


def sigma_group_summary() -> dict:
    elements = list(enumerate_sigma_group().values())
    commutative = all(_signature(a + b) == _signature(b + a)
                      for a, b in itertools.combinations(elements, 2))
    return {"order": len(elements), "commutative": commutative}


def _affine_action(word) -> tuple:
    """Action of a lifted word as (matrix, offset, t_phase) on (theta0, thetainf)."""
    probe = [LiftedParamState(Fraction(0), Fraction(0)),
             LiftedParamState(Fraction(1), Fraction(0)),
             LiftedParamState(Fraction(0), Fraction(1))]
    o, e0, e1 = (tilde_apply(word, p) for p in probe)
    offset = (o.theta0, o.thetainf)
    mat = ((e0.theta0 - o.theta0, e1.theta0 - o.theta0),
           (e0.thetainf - o.thetainf, e1.thetainf - o.thetainf))
    return mat, offset, o.t_phase


def find_shift_words(max_len: int = 6) -> dict[tuple, tuple[int, ...]]:
    """Shortest words acting as theta0 += 2 and thetainf += 2 (up to t, z phases)."""
    targets = {(2, 0): None, (0, 2): None}
    ident = ((1, 0), (0, 1))
    for n in range(1, max_len + 1):
        for w in itertools.product((1, 2, 3), repeat=n):
            mat, off, _ = _affine_action(w)
            if mat == ident and off in targets and targets[off] is None:
                targets[off] = w
        if all(v is not None for v in targets.values()):
            break
    return targets


def missing_generator(p: ThetaParams) -> ThetaParams:
    """Parameter action of the cyclic permutation pi of the symmetric form."""
    t0, ti = p.theta0, p.thetainf
    return ThetaParams(-t0 / 2 + ti / 2 + 2, -3 * t0 / 2 - ti / 2 + 2)


def riccati_leaf_value(q, qprime, t, p: ThetaParams):
    """q' + q^2 + (t/2) q + (1 - theta0)/2; the sigma_2 map is undefined where it vanishes."""
    return qprime + q * q + t * q / 2 + (1 - p.theta0) / 2


def _parts(q, a, t, p: ThetaParams):
    t0, ti = p.theta0, p.thetainf
    N = (-4 * q * q * ti + 4 * a * a - 4 * q ** 3 * t - q * q * t * t - 4 * q ** 4
         - 4 * q * q * t0 + t0 * t0 - 4 * a * t0)
    D = 4 * q * (q * t - t0 + 2 * a + 2 * q * q)
    return N, D


def _check_denominator(q, qprime, t, p, margin):
    if q == 0:
        raise SingularLocusError(0)
    leaf = riccati_leaf_value(q, qprime, t, p)
    if abs(leaf) <= margin:
        raise SingularLocusError(leaf)
    if abs(leaf) < SINGULAR_MARGIN_WARN:
        warnings.warn(f"close to the singular locus (leaf value {abs(leaf):.2e})", RuntimeWarning,
                      stacklevel=3)


def backlund_q(q, qprime, t, p: ThetaParams, margin: float = 0.0):
    """q~ of the sigma_2 image, a solution of PIV(theta0 + 1, thetainf + 1)."""
    _check_denominator(q, qprime, t, p, margin)
    N, D = _parts(q, qprime + 0.5, t, p)
    return N / D


def backlund_qprime(q, qprime, t, p: ThetaParams, margin: float = 0.0):
    """d q~/dt along the PIV flow, with q'' taken from piv_rhs."""
    _check_denominator(q, qprime, t, p, margin)
    t0, ti = p.theta0, p.thetainf
    a = qprime + 0.5
    adot = piv_rhs(PIVState(t, q, qprime), p)
    N, D = _parts(q, a, t, p)
    dN = ((-8 * q * ti - 12 * q * q * t - 2 * q * t * t - 16 * q ** 3 - 8 * q * t0) * qprime
          + (8 * a - 4 * t0) * adot + (-4 * q ** 3 - 2 * q * q * t))
    dD = ((8 * q * t - 4 * t0 + 8 * a + 24 * q * q) * qprime + 8 * q * adot + 4 * q * q)
    return (dN * D - N * dD) / (D * D)


def solution_map(word, t, q, qprime, p: ThetaParams, margin: float = 0.0):
    """Apply a lifted word to a solution sample (t, q, q') of PIV(p).

    sigma~1 leaves solutions unchanged (PIV depends on (theta0 - 1)^2),
    sigma~2 is the rational map above, sigma~3 sends q(t) to i q(-i t), i.e.
    (t, q, q') -> (i t, i q, q').  Returns (t, q, q', params).
    """
    for g in reversed(parse_word(word)):
        if g == 1:
            p = ThetaParams(2 - p.theta0, p.thetainf)
        elif g == 2:
            q, qprime = backlund_q(q, qprime, t, p, margin), backlund_qprime(q, qprime, t, p, margin)
            p = ThetaParams(p.theta0 + 1, p.thetainf + 1)
        else:
            t, q = 1j * t, 1j * q
            p = ThetaParams(p.theta0, -p.thetainf)
    return t, q, qprime, p
