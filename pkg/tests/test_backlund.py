from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from painleve4 import backlund as bk
from painleve4.isomonodromy import piv_fd_residual, piv_system
from painleve4.ode import COMPLETED, fd_derivative, integrate
from painleve4.rank2_moduli import ThetaParams

from conftest import crandn, small_complexes

words = st.lists(st.sampled_from([1, 2, 3]), max_size=6).map(tuple)
fracs = st.fractions(-3, 3, max_denominator=7).filter(lambda x: x != 0)


def test_parse_word():
    assert bk.parse_word("21") == (2, 1)
    assert bk.parse_word("s2 s1") == (2, 1)
    assert bk.parse_word("") == ()
    with pytest.raises(ValueError):
        bk.parse_word("4")


@given(fracs, fracs, st.integers(0, 3), st.integers(0, 3))
def test_table_relations(b, a, tp, zp):
    s = bk.MonodromyParamState(b, a, tp, zp)
    assert bk.sigma_apply("11", s) == s
    assert bk.sigma_apply("22", s) == s
    assert bk.sigma_apply("3333", s) == s
    s2 = bk.sigma_apply("33", s)
    assert (s2.beta, s2.alpha) == (s.beta, s.alpha)
    assert s2.t_phase == (tp + 2) % 4 and s2.z_phase == (zp + 2) % 4


def test_group_order_and_commutativity():
    assert bk.sigma_group_summary() == {"order": 16, "commutative": True}


def test_words_act_right_to_left():
    s = bk.LiftedParamState(Fraction(1, 3), Fraction(1, 5))
    # sigma2 after sigma1: theta0 -> 2 - theta0 -> 3 - theta0
    assert bk.tilde_apply("21", s).theta0 == 3 - s.theta0
    assert bk.tilde_apply("12", s).theta0 == 1 - s.theta0


def test_shift_words():
    s = bk.LiftedParamState(Fraction(1, 3), Fraction(1, 5))
    out = bk.tilde_apply("2121", s)
    assert (out.theta0, out.thetainf) == (s.theta0, s.thetainf + 2)
    out = bk.tilde_apply("2323", s)
    assert (out.theta0, out.thetainf) == (s.theta0 + 2, s.thetainf)
    found = bk.find_shift_words(max_len=6)
    assert set(found) == {(2, 0), (0, 2)}
    for (d0, di), w in found.items():
        assert w is not None and len(w) <= 6
        out = bk.tilde_apply(w, s)
        assert (out.theta0 - s.theta0, out.thetainf - s.thetainf) == (d0, di)


@given(words, small_complexes, small_complexes)
def test_projection_commutes(w, th0, thi):
    s = bk.LiftedParamState(th0, thi)
    a = bk.tilde_apply(w, s).project()
    b = bk.sigma_apply(w, s.project())
    assert abs(a.beta - b.beta) < 1e-12 and abs(a.alpha - b.alpha) < 1e-12
    assert (a.t_phase, a.z_phase) == (b.t_phase, b.z_phase)


def test_denominator_is_riccati_leaf(rng):
    for _ in range(1000):
        q, qp, t = crandn(rng, 3)
        p = ThetaParams(*crandn(rng, 2))
        a = qp + 0.5
        D = 4 * q * (q * t - p.theta0 + 2 * a + 2 * q * q)
        assert abs(D - 8 * q * bk.riccati_leaf_value(q, qp, t, p)) < 1e-12 * max(1, abs(D))


def test_singular_locus():
    p = ThetaParams(0.3, 0.2)
    q, t = 0.7, 0.1
    qp = -q * q - t * q / 2 - (1 - p.theta0) / 2
    with pytest.raises(bk.SingularLocusError) as exc:
        bk.backlund_q(q, qp, t, p)
    assert exc.value.leaf_value == pytest.approx(0, abs=1e-15)
    with pytest.raises(bk.SingularLocusError):
        bk.backlund_q(q, qp + 0.05, t, p, margin=0.1)
    with pytest.warns(RuntimeWarning, match="singular locus"):
        bk.backlund_q(q, qp + 1e-4, t, p)
    with pytest.raises(bk.SingularLocusError):
        bk.backlund_q(0, 1, t, p)


def test_missing_generator_values():
    out = bk.missing_generator(ThetaParams(0, 0))
    assert (out.theta0, out.thetainf) == (2, 2)
    out = bk.missing_generator(ThetaParams(2, 2))
    assert (out.theta0, out.thetainf) == (2, -2)
    # order three on parameters
    p = ThetaParams(0.37, -1.2)
    q = bk.missing_generator(bk.missing_generator(bk.missing_generator(p)))
    assert abs(q.theta0 - p.theta0) < 1e-14 and abs(q.thetainf - p.thetainf) < 1e-14


def _trajectory(p, q0, qp0, n=2000):
    tr = integrate(piv_system(p), [q0, qp0], [0, 1], tol=1e-10, record=n)
    assert tr.reason == COMPLETED
    return tr.t, tr.y[:, 0], tr.y[:, 1]


def test_sigma2_trajectory():
    p = ThetaParams(0.3 + 0.2j, -0.4)
    t, q, qp = _trajectory(p, 1.0 + 0.2j, 0.3)
    Q = np.array([bk.backlund_q(*a, p, margin=0.1) for a in zip(q, qp, t)])
    QP = np.array([bk.backlund_qprime(*a, p, margin=0.1) for a in zip(q, qp, t)])
    target = ThetaParams(p.theta0 + 1, p.thetainf + 1)
    assert piv_fd_residual(t, Q, QP, target).max() < 1e-6
    assert np.abs(fd_derivative(Q, t[1] - t[0]) - QP).max() < 1e-6
    lifted = bk.tilde_apply("2", bk.LiftedParamState(p.theta0, p.thetainf))
    assert (lifted.theta0, lifted.thetainf) == (target.theta0, target.thetainf)
    # reseeding at the target reproduces the mapped curve
    tr = integrate(piv_system(target), [Q[0], QP[0]], [0, 1], tol=1e-12, record=2000)
    assert np.abs(tr.y[:, 0] - Q).max() < 1e-6


def test_solution_map_other_generators():
    p = ThetaParams(0.3 + 0.2j, -0.4)
    t, q, qp = _trajectory(p, 1.0 + 0.2j, 0.3)
    out = [bk.solution_map("1", *a, p) for a in zip(t, q, qp)]
    assert all(o[1] == qi and o[2] == qpi for o, qi, qpi in zip(out, q, qp))
    assert out[0][3] == ThetaParams(2 - p.theta0, p.thetainf)
    out = [bk.solution_map("3", *a, p) for a in zip(t, q, qp)]
    T, Q, QP = (np.array([o[k] for o in out]) for k in range(3))
    target = out[0][3]
    assert target == ThetaParams(p.theta0, -p.thetainf)
    assert piv_fd_residual(T, Q, QP, target).max() < 1e-6
    assert bk.solution_map("", 0.1, 0.2, 0.3, p) == (0.1, 0.2, 0.3, p)


def test_solution_map_word_composes():
    p = ThetaParams(0.3, -0.4)
    t, q, qp = 0.2, 0.9, 0.1
    a = bk.solution_map("32", t, q, qp, p)
    b = bk.solution_map("3", *bk.solution_map("2", t, q, qp, p)[:3], ThetaParams(1.3, 0.6))
    assert a == b
