import numpy as np
import pytest

from borelpde.certificates import (certificate_sweep, ex1_certificate, ex2_certificate, ex3_certificate,
                                   general_certificate, least_certified_nu, measured_F0_norm)
from borelpde.problems import Ex1


def test_ex1_zero_time_is_ball_only():
    c = ex1_certificate(0.5, 0.0, 8.0)
    assert c.satisfied and c.ball_lhs == pytest.approx(0.5) and c.contraction_lhs == 0


def test_ball_factor_must_exceed_one():
    for fn in (lambda: ex1_certificate(0.5, 0.05, 8.0, b=1.0),
               lambda: ex2_certificate(0.05, 8.0, b=0.5),
               lambda: ex3_certificate(1.0, 0.05, 10.0, b=1.0)):
        with pytest.raises(ValueError):
            fn()


def test_ex1_monotone_in_nu_and_T():
    nus = [2.0, 4.0, 8.0, 16.0]
    lhs = [ex1_certificate(0.5, 0.05, nu).contraction_lhs for nu in nus]
    assert np.all(np.diff(lhs) < 0)
    Ts = [0.0125, 0.05, 0.2]
    lhs = [ex1_certificate(0.5, T, 8.0).contraction_lhs for T in Ts]
    assert np.all(np.diff(lhs) > 0)


def test_ex1_measured_forcing_constant():
    f0 = measured_F0_norm(Ex1(0.5), 0.05, 8.0)
    c = ex1_certificate(0.5, 0.05, 8.0, F0_norm=f0)
    assert c.details["A_r"] == pytest.approx(f0 * 8.0 / 0.05)
    # large nu: |F0| ~ 3 M0 T / (e nu)
    big = measured_F0_norm(Ex1(0.5), 0.01, 200.0) * 200.0 / 0.01
    assert big == pytest.approx(3 * 3.76362629774 / np.e, rel=0.05)


def test_ex2_depends_on_single_variable():
    a = ex2_certificate(0.05, 8.0)
    k = 3.0
    b = ex2_certificate(0.05 * k, 8.0 * k ** 1.5)
    assert a.ball_lhs == pytest.approx(b.ball_lhs, rel=1e-12)
    assert a.contraction_lhs == pytest.approx(b.contraction_lhs, rel=1e-12)
    assert not ex2_certificate(0.05, 8.0, eps=1e-3).satisfied


def test_ex3_closed_form_against_partial_sums():
    c = ex3_certificate(1.0, 0.05, 10.0, K_F0=30.0)
    q, x = c.details["q"], 0.05 / 1000
    head = sum(x ** ((3 - j) / 3) for j in range(3))
    ks = np.arange(0, 400)
    ball = 0.5 + sum(head * q ** k for k in ks) + sum(q ** k for k in ks[1:])
    contraction = sum((k + 1) * head * q ** k for k in ks) + sum((k + 1) * q ** k for k in ks[1:])
    assert c.ball_lhs == pytest.approx(ball, rel=1e-12)
    assert c.contraction_lhs == pytest.approx(contraction, rel=1e-12)
    assert not ex3_certificate(1.0, 0.05, 1.0, K_F0=30.0).satisfied


def test_general_certificate_reduces_with_nu():
    kw = dict(alpha_js=(1, 1, 1, 0), beta=1.0, A_b=1.0, A_r=1.0, T=0.05, b=2.0)
    lo, hi = general_certificate(nu=4.0, **kw), general_certificate(nu=40.0, **kw)
    assert hi.contraction_lhs < lo.contraction_lhs
    bad = general_certificate(nu=4.0, **kw, F0_norm=1e6)
    assert not bad.satisfied and bad.reason


def test_least_certified_nu_is_threshold():
    fn = lambda T, nu: ex2_certificate(T, nu)
    nu_star = least_certified_nu(fn, 0.05, rtol=1e-10)
    assert fn(0.05, nu_star * (1 + 1e-6)).satisfied
    assert not fn(0.05, nu_star * (1 - 1e-6)).satisfied
    assert least_certified_nu(fn, 0.4, rtol=1e-10) / nu_star == pytest.approx(8 ** 1.5, rel=1e-6)


def test_empty_sweep():
    with pytest.raises(ValueError):
        certificate_sweep(lambda T, nu: ex2_certificate(T, nu), [], [1.0])
    assert len(certificate_sweep(lambda T, nu: ex2_certificate(T, nu), [0.1, 0.2], [1, 2, 3])) == 6
