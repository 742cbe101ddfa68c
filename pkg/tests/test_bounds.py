import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from ppm_jscc import appendix_chain_check, gaussian_bound, gaussian_optimized, q_function, reference_curves, uniform_bound, uniform_optimized
from ppm_jscc.bounds import UNIFORM_BETA_COEF, UNIFORM_CONSTANT, db_to_linear, log_q, q_sandwich

from . import oracles


# ---------------------------------------------------------------- Q function

@pytest.mark.parametrize("a", [-30.0, -5.0, -1.0, 0.0, 0.3, 1.0, 5.0, 20.0, 37.0, 100.0, 600.0])
def test_log_q_against_mpmath(a):
    ref = float(mp.log(oracles.q(a)))
    assert log_q(a) == pytest.approx(ref, rel=1e-13, abs=1e-15)


def test_q_function_values():
    assert q_function(1.0) == pytest.approx(norm.sf(1.0), rel=1e-14)
    assert np.allclose(q_function(np.array([0.0, 2.0])), [0.5, norm.sf(2.0)], rtol=1e-14)


def test_q_sandwich_at_one():
    q1 = q_function(1.0)
    assert q1 == pytest.approx(0.1587, abs=1e-4)
    lower = 1 / 2 * math.exp(-0.5) / math.sqrt(2 * math.pi)
    upper = 0.5 * math.exp(-0.5)
    assert lower == pytest.approx(0.1210, abs=1e-4) and upper == pytest.approx(0.3033, abs=1e-4)
    assert q_sandwich(1.0)


# ---------------------------------------------------------------- uniform source

def test_uniform_dl_limits():
    assert uniform_bound(10.0, 2.0).d_l == pytest.approx(0.5)
    assert uniform_bound(10.0, 1e12).d_l == pytest.approx(1 / 6)


@pytest.mark.parametrize("enr,beta", [(20.0, 8.0), (5.0, 1.5), (100.0, 3e5), (400.0, 1e12)])
def test_uniform_total_dual_implementation(enr, beta):
    assert uniform_bound(enr, beta).total == pytest.approx(float(oracles.uniform_total(enr, beta)), rel=1e-12)


def test_uniform_domain():
    with pytest.raises(ValueError):
        uniform_bound(10.0, 1.0)
    with pytest.raises(ValueError):
        uniform_bound(-1.0, 3.0)


def test_uniform_extreme_enr_is_finite():
    rep = uniform_bound(700.0, uniform_optimized(700.0).beta_star)
    assert 0 < rep.total < 1e-100 and math.isfinite(rep.asymptotic_total)


@settings(max_examples=60, deadline=None)
@given(enr=st.floats(0.5, 300), beta=st.floats(1.01, 1e6), f=st.floats(1.01, 10))
def test_uniform_monotonicity(enr, beta, f):
    a = uniform_bound(enr, beta)
    assert uniform_bound(enr, beta * f).d_s_tilde < a.d_s_tilde
    assert uniform_bound(enr * f, beta).d_s_tilde < a.d_s_tilde
    assert uniform_bound(enr, beta * f).p_l_tilde > a.p_l_tilde
    for v in (a.d_s, a.d_l, a.p_l, a.total, a.asymptotic_total):
        assert v > 0


def test_uniform_optimized_ratio_at_30():
    opt = uniform_optimized(30.0)
    assert 0.5 < opt.exact_total / opt.d_bound < 2


def test_uniform_optimized_ratio_decreases():
    ratios = [uniform_optimized(e).exact_total / uniform_optimized(e).d_bound for e in (20, 40, 80, 160, 320, 640)]
    assert all(b < a for a, b in zip(ratios, ratios[1:]))


def test_uniform_optimized_ratio_within_20_percent_at_80():
    # stated example; the slowly decaying 4*sqrt(pi/ENR) term in P_L keeps the ratio near 1.54 here
    opt = uniform_optimized(80.0)
    assert abs(opt.exact_total / opt.d_bound - 1) <= 0.2


def test_uniform_exact_slope_at_high_enr():
    # stated example; the same ENR^-1/2 term in P_L steepens the slope to about -0.47 here
    # slope of ln(total * e^{ENR/3}) against ln ENR between 160 and 320, compared with -1/3
    e1, e2 = 160.0, 320.0
    y1 = math.log(uniform_optimized(e1).exact_total) + e1 / 3
    y2 = math.log(uniform_optimized(e2).exact_total) + e2 / 3
    slope = (y2 - y1) / math.log(e2 / e1)
    assert slope == pytest.approx(-1 / 3, rel=0.05)


def test_uniform_exponent_constant():
    for enr in (40.0, 80.0, 160.0, 320.0):
        opt = uniform_optimized(enr)
        assert opt.log_d_bound + enr / 3 + math.log(enr) / 3 == pytest.approx(math.log(0.072), abs=1e-9)


def test_theorem_constant_is_rounded_optimum():
    # minimising 13/(8c^2) + c/(96 sqrt(pi)) over c gives c^3 = 312 sqrt(pi) and value c/(64 sqrt(pi))
    c = mp.cbrt(312 * mp.sqrt(mp.pi))
    exact = c / (64 * mp.sqrt(mp.pi))
    g = lambda t: mp.mpf(13) / (8 * t ** 2) + t / (96 * mp.sqrt(mp.pi))  # noqa: E731
    assert float(mp.findroot(lambda t: mp.diff(g, t), 8.0)) == pytest.approx(float(c), rel=1e-12)
    assert UNIFORM_BETA_COEF == pytest.approx(float(c), rel=1e-14)
    assert abs(UNIFORM_CONSTANT - float(exact)) / float(exact) < 0.01
    enr = 600.0
    rep = uniform_bound(enr, uniform_optimized(enr).beta_star)
    form = float(exact) * math.exp(-enr / 3) * enr ** (-1 / 3)
    assert rep.asymptotic_total == pytest.approx(form, rel=1e-9)


def test_kappa():
    assert 1 / (12 * 0.072) >= 1.1518


# ---------------------------------------------------------------- Gaussian source

def test_gaussian_domain():
    with pytest.raises(ValueError):
        gaussian_bound(1.0, 0.4)
    with pytest.raises(ValueError):
        gaussian_optimized(1e-3)  # theorem beta times ENR falls below 1/2


@pytest.mark.parametrize("enr,beta", [(22.387, 3.68), (5.0, 2.0), (40.0, 16.0), (200.0, 1e9)])
def test_gaussian_dual_implementation(enr, beta):
    ds, pldl = oracles.gaussian_parts(enr, beta)
    rep = gaussian_bound(enr, beta)
    assert rep.d_s == pytest.approx(float(ds), rel=1e-12)
    assert rep.pl_dl == pytest.approx(float(pldl), rel=1e-12)


def test_gaussian_13_5_db_point():
    rep = gaussian_bound(22.387, 3.68)
    assert math.isfinite(rep.total)
    assert rep.total >= rep.d_s_tilde + rep.d_l_tilde


def test_gaussian_small_error_limit():
    beta = 5.0
    vals = [gaussian_bound(e, beta).d_s * (beta * e) ** 2 for e in (1e3, 1e5, 1e7)]
    assert vals[-1] == pytest.approx(13 / 8, rel=1e-3)
    assert abs(vals[-1] - 13 / 8) < abs(vals[0] - 13 / 8)


def test_gaussian_theorem_beta_13_5_db():
    opt = gaussian_optimized(float(db_to_linear(13.5)))
    assert opt.beta_star == pytest.approx(3.68, abs=0.01)


def test_gaussian_asymptotic_form():
    enr = 22.387
    ref = 3 * (13 / 8) ** (1 / 3) * mp.e ** (-mp.mpf(enr) / 3) * mp.mpf(enr) ** (-mp.mpf(1) / 3)
    assert gaussian_optimized(enr).d_bound == pytest.approx(float(ref), rel=1e-13)


@pytest.mark.parametrize("enr", [40.0, 80.0, 160.0])
def test_gaussian_theorem_beta_local_optimality(enr):
    # stated example; the closed-form beta only balances the tilde terms, and the exact
    # optimum sits below it (0.8 beta* is better) until ENR of roughly 550
    opt = gaussian_optimized(enr)
    here = opt.exact_total
    assert here <= gaussian_bound(enr, 0.8 * opt.beta_star).total
    assert here <= gaussian_bound(enr, 1.25 * opt.beta_star).total


# ---------------------------------------------------------------- reference curves

def test_reference_curves():
    assert reference_curves(2.0, 1.0).separation_limit == pytest.approx(math.exp(-4))
    assert reference_curves(0.0, 3.0).separation_limit == 3.0
    rc = reference_curves(5.0, 2.0)
    assert rc.sigma2 / rc.separation_limit == pytest.approx(math.exp(10))
    assert rc.capacity == 5.0
    assert rc.burnashev(2.0, 1 / 3) == pytest.approx(2.0 * 5.0 ** (-1 / 3) * math.exp(-5 / 3))
    assert rc.separation_achievable(1.0) == pytest.approx(math.exp(-5 / 3))


# ---------------------------------------------------------------- appendix chain

def test_appendix_q_sandwich_dense():
    a = np.linspace(0.04, 40.0, 1000)
    assert q_sandwich(a).all()


def test_appendix_partial_bounds_hold():
    for enr in (5.0, 10.0, 20.0, 40.0):
        for beta in (2.0, 4.0, 8.0, 16.0):
            v = appendix_chain_check(enr, beta)
            assert v.ds_chain_ok
            assert v.partial_bounds_ok
            assert v.series_bounds_ok


def test_appendix_chain_enr10_beta4():
    # stated example; the large-error step is off by the factor 2 (the two partial bounds
    # hold individually, see test_appendix_partial_bounds_hold)
    v = appendix_chain_check(10.0, 4.0, terms=10_000)
    assert v.ds_chain_ok and v.q_sandwich_ok
    assert v.large_error_ok


def test_appendix_series_against_mpmath():
    enr, beta = 10.0, 4.0
    v = appendix_chain_check(enr, beta)
    E, b = mp.mpf(enr), mp.mpf(beta)
    # plain summation: the D_L2 terms peak in the interior (near i = 2 beta sqrt(ENR)), which
    # defeats series-acceleration schemes; both tails are negligible beyond i = 2000
    idx = range(2, 2000)
    d1 = mp.fsum((i / b) ** 2 * (mp.mpf(3) / 2 + mp.sqrt(E / (8 * mp.pi) + (i / b) ** 2 / (32 * mp.pi)))
                 * mp.e ** (-E / 2 - (i / b) ** 2 / 8) for i in idx)
    d2 = mp.fsum((i / b) ** 2 * oracles.q(2 * E * b / i + i / (2 * b)) for i in idx)
    assert v.d_l1 == pytest.approx(float(d1), rel=1e-12)
    assert v.d_l2 == pytest.approx(float(d2), rel=1e-10)


def test_appendix_domain_and_truncation():
    from ppm_jscc.bounds import TruncationNotConverged

    with pytest.raises(ValueError):
        appendix_chain_check(1.0, 0.4)
    with pytest.raises(ValueError):
        appendix_chain_check(10.0, 4.0, terms=50)
    with pytest.raises(TruncationNotConverged):
        appendix_chain_check(10.0, 400.0, terms=100)
