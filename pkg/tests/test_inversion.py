import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from cgfbounds import families as fam
from cgfbounds import inversion as inv
from cgfbounds.inversion import BoundQuery


# -- closed forms --------------------------------------------------------------

def test_gaussian_closed_form():
    comp = inv.cramer_of(fam.gaussian(1.0))
    res = inv.invert_at_budget(comp, 0.3, 0.02)
    assert res.rho == pytest.approx(0.3 + math.sqrt(2 * 0.02), abs=2e-9)
    assert res.status == "converged"


@given(alpha=st.floats(-2.0, 2.0), budget=st.floats(1e-6, 50.0),
       sigma2=st.floats(0.1, 4.0))
@settings(max_examples=60, deadline=None)
def test_gaussian_closed_form_property(alpha, budget, sigma2):
    comp = inv.cramer_of(fam.gaussian(sigma2))
    res = inv.invert_at_budget(comp, alpha, budget)
    want = alpha + math.sqrt(2 * sigma2 * budget)
    assert res.rho == pytest.approx(want, rel=1e-8, abs=1e-8)


def test_poisson_closed_form_frozen():
    # bisection oracle frozen at tol 1e-12
    assert inv.invert_closed_form_poisson(1.0, 1.0) == pytest.approx(
        3.1461932206205825, rel=1e-12)
    assert inv.invert_closed_form_poisson(0.0, 2.5) == 2.5
    assert inv.invert_closed_form_poisson(2.0, 0.0) == 2.0


@given(alpha=st.floats(1e-3, 50.0), budget=st.floats(1e-8, 3000.0))
@settings(max_examples=80, deadline=None)
def test_poisson_closed_form_solves_cramer(alpha, budget):
    rho = inv.invert_closed_form_poisson(alpha, budget)
    assert rho > alpha
    assert fam.poisson().cramer(alpha, rho) == pytest.approx(
        budget, rel=1e-9, abs=1e-12)


def test_poisson_closed_vs_bisection():
    comp = inv.cramer_of(fam.poisson())
    rng = np.random.default_rng(42)
    for _ in range(20):
        alpha = float(rng.uniform(0.05, 10.0))
        budget = float(rng.uniform(1e-4, 20.0))
        closed = inv.invert_closed_form_poisson(alpha, budget)
        bis = inv.invert_at_budget(comp, alpha, budget, tol=1e-12).rho
        assert closed == pytest.approx(bis, rel=1e-9)


def test_lambert_wm1_against_scipy():
    # keep clear of -1/e where scipy's lambertw itself loses accuracy
    for x in -np.geomspace(1e-280, 0.999 / math.e, 60):
        want = float(special.lambertw(complex(x), -1).real)
        assert inv.lambert_wm1(float(x)) == pytest.approx(want, rel=1e-10)
    with pytest.raises(ValueError):
        inv.lambert_wm1(0.1)
    with pytest.raises(ValueError):
        inv.lambert_wm1(-1.0)


def test_lambert_wm1_near_branch_point():
    import mpmath
    for eps in (1e-12, 1e-9, 1e-6):
        x = -(1.0 / math.e - eps)
        want = float(mpmath.lambertw(mpmath.mpf(repr(x)), -1).real)
        assert inv.lambert_wm1(x) == pytest.approx(want, rel=1e-9)


def test_lambert_wm1_underflow_regime():
    # -e^{-1-B} underflows for B > ~700; the u-root form must still work
    rho = inv.invert_closed_form_poisson(1.0, 3000.0)
    assert fam.poisson().cramer(1.0, rho) == pytest.approx(3000.0, rel=1e-12)


# -- engine semantics ------------------------------------------------------------

def test_budget_nonpositive():
    comp = inv.cramer_of(fam.bernoulli())
    res = inv.invert_at_budget(comp, 0.2, 0.0)
    assert res.rho == 0.2 and res.status == "budget_nonpositive"


def test_capped_at_domain():
    # Catoni stays finite at p = 1, so a large budget caps there
    comp = inv.catoni(-1.0)
    res = inv.invert_at_budget(comp, 0.3, 10.0)
    assert res.rho == 1.0 and res.status == "capped_at_domain"


def test_non_monotone_rejected():
    comp = inv.Comparator("bad", lambda q, p: -(p - q), (-math.inf, math.inf))
    with pytest.raises(inv.NonMonotoneComparator):
        inv.invert_at_budget(comp, 0.0, 1.0)


def test_no_finite_bound():
    comp = inv.Comparator("flat", lambda q, p: 0.0, (0.0, math.inf))
    with pytest.raises(inv.NoFiniteBound):
        inv.invert_at_budget(comp, 1.0, 0.5)


def test_alpha_outside_range():
    comp = inv.cramer_of(fam.bernoulli())
    with pytest.raises(ValueError):
        inv.invert_at_budget(comp, 1.5, 0.1)


FAMS = [fam.bernoulli(), fam.gaussian(0.7), fam.poisson(), fam.gamma(2.0),
        fam.laplace(1.2), fam.invgauss(1.5), fam.negbin(2.5)]

ALPHAS = {"bernoulli": 0.25, "gaussian": -0.5, "poisson": 0.8, "gamma": 1.1,
          "laplace": 0.4, "invgauss": 0.9, "negbin": 1.3}


@pytest.mark.parametrize("family", FAMS, ids=lambda f: f.kind)
@pytest.mark.parametrize("budget", [1e-4, 0.05, 0.8])
def test_feasible_and_maximal(family, budget):
    comp = inv.cramer_of(family)
    alpha = ALPHAS[family.kind]
    res = inv.invert_at_budget(comp, alpha, budget)
    assert res.status == "converged"
    assert comp.eval(alpha, res.rho) <= budget + 1e-6
    scale = max(1.0, abs(res.rho))
    assert comp.eval(alpha, res.rho + 100e-9 * scale) > budget


def test_invgauss_saturation_no_finite_bound():
    # sup_p of the inverse-Gaussian rate at fixed alpha is lambda/(2 alpha);
    # budgets above it admit every mean
    lam, alpha = 1.5, 0.9
    comp = inv.cramer_of(fam.invgauss(lam))
    cap = lam / (2 * alpha)
    with pytest.raises(inv.NoFiniteBound):
        inv.invert_at_budget(comp, alpha, cap * 1.01)
    res = inv.invert_at_budget(comp, alpha, cap * 0.9)
    assert res.status == "converged"


# -- parametric comparators vs their closed inversions ---------------------------

def test_catoni_closed_inverse_matches_bisection():
    for gamma in (-0.1, -1.0, -4.0):
        comp = inv.catoni(gamma)
        for alpha in (0.1, 0.5, 0.9):
            for budget in (0.01, 0.3):
                closed = comp.exact_inverse(alpha, budget)
                if closed < 1.0:
                    bis = inv.invert_at_budget(comp, alpha, budget).rho
                    assert closed == pytest.approx(bis, abs=5e-9)


def test_scaled_diff_inverse():
    comp = inv.scaled_diff(2.0)
    assert comp.exact_inverse(0.3, 0.5) == pytest.approx(0.55, rel=1e-14)
    bis = inv.invert_at_budget(comp, 0.3, 0.5).rho
    assert bis == pytest.approx(0.55, rel=1e-7)


def test_poisson_diff_inverse():
    t = 0.7
    comp = inv.poisson_diff(t)
    c = -math.expm1(-t)
    assert comp.exact_inverse(1.0, 0.2) == pytest.approx((0.7 + 0.2) / c, rel=1e-14)


def test_laplace_and_gaussian_diff_inverse():
    comp = inv.laplace_diff(0.5, 1.0)
    off = math.log1p(-0.25)
    assert comp.exact_inverse(0.4, 0.3) == pytest.approx(
        0.4 + (0.3 - off) / 0.5, rel=1e-14)
    comp = inv.gaussian_diff(0.8, 2.0)
    assert comp.exact_inverse(0.1, 0.3) == pytest.approx(
        0.1 + (0.3 + 2.0 * 0.64 / 2) / 0.8, rel=1e-14)


# -- one-parameter infima ---------------------------------------------------------

def test_gaussian_diff_infimum_analytic():
    # inf_t [alpha + (budget + sigma2 t^2/2)/t] = alpha + sqrt(2 sigma2 budget)
    sigma2, alpha, beta, n = 0.25, 0.3, 2.0, 100
    q = BoundQuery(alpha, beta, n)
    res = inv.infimum_over_parameter(lambda t: inv.gaussian_diff(t, sigma2), q,
                                     (1e-8, 100.0), "log")
    want = alpha + math.sqrt(2 * sigma2 * beta / n)
    assert res.rho == pytest.approx(want, rel=1e-9)
    assert res.param_star == pytest.approx(math.sqrt(2 * (beta / n) / sigma2), rel=1e-3)


def test_poisson_diff_infimum_zero_beta():
    # at budget 0 the infimum over t approaches alpha from above as t -> 0
    q = BoundQuery(1.0, 0.0, 50)
    res = inv.infimum_over_parameter(inv.poisson_diff, q, (1e-4, 200.0), "log")
    assert res.rho >= 1.0
    assert res.rho == pytest.approx(1.0, rel=1e-3)


def test_infimum_all_capped_returns_cap():
    q = BoundQuery(0.3, 1000.0, 1)
    res = inv.infimum_over_parameter(lambda m: inv.catoni(-m), q,
                                     (1e-3, 50.0), "log")
    assert res.rho == 1.0 and res.status == "capped_at_domain"


def test_infimum_all_divergent_raises():
    q = BoundQuery(1.0, 10.0, 10)

    def make(t):
        return inv.Comparator("flat", lambda qq, pp: 0.0 * t, (0.0, math.inf))

    with pytest.raises(inv.NoFiniteBound):
        inv.infimum_over_parameter(make, q, (0.1, 10.0), "log")


# -- budget assembly ---------------------------------------------------------------

def test_budget_modes():
    assert BoundQuery(0.1, 3.0, 10).budget() == pytest.approx(0.3, rel=1e-14)
    q = BoundQuery(0.1, 3.0, 10, delta=0.05)
    assert q.budget() == pytest.approx((3.0 - math.log(0.05)) / 10, rel=1e-14)
    q = BoundQuery(0.1, 3.0, 10, delta=0.05, iota="mls_sqrt")
    want = (3.0 + math.log(2 * math.sqrt(10)) - math.log(0.05)) / 10
    assert q.budget() == pytest.approx(want, rel=1e-14)
    q = BoundQuery(0.1, 3.0, 10, delta=0.05, iota="explicit", iota_value=1.7)
    assert q.budget() == pytest.approx((3.0 + 1.7 - math.log(0.05)) / 10, rel=1e-14)
    q = BoundQuery(0.1, 3.0, 10, delta=0.05, iota="two_e_ceil_u")
    want = (3.0 + math.log(2 * math.e * 10) - math.log(0.05)) / 10
    assert q.budget() == pytest.approx(want, rel=1e-14)
    q = BoundQuery(0.5, 2.0, 10, delta=0.05, iota="xi")
    xi = math.pi ** 2 * (1 + min(10 * 0.5, 2.0)) ** 2 / 3
    want = (2.0 + math.log(xi) - math.log(0.05)) / 10
    assert q.budget() == pytest.approx(want, rel=1e-14)


def test_pac_dominates_average():
    comp = inv.cramer_of(fam.bernoulli())
    avg = inv.invert(comp, BoundQuery(0.2, 1.0, 30))
    pac = inv.invert(comp, BoundQuery(0.2, 1.0, 30, delta=0.1))
    assert pac.rho >= avg.rho


def test_query_validation():
    with pytest.raises(AssertionError):
        BoundQuery(0.1, -1.0, 10)
    with pytest.raises(AssertionError):
        BoundQuery(0.1, 1.0, 0)
    with pytest.raises(AssertionError):
        BoundQuery(0.1, 1.0, 10, delta=1.5)
