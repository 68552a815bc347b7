import math

import numpy as np
import pytest

from cgfbounds import conjugate as con
from cgfbounds import families as fam

ALL = [fam.bernoulli(), fam.gaussian(1.3), fam.poisson(), fam.gamma(2.5),
       fam.laplace(0.8), fam.invgauss(1.7), fam.negbin(3.0)]

GRIDS = {
    "bernoulli": np.linspace(0.1, 0.9, 5),
    "gaussian": np.linspace(-2.0, 2.0, 5),
    "poisson": np.geomspace(0.2, 4.0, 5),
    "gamma": np.geomspace(0.2, 4.0, 5),
    "laplace": np.linspace(-2.0, 2.0, 5),
    "invgauss": np.geomspace(0.2, 4.0, 5),
    "negbin": np.geomspace(0.2, 4.0, 5),
}


@pytest.mark.parametrize("family", ALL, ids=lambda f: f.kind)
def test_conjugate_matches_closed_cramer(family):
    grid = GRIDS[family.kind]
    for q in grid:
        for p in grid:
            closed = family.cramer(float(q), float(p))
            res = con.family_conjugate(family, float(q), float(p))
            assert res.value == pytest.approx(closed, rel=1e-8, abs=1e-9), (q, p)


def test_parametric_value():
    f = fam.gaussian(1.0)
    got = con.parametric_value(lambda t: f.cgf(2.0, t), 0.5, 0.3)
    assert got == pytest.approx(0.5 * 0.3 - (2.0 * 0.3 + 0.09 / 2), rel=1e-14)


def test_divergent_outside_mean_range():
    bern = fam.bernoulli()
    with pytest.raises(con.ConjugateDivergent):
        con.numeric_conjugate(lambda t: bern.cgf(0.4, t), 1.5,
                              bern.t_domain(0.4))
    poi = fam.poisson()
    with pytest.raises(con.ConjugateDivergent):
        con.numeric_conjugate(lambda t: poi.cgf(1.0, t), -0.2,
                              poi.t_domain(1.0))


def test_supremum_at_infinity_Bernoulli_edge():
    # q = 1: sup_t t - ln(1 - p + p e^t) = -ln p, attained only in the limit
    bern = fam.bernoulli()
    res = con.numeric_conjugate(lambda t: bern.cgf(0.3, t), 1.0,
                                bern.t_domain(0.3))
    assert res.value == pytest.approx(-math.log(0.3), rel=1e-6)
    assert res.at_boundary and math.isinf(res.t_star)


def test_one_sided_domain_gives_zero_below_mean():
    poi = fam.poisson()
    res = con.numeric_conjugate(lambda t: poi.cgf(1.0, t), 0.4,
                                poi.t_domain(1.0, sided="nonneg_only"))
    assert res.value == pytest.approx(0.0, abs=1e-12)


def test_gamma_finite_end_polish():
    # supremum near the finite end t -> k/p for q far above p
    g = fam.gamma(2.0)
    res = con.family_conjugate(g, 8.0, 0.5)
    assert res.value == pytest.approx(g.cramer(8.0, 0.5), rel=1e-8)


def test_diagonal_is_zero():
    for family in ALL:
        q = float(GRIDS[family.kind][2])
        res = con.family_conjugate(family, q, q)
        assert abs(res.value) <= 1e-10
