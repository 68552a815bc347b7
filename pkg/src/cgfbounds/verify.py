"""Monte-Carlo validity harness on synthetic finite-hypothesis problems.

Losses are drawn exactly from the bounding family member whose mean is the
hypothesis's population loss, the posterior is the Gibbs posterior (which
makes every divergence exact and closed form), and the recorded violation
rates are compared against delta via Clopper-Pearson intervals.
"""

import functools
import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from . import families as fam
from . import inversion as inv
from .bounds import CATONI_GAMMA_MAGNITUDES
from .inversion import BoundQuery
from .rng import make_generator
from .upsilon import correction_two_e_ceil, correction_xi


@dataclass(frozen=True)
class SyntheticProblem:
    hypothesis_means: tuple
    prior_weights: tuple
    family: fam.BoundingFamily
    gibbs_temperature: float
    n: int
    trials: int
    seed: int

    def __post_init__(self):
        assert len(self.hypothesis_means) >= 2
        w = np.asarray(self.prior_weights, dtype=float)
        assert w.shape == (len(self.hypothesis_means),)
        assert np.all(w >= 0) and abs(float(w.sum()) - 1.0) <= 1e-12
        assert self.gibbs_temperature >= 0.0
        assert self.n >= 1 and self.trials >= 1


@dataclass
class TrialRecord:
    train_loss: float
    pop_loss: float
    kl: float
    per_sample_kls: tuple | None
    bound_value: float
    violated: bool


def _draw_loss_matrix(family, means, n, rng):
    """(n, M) losses, column h drawn from the member with mean means[h]."""
    m = len(means)
    v = family.nuisance
    if family.kind == "bernoulli":
        return (rng.random((n, m)) < means).astype(float)
    if family.kind == "gaussian":
        return rng.normal(means, math.sqrt(v), (n, m))
    if family.kind == "poisson":
        return rng.poisson(np.broadcast_to(means, (n, m))).astype(float)
    if family.kind == "gamma":
        return rng.gamma(v, np.broadcast_to(means / v, (n, m)))
    if family.kind == "laplace":
        u = rng.random((n, m)) - 0.5
        return means - v * np.sign(u) * np.log1p(-2.0 * np.abs(u))
    if family.kind == "invgauss":
        return rng.wald(np.broadcast_to(means, (n, m)), v)
    return rng.negative_binomial(v, v / (v + means), (n, m)).astype(float)


@functools.lru_cache(maxsize=16)
def _simulate(problem):
    """Per-trial (train_loss, pop_loss, kl) arrays for the Gibbs posterior."""
    means = np.asarray(problem.hypothesis_means, dtype=float)
    prior = np.asarray(problem.prior_weights, dtype=float)
    c, n, t_total = problem.gibbs_temperature, problem.n, problem.trials
    lhat = np.empty((t_total, len(means)))
    for t in range(t_total):
        rng = make_generator(problem.seed, t)
        lhat[t] = _draw_loss_matrix(problem.family, means, n, rng).mean(axis=0)
    lnq = np.log(prior) - c * n * lhat
    lnq -= special.logsumexp(lnq, axis=1, keepdims=True)
    q = np.exp(lnq)
    kl = np.maximum(np.einsum("tm,tm->t", q, lnq - np.log(prior)), 0.0)
    train = np.einsum("tm,tm->t", q, lhat)
    pop = q @ means
    return train, pop, kl


# -- vectorized Cramer inversion --------------------------------------------

def _cram_eval(family, q, p):
    lo, hi = family.mean_domain
    pp = np.asarray(p, dtype=float)
    if math.isfinite(hi):
        pp = np.minimum(pp, np.nextafter(hi, lo))
    if lo == 0.0:
        pp = np.maximum(pp, 1e-300)
    return np.asarray(family.cramer(q, pp), dtype=float)


def invert_cramer_grid(family, alphas, budgets, tol=1e-9):
    """Vectorized Cramer-comparator inversion, mirroring inversion.invert."""
    alphas = np.asarray(alphas, dtype=float)
    budgets = np.asarray(budgets, dtype=float)
    lo = alphas.astype(float).copy()
    hi_dom = family.mean_domain[1]
    bounded = math.isfinite(hi_dom)
    if bounded:
        hi = np.full_like(lo, hi_dom)
    else:
        hi = np.maximum(alphas, 1e-12)
        grow = _cram_eval(family, alphas, hi) <= budgets
        for _ in range(200):
            if not grow.any():
                break
            lo = np.where(grow, hi, lo)
            hi = np.where(grow, hi * 2.0, hi)
            grow = grow & (_cram_eval(family, alphas, hi) <= budgets)
        assert not grow.any(), "no finite bound within 200 doublings"
    for _ in range(100):
        scale = 1.0 if bounded else np.maximum(1.0, np.abs(lo))
        active = (hi - lo) > tol * scale
        if not active.any():
            break
        mid = 0.5 * (lo + hi)
        feas = _cram_eval(family, alphas, mid) <= budgets
        lo = np.where(active & feas, mid, lo)
        hi = np.where(active & ~feas, mid, hi)
    return lo


def _catoni_inf_grid(alphas, budgets, grid_points=64):
    """Grid infimum of the closed Catoni inversion over negative gamma."""
    mags = np.geomspace(CATONI_GAMMA_MAGNITUDES[0], CATONI_GAMMA_MAGNITUDES[1],
                        grid_points)
    rho = np.full_like(np.asarray(alphas, dtype=float), np.inf)
    for mag in mags:
        g = -mag
        r = np.expm1(g * alphas - budgets) / math.expm1(g)
        rho = np.minimum(rho, np.clip(r, 0.0, 1.0))
    return rho


def _bound_vector(kind, family, train, kl, n, delta):
    """Per-trial bound values for a kind; returns (values, flag)."""
    if kind == "catoni_inf":
        assert family.kind == "bernoulli"
        budgets = (kl - math.log(delta)) / n
        return _catoni_inf_grid(train, budgets), "reference_only"
    if kind == "mls":
        assert family.kind == "bernoulli"
        ln_iota = math.log(2.0) + 0.5 * math.log(n)
    elif kind == "pac_cramer_xi":
        ln_iota = np.log([correction_xi(max(n * a, 0.0), b)
                          for a, b in zip(train, kl)])
    elif kind == "pac_cramer_two_e_ceil":
        ln_iota = math.log(correction_two_e_ceil(n))
    elif kind == "pac_cramer_chernoff":
        assert family.kind == "bernoulli", \
            "chernoff correction is certified here only for bernoulli"
        from .upsilon import upsilon_bernoulli_exact
        ln_iota = upsilon_bernoulli_exact(inv.cramer_of(family), n).value
    else:
        raise ValueError(f"verify does not support bound kind {kind!r}")
    budgets = (kl + ln_iota - math.log(delta)) / n
    return invert_cramer_grid(family, train, budgets), None


def clopper_pearson(k, t_total, level=0.95):
    a = (1.0 - level) / 2.0
    lo = 0.0 if k == 0 else float(stats.beta.ppf(a, k, t_total - k + 1))
    hi = 1.0 if k == t_total else float(stats.beta.ppf(1.0 - a, k + 1, t_total - k))
    return lo, hi


def run_trials(problem, bound="pac_cramer_xi", delta=0.05):
    """Simulate the problem and evaluate one bound kind on every trial.

    Returns (records, summary): a TrialRecord per trial plus a summary dict
    with the violation count and its 95% Clopper-Pearson interval.
    """
    train, pop, kl = _simulate(problem)
    values, flag = _bound_vector(bound, problem.family, train, kl,
                                 problem.n, delta)
    violated = pop > values
    records = [TrialRecord(float(train[t]), float(pop[t]), float(kl[t]), None,
                           float(values[t]), bool(violated[t]))
               for t in range(problem.trials)]
    k = int(violated.sum())
    cp_lo, cp_hi = clopper_pearson(k, problem.trials)
    summary = {
        "kind": bound, "family": fam.family_spec(problem.family),
        "m": len(problem.hypothesis_means), "n": problem.n,
        "c": problem.gibbs_temperature, "seed": problem.seed,
        "delta": delta, "trials": problem.trials, "violations": k,
        "rate": k / problem.trials, "cp95_low": cp_lo, "cp95_high": cp_hi,
        "flag": flag,
    }
    return records, summary


def check_average_bound(problem):
    """Average bound on expectation proxies vs the mean population loss.

    The average-case operator applies to exact expectations; here those are
    estimated by the trial means, so the check carries the standard error of
    the population-loss mean.
    """
    train, pop, kl = _simulate(problem)
    from .bounds import average_bound
    res = average_bound(problem.family, float(train.mean()),
                        float(kl.mean()), problem.n)
    se = float(pop.std(ddof=1) / math.sqrt(len(pop)))
    return {"mean_pop": float(pop.mean()), "bound": res.rho, "se_pop": se,
            "slack": res.rho - float(pop.mean())}


# -- the default suite -------------------------------------------------------

CERTIFIED_KINDS = {
    "bernoulli": ("mls", "pac_cramer_xi", "pac_cramer_two_e_ceil"),
    "gaussian": ("pac_cramer_xi", "pac_cramer_two_e_ceil"),
    "poisson": ("pac_cramer_xi", "pac_cramer_two_e_ceil"),
}

_MEAN_INTERVALS = {"bernoulli": (0.05, 0.95), "gaussian": (0.1, 2.0),
                   "poisson": (0.1, 3.0)}


def suite_problems(trials=2000, seeds=(0, 1, 2)):
    """The default grid of synthetic problems (means redrawn per config)."""
    problems = []
    cfg = 0
    for family in (fam.bernoulli(), fam.gaussian(1.0), fam.poisson()):
        for m in (2, 10):
            for n in (10, 100):
                for c in (0.0, 1.0, 5.0):
                    for seed in seeds:
                        cfg += 1
                        rng = make_generator(seed, 700000 + cfg)
                        lo, hi = _MEAN_INTERVALS[family.kind]
                        means = tuple(float(x) for x in rng.uniform(lo, hi, m))
                        prior = (1.0 / m,) * m
                        problems.append(SyntheticProblem(
                            means, prior, family, c, n, trials, seed))
    return problems


def default_suite(delta=0.05, trials=2000, seeds=(0, 1, 2),
                  include_reference=False):
    """Run every certified PAC kind over the default problem grid."""
    summaries = []
    for problem in suite_problems(trials, seeds):
        kinds = CERTIFIED_KINDS[problem.family.kind]
        if include_reference and problem.family.kind == "bernoulli":
            kinds = kinds + ("catoni_inf",)
        for kind in kinds:
            _, summary = run_trials(problem, kind, delta)
            summaries.append(summary)
    return summaries


# -- samplewise vs full-sample comparison ------------------------------------

@dataclass
class SamplewiseComparison:
    samplewise: float
    full: float
    se_samplewise: float
    se_full: float


def run_samplewise_comparison(problem, inner=1000, outer=400, replicates=4):
    """Paired estimate of the per-sample and full-sample average bounds.

    Bernoulli-only.  The 2^M loss vectors of a single sample are enumerated
    exactly; the conditional posterior given each vector is marginalized
    over the other n-1 samples by nested Monte Carlo (inner draws).  The
    prior is the estimated posterior marginal, making the divergences
    mutual informations.  Standard errors come from independent replicates.
    n = 1 and temperature 0 shortcut to exact enumeration.
    """
    family = problem.family
    assert family.kind == "bernoulli", "samplewise comparison is Bernoulli-only"
    means = np.asarray(problem.hypothesis_means, dtype=float)
    prior = np.asarray(problem.prior_weights, dtype=float)
    m, n, c = len(means), problem.n, problem.gibbs_temperature
    assert m <= 12, "exact loss-vector enumeration needs a small hypothesis set"
    vs = np.array(list(itertools.product((0.0, 1.0), repeat=m)))
    ln_pv = (special.xlogy(vs, means) + special.xlog1py(1.0 - vs, -means)).sum(axis=1)
    pv = np.exp(ln_pv)
    comp = inv.cramer_of(family)

    def mean_kl(q_rows, q_ref, weights):
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(q_rows > 0, q_rows * np.log(q_rows / q_ref), 0.0)
        return float(weights @ np.maximum(terms.sum(axis=1), 0.0))

    sw_vals, full_vals = [], []
    for rep in range(replicates):
        if n == 1 or c == 0.0:
            lnq = np.log(prior) - c * n * vs
            q_v = np.exp(lnq - special.logsumexp(lnq, axis=1, keepdims=True))
        else:
            rng = make_generator(problem.seed, 310000, rep)
            q_v = np.empty((len(vs), m))
            for iv, v in enumerate(vs):
                rest = (rng.random((inner, n - 1, m)) < means).sum(axis=1)
                lnq = np.log(prior) - c * (v + rest)
                lnq -= special.logsumexp(lnq, axis=1, keepdims=True)
                q_v[iv] = np.exp(lnq).mean(axis=0)
        q_marg = pv @ q_v
        alpha_sw = float(pv @ np.einsum("vm,vm->v", q_v, vs))
        beta_sw = mean_kl(q_v, q_marg, pv)
        sw_vals.append(inv.invert(comp, BoundQuery(alpha_sw, beta_sw, 1)).rho)

        if n == 1:
            full_vals.append(sw_vals[-1])
            continue
        if c == 0.0:
            alpha_f = float(prior @ means)
            full_vals.append(inv.invert(comp, BoundQuery(alpha_f, 0.0, n)).rho)
            continue
        rng2 = make_generator(problem.seed, 320000, rep)
        lhat = np.empty((outer, m))
        for t in range(outer):
            lhat[t] = ((rng2.random((n, m)) < means)).mean(axis=0)
        lnq = np.log(prior) - c * n * lhat
        lnq -= special.logsumexp(lnq, axis=1, keepdims=True)
        q_z = np.exp(lnq)
        q_bar = q_z.mean(axis=0)
        alpha_f = float(np.einsum("tm,tm->t", q_z, lhat).mean())
        beta_f = mean_kl(q_z, q_bar, np.full(outer, 1.0 / outer))
        full_vals.append(inv.invert(comp, BoundQuery(alpha_f, beta_f, n)).rho)

    sw = np.asarray(sw_vals)
    fu = np.asarray(full_vals)
    se = lambda x: float(x.std(ddof=1) / math.sqrt(len(x))) if len(x) > 1 else 0.0
    return SamplewiseComparison(float(sw.mean()), float(fu.mean()),
                                se(sw), se(fu))
