"""The moment quantity Upsilon_Delta(n) = sup_r E exp(n Delta(xbar, r)).

Routes: exact binomial sums (Bernoulli), truncated series with a divergence
certificate (Poisson), log-domain quadrature of the sample-mean density
(Gaussian, gamma, inverse Gaussian), Monte Carlo otherwise.  Also houses the
union-bound corrections that substitute for Upsilon when it diverges.
All values are carried in log domain.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .rng import make_generator

_LN2 = math.log(2.0)


@dataclass
class UpsilonEstimate:
    mode: str                   # exact | truncated | monte_carlo | divergent
    value: float                # ln Upsilon; +inf when mode = divergent
    tail_error: float | None = None
    ci: tuple | None = None
    r_star: float | None = None
    r_at_cap: bool = False
    divergent_suspect: bool = False


def _delta_vec(comp, qs, r):
    """Evaluate a comparator on an array of q at scalar r, looping if needed."""
    try:
        out = np.asarray(comp.eval(qs, r), dtype=float)
        if out.shape == np.shape(qs):
            return out
    except (ValueError, TypeError):
        pass
    return np.array([comp.eval(float(q), r) for q in np.atleast_1d(qs)])


# -- Bernoulli: exact binomial sum ------------------------------------------

def upsilon_bernoulli_exact(comp, n, r_grid=2001):
    """ln sup_r sum_k C(n,k) r^k (1-r)^{n-k} e^{n Delta(k/n, r)}, exactly.

    The sum is evaluated in log domain on an interior r-grid (an integer
    resolution or an explicit array of interior r values), the best r
    refined by golden section; the endpoint values r in {0, 1} (degenerate
    means) are included via the 0 ln 0 convention.
    """
    ks = np.arange(n + 1)
    qs = ks / n
    ln_binom = (special.gammaln(n + 1) - special.gammaln(ks + 1)
                - special.gammaln(n - ks + 1))

    def ln_value(r):
        ln_pmf = ln_binom + special.xlogy(ks, r) + special.xlog1py(n - ks, -r)
        d = _delta_vec(comp, qs, r)
        assert np.all(np.isfinite(d)), f"comparator not finite on [0,1] at r={r}"
        return float(special.logsumexp(ln_pmf + n * d))

    if np.ndim(r_grid) == 0:
        rs = np.linspace(1e-6, 1.0 - 1e-6, int(r_grid))
    else:
        rs = np.sort(np.asarray(r_grid, dtype=float))
        assert rs[0] > 0.0 and rs[-1] < 1.0, "r grid must be interior to (0,1)"
    vals = np.array([ln_value(r) for r in rs])
    i = int(np.argmax(vals))
    a, b = rs[max(i - 1, 0)], rs[min(i + 1, len(rs) - 1)]
    g = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = ln_value(c), ln_value(d)
    for _ in range(60):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = ln_value(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = ln_value(d)
    best, r_star = max((vals[i], rs[i]), (fc, c), (fd, d))
    for r_end in (0.0, 1.0):
        v = n * float(comp.eval(r_end, r_end)) if _endpoint_ok(comp, r_end) else -math.inf
        if v > best:
            best, r_star = v, r_end
    return UpsilonEstimate("exact", best, r_star=float(r_star))


def _endpoint_ok(comp, r):
    try:
        return math.isfinite(float(comp.eval(r, r)))
    except (ValueError, OverflowError):
        return False


# -- Poisson: truncated series with divergence certificate ------------------

_CHUNK = 4096


def _series_one_r(comp, n, r, eps, max_terms):
    """Returns (ln_sum, rel_tail) or None when certified divergent at this r."""
    lam = n * r
    ln_lam = math.log(lam)
    ln_sum = -math.inf
    slow_run = 0
    k0 = 0
    prev_ln_last = None
    while k0 < max_terms:
        ks = np.arange(k0, k0 + _CHUNK)
        ln_t = -lam + ks * ln_lam - special.gammaln(ks + 1.0) \
            + n * _delta_vec(comp, ks / n, r)
        ln_sum = np.logaddexp(ln_sum, special.logsumexp(ln_t))
        if ln_sum > 30.0:
            return None
        # certificate: a long run of term ratios inside (1 - 1/(k+1), 1] means
        # the terms decay, but slower than any summable power tail; growing
        # ratios are left to the partial-sum cutoff above
        dln = np.diff(np.concatenate(([prev_ln_last], ln_t)) if prev_ln_last
                      is not None else ln_t)
        slow = (dln > np.log1p(-1.0 / (ks[-len(dln):] + 1.0))) & (dln <= 0.0)
        if slow.all():
            slow_run += len(slow)
        else:
            last_fast = np.flatnonzero(~slow)[-1]
            slow_run = len(slow) - 1 - last_fast
        if k0 >= 10**4 and slow_run >= 10**4:
            return None
        ratio = float(np.exp(dln[-1]))
        if ks[-1] > lam and ratio < 1.0:
            ln_tail = float(ln_t[-1]) + math.log(ratio / (1.0 - ratio))
            if ln_tail <= math.log(eps) + ln_sum:
                return float(ln_sum), float(math.exp(ln_tail - ln_sum))
        prev_ln_last = float(ln_t[-1])
        k0 += _CHUNK
    return float(ln_sum), math.nan


def upsilon_poisson_series(comp, n, eps=1e-10, r_grid=None, max_terms=10**6):
    """Series evaluation of Upsilon over the Poisson family.

    Sums Poisson(nr) mass times e^{n Delta(k/n, r)} per grid r until the
    geometric tail drops below eps.  Declares divergence when the partial
    sum passes e^30 or when 10^4 consecutive term ratios exceed 1 - 1/(k+1)
    beyond k = 10^4 (sub-summable decay, the Stirling k^{-1/2} signature).
    """
    rs = np.geomspace(1e-6, 50.0, 121) if r_grid is None else np.asarray(r_grid)
    best, best_r, worst_tail = -math.inf, None, 0.0
    for r in rs:
        out = _series_one_r(comp, n, float(r), eps, max_terms)
        if out is None:
            return UpsilonEstimate("divergent", math.inf, r_star=float(r))
        ln_v, tail = out
        if ln_v > best:
            best, best_r = ln_v, float(r)
        worst_tail = max(worst_tail, tail) if math.isfinite(tail) else math.nan
    return UpsilonEstimate("truncated", best, tail_error=worst_tail, r_star=best_r)


# -- Gaussian / gamma / inverse Gaussian: density quadrature ----------------

def _ln_pdf_mean(family, r, n, xs):
    """Log density of the mean of n i.i.d. draws from the member with mean r."""
    v = family.nuisance
    with np.errstate(divide="ignore", invalid="ignore"):
        if family.kind == "gaussian":
            s2 = v / n
            return -0.5 * np.log(2.0 * math.pi * s2) - (xs - r) ** 2 / (2.0 * s2)
        if family.kind == "gamma":
            a = n * v  # shape of the sum; mean of the sum is n r
            scale = r / a
            return special.xlogy(a - 1.0, xs) - xs / scale \
                - special.gammaln(a) - a * math.log(scale)
        if family.kind == "invgauss":
            lam = n * v  # mean of n IG(r, v) draws is IG(r, n v)
            return 0.5 * (np.log(lam) - math.log(2.0 * math.pi) - 3.0 * np.log(xs)) \
                - lam * (xs - r) ** 2 / (2.0 * r * r * xs)
    raise ValueError(f"no closed mean density for {family.kind}")


def _ln_trapz(lnh, xs):
    seg = np.logaddexp(lnh[:-1], lnh[1:]) - _LN2 + np.log(np.diff(xs))
    return float(special.logsumexp(seg))


def _quad_one_r(comp, family, n, r, points):
    if family.kind == "gaussian":
        sd = math.sqrt(family.nuisance / n)
        coarse = np.linspace(r - 60.0 * math.sqrt(family.nuisance) - 60.0 * sd,
                             r + 60.0 * math.sqrt(family.nuisance) + 60.0 * sd, 2001)
    else:
        coarse = np.geomspace(r * 1e-9, r * 1e9, 2001)
    lnh_c = _ln_pdf_mean(family, r, n, coarse) + n * _delta_vec(comp, coarse, r)
    lnh_c = np.where(np.isnan(lnh_c), -math.inf, lnh_c)
    ipk = int(np.argmax(lnh_c))
    peak = float(lnh_c[ipk])
    if max(float(lnh_c[0]), float(lnh_c[-1])) > peak - 60.0:
        return None  # tails refuse to decay: integral effectively divergent
    if family.kind == "gaussian":
        w = max(10.0 * sd, 10.0 * (coarse[1] - coarse[0]))
        fine = np.linspace(coarse[ipk] - w, coarse[ipk] + w, points)
    else:
        fine = np.geomspace(coarse[ipk] * math.exp(-3.0),
                            coarse[ipk] * math.exp(3.0), points)
    xs = np.unique(np.concatenate((coarse, fine)))
    lnh = _ln_pdf_mean(family, r, n, xs) + n * _delta_vec(comp, xs, r)
    lnh = np.where(np.isnan(lnh), -math.inf, lnh)
    total = _ln_trapz(lnh, xs)
    # relative weight of the outermost tail segments, as a quality estimate
    tail = np.exp(max(_ln_trapz(lnh[:20], xs[:20]),
                      _ln_trapz(lnh[-20:], xs[-20:])) - total)
    return total, tail


def upsilon_quadrature(comp, family, n, r_grid=None, points=4001):
    """Quadrature of E e^{n Delta(xbar, r)} for families with a closed mean density.

    Detects divergence when the log integrand fails to decay by 60 nats at
    the extreme ends of a wide coarse grid (for the Cramer comparators of
    the gamma family the integrand behaves like 1/x at both ends).
    """
    if r_grid is None:
        if family.kind == "gaussian":
            rs = np.linspace(-10.0, 10.0, 41)
        else:
            rs = np.geomspace(1e-6, 50.0, 41)
    else:
        rs = np.asarray(r_grid, dtype=float)
    best, best_r, worst_tail = -math.inf, None, 0.0
    for r in rs:
        out = _quad_one_r(comp, family, n, float(r), points)
        if out is None:
            return UpsilonEstimate("divergent", math.inf, r_star=float(r))
        ln_v, tail = out
        if ln_v > best:
            best, best_r = ln_v, float(r)
        worst_tail = max(worst_tail, tail)
    at_cap = (best_r == float(rs[-1])) and not math.isfinite(family.mean_domain[1])
    return UpsilonEstimate("truncated", best, tail_error=worst_tail,
                           r_star=best_r, r_at_cap=at_cap)


# -- Monte Carlo -------------------------------------------------------------

def upsilon_monte_carlo(comp, family, n, r_grid=None, samples=10**5, seed=0):
    """Sample-mean Monte Carlo estimate of ln sup_r E e^{n Delta(xbar, r)}.

    Per-r streams are keyed by (seed, r-index) so the result is independent
    of evaluation order.  A 95% bootstrap CI (500 resamples) is attached at
    the maximizing r.  The divergent_suspect flag fires when the estimate
    still grows across sample-size prefixes and the top 1% of draws carries
    more than half the total weight.
    """
    if r_grid is None:
        lo, hi = family.mean_domain
        if math.isfinite(hi):
            rs = np.linspace(lo + 1e-6 * (hi - lo), hi - 1e-6 * (hi - lo), 21)
        elif lo == 0.0:
            rs = np.geomspace(1e-3, 50.0, 21)
        else:
            rs = np.linspace(-10.0, 10.0, 21)
    else:
        rs = np.asarray(r_grid, dtype=float)

    def ln_mean_exp(w):
        return float(special.logsumexp(w) - math.log(len(w)))

    best, best_r, best_w = -math.inf, None, None
    for idx, r in enumerate(rs):
        rng = make_generator(seed, idx)
        draws = family.sample(float(r), samples * n, rng=rng).reshape(samples, n)
        w = n * _delta_vec(comp, draws.mean(axis=1), float(r))
        v = ln_mean_exp(w)
        if v > best:
            best, best_r, best_w = v, float(r), w

    shift = float(np.max(best_w))
    expw = np.exp(best_w - shift)
    rng = make_generator(seed, len(rs))
    boot = np.empty(500)
    step = max(1, 5 * 10**6 // samples)
    for j in range(0, 500, step):
        k = min(step, 500 - j)
        idx = rng.integers(0, samples, (k, samples))
        boot[j:j + k] = np.log(expw[idx].mean(axis=1)) + shift
    ci = (float(np.quantile(boot, 0.025)), float(np.quantile(boot, 0.975)))

    w_sorted = np.sort(best_w)
    top = max(1, samples // 100)
    share = math.exp(special.logsumexp(w_sorted[-top:]) - special.logsumexp(w_sorted))
    quarters = [ln_mean_exp(best_w[: samples * j // 4]) for j in (1, 2, 3, 4)]
    growing = all(b > a for a, b in zip(quarters, quarters[1:]))
    lo_dom, hi_dom = family.mean_domain
    at_cap = (not math.isfinite(hi_dom)) and best_r == float(rs[-1])
    return UpsilonEstimate("monte_carlo", best, ci=ci, r_star=best_r,
                           r_at_cap=at_cap,
                           divergent_suspect=bool(growing and share > 0.5))


# -- dispatcher and corrections ----------------------------------------------

def compute_upsilon(comp, family, n, seed=0, **kw):
    """Route a (comparator, family) pair to its best Upsilon evaluation.

    Comparators constructed to integrate to one over their own family skip
    numerics entirely and return ln Upsilon = 0 exactly.
    """
    p = comp.params
    if comp.form == "poisson_diff" and family.kind == "poisson":
        return UpsilonEstimate("exact", 0.0)
    if comp.form == "laplace_diff" and family.kind == "laplace" \
            and p.get("b") == family.nuisance:
        return UpsilonEstimate("exact", 0.0)
    if comp.form == "gaussian_diff" and family.kind == "gaussian" \
            and p.get("sigma2") == family.nuisance:
        return UpsilonEstimate("exact", 0.0)
    if comp.form == "catoni" and family.kind == "bernoulli":
        return UpsilonEstimate("exact", 0.0)
    if comp.form == "scaled_diff" and p.get("t") == 0.0:
        return UpsilonEstimate("exact", 0.0)
    if family.kind == "bernoulli":
        return upsilon_bernoulli_exact(comp, n, kw.get("r_grid", 2001))
    if family.kind == "poisson":
        return upsilon_poisson_series(comp, n, kw.get("eps", 1e-10),
                                      kw.get("r_grid"))
    if family.kind in ("gaussian", "gamma", "invgauss"):
        return upsilon_quadrature(comp, family, n, kw.get("r_grid"),
                                  kw.get("points", 4001))
    return upsilon_monte_carlo(comp, family, n, kw.get("r_grid"),
                               kw.get("samples", 10**5), seed)


def correction_xi(n_times_trainloss, kl):
    """The union-bound correction pi^2 (1 + min{n L, KL})^2 / 3."""
    assert n_times_trainloss >= 0.0 and kl >= 0.0
    m = min(n_times_trainloss, kl)
    return math.pi ** 2 * (1.0 + m) ** 2 / 3.0


def correction_two_e_ceil(u_value):
    """The union-bound correction 2 e ceil(u); u below 1 still pays one cell."""
    assert u_value >= 0.0
    return 2.0 * math.e * max(1, math.ceil(u_value))
