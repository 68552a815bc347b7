"""Bound inversion: largest population loss consistent with a comparator budget.

The two operators differ only in the budget: the high-probability form uses
(beta + ln(iota/delta))/n, the average form (beta + ln iota)/n.  Both reduce
to sup{rho : comparator(alpha, rho) <= budget}, found by bracketed bisection.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import families as fam


class NoFiniteBound(Exception):
    """Bracket expansion exhausted without the comparator exceeding the budget."""


class NonMonotoneComparator(Exception):
    """The comparator failed the nondecreasing-in-rho probe at this alpha."""


@dataclass(frozen=True)
class Comparator:
    """A convex discrepancy Delta(q, p) between training loss q and mean p."""
    form: str
    fn: object                      # callable (q, p) -> real
    loss_range: tuple               # closure of the p search interval
    params: dict = field(default_factory=dict)
    exact_inverse: object = None    # callable (alpha, budget) -> rho, if closed form

    def eval(self, q, p):
        return self.fn(q, p)


# -- comparator catalog ----------------------------------------------------

def cramer_of(family):
    """The family's Cramer function as a comparator (the optimal choice)."""
    lo, hi = family.mean_domain

    def fn(q, p):
        if p == lo or p == hi:
            # continuous extension onto the closed endpoints of the mean range
            qq = np.asarray(q, dtype=float)
            out = np.where(qq == p, 0.0, math.inf)
            return float(out) if out.ndim == 0 else out
        return family.cramer(q, p)

    return Comparator(f"cramer[{fam.family_spec(family)}]", fn, (lo, hi))


def binary_kl():
    c = cramer_of(fam.bernoulli())
    return Comparator("binary_kl", c.fn, c.loss_range)


def catoni(gamma):
    """gamma*q - ln(1 - p + p e^gamma); nondecreasing in p for gamma < 0."""
    assert gamma != 0.0
    eg = math.expm1(gamma)

    def fn(q, p):
        return gamma * q - math.log1p(p * eg)

    def inv(alpha, budget):
        rho = math.expm1(gamma * alpha - budget) / eg
        return min(max(rho, 0.0), 1.0)

    return Comparator("catoni", fn, (0.0, 1.0), {"gamma": gamma},
                      exact_inverse=inv)


def scaled_diff(t, loss_range=(-math.inf, math.inf)):
    """Plain difference comparator t (p - q)."""

    def fn(q, p):
        return t * (p - q)

    inv = (lambda alpha, budget: alpha + budget / t) if t > 0 else None
    return Comparator("scaled_diff", fn, loss_range, {"t": t},
                      exact_inverse=inv)


def poisson_diff(t):
    """(1 - e^{-t}) p - t q; carries its own offset so that Upsilon = 1."""
    assert t > 0
    c = -math.expm1(-t)

    def fn(q, p):
        return c * p - t * q

    def inv(alpha, budget):
        return (t * alpha + budget) / c

    return Comparator("poisson_diff", fn, (0.0, math.inf), {"t": t},
                      exact_inverse=inv)


def laplace_diff(t, b):
    """t (p - q) + ln(1 - b^2 t^2), the offset difference comparator."""
    assert 0.0 < t < 1.0 / b
    off = math.log1p(-(b * t) ** 2)

    def fn(q, p):
        return t * (p - q) + off

    def inv(alpha, budget):
        return alpha + (budget - off) / t

    return Comparator("laplace_diff", fn, (-math.inf, math.inf),
                      {"t": t, "b": b}, exact_inverse=inv)


def gaussian_diff(t, sigma2):
    """t (p - q) - sigma^2 t^2 / 2, the offset difference comparator."""
    assert t > 0
    off = -0.5 * sigma2 * t * t

    def fn(q, p):
        return t * (p - q) + off

    def inv(alpha, budget):
        return alpha + (budget - off) / t

    return Comparator("gaussian_diff", fn, (-math.inf, math.inf),
                      {"t": t, "sigma2": sigma2}, exact_inverse=inv)


def custom(eval_fn, loss_range, form="custom", params=None):
    return Comparator(form, eval_fn, loss_range, params or {})


# -- queries and results ---------------------------------------------------

@dataclass(frozen=True)
class BoundQuery:
    """Inputs of a single bound evaluation.

    iota selects the log-correction: "one", "mls_sqrt" (2 sqrt n), "xi",
    "two_e_ceil_u" (u taken from the u field, defaulting to n), or
    "explicit" with iota_value holding ln(iota) in nats.  delta absent means
    the average-case operator (no confidence term).
    """
    alpha: float
    beta: float
    n: int
    delta: float | None = None
    iota: str = "one"
    iota_value: float | None = None
    u: float | None = None

    def __post_init__(self):
        assert self.beta >= 0.0 and self.n >= 1
        if self.delta is not None:
            assert 0.0 < self.delta < 1.0

    def ln_iota(self):
        if self.iota == "one":
            return 0.0
        if self.iota == "explicit":
            return float(self.iota_value)
        if self.iota == "mls_sqrt":
            return math.log(2.0) + 0.5 * math.log(self.n)
        from .upsilon import correction_two_e_ceil, correction_xi
        if self.iota == "xi":
            return math.log(correction_xi(max(self.n * self.alpha, 0.0), self.beta))
        if self.iota == "two_e_ceil_u":
            u = self.n if self.u is None else self.u
            return math.log(correction_two_e_ceil(u))
        raise ValueError(f"unknown iota mode {self.iota!r}")

    def budget(self):
        b = self.beta + self.ln_iota()
        if self.delta is not None:
            b -= math.log(self.delta)
        return b / self.n


@dataclass
class BoundResult:
    rho: float
    budget: float
    bracket: tuple
    iterations: int
    status: str            # converged | capped_at_domain | budget_nonpositive
    param_star: float | None = None
    flag: str | None = None


# -- the inversion engine --------------------------------------------------

def _safe_eval(comp, alpha, p):
    try:
        v = comp.eval(alpha, p)
    except (ValueError, OverflowError):
        return math.inf
    v = float(v)
    return math.inf if math.isnan(v) else v


def invert_at_budget(comp, alpha, budget, tol=1e-9):
    """sup{rho in the loss range : comp(alpha, rho) <= budget} by bisection."""
    assert math.isfinite(budget), "budget must be finite"
    lo_r, hi_r = comp.loss_range
    if not lo_r <= alpha <= hi_r:
        raise ValueError(f"alpha={alpha} outside the loss range of {comp.form}")
    bounded = math.isfinite(hi_r)

    try:
        e0 = float(comp.eval(alpha, alpha))
        if not math.isfinite(e0):
            e0 = 0.0
    except (ValueError, OverflowError):
        e0 = 0.0
    if budget <= e0:
        return BoundResult(alpha, budget, (alpha, alpha), 0, "budget_nonpositive")

    # three-point probe of the nondecreasing-in-rho requirement
    d = (hi_r - alpha) / 8.0 if bounded else max(abs(alpha), 1.0) * 0.5
    if d > 0:
        vals = [_safe_eval(comp, alpha, alpha + k * d) for k in (1, 2, 3)]
        for a, b in zip(vals, vals[1:]):
            if b < a - 1e-12 * max(1.0, abs(a)):
                raise NonMonotoneComparator(
                    f"{comp.form} is decreasing in rho near alpha={alpha}")

    if bounded:
        if _safe_eval(comp, alpha, hi_r) <= budget:
            return BoundResult(hi_r, budget, (alpha, hi_r), 0, "capped_at_domain")
        lo, hi = alpha, hi_r
    else:
        lo, hi = alpha, max(alpha, 1e-12)
        expansions = 0
        while _safe_eval(comp, alpha, hi) <= budget:
            lo = hi
            hi *= 2.0
            expansions += 1
            if expansions > 200:
                raise NoFiniteBound(
                    f"{comp.form}: budget {budget} not exceeded after "
                    f"200 bracket doublings")

    iterations = 0
    while True:
        scale = 1.0 if bounded else max(1.0, abs(lo))
        if hi - lo <= tol * scale:
            break
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        if _safe_eval(comp, alpha, mid) <= budget:
            lo = mid
        else:
            hi = mid
        iterations += 1
    # return the feasible endpoint, never an overestimate
    return BoundResult(lo, budget, (lo, hi), iterations, "converged")


def invert(comp, query, tol=1e-9):
    """Evaluate the bound operator for a query; see BoundQuery for the budget."""
    return invert_at_budget(comp, query.alpha, query.budget(), tol)


# -- Poisson closed form ---------------------------------------------------

def _u_root(B):
    """Root u >= 1 of u - ln u = 1 + B, i.e. -W_{-1}(-e^{-1-B}); B >= 0.

    Seeded by the branch-point series for small B and the asymptotic form
    otherwise, then polished by Halley steps.  Stable for all B >= 0, far
    beyond where -e^{-1-B} underflows.
    """
    if B <= 0.0:
        return 1.0
    if B < 0.5:
        p = math.sqrt(2.0 * -math.expm1(-B))
        u = 1.0 + p + p * p / 3.0 + 11.0 * p ** 3 / 72.0
    else:
        y = 1.0 + B
        u = y + math.log(y)
    for _ in range(80):
        f = u - math.log(u) - 1.0 - B
        fp = 1.0 - 1.0 / u
        if fp == 0.0:
            break
        d = fp - 0.5 * f / (fp * u * u)
        step = f / d
        u -= step
        if abs(step) <= 1e-16 * u:
            break
    return u


def lambert_wm1(x):
    """Lambert W, lower branch: the root w <= -1 of w e^w = x, x in [-1/e, 0)."""
    if not -1.0 / math.e <= x < 0.0:
        raise ValueError("lambert_wm1 requires -1/e <= x < 0")
    return -_u_root(-math.log(-x) - 1.0)


def invert_closed_form_poisson(alpha, budget):
    """Closed-form Poisson Cramer inversion -alpha W_{-1}(-e^{-1-budget/alpha}).

    Solved in the stable parameterization u - ln u = 1 + budget/alpha with
    u = rho/alpha, immune to the underflow of the W argument.  alpha = 0
    falls back to the q = 0 convention rho = budget.
    """
    if alpha < 0.0 or budget < 0.0:
        raise ValueError("alpha and budget must be nonnegative")
    if alpha == 0.0:
        return budget
    return alpha * _u_root(budget / alpha)


# -- one-parameter infima --------------------------------------------------

def _rho_at(make_comp, alpha, budget, tol):
    comp = make_comp()
    if comp.exact_inverse is not None:
        rho = comp.exact_inverse(alpha, budget)
        hi_r = comp.loss_range[1]
        status = "capped_at_domain" if rho == hi_r else "converged"
        return BoundResult(rho, budget, (rho, rho), 0, status)
    try:
        return invert_at_budget(comp, alpha, budget, tol)
    except NoFiniteBound:
        return None


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def infimum_over_parameter(make_comp, query, param_range, scale="log",
                           grid_points=64, tol=1e-9):
    """min over a parameter of the inverted bound, grid scan + golden refine.

    make_comp maps a parameter value to a Comparator.  The per-parameter
    bound is assumed quasiconvex on param_range; the scan is log- or
    linear-spaced per `scale`.  Raises NoFiniteBound if no parameter gives a
    finite bound.
    """
    lo, hi = param_range
    if scale == "log":
        assert lo > 0
        xform, inv_xform = math.log, math.exp
    else:
        xform, inv_xform = (lambda x: x), (lambda x: x)
    xs = np.linspace(xform(lo), xform(hi), grid_points)
    alpha, budget = query.alpha, query.budget()

    def rho_of(x):
        res = _rho_at(lambda: make_comp(inv_xform(x)), alpha, budget, tol)
        return (math.inf, None) if res is None else (res.rho, res)

    vals = [rho_of(x) for x in xs]
    i = int(np.argmin([v[0] for v in vals]))
    best_rho, best = vals[i]
    best_x = xs[i]
    if best is None:
        raise NoFiniteBound(f"no parameter in {param_range} yields a finite bound")

    a = xs[max(i - 1, 0)]
    b = xs[min(i + 1, len(xs) - 1)]
    c, d = b - _GOLDEN * (b - a), a + _GOLDEN * (b - a)
    fc, rc = rho_of(c)
    fd, rd = rho_of(d)
    for _ in range(80):
        if fc <= fd:
            b, d, fd, rd = d, c, fc, rc
            c = b - _GOLDEN * (b - a)
            fc, rc = rho_of(c)
        else:
            a, c, fc, rc = c, d, fd, rd
            d = a + _GOLDEN * (b - a)
            fd, rd = rho_of(d)
        if b - a <= 1e-10 * max(1.0, abs(a)):
            break
    for x, (v, r) in ((c, (fc, rc)), (d, (fd, rd))):
        if v < best_rho and r is not None:
            best_rho, best, best_x = v, r, x

    best = replace(best, param_star=inv_xform(best_x))
    return best
