"""Mean-parameterized bounding distribution families.

Each family fixes one nuisance parameter (variance, shape, scale, ...) and is
indexed by its mean p.  It exposes the cumulant-generating function (CGF) of
the member with mean p, the finiteness interval of that CGF, the closed-form
Cramer function (the convex conjugate of the CGF, equal to a KL divergence
between family members), and reproducible sampling.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .rng import make_generator

FAMILY_KINDS = ("bernoulli", "gaussian", "poisson", "gamma", "laplace",
                "invgauss", "negbin")

_INF = math.inf


def binary_kl(q, p):
    """kl(q, p) = q ln(q/p) + (1-q) ln((1-q)/(1-p)), with 0 ln 0 = 0."""
    return special.rel_entr(q, p) + special.rel_entr(1.0 - q, 1.0 - p)


@dataclass(frozen=True)
class TDomain:
    """Open interval of CGF arguments, optionally restricted to t >= 0."""
    lower: float
    upper: float
    sided: str = "full"  # "full" | "nonneg_only"

    def __post_init__(self):
        assert self.lower < self.upper
        assert self.sided in ("full", "nonneg_only")

    def effective(self):
        """The (lower, upper) pair actually searched."""
        lo = max(self.lower, 0.0) if self.sided == "nonneg_only" else self.lower
        return lo, self.upper

    def contains(self, t):
        lo, hi = self.effective()
        return lo < t < hi or (self.sided == "nonneg_only" and t == 0.0)


@dataclass(frozen=True)
class BoundingFamily:
    """One of the seven supported families, frozen at its nuisance value."""
    kind: str
    nuisance: float | None = None

    def __post_init__(self):
        if self.kind not in FAMILY_KINDS:
            raise ValueError(f"unknown family kind {self.kind!r}")
        needs = self.kind not in ("bernoulli", "poisson")
        if needs and (self.nuisance is None or self.nuisance <= 0):
            raise ValueError(f"{self.kind} requires a positive nuisance parameter")
        if not needs and self.nuisance is not None:
            raise ValueError(f"{self.kind} takes no nuisance parameter")

    # -- mean domain ------------------------------------------------------

    @property
    def mean_domain(self):
        """Open interval of valid means; the loss range is its closure."""
        if self.kind == "bernoulli":
            return (0.0, 1.0)
        if self.kind in ("gaussian", "laplace"):
            return (-_INF, _INF)
        return (0.0, _INF)

    @property
    def bounded_range(self):
        return self.kind == "bernoulli"

    def _check_mean(self, p):
        lo, hi = self.mean_domain
        pp = np.asarray(p)
        if np.any(pp <= lo) or np.any(pp >= hi):
            raise ValueError(f"mean {p} outside the open domain of {self.kind}")

    # -- CGF and its finiteness interval ----------------------------------

    def t_domain(self, p, sided="full"):
        """Finiteness interval of the CGF of the member with mean p."""
        self._check_mean(p)
        v = self.nuisance
        if self.kind in ("bernoulli", "gaussian", "poisson"):
            dom = (-_INF, _INF)
        elif self.kind == "gamma":
            dom = (-_INF, v / p)
        elif self.kind == "laplace":
            dom = (-1.0 / v, 1.0 / v)
        elif self.kind == "invgauss":
            dom = (-_INF, v / (2.0 * p * p))
        else:  # negbin
            dom = (-_INF, math.log1p(v / p))
        return TDomain(dom[0], dom[1], sided)

    def cgf(self, p, t):
        """ln E[e^{tX}] for X ~ P_p. Raises outside the finiteness interval."""
        self._check_mean(p)
        dom = self.t_domain(p)
        tt = np.asarray(t, dtype=float)
        if np.any(tt <= dom.lower) or np.any(tt >= dom.upper):
            raise ValueError(f"t={t} outside the CGF domain {dom.lower, dom.upper}")
        v = self.nuisance
        if self.kind == "bernoulli":
            # log1p form is most precise near t = 0; the logaddexp form
            # ln((1-p) + p e^t) keeps the affine tail exact for large t
            small = np.log1p(p * np.expm1(np.minimum(tt, 30.0)))
            big = np.logaddexp(np.log1p(-p), np.log(p) + tt)
            out = np.where(tt <= 30.0, small, big)
        elif self.kind == "gaussian":
            out = tt * p + 0.5 * v * tt * tt
        elif self.kind == "poisson":
            out = p * np.expm1(tt)
        elif self.kind == "gamma":
            out = -v * np.log1p(-tt * p / v)
        elif self.kind == "laplace":
            out = tt * p - np.log1p(-(v * tt) ** 2)
        elif self.kind == "invgauss":
            # (v/p)(1 - sqrt(1 - 2 p^2 t / v)), written without cancellation at t=0
            x = 2.0 * p * p * tt / v
            out = 2.0 * p * tt / (1.0 + np.sqrt(1.0 - x))
        else:  # negbin
            out = -v * np.log1p(-p * np.expm1(tt) / v)
        return out if isinstance(out, np.ndarray) and out.ndim else float(out)

    # -- Cramer function ---------------------------------------------------

    def cramer(self, q, p):
        """Closed-form Cramer function: KL between family members with means q, p.

        q may lie on the closure of the mean domain (the 0 ln 0 = 0
        convention applies); p must be interior.  Values can be +inf, e.g.
        for the gamma family at q = 0.
        """
        self._check_mean(p)
        qq = np.asarray(q, dtype=float)
        pp = np.asarray(p, dtype=float)
        lo, hi = self.mean_domain
        if np.any(qq < lo) or np.any(qq > hi):
            raise ValueError(f"q={q} outside the loss range of {self.kind}")
        v = self.nuisance
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.kind == "bernoulli":
                out = binary_kl(qq, pp)
            elif self.kind == "gaussian":
                out = (qq - pp) ** 2 / (2.0 * v)
            elif self.kind == "poisson":
                out = pp - qq + special.rel_entr(qq, pp)
            elif self.kind == "gamma":
                rat = qq / pp
                out = np.where(qq > 0, v * (rat - 1.0 - np.log(np.where(qq > 0, rat, 1.0))), _INF)
            elif self.kind == "laplace":
                # exact algebraic form of the conjugate; no 0/0 at q = p
                s = np.hypot(qq - pp, v)
                out = s / v - 1.0 + np.log(2.0 * v / (s + v))
            elif self.kind == "invgauss":
                out = np.where(qq > 0, v * (qq - pp) ** 2 / (2.0 * pp * pp * np.where(qq > 0, qq, 1.0)), _INF)
            else:  # negbin
                out = v * np.log((pp + v) / (qq + v)) + special.xlogy(qq, qq * (pp + v) / (pp * (qq + v)))
        return out if isinstance(out, np.ndarray) and out.ndim else float(out)

    # -- sampling ----------------------------------------------------------

    def sample(self, p, count, seed=None, rng=None):
        """count i.i.d. draws from the member with mean p, as a float array.

        Pass either a seed (a fresh counter-based stream is keyed off it) or
        an existing numpy Generator.
        """
        self._check_mean(p)
        if rng is None:
            rng = make_generator(0 if seed is None else seed)
        v = self.nuisance
        if self.kind == "bernoulli":
            return (rng.random(count) < p).astype(float)
        if self.kind == "gaussian":
            return rng.normal(p, math.sqrt(v), count)
        if self.kind == "poisson":
            return rng.poisson(p, count).astype(float)
        if self.kind == "gamma":
            return rng.gamma(v, p / v, count)
        if self.kind == "laplace":
            # inverse CDF, symmetric around the mean
            u = rng.random(count) - 0.5
            return p - v * np.sign(u) * np.log1p(-2.0 * np.abs(u))
        if self.kind == "invgauss":
            return rng.wald(p, v, count)
        return rng.negative_binomial(v, v / (v + p), count).astype(float)


# -- constructors and the CLI spec-string form ----------------------------

def bernoulli():
    return BoundingFamily("bernoulli")


def gaussian(sigma2):
    return BoundingFamily("gaussian", sigma2)


def poisson():
    return BoundingFamily("poisson")


def gamma(k):
    return BoundingFamily("gamma", k)


def laplace(b):
    return BoundingFamily("laplace", b)


def invgauss(lam):
    return BoundingFamily("invgauss", lam)


def negbin(r):
    return BoundingFamily("negbin", r)


_NUISANCE_KEY = {"gaussian": "sigma2", "gamma": "k", "laplace": "b",
                 "invgauss": "lambda", "negbin": "r"}


def parse_family(spec):
    """Parse a family spec string such as 'gaussian:sigma2=1' or 'poisson'."""
    kind, _, rest = spec.partition(":")
    kind = kind.strip().lower()
    if kind not in FAMILY_KINDS:
        raise ValueError(f"unknown family {kind!r} in spec {spec!r}")
    if kind in ("bernoulli", "poisson"):
        if rest:
            raise ValueError(f"{kind} takes no parameter, got {spec!r}")
        return BoundingFamily(kind)
    key, _, val = rest.partition("=")
    if key.strip() != _NUISANCE_KEY[kind] or not val:
        raise ValueError(f"expected {kind}:{_NUISANCE_KEY[kind]}=<value>, got {spec!r}")
    return BoundingFamily(kind, float(val))


def family_spec(family):
    """Inverse of parse_family."""
    if family.kind in ("bernoulli", "poisson"):
        return family.kind
    return f"{family.kind}:{_NUISANCE_KEY[family.kind]}={family.nuisance:g}"
