"""Numeric convex conjugate of a CGF over its finiteness interval.

Computes sup_t { q t - cgf(t) } by probing a dyadic ladder of t values,
bracketing the (concave) objective's maximizer, and polishing with a bounded
scalar minimizer.  Detects supremum-at-infinity and genuine divergence.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize


class ConjugateDivergent(Exception):
    """The supremum of q t - cgf(t) grows without bound."""


@dataclass
class ConjugateResult:
    value: float
    t_star: float
    at_boundary: bool = False


def parametric_value(cgf, q, t):
    """The conjugate objective q t - cgf(t) at a fixed t."""
    return q * t - cgf(t)


def _objective(cgf, q):
    def g(t):
        with np.errstate(all="ignore"):
            try:
                c = float(cgf(t))
            except (ValueError, OverflowError):
                return -math.inf
        val = q * t - c
        if math.isnan(val):
            return -math.inf
        return val
    return g


def _objective_on_grid(cgf, q, ts):
    """Probe values in one vectorized call when the CGF accepts arrays."""
    tarr = np.asarray(ts, dtype=float)
    with np.errstate(all="ignore"):
        try:
            c = np.asarray(cgf(tarr), dtype=float)
            if c.shape != tarr.shape:
                raise ValueError("scalar-only cgf")
        except (ValueError, OverflowError, TypeError):
            g = _objective(cgf, q)
            return np.array([g(t) for t in ts])
        vals = q * tarr - c
    return np.where(np.isnan(vals), -math.inf, vals)


def _probe_points(tdom):
    lo, hi = tdom.effective()
    pts = set()
    if lo <= 0.0 < hi:
        if lo < 0.0 or tdom.sided == "nonneg_only":
            pts.add(0.0)
    # cap the ladder at 2^20: beyond that, q t - cgf(t) is a difference of
    # near-equal O(t) floats and its O(1) value drowns in rounding noise
    for j in range(-20, 21):
        m = 2.0 ** j
        if lo < m < hi:
            pts.add(m)
        if lo < -m < hi:
            pts.add(-m)
    if math.isfinite(hi):
        d0 = (hi - lo) / 2.0 if math.isfinite(lo) else max(1.0, abs(hi))
        for j in range(1, 46):
            t = hi - d0 * 2.0 ** -j
            if lo < t < hi:
                pts.add(t)
    if math.isfinite(lo) and lo != 0.0:
        d0 = (hi - lo) / 2.0 if math.isfinite(hi) else max(1.0, abs(lo))
        for j in range(1, 46):
            t = lo + d0 * 2.0 ** -j
            if lo < t < hi:
                pts.add(t)
    return sorted(pts)


def _tail_result(ts, vals, sign, q, best):
    if sign > 0:
        v1, v2, v3 = vals[-3], vals[-2], vals[-1]
    else:
        v1, v2, v3 = vals[2], vals[1], vals[0]
    d12, d23 = v2 - v1, v3 - v2
    if d23 > 1e-9 * max(1.0, abs(v3)) and d23 > 0.5 * d12:
        raise ConjugateDivergent(
            f"conjugate objective still growing at the probe-ladder end for q={q}")
    return ConjugateResult(best, sign * math.inf, True)


def numeric_conjugate(cgf, q, t_domain, tol=1e-10):
    """Maximize q t - cgf(t) over the open interval t_domain.

    Parameters
    ----------
    cgf : callable
        Scalar CGF; may raise ValueError outside its finiteness interval.
    q : float
        Query point of the conjugate.
    t_domain : TDomain
        Finiteness interval, possibly restricted to t >= 0.
    tol : float
        Relative accuracy target for the maximizer location.

    Returns
    -------
    ConjugateResult
        value, argmax t_star (+-inf if the supremum is attained in the
        limit), and an at_boundary flag.

    Raises
    ------
    ConjugateDivergent
        If the objective grows without bound along an unbounded direction,
        i.e. q lies outside the closure of the family's mean range.
    """
    g = _objective(cgf, q)
    ts = _probe_points(t_domain)
    assert ts, "empty probe set for conjugate search"
    vals = _objective_on_grid(cgf, q, ts)
    i = int(np.argmax(vals))
    if vals[i] == -math.inf:
        return ConjugateResult(-math.inf, math.nan, False)
    lo, hi = t_domain.effective()
    # an end value within rounding noise of the maximum means the objective
    # plateaus (or keeps growing) toward that end; let the tail rule decide
    near = 1e-9 * max(1.0, abs(vals[i]))
    if math.isinf(hi) and vals[-1] >= vals[i] - near:
        return _tail_result(ts, vals, +1.0, q, vals[i])
    if math.isinf(lo) and vals[0] >= vals[i] - near:
        return _tail_result(ts, vals, -1.0, q, vals[i])
    if i == len(ts) - 1:
        return ConjugateResult(vals[i], ts[i], True)
    if i == 0:
        return ConjugateResult(vals[i], ts[i], True)
    a, b = ts[i - 1], ts[i + 1]
    res = optimize.minimize_scalar(
        lambda t: -g(t), bounds=(a, b), method="bounded",
        options={"xatol": max((b - a) * tol, 1e-300), "maxiter": 500})
    t_star, val = float(res.x), -float(res.fun)
    if vals[i] > val:
        t_star, val = ts[i], vals[i]
    return ConjugateResult(val, t_star, False)


def family_conjugate(family, q, p, sided="full", tol=1e-10):
    """Numeric Cramer value of a family at (q, p), independent of closed forms."""
    return numeric_conjugate(lambda t: family.cgf(p, t), q,
                             family.t_domain(p, sided), tol)
