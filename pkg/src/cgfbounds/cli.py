"""Command-line front end; every number is produced by the library API."""

import argparse
import dataclasses
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import bounds, conjugate
from . import families as fam
from . import inversion as inv
from . import upsilon as ups
from . import verify as ver
from .rng import make_generator

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NO_FINITE = 3
EXIT_IO = 4
EXIT_CHECK = 5

_BOOL_KEYS = ("clamp",)


def _fmt(v):
    return "%.9g" % float(v)


def _parse_range(text, want_scale=False):
    parts = text.split(":")
    scale = "linear"
    if want_scale and len(parts) == 4:
        scale = parts.pop()
        assert scale in ("linear", "log"), f"unknown scale {scale!r}"
    assert len(parts) == 3, f"range must be lo:hi:steps, got {text!r}"
    lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    assert steps >= 2 and lo < hi
    pts = np.geomspace(lo, hi, steps) if scale == "log" else np.linspace(lo, hi, steps)
    return pts


def _merge_config(argv):
    """Splice key=value config entries in as flags ahead of the real flags."""
    out = list(argv)
    path = None
    for i, tok in enumerate(out):
        if tok == "--config":
            path = out[i + 1]
            del out[i:i + 2]
            break
        if tok.startswith("--config="):
            path = tok.split("=", 1)[1]
            del out[i]
            break
    if path is None:
        return out
    injected = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key in _BOOL_KEYS:
                if value.lower() in ("1", "true", "yes"):
                    injected.append("--" + key)
            else:
                injected.extend(["--" + key, value])
    return out[:1] + injected + out[1:]


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w"), True


def _write_lines(path, lines):
    fh, close = _open_out(path)
    try:
        for line in lines:
            fh.write(line + "\n")
    finally:
        if close:
            fh.close()


# -- commands -----------------------------------------------------------------

def _parse_correction(text):
    if text is None or text in ("one", "xi", "2eceil"):
        return text, None
    if text.startswith("chernoff="):
        return "chernoff", float(text.split("=", 1)[1])
    raise SystemExit(EXIT_USAGE)


def cmd_bound(args):
    family = fam.parse_family(args.family)
    correction, ln_upsilon = _parse_correction(args.correction)
    if args.delta is None:
        res = bounds.average_bound(family, args.alpha, args.beta, args.n)
    elif correction == "one":
        res = bounds.optimistic_reference(family, args.alpha, args.beta,
                                          args.n, args.delta)
    else:
        name = {"xi": "xi", "2eceil": "two_e_ceil", "chernoff": "chernoff",
                None: "xi"}[correction]
        res = bounds.pac_bound(family, args.alpha, args.beta, args.n,
                               args.delta, correction=name,
                               ln_upsilon=ln_upsilon, u=args.u)
    line = f"rho={_fmt(res.rho)} budget={_fmt(res.budget)} status={res.status}"
    if res.flag:
        line += f" flag={res.flag}"
    print(line)
    return EXIT_OK


def cmd_sweep(args):
    family = fam.parse_family(args.family)
    kinds = [k.strip() for k in args.kinds.split(",")]
    for k in kinds:
        assert k in bounds.BOUND_KINDS, f"unknown bound kind {k!r}"
    alphas = _parse_range(args.alpha_range)
    bons = _parse_range(args.bon_range, want_scale=True)

    def cell(ab):
        a, bon = ab
        vals = []
        for kind in kinds:
            try:
                r = bounds.evaluate_kind(kind, family, a, bon * args.n, args.n,
                                         delta=args.delta, sigma2=args.sigma2,
                                         b=args.b)
                v = r.rho
            except (inv.NoFiniteBound, bounds.CorrectionDivergent):
                v = math.nan
            if args.clamp:
                v = min(1.0, v)
            vals.append(v)
        return vals

    cells = [(a, bon) for a in alphas for bon in bons]
    with ThreadPoolExecutor(max_workers=max(1, args.threads)) as ex:
        results = list(ex.map(cell, cells))
    header = "alpha,beta_over_n," + ",".join(kinds) + ",diff"
    lines = [header]
    for (a, bon), vals in zip(cells, results):
        diff = vals[0] - vals[-1]
        lines.append(",".join([_fmt(a), _fmt(bon)] + [_fmt(v) for v in vals]
                              + [_fmt(diff)]))
    _write_lines(args.out, lines)
    return EXIT_OK


def cmd_ndep(args):
    family = fam.parse_family(args.family)
    ns = np.geomspace(args.nmin, args.nmax, args.points)
    ns = list(dict.fromkeys(int(round(x)) for x in ns))
    lines = ["n,bound"]
    for n in ns:
        res = bounds.average_bound(family, args.alpha, args.beta, n)
        lines.append(f"{n},{_fmt(res.rho)}")
    _write_lines(args.out, lines)
    return EXIT_OK


def _parse_comparator(text, family):
    head, _, rest = text.partition(":")
    kv = dict(p.split("=", 1) for p in rest.split(",") if p)
    if head == "kl":
        return inv.binary_kl()
    if head == "cramer":
        return inv.cramer_of(family)
    if head == "catoni":
        return inv.catoni(float(kv["gamma"]))
    if head == "scaled_diff":
        return inv.scaled_diff(float(kv["t"]))
    if head == "poisson_diff":
        return inv.poisson_diff(float(kv["t"]))
    if head == "laplace_diff":
        return inv.laplace_diff(float(kv["t"]), float(kv["b"]))
    if head == "gaussian_diff":
        return inv.gaussian_diff(float(kv["t"]), float(kv["sigma2"]))
    raise SystemExit(EXIT_USAGE)


def cmd_upsilon(args):
    family = fam.parse_family(args.family)
    comp = _parse_comparator(args.comparator, family)
    est = ups.compute_upsilon(comp, family, args.n, seed=args.seed,
                              samples=args.samples)
    record = {"mode": est.mode, "ln_upsilon": est.value, "r_star": est.r_star,
              "ci": list(est.ci) if est.ci is not None else None,
              "tail_error": est.tail_error}
    _write_lines(args.out, [json.dumps(record)])
    return EXIT_OK


def cmd_verify(args):
    family = fam.parse_family(args.family)
    rng = make_generator(args.seed, 900001)
    lo, hi = ver._MEAN_INTERVALS[family.kind]
    means = tuple(float(x) for x in rng.uniform(lo, hi, args.m))
    prior = (1.0 / args.m,) * args.m
    problem = ver.SyntheticProblem(means, prior, family, args.c, args.n,
                                   args.trials, args.seed)
    records, summary = ver.run_trials(problem, args.bound, args.delta)
    lines = [json.dumps(dataclasses.asdict(r)) for r in records]
    lines.append(json.dumps({"summary": summary}))
    _write_lines(args.out, lines)
    passed = summary["cp95_high"] <= args.delta
    verdict = "PASS" if passed else "FAIL"
    if summary["flag"] == "reference_only":
        verdict = "REFERENCE"
    print(f"verify kind={args.bound} family={args.family} trials={summary['trials']} "
          f"violations={summary['violations']} rate={_fmt(summary['rate'])} "
          f"cp95_high={_fmt(summary['cp95_high'])} delta={_fmt(args.delta)} {verdict}")
    if verdict == "FAIL":
        return EXIT_CHECK
    return EXIT_OK


_CHECK_GRIDS = {
    "bernoulli": np.linspace(0.05, 0.95, 7),
    "gaussian": np.linspace(-3.0, 3.0, 7),
    "laplace": np.linspace(-3.0, 3.0, 7),
    "poisson": np.geomspace(0.1, 5.0, 7),
    "gamma": np.geomspace(0.1, 5.0, 7),
    "invgauss": np.geomspace(0.1, 5.0, 7),
    "negbin": np.geomspace(0.1, 5.0, 7),
}


def _conjugate_suite(families):
    worst = 0.0
    for family in families:
        grid = _CHECK_GRIDS[family.kind]
        for q in grid:
            for p in grid:
                closed = family.cramer(float(q), float(p))
                num = conjugate.family_conjugate(family, float(q), float(p))
                err = abs(num.value - closed) / max(1.0, abs(closed))
                worst = max(worst, err)
    return worst


def cmd_conjugate_check(args):
    family = fam.parse_family(args.family)
    err = _conjugate_suite([family])
    ok = err <= args.tol
    print(f"conjugate-check family={args.family} max_err={err:.3g} "
          f"{'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_CHECK


_DEFAULT_CHECK_FAMILIES = ("bernoulli", "gaussian:sigma2=1", "poisson",
                           "gamma:k=2", "laplace:b=1", "invgauss:lambda=1.5",
                           "negbin:r=3")


def cmd_selfcheck(args):
    failures = 0

    err = _conjugate_suite([fam.parse_family(s) for s in _DEFAULT_CHECK_FAMILIES])
    ok = err <= 1e-6
    failures += not ok
    print(f"selfcheck conjugate-vs-closed max_err={err:.3g} {'PASS' if ok else 'FAIL'}")

    n = 100
    alphas = np.linspace(0.02, 0.9, 10)
    bons = np.geomspace(1e-3, 2.0, 10)
    bern = fam.bernoulli()
    worst = 0.0
    for a in alphas:
        for bon in bons:
            beta = bon * n
            lhs = bounds.catoni_inf_bound(float(a), float(beta), n).rho
            rhs = bounds.average_bound(bern, float(a), float(beta), n).rho
            worst = max(worst, abs(lhs - rhs))
    ok = worst <= 1e-6
    failures += not ok
    print(f"selfcheck catoni-vs-kl max_err={worst:.3g} {'PASS' if ok else 'FAIL'}")

    lap = fam.laplace(1.0)
    worst = 0.0
    for a in np.linspace(0.0, 2.0, 10):
        for bon in bons:
            beta = bon * n
            lhs = bounds.diff_based_bound("laplace", float(a), float(beta),
                                          n, b=1.0).rho
            rhs = bounds.average_bound(lap, float(a), float(beta), n).rho
            worst = max(worst, abs(lhs - rhs))
    ok = worst <= 1e-6
    failures += not ok
    print(f"selfcheck laplace-diff-vs-cramer max_err={worst:.3g} {'PASS' if ok else 'FAIL'}")

    return EXIT_OK if failures == 0 else EXIT_CHECK


# -- parser -------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out", default=None, help="output path (default stdout)")
    common.add_argument("--config", default=None,
                        help="key=value file merged under flags (flags win)")

    parser = argparse.ArgumentParser(prog="cgfbounds")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", parents=[common],
                       help="single bound query, prints rho/budget/status")
    p.add_argument("--family", required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--correction", default=None,
                   help="one|xi|2eceil|chernoff=<ln_upsilon> (default xi)")
    p.add_argument("--u", type=float, default=None,
                   help="union-grid size for the 2eceil correction (default n)")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("sweep", parents=[common],
                       help="bound-comparison grid, CSV output")
    p.add_argument("--family", required=True)
    p.add_argument("--kinds", required=True,
                   help="comma list of bound kinds; diff = first - last")
    p.add_argument("--alpha-range", required=True, metavar="LO:HI:STEPS")
    p.add_argument("--bon-range", required=True, metavar="LO:HI:STEPS[:SCALE]",
                   help="beta/n range, scale linear|log")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--sigma2", type=float, default=None)
    p.add_argument("--b", type=float, default=None)
    p.add_argument("--clamp", action="store_true",
                   help="clamp each bound at 1 before differencing")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("ndep", parents=[common],
                       help="average bound vs n at fixed alpha, beta")
    p.add_argument("--family", required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--nmin", type=int, required=True)
    p.add_argument("--nmax", type=int, required=True)
    p.add_argument("--points", type=int, default=25)
    p.set_defaults(func=cmd_ndep)

    p = sub.add_parser("upsilon", parents=[common],
                       help="moment quantity for a comparator/family pair")
    p.add_argument("--comparator", required=True,
                   help="kl|cramer|catoni:gamma=|scaled_diff:t=|poisson_diff:t=|"
                        "laplace_diff:t=,b=|gaussian_diff:t=,sigma2=")
    p.add_argument("--family", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--samples", type=int, default=10**5)
    p.set_defaults(func=cmd_upsilon)

    p = sub.add_parser("verify", parents=[common],
                       help="Monte-Carlo violation-rate check")
    p.add_argument("--family", default="bernoulli")
    p.add_argument("--bound", default="mls")
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--m", type=int, default=10)
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--c", type=float, default=1.0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("conjugate-check", parents=[common],
                       help="numeric conjugate vs closed Cramer function")
    p.add_argument("--family", required=True)
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_conjugate_check)

    p = sub.add_parser("selfcheck", parents=[common],
                       help="identity suites; exit 0 only if all pass")
    p.set_defaults(func=cmd_selfcheck)

    return parser


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _merge_config(argv)
    except OSError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_IO
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (inv.NoFiniteBound, bounds.CorrectionDivergent) as e:
        print(f"no finite bound: {e}", file=sys.stderr)
        return EXIT_NO_FINITE
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, AssertionError) as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
