"""Check a high-probability bound empirically on a synthetic problem.

Draws losses from the exact bounding family, forms the Gibbs posterior, and
counts how often the population loss exceeds the bound.  A certified bound
at delta=0.05 should land under the line; the samplewise variant should be
at least as tight as the full-sample one.
"""

from cgfbounds import families as fam
from cgfbounds import verify

problem = verify.SyntheticProblem(
    hypothesis_means=(0.15, 0.3, 0.45, 0.6, 0.8),
    prior_weights=(0.2,) * 5,
    family=fam.bernoulli(),
    gibbs_temperature=1.0,
    n=50, trials=2000, seed=11)

for kind in ("mls", "pac_cramer_xi", "pac_cramer_two_e_ceil"):
    _, s = verify.run_trials(problem, kind, delta=0.05)
    print("%-22s violations %4d/%d   CP95 upper %.4f"
          % (kind, s["violations"], s["trials"], s["cp95_high"]))

avg = verify.check_average_bound(problem)
print("\naverage bound %.4f vs mean population loss %.4f (slack %.4f)"
      % (avg["bound"], avg["mean_pop"], avg["slack"]))

small = verify.SyntheticProblem(
    hypothesis_means=(0.2, 0.45, 0.7), prior_weights=(1 / 3,) * 3,
    family=fam.bernoulli(), gibbs_temperature=1.0, n=10, trials=1, seed=3)
cmp = verify.run_samplewise_comparison(small, inner=500, outer=200,
                                       replicates=3)
print("\nsamplewise %.4f (se %.4f)  vs  full %.4f (se %.4f)"
      % (cmp.samplewise, cmp.se_samplewise, cmp.full, cmp.se_full))
