"""Where does sketched recovery start working?

The closed-form pieces of the package answer this without running any
experiment: gamma_star gives the conjectured sampling threshold, the
exact-recovery classifier says whether full-graph recovery is possible at
all, and the tail bounds quantify how unlikely a single vote error is.
"""
import math

import blocksketch as bs

REGIMES = [
    (9.0, 1.0, 200),
    (30.0, 2.0, 400),
    (8.0, 2.0, 300),    # boundary: sqrt(8) - sqrt(2) = sqrt(2)
    (3.0, 1.0, 300),    # below the exact-recovery threshold
]

print("regime table")
print(f"{'alpha':>6} {'beta':>5} {'n':>5} {'recoverable':>12} "
      f"{'gamma*':>8} {'lambda*':>9}")
for alpha, beta, n in REGIMES:
    verdict = bs.exact_recovery_possible(alpha, beta)
    gs = bs.gamma_star(alpha, beta)
    scale = math.log(n) / n
    lam = bs.lambda_star(alpha * scale, beta * scale)
    print(f"{alpha:6.1f} {beta:5.1f} {n:5d} {verdict:>12} {gs:8.4f} {lam:9.5f}")

print()
print("single-vote failure bounds, alpha=30, beta=2, n=400")
print("K1 = sampled same-community neighbors available, K2 = other side")
p = 30.0 * math.log(400) / 400
q = 2.0 * math.log(400) / 400
print(f"{'K1':>4} {'K2':>4} {'exact':>12} {'chernoff':>12} {'closed form':>12}")
for k1, k2 in [(10, 10), (24, 24), (48, 48), (100, 100)]:
    bp = bs.BoundParams(K1=k1, K2=k2, p=p, q=q)
    exact = bs.binom_diff_tail_exact(bp)
    cher = bs.chernoff_grid_min(bp)
    bound = bs.lemma2_bound(bp)
    print(f"{k1:4d} {k2:4d} {exact:12.4e} {cher:12.4e} {bound:12.4e}")
    assert exact <= cher <= bound  # the sandwich that makes the bound usable

print()
print("the exponent at gamma = gamma_star equals 1 by construction:")
for alpha, beta in [(9.0, 1.0), (30.0, 2.0), (25.0, 4.0)]:
    e = bs.lemma2_exponent(alpha, beta, bs.gamma_star(alpha, beta))
    print(f"  alpha={alpha:5.1f} beta={beta:4.1f}: exponent={e:.15f}")
