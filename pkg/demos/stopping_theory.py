"""
How many iterations does RANSAC really need?
============================================

The textbook stopping rule treats a minimal sample as k draws *with*
replacement, so the all-inlier probability is (I/n)^k. Real samplers draw
without replacement, which is slightly less likely to give k inliers.
This script tabulates the gap for small problems.
"""

from exactstop import ConsensusCounts, StopConfig, Criterion
from exactstop import relative_error, true_success_rate, undersampling_ratio

# 20 measurements, 6 inliers, ellipse-sized samples
c = ConsensusCounts(n=20, inliers=6, k=5)
approx = StopConfig(mode=Criterion.APPROXIMATE)
exact = StopConfig(mode=Criterion.EXACT)

print("P_a =", approx.probability(c), " N_a =", approx.iterations(c))
print("P_e =", exact.probability(c), " N_e =", exact.iterations(c))

# the approximate count falls well short of the 99% target
print("success actually reached with N_a:", round(true_success_rate(c, 0.99), 3))

# the gap grows with k and shrinks with n
print()
print(f"{'n':>5} {'k':>2} {'epsilon':>8} {'extra iters':>12}")
for n in (20, 50, 100, 1000):
    for k in (2, 5, 7):
        c = ConsensusCounts(n, round(0.3 * n), k)
        if c.inliers < k:
            # no all-inlier sample exists at all
            print(f"{n:>5} {k:>2} {'cutoff':>8}")
            continue
        print(f"{n:>5} {k:>2} {relative_error(c):8.4f} {100 * undersampling_ratio(c, 0.99):11.1f}%")
