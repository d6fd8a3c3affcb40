"""
Checking the predicted success rate by simulation
=================================================

Run the stopping rule many times on an abstract urn of n items with I
inliers and count how often at least one all-inlier sample turns up.
"""

from exactstop.montecarlo import measure_success_rate, results_to_csv

results = [
    measure_success_rate(20, 6, 5, 0.99, mode, trials=20_000, seed=1)
    for mode in ("approximate", "exact")
]

# s_true_predicted is 1 - (1 - P_e)^N at the iteration count actually used
print(results_to_csv(results))

for r in results:
    print(f"{r.mode:>12}: {r.success_rate:.3f} +- {r.half_width:.3f} after {r.iterations} iterations")
