"""Classical simulated annealing also prefers the gentler penalties.

Runs thousands of independent Metropolis anneals per formulation on
random 4x4 assignment problems and compares how often each one lands in
the exact optimum.
"""

import numpy as np

from permqubo import QapInstance, build_formulation, simulated_annealing, success_probability

instances = 5
runs = 2000
sweeps = 100
fractions = {f: [] for f in ("baseline", "row_wise", "inserted")}

for seed in range(instances):
    rng = np.random.default_rng([90, seed])
    inst = QapInstance(4, rng.uniform(-1, 1, (16, 16)), rng.uniform(-1, 1, 16))
    for form in fractions:
        model = build_formulation(inst, form)
        samples = simulated_annealing(model, sweeps=sweeps, runs=runs, seed=seed)
        fractions[form].append(success_probability(samples, inst).probability)

print(f"success fraction over {runs} anneals ({sweeps} sweeps), {instances} random n=4 instances")
print(f"{'instance':>9s}  " + "  ".join(f"{f:>9s}" for f in fractions))
for i in range(instances):
    print(f"{i:>9d}  " + "  ".join(f"{fractions[f][i]:>9.3f}" for f in fractions))
print(f"{'mean':>9s}  " + "  ".join(f"{np.mean(fractions[f]):>9.3f}" for f in fractions))

print("\nThe eliminated-variable model searches a 9-bit cube with mild penalties")
print("and wins clearly; per-constraint penalties also beat the single global")
print("penalty, whose huge barriers freeze runs into arbitrary permutations.")
