"""How the penalty strength squeezes the spectral gap.

For one random instance, computes the minimal gap of the interpolated
Hamiltonian for all three formulations across penalty scales 1..5
(scale 1 is the provable-equivalence setting).  Writes one CSV profile
per formulation at scale 1.
"""

import numpy as np

from permqubo import QapInstance, build_formulation, gap_profile

n = 3
rng = np.random.default_rng(7)
inst = QapInstance(n, rng.uniform(-1, 1, (n**2, n**2)), rng.uniform(-1, 1, n**2))

scales = (1.0, 2.0, 3.0, 4.0, 5.0)
print(f"minimal spectral gap along the path, random n={n} instance")
print("scale:     " + "  ".join(f"{s:>7.0f}" for s in scales))
for form in ("baseline", "row_wise", "inserted"):
    row = []
    for scale in scales:
        profile = gap_profile(build_formulation(inst, form, scale), num_samples=33)
        row.append(profile.min_gap)
        if scale == 1.0:
            path = f"gap_{form}.csv"
            profile.to_csv(path)
            print(f"  ({form} scale-1 profile -> {path})")
    print(f"{form:9s}  " + "  ".join(f"{g:7.4f}" for g in row))

print("\nThe gap shrinks as the penalty grows: after hardware-style coupling")
print("normalization, stronger constraints crowd out the data term, so the")
print("provable minimum scale=1 is also the most anneal-friendly choice.")
