"""Build a random assignment problem and reformulate it three ways.

Shows the penalty bounds, the size each model needs, the coupling-range
split between data and penalty, and verifies by exhaustive enumeration
that every reformulation recovers the exact constrained optimum.
"""

import numpy as np

from permqubo import (
    QapInstance,
    brute_force_qap,
    build_formulation,
    coupling_report,
    decode,
    exhaustive_minimum,
    penalty_bounds,
    vectorize,
    qap_energy,
)

n = 3
rng = np.random.default_rng(2024)
inst = QapInstance(n, rng.uniform(-1, 1, (n**2, n**2)), rng.uniform(-1, 1, n**2))

best, f_opt = brute_force_qap(inst)
print(f"random n={n} instance: optimal assignment {best.assignment.tolist()}, "
      f"energy {f_opt:.6f}\n")

bounds = penalty_bounds(inst)
print(f"global penalty bound      : {bounds.lambda_baseline:.3f}")
print(f"per-constraint bounds     : {np.round(bounds.lambda_rows, 3).tolist()}")
print(f"reduced-model bounds      : {np.round(bounds.lambda1, 3).tolist()} "
      f"and {bounds.lambda2:.3f} for the cardinality term\n")

for form in ("baseline", "row_wise", "inserted"):
    model = build_formulation(inst, form)
    bits, energy = exhaustive_minimum(model)
    perm = decode(model, bits)
    report = coupling_report(model, inst)
    print(f"{form:9s} dim={model.dim:2d}  min over hypercube = {energy:+.6f} "
          f"(matches optimum: {abs(energy - f_opt) < 1e-9})")
    print(f"          decoded assignment {perm.assignment.tolist()}, "
          f"energy {qap_energy(inst, vectorize(perm)):+.6f}")
    print(f"          penalty/data coupling ratio: quadratic "
          f"{report.ratio_quadratic:,.1f}, linear {report.ratio_linear:,.1f}")
print("\nSmaller ratios leave more of the representable coupling range for the")
print("actual costs, which is why the row-wise and inserted variants behave")
print("better on range-limited annealing hardware.")
