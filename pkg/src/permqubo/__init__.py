"""Permutation-constrained quadratic assignment problems as unconstrained
binary models, with spectral-gap analysis, annealing simulators and a
benchmark harness."""

__version__ = "0.1.0"

from .errors import SizeCapError, SolverError
from .qap import (
    DistanceData,
    PermutationMatrix,
    QapInstance,
    brute_force_qap,
    isometric_cost,
    qap_energy,
    symmetrize,
    vectorize,
    worst_permutation,
)
from .qubo import (
    ConstraintSystem,
    CouplingReport,
    PenaltyBounds,
    QuboModel,
    SpinModel,
    build_baseline,
    build_constraints,
    build_formulation,
    build_inserted,
    build_row_wise,
    coupling_report,
    decode,
    enumerate_states,
    exhaustive_minimum,
    export_sparse,
    import_sparse,
    normalize_couplings,
    penalty_bounds,
    reduced_bits,
    to_spin,
)
from .spectral import (
    GapProfile,
    HamiltonianPair,
    build_hamiltonians,
    gap_profile,
    interpolated_hamiltonian,
    spectral_gap,
    two_lowest_eigenvalues,
)
from .anneal import (
    AnnealSchedule,
    SampleEntry,
    SampleSet,
    SuccessReport,
    evolve,
    evolve_trotter,
    measure,
    most_frequent,
    simulated_annealing,
    success_probability,
)
from .bench import (
    BenchReport,
    ExperimentSpec,
    generate_instances,
    mean_color_sorting_instance,
    preset_spec,
    run_experiment,
)

__all__ = [
    "__version__",
    "SizeCapError",
    "SolverError",
    "DistanceData",
    "PermutationMatrix",
    "QapInstance",
    "brute_force_qap",
    "isometric_cost",
    "qap_energy",
    "symmetrize",
    "vectorize",
    "worst_permutation",
    "ConstraintSystem",
    "CouplingReport",
    "PenaltyBounds",
    "QuboModel",
    "SpinModel",
    "build_baseline",
    "build_constraints",
    "build_formulation",
    "build_inserted",
    "build_row_wise",
    "coupling_report",
    "decode",
    "enumerate_states",
    "exhaustive_minimum",
    "export_sparse",
    "import_sparse",
    "normalize_couplings",
    "penalty_bounds",
    "reduced_bits",
    "to_spin",
    "GapProfile",
    "HamiltonianPair",
    "build_hamiltonians",
    "gap_profile",
    "interpolated_hamiltonian",
    "spectral_gap",
    "two_lowest_eigenvalues",
    "AnnealSchedule",
    "SampleEntry",
    "SampleSet",
    "SuccessReport",
    "evolve",
    "evolve_trotter",
    "measure",
    "most_frequent",
    "simulated_annealing",
    "success_probability",
    "BenchReport",
    "ExperimentSpec",
    "generate_instances",
    "mean_color_sorting_instance",
    "preset_spec",
    "run_experiment",
]
