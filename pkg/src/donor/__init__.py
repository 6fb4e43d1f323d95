from .entangler import (
    EntanglerDomainError,
    EntanglerReport,
    EntanglerSpec,
    achieved_phase,
    concurrence,
    ent_state,
    solve_entangler,
    subspace_state,
    verify_entangling_conditions,
)
from .fidelity import (
    FidelityCurve,
    entangling_point,
    fidelity_analytic,
    fidelity_curve,
    fidelity_trace,
    gate_W,
)
from .system import (
    DerivedFrequencies,
    DonorParams,
    FieldConfig,
    Spectrum,
    block_propagators,
    derived_frequencies,
    dressed_basis,
    evolve,
    evolve_from_plus_minus,
    hamiltonian_full,
    plus_minus_state,
    spectrum,
    split_hamiltonian,
    split_propagator,
    split_propagator_factors,
    strong_field_levels,
)
