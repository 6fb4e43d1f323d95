from .heisenberg import (
    DOWN_DOWN,
    DOWN_UP,
    UP_DOWN,
    UP_UP,
    PreparationPlan,
    PulseParams,
    TwoQubitState,
    basis_state,
    global_phase,
    haar_random_state,
    hamiltonian_isotropic,
    prepare,
    propagator_step1,
    pulse_factor,
    pulse_unitary,
    singlet_state,
    state_after_step1,
    triplet_plan,
    triplet_states,
)
from .schmidt import (
    PulseAngleSolution,
    SchmidtForm,
    SpinAngles,
    SynthesisFailed,
    SynthesisResult,
    constrained_schmidt_form,
    decompose,
    fidelity_states,
    gamma_feasible,
    pulse_angle_solution,
    pulse_angles_from_params,
    synthesize,
    synthesize_batch,
    tan_gamma_from_alpha_prime,
)
