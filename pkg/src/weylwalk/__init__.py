"""Exact propagators for the Weyl quantum walk on the body-centred cubic lattice."""

from .amplitude import I, ONE, ZERO, Amplitude, Chirality, SpinMatrix
from .combinatorics import (
    DEFAULT_BUDGET,
    BitString,
    BudgetExceeded,
    c_coefficient,
    c_coefficient_bruteforce,
    c_coefficients,
    canonicalize,
    compositions,
    dfunc,
    f_sum,
    iota,
    shift,
    triple_tally,
    u_count,
    w_factor,
    weight_class,
)
from .lattice import (
    ORIGIN,
    STEP_VECTORS,
    STEPS,
    LatticeError,
    Site,
    StepCountQuadruple,
    StringCounts,
    cone_displacements,
    in_past_cone,
    past_causal_cone,
    path_endpoint,
    step_code,
    step_vector,
    string_counts,
)
from .propagator import (
    Propagator,
    brute_force_cone_table,
    clear_caches,
    cone_table,
    convolve,
    evolution_cone_table,
    propagator_brute_force,
    propagator_closed_form,
    propagator_from_evolution,
    propagator_path_enumeration,
    to_float,
)
from .walk import (
    WalkState,
    b_matrix,
    closed_matrix_product,
    evolve,
    iter_evolve,
    literal_tilde_product,
    random_state,
    step,
    tilde_matrix,
    transition_matrix,
    transition_table,
    verify_unitarity,
)

__version__ = "0.1.0"
