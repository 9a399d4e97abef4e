"""Quantum dynamic belief (QDB) model of categorization-decision interference."""

from .dynamics import (
    BeliefState,
    BlockState,
    Category,
    HamiltonianParams,
    block_weights,
    build_block_hamiltonian,
    build_full_hamiltonian,
    condition_on_category,
    evolve,
    initial_state_from_priors,
    uniform_initial_state,
)
from .fit import (
    FittedModel,
    Prediction,
    closed_form_conditional,
    fit_block_param,
    fit_experiment,
    markov_total_probability,
    predict,
    qdb_conditional,
)
from .linalg import matrix_exponential_unitary, norm_squared, transition_matrix
from .measurement import (
    ActionProbabilities,
    MassFunction,
    MeasurementOperator,
    action_probabilities,
    cd_measurement_operator,
    d_alone_measurement_operator,
    measure_probability,
    pignistic_transform,
    reported_conditional_attack,
    split_uncertain,
)

__version__ = "0.1.0"
