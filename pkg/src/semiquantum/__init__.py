"""Beyond-quantum certification for POPT states with quantum-input games."""

__version__ = "0.1.0"

from .operators import (
    HermitianOperator,
    InvalidArgumentError,
    DimensionMismatchError,
    Povm,
    PureState,
    born_probability,
    hermitian_eig,
    partial_trace,
    partial_transpose,
    tensor,
)
from .popt import Classification, PoptState, Verdict, classify, make_wp, product_min_seesaw
from .basis import WitnessDecomposition, decompose_witness, proj_basis
from .game import (
    GameReport,
    ProverStrategy,
    SemiquantumGame,
    analytic_payoff,
    canonical_prover_strategy,
    evaluate_payoff,
    quantum_positivity_check,
    synthesize_game,
    wp_game,
)
from .lhv import BarrettPovmModel, McEstimate, WernerProjectiveModel, lhv_joint_mc, push_through_local_ops

__all__ = [
    "BarrettPovmModel",
    "Classification",
    "DimensionMismatchError",
    "GameReport",
    "HermitianOperator",
    "InvalidArgumentError",
    "McEstimate",
    "PoptState",
    "Povm",
    "ProverStrategy",
    "PureState",
    "SemiquantumGame",
    "Verdict",
    "WernerProjectiveModel",
    "WitnessDecomposition",
    "analytic_payoff",
    "born_probability",
    "canonical_prover_strategy",
    "classify",
    "decompose_witness",
    "evaluate_payoff",
    "hermitian_eig",
    "lhv_joint_mc",
    "make_wp",
    "partial_trace",
    "partial_transpose",
    "product_min_seesaw",
    "proj_basis",
    "push_through_local_ops",
    "quantum_positivity_check",
    "synthesize_game",
    "tensor",
    "wp_game",
]
