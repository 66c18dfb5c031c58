"""Game decomposition into potential and harmonic parts, potentialness, and
mirror-descent convergence experiments on normal-form, economic, and
Bayesian games."""

__version__ = "0.1.0"

from .games import (
    EquilibriumReport,
    GameError,
    GameShape,
    MixedProfile,
    NormalFormGame,
    best_response,
    expected_utility,
    game_from_json,
    game_to_json,
    payoff_gradient,
    pure_equilibria,
    relative_utility_loss,
    sample_random_game,
)
from .hodge import (
    DecompositionOperators,
    DecompositionResult,
    NonStrategicGame,
    ResponseGraph,
    ShapeBudgetError,
    alpha_blend,
    build_operators,
    build_response_graph,
    decompose_payoffs,
    deviation_flow,
    potentialness,
)
from .opcache import OperatorCache, operator_cache_get
from .dynamics import OMDConfig, Trajectory, prox_map, random_init, run_omd, uniform_init
from .econ import EconGameSpec, EconKind, allocation, build_econ_game, discretization_sweep
from .bayesian import (
    BayesianGame,
    bayesian_potentialness_sweep,
    enumerate_monotone_strategies,
    induced_normal_form,
)

__all__ = [
    "__version__",
    "EquilibriumReport",
    "GameError",
    "GameShape",
    "MixedProfile",
    "NormalFormGame",
    "best_response",
    "expected_utility",
    "game_from_json",
    "game_to_json",
    "payoff_gradient",
    "pure_equilibria",
    "relative_utility_loss",
    "sample_random_game",
    "DecompositionOperators",
    "DecompositionResult",
    "NonStrategicGame",
    "ResponseGraph",
    "ShapeBudgetError",
    "alpha_blend",
    "build_operators",
    "build_response_graph",
    "decompose_payoffs",
    "deviation_flow",
    "potentialness",
    "OperatorCache",
    "operator_cache_get",
    "OMDConfig",
    "Trajectory",
    "prox_map",
    "random_init",
    "run_omd",
    "uniform_init",
    "EconGameSpec",
    "EconKind",
    "allocation",
    "build_econ_game",
    "discretization_sweep",
    "BayesianGame",
    "bayesian_potentialness_sweep",
    "enumerate_monotone_strategies",
    "induced_normal_form",
]
