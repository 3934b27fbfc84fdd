"""Probability bounds for omega-regular (Rabin) objectives on
bounded-parameter Markov decision processes.

The package computes, per state, the optimal lower and upper probabilities
of acceptance over all point MDPs consistent with the interval bounds,
together with witness policies and instantiated worst-/best-case MDPs.
"""

__version__ = "0.1.0"

from .errors import (
    AlphabetError,
    BmdpError,
    BoundViolationError,
    ConvergenceError,
    InfeasibleRowError,
    ModelValidationError,
    ParseError,
    SizeGuardError,
    SolverInternalError,
)
from .graph import (
    EndComponent,
    bmdp_mec_decomposition,
    bmdp_qualitative_reach,
    bsccs,
    mec_decomposition,
    qualitative_reach,
)
from .model import (
    Bmdp,
    Distribution,
    IntervalRow,
    Mdp,
    NaturePolicy,
    PositionalPolicy,
    ProbInterval,
    RabinPair,
    StochasticGame,
    Violation,
    induce_mc,
    instantiate,
    is_consistent,
    validate_bmdp,
)
from .omega import (
    GameResult,
    RabinResult,
    SgResult,
    UpperAnalysis,
    bmdp_lower,
    bmdp_upper,
    brute_force_value,
    build_game,
    mc_rabin_values,
    mdp_rabin_max,
    mdp_rabin_min,
    sg_rabin,
    upper_winning_analysis,
)
from .parse import parse_dra, parse_model
from .polytope import BfsSet, bfs_vertices, extreme_distribution
from .product import Dra, LabelledBmdp, build_product, dra_accepts_lasso
from .reach import (
    ReachQuery,
    ReachResult,
    RobustReachResult,
    bmdp_reach,
    mc_reach_exact,
    mdp_reach,
)
from .serialize import dra_to_text, game_to_text, mdp_to_text, model_to_text

__all__ = [name for name in dir() if not name.startswith("_")]
