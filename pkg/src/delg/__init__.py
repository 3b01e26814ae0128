"""Reachability games on dynamic epistemic models.

Epistemic and action models with product update, plan existence,
controller synthesis and distributed synthesis, hardness encoders and a
command-line front end.
"""
from .actions import (
    CTR,
    ENV,
    ActionModel,
    FiniteDomainVar,
    apply_pointed,
    classify,
    executable_actions,
    merge_pointed_actions,
    product,
)
from .controller import solve_controller, verify_controller_strategy
from .distributed import (
    TeamSplit,
    check_hypotheses,
    is_hierarchical,
    solve_distributed,
    strategy_tree_search,
    verify_distributed_strategy,
)
from .errors import (
    DelgError,
    ExecutabilityError,
    FormulaSyntaxError,
    HypothesisError,
    ModelError,
    PreconditionError,
    StrategyError,
    UnknownAgentError,
)
from .formula import parse_formula, to_text
from .models import EpistemicModel, PointedModel, bisim_contract, canonical_key, evaluate
from .planning import plan_exists, verify_plan
from .problem import Problem, load_problem, parse_problem, write_problem
from .verdict import Check, Status, Verdict

__version__ = "0.1.0"
