"""Exact reachability functions for parametric discrete-time Markov chains.

The package computes, for every (initial state, target state) pair of a
model whose transition probabilities are rational functions over a set
of parameters, the exact probability of eventually reaching the target
— itself a rational function of the parameters.  Two independent
engines are provided: a hierarchical strongly-connected-component
abstraction (:func:`model_check`) and a classic state-elimination
baseline (:func:`eliminate_all`).  Both build on an exact
rational-function layer that keeps polynomials factored and caches
every factorization discovered along the way, so expensive GCD kernel
work is shared across the whole analysis.

Typical use::

    from parmreach import parse_model, preprocess, model_check

    m = preprocess(parse_model(text))
    result = model_check(m)
    for (source, target), f in result.per_pair.items():
        print(source, "->", target, "=", f)
"""

from .benchgen import BenchSpec, Family, SizeCapExceeded, generate
from .elimination import (
    EliminationOrder,
    SelfLoopProbabilityOne,
    Strategy,
    eliminate_all,
    eliminate_state,
)
from .errors import ParmreachError
from .factorizations import (
    Factorization,
    GcdTriple,
    InsufficientRefinement,
    PoolStats,
    gcd_factored,
    pool_stats,
    reset_pool,
)
from .model import (
    Dtmc,
    Evaluation,
    ModelSyntaxError,
    NotWellDefined,
    Pdtmc,
    RowSumNotOne,
    TargetNotAbsorbing,
    UnknownState,
    evaluate,
    is_graph_preserving,
    parse_model,
    preprocess,
)
from .oracle import SingularSystem, monte_carlo_reachability, numeric_reachability
from .polycore import (
    Polynomial,
    Rational,
    Variable,
    poly_gcd,
    reset_variables,
    variable,
)
from .ratfun import (
    DivisionByZeroFunction,
    EvalDenominatorZero,
    RationalFunction,
    rf_add,
    rf_const,
    rf_div,
    rf_eval,
    rf_from_polys,
    rf_mul,
    rf_of_variable,
    rf_one,
    rf_sub,
    rf_zero,
)
from .scc_mc import (
    AbstractionInvariantBroken,
    CheckStats,
    Constraint,
    ConstraintKind,
    NoTargets,
    ReachabilityResult,
    abstract,
    collect_constraints,
    model_check,
    reset_abstraction_site_counter,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # model layer
    "Pdtmc",
    "Dtmc",
    "Evaluation",
    "parse_model",
    "preprocess",
    "evaluate",
    "is_graph_preserving",
    # engines
    "model_check",
    "abstract",
    "eliminate_all",
    "eliminate_state",
    "EliminationOrder",
    "Strategy",
    "ReachabilityResult",
    "CheckStats",
    "Constraint",
    "ConstraintKind",
    "collect_constraints",
    # numeric ground truth
    "numeric_reachability",
    "monte_carlo_reachability",
    # symbolic layer
    "Polynomial",
    "Variable",
    "Rational",
    "variable",
    "poly_gcd",
    "RationalFunction",
    "rf_zero",
    "rf_one",
    "rf_const",
    "rf_of_variable",
    "rf_from_polys",
    "rf_add",
    "rf_sub",
    "rf_mul",
    "rf_div",
    "rf_eval",
    "Factorization",
    "GcdTriple",
    "gcd_factored",
    "PoolStats",
    "pool_stats",
    # benchmarks
    "BenchSpec",
    "Family",
    "generate",
    # errors
    "ParmreachError",
    "ModelSyntaxError",
    "UnknownState",
    "RowSumNotOne",
    "TargetNotAbsorbing",
    "NotWellDefined",
    "NoTargets",
    "AbstractionInvariantBroken",
    "SelfLoopProbabilityOne",
    "SingularSystem",
    "SizeCapExceeded",
    "InsufficientRefinement",
    "DivisionByZeroFunction",
    "EvalDenominatorZero",
    # session management
    "reset_session",
]


def reset_session() -> None:
    """Forget all interned variables, pooled polynomials, and counters.

    Call between independent analyses in one process when models use
    unrelated parameter sets; each CLI invocation does this implicitly.
    """
    reset_variables()
    reset_pool()
    reset_abstraction_site_counter()
