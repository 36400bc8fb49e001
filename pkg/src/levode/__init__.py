"""Asymptotic reduction and solution of singular linear ODE systems.

The pipeline: load or build a problem (``system_model``), reduce its
perturbation below a prescribed power of x by repeated exact
transformations (``transform_engine``), bound everything that was set
aside (``error_ledger``), evaluate asymptotic solutions at a finite
point with a certified deviation (``levinson_solver``), and continue
them numerically to a regular target (``ode_connector``).
"""

from .error_ledger import (
    ContractionFailure,
    DivergentIntegral,
    ErrorLedger,
    LedgerEntry,
    eta_bound,
    matrix_norm_bound,
    total_error_bound,
)
from .fixtures import (
    BUILTINS,
    builtin_hypergeometric,
    hypergeometric_companion,
)
from .levinson_solver import (
    DichotomyReport,
    ExponentData,
    MissingBackTransform,
    NonLaurentExponent,
    SolutionBundle,
    asymptotic_value,
    back_transform,
    check_dichotomy,
    derive_original_system,
    exponent_data,
    is_safely_continuable,
    solution_bundle,
)
from .ode_connector import (
    LinearSystem,
    PoleInInterval,
    StepSizeUnderflow,
    integrate,
    linear_system,
)
from .symexpr import (
    ParseError,
    PoleInDomain,
    RationalFn,
    SymMatrix,
    UnboundedAtInfinity,
    sup_bound,
)
from .system_model import (
    INVERSE_X,
    STANDARD,
    InvariantViolation,
    ModeError,
    Monomial,
    ProblemSpec,
    ResonanceReport,
    SchemaError,
    load_problem,
    serialize_problem,
    validate,
    validate_resonance,
)
from .transform_engine import (
    CommutatorTerms,
    DivisionByZeroDenominator,
    FinalState,
    IterationState,
    OrderRegression,
    PSplit,
    commutator_terms,
    compute_P,
    elimination_defect,
    initial_state,
    iterate,
    run,
)

__version__ = "0.1.0"

__all__ = [
    "BUILTINS",
    "CommutatorTerms",
    "ContractionFailure",
    "DichotomyReport",
    "DivergentIntegral",
    "DivisionByZeroDenominator",
    "ErrorLedger",
    "ExponentData",
    "FinalState",
    "INVERSE_X",
    "InvariantViolation",
    "IterationState",
    "LedgerEntry",
    "LinearSystem",
    "MissingBackTransform",
    "ModeError",
    "Monomial",
    "NonLaurentExponent",
    "OrderRegression",
    "PSplit",
    "ParseError",
    "PoleInDomain",
    "PoleInInterval",
    "ProblemSpec",
    "RationalFn",
    "ResonanceReport",
    "STANDARD",
    "SchemaError",
    "SolutionBundle",
    "StepSizeUnderflow",
    "SymMatrix",
    "UnboundedAtInfinity",
    "asymptotic_value",
    "back_transform",
    "builtin_hypergeometric",
    "check_dichotomy",
    "commutator_terms",
    "compute_P",
    "derive_original_system",
    "elimination_defect",
    "eta_bound",
    "exponent_data",
    "hypergeometric_companion",
    "initial_state",
    "integrate",
    "is_safely_continuable",
    "iterate",
    "linear_system",
    "load_problem",
    "matrix_norm_bound",
    "run",
    "serialize_problem",
    "solution_bundle",
    "sup_bound",
    "total_error_bound",
    "validate",
    "validate_resonance",
]
