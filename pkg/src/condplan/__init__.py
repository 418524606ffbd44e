"""Offline conditional planner for multi-valued sensing domains.

The pipeline: ``parse``/``load_files`` read the domain language,
``ground`` instantiates schemas over objects, ``initial_belief`` builds
the starting knowledge state, ``build`` grows the full conditional plan
(one branch per sensing outcome), ``verify`` replays it, and ``emit``
translates the same domain into an incremental logic program.  External
feasibility predicates plug in through a ``FeasibilityRegistry``.
"""

from .asp import (
    EmitError,
    EncodedProgram,
    SolvedAction,
    SolverOutputError,
    SolverUnavailable,
    Unsatisfiable,
    emit,
    run_external,
)
from .belief import (
    BeliefState,
    IllegalOutcome,
    InconsistentBelief,
    Known,
    Unknown,
    applicable,
    apply_actuation,
    apply_sensing,
    closure,
    goal_conditions,
    goal_holds,
    holds,
    initial_belief,
    outcomes,
)
from .benchmarks import (
    BenchmarkSpec,
    doors_evaluator,
    doors_obstacles,
    gen_bts,
    gen_colorball,
    gen_doors,
    generate,
    kitchen_lite_path,
    kitchen_lite_text,
    kitchen_routes_path,
)
from .engine import (
    BuildResult,
    ConditionalPlan,
    EngineConfig,
    EngineError,
    Failure,
    PlanStats,
    RunReport,
    build,
)
from .export import PlanFormatError, dump_json, from_json, to_dot, to_json
from .feasibility import (
    FeasibilityRegistry,
    LookupFormatError,
    UnknownPredicate,
    always_true,
    cell_name,
    load_lookup,
    make_grid_path,
    make_table_lookup,
    register_lookup,
)
from .lang import (
    Diagnostic,
    ParsedUnit,
    ParseError,
    load_files,
    parse,
    print_unit,
    validate,
)
from .model import (
    DomainSpec,
    FeasibilityQuery,
    GroundingError,
    GroundModel,
    ProblemSpec,
    ground,
)
from .seqplan import (
    History,
    OracleBudgetExceeded,
    SearchMemo,
    SequentialPlan,
    brute_force_plan,
    find_plan,
)
from .verify import VerifyResult, Violation, enumerate_branches, verify

__version__ = "0.1.0"

__all__ = [
    "BeliefState",
    "BenchmarkSpec",
    "BuildResult",
    "ConditionalPlan",
    "Diagnostic",
    "DomainSpec",
    "EmitError",
    "EncodedProgram",
    "EngineConfig",
    "EngineError",
    "Failure",
    "FeasibilityQuery",
    "FeasibilityRegistry",
    "GroundModel",
    "GroundingError",
    "History",
    "IllegalOutcome",
    "InconsistentBelief",
    "Known",
    "LookupFormatError",
    "OracleBudgetExceeded",
    "ParseError",
    "ParsedUnit",
    "PlanFormatError",
    "PlanStats",
    "ProblemSpec",
    "RunReport",
    "SearchMemo",
    "SequentialPlan",
    "SolvedAction",
    "SolverOutputError",
    "SolverUnavailable",
    "Unknown",
    "UnknownPredicate",
    "Unsatisfiable",
    "VerifyResult",
    "Violation",
    "always_true",
    "applicable",
    "apply_actuation",
    "apply_sensing",
    "brute_force_plan",
    "build",
    "cell_name",
    "closure",
    "doors_evaluator",
    "doors_obstacles",
    "dump_json",
    "emit",
    "enumerate_branches",
    "find_plan",
    "from_json",
    "gen_bts",
    "gen_colorball",
    "gen_doors",
    "generate",
    "goal_conditions",
    "goal_holds",
    "ground",
    "holds",
    "initial_belief",
    "kitchen_lite_path",
    "kitchen_lite_text",
    "kitchen_routes_path",
    "load_files",
    "load_lookup",
    "make_grid_path",
    "make_table_lookup",
    "outcomes",
    "parse",
    "print_unit",
    "register_lookup",
    "run_external",
    "to_dot",
    "to_json",
    "validate",
    "verify",
]
