"""concernkit: reasoning over concern trees of cyber-physical system theories.

The library side exposes the domain model, the theory document format, the
transition semantics, concern satisfaction, trust ranking, satisfaction
likelihood metrics, and the mitigation planner. The HTTP service lives in
``concernkit.service`` and the command-line client in ``concernkit.cli``.
"""
from .documents import ENGINE_VERSION, parse_document, parse_theory, serialize_theory
from .errors import (
    BranchAmbiguous,
    BudgetExceeded,
    Diagnostic,
    EngineError,
    NotExecutable,
    ParseFailure,
    UniverseTooLarge,
    ValidationFailure,
)
from .model import (
    Action,
    Analysis,
    And,
    Concern,
    CpsSystem,
    CpsTheory,
    Effect,
    Fluent,
    Formula,
    GammaEntry,
    Lit,
    Literal,
    Not,
    Ontology,
    Or,
    StaticLaw,
    SuccessRule,
    active,
    lit,
    prop,
    validate_ontology,
    validate_system,
    validate_theory,
)
from .transition import (
    State,
    closure,
    direct_effects,
    enumerate_states,
    executable_in,
    initial_state,
    is_state,
    run,
    state_of,
    step,
)
from .concerns import (
    Evaluator,
    concern_satisfied,
    eval_formula,
    lambda_formula,
    resolve_mode,
    satisfaction_map,
    satisfied_after,
)
from .trust import Ranking, TrustScore, compare_trust, rank_components, trust_pairs, trust_scores
from .los import deg_pos, lex_compare, lex_vector, los_table, los_value, weighted_los
from .planner import (
    MitigationPlan,
    NoncomplianceReport,
    Selection,
    Witness,
    detect_noncompliance,
    find_mitigations,
    plan_success_probability,
    select_preferred,
)
from .service import create_app

__version__ = ENGINE_VERSION
