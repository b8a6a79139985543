"""kbpkit: knowledge-based programs as plans.

Plans branch on what the executing agent *knows*: S5 knowledge states over
an enumerated variable space, sensing actions with exhaustive feedbacks,
nondeterministic ontic actions given by transition theories.  The package
provides satisfaction and progression semantics, plan verification by
exhaustive trace enumeration, compilation of knowledge-based programs to
reactive standard policies, plan-existence solvers for several fragments,
and generators for hardness-gadget planning problems driven by a QBF
oracle.
"""

from .actions import (
    EpistemicAction,
    OnticAction,
    applicable_feedbacks,
    make_test_action,
    progress_feedback,
    progress_ontic,
    validate_epistemic,
    validate_ontic,
)
from .errors import (
    BudgetError,
    FormulaError,
    KbpkitError,
    LinkError,
    NonTerminatingError,
    ParseError,
    ShapeError,
    ValidationError,
)
from .formulas import (
    FALSE,
    TRUE,
    And,
    Bottom,
    Iff,
    Implies,
    KAtom,
    Not,
    Or,
    PVar,
    Top,
    Var,
    conj,
    disj,
    formula_size,
    frame_clause,
    is_objective,
    is_positive,
    is_sknnf,
    is_subjective,
    lit,
    to_sknnf,
)
from .problems import PlanningProblem
from .programs import (
    EMPTY,
    Act,
    Empty,
    If,
    InfiniteWitness,
    Invalid,
    NonTerminating,
    Seq,
    Trace,
    TraceSet,
    Valid,
    While,
    enumerate_traces,
    equivalent_in,
    execute,
    is_standard_policy,
    kbp_size,
    seq,
    verify_plan,
)
from .qbf import Qbf, qbf_eval
from .semantics import StateSpace
from .syntax import (
    format_formula,
    format_kbp,
    format_problem,
    format_qbf,
    parse_epistemic,
    parse_kbp,
    parse_objective,
    parse_problem,
    parse_qbf,
    parse_theory,
)

__all__ = [name for name in dir() if not name.startswith("_")]
