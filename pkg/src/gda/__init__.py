"""Exact workbench for bigraded differential structures.

Terms over noncommuting generators carry chain and cochain indices, two
anticommuting-or-commuting differentials, vanishing ideals, condition
trees, and a pair of verification procedures for a candidate invariant
class, all over exact rational coefficients, plus small finite models
for numeric spot checks.
"""
from .conditions import (
    ChoiceVector,
    Condition,
    DerivationTree,
    PeriodicFamily,
    check_coherence,
    coherence_constraints,
    collapse_signature,
    derive_tree,
    detect_periodic,
    make_condition,
    render_tree,
    signature_label,
    standard_start,
    symmetrize,
    tree_to_json,
)
from .differentials import (
    EpsilonMode,
    SignMode,
    apply_differential,
    apply_slot_differential,
    classify_push,
    epsilon,
    position_sign,
)
from .errors import (
    ArityError,
    AssignmentError,
    CoherenceViolation,
    GdaError,
    GdaSyntaxError,
    HeterogeneousSum,
    HypothesisError,
    LayoutError,
    ModelError,
    NameClash,
    SlotError,
)
from .ideals import FactorizationResult, IdealKind, IdealRegistry, factorization_moves
from .model import (
    Model,
    build_model,
    check_identity,
    corner_model,
    derive_element,
    evaluate,
    kernel_basis,
    raising_model,
    random_element,
    random_kernel_element,
    wedge,
)
from .dsl import (
    Session,
    build_session,
    load_session,
    parse_file,
    parse_text,
    print_session,
)
from .terms import (
    DEFAULT_LAWS,
    ZERO_INDEX,
    DiffKind,
    DiffLaws,
    Factor,
    GeneratorSymbol,
    Index,
    IndexBounds,
    Monomial,
    SymbolRegistry,
    Term,
    add,
    make_generator,
    multiply,
    normalize,
    push_diff,
    render_equation,
    render_term,
    scale,
)
from .verifier import (
    ClosureHypothesis,
    Completion,
    TraceStep,
    ClosureSet,
    VerificationReport,
    VerifierSetup,
    XiMode,
    build_class,
    build_closure_set,
    cancel_hypotheses,
    check_closed,
    class_layout,
    make_completion,
    reduce_modulo,
    slot_diff_sum,
    verify_cocycle,
    verify_independence,
)

__version__ = "0.1.0"
