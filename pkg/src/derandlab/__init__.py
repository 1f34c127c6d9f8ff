"""Desk-scale workbench for derandomizing synchronous message-passing
algorithms over exhaustively enumerated labeled-graph families."""

__version__ = "0.1.0"

from .graphs import (
    BallNode,
    BallView,
    Graph,
    InputInstance,
    InstanceFamilySpec,
    ball_covers_instance,
    canonicalize,
    count_bound,
    disjoint_union,
    dump_instances,
    enumerate_instances,
    extend_instance,
    extract_ball,
    instance_from_jsonable,
    instance_to_jsonable,
    load_instances,
)
from .problems import (
    ProblemFormatError,
    ProblemSpec,
    VerificationResult,
    brute_force_solve,
    load_problem,
    make_coloring,
    make_mis,
    problem_by_name,
    problem_from_jsonable,
    save_problem,
    solve_ball_component,
    verify,
    verify_componentwise,
    verify_locally,
)
from .simulator import (
    IncompleteTableError,
    LocalityViolation,
    McEstimate,
    NodeContext,
    NodeProgram,
    NormalFormTable,
    RandomizedNodeProgram,
    RunResult,
    SimulationError,
    StepResult,
    as_randomized,
    compute_success_exact,
    estimate_success_mc,
    fix_randomness,
    load_table,
    run_deterministic,
    run_normal_form,
    run_randomized,
    save_table,
    table_from_labeling,
    tabulate,
)
from .streams import (
    DEFAULT_BIT_CAP,
    BitBudgetExceeded,
    BitReader,
    BitStream,
    RandomAssignment,
    StreamExhausted,
    UnassignedIdentifier,
    assignment_space_size,
    iter_bounded_assignments,
)
from .derandomize import (
    AssignmentNotGood,
    ClaimedSizeLift,
    DerandReport,
    GoodnessCertificate,
    SearchBudgetExceeded,
    SearchConfig,
    TableSearchOutcome,
    assignment_is_good,
    certify_good_f,
    derandomize,
    derandomize_via_f,
    find_normal_form,
    lift_to_claimed_size,
    search_good_f,
)
from .connected import (
    ConnectedRunConfig,
    ConnectedRunResult,
    UnsolvableInstance,
    check_indistinguishability,
    run_connected_aware,
)
