"""Two routes from a randomized algorithm to a deterministic lookup table.

Route one fixes the randomness: certify (by union bound) that a good
identifier-to-bits assignment exists, search the bounded assignment space for
one, and tabulate the fixed program.  Route two skips the assignment entirely
and searches the space of tables directly, in lexicographic order over the
views realized by the family; its first valid table is the deterministic
artifact.  Only the second route survives programs with unbounded bit use,
because it never looks at the program's internals.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Sequence

from .graphs import (
    InputInstance,
    InstanceFamilySpec,
    canonicalize,
    enumerate_instances,
    extract_ball,
    instance_to_jsonable,
)
from .problems import ProblemSpec, brute_force_solve, verify
from .simulator import (
    LocalityViolation,
    NormalFormTable,
    RandomizedNodeProgram,
    SimulationError,
    fix_randomness,
    run_deterministic,
    run_normal_form,
)
from .streams import (
    DEFAULT_BIT_CAP,
    RandomAssignment,
    assignment_space_size,
    iter_bounded_assignments,
)


class SearchBudgetExceeded(RuntimeError):
    """A search hit its configured budget before reaching a verdict."""


class AssignmentNotGood(RuntimeError):
    """The supplied assignment fails verification on some family instance."""

    def __init__(self, index: int, instance: InputInstance):
        self.index = index
        self.instance = instance
        super().__init__(f"assignment fails on family instance {index}")


@dataclass(frozen=True)
class ClaimedSizeLift:
    """The claimed-size bookkeeping for a family: the size we pretend the
    input has, the closed-form family bound, and the two comparisons the
    pipelines rely on."""

    n: int
    claimed_size: int  # 2 ** (n*n)
    family_bound: int
    bound_below_claimed: bool  # family_bound < claimed_size
    bound_below_claimed_over_n: bool  # family_bound * n < claimed_size


def lift_to_claimed_size(n: int, c: int, input_alphabet_size: int) -> ClaimedSizeLift:
    if n < 1 or c < 1 or input_alphabet_size < 1:
        raise ValueError("n, c and alphabet size must be positive")
    claimed = 2 ** (n * n)
    bound = 2 ** math.comb(n, 2) * n ** (c * n) * input_alphabet_size**n
    return ClaimedSizeLift(
        n=n,
        claimed_size=claimed,
        family_bound=bound,
        bound_below_claimed=bound < claimed,
        bound_below_claimed_over_n=bound * n < claimed,
    )


@dataclass(frozen=True)
class GoodnessCertificate:
    """Union-bound certificate: if the per-instance failure probabilities sum
    below one, some assignment succeeds on every instance at once."""

    failure_probs: tuple[Fraction, ...]
    total: Fraction
    family_size: int
    claimed_size: int

    @property
    def verdict(self) -> bool:
        return self.total < 1

    def to_jsonable(self) -> dict:
        return {
            "failure_probs": [str(p) for p in self.failure_probs],
            "total": str(self.total),
            "family_size": self.family_size,
            "claimed_size": self.claimed_size,
            "verdict": self.verdict,
        }


def certify_good_f(
    failure_probs: Sequence[Fraction], claimed_size: int
) -> GoodnessCertificate:
    probs = tuple(Fraction(p) for p in failure_probs)
    for p in probs:
        if not 0 <= p <= 1:
            raise ValueError(f"failure probability {p} outside [0, 1]")
    return GoodnessCertificate(
        failure_probs=probs,
        total=sum(probs, Fraction(0)),
        family_size=len(probs),
        claimed_size=claimed_size,
    )


def assignment_is_good(
    program: RandomizedNodeProgram,
    assignment: RandomAssignment,
    family: Sequence[InputInstance],
    problem: ProblemSpec,
    claimed_n: int | None = None,
    bit_cap: int = DEFAULT_BIT_CAP,
) -> tuple[bool, int | None]:
    """Whether the fixed program verifies on every instance; on failure also
    the first failing instance index."""
    fixed = fix_randomness(program, assignment, bit_cap)
    for idx, instance in enumerate(family):
        result = run_deterministic(fixed, instance, claimed_n)
        if not verify(problem, instance, result.outputs).valid:
            return False, idx
    return True, None


def _parallel_first(
    candidates: Iterator, is_hit: Callable, workers: int, wave: int = 16
) -> object | None:
    """First hit in candidate order, optionally fanning a wave of candidates
    across threads; the scan of each wave is in order, so the answer does not
    depend on worker timing."""
    if workers <= 1:
        for cand in candidates:
            if is_hit(cand):
                return cand
        return None
    with ThreadPoolExecutor(max_workers=workers) as pool:
        while True:
            batch = []
            for cand in candidates:
                batch.append(cand)
                if len(batch) >= workers * wave:
                    break
            if not batch:
                return None
            for cand, hit in zip(batch, pool.map(is_hit, batch)):
                if hit:
                    return cand


def search_good_f(
    program: RandomizedNodeProgram,
    problem: ProblemSpec,
    family: Sequence[InputInstance],
    bits: int,
    id_space: Sequence[int],
    claimed_n: int | None = None,
    budget: int | None = 1 << 22,
    workers: int = 1,
    bit_cap: int = DEFAULT_BIT_CAP,
) -> RandomAssignment | None:
    """Lexicographically first good bounded assignment, or None.

    Enumerates every assignment of ``bits``-bit vectors to the identifier
    space and returns the first one whose fixed program verifies on the whole
    family.  None means the entire bounded space fails, which says nothing
    about unbounded assignments.
    """
    size = assignment_space_size(id_space, bits)
    if budget is not None and size > budget:
        raise SearchBudgetExceeded(
            f"assignment space holds {size} candidates, over the budget {budget}"
        )

    def is_hit(assignment: RandomAssignment) -> bool:
        ok, _ = assignment_is_good(
            program, assignment, family, problem, claimed_n, bit_cap
        )
        return ok

    found = _parallel_first(
        iter_bounded_assignments(id_space, bits), is_hit, workers
    )
    return found


def derandomize_via_f(
    program: RandomizedNodeProgram,
    assignment: RandomAssignment,
    radius: int,
    family: Sequence[InputInstance],
    problem: ProblemSpec,
    claimed_n: int | None = None,
    bit_cap: int = DEFAULT_BIT_CAP,
) -> NormalFormTable:
    """Fix the randomness, tabulate at ``radius``, and verify on the family.

    Raises :class:`AssignmentNotGood` naming the first failing instance if the
    assignment is not good, and :class:`LocalityViolation` if the fixed
    program provably uses more than ``radius`` rounds.
    """
    fixed = fix_randomness(program, assignment, bit_cap)
    entries: dict[str, str] = {}
    origin: dict[str, tuple[int, int, str]] = {}
    for idx, instance in enumerate(family):
        result = run_deterministic(fixed, instance, claimed_n)
        if not verify(problem, instance, result.outputs).valid:
            raise AssignmentNotGood(idx, instance)
        for v in range(instance.n):
            key = canonicalize(extract_ball(instance, v, radius))
            out = result.outputs[v]
            if key in entries:
                if entries[key] != out:
                    raise LocalityViolation(key, origin[key], (idx, v, out))
            else:
                entries[key] = out
                origin[key] = (idx, v, out)
    table = NormalFormTable.from_mapping(
        radius,
        problem.output_alphabet,
        entries,
        provenance=f"via-f:{program.name}",
    )
    for instance in family:
        if not verify(problem, instance, run_normal_form(table, instance)).valid:
            raise SimulationError("internal: tabulated assignment failed re-verification")
    return table


# ---------------------------------------------------------------------------
# Direct table search.


@dataclass(frozen=True)
class SearchConfig:
    problem: ProblemSpec
    family: InstanceFamilySpec
    radius: int
    node_budget: int | None = None  # cap on label placements tried
    workers: int = 1

    def __post_init__(self) -> None:
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")
        if self.node_budget is not None and self.node_budget < 1:
            raise ValueError("budget must be positive")


@dataclass
class SearchStats:
    family_size: int = 0
    realized_views: int = 0
    placements: int = 0
    checks: int = 0


@dataclass
class TableSearchOutcome:
    """Either a verified table or an unsatisfiability verdict.

    ``witness`` is set when some single family instance admits no valid
    labeling at all; otherwise ``exhausted`` records that the whole table
    space was searched without success (the instances are individually
    solvable but no single consistent table covers them all).
    """

    table: NormalFormTable | None
    unsat: bool
    witness_index: int | None
    witness: InputInstance | None
    exhausted: bool
    stats: SearchStats

    @property
    def found(self) -> bool:
        return self.table is not None


def find_normal_form(config: SearchConfig) -> TableSearchOutcome:
    """Lexicographically first table valid on every family instance.

    The search assigns output labels to the realized view keys in key order,
    trying labels in alphabet order, and backtracks on the first violated
    check.  For locally verifiable problems a node's check fires as soon as
    the keys of every node in its verification-radius view are decided; for
    component-wise problems whole instances are checked once their keys are
    complete.  Checks are monotone, so pruning never skips a valid table and
    the first complete assignment is the lexicographic minimum.
    """
    problem = config.problem
    alphabet = problem.output_alphabet
    instances = list(enumerate_instances(config.family))
    stats = SearchStats(family_size=len(instances))

    node_keys: list[tuple[str, ...]] = [
        tuple(
            canonicalize(extract_ball(inst, v, config.radius))
            for v in range(inst.n)
        )
        for inst in instances
    ]
    realized = sorted({key for keys in node_keys for key in keys})
    pos_of = {key: i for i, key in enumerate(realized)}
    stats.realized_views = len(realized)

    # triggers[p] = checks that become decidable once position p is labeled.
    labels: list[str | None] = [None] * len(realized)
    triggers: list[list[Callable[[], bool]]] = [[] for _ in realized]

    def add_local_check(inst: InputInstance, keys: tuple[str, ...], v: int) -> None:
        ball = extract_ball(inst, v, problem.radius)
        members = [
            (b.identifier, pos_of[keys[inst.node_with_id(b.identifier)]])
            for b in ball.nodes
        ]

        def check() -> bool:
            return problem.ball_valid(
                ball, {ident: labels[pos] for ident, pos in members}
            )

        triggers[max(pos for _, pos in members)].append(check)

    def add_instance_check(inst: InputInstance, keys: tuple[str, ...]) -> None:
        def check() -> bool:
            outputs = {v: labels[pos_of[keys[v]]] for v in range(inst.n)}
            return verify(problem, inst, outputs).valid

        triggers[max(pos_of[k] for k in keys)].append(check)

    for inst, keys in zip(instances, node_keys):
        if problem.locally_verifiable:
            for v in range(inst.n):
                add_local_check(inst, keys, v)
        else:
            add_instance_check(inst, keys)

    pos = 0
    next_try = [0] * len(realized)
    while 0 <= pos < len(realized):
        if next_try[pos] == len(alphabet):
            next_try[pos] = 0
            labels[pos] = None
            pos -= 1
            if pos >= 0:
                next_try[pos] += 1
            continue
        labels[pos] = alphabet[next_try[pos]]
        stats.placements += 1
        if config.node_budget is not None and stats.placements > config.node_budget:
            raise SearchBudgetExceeded(
                f"table search exceeded its budget of {config.node_budget} placements"
            )
        ok = True
        for check in triggers[pos]:
            stats.checks += 1
            if not check():
                ok = False
                break
        if ok:
            pos += 1
        else:
            labels[pos] = None
            next_try[pos] += 1

    if pos < 0:
        for idx, inst in enumerate(instances):
            if brute_force_solve(problem, inst) is None:
                return TableSearchOutcome(None, True, idx, inst, False, stats)
        return TableSearchOutcome(None, True, None, None, True, stats)

    table = NormalFormTable.from_mapping(
        config.radius,
        alphabet,
        {realized[i]: labels[i] for i in range(len(realized))},
        provenance=f"table-search:{problem.name}",
    )
    for inst in instances:
        if not verify(problem, inst, run_normal_form(table, inst)).valid:
            raise SimulationError("internal: searched table failed final verification")
    return TableSearchOutcome(table, False, None, None, False, stats)


# ---------------------------------------------------------------------------
# End-to-end report.


@dataclass
class DerandReport:
    n: int
    c: int
    input_alphabet: tuple[str, ...]
    max_degree: int | None
    problem: str
    output_alphabet: tuple[str, ...]
    radius: int
    claimed_size: int
    family_bound: int
    bound_below_claimed: bool
    bound_below_claimed_over_n: bool
    family_size: int
    pipeline: str
    found: bool
    table_size: int | None
    verified_count: int | None
    unsat_witness_index: int | None
    unsat_witness: dict | None
    exhausted_search: bool | None
    placements: int
    wall_time_s: float
    t_rand_at_claimed_size: int | None = None

    def to_jsonable(self, include_timing: bool = True) -> dict:
        out = {
            "n": self.n,
            "c": self.c,
            "input_alphabet": list(self.input_alphabet),
            "max_degree": self.max_degree,
            "problem": self.problem,
            "output_alphabet": list(self.output_alphabet),
            "radius": self.radius,
            "claimed_size": self.claimed_size,
            "family_bound": self.family_bound,
            "bound_below_claimed": self.bound_below_claimed,
            "bound_below_claimed_over_n": self.bound_below_claimed_over_n,
            "family_size": self.family_size,
            "pipeline": self.pipeline,
            "found": self.found,
            "table_size": self.table_size,
            "verified_count": self.verified_count,
            "unsat_witness_index": self.unsat_witness_index,
            "unsat_witness": self.unsat_witness,
            "exhausted_search": self.exhausted_search,
            "placements": self.placements,
            "t_rand_at_claimed_size": self.t_rand_at_claimed_size,
        }
        if include_timing:
            out["timing"] = {"wall_time_s": self.wall_time_s}
        return out


def derandomize(
    config: SearchConfig,
    t_rand: Callable[[int], int] | None = None,
) -> tuple[DerandReport, TableSearchOutcome]:
    """Run the direct pipeline end to end and report.

    The deterministic artifact is the pair (radius, table) executed by
    :func:`run_normal_form`.  When ``t_rand`` is supplied the report also
    evaluates it at the claimed size, which is the round count the table
    stands in for.
    """
    spec = config.family
    lift = lift_to_claimed_size(spec.n, spec.c, len(spec.input_alphabet))
    start = time.perf_counter()
    outcome = find_normal_form(config)
    verified = None
    if outcome.found:

        def check(instance) -> bool:
            return verify(
                config.problem, instance, run_normal_form(outcome.table, instance)
            ).valid

        instances = list(enumerate_instances(spec))
        if config.workers > 1:
            with ThreadPoolExecutor(max_workers=config.workers) as pool:
                verdicts = list(pool.map(check, instances))
        else:
            verdicts = [check(instance) for instance in instances]
        if not all(verdicts):
            raise SimulationError("internal: report verification failed")
        verified = len(verdicts)
    wall = time.perf_counter() - start
    report = DerandReport(
        n=spec.n,
        c=spec.c,
        input_alphabet=spec.input_alphabet,
        max_degree=spec.max_degree,
        problem=config.problem.name,
        output_alphabet=config.problem.output_alphabet,
        radius=config.radius,
        claimed_size=lift.claimed_size,
        family_bound=lift.family_bound,
        bound_below_claimed=lift.bound_below_claimed,
        bound_below_claimed_over_n=lift.bound_below_claimed_over_n,
        family_size=outcome.stats.family_size,
        pipeline="table-search",
        found=outcome.found,
        table_size=outcome.table.size if outcome.found else None,
        verified_count=verified,
        unsat_witness_index=outcome.witness_index,
        unsat_witness=(
            instance_to_jsonable(outcome.witness) if outcome.witness else None
        ),
        exhausted_search=outcome.exhausted if outcome.unsat else None,
        placements=outcome.stats.placements,
        wall_time_s=wall,
        t_rand_at_claimed_size=t_rand(lift.claimed_size) if t_rand else None,
    )
    return report, outcome
