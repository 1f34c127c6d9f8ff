"""Round-based synchronous execution of node programs.

Execution model
---------------
All nodes run the same program.  A node initially knows its own identifier,
degree, input label, and a claimed node count (which the runner may set higher
than the true count; programs cannot tell).  Step 0 runs with an empty inbox.
Messages produced at step t are delivered at step t+1; message size is
unconstrained.  A step may send and halt in the same round; the final messages
are still delivered.  The round count of a run is the largest step index at
which some node produced its output, so a program that decides immediately
costs 0 rounds.

Ports: each node's neighbors occupy inbox slots sorted by neighbor identifier,
a convention that is itself a function of the node's labeled neighborhood, so
programs cannot observe anything beyond what their gathered views contain.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

from .graphs import InputInstance, canonicalize, extract_ball
from .problems import ProblemSpec, verify
from .streams import (
    DEFAULT_BIT_CAP,
    BitReader,
    RandomAssignment,
)


class SimulationError(RuntimeError):
    """Round budget overruns, bad output labels, and kindred run failures."""


class LocalityViolation(SimulationError):
    """One view key produced two different outputs during tabulation."""

    def __init__(self, key: str, first: tuple, second: tuple):
        self.key = key
        self.first = first  # (instance index, node, output)
        self.second = second
        super().__init__(
            f"locality violation: key {key} maps to {first[2]!r} at "
            f"instance {first[0]} node {first[1]} but {second[2]!r} at "
            f"instance {second[0]} node {second[1]}"
        )


class IncompleteTableError(LookupError):
    """A lookup asked for a view key the table does not contain."""

    def __init__(self, key: str):
        self.key = key
        super().__init__(f"incomplete table: no entry for key {key}")


@dataclass(frozen=True)
class NodeContext:
    """What one node sees during one step."""

    round: int
    claimed_n: int
    identifier: int
    degree: int
    input: str
    state: Any
    inbox: tuple[Any, ...]
    bits: BitReader | None = None


@dataclass
class StepResult:
    """What one node does after one step.

    ``send`` is broadcast to every neighbor; ``send_ports`` overrides single
    ports with specific values (port index -> message).  ``output`` set means
    halt with that label after the messages go out.
    """

    send: Any = None
    send_ports: Mapping[int, Any] | None = None
    state: Any = None
    output: str | None = None


@dataclass(frozen=True)
class NodeProgram:
    """A deterministic node program: a pure step function plus a round bound
    as a function of the claimed node count."""

    name: str
    step: Callable[[NodeContext], StepResult] = field(repr=False)
    round_bound: Callable[[int], int] = field(repr=False)
    output_alphabet: tuple[str, ...] | None = None


@dataclass(frozen=True)
class RandomizedNodeProgram:
    """Like :class:`NodeProgram` but the step function may read private bits
    from ``ctx.bits`` with no a-priori bound."""

    name: str
    step: Callable[[NodeContext], StepResult] = field(repr=False)
    round_bound: Callable[[int], int] = field(repr=False)
    output_alphabet: tuple[str, ...] | None = None


@dataclass
class RunResult:
    outputs: dict[int, str]
    rounds: int
    trace: tuple[tuple[int, ...], ...] | None = None


def _run(
    program: NodeProgram | RandomizedNodeProgram,
    instance: InputInstance,
    claimed_n: int | None,
    readers: list[BitReader] | None,
    trace: bool,
) -> RunResult:
    n = instance.n
    if claimed_n is None:
        claimed_n = n
    if claimed_n < n:
        raise ValueError(f"claimed node count {claimed_n} below true count {n}")
    bound = program.round_bound(claimed_n)
    allowed = set(program.output_alphabet) if program.output_alphabet else None

    # Port p of node v is its p-th neighbor in increasing identifier order.
    ports = [
        sorted(instance.graph.neighbors(v), key=instance.identifier)
        for v in range(n)
    ]
    port_of = [
        {u: p for p, u in enumerate(ports[v])} for v in range(n)
    ]

    state: list[Any] = [None] * n
    halted = [False] * n
    outputs: dict[int, str] = {}
    last_output_round = 0
    outbox: list[list[Any] | None] = [None] * n
    trace_rows: list[tuple[int, ...]] = []

    for rnd in range(bound + 1):
        if rnd == 0:
            inboxes = [(None,) * len(ports[v]) for v in range(n)]
        else:
            inboxes = [
                tuple(
                    outbox[u][port_of[u][v]] if outbox[u] is not None else None
                    for u in ports[v]
                )
                for v in range(n)
            ]
        new_outbox: list[list[Any] | None] = [None] * n
        sent_counts = [0] * n
        for v in range(n):
            if halted[v]:
                continue
            res = program.step(
                NodeContext(
                    round=rnd,
                    claimed_n=claimed_n,
                    identifier=instance.ids[v],
                    degree=instance.graph.degree(v),
                    input=instance.inputs[v],
                    state=state[v],
                    inbox=inboxes[v],
                    bits=readers[v] if readers is not None else None,
                )
            )
            state[v] = res.state
            if res.send is not None or res.send_ports:
                per_port = [res.send] * len(ports[v])
                if res.send_ports:
                    for p, msg in res.send_ports.items():
                        per_port[p] = msg
                new_outbox[v] = per_port
                sent_counts[v] = sum(m is not None for m in per_port)
            if res.output is not None:
                if allowed is not None and res.output not in allowed:
                    raise SimulationError(
                        f"node {v} emitted label {res.output!r} outside the "
                        f"output alphabet"
                    )
                outputs[v] = res.output
                halted[v] = True
                last_output_round = max(last_output_round, rnd)
        if trace:
            trace_rows.append(tuple(sent_counts))
        outbox = new_outbox
        if all(halted):
            break
    else:
        stuck = [v for v in range(n) if not halted[v]]
        raise SimulationError(
            f"round budget {bound} exceeded; nodes {stuck} never halted"
        )
    return RunResult(outputs, last_output_round, tuple(trace_rows) if trace else None)


def run_deterministic(
    program: NodeProgram,
    instance: InputInstance,
    claimed_n: int | None = None,
    trace: bool = False,
) -> RunResult:
    """Synchronous run of a deterministic program; every node is told
    ``claimed_n`` as the number of nodes (default: the true count)."""
    return _run(program, instance, claimed_n, None, trace)


def run_randomized(
    program: RandomizedNodeProgram,
    instance: InputInstance,
    claimed_n: int | None = None,
    streams: RandomAssignment | None = None,
    seed: object | None = None,
    bit_cap: int = DEFAULT_BIT_CAP,
    trace: bool = False,
) -> RunResult:
    """Run with per-node private bit streams.

    Provide either ``streams`` (an assignment of streams to identifiers) or a
    ``seed``, from which per-node streams are derived as pure functions of
    (seed, identifier) so that runs replay exactly.
    """
    if (streams is None) == (seed is None):
        raise ValueError("provide exactly one of streams or seed")
    if streams is None:
        streams = RandomAssignment.from_seed(seed)
    readers = [
        BitReader(streams.stream_for(instance.ids[v]), cap=bit_cap)
        for v in range(instance.n)
    ]
    return _run(program, instance, claimed_n, readers, trace)


def fix_randomness(
    program: RandomizedNodeProgram,
    assignment: RandomAssignment,
    bit_cap: int = DEFAULT_BIT_CAP,
) -> NodeProgram:
    """Deterministic program in which each node reads bits from the stream
    assigned to its identifier.

    The wrapped state tracks how many bits the node has consumed so far, so
    the result is a pure step function and running it deterministically agrees
    with :func:`run_randomized` under the same assignment.
    """

    def step(ctx: NodeContext) -> StepResult:
        inner_state, consumed = ctx.state if ctx.state is not None else (None, 0)
        reader = BitReader(
            assignment.stream_for(ctx.identifier), cap=bit_cap, start=consumed
        )
        res = program.step(
            NodeContext(
                round=ctx.round,
                claimed_n=ctx.claimed_n,
                identifier=ctx.identifier,
                degree=ctx.degree,
                input=ctx.input,
                state=inner_state,
                inbox=ctx.inbox,
                bits=reader,
            )
        )
        return StepResult(
            send=res.send,
            send_ports=res.send_ports,
            state=(res.state, reader.position),
            output=res.output,
        )

    return NodeProgram(
        name=f"{program.name}[fixed:{assignment.description}]",
        step=step,
        round_bound=program.round_bound,
        output_alphabet=program.output_alphabet,
    )


# ---------------------------------------------------------------------------
# Normal-form tables: a radius plus a mapping from canonical view keys to
# output labels.  Running a table costs its radius in rounds (the gather) and
# nothing more.


@dataclass(frozen=True)
class NormalFormTable:
    radius: int
    output_alphabet: tuple[str, ...]
    entries: tuple[tuple[str, str], ...]
    provenance: str = ""

    def __post_init__(self) -> None:
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")
        object.__setattr__(self, "output_alphabet", tuple(self.output_alphabet))
        entries = tuple(sorted(self.entries))
        object.__setattr__(self, "entries", entries)
        keys = [k for k, _ in entries]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate key in table")
        allowed = set(self.output_alphabet)
        for key, label in entries:
            if label not in allowed:
                raise ValueError(f"table value {label!r} outside the output alphabet")

    @classmethod
    def from_mapping(
        cls,
        radius: int,
        output_alphabet: Sequence[str],
        mapping: Mapping[str, str],
        provenance: str = "",
    ) -> "NormalFormTable":
        return cls(radius, tuple(output_alphabet), tuple(mapping.items()), provenance)

    @cached_property
    def _map(self) -> dict[str, str]:
        return dict(self.entries)

    def lookup(self, key: str) -> str:
        try:
            return self._map[key]
        except KeyError:
            raise IncompleteTableError(key) from None

    def __contains__(self, key: str) -> bool:
        return key in self._map

    @property
    def size(self) -> int:
        return len(self.entries)

    def to_jsonable(self) -> dict:
        return {
            "T": self.radius,
            "output_alphabet": list(self.output_alphabet),
            "entries": [{"key": k, "out": v} for k, v in self.entries],
            "provenance": self.provenance,
        }

    @classmethod
    def from_jsonable(cls, obj: Mapping) -> "NormalFormTable":
        return cls(
            int(obj["T"]),
            tuple(obj["output_alphabet"]),
            tuple((e["key"], e["out"]) for e in obj["entries"]),
            str(obj.get("provenance", "")),
        )


def save_table(table: NormalFormTable, path: str | Path) -> None:
    Path(path).write_text(json.dumps(table.to_jsonable(), indent=2, sort_keys=True) + "\n")


def load_table(path: str | Path) -> NormalFormTable:
    return NormalFormTable.from_jsonable(json.loads(Path(path).read_text()))


def run_normal_form(table: NormalFormTable, instance: InputInstance) -> dict[int, str]:
    """Each node outputs the table entry for its radius-T view."""
    return {
        v: table.lookup(canonicalize(extract_ball(instance, v, table.radius)))
        for v in range(instance.n)
    }


def table_from_labeling(
    instance: InputInstance,
    radius: int,
    labeling: Mapping[int, str],
    output_alphabet: Sequence[str],
    provenance: str = "from-labeling",
) -> NormalFormTable:
    """Table that reproduces ``labeling`` on ``instance`` (one entry per node;
    identifiers make the keys distinct)."""
    mapping = {
        canonicalize(extract_ball(instance, v, radius)): labeling[v]
        for v in range(instance.n)
    }
    return NormalFormTable.from_mapping(radius, output_alphabet, mapping, provenance)


def tabulate(
    program: NodeProgram,
    radius: int,
    family: Sequence[InputInstance],
    claimed_n: int | None = None,
) -> NormalFormTable:
    """Record (radius-T view key -> output) for every node of every instance.

    If one key ever maps to two outputs the program is provably using more
    than ``radius`` rounds of information and :class:`LocalityViolation` is
    raised with both witnesses.
    """
    entries: dict[str, str] = {}
    origin: dict[str, tuple[int, int, str]] = {}
    for idx, instance in enumerate(family):
        result = run_deterministic(program, instance, claimed_n)
        for v in range(instance.n):
            key = canonicalize(extract_ball(instance, v, radius))
            out = result.outputs[v]
            if key in entries:
                if entries[key] != out:
                    raise LocalityViolation(key, origin[key], (idx, v, out))
            else:
                entries[key] = out
                origin[key] = (idx, v, out)
    alphabet = program.output_alphabet or tuple(sorted(set(entries.values())))
    return NormalFormTable.from_mapping(
        radius, alphabet, entries, provenance=f"tabulate:{program.name}"
    )


# ---------------------------------------------------------------------------
# Success probabilities of randomized programs over a family.


def compute_success_exact(
    program: RandomizedNodeProgram,
    problem: ProblemSpec,
    family: Sequence[InputInstance],
    bits: int,
    claimed_n: int | None = None,
) -> list[Fraction]:
    """Exact per-instance failure probabilities for a program that reads at
    most ``bits`` bits per node (reading further raises).

    For each instance all (2**bits)**n joint choices of per-node bit vectors
    are enumerated, run, and verified; the result is the exact fraction that
    fails verification.
    """
    import itertools as _it

    failures: list[Fraction] = []
    for instance in family:
        n = instance.n
        bad = 0
        total = 0
        for flat in _it.product((0, 1), repeat=bits * n):
            vectors = {
                instance.ids[v]: flat[v * bits : (v + 1) * bits] for v in range(n)
            }
            result = run_randomized(
                program,
                instance,
                claimed_n,
                streams=RandomAssignment.from_vectors(vectors),
            )
            total += 1
            if not verify(problem, instance, result.outputs).valid:
                bad += 1
        failures.append(Fraction(bad, total))
    return failures


@dataclass(frozen=True)
class McEstimate:
    failure: Fraction  # exact fraction of failing trials
    stderr: float

    @property
    def failure_float(self) -> float:
        return float(self.failure)


def estimate_success_mc(
    program: RandomizedNodeProgram,
    problem: ProblemSpec,
    family: Sequence[InputInstance],
    trials: int,
    seed: object,
    bit_cap: int = DEFAULT_BIT_CAP,
) -> list[McEstimate]:
    """Per-instance Monte-Carlo failure estimates with standard errors.

    Trial k of instance i draws each node's stream from the key
    (seed, i, k, identifier), so identical seeds replay identical estimates.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    estimates: list[McEstimate] = []
    for idx, instance in enumerate(family):
        bad = 0
        for k in range(trials):
            assignment = RandomAssignment(
                lambda ident, idx=idx, k=k: _trial_stream(seed, idx, k, ident),
                None,
                f"mc:{seed}:{idx}:{k}",
            )
            result = run_randomized(
                program, instance, streams=assignment, bit_cap=bit_cap
            )
            if not verify(problem, instance, result.outputs).valid:
                bad += 1
        p = Fraction(bad, trials)
        stderr = (float(p) * (1.0 - float(p)) / trials) ** 0.5
        estimates.append(McEstimate(p, stderr))
    return estimates


def _trial_stream(seed: object, instance_index: int, trial: int, identifier: int):
    from .streams import BitStream

    return BitStream.keyed(seed, instance_index, trial, identifier)


def as_randomized(program: NodeProgram) -> RandomizedNodeProgram:
    """View a deterministic program as a randomized one that ignores its bits."""
    return RandomizedNodeProgram(
        name=program.name,
        step=program.step,
        round_bound=program.round_bound,
        output_alphabet=program.output_alphabet,
    )
