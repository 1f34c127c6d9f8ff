"""Labeling problems: local and component-wise verification, canonical brute force."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping

from .graphs import BallView, Graph, InputInstance, extract_ball

# Ball predicates see the view plus candidate outputs keyed by identifier.
BallPredicate = Callable[[BallView, Mapping[int, str]], bool]
# Component predicates see the host instance, the component's node indices,
# and candidate outputs keyed by node index (restricted to the component).
ComponentPredicate = Callable[[InputInstance, tuple[int, ...], Mapping[int, str]], bool]


class ProblemFormatError(ValueError):
    """Raised for malformed declarative problem descriptions."""


@dataclass(frozen=True)
class ProblemSpec:
    """A labeling problem.

    Locally verifiable problems carry a ``ball_predicate`` evaluated on the
    radius-``radius`` view of every node; their component predicate is derived
    as the conjunction of the ball predicates over the component, keeping the
    two verifiers consistent by construction.  Component-wise-only problems
    carry an explicit ``component_predicate`` and use ``radius=0``.
    """

    name: str
    radius: int
    output_alphabet: tuple[str, ...]
    locally_verifiable: bool = True
    ball_predicate: BallPredicate | None = field(default=None, repr=False)
    component_predicate: ComponentPredicate | None = field(default=None, repr=False)
    input_alphabet: tuple[str, ...] | None = None
    declarative: tuple[tuple[str, object], ...] | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "output_alphabet", tuple(self.output_alphabet))
        if not self.output_alphabet:
            raise ValueError("output alphabet must be nonempty")
        if len(set(self.output_alphabet)) != len(self.output_alphabet):
            raise ValueError("output alphabet has duplicate labels")
        if self.radius < 0:
            raise ValueError("verification radius must be nonnegative")
        if self.locally_verifiable:
            if self.ball_predicate is None:
                raise ValueError("locally verifiable problem needs a ball predicate")
        else:
            if self.component_predicate is None:
                raise ValueError("component-wise problem needs a component predicate")
            if self.radius != 0:
                raise ValueError("component-wise-only problems use radius 0")

    def ball_valid(self, ball: BallView, outputs_by_id: Mapping[int, str]) -> bool:
        assert self.ball_predicate is not None
        return bool(self.ball_predicate(ball, outputs_by_id))

    def component_valid(
        self,
        instance: InputInstance,
        component: tuple[int, ...],
        outputs: Mapping[int, str],
    ) -> bool:
        if self.component_predicate is not None:
            return bool(self.component_predicate(instance, component, outputs))
        for v in component:
            ball = extract_ball(instance, v, self.radius)
            if not self.ball_valid(ball, _ball_outputs(instance, ball, outputs)):
                return False
        return True

    def to_jsonable(self) -> dict:
        if self.declarative is None:
            raise ValueError(f"problem {self.name!r} has no declarative form")
        return {k: v for k, v in self.declarative}


def _ball_outputs(
    instance: InputInstance, ball: BallView, outputs: Mapping[int, str]
) -> dict[int, str]:
    return {
        b.identifier: outputs[instance.node_with_id(b.identifier)] for b in ball.nodes
    }


@dataclass(frozen=True)
class VerificationResult:
    """Verdict plus, on failure, the first offending node or component."""

    valid: bool
    witness_node: int | None = None
    witness_component: int | None = None
    witness_view: object | None = None

    def __bool__(self) -> bool:
        return self.valid


def _check_labeling(
    problem: ProblemSpec, instance: InputInstance, outputs: Mapping[int, str]
) -> None:
    allowed = set(problem.output_alphabet)
    for v in range(instance.n):
        if v not in outputs:
            raise ValueError(f"labeling not total: node {v} missing")
        if outputs[v] not in allowed:
            raise ValueError(
                f"label {outputs[v]!r} at node {v} outside the output alphabet"
            )


def verify_locally(
    problem: ProblemSpec, instance: InputInstance, outputs: Mapping[int, str]
) -> VerificationResult:
    """Check the ball predicate at every node, in increasing identifier order.

    The witness on failure is the failing node with the smallest identifier.
    """
    if not problem.locally_verifiable:
        raise ValueError(f"problem {problem.name!r} is not locally verifiable")
    _check_labeling(problem, instance, outputs)
    for v in sorted(range(instance.n), key=instance.identifier):
        ball = extract_ball(instance, v, problem.radius)
        if not problem.ball_valid(ball, _ball_outputs(instance, ball, outputs)):
            return VerificationResult(False, witness_node=v, witness_view=ball)
    return VerificationResult(True)


def verify_componentwise(
    problem: ProblemSpec, instance: InputInstance, outputs: Mapping[int, str]
) -> VerificationResult:
    """Check every connected component against the component predicate."""
    _check_labeling(problem, instance, outputs)
    for idx, comp in enumerate(instance.graph.components):
        restricted = {v: outputs[v] for v in comp}
        if not problem.component_valid(instance, comp, restricted):
            return VerificationResult(
                False, witness_component=idx, witness_view=comp
            )
    return VerificationResult(True)


def verify(
    problem: ProblemSpec, instance: InputInstance, outputs: Mapping[int, str]
) -> VerificationResult:
    """Dispatch to the verifier matching the problem kind."""
    if problem.locally_verifiable:
        return verify_locally(problem, instance, outputs)
    return verify_componentwise(problem, instance, outputs)


def brute_force_solve(
    problem: ProblemSpec, instance: InputInstance
) -> dict[int, str] | None:
    """Lexicographically smallest valid labeling, or None.

    Candidates are ordered by reading nodes in increasing identifier order and
    labels in output-alphabet order, so every caller that solves the same
    labeled graph lands on the same answer.
    """
    order = sorted(range(instance.n), key=instance.identifier)
    for combo in itertools.product(problem.output_alphabet, repeat=instance.n):
        outputs = {order[i]: combo[i] for i in range(instance.n)}
        if verify(problem, instance, outputs).valid:
            return outputs
    return None


def solve_ball_component(problem: ProblemSpec, ball: BallView) -> dict[int, str] | None:
    """Canonical solution of a whole component captured inside a view.

    Requires the view to be degree-closed (every node's original degree is
    realized by view edges), which means the view is exactly the component of
    its center.  Returns labels keyed by identifier.
    """
    inside = {b.identifier: 0 for b in ball.nodes}
    for u, v in ball.edges:
        inside[u] += 1
        inside[v] += 1
    for b in ball.nodes:
        if inside[b.identifier] != b.degree:
            raise ValueError(
                f"view is not a whole component: node {b.identifier} has "
                f"{inside[b.identifier]} of {b.degree} edges"
            )
    idents = sorted(inside)
    index = {ident: i for i, ident in enumerate(idents)}
    sub = InputInstance(
        Graph(len(idents), tuple((index[u], index[v]) for u, v in ball.edges)),
        tuple(idents),
        tuple(ball.node(ident).input for ident in idents),
        None,
    )
    solved = brute_force_solve(problem, sub)
    if solved is None:
        return None
    return {idents[i]: solved[i] for i in range(len(idents))}


# ---------------------------------------------------------------------------
# Built-in problems and the declarative radius-1 file format.
#
# The file format is JSON:
#   {"name": ..., "radius": 1, "output_alphabet": [...],
#    "kind": "coloring-like" | "mis-like" | "table",
#    "allowed": [{"center": label,
#                 "neighbors_condition": {"forbid": [...], "require_any": [...]}}]}
# A node is valid iff some allowed entry matches its own label and the
# condition holds over the multiset of its neighbors' labels.  The "allowed"
# list is only consulted for kind "table"; the other kinds derive it.


def _color_labels(k: int) -> tuple[str, ...]:
    if k < 1:
        raise ValueError("need at least one color")
    letters = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
    return tuple(letters[i] if i < 26 else f"C{i + 1}" for i in range(k))


def _allowed_entries_predicate(alphabet: tuple[str, ...], allowed: list) -> BallPredicate:
    by_center: dict[str, list[dict]] = {}
    for entry in allowed:
        if not isinstance(entry, dict) or "center" not in entry:
            raise ProblemFormatError(f"bad allowed entry: {entry!r}")
        center = entry["center"]
        if center not in alphabet:
            raise ProblemFormatError(f"center label {center!r} outside alphabet")
        cond = entry.get("neighbors_condition") or {}
        if not isinstance(cond, dict) or not set(cond) <= {"forbid", "require_any"}:
            raise ProblemFormatError(f"bad neighbors_condition: {cond!r}")
        for key in ("forbid", "require_any"):
            for label in cond.get(key, []):
                if label not in alphabet:
                    raise ProblemFormatError(f"label {label!r} outside alphabet")
        by_center.setdefault(center, []).append(cond)

    def predicate(ball: BallView, outputs: Mapping[int, str]) -> bool:
        mine = outputs[ball.center_id]
        neighbor_labels = [outputs[u] for u in ball.neighbors_of_center()]
        for cond in by_center.get(mine, []):
            forbid = set(cond.get("forbid", []))
            require = set(cond.get("require_any", []))
            if any(lab in forbid for lab in neighbor_labels):
                continue
            if require and not any(lab in require for lab in neighbor_labels):
                continue
            return True
        return False

    return predicate


def problem_from_jsonable(obj: Mapping) -> ProblemSpec:
    """Build a problem from the declarative radius-1 format."""
    try:
        name = str(obj["name"])
        radius = int(obj["radius"])
        alphabet = tuple(str(x) for x in obj["output_alphabet"])
        kind = str(obj["kind"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ProblemFormatError(f"missing or bad field: {exc}") from exc
    if radius != 1:
        raise ProblemFormatError("declarative problems must use radius 1")
    if not alphabet:
        raise ProblemFormatError("empty output alphabet")

    if kind == "coloring-like":
        allowed = [
            {"center": lab, "neighbors_condition": {"forbid": [lab]}} for lab in alphabet
        ]
    elif kind == "mis-like":
        if len(alphabet) != 2:
            raise ProblemFormatError("mis-like problems need exactly two labels")
        member, outside = alphabet
        allowed = [
            {"center": member, "neighbors_condition": {"forbid": [member]}},
            {"center": outside, "neighbors_condition": {"require_any": [member]}},
        ]
    elif kind == "table":
        allowed = list(obj.get("allowed", []))
        if not allowed:
            raise ProblemFormatError("table problems need a nonempty allowed list")
    else:
        raise ProblemFormatError(f"unknown kind {kind!r}")

    declarative = {
        "name": name,
        "radius": 1,
        "output_alphabet": list(alphabet),
        "kind": kind,
    }
    if kind == "table":
        declarative["allowed"] = allowed
    return ProblemSpec(
        name=name,
        radius=1,
        output_alphabet=alphabet,
        ball_predicate=_allowed_entries_predicate(alphabet, allowed),
        declarative=tuple(sorted(declarative.items(), key=lambda kv: kv[0])),
    )


def make_coloring(k: int) -> ProblemSpec:
    """Proper k-coloring: no neighbor shares the center's label."""
    return problem_from_jsonable(
        {
            "name": f"coloring-{k}",
            "radius": 1,
            "output_alphabet": list(_color_labels(k)),
            "kind": "coloring-like",
        }
    )


def make_mis() -> ProblemSpec:
    """Maximal independent set: IN nodes have no IN neighbor, OUT nodes have one."""
    return problem_from_jsonable(
        {
            "name": "mis",
            "radius": 1,
            "output_alphabet": ["IN", "OUT"],
            "kind": "mis-like",
        }
    )


def load_problem(path: str | Path) -> ProblemSpec:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ProblemFormatError("problem file must hold a JSON object")
    return problem_from_jsonable(obj)


def save_problem(problem: ProblemSpec, path: str | Path) -> None:
    Path(path).write_text(json.dumps(problem.to_jsonable(), indent=2, sort_keys=True) + "\n")


def problem_by_name(name: str) -> ProblemSpec:
    """Resolve CLI-style problem names: 'mis', 'coloring:k', or a file path."""
    if name == "mis":
        return make_mis()
    if name.startswith("coloring:"):
        return make_coloring(int(name.split(":", 1)[1]))
    return load_problem(name)
