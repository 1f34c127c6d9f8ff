"""Small labeled graphs, exhaustive input families, and radius-bounded views.

Everything here is desk scale: node counts stay in the single digits, so the
representations favor clarity and determinism over asymptotics.  All types are
immutable after construction; enumeration order is fixed and documented so
that repeated runs produce byte-identical artifacts.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Mapping, Sequence

# Identifier spaces larger than a 64-bit word are rejected by the enumerator
# (count formulas still evaluate exactly, via native big integers).
MAX_ID_SPACE = 2**63 - 1


def _normalize_edge(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on nodes 0..n-1.

    Edges are stored as sorted (lo, hi) pairs; self-loops and parallel edges
    are rejected rather than silently dropped.
    """

    n: int
    edges: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("node count must be positive")
        seen: set[tuple[int, int]] = set()
        cleaned = []
        for edge in self.edges:
            u, v = edge
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge {edge!r} out of range for n={self.n}")
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            key = _normalize_edge(u, v)
            if key in seen:
                raise ValueError(f"parallel edge {key!r}")
            seen.add(key)
            cleaned.append(key)
        object.__setattr__(self, "edges", tuple(sorted(cleaned)))

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        nbrs: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        return tuple(tuple(sorted(lst)) for lst in nbrs)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    @property
    def max_degree(self) -> int:
        return max((len(a) for a in self.adjacency), default=0)

    def bfs_distances(self, source: int) -> dict[int, int]:
        """Distances from ``source`` to every reachable node."""
        dist = {source: 0}
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for w in self.adjacency[u]:
                if w not in dist:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        return dist

    @cached_property
    def components(self) -> tuple[tuple[int, ...], ...]:
        """Connected components as sorted node tuples, ordered by least node."""
        seen: set[int] = set()
        comps = []
        for v in range(self.n):
            if v in seen:
                continue
            comp = sorted(self.bfs_distances(v))
            seen.update(comp)
            comps.append(tuple(comp))
        return tuple(comps)

    @property
    def is_connected(self) -> bool:
        return len(self.components) == 1


@dataclass(frozen=True)
class InputInstance:
    """One input: a graph with unique identifiers and input labels.

    ``ids[v]`` and ``inputs[v]`` are indexed by node.  When ``c`` is set the
    identifiers must lie in {1, ..., n**c}; derived instances (components cut
    out of a larger instance, disjoint unions) may carry ``c=None`` and then
    only injectivity and positivity are enforced.
    """

    graph: Graph
    ids: tuple[int, ...]
    inputs: tuple[str, ...]
    c: int | None = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "ids", tuple(self.ids))
        object.__setattr__(self, "inputs", tuple(self.inputs))
        n = self.graph.n
        if len(self.ids) != n or len(self.inputs) != n:
            raise ValueError("ids and inputs must cover every node")
        if len(set(self.ids)) != n:
            raise ValueError("identifiers must be injective")
        if any(i < 1 for i in self.ids):
            raise ValueError("identifiers must be positive")
        if self.c is not None:
            if self.c < 1:
                raise ValueError("identifier exponent must be >= 1")
            top = n**self.c
            if any(i > top for i in self.ids):
                raise ValueError(f"identifier out of range 1..{top}")

    @property
    def n(self) -> int:
        return self.graph.n

    @cached_property
    def _id_to_node(self) -> dict[int, int]:
        return {ident: v for v, ident in enumerate(self.ids)}

    def node_with_id(self, identifier: int) -> int:
        return self._id_to_node[identifier]

    def identifier(self, v: int) -> int:
        return self.ids[v]

    def input_of(self, v: int) -> str:
        return self.inputs[v]


@dataclass(frozen=True)
class InstanceFamilySpec:
    """Parameters of an exhaustive input family.

    The family consists of every simple graph on ``n`` nodes, every injective
    identifier assignment into {1, ..., n**c}, and every input labeling over
    ``input_alphabet``; ``max_degree`` optionally filters the graphs.
    """

    n: int
    c: int = 1
    input_alphabet: tuple[str, ...] = ("x",)
    max_degree: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "input_alphabet", tuple(self.input_alphabet))
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.c < 1:
            raise ValueError("c must be >= 1")
        if not self.input_alphabet:
            raise ValueError("input alphabet must be nonempty")
        if len(set(self.input_alphabet)) != len(self.input_alphabet):
            raise ValueError("input alphabet has duplicate labels")
        if self.max_degree is not None and not 0 <= self.max_degree <= self.n - 1:
            raise ValueError("max_degree must satisfy 0 <= max_degree <= n-1")

    @property
    def id_space_size(self) -> int:
        return self.n**self.c

    @property
    def id_space(self) -> range:
        return range(1, self.id_space_size + 1)


def enumerate_instances(spec: InstanceFamilySpec) -> Iterator[InputInstance]:
    """Yield the full family in a fixed order.

    Order: edge sets by ascending bitmask over the lexicographic pair list
    (0,1), (0,2), ..., (n-2,n-1); then identifier assignments in lexicographic
    tuple order; then input labelings in lexicographic alphabet order.
    """
    if spec.id_space_size > MAX_ID_SPACE:
        raise ValueError("identifier space n**c exceeds the 64-bit range")
    n = spec.n
    pairs = list(itertools.combinations(range(n), 2))
    for mask in range(2 ** len(pairs)):
        edges = tuple(pairs[i] for i in range(len(pairs)) if mask >> i & 1)
        graph = Graph(n, edges)
        if spec.max_degree is not None and graph.max_degree > spec.max_degree:
            continue
        for ids in itertools.permutations(spec.id_space, n):
            for labels in itertools.product(spec.input_alphabet, repeat=n):
                yield InputInstance(graph, ids, labels, spec.c)


def count_bound(spec: InstanceFamilySpec) -> int:
    """Closed-form upper bound on the family size (exact integer arithmetic).

    Evaluates 2**C(n,2) * n**(c*n) * |alphabet|**n.  The middle factor counts
    identifier assignments as arbitrary (not necessarily injective) maps into
    the identifier space, so the bound dominates the enumerated count whenever
    ``max_degree`` is unset.
    """
    n, c = spec.n, spec.c
    return 2 ** math.comb(n, 2) * n ** (c * n) * len(spec.input_alphabet) ** n


@dataclass(frozen=True)
class BallNode:
    """A node as seen inside a view: identifier, degree in the full graph,
    input label, and distance from the view's center."""

    identifier: int
    degree: int
    input: str
    dist: int


@dataclass(frozen=True)
class BallView:
    """The radius-T view around a center node.

    Contains every node within distance T of the center and every edge {s, t}
    with d(center, s) <= T-1 and d(center, t) <= T.  Degrees are the original
    graph degrees, not degrees within the view.  Nodes are stored sorted by
    (distance, identifier) and edges as sorted identifier pairs, so identical
    labeled structures compare equal regardless of construction order.
    """

    radius: int
    nodes: tuple[BallNode, ...]
    edges: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")
        nodes = tuple(sorted(self.nodes, key=lambda b: (b.dist, b.identifier)))
        edges = tuple(sorted(_normalize_edge(u, v) for u, v in self.edges))
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", edges)
        if not nodes or nodes[0].dist != 0 or sum(b.dist == 0 for b in nodes) != 1:
            raise ValueError("view must contain exactly one center at distance 0")
        ids = {b.identifier for b in nodes}
        if len(ids) != len(nodes):
            raise ValueError("duplicate identifier in view")
        dist = {b.identifier: b.dist for b in nodes}
        if any(b.dist > self.radius for b in nodes):
            raise ValueError("node beyond the view radius")
        for u, v in edges:
            if u not in ids or v not in ids:
                raise ValueError(f"edge ({u},{v}) touches an unknown identifier")
            du, dv = dist[u], dist[v]
            if abs(du - dv) > 1:
                raise ValueError(f"edge ({u},{v}) joins distances {du} and {dv}")
            if min(du, dv) > self.radius - 1 or max(du, dv) > self.radius:
                raise ValueError(f"edge ({u},{v}) violates the view edge rule")

    @property
    def center(self) -> BallNode:
        return self.nodes[0]

    @property
    def center_id(self) -> int:
        return self.nodes[0].identifier

    @cached_property
    def _by_id(self) -> dict[int, BallNode]:
        return {b.identifier: b for b in self.nodes}

    def node(self, identifier: int) -> BallNode:
        return self._by_id[identifier]

    @property
    def identifiers(self) -> tuple[int, ...]:
        return tuple(b.identifier for b in self.nodes)

    def neighbors_of_center(self) -> tuple[int, ...]:
        c = self.center_id
        out = [v if u == c else u for u, v in self.edges if c in (u, v)]
        return tuple(sorted(out))


def extract_ball(instance: InputInstance, v: int, radius: int) -> BallView:
    """Radius-``radius`` view of node ``v``: nodes within distance T, edges
    with one endpoint within T-1 and the other within T."""
    if not 0 <= v < instance.n:
        raise ValueError(f"node {v} not in instance")
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    g = instance.graph
    dist = g.bfs_distances(v)
    nodes = tuple(
        BallNode(instance.ids[u], g.degree(u), instance.inputs[u], d)
        for u, d in dist.items()
        if d <= radius
    )
    edges = []
    for s, t in g.edges:
        ds, dt = dist.get(s), dist.get(t)
        if ds is None or dt is None:
            continue
        if min(ds, dt) <= radius - 1 and max(ds, dt) <= radius:
            edges.append(_normalize_edge(instance.ids[s], instance.ids[t]))
    return BallView(radius, nodes, tuple(edges))


def canonicalize(ball: BallView) -> str:
    """Deterministic text key of a view.

    The key is the compact JSON of [radius, nodes, edges] with nodes as
    [dist, identifier, degree, input] sorted by (dist, identifier) and edges
    as sorted identifier pairs.  Two views get equal keys iff they are equal
    as identifier-labeled structures; keys compare under plain string order.
    """
    payload = [
        ball.radius,
        [[b.dist, b.identifier, b.degree, b.input] for b in ball.nodes],
        [list(e) for e in ball.edges],
    ]
    return json.dumps(payload, separators=(",", ":"), ensure_ascii=True)


def ball_covers_instance(ball: BallView, instance: InputInstance) -> bool:
    """True when the view contains every node and every edge of the instance."""
    return len(ball.nodes) == instance.n and len(ball.edges) == len(instance.graph.edges)


def extend_instance(
    instance: InputInstance,
    v: int,
    radius: int,
    target_size: int,
    fill_input: str | None = None,
) -> InputInstance:
    """Grow a connected instance to ``target_size`` nodes without disturbing
    the radius-``radius`` view of ``v``.

    A path of fresh nodes is attached to the smallest-identifier node at
    distance >= radius+1 from ``v``; fresh nodes take the smallest unused
    identifiers and the input ``fill_input`` (default: the least label already
    present).  Node indices of the original instance are preserved.
    """
    g = instance.graph
    n = instance.n
    if not g.is_connected:
        raise ValueError("graph not connected")
    ball = extract_ball(instance, v, radius)
    if ball_covers_instance(ball, instance):
        raise ValueError("ball covers graph")
    if target_size <= n:
        raise ValueError("target too small")
    if instance.c is not None and target_size**instance.c > MAX_ID_SPACE:
        raise ValueError("target identifier space n**c exceeds the 64-bit range")
    dist = g.bfs_distances(v)
    candidates = [u for u in range(n) if dist[u] >= radius + 1]
    if not candidates:
        raise ValueError("no attachment node beyond radius")
    w = min(candidates, key=lambda u: instance.ids[u])

    fresh_count = target_size - n
    top = target_size ** (instance.c if instance.c is not None else 1)
    used = set(instance.ids)
    fresh_ids = []
    ident = 1
    while len(fresh_ids) < fresh_count:
        if ident > top:
            raise ValueError("identifier space exhausted")
        if ident not in used:
            fresh_ids.append(ident)
        ident += 1

    fill = fill_input if fill_input is not None else min(instance.inputs)
    new_edges = list(g.edges)
    prev = w
    for k in range(fresh_count):
        new_edges.append(_normalize_edge(prev, n + k))
        prev = n + k
    return InputInstance(
        Graph(target_size, tuple(new_edges)),
        instance.ids + tuple(fresh_ids),
        instance.inputs + (fill,) * fresh_count,
        instance.c,
    )


def disjoint_union(a: InputInstance, b: InputInstance) -> InputInstance:
    """Side-by-side union of two instances with disjoint identifier sets.

    Nodes of ``a`` keep their indices; nodes of ``b`` are shifted by ``a.n``.
    The result carries ``c=None`` since the combined identifiers need not fit
    a common power-range.
    """
    if set(a.ids) & set(b.ids):
        raise ValueError("identifier sets overlap")
    shift = a.n
    edges = list(a.graph.edges) + [(u + shift, v + shift) for u, v in b.graph.edges]
    return InputInstance(
        Graph(a.n + b.n, tuple(edges)),
        a.ids + b.ids,
        a.inputs + b.inputs,
        None,
    )


def instance_to_jsonable(instance: InputInstance) -> dict:
    """Dump format: nodes indexed 0..n-1, edges sorted."""
    return {
        "n": instance.n,
        "c": instance.c,
        "edges": [list(e) for e in instance.graph.edges],
        "ids": {str(v): instance.ids[v] for v in range(instance.n)},
        "inputs": {str(v): instance.inputs[v] for v in range(instance.n)},
    }


def instance_from_jsonable(obj: Mapping) -> InputInstance:
    n = int(obj["n"])
    edges = tuple((int(u), int(v)) for u, v in obj["edges"])
    ids = tuple(int(obj["ids"][str(v)]) for v in range(n))
    inputs = tuple(str(obj["inputs"][str(v)]) for v in range(n))
    c = obj.get("c")
    return InputInstance(Graph(n, edges), ids, inputs, None if c is None else int(c))


def dump_instances(instances: Sequence[InputInstance]) -> str:
    """One instance per line, JSON objects."""
    return "".join(
        json.dumps(instance_to_jsonable(i), sort_keys=True, separators=(",", ":")) + "\n"
        for i in instances
    )


def load_instances(text: str) -> list[InputInstance]:
    return [
        instance_from_jsonable(json.loads(line))
        for line in text.splitlines()
        if line.strip()
    ]
