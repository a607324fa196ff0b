"""Immutable simple undirected graphs, permutations, and color partitions.

Everything in this module is a value: graphs, permutations, and partitions
are frozen after construction, so they can be shared freely across threads
and cached without defensive copies.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

__all__ = [
    "GraphError",
    "Graph",
    "Permutation",
    "ColorPartition",
    "build_graph",
    "apply_permutation",
    "disjoint_union",
    "canonical_partition_encode",
    "uniform_partition",
    "discrete_partition",
    "graph_to_json",
    "graph_from_json",
    "graph_dumps",
    "graph_loads",
    "cycle_graph",
    "path_graph",
    "complete_graph",
    "star_graph",
    "complete_bipartite_graph",
    "prism_graph",
    "empty_graph",
]


class GraphError(ValueError):
    """Raised when graph construction or a graph operation is invalid."""


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on nodes 0..n-1.

    ``adjacency[v]`` is the sorted tuple of neighbors of ``v``; the edge
    relation is symmetric and irreflexive by construction. ``node_labels``
    is either ``None`` or one categorical integer label per node.
    """

    n: int
    adjacency: tuple[tuple[int, ...], ...]
    node_labels: tuple[int, ...] | None = None

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def has_edge(self, u: int, v: int) -> bool:
        # adjacency lists are sorted but tiny; membership scan is fine
        return v in self.adjacency[u]

    def edges(self) -> list[tuple[int, int]]:
        """All edges as (u, v) pairs with u < v, sorted ascending."""
        return [(u, v) for u in range(self.n) for v in self.adjacency[u] if u < v]

    @property
    def num_edges(self) -> int:
        return sum(len(nbrs) for nbrs in self.adjacency) // 2

    def degree_sequence(self) -> tuple[int, ...]:
        return tuple(sorted(len(nbrs) for nbrs in self.adjacency))


@dataclass(frozen=True)
class Permutation:
    """Bijection on 0..n-1, stored as the image tuple ``mapping``."""

    mapping: tuple[int, ...]

    def __post_init__(self) -> None:
        n = len(self.mapping)
        if sorted(self.mapping) != list(range(n)):
            raise GraphError(f"not a permutation of 0..{n - 1}: {self.mapping}")

    def __call__(self, v: int) -> int:
        return self.mapping[v]

    def __len__(self) -> int:
        return len(self.mapping)

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.mapping)
        for i, j in enumerate(self.mapping):
            inv[j] = i
        return Permutation(tuple(inv))

    def compose(self, other: "Permutation") -> "Permutation":
        """Returns self after other: (self.compose(other))(v) = self(other(v))."""
        if len(other) != len(self):
            raise GraphError("cannot compose permutations of different sizes")
        return Permutation(tuple(self.mapping[other.mapping[v]] for v in range(len(self))))

    @staticmethod
    def identity(n: int) -> "Permutation":
        return Permutation(tuple(range(n)))


@dataclass(frozen=True)
class ColorPartition:
    """Partition of 0..n-1 into color classes with canonical dense ids.

    Class ids are assigned in ascending order of the class signature used at
    encoding time, so two encodings of equal colorings produce identical ids.
    """

    class_of: tuple[int, ...]
    classes: tuple[tuple[int, ...], ...] = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.class_of)

    @property
    def k(self) -> int:
        return len(self.classes)

    @property
    def is_discrete(self) -> bool:
        return self.k == self.n

    def class_sizes(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.classes)

    def same_blocks(self, other: "ColorPartition") -> bool:
        """True when both partitions have the same classes as sets of nodes."""
        return sorted(self.classes) == sorted(other.classes)


def build_graph(
    n: int,
    edges: Iterable[tuple[int, int]],
    node_labels: Sequence[int] | None = None,
) -> Graph:
    """Builds a simple undirected graph, rejecting malformed input.

    Self-loops, duplicate edges (in either orientation), and out-of-range
    endpoints are errors. Edge input order is irrelevant.
    """
    if n < 0:
        raise GraphError(f"node count must be nonnegative, got {n}")
    seen: set[tuple[int, int]] = set()
    nbrs: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"edge ({u},{v}) out of range for n={n}")
        if u == v:
            raise GraphError(f"self-loop ({u},{v}) is not allowed")
        key = (u, v) if u < v else (v, u)
        if key in seen:
            raise GraphError(f"duplicate edge ({u},{v})")
        seen.add(key)
        nbrs[u].append(v)
        nbrs[v].append(u)
    labels = None
    if node_labels is not None:
        if len(node_labels) != n:
            raise GraphError(f"expected {n} node labels, got {len(node_labels)}")
        labels = tuple(int(x) for x in node_labels)
    return Graph(n, tuple(tuple(sorted(ns)) for ns in nbrs), labels)


def apply_permutation(g: Graph, p: Permutation) -> Graph:
    """Relabels g by p: edge (u,v) in g iff (p(u),p(v)) in the result."""
    if len(p) != g.n:
        raise GraphError(f"permutation size {len(p)} does not match graph order {g.n}")
    edges = [(p(u), p(v)) for u, v in g.edges()]
    labels = None
    if g.node_labels is not None:
        moved = [0] * g.n
        for v, lab in enumerate(g.node_labels):
            moved[p(v)] = lab
        labels = moved
    return build_graph(g.n, edges, labels)


def disjoint_union(g: Graph, h: Graph) -> tuple[Graph, int]:
    """Concatenates g and h; h's nodes are shifted by g.n. Returns (union, g.n)."""
    offset = g.n
    edges = g.edges() + [(u + offset, v + offset) for u, v in h.edges()]
    labels = None
    if g.node_labels is not None and h.node_labels is not None:
        labels = list(g.node_labels) + list(h.node_labels)
    return build_graph(g.n + h.n, edges, labels), offset


def canonical_partition_encode(coloring: Sequence | Mapping[int, object]) -> ColorPartition:
    """Groups nodes by color key and relabels keys to dense canonical ids.

    The relabeling is an exact dictionary injection: distinct keys always get
    distinct ids, assigned by ascending sort order of the keys. Keys must be
    mutually orderable (ints, or tuples built from ints/tuples).
    """
    if isinstance(coloring, Mapping):
        n = len(coloring)
        keys = [coloring[v] for v in range(n)]
    else:
        keys = list(coloring)
        n = len(keys)
    order = {key: i for i, key in enumerate(sorted(set(keys)))}
    class_of = tuple(order[key] for key in keys)
    members: list[list[int]] = [[] for _ in range(len(order))]
    for v, c in enumerate(class_of):
        members[c].append(v)
    return ColorPartition(class_of, tuple(tuple(m) for m in members))


def uniform_partition(n: int) -> ColorPartition:
    """All nodes share one color, the initial coloring of the refinement tests."""
    return ColorPartition(tuple([0] * n), (tuple(range(n)),))


def discrete_partition(n: int) -> ColorPartition:
    return ColorPartition(tuple(range(n)), tuple((v,) for v in range(n)))


# --- JSON codec -------------------------------------------------------------
#
# {"n": int, "edges": [[u, v], ...], "node_labels": [int, ...] | null}
# Serialization is deterministic: edges are emitted with u < v, sorted.


def graph_to_json(g: Graph) -> dict:
    return {
        "n": g.n,
        "edges": [[u, v] for u, v in g.edges()],
        "node_labels": list(g.node_labels) if g.node_labels is not None else None,
    }


def graph_from_json(doc: Mapping) -> Graph:
    try:
        n = int(doc["n"])
        edges = [(int(u), int(v)) for u, v in doc["edges"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphError(f"malformed graph document: {exc}") from exc
    labels = doc.get("node_labels")
    return build_graph(n, edges, labels)


def graph_dumps(g: Graph) -> str:
    return json.dumps(graph_to_json(g), separators=(",", ":"))


def graph_loads(text: str) -> Graph:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphError(f"invalid graph JSON: {exc}") from exc
    return graph_from_json(doc)


# --- standard constructions -------------------------------------------------


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise GraphError("a cycle needs at least 3 nodes")
    return build_graph(n, [(v, (v + 1) % n) for v in range(n)])


def path_graph(n: int) -> Graph:
    return build_graph(n, [(v, v + 1) for v in range(n - 1)])


def complete_graph(n: int) -> Graph:
    return build_graph(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


def star_graph(leaves: int) -> Graph:
    """Star with one hub (node 0) and the given number of leaves."""
    return build_graph(leaves + 1, [(0, v) for v in range(1, leaves + 1)])


def complete_bipartite_graph(a: int, b: int) -> Graph:
    return build_graph(a + b, [(u, a + v) for u in range(a) for v in range(b)])


def prism_graph() -> Graph:
    """Triangular prism: two triangles {0,1,2}, {3,4,5} joined by a matching."""
    return build_graph(
        6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (0, 3), (1, 4), (2, 5)]
    )


def empty_graph(n: int) -> Graph:
    return build_graph(n, [])
