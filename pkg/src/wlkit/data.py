"""Dataset ingestion, feature construction, splits, and benchmark generators.

The text format parsed here is the common benchmark layout of one edge file
plus per-node/per-graph indicator and label files:

    NAME_A.txt               one "u, v" pair per line, 1-based, directed entries
    NAME_graph_indicator.txt line i holds the 1-based graph id of node i
    NAME_graph_labels.txt    line k holds the label of graph k
    NAME_node_labels.txt     optional, line i holds the label of node i

Published edge files usually list both orientations of every undirected edge;
single-orientation files are accepted too, and duplicates are merged silently.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .fractional import brute_force_isomorphic
from .graphs import (
    Graph,
    GraphError,
    Permutation,
    apply_permutation,
    build_graph,
    complete_bipartite_graph,
    cycle_graph,
    disjoint_union,
    graph_from_json,
    graph_to_json,
    prism_graph,
)

__all__ = [
    "Dataset",
    "FoldPlan",
    "TuParseError",
    "GenerationError",
    "parse_tu_dataset",
    "initial_features",
    "feature_policy",
    "dataset_features",
    "kfold_splits",
    "gen_wl_hard_pairs",
    "dataset_to_json",
    "dataset_from_json",
    "dataset_dumps",
    "dataset_loads",
    "GENERATOR_FAMILIES",
]


class TuParseError(ValueError):
    """Malformed benchmark files; the message carries file and line number."""


class GenerationError(RuntimeError):
    """Synthetic dataset generation could not satisfy its constraints."""


@dataclass(frozen=True)
class Dataset:
    """Graphs with one class label each; labels are dense ids 0..num_classes-1."""

    name: str
    graphs: tuple[Graph, ...]
    labels: tuple[int, ...]
    num_classes: int

    def __post_init__(self) -> None:
        if len(self.graphs) != len(self.labels):
            raise ValueError("graphs and labels must have equal length")
        if self.labels and not all(0 <= y < self.num_classes for y in self.labels):
            raise ValueError("labels must lie in 0..num_classes-1")

    def __len__(self) -> int:
        return len(self.graphs)


@dataclass(frozen=True)
class FoldPlan:
    """Disjoint index folds covering a dataset, sizes differing by at most one."""

    folds: tuple[tuple[int, ...], ...]

    def train_test(self, fold: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
        test = self.folds[fold]
        train = tuple(
            i for j, f in enumerate(self.folds) if j != fold for i in f
        )
        return train, test


# --- TU-format parsing --------------------------------------------------------


def _read_int_rows(path: Path, expected_cols: int) -> list[tuple[int, ...]]:
    rows = []
    with path.open() as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            parts = line.replace(",", " ").split()
            if len(parts) != expected_cols:
                raise TuParseError(
                    f"{path.name}:{lineno}: expected {expected_cols} values, got {len(parts)}"
                )
            try:
                rows.append(tuple(int(p) for p in parts))
            except ValueError:
                raise TuParseError(
                    f"{path.name}:{lineno}: non-integer token in {line!r}"
                ) from None
    return rows


def parse_tu_dataset(directory: str | Path, name: str) -> Dataset:
    """Parses a benchmark directory into per-graph 0-based representations.

    Graph labels are remapped densely to 0..C-1 in ascending order of their
    original values. Node labels, when present, keep their original values.
    """
    directory = Path(directory)
    paths = {
        "edges": directory / f"{name}_A.txt",
        "indicator": directory / f"{name}_graph_indicator.txt",
        "labels": directory / f"{name}_graph_labels.txt",
    }
    for key, path in paths.items():
        if not path.is_file():
            raise TuParseError(f"missing required file {path}")

    indicator = [row[0] for row in _read_int_rows(paths["indicator"], 1)]
    graph_labels_raw = [row[0] for row in _read_int_rows(paths["labels"], 1)]
    num_graphs = len(graph_labels_raw)
    if any(gid < 1 or gid > num_graphs for gid in indicator):
        raise TuParseError(
            f"{paths['indicator'].name}: graph id out of range 1..{num_graphs}"
        )

    # node ids are global and 1-based; map each to (graph, local id)
    local_of: list[tuple[int, int]] = []
    counts = [0] * num_graphs
    for gid in indicator:
        local_of.append((gid - 1, counts[gid - 1]))
        counts[gid - 1] += 1

    edge_sets: list[set[tuple[int, int]]] = [set() for _ in range(num_graphs)]
    edge_path = paths["edges"]
    with edge_path.open() as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            parts = line.replace(",", " ").split()
            if len(parts) != 2:
                raise TuParseError(
                    f"{edge_path.name}:{lineno}: expected an edge pair, got {line!r}"
                )
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise TuParseError(
                    f"{edge_path.name}:{lineno}: non-integer token in {line!r}"
                ) from None
            if not (1 <= u <= len(indicator) and 1 <= v <= len(indicator)):
                raise TuParseError(
                    f"{edge_path.name}:{lineno}: node id out of range in ({u},{v})"
                )
            gu, lu = local_of[u - 1]
            gv, lv = local_of[v - 1]
            if gu != gv:
                raise TuParseError(
                    f"{edge_path.name}:{lineno}: edge ({u},{v}) crosses graphs "
                    f"{gu + 1} and {gv + 1}"
                )
            if lu == lv:
                raise TuParseError(f"{edge_path.name}:{lineno}: self-loop on node {u}")
            edge_sets[gu].add((lu, lv) if lu < lv else (lv, lu))

    node_labels_path = directory / f"{name}_node_labels.txt"
    node_labels: list[list[int]] | None = None
    if node_labels_path.is_file():
        raw_labels = [row[0] for row in _read_int_rows(node_labels_path, 1)]
        if len(raw_labels) != len(indicator):
            raise TuParseError(
                f"{node_labels_path.name}: {len(raw_labels)} labels for "
                f"{len(indicator)} nodes"
            )
        node_labels = [[0] * c for c in counts]
        for (gid, local), lab in zip(local_of, raw_labels):
            node_labels[gid][local] = lab

    label_map = {lab: i for i, lab in enumerate(sorted(set(graph_labels_raw)))}
    graphs = [
        build_graph(
            counts[gi],
            sorted(edge_sets[gi]),
            node_labels[gi] if node_labels is not None else None,
        )
        for gi in range(num_graphs)
    ]
    return Dataset(
        name=name,
        graphs=tuple(graphs),
        labels=tuple(label_map[lab] for lab in graph_labels_raw),
        num_classes=len(label_map),
    )


# --- initial features -----------------------------------------------------------


def initial_features(
    g: Graph,
    policy: str,
    *,
    max_degree: int | None = None,
    label_alphabet: Sequence[int] | None = None,
) -> np.ndarray:
    """One-hot node features, by degree or by categorical node label.

    Dimensions are dataset-wide: ``max_degree`` spans 0..max_degree for the
    degree policy, ``label_alphabet`` enumerates the admissible labels for the
    label policy. Values outside the configured range are rejected.
    """
    if policy == "degree":
        if max_degree is None:
            raise ValueError("degree policy needs max_degree")
        x = np.zeros((g.n, max_degree + 1))
        for v in range(g.n):
            d = g.degree(v)
            if d > max_degree:
                raise ValueError(f"degree {d} exceeds max_degree {max_degree}")
            x[v, d] = 1.0
        return x
    if policy == "label":
        if label_alphabet is None:
            raise ValueError("label policy needs label_alphabet")
        if g.node_labels is None:
            raise ValueError("graph has no node labels")
        index = {lab: i for i, lab in enumerate(label_alphabet)}
        x = np.zeros((g.n, len(index)))
        for v, lab in enumerate(g.node_labels):
            if lab not in index:
                raise ValueError(f"unknown node label {lab}")
            x[v, index[lab]] = 1.0
        return x
    raise ValueError(f"unknown feature policy {policy!r}")


def feature_policy(dataset: Dataset) -> dict:
    """Dataset-wide feature configuration: labels when present, else degrees."""
    if all(g.node_labels is not None for g in dataset.graphs):
        alphabet = sorted({lab for g in dataset.graphs for lab in g.node_labels})
        return {"policy": "label", "label_alphabet": alphabet}
    max_degree = max(
        (g.degree(v) for g in dataset.graphs for v in range(g.n)), default=0
    )
    return {"policy": "degree", "max_degree": max_degree}


def dataset_features(dataset: Dataset) -> list[np.ndarray]:
    """Initial feature matrix for every graph, under the dataset-wide policy."""
    spec = feature_policy(dataset)
    policy = spec.pop("policy")
    return [initial_features(g, policy, **spec) for g in dataset.graphs]


# --- fold splitting --------------------------------------------------------------


def kfold_splits(n: int, k: int, seed: int) -> FoldPlan:
    """Seeded shuffle followed by contiguous chunking into k folds."""
    if k < 1:
        raise ValueError("k must be positive")
    if k > n:
        raise ValueError(f"cannot split {n} items into {k} folds")
    order = np.random.default_rng(seed).permutation(n)
    base, extra = divmod(n, k)
    folds = []
    at = 0
    for i in range(k):
        size = base + (1 if i < extra else 0)
        folds.append(tuple(int(x) for x in order[at : at + size]))
        at += size
    return FoldPlan(tuple(folds))


# --- synthetic WL-hard benchmarks -------------------------------------------------

GENERATOR_FAMILIES = ("cycle_pair", "k33_prism", "random_regular")


def _relabeled(g: Graph, rng: np.random.Generator) -> Graph:
    p = Permutation(tuple(int(v) for v in rng.permutation(g.n)))
    return apply_permutation(g, p)


def _random_regular(n: int, degree: int, rng: np.random.Generator, tries: int = 200) -> Graph:
    """Pairing-model regular graph; rejects self-loops and duplicate edges."""
    if n * degree % 2 != 0:
        raise GenerationError(f"no {degree}-regular graph on {n} nodes exists")
    for _ in range(tries):
        stubs = np.repeat(np.arange(n), degree)
        rng.shuffle(stubs)
        pairs = stubs.reshape(-1, 2)
        edges = set()
        ok = True
        for u, v in pairs:
            u, v = int(u), int(v)
            if u == v or (min(u, v), max(u, v)) in edges:
                ok = False
                break
            edges.add((min(u, v), max(u, v)))
        if ok:
            return build_graph(n, sorted(edges))
    raise GenerationError(
        f"could not sample a simple {degree}-regular graph on {n} nodes "
        f"in {tries} attempts"
    )


def _random_regular_base_pair(
    n: int, degree: int, rng: np.random.Generator, tries: int = 200
) -> tuple[Graph, Graph]:
    for _ in range(tries):
        g = _random_regular(n, degree, rng)
        h = _random_regular(n, degree, rng)
        if brute_force_isomorphic(g, h) is None:
            return g, h
    raise GenerationError(
        f"no certified non-isomorphic {degree}-regular pair on {n} nodes "
        f"found in {tries} attempts"
    )


def gen_wl_hard_pairs(
    family: str,
    *,
    m: int = 3,
    n: int = 8,
    degree: int = 3,
    count: int = 40,
    seed: int = 0,
) -> Dataset:
    """Two-class datasets whose classes are equal-size regular graphs.

    Families:

    - ``cycle_pair``: class 0 is a single cycle of length 2m, class 1 is two
      disjoint cycles of length m. All graphs are 2-regular on 2m nodes.
    - ``k33_prism``: class 0 is the complete bipartite graph on 3+3 nodes,
      class 1 the triangular prism. Both are 3-regular on 6 nodes.
    - ``random_regular``: one base pair of certified non-isomorphic
      ``degree``-regular graphs on n nodes, relabeled per sample.

    Samples alternate classes and each gets a fresh random node relabeling.
    """
    if count < 2 or count % 2 != 0:
        raise ValueError("count must be even and at least 2")
    rng = np.random.default_rng(seed)
    if family == "cycle_pair":
        if m < 3:
            raise ValueError("cycle halves need at least 3 nodes")
        base0 = cycle_graph(2 * m)
        base1, _ = disjoint_union(cycle_graph(m), cycle_graph(m))
    elif family == "k33_prism":
        base0 = complete_bipartite_graph(3, 3)
        base1 = prism_graph()
    elif family == "random_regular":
        base0, base1 = _random_regular_base_pair(n, degree, rng)
    else:
        raise ValueError(f"unknown family {family!r}; choose from {GENERATOR_FAMILIES}")
    graphs = []
    labels = []
    for i in range(count):
        label = i % 2
        graphs.append(_relabeled(base0 if label == 0 else base1, rng))
        labels.append(label)
    return Dataset(
        name=family, graphs=tuple(graphs), labels=tuple(labels), num_classes=2
    )


# --- dataset JSON codec ------------------------------------------------------------


def dataset_to_json(dataset: Dataset) -> dict:
    return {
        "name": dataset.name,
        "num_classes": dataset.num_classes,
        "labels": list(dataset.labels),
        "graphs": [graph_to_json(g) for g in dataset.graphs],
    }


def dataset_from_json(doc: dict) -> Dataset:
    try:
        return Dataset(
            name=str(doc["name"]),
            graphs=tuple(graph_from_json(g) for g in doc["graphs"]),
            labels=tuple(int(y) for y in doc["labels"]),
            num_classes=int(doc["num_classes"]),
        )
    except (KeyError, TypeError) as exc:
        raise GraphError(f"malformed dataset document: {exc}") from exc


def dataset_dumps(dataset: Dataset) -> str:
    return json.dumps(dataset_to_json(dataset), separators=(",", ":"))


def dataset_loads(text: str) -> Dataset:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphError(f"invalid dataset JSON: {exc}") from exc
    return dataset_from_json(doc)
