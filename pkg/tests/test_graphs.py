import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wlkit.graphs import (
    GraphError,
    Permutation,
    apply_permutation,
    build_graph,
    canonical_partition_encode,
    complete_graph,
    cycle_graph,
    discrete_partition,
    disjoint_union,
    graph_dumps,
    graph_from_json,
    graph_loads,
    graph_to_json,
    path_graph,
    uniform_partition,
)

from .conftest import random_graph, random_permutation


class TestBuildGraph:
    def test_triangle(self):
        g = build_graph(3, [(0, 1), (1, 2), (0, 2)])
        assert [g.degree(v) for v in range(3)] == [2, 2, 2]
        assert g.edges() == [(0, 1), (0, 2), (1, 2)]

    def test_single_node(self):
        g = build_graph(1, [])
        assert g.n == 1 and g.degree(0) == 0

    def test_self_loop_rejected(self):
        with pytest.raises(GraphError, match="self-loop"):
            build_graph(2, [(0, 0)])

    @pytest.mark.parametrize("edges", [[(0, 1), (0, 1)], [(0, 1), (1, 0)]])
    def test_duplicate_edge_rejected(self, edges):
        with pytest.raises(GraphError, match="duplicate"):
            build_graph(2, edges)

    def test_out_of_range_rejected(self):
        with pytest.raises(GraphError, match="out of range"):
            build_graph(2, [(0, 2)])

    def test_edge_order_irrelevant(self):
        a = build_graph(3, [(2, 1), (0, 1)])
        b = build_graph(3, [(0, 1), (1, 2)])
        assert a == b

    def test_label_count_checked(self):
        with pytest.raises(GraphError, match="labels"):
            build_graph(2, [], node_labels=[1])


class TestPermutation:
    def test_identity_roundtrip(self):
        g = path_graph(4)
        assert apply_permutation(g, Permutation.identity(4)) == g

    def test_k3_invariant(self):
        g = complete_graph(3)
        assert apply_permutation(g, Permutation((1, 2, 0))) == g

    def test_path_rotation(self):
        g = path_graph(3)
        rotated = apply_permutation(g, Permutation((1, 2, 0)))
        assert sorted(rotated.edges()) == [(0, 2), (1, 2)]
        assert rotated.degree_sequence() == g.degree_sequence()

    def test_size_mismatch_rejected(self):
        with pytest.raises(GraphError):
            apply_permutation(path_graph(3), Permutation((0, 1)))

    def test_not_a_bijection_rejected(self):
        with pytest.raises(GraphError):
            Permutation((0, 0, 1))

    def test_labels_relocated(self):
        g = build_graph(3, [(0, 1)], node_labels=[7, 8, 9])
        moved = apply_permutation(g, Permutation((2, 0, 1)))
        assert moved.node_labels == (8, 9, 7)

    @given(st.integers(0, 50), st.integers(0, 2**32 - 1))
    def test_inverse_roundtrip(self, n, seed):
        rng = np.random.default_rng(seed)
        g = random_graph(rng, n)
        p = random_permutation(rng, n)
        assert apply_permutation(apply_permutation(g, p), p.inverse()) == g

    @given(st.integers(1, 40), st.integers(0, 2**32 - 1))
    def test_degree_multiset_preserved(self, n, seed):
        rng = np.random.default_rng(seed)
        g = random_graph(rng, n)
        p = random_permutation(rng, n)
        assert apply_permutation(g, p).degree_sequence() == g.degree_sequence()


class TestDisjointUnion:
    def test_two_triangles(self):
        union, offset = disjoint_union(complete_graph(3), complete_graph(3))
        assert offset == 3
        assert union.n == 6 and union.num_edges == 6

    def test_isolated_nodes(self):
        union, _ = disjoint_union(complete_graph(1), complete_graph(1))
        assert union.n == 2 and union.num_edges == 0

    def test_c6_against_two_c3(self):
        two_c3, _ = disjoint_union(cycle_graph(3), cycle_graph(3))
        union, _ = disjoint_union(cycle_graph(6), two_c3)
        assert union.n == 12
        assert union.num_edges == 12
        assert set(union.degree_sequence()) == {2}


class TestCanonicalPartitionEncode:
    def test_all_same_key(self):
        part = canonical_partition_encode(["a", "a", "a"])
        assert part.k == 1 and part.classes == ((0, 1, 2),)

    def test_sorting_rule(self):
        part = canonical_partition_encode({0: "b", 1: "a", 2: "b"})
        assert part.class_of == (1, 0, 1)
        assert part.classes == ((1,), (0, 2))

    def test_distinct_keys_discrete(self):
        part = canonical_partition_encode([5, 3, 9, 1])
        assert part.is_discrete and part.k == 4

    def test_uniform_and_discrete_helpers(self):
        assert uniform_partition(4).k == 1
        assert discrete_partition(4).k == 4

    @given(st.lists(st.integers(0, 5), min_size=1, max_size=30), st.integers(0, 2**32 - 1))
    def test_stable_under_relabeling(self, keys, seed):
        rng = np.random.default_rng(seed)
        part = canonical_partition_encode(keys)
        p = random_permutation(rng, len(keys))
        moved_keys = [0] * len(keys)
        for v, key in enumerate(keys):
            moved_keys[p(v)] = key
        moved = canonical_partition_encode(moved_keys)
        assert moved.k == part.k
        assert sorted(moved.class_sizes()) == sorted(part.class_sizes())
        # identical keys get identical ids in both encodings
        for v in range(len(keys)):
            assert moved.class_of[p(v)] == part.class_of[v]


class TestJsonCodec:
    def test_document_shape(self):
        g = build_graph(3, [(2, 0), (0, 1)], node_labels=[1, 0, 1])
        doc = graph_to_json(g)
        assert doc == {"n": 3, "edges": [[0, 1], [0, 2]], "node_labels": [1, 0, 1]}

    def test_deterministic_serialization(self):
        a = build_graph(4, [(3, 2), (1, 0), (0, 2)])
        b = build_graph(4, [(0, 2), (2, 3), (0, 1)])
        assert graph_dumps(a) == graph_dumps(b)

    def test_malformed_rejected(self):
        with pytest.raises(GraphError):
            graph_from_json({"edges": []})
        with pytest.raises(GraphError):
            graph_loads("{not json")

    @given(st.integers(0, 30), st.integers(0, 2**32 - 1), st.booleans())
    def test_roundtrip(self, n, seed, labeled):
        rng = np.random.default_rng(seed)
        g = random_graph(rng, n)
        if labeled:
            g = build_graph(g.n, g.edges(), [int(x) for x in rng.integers(0, 3, n)])
        assert graph_loads(graph_dumps(g)) == g
        assert graph_from_json(json.loads(json.dumps(graph_to_json(g)))) == g
