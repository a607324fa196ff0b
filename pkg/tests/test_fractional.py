import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wlkit.fractional import (
    COMPACT,
    NOT_COMPACT,
    TOO_LARGE,
    Rat,
    RationalMatrix,
    TooLargeError,
    automorphisms,
    brute_force_isomorphic,
    commuting_polytope_vertices,
    fractional_iso_feasible,
    is_compact,
    _simplex_solve,
)
from wlkit.graphs import (
    apply_permutation,
    build_graph,
    complete_graph,
    cycle_graph,
    disjoint_union,
    empty_graph,
    path_graph,
    star_graph,
)
from wlkit.refinement import POSSIBLY_ISOMORPHIC, wl_pair_test

from .conftest import random_graph, random_permutation


class TestRationalMatrix:
    def test_matmul_and_transpose(self):
        a = RationalMatrix.from_rows([[1, 2], [3, 4]])
        b = RationalMatrix.from_rows([[0, 1], [1, 0]])
        assert (a @ b) == RationalMatrix.from_rows([[2, 1], [4, 3]])
        assert a.transpose() == RationalMatrix.from_rows([[1, 3], [2, 4]])

    def test_doubly_stochastic_checks(self):
        half = RationalMatrix.from_rows([[Rat(1, 2), Rat(1, 2)], [Rat(1, 2), Rat(1, 2)]])
        assert half.is_doubly_stochastic()
        assert not half.is_permutation_matrix()
        assert RationalMatrix.identity(3).is_permutation_matrix()

    def test_json_roundtrip(self):
        m = RationalMatrix.from_rows([[Rat(1, 3), Rat(2, 3)], [Rat(2, 3), Rat(1, 3)]])
        doc = m.to_json()
        assert doc[0][0] == "1/3"
        assert RationalMatrix.from_json(doc) == m


class TestSimplex:
    def test_feasible_square(self):
        # x + y = 1 with x, y >= 0
        ok, x = _simplex_solve([[1, 1]], [1])
        assert ok and sum(x) == 1 and all(v >= 0 for v in x)

    def test_infeasible_by_sign(self):
        # x + y = -1 with x, y >= 0
        ok, _ = _simplex_solve([[1, 1]], [-1])
        assert not ok

    def test_infeasible_inconsistent(self):
        ok, _ = _simplex_solve([[1, 1], [1, 1]], [1, 2])
        assert not ok

    def test_optimization_reaches_vertex(self):
        # maximize y on the segment x + y = 1
        ok, x = _simplex_solve([[1, 1]], [1], objective=[0, 1])
        assert ok and x[1] == 1 and x[0] == 0

    def test_redundant_rows_handled(self):
        ok, x = _simplex_solve([[1, 1], [2, 2]], [1, 2], objective=[1, 0])
        assert ok and x[0] == 1


class TestFractionalIso:
    def test_wl_hard_pair_feasible(self, c6, two_c3):
        feasible, witness = fractional_iso_feasible(c6, two_c3)
        assert feasible
        am = RationalMatrix.from_rows(_adjacency(c6))
        bm = RationalMatrix.from_rows(_adjacency(two_c3))
        assert witness.is_doubly_stochastic()
        assert (witness @ am) == (bm @ witness)

    def test_uniform_matrix_is_a_hand_witness(self, c6, two_c3):
        # (1/6) J links any pair of 2-regular graphs on 6 nodes
        j6 = RationalMatrix.from_rows([[Rat(1, 6)] * 6 for _ in range(6)])
        am = RationalMatrix.from_rows(_adjacency(c6))
        bm = RationalMatrix.from_rows(_adjacency(two_c3))
        assert j6.is_doubly_stochastic()
        assert (j6 @ am) == (bm @ j6)

    def test_k3_vs_p3_infeasible(self):
        feasible, witness = fractional_iso_feasible(complete_graph(3), path_graph(3))
        assert not feasible and witness is None

    def test_self_pair_feasible(self):
        g = star_graph(3)
        feasible, witness = fractional_iso_feasible(g, g)
        assert feasible and witness.is_doubly_stochastic()

    def test_size_mismatch_infeasible(self):
        feasible, _ = fractional_iso_feasible(complete_graph(2), complete_graph(3))
        assert not feasible

    def test_size_limit(self):
        g = empty_graph(13)
        with pytest.raises(TooLargeError):
            fractional_iso_feasible(g, g)

    @given(st.integers(1, 5), st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_agrees_with_refinement(self, n, seed):
        rng = np.random.default_rng(seed)
        g = random_graph(rng, n, p=0.5)
        h = random_graph(rng, n, p=0.5)
        feasible, _ = fractional_iso_feasible(g, h)
        assert feasible == (wl_pair_test(g, h).outcome == POSSIBLY_ISOMORPHIC)


def _adjacency(g):
    a = [[0] * g.n for _ in range(g.n)]
    for u, v in g.edges():
        a[u][v] = a[v][u] = 1
    return a


class TestAutomorphisms:
    @pytest.mark.parametrize(
        "graph,count",
        [
            (complete_graph(3), 6),
            (path_graph(3), 2),
            (cycle_graph(4), 8),
            (star_graph(3), 6),
            (cycle_graph(5), 10),
        ],
    )
    def test_known_group_orders(self, graph, count):
        auts = automorphisms(graph)
        assert len(auts) == count
        assert any(p.mapping == tuple(range(graph.n)) for p in auts)

    def test_every_automorphism_preserves_graph(self):
        g = star_graph(4)
        for p in automorphisms(g):
            assert apply_permutation(g, p) == g

    def test_size_limit(self):
        with pytest.raises(TooLargeError):
            automorphisms(empty_graph(9))


class TestBruteForce:
    def test_k33_vs_prism(self, k33, prism):
        assert brute_force_isomorphic(k33, prism) is None

    def test_rotated_cycle(self, c6):
        rng = np.random.default_rng(3)
        h = apply_permutation(c6, random_permutation(rng, 6))
        p = brute_force_isomorphic(c6, h)
        assert p is not None
        assert apply_permutation(c6, p) == h

    def test_k3_vs_p3(self):
        assert brute_force_isomorphic(complete_graph(3), path_graph(3)) is None

    def test_size_limit(self):
        g = empty_graph(9)
        with pytest.raises(TooLargeError):
            brute_force_isomorphic(g, g)

    @given(st.integers(1, 6), st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_symmetric(self, n, seed):
        rng = np.random.default_rng(seed)
        g = random_graph(rng, n, p=0.5)
        h = random_graph(rng, n, p=0.5)
        assert (brute_force_isomorphic(g, h) is None) == (
            brute_force_isomorphic(h, g) is None
        )


class TestPolytopeVertices:
    def test_single_node(self):
        vertices = commuting_polytope_vertices(complete_graph(1))
        assert vertices == [RationalMatrix.from_rows([[1]])]

    def test_k2_is_birkhoff(self):
        vertices = commuting_polytope_vertices(complete_graph(2))
        expected = {
            RationalMatrix.from_rows([[1, 0], [0, 1]]),
            RationalMatrix.from_rows([[0, 1], [1, 0]]),
        }
        assert set(vertices) == expected

    def test_empty_graph_on_two_nodes(self):
        vertices = commuting_polytope_vertices(empty_graph(2))
        assert len(vertices) == 2
        assert all(v.is_permutation_matrix() for v in vertices)

    def test_c4_vertices_are_its_automorphisms(self):
        vertices = commuting_polytope_vertices(cycle_graph(4))
        auts = {RationalMatrix.from_permutation(p) for p in automorphisms(cycle_graph(4))}
        assert set(vertices) == auts

    def test_size_limit(self):
        with pytest.raises(TooLargeError):
            commuting_polytope_vertices(cycle_graph(6))

    @pytest.mark.parametrize("graph", [path_graph(4), star_graph(3), cycle_graph(4)])
    def test_vertices_satisfy_system_and_are_extreme(self, graph):
        vertices = commuting_polytope_vertices(graph)
        am = RationalMatrix.from_rows(_adjacency(graph))
        for v in vertices:
            assert v.is_doubly_stochastic()
            assert (v @ am) == (am @ v)
        # no vertex is the midpoint of two others
        half = Rat(1, 2)
        for a, b in itertools.combinations(vertices, 2):
            mid = RationalMatrix(
                tuple(
                    tuple(half * (x + y) for x, y in zip(ra, rb))
                    for ra, rb in zip(a.entries, b.entries)
                )
            )
            assert mid not in vertices


class TestIsCompact:
    @pytest.mark.parametrize(
        "graph",
        [
            complete_graph(2),
            complete_graph(3),
            cycle_graph(3),
            cycle_graph(4),
            path_graph(2),
            path_graph(4),
            star_graph(3),
        ],
    )
    def test_known_compact_graphs(self, graph):
        report = is_compact(graph)
        assert report.status == COMPACT
        assert report.witness is None
        assert report.automorphism_count >= 1

    def test_two_cycle_union_not_compact(self):
        g, _ = disjoint_union(cycle_graph(3), cycle_graph(4))
        report = is_compact(g, n_limit=7)
        assert report.status == NOT_COMPACT
        assert report.automorphism_count == 48
        witness = report.witness
        am = RationalMatrix.from_rows(_adjacency(g))
        assert witness.is_doubly_stochastic()
        assert (witness @ am) == (am @ witness)
        assert not witness.is_permutation_matrix()
        # support crosses the two components, which no automorphism can do
        assert any(
            witness.entries[i][j] > 0 for i in range(3) for j in range(3, 7)
        )

    def test_too_large(self):
        report = is_compact(empty_graph(20))
        assert report.status == TOO_LARGE
        assert report.witness is None
