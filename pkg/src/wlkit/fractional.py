"""Exact-arithmetic fractional isomorphism, compactness, and oracles.

Feasibility of the doubly stochastic commuting system

    X A = B X,   X e = X^t e = e,   X >= 0

is decided with a two-phase primal simplex over exact rationals. The same
machinery enumerates the vertices of the polytope of doubly stochastic
matrices commuting with a single adjacency matrix, which settles whether a
graph's polytope is spanned by its automorphism matrices: the polytope equals
the convex hull of the automorphisms exactly when every one of its vertices
is a permutation matrix (a permutation that commutes with the adjacency
matrix is itself an automorphism).

Everything here is yes/no: feasibility, vertex integrality, isomorphism.
Floating point would make those answers tolerance-dependent, so no floats
appear anywhere in this module.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .graphs import Graph, GraphError, Permutation, apply_permutation

try:  # gmpy2 rationals are ~10x faster; fractions.Fraction is the fallback
    from gmpy2 import mpq as Rat
except ImportError:  # pragma: no cover
    from fractions import Fraction as Rat

__all__ = [
    "Rat",
    "TooLargeError",
    "LpError",
    "RationalMatrix",
    "CompactnessReport",
    "COMPACT",
    "NOT_COMPACT",
    "TOO_LARGE",
    "fractional_iso_feasible",
    "automorphisms",
    "commuting_polytope_vertices",
    "is_compact",
    "brute_force_isomorphic",
    "LP_SIZE_LIMIT",
    "ORACLE_SIZE_LIMIT",
    "POLYTOPE_SIZE_LIMIT",
]

_ZERO = Rat(0)
_ONE = Rat(1)

LP_SIZE_LIMIT = 12
ORACLE_SIZE_LIMIT = 8
POLYTOPE_SIZE_LIMIT = 5

COMPACT = "Compact"
NOT_COMPACT = "NotCompact"
TOO_LARGE = "TooLarge"


class TooLargeError(ValueError):
    """Input exceeds the configured size limit for an exhaustive routine."""


class LpError(RuntimeError):
    """Internal simplex invariant violated (should not happen on bounded systems)."""


@dataclass(frozen=True)
class RationalMatrix:
    """Dense matrix of exact rationals."""

    entries: tuple[tuple, ...]

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    @staticmethod
    def from_rows(rows: Iterable[Iterable]) -> "RationalMatrix":
        return RationalMatrix(tuple(tuple(Rat(x) for x in row) for row in rows))

    @staticmethod
    def identity(n: int) -> "RationalMatrix":
        return RationalMatrix(
            tuple(tuple(_ONE if i == j else _ZERO for j in range(n)) for i in range(n))
        )

    @staticmethod
    def from_permutation(p: Permutation) -> "RationalMatrix":
        n = len(p)
        return RationalMatrix(
            tuple(tuple(_ONE if p(i) == j else _ZERO for j in range(n)) for i in range(n))
        )

    def __matmul__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.cols != other.rows:
            raise ValueError("matrix dimensions do not match")
        cols = other.transpose().entries
        return RationalMatrix(
            tuple(
                tuple(sum((a * b for a, b in zip(row, col)), _ZERO) for col in cols)
                for row in self.entries
            )
        )

    def transpose(self) -> "RationalMatrix":
        return RationalMatrix(tuple(zip(*self.entries))) if self.entries else self

    def row_sums(self) -> tuple:
        return tuple(sum(row, _ZERO) for row in self.entries)

    def col_sums(self) -> tuple:
        return self.transpose().row_sums()

    def is_nonnegative(self) -> bool:
        return all(x >= 0 for row in self.entries for x in row)

    def is_doubly_stochastic(self) -> bool:
        return (
            self.rows == self.cols
            and self.is_nonnegative()
            and all(s == 1 for s in self.row_sums())
            and all(s == 1 for s in self.col_sums())
        )

    def is_permutation_matrix(self) -> bool:
        return self.is_doubly_stochastic() and all(
            x == 0 or x == 1 for row in self.entries for x in row
        )

    def to_permutation(self) -> Permutation:
        if not self.is_permutation_matrix():
            raise ValueError("matrix is not a permutation matrix")
        return Permutation(tuple(row.index(_ONE) for row in [list(r) for r in self.entries]))

    def to_json(self) -> list[list[str]]:
        return [[f"{x.numerator}/{x.denominator}" for x in row] for row in self.entries]

    @staticmethod
    def from_json(doc: Sequence[Sequence[str]]) -> "RationalMatrix":
        return RationalMatrix(
            tuple(tuple(Rat(*map(int, cell.split("/"))) for cell in row) for row in doc)
        )


@dataclass(frozen=True)
class CompactnessReport:
    """Answer of the compactness check.

    status "NotCompact" always carries a witness: a vertex of the commuting
    doubly stochastic polytope that is not a permutation matrix.
    ``automorphism_count`` is None when the input was too large to analyze.
    """

    status: str
    witness: RationalMatrix | None
    automorphism_count: int | None


def _adjacency_ints(g: Graph) -> list[list[int]]:
    a = [[0] * g.n for _ in range(g.n)]
    for u, v in g.edges():
        a[u][v] = 1
        a[v][u] = 1
    return a


# --- exact linear algebra ----------------------------------------------------


def _rref(rows: list[list]) -> tuple[list[list], list[int]]:
    """In-place reduced row echelon form; returns (nonzero rows, pivot columns)."""
    if not rows:
        return [], []
    ncols = len(rows[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot_row = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if pivot_row is None:
            continue
        rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
        piv = rows[r][c]
        if piv != 1:
            rows[r] = [x / piv for x in rows[r]]
        lead = rows[r]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], lead)]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


# --- two-phase simplex --------------------------------------------------------


def _simplex_solve(
    eq_rows: list[list],
    rhs: list,
    objective: list | None = None,
) -> tuple[bool, list | None]:
    """Decides {x >= 0 : Ex = f}; optionally maximizes objective . x over it.

    Returns (feasible, x) where x is a basic feasible solution (a vertex of
    the feasible polyhedron); with an objective, x is an optimal vertex.
    Bland's rule is used throughout, so termination is guaranteed.
    """
    # Presolve: independent rows only; a pivot in the rhs column means 0 = 1.
    aug = [list(map(Rat, row)) + [Rat(b)] for row, b in zip(eq_rows, rhs)]
    reduced, pivots = _rref(aug)
    if pivots and pivots[-1] == len(aug[0]) - 1:
        return False, None
    d = len(eq_rows[0])
    rows = [r[:d] for r in reduced]
    f = [r[d] for r in reduced]
    m = len(rows)
    if m == 0:
        x = [_ZERO] * d
        return True, x

    # Phase 1: artificial basis, minimize the artificial total.
    tableau: list[list] = []
    for i in range(m):
        if f[i] < 0:
            row = [-x for x in rows[i]]
            b = -f[i]
        else:
            row = list(rows[i])
            b = f[i]
        art = [_ZERO] * m
        art[i] = _ONE
        tableau.append(row + art + [b])
    basis = [d + i for i in range(m)]
    width = d + m
    cost = [_ZERO] * (width + 1)
    for i in range(m):
        for j in range(d):
            cost[j] -= tableau[i][j]
        cost[width] -= tableau[i][width]

    def pivot(r: int, c: int) -> None:
        piv = tableau[r][c]
        if piv != 1:
            tableau[r] = [x / piv for x in tableau[r]]
        lead = tableau[r]
        for i in range(m):
            if i != r and tableau[i][c] != 0:
                fac = tableau[i][c]
                tableau[i] = [a - fac * b for a, b in zip(tableau[i], lead)]
        if cost[c] != 0:
            fac = cost[c]
            for j in range(width + 1):
                cost[j] -= fac * lead[j]
        basis[r] = c

    def run(allowed: Callable[[int], bool]) -> None:
        # Bland: entering = lowest-index improving column; leaving = lowest
        # basis variable among minimal ratios.
        while True:
            enter = next(
                (j for j in range(width) if allowed(j) and cost[j] < 0), None
            )
            if enter is None:
                return
            best = None
            for i in range(m):
                a = tableau[i][enter]
                if a > 0:
                    key = (tableau[i][width] / a, basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                raise LpError("unbounded direction in a bounded system")
            pivot(best[1], enter)

    run(lambda j: True)
    if cost[width] != 0:
        return False, None

    # Drive leftover artificials out of the basis; rows where no structural
    # column is available are redundant and get dropped.
    for i in range(m - 1, -1, -1):
        if basis[i] >= d:
            col = next((j for j in range(d) if tableau[i][j] != 0), None)
            if col is None:
                del tableau[i], basis[i]
                m -= 1
            else:
                pivot(i, col)

    if objective is not None:
        # Phase 2 on structural columns only: maximize c.x == minimize -c.x.
        cost = [_ZERO] * (width + 1)
        for j in range(d):
            cost[j] = -Rat(objective[j])
        for i in range(m):
            cj = -Rat(objective[basis[i]]) if basis[i] < d else _ZERO
            if cj != 0:
                for j in range(width + 1):
                    cost[j] -= cj * tableau[i][j]
        run(lambda j: j < d)

    x = [_ZERO] * d
    for i in range(m):
        if basis[i] < d:
            x[basis[i]] = tableau[i][width]
    return True, x


# --- fractional isomorphism ---------------------------------------------------


def _commuting_system(
    a: list[list[int]], b: list[list[int]]
) -> tuple[list[list[int]], list[int]]:
    """Equalities for {X : X a = b X, rows/cols of X sum to 1} over x = vec(X)."""
    n = len(a)
    d = n * n
    rows: list[list[int]] = []
    rhs: list[int] = []
    for i in range(n):
        for j in range(n):
            row = [0] * d
            for k in range(n):
                row[i * n + k] += a[k][j]
                row[k * n + j] -= b[i][k]
            rows.append(row)
            rhs.append(0)
    for i in range(n):
        row = [0] * d
        for j in range(n):
            row[i * n + j] = 1
        rows.append(row)
        rhs.append(1)
    for j in range(n):
        row = [0] * d
        for i in range(n):
            row[i * n + j] = 1
        rows.append(row)
        rhs.append(1)
    return rows, rhs


def _vec_to_matrix(x: Sequence, n: int) -> RationalMatrix:
    return RationalMatrix(tuple(tuple(x[i * n + j] for j in range(n)) for i in range(n)))


def _verify_commuting_witness(
    x: RationalMatrix, a: list[list[int]], b: list[list[int]]
) -> bool:
    am = RationalMatrix.from_rows(a)
    bm = RationalMatrix.from_rows(b)
    return x.is_doubly_stochastic() and (x @ am) == (bm @ x)


def fractional_iso_feasible(
    g: Graph, h: Graph, size_limit: int = LP_SIZE_LIMIT
) -> tuple[bool, RationalMatrix | None]:
    """Feasibility of the doubly stochastic commuting system for the pair.

    A size mismatch is infeasible (no n x n doubly stochastic matrix links
    graphs of different order). On success the witness is re-substituted into
    the full system before it is returned.
    """
    if g.n != h.n:
        return False, None
    if g.n > size_limit:
        raise TooLargeError(
            f"fractional isomorphism limited to n <= {size_limit}, got {g.n}"
        )
    if g.n == 0:
        return True, RationalMatrix(())
    a = _adjacency_ints(g)
    b = _adjacency_ints(h)
    rows, rhs = _commuting_system(a, b)
    feasible, x = _simplex_solve(rows, rhs)
    if not feasible:
        return False, None
    witness = _vec_to_matrix(x, g.n)
    if not _verify_commuting_witness(witness, a, b):
        raise LpError("simplex produced a witness that fails re-substitution")
    return True, witness


# --- exhaustive search oracles -------------------------------------------------


def _search_mappings(g: Graph, h: Graph, find_all: bool) -> list[Permutation]:
    """Backtracking edge-preserving bijections g -> h, in lexicographic order."""
    n = g.n
    found: list[Permutation] = []
    image = [-1] * n
    used = [False] * n
    hdeg = [h.degree(v) for v in range(n)]

    def extend(v: int) -> bool:
        if v == n:
            found.append(Permutation(tuple(image)))
            return not find_all
        for w in range(n):
            if used[w] or g.degree(v) != hdeg[w]:
                continue
            ok = True
            for u in range(v):
                if g.has_edge(u, v) != h.has_edge(image[u], w):
                    ok = False
                    break
            if ok:
                image[v] = w
                used[w] = True
                if extend(v + 1):
                    return True
                used[w] = False
                image[v] = -1
        return False

    extend(0)
    return found


def automorphisms(g: Graph, limit: int = ORACLE_SIZE_LIMIT) -> list[Permutation]:
    """All edge-preserving permutations of g, by exhaustive search."""
    if g.n > limit:
        raise TooLargeError(f"automorphism enumeration limited to n <= {limit}, got {g.n}")
    auts = _search_mappings(g, g, find_all=True)
    for p in auts:
        assert apply_permutation(g, p).adjacency == g.adjacency
    return auts


def brute_force_isomorphic(
    g: Graph, h: Graph, limit: int = ORACLE_SIZE_LIMIT
) -> Permutation | None:
    """Exhaustive isomorphism check; the returned permutation is verified.

    None means certified non-isomorphic (the search space was exhausted).
    """
    if max(g.n, h.n) > limit:
        raise TooLargeError(f"isomorphism oracle limited to n <= {limit}")
    if g.n != h.n or g.degree_sequence() != h.degree_sequence():
        return None
    found = _search_mappings(g, h, find_all=False)
    if not found:
        return None
    p = found[0]
    if apply_permutation(g, p).adjacency != h.adjacency:
        raise RuntimeError("search produced a non-isomorphism")
    return p


# --- polytope vertices and compactness -----------------------------------------


def _nullspace_parametrization(
    rows: list[list[int]], rhs: list[int], d: int
) -> tuple[list, list[list], list[int]]:
    """Solves Ex = f as x = x0 + N t; returns (x0, columns of N, free columns)."""
    aug = [list(map(Rat, row)) + [Rat(b)] for row, b in zip(rows, rhs)]
    reduced, pivots = _rref(aug)
    if pivots and pivots[-1] == d:
        raise LpError("inconsistent equality system for a nonempty polytope")
    pivot_set = set(pivots)
    free = [c for c in range(d) if c not in pivot_set]
    x0 = [_ZERO] * d
    for i, c in enumerate(pivots):
        x0[c] = reduced[i][d]
    basis_cols: list[list] = []
    for fc in free:
        v = [_ZERO] * d
        v[fc] = _ONE
        for i, c in enumerate(pivots):
            v[c] = -reduced[i][fc]
        basis_cols.append(v)
    return x0, basis_cols, free


def _enumerate_vertices(x0: list, basis_cols: list[list]) -> list[tuple]:
    """All vertices of {x0 + N t : x0 + N t >= 0} by active-set enumeration.

    A vertex is a feasible point where some q = dim(t) independent coordinate
    constraints x_i = 0 are active. Candidate active sets are enumerated
    recursively with incremental integer elimination, so linearly dependent
    prefixes are pruned early; every consistent square subsystem is solved
    exactly and feasibility of the resulting point decides acceptance.
    """
    q = len(basis_cols)
    d = len(x0)
    if q == 0:
        return [tuple(x0)] if all(v >= 0 for v in x0) else []

    # Integer scaling: row i of the constraint system is (N[i] | -x0[i]).
    scaled: list[tuple[int, ...]] = []
    for i in range(d):
        row = [basis_cols[j][i] for j in range(q)] + [-x0[i]]
        lcm = 1
        for val in row:
            den = val.denominator
            lcm = lcm * den // _gcd(lcm, den)
        scaled.append(tuple(int(val * lcm) for val in row))

    vertices: dict[tuple, None] = {}

    def back_substitute(elim: list[tuple[int, tuple[int, ...]]]) -> None:
        # elim rows are in echelon form over columns 0..q-1 plus rhs.
        t = [_ZERO] * q
        for lead, row in reversed(elim):
            acc = Rat(row[q])
            for j in range(lead + 1, q):
                if row[j]:
                    acc -= row[j] * t[j]
            t[lead] = acc / row[lead]
        x = list(x0)
        for j in range(q):
            tj = t[j]
            if tj:
                col = basis_cols[j]
                x = [xv + tj * cv for xv, cv in zip(x, col)]
        if all(v >= 0 for v in x):
            vertices[tuple(x)] = None

    def reduce_row(row: tuple[int, ...], elim: list[tuple[int, tuple[int, ...]]]):
        work = list(row)
        for lead, erow in elim:
            if work[lead]:
                f, p = work[lead], erow[lead]
                work = [p * a - f * b for a, b in zip(work, erow)]
        lead = next((j for j in range(q) if work[j]), None)
        if lead is None:
            return None
        g = 0
        for val in work:
            g = _gcd(g, abs(val))
        if g > 1:
            work = [val // g for val in work]
        return lead, tuple(work)

    def recurse(start: int, elim: list[tuple[int, tuple[int, ...]]]) -> None:
        if len(elim) == q:
            back_substitute(elim)
            return
        # need q - len(elim) more rows from scaled[start:]
        for i in range(start, d - (q - len(elim)) + 1):
            red = reduce_row(scaled[i], elim)
            if red is not None:
                elim.append(red)
                recurse(i + 1, elim)
                elim.pop()

    recurse(0, [])
    return sorted(vertices.keys())


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def commuting_polytope_vertices(
    g: Graph, n_limit: int = POLYTOPE_SIZE_LIMIT
) -> list[RationalMatrix]:
    """Vertices of {X doubly stochastic : X A = A X} for g's adjacency matrix A.

    Exhaustive and exact; the identity matrix is always among the vertices.
    Output is deduplicated and canonically sorted by matrix entries.
    """
    if g.n > n_limit:
        raise TooLargeError(
            f"vertex enumeration limited to n <= {n_limit}, got {g.n}"
        )
    a = _adjacency_ints(g)
    rows, rhs = _commuting_system(a, a)
    x0, basis_cols, _ = _nullspace_parametrization(rows, rhs, g.n * g.n)
    return [_vec_to_matrix(x, g.n) for x in _enumerate_vertices(x0, basis_cols)]


def _orbit_gap_witness(
    g: Graph, auts: list[Permutation]
) -> RationalMatrix | None:
    """Searches for a commuting doubly stochastic matrix with support outside
    the automorphism orbits of node pairs.

    Every convex combination of automorphism matrices vanishes on such pairs,
    so a vertex with positive mass there proves the polytope exceeds the hull
    of the automorphisms. The first off-orbit pair with a positive maximum
    yields the witness (an optimal basic solution, hence a vertex).
    """
    n = g.n
    in_orbit = [[False] * n for _ in range(n)]
    for p in auts:
        for i in range(n):
            in_orbit[i][p(i)] = True
    a = _adjacency_ints(g)
    rows, rhs = _commuting_system(a, a)
    for i in range(n):
        for j in range(n):
            if in_orbit[i][j]:
                continue
            objective = [0] * (n * n)
            objective[i * n + j] = 1
            feasible, x = _simplex_solve(rows, rhs, objective=objective)
            if not feasible:
                raise LpError("commuting polytope lost its identity matrix")
            if x[i * n + j] > 0:
                return _vec_to_matrix(x, n)
    return None


def is_compact(g: Graph, n_limit: int = POLYTOPE_SIZE_LIMIT) -> CompactnessReport:
    """Decides whether every vertex of the commuting polytope is a permutation.

    Up to the exhaustive-enumeration limit the answer is definitive. Between
    that limit and ``n_limit`` a sound one-sided probe runs instead: it can
    prove "NotCompact" with a fractional-vertex witness but cannot certify
    "Compact", in which case the report says "TooLarge".
    """
    if g.n > n_limit:
        return CompactnessReport(TOO_LARGE, None, None)
    auts = automorphisms(g, limit=max(g.n, ORACLE_SIZE_LIMIT))
    if g.n <= POLYTOPE_SIZE_LIMIT:
        fractional = [
            v
            for v in commuting_polytope_vertices(g, n_limit=g.n)
            if not v.is_permutation_matrix()
        ]
        if not fractional:
            return CompactnessReport(COMPACT, None, len(auts))
        return CompactnessReport(NOT_COMPACT, fractional[0], len(auts))
    witness = _orbit_gap_witness(g, auts)
    if witness is not None:
        a = _adjacency_ints(g)
        if not _verify_commuting_witness(witness, a, a) or witness.is_permutation_matrix():
            raise LpError("invalid fractional-vertex witness")
        return CompactnessReport(NOT_COMPACT, witness, len(auts))
    return CompactnessReport(TOO_LARGE, None, len(auts))
