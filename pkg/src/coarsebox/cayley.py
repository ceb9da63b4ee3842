"""Finite quotient Cayley graphs stored as one permutation per generator.

Vertices are 0..V-1 with 0 the basepoint. Labels are always assigned by
BFS discovery order from the basepoint, scanning generators in index
order and each generator before its inverse, so identical inputs build
bit-identical graphs.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .config import DEFAULT_VERTEX_BUDGET
from .errors import (
    AmbiguousLiftError,
    BadInputError,
    BudgetExceededError,
    InconsistentTowerError,
    InternalConsistencyError,
    NoCycleError,
    UnsupportedBaseError,
)
from .words import Word, check_alphabet

SL2_DEFAULT_GENERATORS = (((1, 2), (0, 1)), ((1, 0), (2, 1)))


class CayleyQuotient:
    """Cayley graph of a finite quotient: perms[s] is the right action of
    generator s+1. Immutable after construction; queries are pure."""

    def __init__(self, n_generators: int, perms, provenance: str = ""):
        perms = np.array(perms, dtype=np.int64)
        if perms.ndim != 2 or perms.shape[0] != n_generators:
            raise BadInputError("need one permutation per generator")
        num_vertices = perms.shape[1]
        ref = np.arange(num_vertices)
        for s in range(n_generators):
            if not np.array_equal(np.sort(perms[s]), ref):
                raise BadInputError(f"generator {s + 1} permutation is not a bijection")
        self.n_generators = n_generators
        self.num_vertices = num_vertices
        self.perms = perms
        self.perms.setflags(write=False)
        self.inv_perms = np.argsort(perms, axis=1)
        self.inv_perms.setflags(write=False)
        self.provenance = provenance
        self.basepoint = 0
        if _bfs_order(perms, self.inv_perms)[0].size != num_vertices:
            raise BadInputError("the permutations do not act transitively (graph disconnected)")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, CayleyQuotient)
            and self.n_generators == other.n_generators
            and self.num_vertices == other.num_vertices
            and np.array_equal(self.perms, other.perms)
            and self.provenance == other.provenance
        )

    def __repr__(self) -> str:
        return (
            f"CayleyQuotient(n={self.n_generators}, V={self.num_vertices}, "
            f"provenance={self.provenance!r})"
        )

    def step(self, v: int, letter: int) -> int:
        """Apply one signed generator to a vertex."""
        if letter > 0:
            return int(self.perms[letter - 1][v])
        return int(self.inv_perms[-letter - 1][v])

    def evaluate(self, letters: Sequence[int], start: int = 0) -> int:
        """Endpoint of the walk spelling `letters` (0 means stay put)."""
        v = start
        for x in letters:
            if x != 0:
                v = self.step(v, x)
        return v

    def word_permutation(self, w: Word) -> np.ndarray:
        """The permutation of all vertices induced by the word."""
        check_alphabet(w, self.n_generators)
        arr = np.arange(self.num_vertices)
        for x in w:
            arr = self.perms[x - 1][arr] if x > 0 else self.inv_perms[-x - 1][arr]
        return arr

    @property
    def is_free_quotient(self) -> bool:
        """Whether the graph was built as a quotient of a free group."""
        return self.provenance.startswith("free")

    def to_json_dict(self) -> dict:
        return {
            "n_generators": self.n_generators,
            "num_vertices": self.num_vertices,
            "perms": [[int(x) for x in p] for p in self.perms],
            "provenance": self.provenance,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "CayleyQuotient":
        return cls(int(data["n_generators"]), data["perms"], data.get("provenance", ""))


def _bfs_order(perms: np.ndarray, inv_perms: np.ndarray, start: int = 0):
    """Vertices in canonical BFS discovery order plus the label array
    (-1 outside the orbit of `start`)."""
    n, degree = perms.shape
    label = np.full(degree, -1, dtype=np.int64)
    label[start] = 0
    blocks = [np.array([start], dtype=np.int64)]
    frontier = blocks[0]
    count = 1
    while frontier.size:
        cols = []
        for s in range(n):
            cols.append(perms[s][frontier])
            cols.append(inv_perms[s][frontier])
        # row-major flatten: all neighbours of a vertex before the next vertex
        stream = np.stack(cols, axis=1).reshape(-1)
        stream = stream[label[stream] < 0]
        if stream.size == 0:
            break
        _, first = np.unique(stream, return_index=True)
        new = stream[np.sort(first)]
        label[new] = np.arange(count, count + new.size)
        count += new.size
        blocks.append(new)
        frontier = new
    return np.concatenate(blocks), label


def from_permutations(
    n_generators: int, generator_permutations, provenance: str = "perms"
) -> CayleyQuotient:
    """Restrict to the orbit of point 0 and relabel by BFS discovery order."""
    perms = np.array(generator_permutations, dtype=np.int64)
    if perms.ndim != 2 or perms.shape[0] != n_generators:
        raise BadInputError("need one permutation per generator, all of equal degree")
    degree = perms.shape[1]
    ref = np.arange(degree)
    for s in range(n_generators):
        if not np.array_equal(np.sort(perms[s]), ref):
            raise BadInputError(f"generator {s + 1} array is not a bijection")
    inv = np.argsort(perms, axis=1)
    order, label = _bfs_order(perms, inv)
    new_perms = np.empty((n_generators, order.size), dtype=np.int64)
    for s in range(n_generators):
        new_perms[s] = label[perms[s][order]]
    return CayleyQuotient(n_generators, new_perms, provenance)


def bouquet(n_generators: int) -> CayleyQuotient:
    """The one-vertex quotient of the free group on n generators."""
    return CayleyQuotient(
        n_generators,
        np.zeros((n_generators, 1), dtype=np.int64),
        provenance=f"free:bouquet(rank={n_generators})",
    )


def _mat_mul(a, b, m):
    """Product of 2x2 matrices stored as flat (a, b, c, d) tuples, mod m."""
    return (
        (a[0] * b[0] + a[1] * b[2]) % m,
        (a[0] * b[1] + a[1] * b[3]) % m,
        (a[2] * b[0] + a[3] * b[2]) % m,
        (a[2] * b[1] + a[3] * b[3]) % m,
    )


def from_matrices_sl2(
    modulus: int,
    generators=None,
    vertex_budget: int = DEFAULT_VERTEX_BUDGET,
) -> CayleyQuotient:
    """BFS-close the subgroup of SL2(Z/modulus) generated by the images of the
    given integer matrices; vertices are subgroup elements, perms are right
    multiplication."""
    if modulus < 2:
        raise BadInputError("modulus must be at least 2")
    if generators is None:
        generators = SL2_DEFAULT_GENERATORS
    gens = []
    for g in generators:
        det = (g[0][0] * g[1][1] - g[0][1] * g[1][0]) % modulus
        if det != 1 % modulus:
            raise BadInputError(f"matrix {g} has determinant {det} != 1 mod {modulus}")
        gens.append((g[0][0] % modulus, g[0][1] % modulus, g[1][0] % modulus, g[1][1] % modulus))
    # inverse of a determinant-1 matrix
    invs = [(g[3], (-g[1]) % modulus, (-g[2]) % modulus, g[0]) for g in gens]
    directions = []
    for g, gi in zip(gens, invs):
        directions.extend([g, gi])
    identity = (1 % modulus, 0, 0, 1 % modulus)
    ids = {identity: 0}
    order = [identity]
    queue = deque([identity])
    while queue:
        cur = queue.popleft()
        for d in directions:
            nxt = _mat_mul(cur, d, modulus)
            if nxt not in ids:
                ids[nxt] = len(order)
                order.append(nxt)
                if len(order) > vertex_budget:
                    raise BudgetExceededError(
                        f"sl2 closure mod {modulus} exceeds vertex budget {vertex_budget}"
                    )
                queue.append(nxt)
    perms = np.empty((len(gens), len(order)), dtype=np.int64)
    for s, g in enumerate(gens):
        for i, mat in enumerate(order):
            perms[s][i] = ids[_mat_mul(mat, g, modulus)]
    return CayleyQuotient(len(gens), perms, provenance=f"sl2(modulus={modulus})")


def _spanning_tree_arcs(X: CayleyQuotient) -> set[tuple[int, int]]:
    """Arcs (vertex, generator index) of the canonical BFS spanning tree.
    Arc (v, s) is the edge v -- v*s; discovery through an inverse step marks
    the positively-labelled arc of the same edge."""
    seen = [False] * X.num_vertices
    seen[0] = True
    tree: set[tuple[int, int]] = set()
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for s in range(X.n_generators):
            v = int(X.perms[s][u])
            if not seen[v]:
                seen[v] = True
                tree.add((u, s))
                queue.append(v)
            w = int(X.inv_perms[s][u])
            if not seen[w]:
                seen[w] = True
                tree.add((w, s))
                queue.append(w)
    return tree


def voltage_cover(
    X: CayleyQuotient, m: int, vertex_budget: int = DEFAULT_VERTEX_BUDGET
) -> tuple[CayleyQuotient, np.ndarray]:
    """Regular (Z/m)^g cover of a free-group quotient, g = E - V + 1.

    Spanning-tree arcs carry voltage 0 and the j-th non-tree arc the j-th
    standard basis vector, so the cover is the Cayley graph of the next
    m-homology filtration level. Returns the cover and the projection
    (an array mapping cover vertices to base vertices).
    """
    if not X.is_free_quotient:
        raise UnsupportedBaseError(
            f"voltage covers need a free-group quotient; provenance is {X.provenance!r}"
        )
    if m < 2:
        raise BadInputError("deck exponent m must be at least 2")
    V, n = X.num_vertices, X.n_generators
    g = (n - 1) * V + 1
    if g * math.log2(m) > 62 or V * m**g > vertex_budget:
        raise BudgetExceededError(
            f"voltage cover would have {V} * {m}^{g} vertices, over budget {vertex_budget}"
        )
    D = m**g
    tree = _spanning_tree_arcs(X)
    nontree_index = np.full((V, n), -1, dtype=np.int64)
    j = 0
    for v in range(V):
        for s in range(n):
            if (v, s) not in tree:
                nontree_index[v, s] = j
                j += 1
    assert j == g
    codes = np.arange(D, dtype=np.int64)
    deltas = []
    for jj in range(g):
        pw = m**jj
        digit = (codes // pw) % m
        deltas.append(np.where(digit < m - 1, pw, pw * (1 - m)))
    perms = np.empty((n, V * D), dtype=np.int64)
    for s in range(n):
        for v in range(V):
            pv = int(X.perms[s][v])
            jj = int(nontree_index[v, s])
            new_codes = codes if jj < 0 else codes + deltas[jj]
            perms[s][v * D : (v + 1) * D] = pv * D + new_codes
    inv = np.argsort(perms, axis=1)
    order, label = _bfs_order(perms, inv)
    if order.size != V * D:
        raise InternalConsistencyError("voltage cover is not connected")
    new_perms = np.empty((n, V * D), dtype=np.int64)
    for s in range(n):
        new_perms[s] = label[perms[s][order]]
    covering_map = order // D
    cover = CayleyQuotient(n, new_perms, provenance=f"free:voltage(m={m})[{X.provenance}]")
    return cover, covering_map


def bfs_distances(X: CayleyQuotient, v: int) -> np.ndarray:
    """Exact hop distances from v, every generator edge undirected length 1."""
    if not 0 <= v < X.num_vertices:
        raise BadInputError(f"vertex {v} out of range")
    dist = np.full(X.num_vertices, -1, dtype=np.int64)
    dist[v] = 0
    frontier = np.array([v], dtype=np.int64)
    d = 0
    while frontier.size:
        nxt = []
        for s in range(X.n_generators):
            nxt.append(X.perms[s][frontier])
            nxt.append(X.inv_perms[s][frontier])
        stream = np.concatenate(nxt)
        stream = stream[dist[stream] < 0]
        if stream.size == 0:
            break
        frontier = np.unique(stream)
        d += 1
        dist[frontier] = d
    return dist


def diameter(X: CayleyQuotient, assume_vertex_transitive: bool = True) -> int:
    """Largest eccentricity. Every builder in this package produces a
    vertex-transitive graph, for which the basepoint eccentricity suffices;
    pass assume_vertex_transitive=False to scan all vertices."""
    if assume_vertex_transitive:
        return int(bfs_distances(X, 0).max())
    return max(int(bfs_distances(X, v).max()) for v in range(X.num_vertices))


def _letter_order(n: int):
    for i in range(1, n + 1):
        yield i
        yield -i


def girth_word(X: CayleyQuotient) -> tuple[int, Word]:
    """Shortest nonempty freely reduced word closed at the basepoint, with one
    witness. Non-backtracking BFS over (vertex, last letter) states; for
    free-group quotients this is the systole of the kernel."""
    if X.num_vertices == 1:
        raise NoCycleError("trivial one-vertex quotient: every word is closed")
    base = X.basepoint
    letters = list(_letter_order(X.n_generators))
    parent: dict[tuple[int, int], tuple[Optional[tuple[int, int]], int]] = {}
    queue: deque[tuple[int, int]] = deque()
    for letter in letters:
        v = X.step(base, letter)
        if v == base:
            return 1, Word((letter,))
        st = (v, letter)
        if st not in parent:
            parent[st] = (None, letter)
            queue.append(st)
    while queue:
        v, last = queue.popleft()
        for letter in letters:
            if letter == -last:
                continue
            w = X.step(v, letter)
            if w == base:
                rev = [letter]
                st: Optional[tuple[int, int]] = (v, last)
                while st is not None:
                    prev, lt = parent[st]
                    rev.append(lt)
                    st = prev
                return len(rev), Word(tuple(reversed(rev)))
            st2 = (w, letter)
            if st2 not in parent:
                parent[st2] = ((v, last), letter)
                queue.append(st2)
    raise NoCycleError("no closed reduced word found")  # unreachable on connected graphs


@dataclass
class SystoleCertificate:
    """Certified shortest length of a word closed in the shallow quotient but
    nontrivial in the group, established through a deeper quotient."""

    kind: str  # "Exact" | "LowerBound"
    value: int
    witness: Optional[Word]
    deep_provenance: str
    assumption: str = ""

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "value": self.value,
            "witness": None if self.witness is None else str(self.witness),
            "deep_provenance": self.deep_provenance,
            "assumption": self.assumption,
        }


def systole_certified(
    X_shallow: CayleyQuotient,
    X_deep: CayleyQuotient,
    covering_map=None,
    assume_deep_faithful: bool = False,
) -> SystoleCertificate:
    """Search reduced words by increasing length for one closed in the shallow
    quotient but open in the deep one.

    Exact is returned when the word is shorter than every word closed in the
    deep quotient (its girth), which certifies the value outright for
    quotients of free groups. With assume_deep_faithful the search treats
    deep-closed words as trivial group elements and certifies the first
    separating word found at any length; callers must surface that
    assumption, which is only sound when the deep level separates all
    elements shorter than the certified value.
    """
    if X_shallow.n_generators != X_deep.n_generators:
        raise BadInputError("quotients have different generator counts")
    if covering_map is not None:
        covering_map = np.asarray(covering_map)
        if covering_map.shape[0] != X_deep.num_vertices:
            raise BadInputError("covering map length does not match the deep quotient")
    letters = list(_letter_order(X_deep.n_generators))
    b_sh, b_dp = X_shallow.basepoint, X_deep.basepoint
    fiber: dict[int, int] = {b_dp: b_sh}
    parent: dict[tuple[int, int], tuple[Optional[tuple[int, int]], int]] = {}

    def check_fiber(v_dp: int, v_sh: int) -> None:
        prev = fiber.setdefault(v_dp, v_sh)
        if prev != v_sh:
            raise InconsistentTowerError(
                "deep quotient does not refine the shallow one "
                f"(deep vertex {v_dp} reached over shallow {prev} and {v_sh})"
            )
        if covering_map is not None and int(covering_map[v_dp]) != v_sh:
            raise InconsistentTowerError(
                f"walk disagrees with the supplied covering map at deep vertex {v_dp}"
            )

    def witness_of(state: Optional[tuple[int, int]], letter: int) -> Word:
        rev = [letter]
        while state is not None:
            prev, lt = parent[state]
            rev.append(lt)
            state = prev
        return Word(tuple(reversed(rev)))

    girth_deep: Optional[int] = None
    candidate: Optional[tuple[int, Word]] = None
    # frontier entries: (deep vertex, shallow vertex, last letter)
    frontier: list[tuple[int, int, int]] = []
    for letter in letters:
        v_dp = X_deep.step(b_dp, letter)
        v_sh = X_shallow.step(b_sh, letter)
        check_fiber(v_dp, v_sh)
        if v_dp == b_dp and girth_deep is None:
            girth_deep = 1
        if v_dp != b_dp and v_sh == b_sh and candidate is None:
            candidate = (1, Word((letter,)))
        st = (v_dp, letter)
        if st not in parent:
            parent[st] = (None, letter)
            frontier.append((v_dp, v_sh, letter))
    depth = 1
    while True:
        if candidate is not None:
            length = candidate[0]
            if girth_deep is None or length < girth_deep:
                return SystoleCertificate(
                    "Exact", length, candidate[1], X_deep.provenance
                )
            if assume_deep_faithful:
                return SystoleCertificate(
                    "Exact",
                    length,
                    candidate[1],
                    X_deep.provenance,
                    assumption=(
                        "words closed in the deep quotient were treated as trivial "
                        "group elements; sound when the deep level separates all "
                        f"elements shorter than {length}"
                    ),
                )
            return SystoleCertificate("LowerBound", girth_deep, None, X_deep.provenance)
        if girth_deep is not None and not assume_deep_faithful:
            return SystoleCertificate("LowerBound", girth_deep, None, X_deep.provenance)
        if not frontier:
            if girth_deep is not None:
                return SystoleCertificate("LowerBound", girth_deep, None, X_deep.provenance)
            raise InternalConsistencyError("search exhausted without any closed word")
        depth += 1
        next_frontier: list[tuple[int, int, int]] = []
        for v_dp, v_sh, last in frontier:
            for letter in letters:
                if letter == -last:
                    continue
                w_dp = X_deep.step(v_dp, letter)
                w_sh = X_shallow.step(v_sh, letter)
                check_fiber(w_dp, w_sh)
                if w_dp == b_dp and girth_deep is None:
                    girth_deep = depth
                if w_dp != b_dp and w_sh == b_sh and candidate is None:
                    candidate = (depth, witness_of((v_dp, last), letter))
                st = (w_dp, letter)
                if st not in parent:
                    parent[st] = ((v_dp, last), letter)
                    next_frontier.append((w_dp, w_sh, letter))
        frontier = next_frontier


def b1_graph(X: CayleyQuotient) -> int:
    """First Betti number of the graph: E - V + 1 with E = n*V arcs, one per
    vertex per generator (loops and doubled edges count)."""
    return X.n_generators * X.num_vertices - X.num_vertices + 1


def graph_fibers(covering_map) -> dict[int, np.ndarray]:
    cov = np.asarray(covering_map)
    ordering = np.argsort(cov, kind="stable")
    fibers: dict[int, np.ndarray] = {}
    sorted_cov = cov[ordering]
    bounds = np.searchsorted(sorted_cov, np.arange(sorted_cov.max() + 2))
    for b in range(len(bounds) - 1):
        if bounds[b] < bounds[b + 1]:
            fibers[b] = ordering[bounds[b] : bounds[b + 1]]
    return fibers


def lift_path(p, Y: CayleyQuotient, covering_map, start: int):
    """Unique lift of an r-path along a covering, step by step: each point
    lifts to the unique preimage within distance r of the previous lift.
    Sound when twice the scale is below the certified systole of the pair."""
    from .homotopy import RPath  # local import to avoid a cycle

    cov = np.asarray(covering_map)
    if not 0 <= start < Y.num_vertices:
        raise BadInputError(f"start vertex {start} out of range")
    if int(cov[start]) != p.points[0]:
        raise BadInputError("start vertex does not lie over the path origin")
    fibers = graph_fibers(cov)
    r = p.scale
    lifted = [start]
    for i, target in enumerate(p.points[1:], start=1):
        dist = _truncated_ball(Y, lifted[-1], r)
        options = [int(u) for u in fibers.get(int(target), ()) if int(u) in dist]
        if len(options) != 1:
            raise AmbiguousLiftError(
                f"step {i}: {len(options)} preimages of vertex {target} within "
                f"distance {r} of the current lift"
            )
        lifted.append(options[0])
    return RPath(Y, r, tuple(lifted), _validated=True)


def _truncated_ball(X: CayleyQuotient, v: int, radius: int) -> dict[int, int]:
    """Distances from v out to the given radius."""
    dist = {v: 0}
    frontier = [v]
    d = 0
    while frontier and d < radius:
        d += 1
        nxt = []
        for u in frontier:
            for s in range(X.n_generators):
                for w in (int(X.perms[s][u]), int(X.inv_perms[s][u])):
                    if w not in dist:
                        dist[w] = d
                        nxt.append(w)
        frontier = nxt
    return dist


def write_graph(X: CayleyQuotient, path) -> None:
    with open(path, "w") as fh:
        json.dump(X.to_json_dict(), fh, sort_keys=True, indent=2)
        fh.write("\n")


def read_graph(path) -> CayleyQuotient:
    with open(path) as fh:
        return CayleyQuotient.from_json_dict(json.load(fh))


def to_dot(X: CayleyQuotient, comments: Sequence[str] = ()) -> str:
    """DOT export: one directed edge per (vertex, generator)."""
    lines = ["digraph cayley {"]
    for c in comments:
        lines.append(f"  // {c}")
    for v in range(X.num_vertices):
        lines.append(f"  {v};")
    for s in range(X.n_generators):
        for v in range(X.num_vertices):
            lines.append(f'  {v} -> {int(X.perms[s][v])} [label="s{s + 1}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
