"""Exact integer matrix algebra: sparse Smith normal form and first homology
of a graph with 2-cells attached along closed walks.

All arithmetic is arbitrary precision; intermediate entry growth is the
price of exact torsion.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field

from .errors import BadInputError


class IntMatrix:
    """Sparse integer matrix: only nonzero entries are stored."""

    def __init__(self, rows: int, cols: int, entries=None):
        if rows < 0 or cols < 0:
            raise BadInputError("matrix dimensions must be nonnegative")
        self.rows = rows
        self.cols = cols
        self.entries: dict[tuple[int, int], int] = {}
        if entries:
            for (r, c), v in dict(entries).items():
                self[r, c] = v

    def __getitem__(self, rc) -> int:
        return self.entries.get(rc, 0)

    def __setitem__(self, rc, value: int) -> None:
        r, c = rc
        if not (0 <= r < self.rows and 0 <= c < self.cols):
            raise BadInputError(f"entry {rc} out of bounds for {self.rows}x{self.cols}")
        if value == 0:
            self.entries.pop(rc, None)
        else:
            self.entries[rc] = int(value)

    @classmethod
    def from_dense(cls, dense) -> "IntMatrix":
        rows = len(dense)
        cols = len(dense[0]) if rows else 0
        M = cls(rows, cols)
        for r, row in enumerate(dense):
            for c, v in enumerate(row):
                if v:
                    M[r, c] = v
        return M

    def nnz(self) -> int:
        return len(self.entries)


class _SparseWorksheet:
    """Row/column indexed view used by the elimination."""

    def __init__(self, M: IntMatrix):
        self.val: dict[tuple[int, int], int] = dict(M.entries)
        self.row_cols: dict[int, set[int]] = defaultdict(set)
        self.col_rows: dict[int, set[int]] = defaultdict(set)
        for (r, c) in self.val:
            self.row_cols[r].add(c)
            self.col_rows[c].add(r)

    def set(self, r: int, c: int, v: int) -> None:
        if v == 0:
            if (r, c) in self.val:
                del self.val[(r, c)]
                self.row_cols[r].discard(c)
                self.col_rows[c].discard(r)
        else:
            self.val[(r, c)] = v
            self.row_cols[r].add(c)
            self.col_rows[c].add(r)

    def get(self, r: int, c: int) -> int:
        return self.val.get((r, c), 0)

    def add_row(self, dst: int, src: int, k: int) -> None:
        if k == 0:
            return
        for c in list(self.row_cols[src]):
            self.set(dst, c, self.get(dst, c) + k * self.get(src, c))

    def add_col(self, dst: int, src: int, k: int) -> None:
        if k == 0:
            return
        for r in list(self.col_rows[src]):
            self.set(r, dst, self.get(r, dst) + k * self.get(r, src))

    def negate_row(self, r: int) -> None:
        for c in list(self.row_cols[r]):
            self.val[(r, c)] = -self.val[(r, c)]

    def min_pivot(self, retired_rows: set[int], retired_cols: set[int]):
        """Smallest nonzero absolute value, ties by lowest (row, col)."""
        best = None
        for (r, c), v in self.val.items():
            if r in retired_rows or c in retired_cols:
                continue
            key = (abs(v), r, c)
            if best is None or key < best:
                best = key
        if best is None:
            return None
        return best[1], best[2]


def snf(M: IntMatrix) -> list[int]:
    """Nonzero invariant factors d1 | d2 | ... of M, all positive."""
    ws = _SparseWorksheet(M)
    retired_rows: set[int] = set()
    retired_cols: set[int] = set()
    factors: list[int] = []
    while True:
        pivot = ws.min_pivot(retired_rows, retired_cols)
        if pivot is None:
            break
        pr, pc = pivot
        while True:
            if ws.get(pr, pc) < 0:
                ws.negate_row(pr)
            # clear the pivot column
            moved = False
            for r in sorted(ws.col_rows[pc] - retired_rows - {pr}):
                v = ws.get(pr, pc)
                ws.add_row(r, pr, -(ws.get(r, pc) // v))
                if ws.get(r, pc) != 0:
                    pr = r  # remainder is strictly smaller: new pivot
                    moved = True
                    break
            if moved:
                continue
            # clear the pivot row
            for c in sorted(ws.row_cols[pr] - retired_cols - {pc}):
                v = ws.get(pr, pc)
                ws.add_col(c, pc, -(ws.get(pr, c) // v))
                if ws.get(pr, c) != 0:
                    pc = c
                    moved = True
                    break
            if moved:
                continue
            d = ws.get(pr, pc)
            # make the pivot divide every remaining entry before retiring it
            offender = None
            for (r, c) in sorted(ws.val):
                if r in retired_rows or c in retired_cols or r == pr or c == pc:
                    continue
                if ws.val[(r, c)] % d != 0:
                    offender = (r, c)
                    break
            if offender is None:
                break
            ws.add_row(pr, offender[0], 1)
        assert ws.row_cols[pr] == {pc} and ws.col_rows[pc] == {pr}
        factors.append(abs(ws.get(pr, pc)))
        retired_rows.add(pr)
        retired_cols.add(pc)
        ws.set(pr, pc, 0)
    factors.sort()
    for a, b in zip(factors, factors[1:]):
        if b % a != 0:
            raise AssertionError("invariant factors do not form a divisibility chain")
    return factors


@dataclass
class H1Result:
    """First homology: free rank and the torsion divisibility chain."""

    betti: int
    torsion: list[int] = field(default_factory=list)

    def __post_init__(self):
        for a, b in zip(self.torsion, self.torsion[1:]):
            if a <= 1 or b % a != 0:
                raise BadInputError("torsion must be a divisibility chain of integers > 1")
        if self.torsion and self.torsion[0] <= 1:
            raise BadInputError("torsion entries must exceed 1")

    def to_json_dict(self) -> dict:
        return {"betti": self.betti, "torsion": list(self.torsion)}

    def as_pair(self) -> tuple[int, tuple[int, ...]]:
        return self.betti, tuple(self.torsion)


def h1_from_complex(num_vertices: int, edges, walks) -> H1Result:
    """Homology of the graph (num_vertices, edges) with one 2-cell per walk.

    edges: sequence of (u, v) arcs; walks: sequences of signed 1-based arc
    indices (+k traverses arc k-1 forward, -k backward), each forming a
    closed walk. A BFS spanning tree from vertex 0 in edge-index order fixes
    the non-tree edge basis; each cell abelianizes to its signed non-tree
    traversal counts and the quotient is read off the Smith normal form.
    """
    edges = [(int(u), int(v)) for u, v in edges]
    E = len(edges)
    incident: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for k, (u, v) in enumerate(edges):
        incident[u].append((k, v))
        incident[v].append((k, u))
    for lst in incident.values():
        lst.sort()
    seen = [False] * num_vertices
    seen[0] = True
    tree: set[int] = set()
    queue = deque([0])
    reached = 1
    while queue:
        u = queue.popleft()
        for k, w in incident[u]:
            if not seen[w]:
                seen[w] = True
                reached += 1
                tree.add(k)
                queue.append(w)
    if reached != num_vertices:
        raise BadInputError("complex is disconnected")
    nontree = [k for k in range(E) if k not in tree]
    basis_index = {k: i for i, k in enumerate(nontree)}
    g = len(nontree)
    M = IntMatrix(len(walks), g)
    for row, walk in enumerate(walks):
        at = None
        counts: dict[int, int] = defaultdict(int)
        for signed in walk:
            k = abs(signed) - 1
            if not 0 <= k < E:
                raise BadInputError(f"walk {row} uses arc {signed} out of range")
            u, v = edges[k]
            src, dst = (u, v) if signed > 0 else (v, u)
            if at is None:
                start = src
            elif at != src:
                raise BadInputError(f"walk {row} is not a connected edge sequence")
            at = dst
            if k in basis_index:
                counts[basis_index[k]] += 1 if signed > 0 else -1
        if walk and at != start:
            raise BadInputError(f"walk {row} is not closed")
        for c, v in counts.items():
            M[row, c] = v
    factors = snf(M)
    return H1Result(betti=g - len(factors), torsion=[d for d in factors if d > 1])
