"""Scale-r paths in quotient graphs, elementary deformations, constructive
deformation chains, and a bounded exhaustive classifier of based loops.

An r-path is a vertex sequence with consecutive distances at most r. Two
paths are r-close either by a tail-constant extension with equal values on
the common domain (case A) or by an equal-length pointwise perturbation of
size at most r (case B). Chains of such moves witness r-homotopy.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .cayley import CayleyQuotient, bfs_distances, _truncated_ball
from .config import DEFAULT_ORACLE_EDGE_BUDGET, DEFAULT_ORACLE_STATE_BUDGET
from .errors import BadInputError, BudgetExceededError, InternalConsistencyError
from .words import Word, check_alphabet, free_reduce


class Closeness(enum.Enum):
    CASE_A = "CaseA"
    CASE_B = "CaseB"
    NOT_CLOSE = "No"


def _dist_oracle(X: CayleyQuotient, r: int) -> "_BallCache":
    cache = getattr(X, "_ball_caches", None)
    if cache is None:
        cache = {}
        setattr(X, "_ball_caches", cache)
    if r not in cache:
        cache[r] = _BallCache(X, r)
    return cache[r]


class _BallCache:
    """Lazily cached balls of radius r around queried vertices."""

    def __init__(self, X: CayleyQuotient, r: int):
        self.X = X
        self.r = r
        self.balls: dict[int, dict[int, int]] = {}

    def ball(self, v: int) -> dict[int, int]:
        b = self.balls.get(v)
        if b is None:
            b = _truncated_ball(self.X, v, self.r)
            self.balls[v] = b
        return b

    def within(self, u: int, v: int) -> bool:
        return u == v or v in self.ball(u)


@dataclass(frozen=True)
class RPath:
    """r-Lipschitz vertex sequence in a quotient graph; length = steps."""

    graph: CayleyQuotient
    scale: int
    points: tuple[int, ...]
    _validated: bool = False

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(int(p) for p in self.points))
        if self.scale < 1:
            raise BadInputError("scale must be at least 1")
        if not self.points:
            raise BadInputError("a path needs at least one point")
        for p in self.points:
            if not 0 <= p < self.graph.num_vertices:
                raise BadInputError(f"vertex {p} out of range")
        if not self._validated:
            oracle = _dist_oracle(self.graph, self.scale)
            for i, (a, b) in enumerate(zip(self.points, self.points[1:])):
                if not oracle.within(a, b):
                    raise BadInputError(
                        f"step {i} from {a} to {b} exceeds scale {self.scale}"
                    )

    @property
    def length(self) -> int:
        return len(self.points) - 1

    def is_loop(self, basepoint: int = 0) -> bool:
        return self.points[0] == basepoint and self.points[-1] == basepoint


def word_path(X: CayleyQuotient, letters: Sequence[int], scale: int = 1, start: int = 0) -> RPath:
    """The 1-path spelled by a word; letter 0 means staying at a vertex."""
    pts = [start]
    for x in letters:
        if x != 0 and abs(x) > X.n_generators:
            raise BadInputError(f"letter {x} outside the alphabet")
        pts.append(pts[-1] if x == 0 else X.step(pts[-1], x))
    return RPath(X, scale, tuple(pts), _validated=True)


def is_r_close(p: RPath, q: RPath, r: int) -> Closeness:
    """Single-move relation between two paths at scale r."""
    if not (p.graph is q.graph or p.graph == q.graph):
        raise BadInputError("paths live in different graphs")
    if p.length == q.length:
        oracle = _dist_oracle(p.graph, r)
        if all(oracle.within(a, b) for a, b in zip(p.points, q.points)):
            return Closeness.CASE_B
        return Closeness.NOT_CLOSE
    short, long = (p, q) if p.length < q.length else (q, p)
    if long.points[: len(short.points)] != short.points:
        return Closeness.NOT_CLOSE
    tail_value = short.points[-1]
    if all(x == tail_value for x in long.points[len(short.points) :]):
        return Closeness.CASE_A
    return Closeness.NOT_CLOSE


def concat(p: RPath, q: RPath) -> RPath:
    """Concatenation; q starts where p ends so no point is duplicated."""
    if not (p.graph is q.graph or p.graph == q.graph):
        raise BadInputError("paths live in different graphs")
    if p.points[-1] != q.points[0]:
        raise BadInputError("paths are not composable: endpoint mismatch")
    return RPath(p.graph, max(p.scale, q.scale), p.points + q.points[1:], _validated=True)


@dataclass
class HomotopyChain:
    """A verified sequence of single r-moves between consecutive paths."""

    scale: int
    paths: list[RPath]
    cases: list[Closeness] = field(default_factory=list)
    open_path: bool = False

    def validate(self) -> None:
        if len(self.cases) != len(self.paths) - 1:
            raise InternalConsistencyError("chain has wrong number of links")
        for i, (a, b) in enumerate(zip(self.paths, self.paths[1:])):
            verdict = is_r_close(a, b, self.scale)
            if verdict is Closeness.NOT_CLOSE:
                raise InternalConsistencyError(f"chain link {i} is not an r-move")
            if verdict is not self.cases[i]:
                raise InternalConsistencyError(
                    f"chain link {i} recorded {self.cases[i].value} but checks as {verdict.value}"
                )
        if not self.open_path:
            base = self.paths[0].points[0]
            for i, path in enumerate(self.paths):
                if not path.is_loop(base):
                    raise InternalConsistencyError(f"chain path {i} is not a loop at {base}")

    def append(self, path: RPath, case: Closeness) -> None:
        self.paths.append(path)
        self.cases.append(case)

    @property
    def start(self) -> RPath:
        return self.paths[0]

    @property
    def end(self) -> RPath:
        return self.paths[-1]


def _chain_by_word_moves(
    X: CayleyQuotient,
    letters: list[int],
    r: int,
    start: int,
    open_path: bool,
    cancel_pairs: bool = True,
) -> tuple[HomotopyChain, list[int]]:
    """Shared engine: eliminate stays (and optionally cancelling pairs) one
    move at a time.

    A last-position stay is dropped (case A); an inner stay is commuted to
    the end (case B); a cancelling pair becomes two stays (case B).
    """
    chain = HomotopyChain(r, [word_path(X, letters, r, start)], open_path=open_path)
    w = list(letters)
    while True:
        if w and w[-1] == 0:
            w = w[:-1]
            chain.append(word_path(X, w, r, start), Closeness.CASE_A)
            continue
        zero = next((i for i, x in enumerate(w) if x == 0), None)
        if zero is not None:
            w = w[:zero] + w[zero + 1 :] + [0]
            chain.append(word_path(X, w, r, start), Closeness.CASE_B)
            continue
        if cancel_pairs:
            pair = next((i for i in range(len(w) - 1) if w[i] == -w[i + 1]), None)
            if pair is not None:
                w = w[:pair] + [0, 0] + w[pair + 2 :]
                chain.append(word_path(X, w, r, start), Closeness.CASE_B)
                continue
        break
    return chain, w


def witness_reduce(
    X: CayleyQuotient, letters: Sequence[int], r: int, start: int = 0
) -> HomotopyChain:
    """Chain from the path of a word (stays allowed) to the path of its
    freely reduced form; every link is machine-checked."""
    if r < 1:
        raise BadInputError("scale must be at least 1")
    letters = [int(x) for x in letters]
    open_path = X.evaluate(letters, start) != start
    chain, final = _chain_by_word_moves(X, letters, r, start, open_path)
    reduced = free_reduce(Word(tuple(x for x in letters if x != 0)))
    if tuple(final) != reduced.letters:
        raise InternalConsistencyError("move sequence did not reach the reduced word")
    chain.validate()
    return chain


def witness_jump(
    X: CayleyQuotient, u: Word, v: Word, w: Word, r: int, start: int = 0
) -> HomotopyChain:
    """Chain between the 1-paths of u*v*w and u*w, where v is a closed loop
    of length at most 2r inserted at the end of u, and u*w is closed."""
    if len(v) > 2 * r:
        raise BadInputError(f"inserted loop has length {len(v)} > 2r = {2 * r}")
    for word in (u, v, w):
        check_alphabet(word, X.n_generators)
    mid = X.evaluate(u.letters, start)
    if X.evaluate(v.letters, mid) != mid:
        raise BadInputError("the inserted word is not closed where it is inserted")
    if X.evaluate(u.letters + w.letters, start) != start:
        raise BadInputError("u*w is not a closed loop")
    full = list(u.letters + v.letters + w.letters)
    chain = HomotopyChain(r, [word_path(X, full, r, start)], open_path=False)
    if len(v) > 0:
        flattened = list(u.letters) + [0] * len(v) + list(w.letters)
        chain.append(word_path(X, flattened, r, start), Closeness.CASE_B)
        tail_chain, final = _chain_by_word_moves(
            X, flattened, r, start, open_path=False, cancel_pairs=False
        )
        for path, case in zip(tail_chain.paths[1:], tail_chain.cases):
            chain.append(path, case)
    else:
        final = full
    if tuple(final) != tuple(u.letters + w.letters):
        raise InternalConsistencyError("jump chain did not land on u*w")
    chain.validate()
    return chain


def _geodesic(X: CayleyQuotient, a: int, b: int) -> list[int]:
    """A shortest vertex path from a to b, canonical scan order."""
    if a == b:
        return [a]
    parent = {a: None}
    queue = deque([a])
    while queue:
        u = queue.popleft()
        for i in range(1, X.n_generators + 1):
            for letter in (i, -i):
                w = X.step(u, letter)
                if w not in parent:
                    parent[w] = u
                    if w == b:
                        path = [b]
                        while path[-1] != a:
                            path.append(parent[path[-1]])
                        return list(reversed(path))
                    queue.append(w)
    raise BadInputError("vertices lie in different components")


def to_one_path(p: RPath) -> tuple[RPath, HomotopyChain]:
    """A 1-path r-homotopic to p: each oversized step is expanded into a
    geodesic, padding first (case A) then swapping (case B)."""
    r = p.scale
    X = p.graph
    chain = HomotopyChain(r, [p], open_path=p.points[0] != p.points[-1])
    current = list(p.points)
    # fix steps from the last to the first so the suffix is always unit-speed
    for i in range(len(current) - 2, -1, -1):
        a, b = current[i], current[i + 1]
        geo = _geodesic(X, a, b)
        if len(geo) <= 2:
            continue
        pad = len(geo) - 2
        padded = current + [current[-1]] * pad
        chain.append(RPath(X, r, tuple(padded)), Closeness.CASE_A)
        swapped = current[: i + 1] + geo[1:-1] + current[i + 1 :]
        chain.append(RPath(X, r, tuple(swapped)), Closeness.CASE_B)
        current = swapped
    one = chain.paths[-1]
    chain.validate()
    return one, chain


@dataclass
class OracleReport:
    """Bounded classification of based loops: connected components of the
    single-move graph on loops padded to a common length.

    Same component proves r-homotopy; distinct components only mean no
    connection was found within the length budget, never non-homotopy.
    """

    scale: int
    max_len: int
    n_states: int
    n_edges: int
    class_count: int
    class_sizes: list[int]
    representatives: list[tuple[int, ...]]
    all_close_shortcut: bool
    state_budget: int
    edge_budget: int
    _state_index: dict[tuple[int, ...], int] = field(default_factory=dict, repr=False)
    _class_of: Optional[np.ndarray] = field(default=None, repr=False)

    def class_of_loop(self, points: Sequence[int]) -> int:
        pts = tuple(int(x) for x in points)
        if pts[0] != 0 or pts[-1] != 0:
            raise BadInputError("not a based loop")
        if len(pts) > self.max_len + 1:
            raise BadInputError("loop longer than the enumerated budget")
        padded = pts + (pts[-1],) * (self.max_len + 1 - len(pts))
        if self.all_close_shortcut:
            return 0
        idx = self._state_index.get(padded)
        if idx is None:
            raise BadInputError("loop is outside the enumerated state space")
        return int(self._class_of[idx])

    def verdict(self, p_points: Sequence[int], q_points: Sequence[int]) -> str:
        return (
            "SameClass"
            if self.class_of_loop(p_points) == self.class_of_loop(q_points)
            else "NotWithinBudget"
        )

    def to_json_dict(self) -> dict:
        return {
            "scale": self.scale,
            "max_len": self.max_len,
            "states": self.n_states,
            "move_edges": self.n_edges,
            "class_count": self.class_count,
            "class_sizes": self.class_sizes,
            "representatives": [list(rep) for rep in self.representatives],
            "all_close_shortcut": self.all_close_shortcut,
            "state_budget": self.state_budget,
            "edge_budget": self.edge_budget,
        }


def _enumerate_loop_states(
    X: CayleyQuotient, r: int, max_len: int, dist: np.ndarray, budget: int
) -> list[tuple[int, ...]]:
    """All r-walks of length max_len from the basepoint back to itself, in
    lexicographic order."""
    base = X.basepoint
    balls = [np.flatnonzero(dist[v] <= r) for v in range(X.num_vertices)]
    states: list[tuple[int, ...]] = []
    stack: list[int] = [base]

    def rec():
        i = len(stack) - 1
        if i == max_len:
            if stack[-1] == base:
                states.append(tuple(stack))
                if len(states) > budget:
                    raise BudgetExceededError(
                        f"at least {budget + 1} loop states at length {max_len}, "
                        f"scale {r}: over the {budget} state budget"
                    )
            return
        remaining = max_len - i - 1
        for v in balls[stack[-1]]:
            if dist[v][base] <= r * remaining:
                stack.append(int(v))
                rec()
                stack.pop()

    rec()
    return states


class _UnionFind:
    """Union-find kept fully compressed so parent entries are always roots."""

    def __init__(self, n: int):
        self.parent = np.arange(n)

    def compress(self) -> np.ndarray:
        p = self.parent
        while True:
            q = p[p]
            if np.array_equal(q, p):
                break
            p = q
        self.parent = p
        return p

    def union_min(self, labels: np.ndarray) -> None:
        roots = np.unique(self.parent[labels])
        if roots.size <= 1:
            return
        self.parent[roots] = roots.min()
        # one pass restores full compression: chains have depth at most 2
        self.parent = self.parent[self.parent]


def classify_loops(
    X: CayleyQuotient,
    r: int,
    max_len: int,
    state_budget: int = DEFAULT_ORACLE_STATE_BUDGET,
    edge_budget: int = DEFAULT_ORACLE_EDGE_BUDGET,
) -> OracleReport:
    """Partition based loops of length <= max_len into move-graph components.

    Loops are padded to length max_len by tail-constant extension, which
    absorbs all case-A moves; edges are equal-length pointwise moves. When
    the graph diameter is at most r every pair of states is one move apart,
    so a single class is returned without enumerating the quadratic edge
    set.
    """
    if r < 1 or max_len < 1:
        raise BadInputError("need r >= 1 and max_len >= 1")
    V = X.num_vertices
    if V > 5000:
        raise BudgetExceededError(f"loop oracle needs a full distance table; {V} vertices is too many")
    dist = np.stack([bfs_distances(X, v) for v in range(V)])
    states = _enumerate_loop_states(X, r, max_len, dist, state_budget)
    n_states = len(states)
    diam = int(dist.max())
    if diam <= r:
        rep = states[0] if states else (X.basepoint,) * (max_len + 1)
        return OracleReport(
            scale=r,
            max_len=max_len,
            n_states=n_states,
            n_edges=0,
            class_count=1,
            class_sizes=[n_states],
            representatives=[rep],
            all_close_shortcut=True,
            state_budget=state_budget,
            edge_budget=edge_budget,
        )
    arr = np.array(states, dtype=np.int32)
    close_v = dist <= r
    uf = _UnionFind(n_states)
    n_edges = 0
    block = max(1, min(512, n_states))
    for lo in range(0, n_states, block):
        hi = min(lo + block, n_states)
        mask = np.ones((hi - lo, n_states), dtype=bool)
        for k in range(max_len + 1):
            mask &= close_v[arr[lo:hi, k][:, None], arr[:, k][None, :]]
        for row in range(hi - lo):
            i = lo + row
            js = np.flatnonzero(mask[row][i + 1 :]) + i + 1
            n_edges += js.size
            if n_edges > edge_budget:
                raise BudgetExceededError(
                    f"move-graph edges exceed budget {edge_budget} at state {i}"
                )
            if js.size:
                uf.union_min(np.concatenate(([i], js)))
    comp = uf.compress()
    roots, class_of = np.unique(comp, return_inverse=True)
    class_sizes = np.bincount(class_of).tolist()
    # a class root is the minimal state index, hence the lexicographic minimum
    representatives = [states[int(root)] for root in roots]
    report = OracleReport(
        scale=r,
        max_len=max_len,
        n_states=n_states,
        n_edges=int(n_edges),
        class_count=int(roots.size),
        class_sizes=class_sizes,
        representatives=representatives,
        all_close_shortcut=False,
        state_budget=state_budget,
        edge_budget=edge_budget,
        _state_index={s: i for i, s in enumerate(states)},
        _class_of=class_of,
    )
    return report
