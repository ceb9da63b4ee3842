"""Shared construction helpers and independent brute-force oracles."""

from itertools import combinations

import numpy as np

from coarsebox import CayleyQuotient, from_permutations


def cycle_graph(n: int) -> CayleyQuotient:
    return from_permutations(
        1, [list(np.roll(np.arange(n), -1))], provenance=f"free:cycle({n})"
    )


def torus_graph(m: int) -> CayleyQuotient:
    pa = [((x + 1) % m) * m + y for x in range(m) for y in range(m)]
    pb = [x * m + (y + 1) % m for x in range(m) for y in range(m)]
    return from_permutations(2, [pa, pb], provenance=f"torus({m})")


def klein_four_graph() -> CayleyQuotient:
    return from_permutations(2, [[1, 0, 3, 2], [2, 3, 0, 1]], provenance="z2xz2")


def reduced_words_up_to(n_generators: int, max_len: int):
    """Every freely reduced word of length 1..max_len, as letter tuples."""
    letters = [s for i in range(1, n_generators + 1) for s in (i, -i)]
    frontier = [(x,) for x in letters]
    for _ in range(max_len):
        for w in frontier:
            yield w
        frontier = [w + (x,) for w in frontier for x in letters if x != -w[-1]]


def brute_force_girth(X: CayleyQuotient, max_len: int):
    """Minimum length of a reduced word closed at the basepoint, by direct
    enumeration; None if none exists up to max_len."""
    for w in reduced_words_up_to(X.n_generators, max_len):
        if X.evaluate(w) == X.basepoint:
            return len(w)
    return None


def brute_force_separating(X_shallow, X_deep, max_len: int):
    """Minimum length of a reduced word closed in the shallow quotient but
    open in the deep one."""
    for w in reduced_words_up_to(X_shallow.n_generators, max_len):
        if X_shallow.evaluate(w) == 0 and X_deep.evaluate(w) != 0:
            return len(w)
    return None


def minor_gcd_factors(dense) -> list:
    """Invariant factors from the greatest-common-divisor-of-minors formula:
    the product of the first j factors is the gcd of all j x j minors."""
    rows = len(dense)
    cols = len(dense[0]) if rows else 0

    def det(sub):
        if len(sub) == 1:
            return sub[0][0]
        total = 0
        for j in range(len(sub)):
            minor = [row[:j] + row[j + 1 :] for row in sub[1:]]
            total += (-1) ** j * sub[0][j] * det(minor)
        return total

    import math

    factors = []
    prev = 1
    for j in range(1, min(rows, cols) + 1):
        g = 0
        for rsel in combinations(range(rows), j):
            for csel in combinations(range(cols), j):
                sub = [[dense[r][c] for c in csel] for r in rsel]
                g = math.gcd(g, abs(det(sub)))
        if g == 0:
            break
        factors.append(g // prev)
        prev = g
    return factors


def generator_walk(X: CayleyQuotient, k: int) -> tuple:
    """Vertices visited following the first generator k times (negative k
    follows the inverse)."""
    pts = [X.basepoint]
    for _ in range(abs(k)):
        pts.append(X.step(pts[-1], 1 if k > 0 else -1))
    return tuple(pts)


def cycle_winding(X: CayleyQuotient, pts) -> int:
    """Winding number of a loop in a single-generator cycle graph, computed
    through the generator orbit so it is label-independent."""
    n = X.num_vertices
    pos = {X.basepoint: 0}
    v = X.basepoint
    for k in range(1, n):
        v = X.step(v, 1)
        pos[v] = k
    total = 0
    for a, b in zip(pts, pts[1:]):
        total += (pos[b] - pos[a] + n // 2) % n - n // 2
    assert total % n == 0
    return total // n
