"""Filtration towers of free groups and their exact rank invariants.

Ranks along every tower here take the closed form a*b^e + 1, so they are
stored symbolically (coefficient, base, exponent, offset) and never
materialized unless small. All index and rank arithmetic is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Optional

from .cayley import (
    CayleyQuotient,
    b1_graph,
    bouquet,
    from_matrices_sl2,
    voltage_cover,
)
from .config import DEFAULT_VERTEX_BUDGET
from .errors import BadInputError, BudgetExceededError, InternalConsistencyError

# ranks whose plain-integer form would exceed this many bits stay symbolic
MATERIALIZE_BIT_LIMIT = 4096
# exponent bookkeeping gives up past this size instead of building huge ints
EXPONENT_BIT_LIMIT = 1 << 22


def _factorize(n: int) -> dict[int, int]:
    if n <= 0:
        raise BadInputError("can only factor positive integers")
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


@dataclass(frozen=True)
class SymbolicRank:
    """Exact integer of the form coeff * base^exponent + offset, normalized so
    that the base does not divide the coefficient."""

    coeff: int
    base: int
    exponent: int
    offset: int = 1

    def __post_init__(self):
        if self.base < 2:
            raise BadInputError("base must be at least 2")
        if self.coeff == 0:
            raise BadInputError("coefficient must be nonzero")
        if self.exponent < 0:
            raise BadInputError("exponent must be nonnegative")
        coeff, exponent = self.coeff, self.exponent
        while coeff % self.base == 0:
            coeff //= self.base
            exponent += 1
        object.__setattr__(self, "coeff", coeff)
        object.__setattr__(self, "exponent", exponent)

    def bit_estimate(self) -> float:
        return self.exponent * math.log2(self.base) + abs(self.coeff).bit_length()

    def materialize(self, max_bits: int = MATERIALIZE_BIT_LIMIT) -> Optional[int]:
        """The exact integer value, or None when it exceeds max_bits bits."""
        if self.bit_estimate() > max_bits:
            return None
        return self.coeff * self.base**self.exponent + self.offset

    def _power_factors(self) -> dict[int, int]:
        """Prime factorization of coeff * base^exponent (offset excluded)."""
        out = _factorize(abs(self.coeff))
        for p, k in _factorize(self.base).items():
            out[p] = out.get(p, 0) + k * self.exponent
        return out

    def equals(self, other: "SymbolicRank") -> bool:
        """Exact value equality, decided without materializing huge powers."""
        if self.offset == other.offset:
            if (self.base, self.coeff, self.offset) == (other.base, other.coeff, other.offset):
                return self.exponent == other.exponent
            if (self.coeff > 0) != (other.coeff > 0):
                return False
            return self._power_factors() == other._power_factors()
        a, b = self.materialize(), other.materialize()
        if a is None or b is None:
            raise BadInputError("cannot decide equality of huge values with unequal offsets")
        return a == b

    def __str__(self) -> str:
        small = self.materialize(64)
        if small is not None:
            return str(small)
        sign = "+" if self.offset >= 0 else "-"
        tail = f" {sign} {abs(self.offset)}" if self.offset else ""
        return f"{self.coeff}*{self.base}^{self.exponent}{tail}"

    def to_json_dict(self) -> dict:
        return {
            "coeff": self.coeff,
            "base": self.base,
            "exponent": self.exponent,
            "offset": self.offset,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "SymbolicRank":
        return cls(int(d["coeff"]), int(d["base"]), int(d["exponent"]), int(d["offset"]))


def _power_greater(coeff_a: int, delta_exp: int, base: int, coeff_b: int) -> bool:
    """Whether coeff_a * base^delta_exp > coeff_b, without huge powers."""
    if delta_exp > coeff_b.bit_length() + coeff_a.bit_length() + 2:
        return True
    return coeff_a * base**delta_exp > coeff_b


@dataclass
class TowerLevel:
    index: object  # int or SymbolicRank
    rank: SymbolicRank
    exponent: int
    graph: Optional[CayleyQuotient] = None
    provenance: str = ""
    b1: Optional[int] = None

    @property
    def materialized(self) -> bool:
        return self.graph is not None

    def index_symbolic(self, base: int) -> SymbolicRank:
        if isinstance(self.index, SymbolicRank):
            return self.index
        return SymbolicRank(self.index, base, 0, 0)

    def index_int(self) -> Optional[int]:
        if isinstance(self.index, int):
            return self.index
        return self.index.materialize()


@dataclass
class Tower:
    """A filtration: nested normal finite-index subgroups with exact indices
    and symbolic ranks, optionally with materialized quotient graphs."""

    label: str
    free_rank: Optional[int]  # rank of the ambient free group, None if not free
    rank_base: int
    rank_coeff: int
    exponent_form: tuple  # ("affine", step, start) or ("listed",)
    levels: list[TowerLevel] = field(default_factory=list)

    @property
    def is_free(self) -> bool:
        return self.free_rank is not None

    def exponents(self) -> list[int]:
        return [lv.exponent for lv in self.levels]

    def exponent_at(self, i: int) -> Optional[int]:
        """Rank exponent at 1-based level i, extending affine forms freely."""
        if self.exponent_form[0] == "affine":
            _, step, start = self.exponent_form
            return step * i + start
        if 1 <= i <= len(self.levels):
            return self.levels[i - 1].exponent
        return None

    def first_level(self) -> int:
        if self.exponent_form[0] == "affine" and self.levels:
            _, step, start = self.exponent_form
            return (self.levels[0].exponent - start) // step
        return 1

    def validate(self) -> None:
        """Indices strictly increase and divide, and every materialized graph
        agrees with the closed forms: three independent computations."""
        prev: Optional[SymbolicRank] = None
        for lv in self.levels:
            idx = lv.index_symbolic(self.rank_base)
            if prev is not None:
                delta = idx.exponent - prev.exponent
                if delta < 0 or not _power_greater(idx.coeff, delta, idx.base, prev.coeff):
                    raise InternalConsistencyError("tower indices do not strictly increase")
                if (idx.coeff * pow(idx.base, delta, abs(prev.coeff))) % prev.coeff != 0:
                    raise InternalConsistencyError("tower indices do not divide")
            prev = idx
            if lv.graph is not None:
                index_value = lv.index_int()
                if index_value is None or lv.graph.num_vertices != index_value:
                    raise InternalConsistencyError(
                        f"materialized vertex count {lv.graph.num_vertices} != index {lv.index}"
                    )
                if self.is_free:
                    expected = nielsen_schreier(index_value, self.free_rank)
                    got = b1_graph(lv.graph)
                    rank_value = lv.rank.materialize()
                    if got != expected or rank_value != expected:
                        raise InternalConsistencyError(
                            f"graph b1 {got}, formula {expected}, stored rank {rank_value} disagree"
                        )

    def to_json_dict(self, graph_files: Optional[list] = None) -> dict:
        levels = []
        for i, lv in enumerate(self.levels):
            idx = lv.index if isinstance(lv.index, int) else lv.index.to_json_dict()
            levels.append(
                {
                    "index": idx,
                    "rank": lv.rank.to_json_dict(),
                    "exponent": lv.exponent,
                    "materialized": lv.materialized,
                    "graph_file": None if graph_files is None else graph_files[i],
                    "provenance": lv.provenance,
                    "b1": lv.b1,
                }
            )
        return {
            "label": self.label,
            "free_rank": self.free_rank,
            "rank_base": self.rank_base,
            "rank_coeff": self.rank_coeff,
            "exponent_form": list(self.exponent_form),
            "levels": levels,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "Tower":
        levels = []
        for lv in d["levels"]:
            idx = lv["index"]
            index = idx if isinstance(idx, int) else SymbolicRank.from_json_dict(idx)
            levels.append(
                TowerLevel(
                    index=index,
                    rank=SymbolicRank.from_json_dict(lv["rank"]),
                    exponent=int(lv["exponent"]),
                    provenance=lv.get("provenance", ""),
                    b1=lv.get("b1"),
                )
            )
        return cls(
            label=d["label"],
            free_rank=d["free_rank"],
            rank_base=int(d["rank_base"]),
            rank_coeff=int(d["rank_coeff"]),
            exponent_form=tuple(d["exponent_form"]),
            levels=levels,
        )


def nielsen_schreier(index: int, n: int) -> int:
    """Rank of a subgroup of the given index in the free group of rank n."""
    if index < 1 or n < 2:
        raise BadInputError("need index >= 1 and free rank >= 2")
    return (n - 1) * index + 1


def congruence_tower_sl2(
    family: str, depth: int, vertex_budget: int = DEFAULT_VERTEX_BUDGET
) -> Tower:
    """Kernels of F2 -> SL2(Z/4^i) (family N, index 2^(6i-4)) or of
    F2 -> SL2(Z/2^(2i+1)) (family M, index 2^(6i-1)), with quotient graphs
    materialized while within budget and checked against the formulas."""
    if family not in ("N", "M"):
        raise BadInputError("family must be 'N' or 'M'")
    if depth < 1:
        raise BadInputError("depth must be at least 1")
    start = -4 if family == "N" else -1
    tower = Tower(
        label=f"F2 congruence tower, family {family}",
        free_rank=2,
        rank_base=2,
        rank_coeff=1,
        exponent_form=("affine", 6, start),
    )
    for i in range(1, depth + 1):
        e = 6 * i + start
        modulus = 4**i if family == "N" else 2 ** (2 * i + 1)
        index = 2**e
        rank = SymbolicRank(1, 2, e, 1)
        graph = None
        b1 = None
        if index <= vertex_budget:
            graph = from_matrices_sl2(modulus, vertex_budget=vertex_budget)
            if graph.num_vertices != index:
                raise InternalConsistencyError(
                    f"level {i}: materialized {graph.num_vertices} vertices, formula gives {index}"
                )
            b1 = b1_graph(graph)
            if b1 != index + 1:
                raise InternalConsistencyError(
                    f"level {i}: graph b1 {b1} != index + 1 = {index + 1}"
                )
        tower.levels.append(
            TowerLevel(
                index=index,
                rank=rank,
                exponent=e,
                graph=graph,
                provenance=f"sl2(modulus={modulus})",
                b1=b1,
            )
        )
    tower.validate()
    return tower


def homology_tower(
    n: int, m: int, depth: int, vertex_budget: int = DEFAULT_VERTEX_BUDGET
) -> Tower:
    """Iterated mod-m homology filtration of the free group of rank n:
    each level is the voltage cover of the previous one, and its rank is
    recomputed independently from the recurrence m^(sum of previous ranks)
    times (n-1) plus 1. The two must agree wherever a graph exists."""
    if n < 2 or m < 2:
        raise BadInputError("need free rank n >= 2 and exponent m >= 2")
    if depth < 1:
        raise BadInputError("depth must be at least 1")
    tower = Tower(
        label=f"F{n} mod-{m} homology tower",
        free_rank=n,
        rank_base=m,
        rank_coeff=n - 1,
        exponent_form=("listed",),
    )
    e = 0  # sum of ranks of all previous levels
    graph: Optional[CayleyQuotient] = bouquet(n)
    for i in range(1, depth + 1):
        rank = SymbolicRank(n - 1, m, e, 1)
        if e * math.log2(m) <= MATERIALIZE_BIT_LIMIT:
            index: object = m**e
        else:
            index = SymbolicRank(1, m, e, 0)
        b1 = None
        if graph is not None:
            idx_int = index if isinstance(index, int) else None
            if idx_int is None or graph.num_vertices != idx_int:
                raise InternalConsistencyError(
                    f"level {i}: cover has {graph.num_vertices} vertices, recurrence gives {index}"
                )
            b1 = b1_graph(graph)
            if b1 != rank.materialize():
                raise InternalConsistencyError(
                    f"level {i}: graph b1 {b1} disagrees with recurrence rank {rank}"
                )
        tower.levels.append(
            TowerLevel(
                index=index,
                rank=rank,
                exponent=e,
                graph=graph,
                provenance="" if graph is None else graph.provenance,
                b1=b1,
            )
        )
        if i == depth:
            break
        if rank.bit_estimate() > EXPONENT_BIT_LIMIT:
            raise BudgetExceededError(
                f"level {i + 1} exponent needs the level-{i} rank as a plain integer "
                f"(~2^{rank.exponent} bits); reduce depth"
            )
        e += rank.materialize(EXPONENT_BIT_LIMIT)
        if graph is not None:
            try:
                graph, _ = voltage_cover(graph, m, vertex_budget=vertex_budget)
            except BudgetExceededError:
                graph = None
    tower.validate()
    return tower


class PrimeCheck(NamedTuple):
    q: int
    one_mod_20: bool


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1 if d == 2 else 2
    return True


def ramanujan_prime_search(limit: int) -> list[PrimeCheck]:
    """Odd primes q <= limit such that -1 is a square among units mod q and
    5 is a square among units mod 2q, by direct enumeration of squares.
    Each hit is tagged with the sufficient congruence q = 1 mod 20."""
    if limit < 3:
        return []
    hits = []
    for q in range(3, limit + 1, 2):
        if not _is_prime(q):
            continue
        unit_squares_q = {x * x % q for x in range(1, q)}
        if (q - 1) % q not in unit_squares_q:
            continue
        if math.gcd(5, 2 * q) != 1:
            continue
        unit_squares_2q = {
            x * x % (2 * q) for x in range(1, 2 * q) if math.gcd(x, 2 * q) == 1
        }
        if 5 % (2 * q) not in unit_squares_2q:
            continue
        hits.append(PrimeCheck(q, q % 20 == 1))
    return hits


def ramanujan_rank(q: int, i: int) -> SymbolicRank:
    """Rank of the i-th level of the PSL2(q^i) filtration of F3:
    (q^2 - 1) * q^(3i - 2) + 1."""
    if not _is_prime(q) or q == 2:
        raise BadInputError("q must be an odd prime")
    if i < 1:
        raise BadInputError("level must be at least 1")
    return SymbolicRank(q * q - 1, q, 3 * i - 2, 1)


def induced_filtration_rank(q: int, i: int) -> SymbolicRank:
    """Rank of the intersection of the i-th filtration level with the mod-q
    homology cover subgroup of level three: (q^2-1) * q^((q^2-1)q^7 - 4 + 3i) + 1.
    The exponent is exact; the value itself is never materialized."""
    if not _is_prime(q) or q == 2:
        raise BadInputError("q must be an odd prime")
    if i < 4:
        raise BadInputError("the induced filtration starts at level 4")
    exponent = (q * q - 1) * q**7 - 4 + 3 * i
    return SymbolicRank(q * q - 1, q, exponent, 1)


def psl2_tower(q: int, depth: int) -> Tower:
    """Symbolic PSL2(q^i) filtration of F3: indices q^(3i-2)(q^2-1)/2,
    ranks (q^2-1)q^(3i-2)+1. No graphs: the generators are not constructed."""
    if not _is_prime(q) or q == 2:
        raise BadInputError("q must be an odd prime")
    tower = Tower(
        label=f"F3 PSL2({q}^i) tower",
        free_rank=3,
        rank_base=q,
        rank_coeff=q * q - 1,
        exponent_form=("affine", 3, -2),
    )
    half = (q * q - 1) // 2
    for i in range(1, depth + 1):
        e = 3 * i - 2
        tower.levels.append(
            TowerLevel(
                index=SymbolicRank(half, q, e, 0),
                rank=ramanujan_rank(q, i),
                exponent=e,
                provenance=f"PSL2({q}^{i}) (symbolic)",
            )
        )
    tower.validate()
    return tower


def induced_filtration_tower(q: int, depth: int) -> Tower:
    """Symbolic tower of intersections with the mod-q homology cover subgroup,
    levels 4, 5, ... within the cover subgroup (free of rank
    2*index+1 over F3 by the rank formula)."""
    if not _is_prime(q) or q == 2:
        raise BadInputError("q must be an odd prime")
    base_exp = (q * q - 1) * q**7 - 4
    tower = Tower(
        label=f"induced filtration on the mod-{q} homology cover subgroup",
        free_rank=3,
        rank_base=q,
        rank_coeff=q * q - 1,
        exponent_form=("affine", 3, base_exp),
    )
    half = (q * q - 1) // 2
    for i in range(4, 4 + depth):
        e = base_exp + 3 * i
        tower.levels.append(
            TowerLevel(
                index=SymbolicRank(half, q, e, 0),
                rank=induced_filtration_rank(q, i),
                exponent=e,
                provenance=f"level {i} intersection (symbolic)",
            )
        )
    tower.validate()
    return tower


def _level_ratio(tower: Tower, lv: TowerLevel, drop_offset: bool) -> Fraction:
    """(rank - 1) / index, or rank / index, as an exact rational."""
    idx = lv.index_symbolic(tower.rank_base)
    if idx.offset != 0:
        raise BadInputError("index must be a pure power term")
    if drop_offset:
        delta = lv.rank.exponent - idx.exponent
        if delta >= 0:
            num = lv.rank.coeff * lv.rank.base**delta
            return Fraction(num, idx.coeff)
        return Fraction(lv.rank.coeff, idx.coeff * idx.base**-delta)
    rank_value = lv.rank.materialize()
    index_value = idx.materialize()
    if rank_value is None or index_value is None:
        raise BudgetExceededError("ratio with offset needs materializable values")
    return Fraction(rank_value, index_value)


def rank_gradient(T: Tower) -> tuple[list[Fraction], Fraction]:
    """The sequence (rank - 1)/index, asserted non-increasing, and its final
    value, the best available bound on the infimum."""
    if not T.levels:
        raise BadInputError("empty tower")
    seq = [_level_ratio(T, lv, drop_offset=True) for lv in T.levels]
    for a, b in zip(seq, seq[1:]):
        if b > a:
            raise InternalConsistencyError(
                f"rank gradient sequence increases: {a} -> {b}"
            )
    return seq, seq[-1]


def betti_ratio_sequence(T: Tower) -> list[Fraction]:
    """b1(level)/index per level; for free towers b1 is the rank, otherwise a
    materialized first Betti number is required on every level."""
    out = []
    for i, lv in enumerate(T.levels, start=1):
        if T.is_free:
            out.append(_level_ratio(T, lv, drop_offset=False))
        else:
            if lv.b1 is None:
                raise BadInputError(f"level {i}: b1 unavailable for a non-free tower")
            idx = lv.index_int()
            if idx is None:
                raise BudgetExceededError(f"level {i}: index too large to materialize")
            out.append(Fraction(lv.b1, idx))
    return out


@dataclass
class CoprimeVerdict:
    obstructed: bool
    witness_prime: Optional[int]
    detail: str


def coprime_obstruction(n: int, m: int) -> CoprimeVerdict:
    """Whether rank equality (n-1)^a + 1 = index*(m-1) + 1 is impossible for
    every positive index: positive verdicts require m-1 coprime to n-1, and
    the witness is a prime of m-1 dividing no power of n-1."""
    if n < 3 or m < 2:
        raise BadInputError("need n >= 3 and m >= 2")
    if m - 1 == 1:
        return CoprimeVerdict(False, None, "m - 1 = 1 divides every power")
    if math.gcd(n - 1, m - 1) != 1:
        return CoprimeVerdict(
            False, None, f"gcd(n-1, m-1) = {math.gcd(n - 1, m - 1)} > 1; no obstruction claimed"
        )
    witness = min(_factorize(m - 1))
    return CoprimeVerdict(
        True,
        witness,
        f"every power of n-1 = {n - 1} is coprime to {witness}, "
        f"so (n-1)^a is never divisible by m-1 = {m - 1}",
    )


@dataclass
class ExponentCongruenceCertificate:
    """Machine-checkable residue obstruction between the induced filtration
    exponents (q^2-1)q^7 - 4 + 3i and the congruence-side exponents 3j - 2:
    equality forces 3 to divide (q^2-1)q^7 - 2."""

    q: int
    induced_residue: int
    congruence_residue: int
    required_multiple: int
    divisible_by_3: bool
    contradiction: bool

    def to_json_dict(self) -> dict:
        return {
            "q": self.q,
            "induced_exponent_mod_3": self.induced_residue,
            "congruence_exponent_mod_3": self.congruence_residue,
            "required_multiple_of_3": self.required_multiple,
            "divisible_by_3": self.divisible_by_3,
            "contradiction": self.contradiction,
        }


def exponent_congruence_certificate(q: int) -> ExponentCongruenceCertificate:
    if not _is_prime(q) or q == 2:
        raise BadInputError("q must be an odd prime")
    required = (q * q - 1) * q**7 - 2
    induced_residue = ((q * q - 1) * q**7 - 4) % 3  # adding 3i never changes it
    congruence_residue = (-2) % 3  # 3j - 2 mod 3
    divisible = required % 3 == 0
    return ExponentCongruenceCertificate(
        q=q,
        induced_residue=induced_residue,
        congruence_residue=congruence_residue,
        required_multiple=required,
        divisible_by_3=divisible,
        contradiction=not divisible,
    )
