"""Box spaces assembled on a line, and the rank-invariant obstruction to
coarse equivalence between filtration towers.

A coarse equivalence of box spaces forces a cofinite matching of levels
with isomorphic subgroups; for free towers the subgroups are free, so rank
equality is a complete isomorphism invariant. Proving that only finitely
many level pairs share a rank therefore refutes coarse equivalence. The
converse direction is never claimed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .cayley import CayleyQuotient, bfs_distances, diameter
from .errors import BadInputError
from .towers import Tower, _factorize


@dataclass
class BoxSpace:
    """Components placed on a line so that consecutive gaps equal the sum of
    the two diameters; distances between components route through basepoint
    anchors."""

    components: list[CayleyQuotient]
    offsets: list[int]
    diameters: list[int]

    def to_json_dict(self) -> dict:
        return {
            "components": [c.provenance for c in self.components],
            "offsets": list(self.offsets),
            "diameters": list(self.diameters),
        }


def assemble(components: list[CayleyQuotient]) -> BoxSpace:
    if not components:
        raise BadInputError("a box space needs at least one component")
    diameters = [diameter(c) for c in components]
    offsets = [0]
    for i in range(1, len(components)):
        offsets.append(offsets[-1] + diameters[i - 1] + diameters[i])
    return BoxSpace(list(components), offsets, diameters)


def distance(B: BoxSpace, a: tuple[int, int], b: tuple[int, int]) -> int:
    """Metric of the box space: graph distance inside a component; between
    components, distance to the basepoint anchor plus the offset gap plus
    distance from the other anchor. Symmetric, and the restriction to one
    component is exactly its graph metric."""
    (i, u), (j, v) = a, b
    for comp, vertex in ((i, u), (j, v)):
        if not 0 <= comp < len(B.components):
            raise BadInputError(f"component {comp} out of range")
        if not 0 <= vertex < B.components[comp].num_vertices:
            raise BadInputError(f"vertex {vertex} out of range in component {comp}")
    if i == j:
        return int(bfs_distances(B.components[i], u)[v])
    du = int(bfs_distances(B.components[i], u)[B.components[i].basepoint])
    dv = int(bfs_distances(B.components[j], v)[B.components[j].basepoint])
    return du + abs(B.offsets[i] - B.offsets[j]) + dv


@dataclass
class ObstructionProof:
    """Machine-checkable reason only finitely many level pairs can share a
    rank. kind 'congruence': the affine exponent progressions are never
    congruent. kind 'valuation': a prime valuation pins one side to at most
    finitely many candidate levels, all enumerated."""

    kind: str
    bound: int
    matches: list[tuple[int, int]]
    modulus: Optional[int] = None
    residues: Optional[tuple[int, int]] = None
    prime: Optional[int] = None
    detail: str = ""

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "bound": self.bound,
            "matches": [list(m) for m in self.matches],
            "modulus": self.modulus,
            "residues": list(self.residues) if self.residues else None,
            "prime": self.prime,
            "detail": self.detail,
        }


@dataclass
class CompareVerdict:
    verdict: str  # "NotCoarselyEquivalent" | "Inconclusive"
    witness: str
    proof: Optional[ObstructionProof] = None

    def to_json_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "witness": self.witness,
            "proof": None if self.proof is None else self.proof.to_json_dict(),
        }


def _require_comparable(T: Tower) -> None:
    if not T.is_free:
        raise BadInputError(
            "unsupported comparison: non-free tower without materialized torsion data"
        )
    for lv in T.levels:
        if lv.rank.offset != 1:
            raise BadInputError("tower ranks must be normalized a*b^e + 1 forms")


def _affine(T: Tower) -> Optional[tuple[int, int]]:
    if T.exponent_form[0] == "affine":
        return T.exponent_form[1], T.exponent_form[2]
    return None


def _levels_with_exponent(T: Tower, e: int) -> list[int]:
    """1-based levels whose rank exponent equals e; exact for affine forms,
    and complete for listed forms because exponents strictly increase."""
    aff = _affine(T)
    if aff is not None:
        step, start = aff
        if (e - start) % step != 0:
            return []
        i = (e - start) // step
        return [i] if i >= T.first_level() else []
    return [i + 1 for i, lv in enumerate(T.levels) if lv.exponent == e]


def _exponent_exceeded(T: Tower, e: int) -> bool:
    """Whether every level beyond those listed has exponent > e."""
    if _affine(T) is not None:
        return True
    return bool(T.levels) and T.levels[-1].exponent > e


def compare_towers(T1: Tower, T2: Tower) -> CompareVerdict:
    """NotCoarselyEquivalent when provably only finitely many (i, j) satisfy
    rank(T1, i) = rank(T2, j); otherwise Inconclusive. Matching ranks prove
    nothing, so no verdict ever claims equivalence."""
    _require_comparable(T1)
    _require_comparable(T2)
    a1, b1 = T1.rank_coeff, T1.rank_base
    a2, b2 = T2.rank_coeff, T2.rank_base
    if (a1, b1) == (a2, b2):
        aff1, aff2 = _affine(T1), _affine(T2)
        if aff1 is not None and aff2 is not None:
            s1, t1 = aff1
            s2, t2 = aff2
            g = math.gcd(s1, s2)
            if (t2 - t1) % g != 0:
                proof = ObstructionProof(
                    kind="congruence",
                    bound=0,
                    matches=[],
                    modulus=g,
                    residues=(t1 % g, t2 % g),
                    detail=(
                        f"rank equality forces {s1}i{t1:+d} = {s2}j{t2:+d}, impossible "
                        f"mod {g}: residues {t1 % g} vs {t2 % g}"
                    ),
                )
                return CompareVerdict(
                    "NotCoarselyEquivalent",
                    f"exponent congruence obstruction mod {g}: "
                    f"{s1}i{t1:+d} is {t1 % g} while {s2}j{t2:+d} is {t2 % g}",
                    proof,
                )
            return CompareVerdict(
                "Inconclusive",
                "identical rank forms with compatible exponent progressions obstruct nothing",
            )
        if T1.exponents() and T1.exponents() == T2.exponents():
            return CompareVerdict(
                "Inconclusive", "identical rank sequences obstruct nothing"
            )
        return CompareVerdict(
            "Inconclusive",
            "same-base towers without affine exponent structure cannot be separated",
        )
    if b1 == b2:
        # normalized coefficients differ: a*b^e + 1 = a'*b^e' + 1 never holds
        proof = ObstructionProof(
            kind="valuation",
            bound=0,
            matches=[],
            prime=None,
            detail=(
                f"normalized forms {a1}*{b1}^e + 1 and {a2}*{b2}^e' + 1 with "
                f"{b1} dividing neither coefficient can never be equal"
            ),
        )
        return CompareVerdict(
            "NotCoarselyEquivalent",
            f"normalization obstruction: coefficients {a1} != {a2} over base {b1}",
            proof,
        )
    # different bases: pin one side by a prime valuation
    for (ta, tb, flip) in ((T1, T2, False), (T2, T1, True)):
        fa = _factorize(ta.rank_base)
        fb = _factorize(tb.rank_base)
        primes = [p for p in fa if p not in fb]
        if not primes:
            continue
        p = min(primes)
        vp_base = fa[p]
        vp_a = _factorize(ta.rank_coeff).get(p, 0) if ta.rank_coeff > 1 else 0
        vp_other = _factorize(tb.rank_coeff).get(p, 0) if tb.rank_coeff > 1 else 0
        # v_p(rank - 1): vp_a + e * vp_base on one side, constant vp_other on the other
        if (vp_other - vp_a) % vp_base != 0 or vp_other < vp_a:
            target_exponents: list[int] = []
        else:
            target_exponents = [(vp_other - vp_a) // vp_base]
        matches: list[tuple[int, int]] = []
        bound = 0
        ok = True
        for e_star in target_exponents:
            if not _exponent_exceeded(ta, e_star):
                ok = False
                break
            for i in _levels_with_exponent(ta, e_star):
                value = ta.rank_coeff * ta.rank_base**e_star  # small by construction
                # solve coeff' * base'^f = value exactly
                rem, f = value, 0
                if rem % tb.rank_coeff == 0:
                    rem //= tb.rank_coeff
                    while rem % tb.rank_base == 0:
                        rem //= tb.rank_base
                        f += 1
                    if rem == 1:
                        for j in _levels_with_exponent(tb, f):
                            pair = (j, i) if flip else (i, j)
                            matches.append(pair)
                            bound = max(bound, i, j)
                if not _exponent_exceeded(tb, f):
                    ok = False
        if not ok:
            continue
        proof = ObstructionProof(
            kind="valuation",
            bound=bound,
            matches=sorted(matches),
            prime=p,
            detail=(
                f"{p}-adic valuation of rank-1 grows with the level on the base-"
                f"{ta.rank_base} side but is constant {vp_other} on the base-"
                f"{tb.rank_base} side, pinning candidates to exponent(s) {target_exponents}"
            ),
        )
        return CompareVerdict(
            "NotCoarselyEquivalent",
            f"{p}-adic valuation obstruction: at most {len(matches)} level pair(s) "
            f"can share a rank, but a coarse equivalence needs cofinitely many",
            proof,
        )
    return CompareVerdict(
        "Inconclusive",
        "bases share every prime; no valuation obstruction applies",
    )


def validate_obstruction(T1: Tower, T2: Tower, proof: ObstructionProof, sample: int = 1000) -> bool:
    """Re-validate a finiteness proof: no rank matches beyond the bound among
    sampled level pairs. Affine towers are sampled across the full range;
    listed towers across their recorded levels (exponents strictly increase
    beyond them)."""

    def exponents_upto(T: Tower, n: int) -> list[tuple[int, int]]:
        aff = _affine(T)
        if aff is not None:
            step, start = aff
            lo = T.first_level()
            return [(i, step * i + start) for i in range(lo, n + 1)]
        return [(i + 1, lv.exponent) for i, lv in enumerate(T.levels)]

    pairs1 = exponents_upto(T1, sample)
    pairs2 = exponents_upto(T2, sample)
    match_set = {tuple(m) for m in proof.matches}
    found: list[tuple[int, int]] = []
    if (T1.rank_coeff, T1.rank_base) == (T2.rank_coeff, T2.rank_base):
        by_exp = {e: i for i, e in pairs1}  # exponents strictly increase
        for j, e2 in pairs2:
            if e2 in by_exp:
                found.append((by_exp[e2], j))
    else:
        by_exp2 = {e: j for j, e in pairs2}
        for i, e1 in pairs1:
            e2 = _matching_exponent(
                T1.rank_coeff, T1.rank_base, e1, T2.rank_coeff, T2.rank_base
            )
            if e2 is not None and e2 in by_exp2:
                found.append((i, by_exp2[e2]))
    for i, j in found:
        if (i, j) not in match_set or max(i, j) > proof.bound:
            return False
    return True


def _matching_exponent(a1: int, b1: int, e1: int, a2: int, b2: int) -> Optional[int]:
    """The unique e2 with a1*b1^e1 = a2*b2^e2, if any, via prime exponents."""
    factors: dict[int, int] = _factorize(a1)
    for p, k in _factorize(b1).items():
        factors[p] = factors.get(p, 0) + k * e1
    for p, k in _factorize(a2).items():
        factors[p] = factors.get(p, 0) - k
    factors = {p: k for p, k in factors.items() if k != 0}
    if any(k < 0 for k in factors.values()):
        return None
    fb2 = _factorize(b2)
    if not factors:
        return 0
    if set(factors) != set(fb2):
        return None
    quotients = {factors[p] // fb2[p] for p in fb2}
    if len(quotients) != 1:
        return None
    e2 = quotients.pop()
    if any(factors[p] != fb2[p] * e2 for p in fb2):
        return None
    return e2
