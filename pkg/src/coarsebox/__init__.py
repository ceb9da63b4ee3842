"""Coarse-geometric invariants of box spaces of finitely generated groups:
quotient Cayley graphs, certified systoles, scale-r loop classification,
filled-complex homology, and symbolic rank invariants of filtration towers.
"""

from .boxspace import BoxSpace, CompareVerdict, assemble, compare_towers, distance
from .cayley import (
    CayleyQuotient,
    SystoleCertificate,
    b1_graph,
    bfs_distances,
    bouquet,
    diameter,
    from_matrices_sl2,
    from_permutations,
    girth_word,
    lift_path,
    read_graph,
    systole_certified,
    to_dot,
    voltage_cover,
    write_graph,
)
from .config import Config
from .detect import (
    DetectReport,
    FilledComplex,
    a1r_abelianized,
    detect_report,
    detect_window,
    fill_relators,
    fill_short_cycles,
)
from .homotopy import (
    Closeness,
    HomotopyChain,
    OracleReport,
    RPath,
    classify_loops,
    concat,
    is_r_close,
    to_one_path,
    witness_jump,
    witness_reduce,
    word_path,
)
from .towers import (
    SymbolicRank,
    Tower,
    betti_ratio_sequence,
    congruence_tower_sl2,
    coprime_obstruction,
    exponent_congruence_certificate,
    homology_tower,
    induced_filtration_rank,
    induced_filtration_tower,
    nielsen_schreier,
    psl2_tower,
    ramanujan_prime_search,
    ramanujan_rank,
    rank_gradient,
)
from .words import Presentation, Word, cyclic_reduce, free_reduce, parse_presentation
from .zlinalg import H1Result, IntMatrix, h1_from_complex, snf

__version__ = "0.1.0"
