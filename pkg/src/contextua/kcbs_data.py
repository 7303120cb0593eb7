"""Exact reference tables for the KCBS 5-cycle scenario.

Everything in this module is hard-coded rational data: the affine embedding
(M, V, T) for the standard choice of independent coordinates (first two
entries of each context block), the 32 noncontextual vertices, the 16 facets
of the noncontextuality polytope, the 16 extra vertices of the
non-disturbance polytope, and a tabulated candidate for a vertex-transport
map.  Derivation code elsewhere must reproduce the embedding tables exactly.
"""
from __future__ import annotations

from fractions import Fraction

HALF = Fraction(1, 2)

# Independent coordinates: full-vector indices (0-based), two per context.
KCBS_INDEP_INDICES = (0, 1, 4, 5, 8, 9, 12, 13, 16, 17)

KCBS_T = tuple(
    tuple(1 if j == sel else 0 for j in range(20)) for sel in KCBS_INDEP_INDICES
)

# Rows of M, one per full coordinate.  Context block i holds rows 4i..4i+3:
# the first two rows are unit rows on the block's own independent pair and
# the last two express the dependent outcomes via the next block's pair.
KCBS_M = (
    (1, 0, 0, 0, 0, 0, 0, 0, 0, 0),
    (0, 1, 0, 0, 0, 0, 0, 0, 0, 0),
    (-1, 0, 1, 1, 0, 0, 0, 0, 0, 0),
    (0, -1, -1, -1, 0, 0, 0, 0, 0, 0),
    (0, 0, 1, 0, 0, 0, 0, 0, 0, 0),
    (0, 0, 0, 1, 0, 0, 0, 0, 0, 0),
    (0, 0, -1, 0, 1, 1, 0, 0, 0, 0),
    (0, 0, 0, -1, -1, -1, 0, 0, 0, 0),
    (0, 0, 0, 0, 1, 0, 0, 0, 0, 0),
    (0, 0, 0, 0, 0, 1, 0, 0, 0, 0),
    (0, 0, 0, 0, -1, 0, 1, 1, 0, 0),
    (0, 0, 0, 0, 0, -1, -1, -1, 0, 0),
    (0, 0, 0, 0, 0, 0, 1, 0, 0, 0),
    (0, 0, 0, 0, 0, 0, 0, 1, 0, 0),
    (0, 0, 0, 0, 0, 0, -1, 0, 1, 1),
    (0, 0, 0, 0, 0, 0, 0, -1, -1, -1),
    (0, 0, 0, 0, 0, 0, 0, 0, 1, 0),
    (0, 0, 0, 0, 0, 0, 0, 0, 0, 1),
    (1, 1, 0, 0, 0, 0, 0, 0, -1, 0),
    (-1, -1, 0, 0, 0, 0, 0, 0, 0, -1),
)

KCBS_V = (0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1)

# The 32 projected deterministic vertices, in assignment enumeration order
# (+1 before -1, last observable varying fastest).
KCBS_NC_VERTICES = (
    (1, 0, 1, 0, 1, 0, 1, 0, 1, 0),
    (1, 0, 1, 0, 1, 0, 0, 1, 0, 0),
    (1, 0, 1, 0, 0, 1, 0, 0, 1, 0),
    (1, 0, 1, 0, 0, 1, 0, 0, 0, 0),
    (1, 0, 0, 1, 0, 0, 1, 0, 1, 0),
    (1, 0, 0, 1, 0, 0, 0, 1, 0, 0),
    (1, 0, 0, 1, 0, 0, 0, 0, 1, 0),
    (1, 0, 0, 1, 0, 0, 0, 0, 0, 0),
    (0, 1, 0, 0, 1, 0, 1, 0, 1, 0),
    (0, 1, 0, 0, 1, 0, 0, 1, 0, 0),
    (0, 1, 0, 0, 0, 1, 0, 0, 1, 0),
    (0, 1, 0, 0, 0, 1, 0, 0, 0, 0),
    (0, 1, 0, 0, 0, 0, 1, 0, 1, 0),
    (0, 1, 0, 0, 0, 0, 0, 1, 0, 0),
    (0, 1, 0, 0, 0, 0, 0, 0, 1, 0),
    (0, 1, 0, 0, 0, 0, 0, 0, 0, 0),
    (0, 0, 1, 0, 1, 0, 1, 0, 0, 1),
    (0, 0, 1, 0, 1, 0, 0, 1, 0, 0),
    (0, 0, 1, 0, 0, 1, 0, 0, 0, 1),
    (0, 0, 1, 0, 0, 1, 0, 0, 0, 0),
    (0, 0, 0, 1, 0, 0, 1, 0, 0, 1),
    (0, 0, 0, 1, 0, 0, 0, 1, 0, 0),
    (0, 0, 0, 1, 0, 0, 0, 0, 0, 1),
    (0, 0, 0, 1, 0, 0, 0, 0, 0, 0),
    (0, 0, 0, 0, 1, 0, 1, 0, 0, 1),
    (0, 0, 0, 0, 1, 0, 0, 1, 0, 0),
    (0, 0, 0, 0, 0, 1, 0, 0, 0, 1),
    (0, 0, 0, 0, 0, 1, 0, 0, 0, 0),
    (0, 0, 0, 0, 0, 0, 1, 0, 0, 1),
    (0, 0, 0, 0, 0, 0, 0, 1, 0, 0),
    (0, 0, 0, 0, 0, 0, 0, 0, 0, 1),
    (0, 0, 0, 0, 0, 0, 0, 0, 0, 0),
)

# Facets (f, b) of the noncontextuality polytope: f . p <= b.  The first one
# is the inequality whose quantum violation reaches sqrt(5).
KCBS_FACETS = (
    ((0, 1, 0, 1, 0, 1, 0, 1, 0, 1), 2),
    ((-1, 0, 0, 1, 0, 1, 1, 0, 0, -1), 1),
    ((-1, 0, 0, 1, 1, 0, -1, 0, 1, 0), 1),
    ((0, 1, 0, 1, 1, 0, 0, -1, -1, 0), 1),
    ((-1, 0, 1, 0, -1, 0, 0, 1, 1, 0), 1),
    ((0, 1, 1, 0, -1, 0, 1, 0, -1, 0), 1),
    ((0, 1, 1, 0, 0, -1, -1, 0, 0, 1), 1),
    ((0, -1, -1, 0, 0, 1, 0, 1, 1, 0), 1),
    ((1, 0, -1, 0, 0, 1, 1, 0, -1, 0), 1),
    ((1, 0, -1, 0, 1, 0, -1, 0, 0, 1), 1),
    ((1, 0, 0, -1, -1, 0, 0, 1, 0, 1), 1),
    ((-1, 0, 1, 0, 0, -1, 0, -1, 0, -1), 0),
    ((0, -1, -1, 0, 1, 0, 0, -1, 0, -1), 0),
    ((0, -1, 0, -1, -1, 0, 1, 0, 0, -1), 0),
    ((0, -1, 0, -1, 0, -1, -1, 0, 1, 0), 0),
    ((1, 0, 0, -1, 0, -1, 0, -1, -1, 0), 0),
)

# Extra vertices of the non-disturbance polytope (indices 33..48 in the
# 1-based numbering used by vertex transport).
KCBS_ND_EXTRA_VERTICES = (
    (0, HALF, HALF, 0, HALF, 0, HALF, 0, HALF, 0),
    (HALF, 0, 0, HALF, HALF, 0, HALF, 0, HALF, 0),
    (HALF, 0, HALF, 0, 0, HALF, HALF, 0, HALF, 0),
    (HALF, 0, HALF, 0, HALF, 0, 0, HALF, HALF, 0),
    (HALF, 0, HALF, 0, HALF, 0, HALF, 0, 0, HALF),
    (0, HALF, 0, HALF, 0, HALF, HALF, 0, HALF, 0),
    (0, HALF, 0, HALF, HALF, 0, 0, HALF, HALF, 0),
    (0, HALF, 0, HALF, HALF, 0, HALF, 0, 0, HALF),
    (0, HALF, HALF, 0, HALF, 0, 0, HALF, 0, HALF),
    (0, HALF, HALF, 0, 0, HALF, 0, HALF, HALF, 0),
    (HALF, 0, 0, HALF, 0, HALF, 0, HALF, HALF, 0),
    (HALF, 0, 0, HALF, 0, HALF, HALF, 0, 0, HALF),
    (HALF, 0, HALF, 0, 0, HALF, 0, HALF, 0, HALF),
    (HALF, 0, 0, HALF, HALF, 0, 0, HALF, 0, HALF),
    (0, HALF, HALF, 0, 0, HALF, HALF, 0, 0, HALF),
    (0, HALF, 0, HALF, 0, HALF, 0, HALF, 0, HALF),
)

# Tabulated candidate for a map sending vertex 1 to vertex 48, kept verbatim
# as a regression fixture.  It is column-stochastic and block-diagonal, but
# exact arithmetic shows it violates the scenario-preservation relations and
# actually fixes vertex 1 (see the imm tests), so it is NOT a valid example
# of such a transport.
TRANSPORT_1_48_CANDIDATE = (
    (1, HALF, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0),
    (0, HALF, 0, HALF, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0),
    (0, 0, 0, HALF, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0),
    (0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0),
    (0, 0, 0, 0, 1, HALF, HALF, HALF, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0),
    (0, 0, 0, 0, 0, HALF, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0),
    (0, 0, 0, 0, 0, 0, HALF, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0),
    (0, 0, 0, 0, 0, 0, 0, HALF, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0),
    (0, 0, 0, 0, 0, 0, 0, 0, 1, 1, HALF, 0, 0, 0, 0, 0, 0, 0, 0, 0),
    (0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, HALF, 0, 0, 0, 0, 0, 0, 0, 0),
    (0, 0, 0, 0, 0, 0, 0, 0, 0, 0, HALF, HALF, 0, 0, 0, 0, 0, 0, 0, 0),
    (0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0),
    (0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, HALF, 0, 0, 0, 0),
    (0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0),
    (0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, HALF, 0, 0, 0, 0),
    (0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0),
    (0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 0),
    (0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, HALF),
    (0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, HALF),
    (0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0),
)


def nd_vertices_1_based():
    """All 48 non-disturbance vertices as exact rational tuples."""
    out = [tuple(Fraction(x) for x in v) for v in KCBS_NC_VERTICES]
    out += [tuple(Fraction(x) for x in v) for v in KCBS_ND_EXTRA_VERTICES]
    return out
