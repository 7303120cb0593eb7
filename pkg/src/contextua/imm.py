"""Invasive measurement maps: block-diagonal column-stochastic linear maps
on full probability vectors, one block per context.

A map is scenario-preserving when it sends every consistent probability
vector to another one, i.e. M·T·W·M = W·M and M·T·W·V = (W − 1)·V.  For the
KCBS scenario this is equivalent to an explicit 30-relation linear system
on the 80 block entries, giving a 30-parameter affine solution space used
for sampling and for the invasiveness-cost search.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from .exactla import matmul, matvec, nullspace, nullspace_free_columns, rank
from .linprog import LpProblem, solve
from .polytope import kcbs_nd_polytope
from .scenario import AffineEmbedding, format_rational, parse_rational, kcbs_embedding


def _is_exact_entry(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


@dataclass(frozen=True)
class Imm:
    """Block-diagonal map; blocks[i] is the m_i x m_i matrix of context i.

    Blocks hold Fractions (exact) or floats.  Nonnegativity and column
    sums are *reported* by validate(), not enforced at construction, so
    that parametrized candidates with negative entries can be represented.
    """

    blocks: tuple[tuple[tuple, ...], ...]

    def __post_init__(self):
        blocks = []
        for blk in self.blocks:
            rows = tuple(tuple(x for x in row) for row in blk)
            m = len(rows)
            if any(len(r) != m for r in rows):
                raise ValueError("blocks must be square")
            blocks.append(rows)
        object.__setattr__(self, "blocks", tuple(blocks))

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)

    @property
    def n(self) -> int:
        return sum(self.sizes)

    @cached_property
    def exact(self) -> bool:
        return all(_is_exact_entry(x) for blk in self.blocks for row in blk for x in row)

    @cached_property
    def full_float(self) -> np.ndarray:
        out = np.zeros((self.n, self.n))
        off = 0
        for blk in self.blocks:
            m = len(blk)
            out[off:off + m, off:off + m] = [[float(x) for x in row] for row in blk]
            off += m
        return out

    def full_exact(self) -> list[list[Fraction]]:
        n = self.n
        out = [[Fraction(0)] * n for _ in range(n)]
        off = 0
        for blk in self.blocks:
            m = len(blk)
            for r in range(m):
                for c in range(m):
                    out[off + r][off + c] = Fraction(blk[r][c])
            off += m
        return out

    def flat(self) -> list:
        return [x for blk in self.blocks for row in blk for x in row]


def identity_imm(sizes) -> Imm:
    return Imm(tuple(
        tuple(tuple(Fraction(1) if r == c else Fraction(0) for c in range(m))
              for r in range(m))
        for m in sizes))


def imm_from_flat(values, sizes) -> Imm:
    it = iter(values)
    blocks = []
    for m in sizes:
        blocks.append(tuple(tuple(next(it) for _ in range(m)) for _ in range(m)))
    return Imm(tuple(blocks))


def imm_from_full(matrix, sizes, tol: float = 0.0) -> Imm:
    """Extract the diagonal blocks of a full matrix, verifying that all
    off-block entries vanish (exactly by default)."""
    n = sum(sizes)
    if len(matrix) != n or any(len(r) != n for r in matrix):
        raise ValueError(f"expected {n}x{n} matrix")
    offs = []
    acc = 0
    for m in sizes:
        offs.append(acc)
        acc += m
    for r in range(n):
        for c in range(n):
            same = any(o <= r < o + m and o <= c < o + m for o, m in zip(offs, sizes))
            if not same and abs(float(matrix[r][c])) > tol:
                raise ValueError(f"entry ({r + 1},{c + 1}) is outside every block")
    blocks = []
    for o, m in zip(offs, sizes):
        blocks.append(tuple(tuple(matrix[o + r][o + c] for c in range(m))
                            for r in range(m)))
    return Imm(tuple(blocks))


@dataclass(frozen=True)
class ImmValidation:
    ok: bool
    min_entry: float
    colsum_error: float
    messages: tuple[str, ...]


def validate_imm(w: Imm, tol: float = 1e-9) -> ImmValidation:
    """Nonnegativity and unit column sums, blockwise."""
    msgs = []
    min_entry = np.inf
    colsum_err = 0.0
    for i, blk in enumerate(w.blocks):
        m = len(blk)
        for c in range(m):
            s = sum(blk[r][c] for r in range(m))
            err = abs(float(s) - 1.0)
            if err > colsum_err:
                colsum_err = err
            if err > tol:
                msgs.append(f"block {i + 1} column {c + 1} sums to {float(s)!r}")
        low = min(float(blk[r][c]) for r in range(m) for c in range(m))
        if low < min_entry:
            min_entry = low
        if low < -tol:
            msgs.append(f"block {i + 1} has negative entry {low!r}")
    return ImmValidation(not msgs, float(min_entry), colsum_err, tuple(msgs))


IDENTITY_MTWM = "M·T·W·M = W·M"
IDENTITY_MTWV = "M·T·W·V = (W−1)·V"


@dataclass(frozen=True)
class PreservationReport:
    ok: bool
    residuals: tuple[tuple[str, float], ...]
    tol: float

    @property
    def violated(self) -> tuple[str, ...]:
        return tuple(name for name, r in self.residuals if r > self.tol)


def is_scenario_preserving(w: Imm, emb: AffineEmbedding, tol: float = 1e-9) -> PreservationReport:
    """Test M·T·W·M = W·M and M·T·W·V = (W−1)·V.

    Exact-rational maps are tested with exact arithmetic (residuals then
    come out exactly 0 or not); float maps use numpy within tol.
    """
    if w.n != emb.n:
        raise ValueError(f"map acts on {w.n} entries, embedding has {emb.n}")
    if w.exact:
        wf = w.full_exact()
        m = [list(r) for r in emb.m]
        t = [[Fraction(x) for x in r] for r in emb.t]
        v = list(emb.v)
        wm = matmul(wf, m)
        mtwm = matmul(m, matmul(t, wm))
        r1 = max((abs(a - b) for ra, rb in zip(mtwm, wm) for a, b in zip(ra, rb)),
                 default=Fraction(0))
        wv = matvec(wf, v)
        mtwv = matvec(m, matvec(t, wv))
        rhs = [a - b for a, b in zip(wv, v)]
        r2 = max((abs(a - b) for a, b in zip(mtwv, rhs)), default=Fraction(0))
        res = ((IDENTITY_MTWM, float(r1)), (IDENTITY_MTWV, float(r2)))
    else:
        wf = w.full_float
        wm = wf @ emb.m_float
        r1 = float(np.max(np.abs(emb.m_float @ (emb.t_float @ wm) - wm)))
        wv = wf @ emb.v_float
        r2 = float(np.max(np.abs(emb.m_float @ (emb.t_float @ wv) - (wv - emb.v_float))))
        res = ((IDENTITY_MTWM, r1), (IDENTITY_MTWV, r2))
    ok = all(r <= tol for _, r in res)
    return PreservationReport(ok, res, tol)


@dataclass(frozen=True)
class ReducedAffineMap:
    z: np.ndarray
    v: np.ndarray


def reduced_map(w: Imm, emb: AffineEmbedding) -> ReducedAffineMap:
    """The induced affine action on independent coordinates: Z = T·W·M,
    v = T·W·V."""
    wf = w.full_float
    z = emb.t_float @ wf @ emb.m_float
    v = emb.t_float @ wf @ emb.v_float
    return ReducedAffineMap(z, v)


def simulate(w: Imm, big_c):
    """Apply the map to a full probability vector."""
    if len(big_c) != w.n:
        raise ValueError(f"vector has {len(big_c)} entries, map acts on {w.n}")
    if w.exact and not (isinstance(big_c, np.ndarray) and big_c.dtype != object):
        return matvec(w.full_exact(), [Fraction(x) for x in big_c])
    return w.full_float @ np.asarray([float(x) for x in big_c], dtype=float)


# ---------------------------------------------------------------------------
# KCBS: explicit scenario-preservation system on the 80 block entries.
# Flat entry order: block-major, rows within a block, columns within a row.

_KCBS_SIZES = (4, 4, 4, 4, 4)
N_KCBS_ENTRIES = 80


def _flat(i: int, r: int, c: int) -> int:
    return 16 * i + 4 * r + c


def kcbs_constraints():
    """The 50-row equality system (rows, rhs, names) over the 80 entries:
    20 unit column sums plus 30 overlap-marginal relations, six per cyclic
    context pair.

    With u_k = W^(i)_{1,k} + W^(i)_{3,k} (output weight of the shared
    observable's +1 branch in context i, where it sits second) and
    s_k = W^(i+1)_{1,k} + W^(i+1)_{2,k} (same branch in context i+1, where
    it sits first), preservation of the shared marginal for every
    consistent input forces u1=u3, u2=u4, s1=s2, s3=s4, s1=u1, s4=u4.
    """
    rows, rhs, names = [], [], []
    for i in range(5):
        for c in range(4):
            row = [Fraction(0)] * N_KCBS_ENTRIES
            for r in range(4):
                row[_flat(i, r, c)] = Fraction(1)
            rows.append(row)
            rhs.append(Fraction(1))
            names.append(f"colsum[block {i + 1}, col {c + 1}]")
    for i in range(5):
        j = (i + 1) % 5

        def u(k):  # weight of rows 1,3 of block i in column k (0-based k)
            row = [Fraction(0)] * N_KCBS_ENTRIES
            row[_flat(i, 0, k)] = Fraction(1)
            row[_flat(i, 2, k)] = Fraction(1)
            return row

        def s(k):  # weight of rows 1,2 of block j in column k
            row = [Fraction(0)] * N_KCBS_ENTRIES
            row[_flat(j, 0, k)] = Fraction(1)
            row[_flat(j, 1, k)] = Fraction(1)
            return row

        def diff(a, b):
            return [x - y for x, y in zip(a, b)]

        pair = f"pair({i + 1},{j + 1})"
        for name, row in (
            (f"{pair}: u1=u3", diff(u(0), u(2))),
            (f"{pair}: u2=u4", diff(u(1), u(3))),
            (f"{pair}: s1=s2", diff(s(0), s(1))),
            (f"{pair}: s3=s4", diff(s(2), s(3))),
            (f"{pair}: s1=u1", diff(s(0), u(0))),
            (f"{pair}: s4=u4", diff(s(3), u(3))),
        ):
            rows.append(row)
            rhs.append(Fraction(0))
            names.append(name)
    return rows, rhs, names


@dataclass(frozen=True)
class KcbsImmParametrization:
    """Affine chart of the scenario-preserving solution space:
    w(y) = w0 + basis·y over the 80 flat entries, with w0 the identity map.

    The basis comes from the exact null space of the homogenized system
    with the natural entry order, so each basis vector is 1 at its own
    free entry and 0 at the others; y is read off a solution at
    free_indices directly.
    """

    w0: tuple[Fraction, ...]
    basis: tuple[tuple[Fraction, ...], ...]
    free_indices: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    @cached_property
    def w0_float(self) -> np.ndarray:
        return np.array([float(x) for x in self.w0])

    @cached_property
    def basis_float(self) -> np.ndarray:
        # 80 x 30: columns are basis vectors
        return np.array([[float(x) for x in vec] for vec in self.basis]).T


def parametrize_kcbs() -> KcbsImmParametrization:
    rows, rhs, _ = kcbs_constraints()
    sys_rank = rank(rows)
    basis = nullspace(rows)
    assert len(basis) == N_KCBS_ENTRIES - sys_rank
    free = nullspace_free_columns(rows)
    assert len(free) == len(basis)
    # the basis is ordered by free column and reads like a chart there
    for j, vec in enumerate(basis):
        assert all(vec[k] == (1 if k == free[j] else 0) for k in free)
    w0 = identity_imm(_KCBS_SIZES).flat()
    return KcbsImmParametrization(
        w0=tuple(Fraction(x) for x in w0),
        basis=tuple(tuple(vec) for vec in basis),
        free_indices=tuple(free),
    )


def w_of_y(param: KcbsImmParametrization, y) -> Imm:
    """Candidate map for parameter y; satisfies column sums and the
    relation system exactly, valid iff every entry is nonnegative."""
    if isinstance(y, np.ndarray) and y.dtype != object:
        flat = param.w0_float + param.basis_float @ y
        return imm_from_flat([float(x) for x in flat], _KCBS_SIZES)
    yv = [Fraction(x) for x in y]
    if len(yv) != param.dim:
        raise ValueError(f"need {param.dim} parameters, got {len(yv)}")
    flat = list(param.w0)
    for coeff, vec in zip(yv, param.basis):
        if coeff:
            for k in range(N_KCBS_ENTRIES):
                if vec[k]:
                    flat[k] += coeff * vec[k]
    return imm_from_flat(flat, _KCBS_SIZES)


def y_of_w(param: KcbsImmParametrization, w: Imm):
    """Read the chart coordinates off the free entries (exact for any map
    in the solution space)."""
    flat = w.flat()
    if w.exact:
        return [Fraction(flat[k]) - param.w0[k] for k in param.free_indices]
    arr = np.array([float(x) for x in flat])
    return arr[list(param.free_indices)] - param.w0_float[list(param.free_indices)]


def g_values(param: KcbsImmParametrization, y) -> np.ndarray:
    """The 80 positivity functionals g_a(y) = -entry_a(y); all must be <= 0."""
    y = np.asarray(y, dtype=float)
    return -(param.w0_float + param.basis_float @ y)


# ---------------------------------------------------------------------------
# Structural consequences of pinning a block to the identity

_ZEROS_NEXT = ((2, 0), (3, 0), (2, 1), (3, 1), (0, 2), (1, 2), (0, 3), (1, 3))
_EQ_NEXT = (((0, 0), (2, 2)), ((1, 1), (3, 3)))
_ZEROS_PREV = ((1, 0), (3, 0), (0, 1), (2, 1), (1, 2), (3, 2), (0, 3), (2, 3))
_EQ_PREV = (((0, 0), (1, 1)), ((2, 2), (3, 3)))


@dataclass(frozen=True)
class StructuralReport:
    identity_blocks: tuple[int, ...]        # 1-based
    checks: tuple[tuple[str, float, bool], ...]
    contiguous: bool                        # non-identity blocks cyclically contiguous
    reading_a: bool                         # literal statement (tautology)
    reading_b: bool                         # identity at i, i-2 forces i-1
    tol: float

    @property
    def ok(self) -> bool:
        return all(ok for _, _, ok in self.checks)

    @property
    def max_residual(self) -> float:
        return max((r for _, r, _ in self.checks), default=0.0)


def _block_is_identity(blk, tol: float) -> bool:
    m = len(blk)
    return all(abs(float(blk[r][c]) - (1.0 if r == c else 0.0)) <= tol
               for r in range(m) for c in range(m))


def structural_checks(w: Imm, tol: float = 1e-12) -> StructuralReport:
    """Diagnostic report on a (KCBS) scenario-preserving map.

    For every block pinned at identity, the neighboring blocks must show
    the derived diagonal equalities and off-diagonal zero patterns.  The
    contiguity statement about identity blocks i and i-2 forcing the block
    between them is checked in both readings: as literally written (which
    is vacuous) and with the middle block as the conclusion.
    """
    f = len(w.blocks)
    ident = [i for i in range(f) if _block_is_identity(w.blocks[i], tol)]
    checks = []
    for i in ident:
        nxt = (i + 1) % f
        prv = (i - 1) % f
        bn = w.blocks[nxt]
        bp = w.blocks[prv]
        for r, c in _ZEROS_NEXT:
            val = abs(float(bn[r][c]))
            checks.append((f"block {nxt + 1}[{r + 1},{c + 1}] = 0 (identity at {i + 1})",
                           val, val <= tol))
        for (r1, c1), (r2, c2) in _EQ_NEXT:
            val = abs(float(bn[r1][c1]) - float(bn[r2][c2]))
            checks.append((f"block {nxt + 1}[{r1 + 1},{c1 + 1}] = [{r2 + 1},{c2 + 1}]"
                           f" (identity at {i + 1})", val, val <= tol))
        for r, c in _ZEROS_PREV:
            val = abs(float(bp[r][c]))
            checks.append((f"block {prv + 1}[{r + 1},{c + 1}] = 0 (identity at {i + 1})",
                           val, val <= tol))
        for (r1, c1), (r2, c2) in _EQ_PREV:
            val = abs(float(bp[r1][c1]) - float(bp[r2][c2]))
            checks.append((f"block {prv + 1}[{r1 + 1},{c1 + 1}] = [{r2 + 1},{c2 + 1}]"
                           f" (identity at {i + 1})", val, val <= tol))
    non_ident = set(range(f)) - set(ident)
    boundaries = sum(1 for i in range(f) if i in non_ident and (i + 1) % f not in non_ident)
    contiguous = boundaries <= 1
    reading_a = True  # "identity at i and i-2 implies identity at i": vacuous
    reading_b = all(
        (i in set(ident)) or not ((i - 1) % f in set(ident) and (i + 1) % f in set(ident))
        for i in range(f)
    )
    return StructuralReport(tuple(i + 1 for i in ident), tuple(checks),
                            contiguous, reading_a, reading_b, tol)


# ---------------------------------------------------------------------------
# Vertex transport by LP feasibility


class TransportError(RuntimeError):
    pass


def vertex_transport(alpha: int, beta: int, tol: float = 1e-9,
                     emb: AffineEmbedding | None = None) -> Imm:
    """A scenario-preserving map sending non-disturbance vertex alpha to
    vertex beta (1-based indices into the 48 vertices).

    Feasibility LP on the 80 nonnegative entries: column sums, the
    30-relation system, and the 10 image conditions T·W·(M e_a + V) = e_b.
    The objective minimizes total off-diagonal mass, so transport(a, a)
    returns the identity exactly and the result is deterministic.
    """
    nd = kcbs_nd_polytope()
    if not (1 <= alpha <= nd.size and 1 <= beta <= nd.size):
        raise ValueError(f"vertex indices must be in 1..{nd.size}")
    if emb is None:
        emb = kcbs_embedding()
    e_a = nd.vertices[alpha - 1]
    e_b = nd.vertices[beta - 1]
    p_a = [sum(m_rc * x for m_rc, x in zip(row, e_a)) + v
           for row, v in zip(emb.m, emb.v)]

    sys_rows, sys_rhs, _ = kcbs_constraints()
    a_rows = [[float(x) for x in row] for row in sys_rows]
    b_vals = [float(x) for x in sys_rhs]
    for r, full_idx in enumerate(emb.indep_indices):
        i, loc = divmod(full_idx, 4)
        row = [0.0] * N_KCBS_ENTRIES
        for k in range(4):
            row[_flat(i, loc, k)] = float(p_a[4 * i + k])
        a_rows.append(row)
        b_vals.append(float(e_b[r]))

    c = np.ones(N_KCBS_ENTRIES)
    for i in range(5):
        for d in range(4):
            c[_flat(i, d, d)] = 0.0
    sol = solve(LpProblem(objective=c, a_eq=np.array(a_rows), b_eq=np.array(b_vals)),
                tol=tol)
    if sol.status != "optimal":
        raise TransportError(f"transport {alpha}->{beta}: LP {sol.status}")
    return imm_from_flat([float(x) for x in sol.x], _KCBS_SIZES)


# ---------------------------------------------------------------------------
# Sampling the scenario-preserving polytope (valid maps form a polytope:
# the 50-row equality system plus entrywise nonnegativity)


def pinned_identity_rows(block: int):
    """Exact equality rows forcing 1-based block to the identity."""
    rows, rhs = [], []
    i = block - 1
    for r in range(4):
        for c in range(4):
            row = [Fraction(0)] * N_KCBS_ENTRIES
            row[_flat(i, r, c)] = Fraction(1)
            rows.append(row)
            rhs.append(Fraction(1 if r == c else 0))
    return rows, rhs


def random_preserving_vertex(rng, extra_rows=None, extra_rhs=None,
                             max_tries: int = 20) -> Imm:
    """An exact rational extreme point of the valid scenario-preserving set
    (optionally intersected with extra equality rows), found by minimizing
    a random objective and snapping the LP vertex to rationals via its
    support.  The snap is verified exactly before returning."""
    from .exactla import rref

    sys_rows, sys_rhs, _ = kcbs_constraints()
    rows = [list(r) for r in sys_rows]
    rhs = list(sys_rhs)
    if extra_rows is not None:
        rows += [list(r) for r in extra_rows]
        rhs += list(extra_rhs)
    a_eq = np.array([[float(x) for x in r] for r in rows])
    b_eq = np.array([float(x) for x in rhs])
    for _ in range(max_tries):
        c = rng.normal(size=N_KCBS_ENTRIES)
        sol = solve(LpProblem(objective=c, a_eq=a_eq, b_eq=b_eq), tol=1e-9)
        if sol.status != "optimal":
            raise TransportError(f"face sampling LP {sol.status}")
        support = [j for j in range(N_KCBS_ENTRIES) if sol.x[j] > 1e-7]
        # exact solve on the support, remaining entries pinned to zero
        sub = [[row[j] for j in support] for row in rows]
        r_mat, r_rhs, pivots = rref(sub, list(rhs))
        if any(all(x == 0 for x in r_mat[k]) and r_rhs[k] != 0
               for k in range(len(r_mat))):
            continue  # support misidentified under float tolerance; retry
        vals = {j: Fraction(0) for j in support}
        piv_cols = {c_ for _, c_ in pivots}
        for row_i, col_i in pivots:
            # free columns were already fixed at zero, so pivots read off rhs
            vals[support[col_i]] = r_rhs[row_i] - sum(
                r_mat[row_i][k] * vals[support[k]]
                for k in range(len(support)) if k != col_i and k not in piv_cols)
        flat = [Fraction(0)] * N_KCBS_ENTRIES
        for j, x in vals.items():
            flat[j] = x
        if any(x < 0 for x in flat):
            continue
        good = all(sum(r * x for r, x in zip(row, flat)) == b
                   for row, b in zip(rows, rhs))
        if good:
            return imm_from_flat(flat, _KCBS_SIZES)
    raise TransportError("could not snap an exact vertex of the preserving polytope")


def sample_valid_preserving(param: KcbsImmParametrization, rng,
                            scale: float = 0.03, max_tries: int = 200) -> Imm:
    """Rejection-sample a valid (nonnegative) scenario-preserving map around
    the uniform map, which sits strictly inside the validity region."""
    uniform = imm_from_flat([Fraction(1, 4)] * N_KCBS_ENTRIES, _KCBS_SIZES)
    y0 = np.asarray(y_of_w(param, uniform), dtype=float)
    for _ in range(max_tries):
        y = y0 + rng.normal(scale=scale, size=param.dim)
        w = w_of_y(param, y)
        if validate_imm(w, tol=0.0).ok:
            return w
    raise TransportError("rejection sampling failed; lower the scale")


# ---------------------------------------------------------------------------
# JSON


def imm_to_json(w: Imm) -> str:
    if w.exact:
        blocks = [[[format_rational(x) for x in row] for row in blk] for blk in w.blocks]
    else:
        blocks = [[[float(x) for x in row] for row in blk] for blk in w.blocks]
    return json.dumps({"blocks": blocks}, indent=2)


def imm_from_json(text: str) -> Imm:
    doc = json.loads(text)
    blocks = []
    for blk in doc["blocks"]:
        rows = []
        for row in blk:
            vals = []
            for x in row:
                if isinstance(x, str):
                    vals.append(parse_rational(x))
                elif isinstance(x, float):
                    vals.append(x)
                else:
                    vals.append(Fraction(x))
            rows.append(tuple(vals))
        blocks.append(tuple(rows))
    return Imm(tuple(blocks))
