"""Contextuality quantifiers: invasiveness cost and contextual fraction.

IC(q) is the minimum Frobenius distance from the identity over
scenario-preserving stochastic maps that produce q from some point of the
noncontextuality polytope.  The program is bilinear (map entries times
mixing weights).  Strategy: a short penalty phase with projected-gradient
blocks explores jointly, then an exact polish alternates a convex QP in
the map coordinates (at fixed weights) with projected-gradient steps on
the weights driven by the QP equality multipliers.  Every polished
iterate is feasible, so transport mixtures bound the result from above
by construction.  CF(q) is a plain LP; its closed form normalizes each
facet functional by its maximum over the non-disturbance polytope (the
1-norm reading does not reproduce the LP, the ND maximum does).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .imm import (
    Imm,
    KcbsImmParametrization,
    N_KCBS_ENTRIES,
    identity_imm,
    imm_from_flat,
    kcbs_constraints,
    parametrize_kcbs,
    reduced_map,
    vertex_transport,
)
from .linprog import LpProblem, solve
from .polytope import (
    VertexPolytope,
    facet_check,
    kcbs_nc_polytope,
    kcbs_nd_polytope,
    member,
)
from .scenario import (
    AffineEmbedding,
    deterministic_vertices,
    embed,
    kcbs_embedding,
    kcbs_scenario,
    project,
)

_KCBS_SIZES = (4, 4, 4, 4, 4)


# ---------------------------------------------------------------------------
# Geometry bundle (supports alternative embeddings of the same scenario)


@dataclass(frozen=True)
class _Geometry:
    emb: AffineEmbedding
    nc: VertexPolytope
    nd: VertexPolytope
    e32: np.ndarray          # 32 x 10, NC vertices as rows
    default: bool


@lru_cache(maxsize=4)
def _geometry_for(emb: AffineEmbedding | None) -> _Geometry:
    if emb is None:
        nc, _ = kcbs_nc_polytope()
        nd = kcbs_nd_polytope()
        return _Geometry(kcbs_embedding(), nc, nd, nc.array.copy(), True)
    sc = kcbs_scenario()
    dv = deterministic_vertices(sc, emb)
    nc = VertexPolytope(dv.distinct)
    base = kcbs_nd_polytope()
    ref = kcbs_embedding()
    verts = []
    for v in base.vertices:
        full = embed(ref, list(v))
        verts.append(tuple(project(emb, full)))
    nd = VertexPolytope(tuple(verts))
    return _Geometry(emb, nc, nd, nc.array.copy(), False)


# ---------------------------------------------------------------------------
# Contextual fraction


@dataclass(frozen=True)
class CfResult:
    value: float
    lp_weights: np.ndarray
    formula_value: float | None
    max_facet_index: int | None


def contextual_fraction_lp(q, emb: AffineEmbedding | None = None,
                           tol: float = 1e-9) -> CfResult:
    """maximize the total weight of a noncontextual sub-distribution
    dominated by q, entrywise in full coordinates; CF = 1 - optimum."""
    geom = _geometry_for(emb)
    q = np.asarray([float(x) for x in q], dtype=float)
    if member(geom.nd, q, tol=tol, certificate=False).status == "outside":
        raise ValueError("vector is outside the non-disturbance polytope")
    full_q = geom.emb.m_float @ q + geom.emb.v_float
    cols = (geom.emb.m_float @ geom.e32.T + geom.emb.v_float[:, None])  # 20 x 32
    kappa = cols.shape[1]
    sol = solve(LpProblem(objective=np.ones(kappa), a_ub=cols, b_ub=full_q,
                          sense="max"), tol=tol)
    if sol.status != "optimal":
        raise RuntimeError(f"contextual fraction LP {sol.status}")
    value = min(1.0, max(0.0, 1.0 - sol.objective))
    formula = None
    facet_idx = None
    if geom.default:
        _, fs = kcbs_nc_polytope()
        slacks = facet_check(fs, q)
        # normalize by the facet maximum over the ND polytope; for this
        # facet family every denominator comes out exactly 1/2
        dmax = (fs.f_array @ geom.nd.array.T).max(axis=1)
        ratios = slacks / (dmax - fs.b_array)
        facet_idx = int(np.argmax(ratios)) + 1
        formula = float(min(1.0, max(0.0, ratios.max())))
    return CfResult(value, sol.x, formula, facet_idx)


# ---------------------------------------------------------------------------
# Invasiveness cost: configuration and result types


@dataclass(frozen=True)
class IcConfig:
    starts: int = 64
    seed: int | tuple[int, ...] = 0
    outer_iters: int = 6         # penalty phase: outer multiplier updates
    inner_iters: int = 25        # penalty phase: gradient steps per block
    rho0: float = 50.0
    rho_growth: float = 2.0
    rounds: int = 12             # polish: weight-step rounds
    backtracks: int = 8
    feas_tol: float = 1e-6
    pos_tol: float = 1e-9
    membership_tol: float = 1e-9
    anchors: tuple[int, ...] = (1, 7, 14, 21, 28)
    polish_top: int = 10


@dataclass(frozen=True)
class StartDiagnostic:
    index: int
    kind: str                # anchor | vertex | mixed | cf | transport
    value: float
    residual: float
    min_entry: float
    feasible: bool
    polished: bool


@dataclass(frozen=True)
class IcResult:
    value: float
    witness: Imm | None
    reduced_z: np.ndarray | None
    reduced_v: np.ndarray | None
    weights: np.ndarray | None      # mixing weights over NC vertices
    residual: float
    status: str                     # converged | boundary-zero | failed
    membership: str                 # inside | boundary | outside
    upper_bound: float | None
    lower_bound: float
    starts: tuple[StartDiagnostic, ...]


class _Chart:
    """Float view of the scenario-preserving chart plus per-target helpers."""

    def __init__(self, param: KcbsImmParametrization, geom: _Geometry):
        self.param = param
        self.geom = geom
        self.b = param.basis_float            # 80 x 30
        self.w0 = param.w0_float              # identity
        self.quad = 2.0 * self.b.T @ self.b   # Hessian of ||W - I||_F^2
        emb = geom.emb
        self.m = emb.m_float
        self.v = emb.v_float
        self.indep = list(emb.indep_indices)
        self.e32 = geom.e32                   # 32 x 10
        self.free = list(param.free_indices)
        rows, rhs, _ = kcbs_constraints()
        self.sys_a = np.array([[float(x) for x in row] for row in rows])
        self.sys_b = np.array([float(x) for x in rhs])
        cost = np.ones(N_KCBS_ENTRIES)
        cost[[16 * i + 5 * d for i in range(5) for d in range(4)]] = 0.0
        self.offdiag_cost = cost

    def w_flat(self, y: np.ndarray) -> np.ndarray:
        return self.w0 + y @ self.b.T

    def image_matrix(self, p: np.ndarray) -> np.ndarray:
        """H with (H w)_r = (W p)[indep_r]; p is a batch (S, 20) or (20,)."""
        single = p.ndim == 1
        ps = p[None, :] if single else p
        s = ps.shape[0]
        h = np.zeros((s, 10, N_KCBS_ENTRIES))
        for r, full_idx in enumerate(self.indep):
            i, loc = divmod(full_idx, 4)
            base = 16 * i + 4 * loc
            for k in range(4):
                h[:, r, base + k] = ps[:, 4 * i + k]
        return h[0] if single else h

    def p_of_lambda(self, lam: np.ndarray) -> np.ndarray:
        """Full vector of the classical mixture(s): M (E lam) + V."""
        c = lam @ self.e32                    # (..., 10)
        return c @ self.m.T + self.v

    def z_matrices(self, w_flat: np.ndarray) -> np.ndarray:
        """Batched reduced matrices Z = T W M (S, 10, 10)."""
        s = w_flat.shape[0]
        blocks = w_flat.reshape(s, 5, 4, 4)
        z = np.zeros((s, 10, 10))
        for r, full_idx in enumerate(self.indep):
            i, loc = divmod(full_idx, 4)
            mblk = self.m[4 * i:4 * i + 4]    # 4 x 10
            z[:, r, :] = np.einsum("sk,kj->sj", blocks[:, i, loc, :], mblk)
        return z

    def v_vectors(self, w_flat: np.ndarray) -> np.ndarray:
        s = w_flat.shape[0]
        blocks = w_flat.reshape(s, 5, 4, 4)
        out = np.zeros((s, 10))
        for r, full_idx in enumerate(self.indep):
            i, loc = divmod(full_idx, 4)
            vblk = self.v[4 * i:4 * i + 4]
            out[:, r] = blocks[:, i, loc, :] @ vblk
        return out


@lru_cache(maxsize=4)
def _chart_for(emb: AffineEmbedding | None) -> _Chart:
    return _Chart(parametrize_kcbs(), _geometry_for(emb))


def _simplex_project(x: np.ndarray) -> np.ndarray:
    """Euclidean projection of each row onto the probability simplex."""
    single = x.ndim == 1
    xs = x[None, :] if single else x
    n = xs.shape[1]
    u = np.sort(xs, axis=1)[:, ::-1]
    css = np.cumsum(u, axis=1) - 1.0
    idx = np.arange(1, n + 1)
    cond = u - css / idx > 0
    rho = n - 1 - np.argmax(cond[:, ::-1], axis=1)
    theta = css[np.arange(xs.shape[0]), rho] / (rho + 1)
    out = np.maximum(xs - theta[:, None], 0.0)
    return out[0] if single else out


# ---------------------------------------------------------------------------
# Exact building blocks: feasibility LP, active-set QP, transports


def _phase1_feasible_w(chart: _Chart, h: np.ndarray, q: np.ndarray,
                       tol: float = 1e-9):
    """A valid map with T W p = q, as the 80 block entries, or None."""
    a_eq = np.vstack([chart.sys_a, h])
    b_eq = np.concatenate([chart.sys_b, q])
    sol = solve(LpProblem(objective=chart.offdiag_cost, a_eq=a_eq, b_eq=b_eq),
                tol=tol)
    if sol.status != "optimal":
        return None
    return np.maximum(sol.x, 0.0)


def _feasible_from_hint(a_all: np.ndarray, b_all: np.ndarray,
                        w_hint: np.ndarray):
    """Correct a near-feasible point onto the equality slice, preferring a
    correction supported on the coordinates away from their bound."""
    resid = a_all @ w_hint - b_all
    if float(np.max(np.abs(resid))) < 1e-12:
        return w_hint
    free = w_hint > 1e-9
    for cols in (free, slice(None)):
        a_sub = a_all[:, cols]
        delta, *_ = np.linalg.lstsq(a_sub, -resid, rcond=None)
        cand = w_hint.copy()
        cand[cols] = cand[cols] + delta
        if (float(np.max(np.abs(a_all @ cand - b_all))) < 1e-9
                and float(cand.min()) >= -1e-11):
            return np.maximum(cand, 0.0)
    return None


def _project_active_set(a_all: np.ndarray, b_all: np.ndarray,
                        w0: np.ndarray, w_start: np.ndarray,
                        max_iters: int = 200):
    """min ||w - w0||^2 s.t. a_all w = b_all, w >= 0, from feasible
    w_start.  Bound active-set with PD normal equations; every iterate
    stays feasible.  Returns (w, equality multipliers)."""
    n = w0.shape[0]
    w = w_start.copy()
    pinned = w <= 1e-12
    w[pinned] = 0.0
    mu = np.zeros(a_all.shape[0])
    for _ in range(max_iters):
        free = ~pinned
        a_f = a_all[:, free]
        gram = a_f @ a_f.T
        target = b_all - a_f @ w0[free]
        try:
            mu = np.linalg.solve(gram + 1e-13 * np.eye(gram.shape[0]), target)
        except np.linalg.LinAlgError:
            mu, *_ = np.linalg.lstsq(gram, target, rcond=None)
        if not np.all(np.isfinite(mu)):
            mu, *_ = np.linalg.lstsq(gram, target, rcond=None)
        w_star = np.zeros(n)
        w_star[free] = w0[free] + a_f.T @ mu
        neg = free & (w_star < -1e-12)
        if not neg.any():
            w = w_star
            w[w < 0.0] = 0.0
            # bound multipliers on the pinned set
            zeta = -(w0 + a_all.T @ mu)
            zeta_p = zeta[pinned]
            if zeta_p.size == 0 or float(zeta_p.min()) >= -1e-10:
                return w, mu
            release = np.flatnonzero(pinned)[int(np.argmin(zeta_p))]
            pinned[release] = False
            continue
        # partial step toward w_star until a coordinate hits its bound
        diff = w_star - w
        shrink = free & (diff < -1e-15) & (w_star < 0.0)
        steps = -w[shrink] / diff[shrink]
        t = float(steps.min())
        block = np.flatnonzero(shrink)[int(np.argmin(steps))]
        w = w + max(t, 0.0) * diff
        w[block] = 0.0
        pinned[block] = True
    return w, mu


def _qp_at_lambda(chart: _Chart, lam: np.ndarray, q: np.ndarray,
                  w_hint: np.ndarray | None = None):
    """Optimal map for fixed mixing weights: projects the identity onto
    the polytope of valid maps sending p(lam) to q.  Returns (value, w,
    image-row multipliers) or None when that polytope is empty."""
    p = chart.p_of_lambda(lam)
    h = chart.image_matrix(p)
    a_all = np.vstack([chart.sys_a, h])
    b_all = np.concatenate([chart.sys_b, q])
    w_start = None
    if w_hint is not None:
        w_start = _feasible_from_hint(a_all, b_all, w_hint)
    if w_start is None:
        w_start = _phase1_feasible_w(chart, h, q)
        if w_start is None:
            return None
    w, mu = _project_active_set(a_all, b_all, chart.w0, w_start)
    value = float(np.linalg.norm(w - chart.w0))
    return value, w, mu[chart.sys_a.shape[0]:]


@lru_cache(maxsize=2500)
def _cached_transport(alpha: int, beta: int) -> np.ndarray:
    w = vertex_transport(alpha, beta)
    return np.array([float(x) for x in w.flat()])


def _transport_mixture(chart: _Chart, q: np.ndarray, anchor: int,
                       tol: float = 1e-9):
    """Feasible map from NC vertex `anchor` (1-based) to q: the membership
    mixture of q over non-disturbance vertices lifts to a mixture of
    transports.  Returns (w, lam, value) or None."""
    res = member(chart.geom.nd, q, tol=tol, certificate=False)
    if res.status == "outside":
        return None
    mu = res.weights
    total = np.zeros(N_KCBS_ENTRIES)
    for beta in np.flatnonzero(mu > 1e-12):
        total += mu[beta] * _cached_transport(anchor, int(beta) + 1)
    lam = np.zeros(32)
    lam[anchor - 1] = 1.0
    return total, lam, float(np.linalg.norm(total - chart.w0))


def _evaluate(chart: _Chart, w: np.ndarray, lam: np.ndarray, q: np.ndarray):
    value = float(np.linalg.norm(w - chart.w0))
    p = chart.p_of_lambda(lam)
    h = chart.image_matrix(p)
    residual = float(np.max(np.abs(h @ w - q)))
    return value, residual, float(w.min())


# ---------------------------------------------------------------------------
# Penalty exploration phase (batched over starts)


def _penalty_phase(chart: _Chart, q: np.ndarray, y: np.ndarray,
                   lam: np.ndarray, cfg: IcConfig):
    """Augmented-Lagrangian exploration: projected-gradient steps on the
    simplex block and unconstrained steps on the chart block, with
    multiplier updates and a growing penalty.  Returns updated (y, lam)."""
    s = y.shape[0]
    rho = np.full(s, cfg.rho0)
    rho_g = np.full(s, cfg.rho0)
    mu = np.zeros((s, 10))
    nu = np.zeros((s, N_KCBS_ENTRIES))
    prev_res = np.full(s, np.inf)
    quad_lip = float(np.linalg.eigvalsh(chart.quad).max())
    bsq = float(np.sum(chart.b * chart.b))
    for _ in range(cfg.outer_iters):
        w = chart.w_flat(y)
        z = chart.z_matrices(w)
        vv = chart.v_vectors(w)
        g_lam = np.einsum("sij,kj->sik", z, chart.e32)   # s x 10 x 32
        d_lam = vv - q
        lip = (np.einsum("sik,sik->s", g_lam, g_lam) + 1e-9) * rho
        for _ in range(cfg.inner_iters):
            r = np.einsum("sik,sk->si", g_lam, lam) + d_lam
            grad = np.einsum("sik,si->sk", g_lam, mu + rho[:, None] * r)
            lam = _simplex_project(lam - grad / lip[:, None])

        p = chart.p_of_lambda(lam)
        h = chart.image_matrix(p)                         # s x 10 x 80
        hb = np.einsum("srw,wk->srk", h, chart.b)         # s x 10 x 30
        hw0 = h @ chart.w0
        lip_y = (quad_lip
                 + rho * np.einsum("srk,srk->s", hb, hb)
                 + rho_g * bsq)
        for _ in range(cfg.inner_iters):
            w = chart.w_flat(y)
            r = np.einsum("srk,sk->sr", hb, y) + hw0 - q
            mult_pos = np.maximum(0.0, nu - rho_g[:, None] * w)
            grad = (y @ chart.quad.T
                    + np.einsum("srk,sr->sk", hb, mu + rho[:, None] * r)
                    - mult_pos @ chart.b)
            y = y - grad / lip_y[:, None]

        w = chart.w_flat(y)
        r = np.einsum("srk,sk->sr", hb, y) + hw0 - q
        res_now = np.max(np.abs(r), axis=1)
        mu = mu + rho[:, None] * r
        nu = np.maximum(0.0, nu - rho_g[:, None] * w)
        rho[res_now > 0.25 * prev_res] *= cfg.rho_growth
        neg = np.minimum(w.min(axis=1), 0.0)
        rho_g[neg < -cfg.pos_tol] *= cfg.rho_growth
        prev_res = res_now
    return y, lam


# ---------------------------------------------------------------------------
# Exact polish: alternate convex QP with weight-space descent


def _polish_start(chart: _Chart, q: np.ndarray, lam0: np.ndarray,
                  cfg: IcConfig, w_hint: np.ndarray | None = None):
    """Descend the QP value function over the simplex, moving the weights
    by projected gradient using the QP equality multipliers.  Every
    iterate is feasible.  Returns (value, w, lam) or None."""
    lam = _simplex_project(lam0)
    sol = _qp_at_lambda(chart, lam, q, w_hint=w_hint)
    if sol is None:
        return None
    value, w, mu_img = sol
    eta = None
    for _ in range(cfg.rounds):
        z = chart.z_matrices(w[None, :])[0]
        g_z = z @ chart.e32.T                # 10 x 32
        grad = -(g_z.T @ mu_img)
        gmax = float(np.max(np.abs(grad)))
        if gmax < 1e-13:
            break
        if eta is None:
            eta = 0.25 / gmax
        improved = False
        for _ in range(cfg.backtracks):
            lam_new = _simplex_project(lam - eta * grad)
            if float(np.max(np.abs(lam_new - lam))) < 1e-14:
                break
            trial = _qp_at_lambda(chart, lam_new, q, w_hint=w)
            if trial is not None and trial[0] < value - 1e-12:
                value, w, mu_img = trial
                lam = lam_new
                eta *= 2.0
                improved = True
                break
            eta /= 4.0
        if not improved:
            break
    return value, w, lam


# ---------------------------------------------------------------------------
# Public entry point


def invasiveness_cost(q, cfg: IcConfig | None = None,
                      emb: AffineEmbedding | None = None) -> IcResult:
    """Minimum ||W - I||_F over scenario-preserving stochastic maps W that
    produce q from some noncontextual mixture.  Deterministic given
    cfg.seed.  Raises ValueError when q is outside the non-disturbance
    polytope."""
    if cfg is None:
        cfg = IcConfig()
    geom = _geometry_for(emb)
    q = np.asarray([float(x) for x in q], dtype=float)
    if q.shape != (10,):
        raise ValueError("expected a 10-dimensional independent vector")

    nd_res = member(geom.nd, q, tol=cfg.membership_tol, certificate=False)
    if nd_res.status == "outside":
        raise ValueError("vector is outside the non-disturbance polytope")

    nc_res = member(geom.nc, q, tol=cfg.membership_tol, certificate=False)
    if nc_res.status in ("inside", "boundary"):
        ident = identity_imm(_KCBS_SIZES)
        rm = reduced_map(ident, geom.emb)
        status = "converged" if nc_res.status == "inside" else "boundary-zero"
        return IcResult(0.0, ident, rm.z, rm.v, nc_res.weights, 0.0, status,
                        nc_res.status, upper_bound=0.0, lower_bound=0.0,
                        starts=())

    chart = _chart_for(emb)
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))

    # --- assemble starts
    starts = []                                # (lam0, kind, w_hint)
    upper = None
    for anchor in cfg.anchors:
        tm = _transport_mixture(chart, q, anchor, tol=cfg.membership_tol)
        lam0 = np.zeros(32)
        lam0[anchor - 1] = 1.0
        if tm is not None:
            w_m, _, val = tm
            upper = val if upper is None else min(upper, val)
            starts.append((lam0, "anchor", w_m))
        else:
            starts.append((lam0, "anchor", None))
    try:
        cf = contextual_fraction_lp(q, emb=emb, tol=cfg.membership_tol)
        tot = float(cf.lp_weights.sum())
        if tot > 1e-9:
            starts.append((cf.lp_weights / tot, "cf", None))
    except (ValueError, RuntimeError):
        pass
    while len(starts) < cfg.starts:
        if len(starts) % 2 == 0:
            lam0 = np.zeros(32)
            lam0[int(rng.integers(0, 32))] = 1.0
            starts.append((lam0, "vertex", None))
        else:
            starts.append((rng.dirichlet(np.full(32, 0.3)), "mixed", None))

    # --- penalty exploration for the non-anchored starts
    explore_idx = [i for i, (_, kind, hint) in enumerate(starts)
                   if hint is None and kind in ("vertex", "mixed")]
    if explore_idx:
        y_b = np.array([rng.normal(scale=0.1, size=30) for _ in explore_idx])
        lam_b = np.array([starts[i][0] for i in explore_idx])
        y_b, lam_b = _penalty_phase(chart, q, y_b, lam_b, cfg)
        w_b = chart.w_flat(y_b)
        for row, i in enumerate(explore_idx):
            starts[i] = (lam_b[row], starts[i][1], w_b[row])

    # --- rank for polish: anchors and cf always, best explored after
    def sort_key(item):
        i, (lam0, kind, hint) = item
        prio = 0 if kind in ("anchor", "cf") else 1
        rough = 0.0
        if hint is not None:
            rough = float(np.linalg.norm(hint - chart.w0))
        return (prio, rough, i)

    ranked = sorted(enumerate(starts), key=sort_key)
    polish_list = ranked[:max(cfg.polish_top, sum(1 for _, s in ranked
                                                  if s[1] in ("anchor", "cf")))]

    diags = []
    best = None
    for i, (lam0, kind, hint) in polish_list:
        out = _polish_start(chart, q, lam0, cfg, w_hint=hint)
        if out is None:
            if hint is not None and kind == "anchor":
                # transport mixture itself is still a valid candidate
                value, residual, min_entry = _evaluate(chart, hint, lam0, q)
                feas = residual <= cfg.feas_tol and min_entry >= -cfg.feas_tol
                diags.append(StartDiagnostic(i, "transport", value, residual,
                                             min_entry, feas, False))
                if feas and (best is None or value < best[0]):
                    best = (value, hint, lam0, residual)
            else:
                diags.append(StartDiagnostic(i, kind, math.nan, math.inf,
                                             math.nan, False, False))
            continue
        value, w_p, lam_p = out
        value, residual, min_entry = _evaluate(chart, w_p, lam_p, q)
        feasible = residual <= cfg.feas_tol and min_entry >= -cfg.feas_tol
        diags.append(StartDiagnostic(i, kind, value, residual, min_entry,
                                     feasible, True))
        if feasible and (best is None or value < best[0]):
            best = (value, w_p, lam_p, residual)

    if best is None:
        return IcResult(math.nan, None, None, None, None, math.inf, "failed",
                        nc_res.status, upper_bound=upper, lower_bound=0.0,
                        starts=tuple(diags))
    value, w_best, lam_best, residual = best
    w_b = imm_from_flat([float(x) for x in w_best], _KCBS_SIZES)
    rm = reduced_map(w_b, geom.emb)
    return IcResult(value, w_b, rm.z, rm.v, lam_best, residual, "converged",
                    nc_res.status, upper_bound=upper, lower_bound=0.0,
                    starts=tuple(diags))


# ---------------------------------------------------------------------------
# Parameter sweep over the qutrit family


@dataclass(frozen=True)
class SweepCell:
    lam: float
    a: float
    kcbs: float
    ic: float | None
    cf: float | None
    ic_status: str
    ic_residual: float | None


@dataclass(frozen=True)
class SweepTable:
    cells: tuple[SweepCell, ...]
    which: str


CSV_HEADER = "lambda,a,kcbs_value,ic,cf,ic_status,ic_residual"


def sweep(lams, avals, which: str = "both", cfg: IcConfig | None = None,
          cut_starts: int = 64) -> SweepTable:
    """Evaluate the quantifiers over the (lambda, a) grid, lambda outer.

    Cells on the two cut lines (largest lambda, largest a) get cut_starts
    multistarts; interior cells keep cfg.starts.  Each cell draws its own
    seed from (cfg.seed, cell index), so any sub-grid reproduces the same
    numbers and a cell failure marks that row without stopping the sweep.
    """
    from .quantum_kcbs import kcbs_value, model_q

    if which not in ("ic", "cf", "both"):
        raise ValueError("which must be one of: ic, cf, both")
    lams = [float(x) for x in lams]
    avals = [float(x) for x in avals]
    if not lams or not avals:
        raise ValueError("empty grid")
    if min(lams) < 0 or max(lams) > 1 or min(avals) < 0 or max(avals) > 1:
        raise ValueError("grid bounds must lie within the unit square")
    if cfg is None:
        cfg = IcConfig(starts=16)
    base_seed = cfg.seed if isinstance(cfg.seed, tuple) else (cfg.seed,)
    lam_cut = max(lams)
    a_cut = max(avals)

    cells = []
    index = 0
    for lam in lams:
        for a in avals:
            q = model_q(lam, a)
            kv = kcbs_value(q)
            ic_val = None
            ic_status = ""
            ic_res = None
            cf_val = None
            if which in ("ic", "both"):
                n_starts = cut_starts if (lam == lam_cut or a == a_cut) \
                    else cfg.starts
                cell_cfg = replace(cfg, starts=n_starts,
                                   seed=base_seed + (index,))
                try:
                    res = invasiveness_cost(q, cell_cfg)
                    ic_val = res.value
                    ic_status = res.status
                    ic_res = res.residual
                except (ValueError, RuntimeError):
                    ic_val = math.nan
                    ic_status = "failed"
                    ic_res = math.inf
            if which in ("cf", "both"):
                try:
                    cf_val = contextual_fraction_lp(q).value
                except (ValueError, RuntimeError):
                    cf_val = math.nan
            cells.append(SweepCell(lam, a, kv, ic_val, cf_val,
                                   ic_status, ic_res))
            index += 1
    return SweepTable(tuple(cells), which)


def _fmt(x: float | None, spec: str) -> str:
    if x is None:
        return ""
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf"
    return format(x, spec)


def sweep_csv(table: SweepTable) -> str:
    """Render the table; fixed formats keep reruns byte-identical."""
    lines = [CSV_HEADER]
    for c in table.cells:
        lines.append(",".join([
            repr(c.lam),
            repr(c.a),
            _fmt(c.kcbs, ".7f"),
            _fmt(c.ic, ".7f"),
            _fmt(c.cf, ".7f"),
            c.ic_status,
            _fmt(c.ic_residual, ".3e"),
        ]))
    return "\n".join(lines) + "\n"
