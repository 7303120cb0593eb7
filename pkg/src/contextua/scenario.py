"""Marginal scenarios and their affine probability embeddings.

A marginal scenario is a set of observables with finite outcome lists plus a
family of contexts (jointly measured subsets).  Full probability vectors
stack one joint distribution per context; normalization and overlap
marginalization cut the dimension from n down to ell independent
coordinates.  This module derives the affine embedding P = M p + V and the
projection p = T P exactly, over rationals.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from . import kcbs_data
from .exactla import (
    Matrix,
    Vector,
    frac_matrix,
    frac_vector,
    matvec,
    rank,
    rref,
)


class ScenarioError(ValueError):
    pass


class EmbeddingError(ValueError):
    def __init__(self, message, offending_index=None, alternative=None):
        super().__init__(message)
        self.offending_index = offending_index
        self.alternative = alternative


@dataclass(frozen=True)
class Observable:
    id: str
    outcomes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "outcomes", tuple(int(o) for o in self.outcomes))
        if not self.outcomes:
            raise ScenarioError(f"observable {self.id!r} has no outcomes")
        if len(set(self.outcomes)) != len(self.outcomes):
            raise ScenarioError(f"observable {self.id!r} has duplicate outcomes")


@dataclass(frozen=True)
class Context:
    members: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if not self.members:
            raise ScenarioError("empty context")
        if len(set(self.members)) != len(self.members):
            raise ScenarioError(f"context {self.members} repeats an observable")

    @property
    def label(self) -> str:
        return "(" + ",".join(self.members) + ")"


@dataclass(frozen=True)
class MarginalScenario:
    observables: tuple[Observable, ...]
    contexts: tuple[Context, ...]

    def __post_init__(self):
        object.__setattr__(self, "observables", tuple(self.observables))
        object.__setattr__(
            self,
            "contexts",
            tuple(c if isinstance(c, Context) else Context(tuple(c)) for c in self.contexts),
        )
        ids = [o.id for o in self.observables]
        if len(set(ids)) != len(ids):
            raise ScenarioError("duplicate observable ids")
        known = set(ids)
        used = set()
        for ctx in self.contexts:
            for m in ctx.members:
                if m not in known:
                    raise ScenarioError(f"context {ctx.label} uses unknown observable {m!r}")
                used.add(m)
        missing = known - used
        if missing:
            raise ScenarioError(f"observables never measured: {sorted(missing)}")

    @cached_property
    def observable_by_id(self) -> dict[str, Observable]:
        return {o.id: o for o in self.observables}

    @cached_property
    def joint_outcomes(self) -> tuple[tuple[tuple[int, ...], ...], ...]:
        """Per context: ordered tuple of joint outcome tuples (lexicographic,
        earlier-listed single-observable outcomes first)."""
        tables = []
        for ctx in self.contexts:
            lists = [self.observable_by_id[m].outcomes for m in ctx.members]
            tables.append(tuple(itertools.product(*lists)))
        return tuple(tables)

    @cached_property
    def context_sizes(self) -> tuple[int, ...]:
        return tuple(len(t) for t in self.joint_outcomes)

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        out, acc = [], 0
        for m in self.context_sizes:
            out.append(acc)
            acc += m
        return tuple(out)

    @property
    def n(self) -> int:
        return sum(self.context_sizes)

    @property
    def f(self) -> int:
        return len(self.contexts)

    def assignments(self):
        """All global deterministic assignments, as tuples aligned with
        self.observables; first-listed outcomes vary slowest."""
        return itertools.product(*(o.outcomes for o in self.observables))

    def assignment_full_vector(self, assignment) -> Vector:
        """0/1 full probability vector of one deterministic assignment."""
        value = dict(zip((o.id for o in self.observables), assignment))
        out = []
        for ctx, table in zip(self.contexts, self.joint_outcomes):
            target = tuple(value[m] for m in ctx.members)
            out.extend(Fraction(1) if s == target else Fraction(0) for s in table)
        return out


def constraint_system(scenario: MarginalScenario):
    """Rows (A, b, names) of the normalization + marginalization system A P = b."""
    n = scenario.n
    rows: Matrix = []
    rhs: Vector = []
    names: list[str] = []
    for i, ctx in enumerate(scenario.contexts):
        row = [Fraction(0)] * n
        for k in range(scenario.context_sizes[i]):
            row[scenario.offsets[i] + k] = Fraction(1)
        rows.append(row)
        rhs.append(Fraction(1))
        names.append(f"norm{ctx.label}")
    obs_order = {o.id: k for k, o in enumerate(scenario.observables)}
    for i, j in itertools.combinations(range(scenario.f), 2):
        ci, cj = scenario.contexts[i], scenario.contexts[j]
        shared = sorted(set(ci.members) & set(cj.members), key=obs_order.get)
        if not shared:
            continue
        lists = [scenario.observable_by_id[m].outcomes for m in shared]
        for s in itertools.product(*lists):
            row = [Fraction(0)] * n
            target = dict(zip(shared, s))
            for k, outcome in enumerate(scenario.joint_outcomes[i]):
                named = dict(zip(ci.members, outcome))
                if all(named[m] == target[m] for m in shared):
                    row[scenario.offsets[i] + k] += 1
            for k, outcome in enumerate(scenario.joint_outcomes[j]):
                named = dict(zip(cj.members, outcome))
                if all(named[m] == target[m] for m in shared):
                    row[scenario.offsets[j] + k] -= 1
            rows.append(row)
            rhs.append(Fraction(0))
            assig = ",".join(f"{m}={v}" for m, v in zip(shared, s))
            names.append(f"marg[{assig}]{ci.label}|{cj.label}")
    return rows, rhs, names


@dataclass(frozen=True)
class AffineEmbedding:
    """Exact affine coordinates: P = M p + V with p = T P."""

    m: tuple[tuple[Fraction, ...], ...]
    v: tuple[Fraction, ...]
    t: tuple[tuple[int, ...], ...]

    @property
    def n(self) -> int:
        return len(self.m)

    @property
    def ell(self) -> int:
        return len(self.t)

    @cached_property
    def indep_indices(self) -> tuple[int, ...]:
        return tuple(row.index(1) for row in self.t)

    @cached_property
    def m_float(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.m])

    @cached_property
    def v_float(self) -> np.ndarray:
        return np.array([float(x) for x in self.v])

    @cached_property
    def t_float(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.t])


def _column_submatrix_rank(a: Matrix, cols: list[int]) -> int:
    return rank([[row[c] for c in cols] for row in a])


def _greedy_selection(scenario: MarginalScenario, a: Matrix, ell: int, sys_rank: int, reverse: bool) -> list[int]:
    """Round-robin over contexts: each pass claims at most one coordinate per
    context block (earliest unclaimed first, or latest if reverse), keeping
    the dependent columns at full rank.  A coordinate that fails the rank
    test can never succeed later, so it is discarded.  For a cycle of
    dichotomic pairs this yields the first two coordinates of every block.
    """
    n = scenario.n
    dependent = set(range(n))
    queues = []
    for i in range(scenario.f):
        block = list(range(scenario.offsets[i], scenario.offsets[i] + scenario.context_sizes[i]))
        queues.append(block[::-1] if reverse else block)
    indep: list[int] = []
    while len(indep) < ell:
        progress = False
        for q in queues:
            if len(indep) == ell:
                break
            while q:
                j = q.pop(0)
                trial = sorted(dependent - {j})
                if _column_submatrix_rank(a, trial) == sys_rank:
                    dependent.remove(j)
                    indep.append(j)
                    progress = True
                    break
        if not progress:
            break
    assert len(indep) == ell
    return sorted(indep)


def derive_embedding(scenario: MarginalScenario, choice="first") -> AffineEmbedding:
    """Derive (M, V, T) exactly from the constraint system.

    choice selects which coordinates stay independent: "first" prefers the
    earliest coordinate in each context block (the standard convention),
    "last" prefers the latest, and an explicit index sequence is validated
    as given.
    """
    a, b, _ = constraint_system(scenario)
    n = scenario.n
    sys_rank = rank(a)
    aug_rank = rank([row + [bi] for row, bi in zip(a, b)])
    if aug_rank > sys_rank:
        raise EmbeddingError(
            f"inconsistent constraint system: rank defect {aug_rank - sys_rank}"
        )
    ell = n - sys_rank

    if choice == "first":
        indep = _greedy_selection(scenario, a, ell, sys_rank, reverse=False)
    elif choice == "last":
        indep = _greedy_selection(scenario, a, ell, sys_rank, reverse=True)
    else:
        indep = [int(j) for j in choice]
        if len(indep) != ell or len(set(indep)) != len(indep):
            raise EmbeddingError(
                f"selection must pick {ell} distinct coordinates, got {indep}",
                alternative=_greedy_selection(scenario, a, ell, sys_rank, reverse=False),
            )
        dependent = set(range(n))
        for j in indep:
            trial = sorted(dependent - {j})
            if _column_submatrix_rank(a, trial) != sys_rank:
                raise EmbeddingError(
                    f"coordinate {j} cannot be independent with this selection",
                    offending_index=j,
                    alternative=_greedy_selection(scenario, a, ell, sys_rank, reverse=False),
                )
            dependent.remove(j)
        indep = sorted(indep)

    dep = [j for j in range(n) if j not in set(indep)]
    r_mat, rhs, pivots = rref(a, b, col_order=dep + indep)
    assert len(pivots) == sys_rank
    assert all(c not in set(indep) for _, c in pivots)

    pos = {j: k for k, j in enumerate(indep)}
    m_rows = [[Fraction(0)] * ell for _ in range(n)]
    v_vec = [Fraction(0)] * n
    for j in indep:
        m_rows[j][pos[j]] = Fraction(1)
    for row, c in pivots:
        for j in indep:
            m_rows[c][pos[j]] = -r_mat[row][j]
        v_vec[c] = rhs[row]

    t_rows = [[1 if j == sel else 0 for j in range(n)] for sel in indep]
    emb = AffineEmbedding(
        m=tuple(tuple(r) for r in m_rows),
        v=tuple(v_vec),
        t=tuple(tuple(r) for r in t_rows),
    )
    # cheap exact sanity: T M = I and T V = 0
    for k, sel in enumerate(emb.indep_indices):
        assert emb.v[sel] == 0
        assert all(emb.m[sel][kk] == (1 if kk == k else 0) for kk in range(ell))
    return emb


def embed(emb: AffineEmbedding, p):
    """Full vector M p + V.  Float arrays stay float; anything else is exact."""
    if isinstance(p, np.ndarray) and p.dtype != object:
        return emb.m_float @ p + emb.v_float
    pv = frac_vector(p)
    mv = matvec([list(r) for r in emb.m], pv)
    return [x + y for x, y in zip(mv, emb.v)]


def project(emb: AffineEmbedding, big_p):
    """Independent coordinates T P (a Cartesian selection)."""
    idx = emb.indep_indices
    if isinstance(big_p, np.ndarray) and big_p.dtype != object:
        return big_p[list(idx)]
    return [Fraction(big_p[j]) for j in idx]


@dataclass(frozen=True)
class DeterministicVertices:
    assignments: tuple[tuple[int, ...], ...]
    raw: tuple[tuple[Fraction, ...], ...]
    distinct: tuple[tuple[Fraction, ...], ...]


def deterministic_vertices(scenario: MarginalScenario, emb: AffineEmbedding) -> DeterministicVertices:
    """Projections of all deterministic assignments, in enumeration order.

    Duplicate projections are kept in `raw` (kappa entries); `distinct`
    deduplicates by exact equality, keeping first occurrences.
    """
    assignments = tuple(scenario.assignments())
    raw = []
    for assig in assignments:
        full = scenario.assignment_full_vector(assig)
        raw.append(tuple(project(emb, full)))
    seen = set()
    distinct = []
    for vec in raw:
        if vec not in seen:
            seen.add(vec)
            distinct.append(vec)
    return DeterministicVertices(assignments, tuple(raw), tuple(distinct))


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    ok: bool


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[CheckResult, ...]
    tol: float

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def max_residual(self) -> float:
        return max((c.residual for c in self.checks), default=0.0)

    def failures(self):
        return [c for c in self.checks if not c.ok]


def validate_model(scenario: MarginalScenario, big_p, tol: float = 1e-9) -> ValidationReport:
    """Check one full probability vector against range, normalization and
    every marginalization identity; one named residual per constraint."""
    vec = np.asarray([float(x) for x in big_p], dtype=float)
    if vec.shape != (scenario.n,):
        raise ScenarioError(f"expected {scenario.n} entries, got {vec.shape}")
    checks = []
    range_residual = float(np.max(np.maximum(-vec, vec - 1.0), initial=0.0))
    checks.append(CheckResult("range[0,1]", max(range_residual, 0.0), range_residual <= tol))
    a, b, names = constraint_system(scenario)
    a_np = np.array([[float(x) for x in row] for row in a])
    b_np = np.array([float(x) for x in b])
    residuals = a_np @ vec - b_np
    for name, res in zip(names, residuals):
        checks.append(CheckResult(name, abs(float(res)), abs(float(res)) <= tol))
    return ValidationReport(tuple(checks), tol)


# ---------------------------------------------------------------------------
# JSON round trip


def scenario_to_json(scenario: MarginalScenario) -> str:
    doc = {
        "observables": [
            {"id": o.id, "outcomes": list(o.outcomes)} for o in scenario.observables
        ],
        "contexts": [list(c.members) for c in scenario.contexts],
    }
    return json.dumps(doc, indent=2)


def scenario_from_json(text: str) -> MarginalScenario:
    doc = json.loads(text)
    try:
        observables = tuple(
            Observable(str(o["id"]), tuple(o["outcomes"])) for o in doc["observables"]
        )
        contexts = tuple(Context(tuple(c)) for c in doc["contexts"])
    except (KeyError, TypeError) as exc:
        raise ScenarioError(f"malformed scenario document: {exc}") from exc
    return MarginalScenario(observables, contexts)


def format_rational(x) -> str:
    f = Fraction(x)
    return f"{f.numerator}/{f.denominator}"


def parse_rational(s) -> Fraction:
    if isinstance(s, str):
        return Fraction(s)
    return Fraction(s)


def embedding_to_json(emb: AffineEmbedding) -> str:
    doc = {
        "m": [[format_rational(x) for x in row] for row in emb.m],
        "v": [format_rational(x) for x in emb.v],
        "t": [list(row) for row in emb.t],
    }
    return json.dumps(doc, indent=2)


def embedding_from_json(text: str) -> AffineEmbedding:
    doc = json.loads(text)
    return AffineEmbedding(
        m=tuple(tuple(parse_rational(x) for x in row) for row in doc["m"]),
        v=tuple(parse_rational(x) for x in doc["v"]),
        t=tuple(tuple(int(x) for x in row) for row in doc["t"]),
    )


# ---------------------------------------------------------------------------
# Built-in KCBS scenario (pairwise contexts around a 5-cycle; the singleton
# contexts are omitted since their probabilities are marginals of the pairs)


def kcbs_scenario() -> MarginalScenario:
    observables = tuple(Observable(f"A{i}", (1, -1)) for i in range(1, 6))
    contexts = tuple(
        Context((f"A{i}", f"A{i % 5 + 1}")) for i in range(1, 6)
    )
    return MarginalScenario(observables, contexts)


def kcbs_embedding() -> AffineEmbedding:
    """The fixed reference embedding for KCBS (independent coordinates =
    first two entries of each context block)."""
    return AffineEmbedding(
        m=tuple(tuple(Fraction(x) for x in row) for row in kcbs_data.KCBS_M),
        v=tuple(Fraction(x) for x in kcbs_data.KCBS_V),
        t=tuple(tuple(int(x) for x in row) for row in kcbs_data.KCBS_T),
    )
