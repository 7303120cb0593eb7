"""Polytopes in vertex and facet form, with LP membership.

General scenarios get vertex form plus LP membership only; facet
enumeration is a hard problem and is out of scope.  The KCBS
noncontextuality polytope (32 vertices, 16 facets) and non-disturbance
polytope (48 vertices) are built in with exact rational data.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from . import kcbs_data
from .linprog import LpProblem, solve
from .scenario import format_rational, parse_rational


@dataclass(frozen=True)
class VertexPolytope:
    vertices: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        if not self.vertices:
            raise ValueError("polytope needs at least one vertex")
        dims = {len(v) for v in self.vertices}
        if len(dims) != 1:
            raise ValueError(f"inconsistent vertex dimensions: {sorted(dims)}")
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("duplicate vertices")

    @property
    def dim(self) -> int:
        return len(self.vertices[0])

    @property
    def size(self) -> int:
        return len(self.vertices)

    @cached_property
    def array(self) -> np.ndarray:
        return np.array([[float(x) for x in v] for v in self.vertices])

    @cached_property
    def centroid(self) -> np.ndarray:
        return self.array.mean(axis=0)


@dataclass(frozen=True)
class FacetSystem:
    facets: tuple[tuple[tuple[Fraction, ...], Fraction], ...]
    trivial_mask: tuple[bool, ...]

    def __post_init__(self):
        if len(self.trivial_mask) != len(self.facets):
            raise ValueError("trivial_mask length mismatch")

    @property
    def size(self) -> int:
        return len(self.facets)

    @cached_property
    def f_array(self) -> np.ndarray:
        return np.array([[float(x) for x in f] for f, _ in self.facets])

    @cached_property
    def b_array(self) -> np.ndarray:
        return np.array([float(b) for _, b in self.facets])


@dataclass(frozen=True)
class MembershipResult:
    status: str                      # inside | boundary | outside
    weights: np.ndarray | None       # convex weights over vertices, when in hull
    certificate: tuple | None        # (h, h0) with e.h <= h0 for all vertices, q.h > h0
    margin: float | None             # q.h - h0 for the certificate
    push: float | None               # how far q can move away from the centroid


def member(poly: VertexPolytope, q, tol: float = 1e-9,
           certificate: bool = True) -> MembershipResult:
    """Convex-hull membership with an interior/boundary distinction.

    Maximizes t subject to q + t(q - g) in the hull (g = centroid): an
    infeasible program means q is outside; t* = 0 means q sits on the
    boundary; t* > 0 means there is slack in every direction.
    """
    q = np.asarray([float(x) for x in q], dtype=float)
    if q.shape != (poly.dim,):
        raise ValueError(f"expected dimension {poly.dim}, got {q.shape}")
    kappa = poly.size
    d = q - poly.centroid
    # columns: kappa weights then t
    a_eq = np.zeros((poly.dim + 1, kappa + 1))
    a_eq[:poly.dim, :kappa] = poly.array.T
    a_eq[:poly.dim, kappa] = -d
    a_eq[poly.dim, :kappa] = 1.0
    b_eq = np.concatenate([q, [1.0]])
    c = np.zeros(kappa + 1)
    c[kappa] = 1.0
    upper = np.full(kappa + 1, np.inf)
    upper[kappa] = 1.0
    sol = solve(LpProblem(objective=c, a_eq=a_eq, b_eq=b_eq, upper=upper,
                          sense="max"), tol=tol)
    if sol.status == "optimal":
        lam = sol.x[:kappa]
        t = float(sol.x[kappa])
        if t > tol:
            # recombine exact weights for q itself (pull back toward centroid)
            lam = lam / (1.0 + t) + (t / (1.0 + t)) / kappa
            return MembershipResult("inside", lam, None, None, push=t)
        return MembershipResult("boundary", lam, None, None, push=t)
    if sol.status != "infeasible":
        raise RuntimeError(f"membership LP unexpected status {sol.status}")
    if not certificate:
        return MembershipResult("outside", None, None, None, push=None)
    h, h0, margin = separating_certificate(poly, q, tol)
    return MembershipResult("outside", None, (h, h0), margin, push=None)


def separating_certificate(poly: VertexPolytope, q, tol: float = 1e-9):
    """Hyperplane h, h0 with e.h <= h0 for every vertex but q.h > h0."""
    q = np.asarray([float(x) for x in q], dtype=float)
    ell = poly.dim
    big = 1.0 + float(np.max(np.sum(np.abs(poly.array), axis=1)))
    # variables: h (ell, free in [-1,1]) then h0 (free in [-big, big])
    c = np.concatenate([q, [-1.0]])
    a_ub = np.hstack([poly.array, -np.ones((poly.size, 1))])
    b_ub = np.zeros(poly.size)
    lower = np.concatenate([-np.ones(ell), [-big]])
    upper = np.concatenate([np.ones(ell), [big]])
    sol = solve(LpProblem(objective=c, a_ub=a_ub, b_ub=b_ub,
                          lower=lower, upper=upper, sense="max"), tol=tol)
    if sol.status != "optimal":
        raise RuntimeError(f"separating LP status {sol.status}")
    h = sol.x[:ell]
    h0 = float(sol.x[ell])
    return h, h0, float(q @ h - h0)


def facet_check(fs: FacetSystem, q) -> np.ndarray:
    """Signed slacks q.f_i - b_i; q is inside iff all are <= 0 within tol."""
    q = np.asarray([float(x) for x in q], dtype=float)
    return fs.f_array @ q - fs.b_array


def facet_member(fs: FacetSystem, q, tol: float = 1e-9) -> str:
    worst = float(np.max(facet_check(fs, q)))
    if worst > tol:
        return "outside"
    if worst >= -tol:
        return "boundary"
    return "inside"


def kcbs_nc_polytope() -> tuple[VertexPolytope, FacetSystem]:
    """The 32-vertex noncontextuality polytope and its 16 facets."""
    verts = tuple(tuple(Fraction(x) for x in v) for v in kcbs_data.KCBS_NC_VERTICES)
    facets = tuple((tuple(Fraction(x) for x in f), Fraction(b))
                   for f, b in kcbs_data.KCBS_FACETS)
    # every listed facet is a genuine inequality facet of the hull
    mask = tuple(False for _ in facets)
    return VertexPolytope(verts), FacetSystem(facets, mask)


def kcbs_nd_polytope() -> VertexPolytope:
    """All 48 vertices of the non-disturbance polytope."""
    return VertexPolytope(tuple(kcbs_data.nd_vertices_1_based()))


def polytope_to_json(poly: VertexPolytope) -> str:
    doc = {"vertices": [[format_rational(x) for x in v] for v in poly.vertices]}
    return json.dumps(doc, indent=2)


def polytope_from_json(text: str) -> VertexPolytope:
    doc = json.loads(text)
    return VertexPolytope(
        tuple(tuple(parse_rational(x) for x in v) for v in doc["vertices"]))
