"""Qutrit realization of the KCBS scenario.

Five unit vectors on a cone (the pentagram), one projective dichotomic
observable per vector, and the one-parameter family of states
rho = (1 - lam) I/3 + lam |psi_a><psi_a|.  Everything is real 3x3
arithmetic; no complex numbers are needed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .polytope import facet_check, kcbs_nc_polytope, kcbs_nd_polytope, member
from .scenario import AffineEmbedding, embed, kcbs_embedding

COS_THETA = 5.0 ** -0.25
SIN_THETA = math.sqrt(1.0 - 1.0 / math.sqrt(5.0))
PHIS = (2 * math.pi / 5, 6 * math.pi / 5, 0.0, 4 * math.pi / 5, 8 * math.pi / 5)


@dataclass(frozen=True)
class PentagramVectors:
    v: np.ndarray   # 5 x 3, row i is v_{i+1}

    @cached_property
    def cyclic_overlaps(self) -> np.ndarray:
        return np.array([float(self.v[i] @ self.v[(i + 1) % 5]) for i in range(5)])


def pentagram_vectors() -> PentagramVectors:
    rows = [(COS_THETA, SIN_THETA * math.cos(phi), SIN_THETA * math.sin(phi))
            for phi in PHIS]
    return PentagramVectors(np.array(rows))


@dataclass(frozen=True)
class ContextProjectors:
    """Per context i: projectors for joint outcomes ((+,+),(+,-),(-,+),(-,-))
    of the pair (A_i, A_{i+1}).  The (+,+) projector is the zero operator
    because neighboring vectors are orthogonal."""

    projectors: tuple[tuple[np.ndarray, ...], ...]   # 5 contexts x 4 outcomes

    def context_sum(self, i: int) -> np.ndarray:
        return sum(self.projectors[i])


def context_projectors(vectors: PentagramVectors | None = None) -> ContextProjectors:
    if vectors is None:
        vectors = pentagram_vectors()
    v = vectors.v
    ctxs = []
    for i in range(5):
        vi = v[i]
        vj = v[(i + 1) % 5]
        w = np.cross(vi, vj)
        w = w / np.linalg.norm(w)
        ctxs.append((
            np.zeros((3, 3)),
            np.outer(vi, vi),
            np.outer(vj, vj),
            np.outer(w, w),
        ))
    return ContextProjectors(tuple(ctxs))


@dataclass(frozen=True)
class QutritFamilyParams:
    lam: float
    a: float

    def __post_init__(self):
        if not (0.0 <= self.lam <= 1.0 and 0.0 <= self.a <= 1.0):
            raise ValueError(f"parameters must lie in [0,1]: lam={self.lam}, a={self.a}")


def density_matrix(params: QutritFamilyParams) -> np.ndarray:
    psi = np.array([params.a, math.sqrt(max(0.0, 1.0 - params.a ** 2)), 0.0])
    return (1.0 - params.lam) * np.eye(3) / 3.0 + params.lam * np.outer(psi, psi)


def probabilities(params: QutritFamilyParams,
                  emb: AffineEmbedding | None = None) -> tuple[np.ndarray, np.ndarray]:
    """(independent q, full vector) for the state family.

    Independent coordinates per context are (P(+,+), P(+,-)); the first is
    always 0 and the second has the closed form
    (1 - lam)/3 + lam (a cos(theta) + sqrt(1 - a^2) sin(theta) cos(phi_i))^2.
    The full vector comes from the trace formula and is checked against the
    embedding of the independent vector.
    """
    if emb is None:
        emb = kcbs_embedding()
    lam, a = params.lam, params.a
    q = np.zeros(10)
    for i in range(5):
        amp = a * COS_THETA + math.sqrt(max(0.0, 1.0 - a * a)) * SIN_THETA * math.cos(PHIS[i])
        q[2 * i + 1] = (1.0 - lam) / 3.0 + lam * amp * amp
    rho = density_matrix(params)
    projs = context_projectors()
    full = np.array([float(np.trace(p @ rho))
                     for i in range(5) for p in projs.projectors[i]])
    agreement = float(np.max(np.abs(full - embed(emb, q))))
    if agreement > 1e-12:
        raise AssertionError(f"trace and closed form disagree by {agreement}")
    return q, full


def model_q(lam: float, a: float) -> np.ndarray:
    """Independent probability vector of the (lam, a) state."""
    return probabilities(QutritFamilyParams(lam, a))[0]


def kcbs_value(q) -> float:
    """The pentagon functional: the sum of the five P(+1,-1) entries, i.e.
    q dotted with the first facet normal.  Values above 2 are contextual."""
    q = np.asarray([float(x) for x in q], dtype=float)
    if q.shape != (10,):
        raise ValueError("expected a 10-dimensional independent vector")
    return float(q[1::2].sum())


def ensure_nd_member(q, tol: float = 1e-9) -> np.ndarray:
    """Validate a user-supplied independent vector against the
    non-disturbance polytope; raises ValueError when outside."""
    q = np.asarray([float(x) for x in q], dtype=float)
    if q.shape != (10,):
        raise ValueError("expected a 10-dimensional independent vector")
    res = member(kcbs_nd_polytope(), q, tol=tol, certificate=False)
    if res.status == "outside":
        raise ValueError("vector is outside the non-disturbance polytope")
    return q
