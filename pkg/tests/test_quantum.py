"""Qutrit realization: pentagram geometry, the state family, and the
pentagon functional."""
import math

import numpy as np
import pytest

from contextua.polytope import facet_check, kcbs_nc_polytope, kcbs_nd_polytope, member
from contextua.quantum_kcbs import (
    COS_THETA,
    PHIS,
    SIN_THETA,
    QutritFamilyParams,
    context_projectors,
    density_matrix,
    ensure_nd_member,
    kcbs_value,
    model_q,
    pentagram_vectors,
    probabilities,
)
from contextua.scenario import embed, kcbs_embedding

SQRT5 = math.sqrt(5.0)


# --- pentagram geometry


def test_pentagram_rows_are_unit_vectors():
    v = pentagram_vectors().v
    assert v.shape == (5, 3)
    assert np.allclose(np.linalg.norm(v, axis=1), 1.0, atol=1e-14)


def test_pentagram_neighbors_orthogonal():
    overlaps = pentagram_vectors().cyclic_overlaps
    assert np.max(np.abs(overlaps)) < 1e-14


def test_cone_angle_constants():
    assert COS_THETA ** 2 + SIN_THETA ** 2 == pytest.approx(1.0, abs=1e-15)
    # cos^2 theta = 1/sqrt(5) pins the symmetric cone
    assert COS_THETA ** 4 == pytest.approx(0.2, abs=1e-15)
    assert len(PHIS) == 5


def test_context_projectors_resolve_identity():
    projs = context_projectors()
    for i in range(5):
        assert np.allclose(projs.context_sum(i), np.eye(3), atol=1e-12)


def test_projectors_idempotent_and_mutually_orthogonal():
    projs = context_projectors()
    for ctx in projs.projectors:
        for p in ctx:
            assert np.allclose(p @ p, p, atol=1e-12)
        for j in range(4):
            for k in range(j + 1, 4):
                assert np.allclose(ctx[j] @ ctx[k], 0.0, atol=1e-12)


# --- state family


def test_density_matrix_is_a_state():
    for lam in np.linspace(0.0, 1.0, 7):
        for a in np.linspace(0.0, 1.0, 7):
            rho = density_matrix(QutritFamilyParams(float(lam), float(a)))
            assert rho.shape == (3, 3)
            assert np.allclose(rho, rho.T, atol=1e-14)
            assert float(np.trace(rho)) == pytest.approx(1.0, abs=1e-14)
            assert np.min(np.linalg.eigvalsh(rho)) > -1e-12


def test_parameters_outside_unit_square_rejected():
    with pytest.raises(ValueError):
        QutritFamilyParams(-0.1, 0.5)
    with pytest.raises(ValueError):
        QutritFamilyParams(0.5, 1.5)
    with pytest.raises(ValueError):
        model_q(2.0, 0.0)


def test_plus_plus_entries_vanish_identically():
    # neighboring projectors are orthogonal, so both-positive never occurs
    for lam, a in [(0.0, 0.0), (0.3, 0.8), (1.0, 1.0), (0.64, 0.11)]:
        q, full = probabilities(QutritFamilyParams(lam, a))
        assert all(x == 0.0 for x in q[0::2])
        assert all(x == 0.0 for x in full[0::4])


def test_trace_formula_matches_closed_form():
    emb = kcbs_embedding()
    for lam in np.linspace(0.0, 1.0, 10):
        for a in np.linspace(0.0, 1.0, 10):
            q, full = probabilities(QutritFamilyParams(float(lam), float(a)))
            assert np.max(np.abs(full - embed(emb, q))) <= 1e-12


def test_full_vector_is_a_probability_vector():
    for lam, a in [(0.0, 0.5), (0.5, 0.0), (1.0, 1.0), (0.77, 0.31)]:
        _, full = probabilities(QutritFamilyParams(lam, a))
        assert np.min(full) >= -1e-15
        assert np.allclose(full.reshape(5, 4).sum(axis=1), 1.0, atol=1e-12)


# --- pentagon functional


def test_maximal_violation_value():
    assert kcbs_value(model_q(1.0, 1.0)) == pytest.approx(SQRT5, abs=1e-9)


def test_value_is_linear_on_the_top_edge():
    # at a = 1 every context contributes (1-lam)/3 + lam/sqrt(5)
    for lam in np.linspace(0.0, 1.0, 21):
        expect = 5.0 * (1.0 - float(lam)) / 3.0 + SQRT5 * float(lam)
        assert kcbs_value(model_q(float(lam), 1.0)) == pytest.approx(expect, abs=1e-12)


def test_threshold_located_by_bisection():
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if kcbs_value(model_q(mid, 1.0)) > 2.0:
            hi = mid
        else:
            lo = mid
    assert 0.5 * (lo + hi) == pytest.approx(1.0 / (3.0 * SQRT5 - 5.0), abs=1e-6)


def test_value_requires_ten_entries():
    with pytest.raises(ValueError):
        kcbs_value([0.2, 0.3])


# --- polytope placement


def test_family_stays_inside_non_disturbance():
    nd = kcbs_nd_polytope()
    for lam in np.linspace(0.0, 1.0, 9):
        for a in np.linspace(0.0, 1.0, 9):
            q = model_q(float(lam), float(a))
            assert member(nd, q, certificate=False).status != "outside"
            np.testing.assert_array_equal(ensure_nd_member(q), q)


def test_ensure_nd_member_rejects_non_members():
    bad = np.zeros(10)
    bad[1] = 2.0
    with pytest.raises(ValueError):
        ensure_nd_member(bad)
    with pytest.raises(ValueError):
        ensure_nd_member([0.1] * 9)


def test_only_the_pentagon_facet_is_ever_violated():
    _, fs = kcbs_nc_polytope()
    worst_rest = -np.inf
    for lam in np.linspace(0.0, 1.0, 9):
        for a in np.linspace(0.0, 1.0, 9):
            slacks = facet_check(fs, model_q(float(lam), float(a)))
            worst_rest = max(worst_rest, float(np.max(slacks[1:])))
    assert worst_rest <= 1e-12
    top = facet_check(fs, model_q(1.0, 1.0))
    assert top[0] == pytest.approx(SQRT5 - 2.0, abs=1e-12)


def test_noncontextual_membership_below_threshold():
    nc, _ = kcbs_nc_polytope()
    # the whole family sits on the zero face, so interior verdicts never occur
    assert member(nc, model_q(0.3, 1.0), certificate=False).status == "boundary"
    assert member(nc, model_q(0.9, 1.0), certificate=False).status == "outside"
