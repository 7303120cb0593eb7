"""Measurement maps: validation, preservation, parametrization, transport."""
from fractions import Fraction

import numpy as np
import pytest

from contextua.exactla import rank
from contextua.imm import (
    Imm,
    N_KCBS_ENTRIES,
    g_values,
    identity_imm,
    imm_from_flat,
    imm_from_full,
    imm_from_json,
    imm_to_json,
    is_scenario_preserving,
    kcbs_constraints,
    parametrize_kcbs,
    pinned_identity_rows,
    random_preserving_vertex,
    reduced_map,
    sample_valid_preserving,
    simulate,
    structural_checks,
    validate_imm,
    vertex_transport,
    w_of_y,
    y_of_w,
)
from contextua.kcbs_data import TRANSPORT_1_48_CANDIDATE
from contextua.polytope import kcbs_nd_polytope, member
from contextua.scenario import embed, kcbs_embedding

SIZES = (4, 4, 4, 4, 4)


@pytest.fixture(scope="module")
def emb():
    return kcbs_embedding()


@pytest.fixture(scope="module")
def param():
    return parametrize_kcbs()


@pytest.fixture(scope="module")
def nd():
    return kcbs_nd_polytope()


# --- Imm basics


def test_identity_is_valid():
    w = identity_imm(SIZES)
    rep = validate_imm(w, tol=0.0)
    assert rep.ok
    assert rep.min_entry == 0.0
    assert rep.colsum_error == 0.0


def test_flat_roundtrip():
    rng = np.random.default_rng(0)
    cols = rng.dirichlet(np.ones(4), size=20)   # 20 columns of length 4
    flat = []
    for blk in range(5):
        mat = cols[4 * blk:4 * blk + 4].T
        flat.extend(mat.flatten())
    w = imm_from_flat(flat, SIZES)
    assert validate_imm(w).ok
    assert [float(x) for x in w.flat()] == pytest.approx(flat)


def test_negative_entry_flagged():
    flat = [0.0] * N_KCBS_ENTRIES
    for i in range(5):
        for c in range(4):
            flat[16 * i + 5 * c] = 1.0          # identity blocks
    flat[1] = -0.05
    flat[5] = 1.05
    rep = validate_imm(imm_from_flat(flat, SIZES))
    assert not rep.ok
    assert rep.min_entry == pytest.approx(-0.05)


def test_column_sum_violation_flagged():
    flat = [0.0] * N_KCBS_ENTRIES
    for i in range(5):
        for c in range(4):
            flat[16 * i + 5 * c] = 0.9
    rep = validate_imm(imm_from_flat(flat, SIZES))
    assert not rep.ok
    assert rep.colsum_error == pytest.approx(0.1)


def test_imm_from_full_rejects_cross_block_mixing():
    full = [[Fraction(0)] * 20 for _ in range(20)]
    for i in range(20):
        full[i][i] = Fraction(1)
    full[0][5] = Fraction(1, 2)                 # off-block entry
    with pytest.raises(ValueError):
        imm_from_full(full, SIZES)


# --- constraint system and parametrization


def test_constraint_system_rank_and_nullity(param):
    rows, rhs, names = kcbs_constraints()
    assert len(rows) == 50
    assert rank([list(r) for r in rows]) == 50
    assert param.dim == 30
    assert len(param.basis) == 30


def test_identity_satisfies_system():
    rows, rhs, _ = kcbs_constraints()
    flat = identity_imm(SIZES).flat()
    for row, b in zip(rows, rhs):
        assert sum(r * x for r, x in zip(row, flat)) == b


def test_y_roundtrip_identity(param):
    w = identity_imm(SIZES)
    y = y_of_w(param, w)
    assert all(x == 0 for x in y)
    assert w_of_y(param, y).flat() == w.flat()


def test_y_roundtrip_random(param):
    rng = np.random.default_rng(3)
    for _ in range(10):
        w = sample_valid_preserving(param, rng)
        y = y_of_w(param, w)
        back = w_of_y(param, np.asarray(y, dtype=float))
        assert np.allclose([float(x) for x in back.flat()],
                           [float(x) for x in w.flat()], atol=1e-12)


def test_g_values_sign(param):
    y0 = np.zeros(30)
    assert np.all(g_values(param, y0) <= 0)
    y_bad = np.zeros(30)
    y_bad[0] = -10.0
    assert np.any(g_values(param, y_bad) > 0)


def test_every_chart_point_satisfies_system_exactly(param):
    rng = np.random.default_rng(11)
    rows, rhs, _ = kcbs_constraints()
    a = np.array([[float(x) for x in r] for r in rows])
    b = np.array([float(x) for x in rhs])
    for _ in range(20):
        y = rng.normal(scale=0.5, size=30)
        w = w_of_y(param, y)
        flat = np.array([float(x) for x in w.flat()])
        assert np.max(np.abs(a @ flat - b)) < 1e-12


# --- scenario preservation


def test_identity_preserving(emb):
    rep = is_scenario_preserving(identity_imm(SIZES), emb)
    assert rep.ok
    assert all(r <= 1e-15 for _, r in rep.residuals)


def test_reduced_map_of_identity(emb):
    rm = reduced_map(identity_imm(SIZES), emb)
    assert np.allclose(rm.z, np.eye(10))
    assert np.allclose(rm.v, 0.0)


def test_system_implies_preservation_and_converse(param, emb):
    # equality-system membership and the commutation identities agree both ways
    rng = np.random.default_rng(17)
    rows, rhs, _ = kcbs_constraints()
    a = np.array([[float(x) for x in r] for r in rows])
    b = np.array([float(x) for x in rhs])
    for k in range(60):
        w = sample_valid_preserving(param, rng, scale=0.05)
        assert is_scenario_preserving(w, emb, tol=1e-9).ok
    for k in range(60):
        # random column-stochastic maps generically break the system
        cols = rng.dirichlet(np.ones(4), size=20)
        flat = []
        for blk in range(5):
            flat.extend(cols[4 * blk:4 * blk + 4].T.flatten())
        w = imm_from_flat(flat, SIZES)
        in_system = np.max(np.abs(a @ np.array(flat) - b)) <= 1e-9
        assert is_scenario_preserving(w, emb, tol=1e-9).ok == in_system


def test_perturbed_map_fails_with_named_identity(emb, param):
    rng = np.random.default_rng(5)
    w = sample_valid_preserving(param, rng, scale=0.02)
    flat = [float(x) for x in w.flat()]
    # swap mass inside one column of block 1: keeps stochasticity,
    # breaks the relation system
    flat[0] += 0.01
    flat[8] -= 0.01
    bad = imm_from_flat(flat, SIZES)
    assert validate_imm(bad).ok
    rep = is_scenario_preserving(bad, emb, tol=1e-9)
    assert not rep.ok
    assert any(r > 1e-9 for _, r in rep.residuals)
    assert all(name for name, _ in rep.residuals)


def test_commutation_diagram_on_samples(param, emb, nd):
    # embed(Z c + v) = W embed(c) for scenario-preserving W
    rng = np.random.default_rng(23)
    m = np.array([[float(x) for x in row] for row in emb.m])
    v = np.array([float(x) for x in emb.v])
    for _ in range(20):
        w = sample_valid_preserving(param, rng)
        rm = reduced_map(w, emb)
        wf = np.zeros((20, 20))
        for i, blk in enumerate(w.blocks):
            wf[4 * i:4 * i + 4, 4 * i:4 * i + 4] = [[float(x) for x in r]
                                                    for r in blk]
        for _ in range(5):
            lam = rng.dirichlet(np.full(48, 0.5))
            c = lam @ nd.array
            lhs = m @ (rm.z @ c + rm.v) + v
            rhs = wf @ (m @ c + v)
            assert np.max(np.abs(lhs - rhs)) <= 1e-9


# --- defective reference matrix: regression facts


def test_printed_1_48_matrix_is_column_stochastic():
    w = imm_from_full(TRANSPORT_1_48_CANDIDATE, SIZES)
    assert validate_imm(w, tol=0.0).ok


def test_printed_1_48_matrix_not_preserving(emb):
    w = imm_from_full(TRANSPORT_1_48_CANDIDATE, SIZES)
    assert not is_scenario_preserving(w, emb).ok


def test_printed_1_48_matrix_fixes_e1_instead_of_transporting(emb, nd):
    w = imm_from_full(TRANSPORT_1_48_CANDIDATE, SIZES)
    rm = reduced_map(w, emb)
    e1 = np.array([float(x) for x in nd.vertices[0]])
    e48 = np.array([float(x) for x in nd.vertices[47]])
    img = rm.z @ e1 + rm.v
    assert np.max(np.abs(img - e1)) <= 1e-12
    assert np.max(np.abs(img - e48)) > 0.4


# --- vertex transport


def test_transport_self_is_identity(nd):
    w = vertex_transport(7, 7)
    assert w.flat() == identity_imm(SIZES).flat()


def test_transport_1_48(emb, nd):
    w = vertex_transport(1, 48)
    assert validate_imm(w, tol=1e-12).ok
    assert is_scenario_preserving(w, emb, tol=1e-9).ok
    rm = reduced_map(w, emb)
    e1 = np.array([float(x) for x in nd.vertices[0]])
    e48 = np.array([float(x) for x in nd.vertices[47]])
    assert np.max(np.abs(rm.z @ e1 + rm.v - e48)) <= 1e-9


@pytest.mark.parametrize("pair", [(1, 2), (5, 33), (33, 5), (48, 1),
                                  (17, 41), (33, 48)])
def test_transport_spot_pairs(pair, emb, nd):
    a, b = pair
    w = vertex_transport(a, b)
    assert validate_imm(w, tol=1e-12).ok
    assert is_scenario_preserving(w, emb, tol=1e-9).ok
    rm = reduced_map(w, emb)
    e_a = np.array([float(x) for x in nd.vertices[a - 1]])
    e_b = np.array([float(x) for x in nd.vertices[b - 1]])
    assert np.max(np.abs(rm.z @ e_a + rm.v - e_b)) <= 1e-9


def test_transport_deterministic():
    w1 = vertex_transport(3, 44)
    w2 = vertex_transport(3, 44)
    assert [float(x) for x in w1.flat()] == [float(x) for x in w2.flat()]


def test_transport_bad_index():
    with pytest.raises(ValueError):
        vertex_transport(0, 10)
    with pytest.raises(ValueError):
        vertex_transport(1, 49)


# --- simulate


def test_simulate_identity(emb, nd):
    big = embed(emb, [float(x) for x in nd.vertices[4]])
    out = simulate(identity_imm(SIZES), big)
    assert [float(x) for x in out] == pytest.approx([float(x) for x in big])


def test_simulate_preserves_normalization(param):
    rng = np.random.default_rng(31)
    for _ in range(10):
        w = sample_valid_preserving(param, rng)
        c = rng.dirichlet(np.ones(4), size=5).flatten()
        out = np.array([float(x) for x in simulate(w, c)])
        sums = out.reshape(5, 4).sum(axis=1)
        assert np.allclose(sums, 1.0, atol=1e-12)


def test_transport_mixture_acts_linearly(emb, nd):
    # a mixture of transports from alpha maps e_alpha to the same mixture
    rng = np.random.default_rng(13)
    alpha = 9
    betas = [2, 20, 35, 48]
    lam = rng.dirichlet(np.ones(len(betas)))
    flat = np.zeros(N_KCBS_ENTRIES)
    for lb, b in zip(lam, betas):
        flat += lb * np.array([float(x)
                               for x in vertex_transport(alpha, b).flat()])
    w = imm_from_flat(list(flat), SIZES)
    assert validate_imm(w).ok
    rm = reduced_map(w, emb)
    e_a = np.array([float(x) for x in nd.vertices[alpha - 1]])
    target = sum(lb * nd.array[b - 1] for lb, b in zip(lam, betas))
    assert np.max(np.abs(rm.z @ e_a + rm.v - target)) <= 1e-9


def test_non_expansiveness_on_nd(param, emb, nd):
    # scenario-preserving maps send the ND polytope into itself
    rng = np.random.default_rng(41)
    for _ in range(15):
        w = sample_valid_preserving(param, rng)
        rm = reduced_map(w, emb)
        lam = rng.dirichlet(np.full(48, 0.3))
        c = lam @ nd.array
        img = rm.z @ c + rm.v
        assert member(nd, img, certificate=False).status != "outside"


def test_valid_map_mixtures_stay_valid(param, emb):
    rng = np.random.default_rng(43)
    w1 = sample_valid_preserving(param, rng)
    w2 = sample_valid_preserving(param, rng)
    f1 = np.array([float(x) for x in w1.flat()])
    f2 = np.array([float(x) for x in w2.flat()])
    mix = imm_from_flat(list(0.3 * f1 + 0.7 * f2), SIZES)
    assert validate_imm(mix).ok
    assert is_scenario_preserving(mix, emb, tol=1e-9).ok


# --- structure under pinning


def test_identity_passes_structural_checks():
    rep = structural_checks(identity_imm(SIZES))
    assert rep.ok
    assert rep.identity_blocks == (1, 2, 3, 4, 5)
    assert rep.contiguous


def test_pinned_block_neighbor_structure():
    rng = np.random.default_rng(101)
    rows, rhs = pinned_identity_rows(3)
    for _ in range(40):
        w = random_preserving_vertex(rng, extra_rows=rows, extra_rhs=rhs)
        rep = structural_checks(w, tol=1e-12)
        assert 3 in rep.identity_blocks
        assert rep.ok, [c for c in rep.checks if not c[2]]
        assert rep.contiguous
        assert rep.reading_b


def test_contiguity_on_unpinned_samples(param):
    rng = np.random.default_rng(103)
    for _ in range(40):
        w = random_preserving_vertex(rng)
        rep = structural_checks(w, tol=1e-12)
        assert rep.ok
        assert rep.contiguous


# --- JSON


def test_imm_json_roundtrip_exact():
    w = vertex_transport(2, 37)
    back = imm_from_json(imm_to_json(w))
    assert back.flat() == w.flat()


def test_imm_json_roundtrip_float():
    w = imm_from_flat([0.25] * N_KCBS_ENTRIES, SIZES)
    back = imm_from_json(imm_to_json(w))
    assert [float(x) for x in back.flat()] == [0.25] * N_KCBS_ENTRIES
