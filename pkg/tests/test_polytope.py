"""Polytopes: built-in data, membership, facet tests, dual consistency."""
from fractions import Fraction

import numpy as np
import pytest

from contextua.polytope import (
    FacetSystem,
    VertexPolytope,
    facet_check,
    facet_member,
    kcbs_nc_polytope,
    kcbs_nd_polytope,
    member,
    polytope_from_json,
    polytope_to_json,
    separating_certificate,
)
from contextua.quantum_kcbs import model_q
from contextua.scenario import embed, kcbs_embedding

ROOT5 = 5.0 ** 0.5


@pytest.fixture(scope="module")
def nc_fs():
    return kcbs_nc_polytope()


@pytest.fixture(scope="module")
def nd():
    return kcbs_nd_polytope()


# --- built-in data


def test_counts(nc_fs, nd):
    nc, fs = nc_fs
    assert nc.size == 32
    assert len(fs.facets) == 16
    assert nd.size == 48


def test_facet_offsets(nc_fs):
    _, fs = nc_fs
    bs = [b for _, b in fs.facets]
    assert bs[0] == 2
    assert bs[1:11] == [1] * 10
    assert bs[11:] == [0] * 5


def test_vertex_33(nd):
    assert nd.vertices[32] == tuple(
        Fraction(x) for x in (0, Fraction(1, 2), Fraction(1, 2), 0,
                              Fraction(1, 2), 0, Fraction(1, 2), 0,
                              Fraction(1, 2), 0))


def test_nc_vertices_prefix_nd(nc_fs, nd):
    nc, _ = nc_fs
    assert nd.vertices[:32] == nc.vertices


def test_vertices_pairwise_distinct(nd):
    assert len(set(nd.vertices)) == 48


def test_duplicate_vertices_rejected():
    with pytest.raises(ValueError):
        VertexPolytope(((Fraction(0),), (Fraction(0),)))


# --- facet_check examples


def test_e1_slacks(nc_fs):
    nc, fs = nc_fs
    slacks = facet_check(fs, nc.vertices[0])
    assert np.all(slacks <= 0)
    assert np.any(slacks == 0)


def test_all_nc_vertices_satisfy_all_facets(nc_fs):
    nc, fs = nc_fs
    for v in nc.vertices:
        assert np.all(facet_check(fs, v) <= 0)


def test_each_facet_tight_on_enough_vertices(nc_fs):
    # a facet of a full-dimensional 10-dim polytope needs >= 10 tight vertices
    nc, fs = nc_fs
    arr = nc.array
    for f, b in fs.facets:
        vals = arr @ np.array([float(x) for x in f]) - float(b)
        assert np.sum(np.isclose(vals, 0.0, atol=1e-12)) >= 10


def test_quantum_point_violates_only_facet_1(nc_fs):
    _, fs = nc_fs
    q = model_q(1.0, 1.0)
    slacks = facet_check(fs, q)
    assert slacks[0] == pytest.approx(ROOT5 - 2.0, abs=1e-9)
    assert np.all(slacks[1:] <= 1e-12)


def test_zero_vector_slacks(nc_fs):
    nc, fs = nc_fs
    zero = nc.vertices[31]
    assert all(x == 0 for x in zero)
    slacks = facet_check(fs, zero)
    bs = np.array([float(b) for _, b in fs.facets])
    assert np.allclose(slacks, -bs)


def test_facet_member_tristate(nc_fs):
    nc, fs = nc_fs
    assert facet_member(fs, nc.vertices[0]) == "boundary"
    assert facet_member(fs, model_q(1.0, 1.0)) == "outside"
    interior = np.mean(nc.array, axis=0)
    assert facet_member(fs, interior) == "inside"


# --- membership LP


def test_midpoint_of_two_vertices(nc_fs):
    nc, _ = nc_fs
    q = (nc.array[0] + nc.array[31]) / 2
    res = member(nc, q)
    assert res.status in ("inside", "boundary")
    assert res.weights is not None
    assert res.weights[0] == pytest.approx(0.5, abs=1e-9)
    assert res.weights[31] == pytest.approx(0.5, abs=1e-9)
    assert res.weights.sum() == pytest.approx(1.0, abs=1e-12)


def test_maximally_mixed_inside(nc_fs):
    nc, _ = nc_fs
    res = member(nc, model_q(0.0, 1.0))
    assert res.status in ("inside", "boundary")
    recon = res.weights @ nc.array
    assert np.max(np.abs(recon - np.asarray(model_q(0.0, 1.0)))) <= 1e-9


def test_quantum_point_outside_with_certificate(nc_fs):
    nc, fs = nc_fs
    q = np.asarray(model_q(1.0, 1.0))
    res = member(nc, q)
    assert res.status == "outside"
    h, h0 = res.certificate
    assert np.max(nc.array @ h) <= h0 + 1e-9
    assert q @ h > h0 + 1e-10
    # the separating direction correlates with facet 1
    f1 = np.array([float(x) for x in fs.facets[0][0]])
    cos = (h @ f1) / (np.linalg.norm(h) * np.linalg.norm(f1))
    assert cos > 0.99


def test_boundary_status_on_vertex(nc_fs):
    nc, _ = nc_fs
    res = member(nc, nc.vertices[0])
    assert res.status == "boundary"
    assert res.weights[0] == pytest.approx(1.0, abs=1e-9)


def test_interior_status(nc_fs):
    nc, _ = nc_fs
    res = member(nc, np.mean(nc.array, axis=0))
    assert res.status == "inside"


def test_separating_certificate_margin_sign(nc_fs):
    nc, _ = nc_fs
    _, _, margin_in = separating_certificate(nc, np.mean(nc.array, axis=0))
    assert margin_in <= 1e-9
    _, _, margin_out = separating_certificate(nc, np.asarray(model_q(1.0, 1.0)))
    assert margin_out > 1e-6


# --- dual consistency and extremality


def test_dual_consistency_sampled(nc_fs, nd):
    # LP membership vs the facet test on random ND points; the acceptance
    # suite repeats this at the full 10,000-point size
    nc, fs = nc_fs
    rng = np.random.default_rng(2024)
    arr = nd.array
    for _ in range(500):
        w = rng.dirichlet(np.full(48, 0.2))
        q = w @ arr
        lp = member(nc, q, certificate=False).status
        ft = facet_member(fs, q)
        assert lp == ft


def test_all_48_nd_vertices_extremal(nd):
    for i in range(48):
        rest = VertexPolytope(nd.vertices[:i] + nd.vertices[i + 1:])
        assert member(rest, nd.vertices[i],
                      certificate=False).status == "outside"


def test_nc_vertices_inside_nd(nc_fs, nd):
    nc, _ = nc_fs
    for v in nc.vertices:
        assert member(nd, v, certificate=False).status != "outside"


def test_nd_membership_equals_full_positivity(nd):
    # ND facets are the 20 positivity conditions on the embedded vector
    emb = kcbs_embedding()
    rng = np.random.default_rng(7)
    arr = nd.array
    agree = 0
    for _ in range(300):
        if rng.uniform() < 0.5:
            w = rng.dirichlet(np.full(48, 0.15))
            q = w @ arr
            q = q + rng.normal(scale=1e-3, size=10)   # may leave the polytope
        else:
            q = rng.uniform(-0.1, 0.6, size=10)
        full = np.array(embed(emb, [float(x) for x in q]), dtype=float)
        by_pos = "outside" if full.min() < -1e-9 else "in"
        by_lp = member(nd, q, certificate=False).status
        assert (by_lp == "outside") == (by_pos == "outside")
        agree += 1
    assert agree == 300


# --- JSON


def test_polytope_json_roundtrip(nd):
    back = polytope_from_json(polytope_to_json(nd))
    assert back.vertices == nd.vertices
