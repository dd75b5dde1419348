import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lifshitz_lab.eig import smallest_eigs
from lifshitz_lab.grid import GridDomain, GridFunction, INTERVAL, assemble_operator
from lifshitz_lab.potential import (
    AlloyConfiguration,
    BackgroundPotential,
    SingleSitePotential,
    SiteDistribution,
    sample_alloy,
)
from lifshitz_lab.spectral import (
    Catalogue,
    EquivalenceReport,
    StripSpec,
    boundary_proportionality,
    bracketing_chain,
    build_site,
    classify_columns,
    dtn_map,
    equivalence_matrix,
    normalize_zero,
    poincare_constant,
    poincare_terms,
    segment_doubled,
    strip_operator,
    strip_scan,
    validate_segments,
)

GS = dict(preset="ground_state_bump", params=dict(c=0.1, radius=0.35), tune=dict(param="scale", lo=0.1, hi=1.5))
DIPOLE = dict(preset="lopsided_dipole", params=dict(depth=10.0), tune=dict(param="barrier", lo=1.0, hi=100.0))


def site(spec, d, n):
    return build_site(spec["preset"], d, n, spec.get("params"), spec.get("tune"))


def zero(d, n):
    return SingleSitePotential.from_preset("zero", d, n)


# -- normalization and cell energies


def test_normalize_constant_background():
    bg = BackgroundPotential.constant(5.0, 2, 8)
    shifted, shift = normalize_zero(bg, [zero(2, 8), zero(2, 8)])
    assert shift == pytest.approx(-5.0, abs=1e-12)
    cat = Catalogue([zero(2, 8), zero(2, 8)], shifted)
    np.testing.assert_allclose(cat.cell_energies(), 0.0, atol=1e-12)


def test_normalize_with_positive_bump():
    bump = SingleSitePotential.from_preset("cosine_bump", 2, 8, amplitude=4.0)
    _, shift = normalize_zero(None, [zero(2, 8), bump])
    assert shift == pytest.approx(0.0, abs=1e-12)
    cat = Catalogue([zero(2, 8), bump])
    assert cat.cell_energy(0) == pytest.approx(0.0, abs=1e-12)
    assert cat.cell_energy(1) > 0.1
    assert cat.zero_sites() == [0]


def test_normalize_sign_indefinite():
    v = SingleSitePotential.from_preset("sign_indefinite", 1, 16, amplitude=5.0, core=4.0)
    e = Catalogue([v]).cell_energy(0)
    assert e < 0
    bg, shift = normalize_zero(None, [v])
    assert shift == pytest.approx(-e, rel=1e-10)
    assert Catalogue([v], bg).cell_energy(0) == pytest.approx(0.0, abs=1e-10)


def test_reflected_site_has_same_energy():
    v = SingleSitePotential.from_preset("mirrored_dipole", 2, 8, amplitude=3.0)
    cat = Catalogue([v, v.reflected(1)])
    assert cat.cell_energy(0) == pytest.approx(cat.cell_energy(1), abs=1e-12)


# -- pair energies and equivalence


def test_symmetric_zero_site_pairs_with_itself():
    cat = Catalogue([site(GS, 2, 8)])
    assert abs(cat.cell_energy(0)) < 1e-10
    assert abs(cat.pair_energy(0, 0, 1)) < 1e-9
    assert abs(cat.pair_energy(0, 0, 0)) < 1e-9


def test_free_pair():
    cat = Catalogue([zero(2, 8), zero(2, 8)])
    assert cat.pair_energy(0, 1) == pytest.approx(0.0, abs=1e-12)


def test_non_equivalent_pair_stays_positive():
    energies = []
    for n in (8, 16):
        cat = Catalogue([zero(2, n), site(DIPOLE, 2, n)])
        energies.append(cat.pair_energy(0, 1))
    assert min(energies) > 1e-3
    assert energies[1] > 0.5 * energies[0]


def test_equivalence_classes():
    v = site(GS, 2, 8)
    rep = equivalence_matrix(Catalogue([v, v]))
    assert rep.classes == ((0, 1),)
    rep = equivalence_matrix(Catalogue([v, v.reflected(1)]))
    assert rep.is_related(0, 1)
    rep = equivalence_matrix(Catalogue([zero(2, 8), v, site(DIPOLE, 2, 8)]))
    assert rep.classes == ((0, 1), (2,))
    assert rep.energies[0, 2] > 10 * rep.tol_equiv
    assert rep.violations == ()
    assert rep.separation > 100


def test_boundary_proportionality():
    n = 16
    cat = Catalogue([zero(2, n), site(GS, 2, n), site(DIPOLE, 2, n)])
    same = boundary_proportionality(cat, 1, 1)
    assert same.deviation < 1e-12 and same.mu2 == pytest.approx(1.0)
    assert boundary_proportionality(cat, 0, 1).deviation < 1e-4
    assert boundary_proportionality(cat, 0, 2).deviation > 1e-2


# -- strips


def test_strip_without_buffer_is_free():
    cat = Catalogue([zero(1, 8)])
    scan = strip_scan(cat, {L: [(0,) * L] for L in (2, 4, 8)})
    np.testing.assert_allclose(scan.lam_min, 0.0, atol=1e-10)


def test_marked_strip_scaling():
    cat = Catalogue([zero(1, 16)])
    scan = strip_scan(cat, {L: [(0,) * L] for L in (2, 4, 8, 16)}, marked_end=True)
    np.testing.assert_allclose(scan.lam_min, (np.pi / (2 * scan.lengths)) ** 2, rtol=1e-2)
    assert scan.fit.slope == pytest.approx(-2.0, abs=0.02)


def test_buffered_strip_layout():
    cat = Catalogue([zero(1, 4), SingleSitePotential.from_preset("constant", 1, 4, value=2.0)])
    op = strip_operator(cat, StripSpec((1, 0), buffer_depth=1, buffer_potential=7.0))
    assert op.domain.cells == (3,)
    np.testing.assert_array_equal(op.potential[:4], 7.0)
    np.testing.assert_array_equal(op.potential[4:8], 2.0)
    np.testing.assert_array_equal(op.potential[8:], 0.0)


# -- Dirichlet-to-Neumann map


def test_dtn_tanh_oracle():
    t = dtn_map(1.0, 1, 0.0, 64)
    assert t.matrix.shape == (1, 1)
    assert t.eps_hat == pytest.approx(np.tanh(1.0), abs=2e-3)
    assert t.symmetry_residual < 1e-10


def test_dtn_free_buffer_boundary_case():
    with pytest.raises(ValueError):
        dtn_map(0.0, 1, 0.0, 16, d=2)
    t = dtn_map(0.0, 1, 0.0, 16, d=2, allow_boundary=True)
    vals, vecs = np.linalg.eigh(t.matrix)
    assert abs(vals[0]) < 1e-10
    v = vecs[:, 0] / np.sqrt(t.weights)
    np.testing.assert_allclose(v / v[0], 1.0, atol=1e-8)


def test_dtn_below_the_buffer_energy():
    t = dtn_map(1.0, 1, 0.5, 64)
    k = np.sqrt(0.5)
    assert 0 < t.eps_hat < np.tanh(1.0)
    assert t.eps_hat == pytest.approx(k * np.tanh(k), abs=2e-3)


@given(st.lists(st.floats(0, 0.95), min_size=2, max_size=5, unique=True))
def test_dtn_monotone(lams):
    lams = sorted(lams)
    eps = [dtn_map(1.0, 1, lam, 8, d=2).eps_hat for lam in lams]
    assert np.all(np.diff(eps) <= 1e-12)


def test_dtn_symmetric_in_two_dimensions():
    dom = GridDomain((1, 2), 8, (INTERVAL, INTERVAL))
    w = 2 + np.random.default_rng(1).random(dom.num_nodes)
    t = dtn_map(w, 2, 0.3, 8, d=2)
    assert t.symmetry_residual < 1e-10
    g = np.random.default_rng(2).standard_normal(len(t.weights))
    assert np.dot(t.weights * g, t.apply(g)) > 0


# -- columns and segments


def synthetic_report(m, related_pairs, M):
    rel = np.eye(m, dtype=bool)
    for a, b in related_pairs:
        rel[a, b] = rel[b, a] = True
    from lifshitz_lab.spectral import _components

    comps = _components(rel)
    return EquivalenceReport(
        1, tuple(range(m)), np.where(rel, 0.0, 1.0), rel,
        tuple(tuple(c) for c in comps), (), 1e-6, 1.0, np.r_[np.zeros(m), np.ones(M - m)],
    )


def test_one_class_gives_b_everywhere():
    rep = synthetic_report(2, [(0, 1)], 2)
    cfg = sample_alloy(SiteDistribution((0.5, 0.5)), (3, 5), 0)
    assert all(c.verdict == "b" for c in classify_columns(cfg, rep))


def test_positive_site_gives_case_i():
    rep = synthetic_report(2, [(0, 1)], 3)
    t = np.array([[0, 2, 1, 0], [2, 0, 0, 1]])
    for c in classify_columns(AlloyConfiguration(t), rep):
        assert c.verdict == "a" and c.witness[0] == "site"
        assert {s.case for s in c.segments} == {"i"}


def test_hand_run_column():
    rep = synthetic_report(2, [], 2)
    cls = classify_columns(AlloyConfiguration(np.array([[0, 1, 0, 0]])), rep)[0]
    assert cls.verdict == "a" and cls.witness == ("pair", 0, 1)
    assert cls.doubled == (0, 1, 0, 0, 0, 0, 1, 0)
    assert all(s.case == "ii" for s in cls.segments)
    assert any(s.types[:2] == (0, 1) for s in cls.segments)
    assert validate_segments(cls.segments, cls.doubled, rep) == []


@given(st.lists(st.integers(0, 3), min_size=1, max_size=12), st.booleans())
def test_segmentation_is_valid(seq, link):
    rep = synthetic_report(3, [(0, 1)] if link else [], 4)
    doubled = tuple(seq) + tuple(seq[::-1])
    zero = set(rep.types)
    heads = any(
        doubled[i] not in zero or (doubled[(i + 1) % len(doubled)] in zero
                                   and not rep.is_related(doubled[i], doubled[(i + 1) % len(doubled)]))
        for i in range(len(doubled))
    )
    if not heads:
        with pytest.raises(ValueError):
            segment_doubled(doubled, rep)
        return
    segs = segment_doubled(doubled, rep)
    assert validate_segments(segs, doubled, rep) == []


# -- bracketing and Poincare


def test_bracketing_chain_small_instance():
    n = 4
    cat = Catalogue([zero(2, n), SingleSitePotential.from_preset("cosine_bump", 2, n, amplitude=5.0)])
    rep = equivalence_matrix(cat)
    cfg = AlloyConfiguration(np.array([[0, 1, 0], [1, 0, 0]]))
    chain = bracketing_chain(cat, cfg, rep)
    assert chain.holds, chain.violations
    assert chain.box >= chain.segment_min - 1e-8 > 0


@given(st.integers(0, 2**31), st.sampled_from([1, 4, 8]), st.sampled_from([1, 2]))
def test_poincare_variant(seed, L, d):
    n = 4
    dom = GridDomain((1,) * (d - 1) + (L,), n, (INTERVAL,) * d)
    op = assemble_operator(dom, 0.0)
    rng = np.random.default_rng(seed)
    phi = rng.standard_normal(dom.num_nodes) + rng.normal() * 5
    b, g, r = poincare_terms(op, GridFunction(dom, phi))
    assert b + g >= r - 5 * dom.h * r


def test_poincare_constant_is_at_least_one():
    for L in (1, 4, 16):
        assert poincare_constant(GridDomain((L,), 8, (INTERVAL,))) >= 1.0
