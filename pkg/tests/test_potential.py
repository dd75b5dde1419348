import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lifshitz_lab.grid import GridDomain, CIRCLE, assemble_operator, reflect_double
from lifshitz_lab.potential import (
    AlloyConfiguration,
    BackgroundPotential,
    CouplingConfiguration,
    DisplacementModel,
    SingleSitePotential,
    SiteDistribution,
    alloy_domain,
    check_reflection_symmetry,
    displacement_bump,
    load_sample,
    periodize,
    preset_sample,
    realize_field,
    sample_alloy,
    save_sample,
)


def test_degenerate_distribution():
    cfg = sample_alloy(SiteDistribution((1.0, 0.0, 0.0)), (3, 4), seed=5)
    assert np.all(cfg.types == 0)


def test_sampling_is_deterministic():
    dist = SiteDistribution((0.5, 0.5))
    a = sample_alloy(dist, (2, 2), seed=42, trial=3)
    b = sample_alloy(dist, (2, 2), seed=42, trial=3)
    np.testing.assert_array_equal(a.types, b.types)
    c = sample_alloy(dist, (2, 2), seed=42, trial=4)
    assert a.types.shape == c.types.shape == (2, 2)


def test_sampling_frequency():
    cfg = sample_alloy(SiteDistribution((0.5, 0.5)), (100, 100), seed=1)
    assert abs(np.mean(cfg.types == 0) - 0.5) < 0.02


def test_invalid_distribution():
    with pytest.raises(ValueError):
        SiteDistribution((0.7, 0.7))


def test_zero_field():
    dom = alloy_domain((3, 2), 4)
    zero = SingleSitePotential.from_preset("zero", 2, 4)
    f = realize_field(BackgroundPotential.constant(0.0, 2, 4), [zero, zero],
                      sample_alloy(SiteDistribution((0.5, 0.5)), (3, 2), 0), dom)
    np.testing.assert_array_equal(f.values, 0.0)


def test_disjoint_supports():
    n = 8
    bump = SingleSitePotential.from_preset("cosine_bump", 1, n, amplitude=3.0)
    zero = SingleSitePotential.from_preset("zero", 1, n)
    dom = alloy_domain((2,), n)
    f = realize_field(None, [bump, zero], AlloyConfiguration([0, 1]), dom)
    np.testing.assert_array_equal(f.values[: n + 1], bump.values)
    np.testing.assert_array_equal(f.values[n:], 0.0)


def test_constant_coupling():
    n, lam = 8, 1.7
    V = SingleSitePotential.from_preset("sign_indefinite", 1, n)
    bg = BackgroundPotential.constant(0.3, 1, n)
    dom = alloy_domain((3,), n)
    f = realize_field(bg, [V], CouplingConfiguration(np.full(3, lam), 0.0, 2.0), dom)
    np.testing.assert_allclose(f.values, 0.3 + lam * periodize(V.values, dom), atol=1e-15)


def test_symmetry_examples():
    n = 16
    x = np.arange(n + 1) / n
    assert check_reflection_symmetry(np.cos(2 * np.pi * x), 0) == pytest.approx(0.0, abs=1e-15)
    assert check_reflection_symmetry(x, 0) == 1.0
    dip = preset_sample("mirrored_dipole", 1, n)
    assert check_reflection_symmetry(dip, 0) == pytest.approx(2 * np.abs(dip).max(), rel=1e-12)


def test_declared_symmetry_is_checked():
    dip = preset_sample("mirrored_dipole", 1, 8)
    with pytest.raises(ValueError):
        SingleSitePotential(dip, symmetry_axes=(0,))


@given(st.integers(0, 2**31))
def test_cell_field_depends_only_on_its_type(seed):
    n = 4
    rng = np.random.default_rng(seed)
    sites = [SingleSitePotential(rng.standard_normal((n + 1, n + 1))) for _ in range(3)]
    dom = alloy_domain((3, 3), n)
    t = rng.integers(0, 3, (3, 3))
    f = realize_field(None, sites, AlloyConfiguration(t), dom).values
    for i in range(3):
        for j in range(3):
            block = f[i * n:(i + 1) * n, j * n:(j + 1) * n]
            np.testing.assert_array_equal(block, sites[t[i, j]].values[:n, :n])


@given(st.integers(1, 4), st.integers(0, 2**31))
def test_reflection_compatibility(L, seed):
    n = 4
    rng = np.random.default_rng(seed)
    sites = []
    for _ in range(3):
        v = rng.standard_normal((n + 1, n + 1))
        v[:, 0] = v[:, -1] = 0.0  # faces shared between cells carry one value
        sites.append(SingleSitePotential(v + v[:, ::-1], symmetry_axes=(1,)))
    t = rng.integers(0, 3, (2, L))
    dom = alloy_domain((2, L), n)
    op = assemble_operator(dom, realize_field(None, sites, AlloyConfiguration(t), dom))
    hat = reflect_double(op)
    full = np.concatenate([t, t[:, ::-1]], axis=1)
    ref = realize_field(None, sites, AlloyConfiguration(full), alloy_domain((2, 2 * L), n)).values
    np.testing.assert_array_equal(hat.potential.reshape(hat.domain.shape), ref[:, :-1])


def test_displacement_admissibility():
    n, k = 16, 4
    q = displacement_bump(2, n, k, 5.0)
    model = DisplacementModel(q, n, k)
    assert set(model.displacements) == {(4, 4), (4, 12), (12, 4), (12, 12)}
    for th in model.displacements:
        v = model.site(th).values
        assert np.count_nonzero(v) > 0
        assert np.all(v[0] == 0) and np.all(v[-1] == 0)
        assert np.all(v[:, 0] == 0) and np.all(v[:, -1] == 0)
    with pytest.raises(ValueError):
        DisplacementModel(q, n, k, displacements=((3, 8),) + model.displacements)


def test_sample_round_trip(tmp_path):
    v = preset_sample("ground_state_bump", 2, 8, c=0.3)
    save_sample(tmp_path / "v.txt", v)
    np.testing.assert_array_equal(load_sample(tmp_path / "v.txt"), v)


def test_background_must_be_periodic():
    with pytest.raises(ValueError):
        BackgroundPotential(np.arange(5.0))


def test_presets_are_symmetric():
    for name in ("cosine_bump", "ground_state_bump", "square_well", "sign_indefinite"):
        s = SingleSitePotential.from_preset(name, 2, 8)
        assert s.symmetry_axes == (0, 1), name
