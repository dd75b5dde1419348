import numpy as np
import pytest
import scipy.linalg as la
from hypothesis import given
from hypothesis import strategies as st

from lifshitz_lab.eig import smallest_eigs
from lifshitz_lab.grid import (
    CIRCLE,
    INTERVAL,
    GridDomain,
    GridFunction,
    assemble_operator,
    build_domain,
    reflect_double,
    restrict_circle,
    restrict_operator,
    trace_restrict,
)


def dense_spectrum(op):
    k, m = op.reduced()
    return la.eigh(k.toarray(), np.diag(m), eigvals_only=True)


@st.composite
def domains(draw, max_dim=2, allow_circle=True):
    d = draw(st.integers(1, max_dim))
    n = draw(st.sampled_from([2, 4, 8]))
    cells = tuple(draw(st.integers(1, 3)) for _ in range(d))
    topo = tuple(
        draw(st.sampled_from([INTERVAL, CIRCLE] if allow_circle and c * n >= 3 else [INTERVAL]))
        for c in cells
    )
    return GridDomain(cells, n, topo)


def random_field(dom, seed, scale=5.0):
    rng = np.random.default_rng(seed)
    return GridFunction(dom, scale * rng.standard_normal(dom.num_nodes))


# -- build_domain


def test_interval_node_count():
    assert build_domain(1, (4,), 8).num_nodes == 33


def test_two_dimensional_box_node_count():
    dom = build_domain(2, (1, 2), 4)
    assert dom.shape == (5, 9) and dom.num_nodes == 45


def test_circle_has_no_faces():
    dom = build_domain(1, (4,), 4, CIRCLE)
    assert dom.num_nodes == 16 and dom.faces() == []


@pytest.mark.parametrize(
    "kwargs",
    [dict(cells=(0,), n=4), dict(cells=(2,), n=1), dict(cells=(2,), n=2.5)],
)
def test_invalid_domains_rejected(kwargs):
    with pytest.raises(ValueError):
        build_domain(1, kwargs["cells"], kwargs["n"])


def test_marked_face_on_circle_rejected():
    with pytest.raises(ValueError):
        build_domain(1, (2,), 4, CIRCLE, marked_face=(0, 0))


# -- assemble_operator


def test_one_cell_closed_form():
    dom = build_domain(1, (1,), 4)
    vals = dense_spectrum(assemble_operator(dom, 0.0))
    h = dom.h
    expected = (2 / h**2) * (1 - np.cos(np.arange(5) * np.pi / 4))
    np.testing.assert_allclose(vals, expected, atol=1e-12)
    assert vals[0] == pytest.approx(0.0, abs=1e-12)


@given(domains(), st.floats(-5, 5), st.integers(0, 2**31))
def test_constant_potential_shifts_spectrum(dom, c, seed):
    w = random_field(dom, seed)
    base = dense_spectrum(assemble_operator(dom, w))
    shifted = dense_spectrum(assemble_operator(dom, GridFunction(dom, w.values + c)))
    np.testing.assert_allclose(shifted, base + c, atol=1e-9 * max(1, np.abs(base).max()))


def test_circle_kernel_is_constant():
    dom = build_domain(1, (4,), 4, CIRCLE)
    res = smallest_eigs(assemble_operator(dom, 0.0), 2)
    assert res.values[0] == pytest.approx(0.0, abs=1e-12)
    assert res.values[1] > 0.1
    np.testing.assert_allclose(res.vectors[0], res.vectors[0][0], atol=1e-12)


@given(domains(), st.integers(0, 2**31))
def test_operator_is_bitwise_symmetric(dom, seed):
    op = assemble_operator(dom, random_field(dom, seed))
    k = op.stiffness
    assert (k != k.T).nnz == 0


@given(domains())
def test_constant_is_in_the_null_space(dom):
    op = assemble_operator(dom, 0.0)
    assert op.rayleigh(np.ones(dom.num_nodes)) == 0.0


def test_convergence_order_of_the_neumann_cell():
    errs = []
    for n in (8, 16, 32):
        vals = smallest_eigs(assemble_operator(build_domain(1, (1,), n), 0.0), 4).values[1:]
        errs.append(np.abs(vals - (np.pi * np.arange(1, 4)) ** 2))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all((orders >= 1.8) & (orders <= 2.2)), orders


def test_marked_face_is_eliminated():
    dom = build_domain(1, (1,), 64, marked_face=(0, 0))
    op = assemble_operator(dom, 0.0)
    assert op.reduced()[0].shape == (64, 64)
    lam = smallest_eigs(op, 1).ground_energy
    assert lam == pytest.approx((np.pi / 2) ** 2, rel=1e-3)


# -- traces


def test_trace_of_constant_has_unit_norm():
    dom = build_domain(2, (1, 3), 8)
    tr = trace_restrict(GridFunction(dom, np.ones(dom.num_nodes)), (1, 0))
    np.testing.assert_array_equal(tr.values, 1.0)
    assert tr.norm2() == pytest.approx(1.0, abs=1e-14)


def test_trace_of_height_function_vanishes():
    dom = build_domain(2, (1, 3), 8)
    x = np.broadcast_to(dom.coordinates(1), dom.shape)
    tr = trace_restrict(GridFunction(dom, x), (1, 0))
    np.testing.assert_array_equal(tr.values, 0.0)


def test_ground_state_trace_is_positive():
    dom = build_domain(1, (5,), 8)
    w = GridFunction(dom, 3.0 + np.sin(np.arange(dom.num_nodes)))
    psi = smallest_eigs(assemble_operator(dom, w), 1).ground
    assert trace_restrict(psi, (0, 0)).values[0] > 0


# -- reflection and restriction


def test_reflect_double_of_free_strip():
    op = assemble_operator(build_domain(1, (2,), 8), 0.0)
    hat = reflect_double(op)
    assert hat.domain.cells == (4,) and hat.domain.topology == (CIRCLE,)
    assert smallest_eigs(op, 1).ground_energy == pytest.approx(0.0, abs=1e-12)
    assert smallest_eigs(hat, 1).ground_energy == pytest.approx(0.0, abs=1e-12)


def test_reflect_double_lowers_the_ground_energy():
    dom = build_domain(1, (3,), 8)
    x = dom.coordinates(0)
    op = assemble_operator(dom, GridFunction(dom, 10 * np.exp(-((x - 1.2) ** 2) * 8)))
    hat = reflect_double(op)
    assert smallest_eigs(hat, 1).ground_energy <= smallest_eigs(op, 1).ground_energy + 1e-12


@given(st.integers(1, 3), st.sampled_from([4, 8]), st.integers(0, 2**31))
def test_doubled_spectrum_contains_strip_spectrum(L, n, seed):
    dom = build_domain(1, (L,), n)
    op = assemble_operator(dom, random_field(dom, seed))
    strip = dense_spectrum(op)
    doubled = dense_spectrum(reflect_double(op))
    gaps = np.abs(strip[:, None] - doubled[None, :]).min(axis=1)
    assert gaps.max() <= 1e-8 * max(1.0, np.abs(strip).max())


@given(st.integers(2, 3), st.integers(2, 3), st.integers(0, 2**31))
def test_column_bracketing_holds(L1, L2, seed):
    dom = build_domain(2, (L1, L2), 4)
    op = assemble_operator(dom, random_field(dom, seed))
    box = smallest_eigs(op, 1).ground_energy
    cols = [smallest_eigs(restrict_operator(op, (p, 0), (p + 1, L2)), 1).ground_energy for p in range(L1)]
    assert box >= min(cols) - 1e-9


def test_restrict_circle_window_matches_interval():
    dom = build_domain(1, (3,), 4)
    op = assemble_operator(dom, random_field(dom, 3))
    hat = reflect_double(op)
    window = restrict_circle(hat, 0, 3)
    np.testing.assert_array_equal(window.potential, op.potential)
    wrapped = restrict_circle(hat, 5, 2)
    n = dom.n
    np.testing.assert_array_equal(wrapped.potential[:n], hat.potential[5 * n:])
    np.testing.assert_array_equal(wrapped.potential[n:], hat.potential[: n + 1])
