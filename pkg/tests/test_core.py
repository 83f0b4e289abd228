"""Linear algebra layer: spaces, splittings, subspaces, graph unitaries."""

import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maslovflow import core
from maslovflow.errors import (
    Degenerate,
    NotLagrangian,
    NotSkewHermitian,
    UnbalancedSplitting,
)

STD2 = np.array([[1j, 0], [0, -1j]])


def std_space():
    return core.make_space(STD2)


def rand_unitary(rng, n):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def test_make_space_rejects_non_skew():
    with pytest.raises(NotSkewHermitian):
        core.make_space(np.array([[1j, 0.5], [0, -1j]]))


def test_make_space_rejects_singular():
    with pytest.raises(Degenerate):
        core.make_space(np.array([[1j, 0], [0, 0]]))


def test_omega_convention():
    space = std_space()
    x = np.array([1.0, 0.0])
    y = np.array([0.0, 1.0])
    # omega(x, y) = y* J x
    assert space.omega(x, x) == 1j
    assert space.omega(y, y) == -1j
    assert space.omega(x, y) == 0


def test_splitting_dimensions_and_metric_frames():
    rng = np.random.default_rng(5)
    a = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    j = a - a.conj().T
    space = core.make_space(j)
    sp = core.make_splitting(space)
    assert sp.balanced or sp.plus.dim + sp.minus.dim == 6
    k = space.k_operator()
    # K positive on plus, negative on minus
    hp = sp.hframe_plus
    hm = sp.hframe_minus
    npt.assert_allclose(hp.conj().T @ k @ hp, np.eye(sp.plus.dim), atol=1e-10)
    npt.assert_allclose(hm.conj().T @ k @ hm, -np.eye(sp.minus.dim), atol=1e-10)


def test_unbalanced_splitting_has_no_lagrangians():
    j = np.diag([1j, 1j, -1j, 1j])
    space = core.make_space(j)
    sp = core.make_splitting(space)
    assert not sp.balanced
    lam = core.subspace_from_span(np.eye(4)[:, :2])
    with pytest.raises(UnbalancedSplitting):
        core.graph_rep(space, sp, lam)


def test_subspace_from_span_drops_dependent_columns():
    v = np.array([[1.0, 2.0, 1.0], [0.0, 0.0, 1.0]])
    sub = core.subspace_from_span(v)
    assert sub.dim == 2
    sub2 = core.subspace_from_span(np.array([[1.0, 2.0], [1.0, 2.0]]))
    assert sub2.dim == 1


def test_classify_on_c4():
    space = core.make_space(np.kron(np.eye(2), STD2))
    e = np.eye(4)
    lag = core.subspace_from_span((e[:, [0]] + e[:, [1]]) / np.sqrt(2))
    iso = lag  # 1-dim isotropic in C^4 cannot be Lagrangian
    assert core.classify(space, iso) is core.SubspaceClass.ISOTROPIC
    co = core.annihilator(space, iso)
    assert core.classify(space, co) is core.SubspaceClass.COISOTROPIC
    big_lag = core.subspace_from_span(
        np.column_stack([(e[:, 0] + e[:, 1]), (e[:, 2] + e[:, 3])])
    )
    assert core.classify(space, big_lag) is core.SubspaceClass.LAGRANGIAN
    assert core.classify(space, core.subspace_from_span(e[:, [0]])) \
        is core.SubspaceClass.GENERAL


def test_annihilator_is_involutive():
    rng = np.random.default_rng(11)
    a = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    space = core.make_space(a - a.conj().T)
    sub = core.subspace_from_span(rng.normal(size=(6, 2)))
    twice = core.annihilator(space, core.annihilator(space, sub))
    assert core.equal_subspaces(twice, sub)


def test_graph_rep_round_trip():
    rng = np.random.default_rng(3)
    space = std_space()
    sp = core.make_splitting(space)
    u = rand_unitary(rng, 1)
    lam = core.subspace_from_span(sp.hframe_plus + sp.hframe_minus @ u)
    rep = core.graph_rep(space, sp, lam)
    npt.assert_allclose(rep.matrix, u, atol=1e-12)
    assert core.equal_subspaces(rep.subspace(), lam)


def test_graph_rep_rejects_non_lagrangian():
    space = core.make_space(np.kron(np.eye(2), STD2))
    sp = core.make_splitting(space)
    bad = core.subspace_from_span(np.eye(4)[:, :2])  # H+ itself: omega = i I
    with pytest.raises(NotLagrangian):
        core.graph_rep(space, sp, bad)


def test_pair_unitary_intersections():
    space = std_space()
    sp = core.make_splitting(space)

    def lag(theta):
        u = np.array([[np.exp(1j * theta)]])
        return core.subspace_from_span(sp.hframe_plus + sp.hframe_minus @ u)

    lam = lag(0.0)
    for theta, want in [(0.0, 1), (0.5, 0), (np.pi, 0)]:
        w = core.pair_unitary(space, sp, lag(theta), lam)
        phases = np.angle(np.linalg.eigvals(w))
        n_one = int(np.count_nonzero(np.abs(phases) < 1e-8))
        assert n_one == want
        assert core.intersection_dim(lag(theta), lam) == want


def test_pair_index_lagrangian_pair_is_fredholm_zero():
    rng = np.random.default_rng(7)
    space = std_space()
    sp = core.make_splitting(space)
    for _ in range(5):
        u = rand_unitary(rng, 1)
        v = rand_unitary(rng, 1)
        lam = core.subspace_from_span(sp.hframe_plus + sp.hframe_minus @ u)
        mu = core.subspace_from_span(sp.hframe_plus + sp.hframe_minus @ v)
        idx = core.pair_index(space, lam, mu)
        assert idx.index == 0
        assert idx.dim_intersection == idx.codim_sum


def test_boxplus_shapes_and_diagonal():
    space = std_space()
    double = core.boxplus(space, space)
    assert double.dim == 4
    # second summand carries the negated form
    npt.assert_allclose(double.form[2:, 2:], -space.form)
    lam = core.diagonal_subspace(2)
    assert core.classify(double, lam) is core.SubspaceClass.LAGRANGIAN


def test_flip_negates_form():
    space = std_space()
    flipped = core.flip(space)
    npt.assert_allclose(flipped.form, -space.form)


def test_normalize_metric_reconstructs_form():
    rng = np.random.default_rng(13)
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    space = core.make_space(a - a.conj().T)
    g, jprime = core.normalize_metric(space)
    npt.assert_allclose(g @ jprime, space.form, atol=1e-10)
    npt.assert_allclose(jprime @ jprime, -np.eye(4), atol=1e-10)
    evals = np.linalg.eigvalsh(g)
    assert evals.min() > 0


def test_subspace_sum_and_intersection():
    e = np.eye(4)
    a = core.subspace_from_span(e[:, :2])
    b = core.subspace_from_span(e[:, 1:3])
    assert core.subspace_sum(a, b).dim == 3
    inter = core.subspace_intersection(a, b)
    assert inter.dim == 1
    assert inter.contains(e[:, 1])


def test_orthogonal_complement():
    e = np.eye(3)
    sub = core.subspace_from_span(e[:, :1])
    comp = core.orthogonal_complement(sub)
    assert comp.dim == 2
    assert not comp.contains(e[:, 0])


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=1, max_value=4), st.integers(min_value=0, max_value=1000))
def test_graph_rep_round_trip_random(m, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(2 * m, 2 * m)) + 1j * rng.normal(size=(2 * m, 2 * m))
    j = a - a.conj().T
    k = -1j * j
    # rebalance the signature so Lagrangians exist
    theta, vecs = np.linalg.eigh(0.5 * (k + k.conj().T))
    signs = np.array([1.0] * m + [-1.0] * m)
    k_bal = (vecs * (signs * np.maximum(np.abs(theta), 0.5))) @ vecs.conj().T
    space = core.make_space(1j * k_bal)
    sp = core.make_splitting(space)
    u = rand_unitary(rng, m)
    lam = core.subspace_from_span(sp.hframe_plus + sp.hframe_minus @ u)
    rep = core.graph_rep(space, sp, lam)
    npt.assert_allclose(rep.matrix, u, atol=1e-8)
