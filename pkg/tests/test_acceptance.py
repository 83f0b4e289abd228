"""End-to-end acceptance runs.

Each test is one verdict: an exact integer identity between independently
computed quantities, checked at a tight tolerance and, where speed is part of
the contract, inside a wall-clock budget.  One printed pass line each.
"""

import time

import numpy as np
import numpy.linalg as nla
import pytest

from maslovflow import core, flow, harness, maslov, odebvp

STOCK = {sc.name: sc for sc in harness.builtin_scenarios()}


def _stamp(name, detail):
    print(f"{name}: PASS -- {detail}", flush=True)


def test_c1_rotating_boundary_closed_form():
    start = time.perf_counter()
    sc = STOCK["S1"]
    fam, w_path = sc.build()
    sf, sf_rep = odebvp.sf_bvp(fam, w_path, sc.opts)
    mas, _ = odebvp.mas_bvp(fam, w_path, sc.opts)
    assert sf == mas == 1
    # every sampled eigenvalue lies on a branch 2 pi (s + k)
    worst = 0.0
    for s, coords in sf_rep.samples.items():
        for c in coords:
            k = np.round(c / (2.0 * np.pi) - s)
            worst = max(worst, abs(c - 2.0 * np.pi * (s + k)))
    assert worst <= 1e-7
    wall = time.perf_counter() - start
    assert wall < 10.0
    _stamp("acceptance 1", f"S1 sf=mas=+1, river max deviation {worst:.2e}, "
                          f"{wall:.1f}s")


def test_c2_softening_oscillator_closed_form():
    start = time.perf_counter()
    sc = STOCK["S2"]
    fam, w_path = sc.build()
    sf, sf_rep = odebvp.sf_bvp(fam, w_path, sc.opts)
    mas, _ = odebvp.mas_bvp(fam, w_path, sc.opts)
    assert sf == mas == -1
    # the only branch near zero is 1 - 1.5 s
    worst = 0.0
    for s, coords in sf_rep.samples.items():
        for c in coords:
            worst = max(worst, abs(c - (1.0 - 1.5 * s)))
    assert worst <= 1e-7
    wall = time.perf_counter() - start
    assert wall < 30.0
    _stamp("acceptance 2", f"S2 sf=mas=-1, branch max deviation {worst:.2e}, "
                          f"{wall:.1f}s")


def test_c3_varying_structure_grid_stability():
    start = time.perf_counter()
    sc = STOCK["S3"]
    base = harness.run_scenario(sc)
    assert base.error is None
    assert base.agree
    doubled = harness.run_scenario(sc, harness.doubled_opts(sc.opts))
    assert doubled.error is None
    assert doubled.agree
    assert (base.sf, base.mas) == (doubled.sf, doubled.mas)
    wall = time.perf_counter() - start
    assert wall < 60.0
    _stamp("acceptance 3", f"S3 sf=mas={base.sf} stable under doubling "
                          f"of steps/grid/partition, {wall:.1f}s")


def test_c4_periodic_moving_mean_grid_stability():
    sc = STOCK["S5"]
    base = harness.run_scenario(sc)
    assert base.error is None and base.agree
    doubled = harness.run_scenario(sc, harness.doubled_opts(sc.opts))
    assert doubled.error is None and doubled.agree
    assert (base.sf, base.mas) == (doubled.sf, doubled.mas) == (-1, -1)
    _stamp("acceptance 4", "S5 sf=mas=-1, grid-stable")


def test_c5_index_difference_identity():
    # s-flow against the difference of endpoint t-indices, three
    # independent computations per family
    fam2, _ = STOCK["S2"].build()
    out = odebvp.index_difference_check(fam2, None, odebvp.BvpOpts())
    assert out.agree
    assert out.sf == -1

    rng = np.random.default_rng(42)
    fam_r = harness._random_second_order(rng, 2)
    out_r = odebvp.index_difference_check(fam_r, None, odebvp.BvpOpts(steps=1024))
    assert out_r.agree
    _stamp("acceptance 5",
           f"S2: {out.sf} == {out.i_w_end} - ({out.i_w_start}); random "
           f"family: {out_r.sf} == {out_r.i_w_end} - ({out_r.i_w_start})")


def test_c6_property_sweep_full():
    summary = harness.property_sweep(seed=42, trials=50, dims=(2, 4, 6, 8))
    named = (
        "fredholm_index_zero", "unitary_counting", "boxplus_index",
        "product_identities", "flipping", "catenation", "naturality",
        "splitting_independence",
    )
    rows = {row.name: row for row in summary.suites}
    for name in named:
        assert rows[name].failed == 0, f"{name}: {rows[name].first_failure}"
    assert summary.all_passed, [
        (r.name, r.first_failure) for r in summary.suites if r.failed
    ]
    total = sum(r.trials for r in summary.suites)
    _stamp("acceptance 6", f"sweep seed 42: {total} trials over "
                          f"{len(summary.suites)} suites, 100% pass")


def test_c7_real_bridge_residual():
    rng = np.random.default_rng(42)
    jstd = lambda m: np.block([
        [np.zeros((m, m)), -np.eye(m)], [np.eye(m), np.zeros((m, m))]
    ])
    worst = 0.0
    for _ in range(100):
        m = int(rng.integers(1, 5))
        o, _ = nla.qr(rng.standard_normal((2 * m, 2 * m)))
        j = o @ jstd(m) @ o.T
        u0 = harness._random_unitary(rng, m)
        h = harness._random_hermitian(rng, m)
        theta, vecs = nla.eigh(h)

        def u_at(s, u0=u0, theta=theta, vecs=vecs):
            return u0 @ (vecs * np.exp(1j * s * theta)) @ vecs.conj().T

        lam = o @ harness._real_lagrangian_frame(np.eye(m))
        mu_path = lambda s, o=o, u_at=u_at: o @ harness._real_lagrangian_frame(u_at(s))
        data = maslov.RealPairData(j=j, lam=lam, mu_path=mu_path,
                                   interval=(0.0, 1.0))
        cmp = maslov.complexify_and_compare(data)
        assert cmp.mas == -cmp.mas_bf
        worst = max(worst, cmp.residual)
    assert worst <= 1e-9
    _stamp("acceptance 7", f"100 real paths: index negation every trial, "
                          f"worst bridge residual {worst:.2e}")


def test_c8_numerical_certificates():
    # symplectic transport and unit-circle residuals on the stock problems
    reports = harness.run_many(harness.builtin_scenarios())
    for rep in reports:
        assert rep.error is None, (rep.name, rep.error)
        assert rep.residuals["transport"] <= 1e-8, rep.name
        assert rep.residuals["unitary"] <= 1e-8, rep.name

    # spectral projections against an explicit 16-node contour quadrature
    rng = np.random.default_rng(42)
    worst = 0.0
    for _ in range(20):
        n = int(rng.choice([2, 4, 6, 8]))
        center = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        radius = float(rng.uniform(0.5, 1.5))
        k_in = int(rng.integers(1, n))
        inner = center + 0.15 * radius * (
            rng.uniform(-1, 1, k_in) + 1j * rng.uniform(-1, 1, k_in)
        )
        outer = center + radius * rng.uniform(4.0, 6.0, n - k_in) * np.exp(
            1j * rng.uniform(0, 2 * np.pi, n - k_in)
        )
        v = np.eye(n) + 0.3 * (
            rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        ) / np.sqrt(n)
        a = v @ np.diag(np.concatenate([inner, outer])) @ nla.inv(v)
        p = flow.spectral_projection(a, center, radius)
        nodes = center + radius * np.exp(2j * np.pi * (np.arange(16) + 0.5) / 16)
        quad = np.zeros_like(a)
        for z in nodes:
            quad += nla.inv(z * np.eye(n) - a) * (z - center)
        quad /= 16.0
        worst = max(worst, float(np.abs(p - quad).max()))
    assert worst <= 1e-8
    _stamp("acceptance 8", f"transport and unit-circle residuals <= 1e-8 on "
                          f"all scenarios; projection vs quadrature worst "
                          f"{worst:.2e} over 20 matrices")
