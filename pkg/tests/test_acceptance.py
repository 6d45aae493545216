"""Acceptance gate: one test per stated criterion, run with -v for the
per-criterion pass/fail lines.  Tolerances appear exactly as stated;
nothing here is loosened to force a pass.
"""

import dataclasses
import time

import numpy as np

from cornergl import spectral
from cornergl.gauge import gauge_transform
from cornergl.glsolver import (
    _VERTEX_CACHE,
    cutoff_function,
    cutoff_identity_check,
    gl_energy,
    ims_check,
    local_quantities,
    supercurrent,
)
from cornergl.eigen import smallest_eigenpair
from cornergl.operators import assemble_kinetic_form, integrate
from cornergl.sector import minimize_sector
from cornergl.spectral import critical_fields, sector_operator

PI = np.pi


def test_01_interior_landau_level(landau_pair):
    lam32, lam64 = landau_pair
    err32, err64 = abs(lam32 - 1.0), abs(lam64 - 1.0)
    print(f"unit-field interior eigenvalue {lam64:.8f} "
          f"(errors {err32:.2e} -> {err64:.2e})")
    assert err64 <= 0.02
    assert err64 < err32


def test_02_edge_constant_anchor():
    t0 = time.perf_counter()
    res = spectral.theta0(seed=1)
    elapsed = time.perf_counter() - t0
    print(f"edge constant {res.extrapolated:.8f} in {elapsed:.1f}s")
    assert abs(res.extrapolated - 0.59) <= 0.02 * 0.59
    assert elapsed < 120.0


def test_03_corner_condition_margins(theta0_default):
    t0 = time.perf_counter()
    r2 = spectral.mu1(PI / 2, seed=1)
    r3 = spectral.mu1(PI / 3, seed=1)
    elapsed = time.perf_counter() - t0
    for res in (r2, r3):
        margin = theta0_default.extrapolated - res.extrapolated
        band = res.uncertainty + theta0_default.uncertainty
        print(f"threshold {res.extrapolated:.7f}, margin {margin:.5f} "
              f"vs band {band:.1e}")
        assert margin > band
    assert elapsed < 300.0


def test_04_trivial_regime_exact(mu1_pi2):
    mu = 0.9 * mu1_pi2.extrapolated
    sol = minimize_sector(mu, PI / 2)
    print(f"E({mu:.4f}, pi/2) = {sol.energy:.2e}, sup {sol.sup:.2e}")
    assert abs(sol.energy) <= 1e-6
    assert sol.sup <= 1e-4


def test_05_concavity_suite(sweep_pi2, sweep_pi3):
    for sweep in (sweep_pi2, sweep_pi3):
        d2 = np.diff(np.asarray(sweep.energies), 2)
        print(f"alpha {sweep.alpha:.4f}: max second difference {d2.max():.2e}")
        assert np.all(d2 <= 2.0 * 1e-8)


def test_06_virial_identity():
    sol = minimize_sector(0.55, PI / 2, radius=10.0, step=0.1)
    m4 = sol.breakdown.mass4
    defect = abs(sol.energy + 0.5 * 0.55 * m4)
    print(f"virial defect {defect:.2e} against |E| {abs(sol.energy):.2e}")
    assert defect <= 1e-3 * abs(sol.energy)


def test_07_slope_quotient_agreement(sweep_pi2):
    sw = sweep_pi2
    n = len(sw.mu_grid)
    agree = [i for i in range(1, n - 1)
             if abs(sw.left_quotients[i] - sw.right_quotients[i])
             <= 2.0 * sw.quotient_errors[i]]
    assert len(agree) >= 3
    for i in sorted(agree)[-3:]:
        mid = 0.5 * (sw.left_quotients[i] + sw.right_quotients[i])
        dev = abs(sw.fh_slopes[i] - mid)
        print(f"mu {sw.mu_grid[i]:.3f}: slope {sw.fh_slopes[i]:.5f} "
              f"vs quotient {mid:.5f}")
        assert dev <= 0.05 * abs(mid)


def test_08_gauge_invariance_twenty(gl_square_15):
    sol = gl_square_15
    grid, links, K, q, ghosts = sector_operator(PI / 2, 8.0, 0.1)
    lam0, _ = smallest_eigenpair(K, q, tol=1e-8, seed=0)
    m2_0 = integrate(sol.grid, sol.field)
    m4_0 = integrate(sol.grid, sol.field, power=4)
    j0 = np.linalg.norm(supercurrent(sol), axis=1)
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(20):
        chi = rng.uniform(-PI, PI, sol.grid.n_nodes)
        w2, links2 = gauge_transform(sol.grid, sol.field, sol.links, chi)
        e2 = gl_energy(sol.grid, w2, links2, sol.params.kappa).total
        worst = max(worst, abs(e2 - sol.energy) / abs(sol.energy))
        m2 = integrate(sol.grid, w2)
        m4 = integrate(sol.grid, w2, power=4)
        worst = max(worst, abs(m2 - m2_0) / m2_0, abs(m4 - m4_0) / m4_0)
        j2 = np.linalg.norm(supercurrent(
            dataclasses.replace(sol, field=w2, links=links2)), axis=1)
        worst = max(worst, np.abs(j2 - j0).max() / max(j0.max(), 1e-30))
        chiw = rng.uniform(-PI, PI, grid.n_nodes)
        _, wl = gauge_transform(grid, np.zeros(grid.n_nodes), links, chiw)
        K2 = assemble_kinetic_form(grid, wl, ghosts=ghosts)
        lam2, _ = smallest_eigenpair(K2, q, tol=1e-8, seed=0)
        worst = max(worst, abs(lam2 - lam0) / lam0)
    print(f"worst relative drift over 20 transforms: {worst:.2e}")
    assert worst <= 1e-10


def test_09_amplitude_bound_all_runs(gl_square_15, gl_square_25,
                                     gl_square_40, gl_square_15_half,
                                     gl_triangle_25):
    sols = (gl_square_15, gl_square_25, gl_square_40, gl_square_15_half,
            gl_triangle_25)
    sup = max(s.supnorm for s in sols)
    print(f"largest supnorm across {len(sols)} polygon runs: {sup:.8f}")
    assert sup <= 1.0 + 1e-6


def test_10_localization_and_decay(concentration_square):
    rep = concentration_square
    fr = [d.outside_fraction for d in rep.decay]
    rates = [d.rate for d in rep.decay]
    print(f"outside fractions {['%.4f' % f for f in fr]}, "
          f"normalized rates {['%.4f' % r for r in rates[-2:]]}")
    assert all(b < a for a, b in zip(fr, fr[1:]))
    assert fr[-1] <= 0.10
    assert abs(rates[-1] - rates[-2]) <= 0.30 * max(rates[-2:])


def test_11_quartic_mass_match(concentration_square):
    devs = concentration_square.trends["dev_l4"]
    print(f"quartic-mass deviations along kappa: "
          f"{['%.4f' % d for d in devs]}")
    assert devs[-1] <= 0.25
    assert all(b <= a * 1.001 for a, b in zip(devs, devs[1:]))


def test_12_scaled_corner_quantities(concentration_square):
    rep = concentration_square
    for key in ("dev_kinetic", "dev_l2"):
        devs = rep.trends[key]
        print(f"{key} along kappa: {['%.4f' % d for d in devs]}")
        assert devs[-1] <= 0.25
        assert all(b <= a * 1.001 for a, b in zip(devs, devs[1:]))
    print(f"interval variants: l2 {rep.matched_l2_variant}, "
          f"kinetic {rep.matched_kinetic_variant}")
    assert rep.matched_l2_variant in ("literal", "mu-scaled")
    assert rep.matched_kinetic_variant in ("literal", "mu-scaled")


def test_13_energy_sum(concentration_square):
    rels = [gc.rel_gap for gc in concentration_square.global_checks]
    print(f"relative energy-sum gaps along kappa: "
          f"{['%.4f' % r for r in rels]}")
    assert rels[-1] <= 0.15
    assert all(b <= a * 1.001 for a, b in zip(rels, rels[1:]))


def test_14_corner_symmetry(gl_square_40):
    masses = [local_quantities(gl_square_40, k).l2mass for k in range(4)]
    spread = (max(masses) - min(masses)) / max(masses)
    print(f"corner l2mass spread at the largest kappa: {spread:.4f}")
    assert spread <= 0.05


def test_15_identity_suites(square, gl_square_15, gl_square_15_half):
    ell, gamma = 0.3, 0.5
    res = []
    for sol in (gl_square_15, gl_square_15_half):
        f = cutoff_function(square, 0, ell, gamma, sol.grid)
        res.append(ims_check(sol, f).residual)
    ratio = res[0] / res[1]
    f = cutoff_function(square, 0, ell, gamma, gl_square_15.grid)
    ident = cutoff_identity_check(gl_square_15, f)
    print(f"localization residual ratio {ratio:.2f}; "
          f"identity residual {ident.residual:.2e} "
          f"within bound {ident.bound:.2e}: {ident.passed}")
    assert 1.4 <= ratio <= 2.6
    assert ident.passed


def test_16_critical_field_tables(square, triangle, pentagon):
    for dom in (square, triangle, pentagon):
        table = critical_fields(dom, 5.0, cache=_VERTEX_CACHE)
        fields = [H for _, _, _, H in table.rows]
        print(f"{dom.n_vertices}-gon: bulk {table.h_c2:.3f} <= "
              f"surface {table.h_surface:.4f} < corners "
              f"{['%.4f' % f for f in fields]}")
        assert table.h_c2 <= table.h_surface < fields[0]
        assert all(a <= b + 1e-12 for a, b in zip(fields, fields[1:]))
