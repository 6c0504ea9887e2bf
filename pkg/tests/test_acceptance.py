"""Acceptance suite: one test and one printed pass/fail line per criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines; each test also enforces its stated runtime budget.
"""
import math
import time
from contextlib import contextmanager

import numpy as np
import pytest
from numpy.testing import assert_allclose

from chtumor import (
    Field,
    GridSpec,
    HomState,
    Params,
    SchemeConfig,
    SimState,
    absorption,
    absorption_time,
    check_dissipativity,
    classify_regime,
    grad_sq_norm,
    inner,
    integrate,
    invariant_strip,
    laplacian_neumann,
    make_initial,
    make_proliferation,
    make_quartic_potential,
    mean,
    run,
    solve_ch_linear,
    solve_helmholtz,
    stabilization_parameter,
    step,
    x_magnitude,
)
from chtumor.cli import main as cli_main
from chtumor.grid import laplacian_array, norm_l2

QUARTIC = make_quartic_potential()
REF_PARAMS = Params(P=1.0, A=1.0, B=1.0, C=0.5, sigma_s=0.5)
REF_PROLIF = make_proliferation(0.5, -2.0)


@contextmanager
def criterion(num, title, budget_s):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"criterion {num} ({title}): FAIL [{time.perf_counter() - start:.1f}s]")
        raise
    elapsed = time.perf_counter() - start
    verdict = "PASS" if elapsed < budget_s else "FAIL (budget exceeded)"
    print(f"criterion {num} ({title}): {verdict} [{elapsed:.1f}s / budget {budget_s}s]")
    assert elapsed < budget_s


def dense_neumann_1d(n, h):
    m = np.zeros((n, n))
    for j in range(n):
        m[j, j] = -2.0
        if j > 0:
            m[j, j - 1] = 1.0
        else:
            m[j, j] += 1.0
        if j < n - 1:
            m[j, j + 1] = 1.0
        else:
            m[j, j] += 1.0
    return m / (h * h)


def test_criterion_1_discrete_operator_suite():
    with criterion(1, "discrete operator suite", 10.0):
        for cells, lengths in (((64,), (1.0,)), ((64, 64), (1.0, 1.3)),
                               ((64, 64, 64), (1.0, 1.0, 1.0))):
            g = GridSpec(cells, lengths)
            rng = np.random.default_rng(sum(cells))
            f = Field(g, rng.standard_normal(g.cells))
            q = Field(g, rng.standard_normal(g.cells))
            lap = laplacian_neumann(f)

            assert np.all(laplacian_neumann(Field.full(g, 3.0)).values == 0.0)
            conservation = abs(float(np.sum(lap.values)))
            assert conservation <= 1e-12 * float(np.sum(np.abs(lap.values)))
            a = inner(lap, q)
            b = inner(f, laplacian_neumann(q))
            assert abs(a - b) <= 1e-12 * max(abs(a), abs(b))
            assert inner(f, lap) <= 0.0
            sbp = grad_sq_norm(f) + inner(f, lap)
            assert abs(sbp) <= 1e-12 * grad_sq_norm(f)

        # dense-matrix oracle for both solves, 1D n=8
        n = 8
        g = GridSpec((n,), (1.0,))
        lap_dense = dense_neumann_1d(n, 1.0 / n)
        rng = np.random.default_rng(99)
        rhs = rng.standard_normal(n)
        a_coef, b_coef = 1.3, 0.7
        expect = np.linalg.solve(a_coef * np.eye(n) - b_coef * lap_dense, rhs)
        for method in ("dct", "cg"):
            got = solve_helmholtz(a_coef, b_coef, Field(g, rhs), tol=1e-12, method=method)
            assert_allclose(got.values, expect, rtol=1e-10, atol=1e-12)
        dt, s = 1e-3, 2.0
        expect = np.linalg.solve(np.eye(n) + dt * s * (-lap_dense) + dt * (lap_dense @ lap_dense), rhs)
        for method in ("dct", "cg"):
            got = solve_ch_linear(dt, s, Field(g, rhs), tol=1e-12, method=method)
            assert_allclose(got.values, expect, rtol=1e-10, atol=1e-12)


def test_criterion_2_closed_form_certificate():
    with criterion(2, "closed-form certificate reproduction", 1.0):
        cert = check_dissipativity(REF_PARAMS, QUARTIC, REF_PROLIF)
        assert cert.satisfied
        assert classify_regime(REF_PARAMS, REF_PROLIF, QUARTIC).tag == "dissipative"
        assert abs(cert.sigma_upper_limit - 2.0 / 3.0) <= 1e-12
        assert abs(cert.epsilon_max - 1.0 / 6.0) <= 1e-12
        t1 = absorption_time(REF_PARAMS, REF_PROLIF, cert.epsilon_max)
        assert abs(t1 - (4.0 / 3.0) * math.log(2.0)) <= 1e-12
        assert t1 == pytest.approx(0.924, abs=5e-4)


def test_criterion_3_comparison_principle():
    with criterion(3, "nutrient comparison envelopes", 60.0):
        g = GridSpec((256,), (1.0,))
        init = make_initial(g, QUARTIC, "random", mean=0.0, amplitude=1.0, seed=2024)
        assert 0.0 <= init.sigma.values.min() and init.sigma.values.max() <= 1.0
        cfg = SchemeConfig(dt=1e-3, monitor_stride=1)
        report = run(init, 20.0, REF_PARAMS, QUARTIC, REF_PROLIF, cfg, envelope_tol=1e-3)
        assert not report.diverged
        assert len(report.rows) == 20001
        violations = sum(r.violations for r in report.rows)
        assert violations == 0, f"{violations} envelope violations at tolerance 1e-3"


def test_criterion_4_mass_balance():
    with criterion(4, "discrete mass-balance identity", 120.0):
        g = GridSpec((64, 64), (1.0, 1.0))
        state = make_initial(g, QUARTIC, "random", mean=0.0, amplitude=1.0, seed=7)
        cfg = SchemeConfig(dt=1e-3)
        p, prolif = REF_PARAMS, REF_PROLIF
        worst = 0.0
        for _ in range(1000):
            new = step(state, p, QUARTIC, prolif, cfg)
            hv = prolif.h(state.phi.values)
            source = (p.P * new.sigma.values - p.A) * hv
            residual = abs(mean(new.phi) - mean(state.phi) - cfg.dt * float(np.mean(source)))
            s = stabilization_parameter(QUARTIC, float(state.phi.values.min()),
                                        float(state.phi.values.max()))
            rhs = state.phi.values + cfg.dt * laplacian_array(
                np.asarray(QUARTIC.psi_prime(state.phi.values)) - s * state.phi.values,
                g.spacing) + cfg.dt * source
            bound = 10.0 * cfg.linear_tol * float(np.linalg.norm(rhs.ravel()))
            assert residual <= bound
            worst = max(worst, residual / bound)
            state = new
        print(f"  worst residual/bound over 1000 steps: {worst:.2e}")


# gentle rates keep the stepper's first-order error well under the 1e-4
# oracle tolerance at dt = 1e-3 while still exercising every regime tag
ORACLE_SETS = [
    ("dissipative", Params(P=0.2, A=0.2, B=0.2, C=0.1, sigma_s=0.5),
     make_proliferation(0.5, -2.0), (-0.5, 0.9)),
    ("frozen_mass", Params(P=0.2, A=0.2, B=0.2, C=0.1, sigma_s=0.5),
     make_proliferation(0.0, -1.0), (-2.0, 0.3)),
    ("blowup", Params(P=0.2, A=0.1, B=0.05, C=0.1, sigma_s=0.5),
     make_proliferation(1.0, -2.0), (-3.0, 1.0)),
    ("growth_locked", Params(P=0.4, A=0.04, B=0.2, C=0.1, sigma_s=0.9),
     make_proliferation(0.5, -2.0), (1.5, 0.7)),
    ("indeterminate", Params(P=0.2, A=0.1, B=0.2, C=0.1, sigma_s=0.5),
     make_proliferation(0.5, -2.0), (0.3, 0.5)),
]


def test_criterion_5_pde_ode_oracle():
    with criterion(5, "PDE-ODE oracle on constant data", 60.0):
        g = GridSpec((8,), (1.0,))
        for tag, params, prolif, (x0, s0) in ORACLE_SETS:
            assert classify_regime(params, prolif, QUARTIC).tag == tag
            reference = integrate(HomState(x0, s0), 10.0, 1e-3, params, prolif).final
            init = make_initial(g, QUARTIC, "constant", phi0=x0, sigma0=s0)
            cfg = SchemeConfig(dt=1e-3, monitor_stride=10**9)
            report = run(init, 10.0, params, QUARTIC, prolif, cfg)
            assert not report.diverged
            got_phi = mean(report.final_state.phi)
            got_sigma = mean(report.final_state.sigma)
            assert_allclose(got_phi, reference.X, rtol=1e-4, atol=0,
                            err_msg=f"phi mismatch in regime {tag}")
            assert_allclose(got_sigma, reference.S, rtol=1e-4, atol=0,
                            err_msg=f"sigma mismatch in regime {tag}")


def test_criterion_6_homogeneous_phase_structure():
    with criterion(6, "homogeneous phase structure", 30.0):
        lo, hi = invariant_strip(REF_PARAMS, REF_PROLIF)
        rng = np.random.default_rng(2024)
        for _ in range(20):
            start = HomState(rng.uniform(-3.0, 3.0), rng.uniform(lo, hi))
            traj = integrate(start, 100.0, 0.02, REF_PARAMS, REF_PROLIF)
            assert not traj.diverged
            assert traj.S.min() >= lo - 1e-6 and traj.S.max() <= hi + 1e-6

        eq = integrate(HomState(-1.0, REF_PARAMS.sigma_s), 100.0, 0.02, REF_PARAMS, REF_PROLIF)
        assert np.max(np.abs(eq.X + 1.0)) <= 1e-12
        assert np.max(np.abs(eq.S - REF_PARAMS.sigma_s)) <= 1e-12

        blow_params = Params(P=1.0, A=1.0, B=0.5, C=1.0, sigma_s=0.5)
        blow_prolif = make_proliferation(1.0, -2.0)
        traj = integrate(HomState(-3.0, 3.0), 80.0, 0.01, blow_params, blow_prolif)
        assert traj.diverged
        assert np.all(np.diff(traj.X) < 0.0) and np.all(np.diff(traj.S) > 0.0)


def test_criterion_7_dissipativity_in_the_large():
    with criterion(7, "absorbing ball from spread-out initial data", 300.0):
        g = GridSpec((64,), (1.0,))
        initials = [
            make_initial(g, QUARTIC, "tanh_interface", width=0.06, sigma0=0.5),
            make_initial(g, QUARTIC, "constant", phi0=3.0, sigma0=0.5),
            make_initial(g, QUARTIC, "constant", phi0=4.28, sigma0=0.5),
        ]
        mags0 = [x_magnitude(s.phi, s.sigma, QUARTIC) for s in initials]
        for got, target in zip(mags0, (5.0, 20.0, 80.0)):
            assert abs(got - target) <= 0.2 * target, f"initial magnitude {got} != ~{target}"

        cfg = SchemeConfig(dt=2e-3, monitor_stride=50)
        reports = [run(s, 100.0, REF_PARAMS, QUARTIC, REF_PROLIF, cfg) for s in initials]
        assert all(not r.diverged for r in reports)

        # settled magnitudes over the second half of each run must agree
        tails = [max(row.x_magnitude for row in r.rows if row.t >= 50.0) for r in reports]
        assert max(tails) / min(tails) <= 1.2, f"settled magnitudes disagree: {tails}"

        radius = 1.05 * max(tails)  # the empirical common ball
        entries = []
        for r, m0 in zip(reports, mags0):
            rep = absorption(r.rows, radius)
            assert rep.entered, f"run with initial magnitude {m0:.1f} never settled"
            assert rep.entry_time <= 100.0
            assert rep.post_entry_max_magnitude <= radius
            entries.append(rep.entry_time)
        print(f"  empirical radius {radius:.3f}; initial magnitudes "
              f"{[round(m, 2) for m in mags0]}; entry times {[round(t, 2) for t in entries]}; "
              f"settled magnitudes {[round(m, 3) for m in tails]}")


def test_criterion_8_non_dissipative_regimes(tmp_path):
    with criterion(8, "non-dissipative regimes", 30.0):
        # frozen mass: h vanishes below -1, so the mean cannot move
        params = REF_PARAMS
        prolif = make_proliferation(0.0, -1.0)
        g = GridSpec((64,), (1.0,))
        rng = np.random.default_rng(5)
        phi = Field(g, -2.0 + 0.3 * np.sin(np.linspace(0.0, 3.0, 64)))
        state = SimState(0.0, phi, Field(g, np.zeros(64)), Field(g, rng.uniform(0.0, 1.0, 64)))
        report = run(state, 1.0, params, QUARTIC, prolif, SchemeConfig(dt=1e-2, monitor_stride=10))
        drift = max(abs(r.mass - report.rows[0].mass) for r in report.rows)
        assert drift <= 1e-10, f"frozen-mass regime drifted by {drift:.2e}"

        # consumption dominance through the CLI: documented exit code 3
        cfg_text = """
[params]
P = 1.0
A = 1.0
B = 0.5
C = 1.0
sigma_s = 0.5

[h]
h_star = 1.0
phi_star = -2.0

[scheme]
dt = 0.01
t_end = 100.0

[initial]
kind = constant
phi0 = -3.0
sigma0 = 1.0

[output]
dir = {out}
""".format(out=tmp_path / "ode_out")
        cfg_path = tmp_path / "blowup.cfg"
        cfg_path.write_text(cfg_text)
        code = cli_main(["ode", "--config", str(cfg_path)])
        assert code == 3, f"expected exit code 3 for the diverging run, got {code}"
        assert "regime = blowup" in (tmp_path / "ode_out" / "regime.txt").read_text()


def test_criterion_9_temporal_convergence():
    with criterion(9, "temporal convergence orders", 120.0):
        # PDE stepper: first order against a dt = 1e-5 reference
        g = GridSpec((32,), (1.0,))
        init = make_initial(g, QUARTIC, "tanh_interface", width=0.15, sigma0=0.5)

        def final_phi(dt):
            cfg = SchemeConfig(dt=dt, stabilization=2.0, monitor_stride=10**9)
            return run(init, 1.0, REF_PARAMS, QUARTIC, REF_PROLIF, cfg).final_state.phi

        reference = final_phi(1e-5)
        errors = [norm_l2(Field(g, final_phi(dt).values - reference.values))
                  for dt in (4e-3, 2e-3, 1e-3)]
        r1, r2 = errors[0] / errors[1], errors[1] / errors[2]
        assert 1.7 <= r1 <= 2.3, f"first-order ratio {r1} out of range"
        assert 1.7 <= r2 <= 2.3, f"first-order ratio {r2} out of range"

        # RK4: fourth order by self-convergence against a dt/64 reference
        start = HomState(0.2, 0.9)
        ref = integrate(start, 2.0, 0.05 / 64, REF_PARAMS, REF_PROLIF).final
        errs = []
        for dt in (0.05, 0.025):
            fin = integrate(start, 2.0, dt, REF_PARAMS, REF_PROLIF).final
            errs.append(max(abs(fin.X - ref.X), abs(fin.S - ref.S)))
        r4 = errs[0] / errs[1]
        assert 14.0 <= r4 <= 18.0, f"fourth-order ratio {r4} out of range"
        print(f"  stepper ratios {r1:.3f}, {r2:.3f}; RK4 ratio {r4:.2f}")
