"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line (shown in the pytest terminal summary).
"""
import numpy as np
import pytest

from conftest import record
from test_cli import CONFIGS, run
from robinscatter import cgo, maps
from robinscatter.cli import (RADIATION_BOUNDS, born_scaling, cgo_setup, delta_limit,
                              homogeneous_ratio, radiation_scan, surface_wave_fit, validate_images)
from robinscatter.forward import BoundarySamples, PotentialGrid, gaussian_data
from robinscatter.green import PAPER_CONSTANTS, MediumSpec
from robinscatter.periodic import GaussianBasis

ALPHA = 0.3
SLACK = 0.15


@pytest.mark.parametrize("d", [2, 3])
def test_criterion_01_spectral_vs_images(d):
    _, worst = validate_images(d, 1.0, n_pairs=20, seed=0)
    assert record(f"1 (d={d})", worst <= 1e-6, f"max relative error {worst:.2e} (tol 1e-6)")


def test_criterion_02_surface_wave_extraction():
    med = MediumSpec(2, 1.0, 1.0)
    _, _, _, kfit, slope = surface_wave_fit(med, rho_min=50.0, rho_max=400.0)
    rel = abs(kfit - np.sqrt(2)) / np.sqrt(2)
    ok = rel <= 5e-3 and slope <= -1.0
    assert record(2, ok, f"fitted wavenumber {kfit:.7f} (rel err {rel:.1e}, tol 5e-3), "
                         f"remainder slope {slope:.3f} (bound -1)")


@pytest.mark.parametrize("d", [3, 2])
def test_criterion_03_radiation_slopes(d):
    med = MediumSpec(d, 1.0, 1.0)
    scan = radiation_scan(med, [25.0, 50.0, 100.0, 200.0, 400.0], ALPHA, 0.5,
                          n_angles=64 if d == 2 else 32)
    parts, ok = [], True
    for region in ("volume", "surface"):
        bound = RADIATION_BOUNDS[d][region](ALPHA)
        s = scan.slopes[region]
        ok &= s <= bound + SLACK
        parts.append(f"{region} slope {s:.3f} (bound {bound:.2f} + {SLACK})")
    assert record(f"3 (d={d})", ok, ", ".join(parts))


@pytest.mark.parametrize("d,theta", [(2, 1.0), (3, 0.0)])
def test_criterion_04_boundary_delta_factor(d, theta):
    med = MediumSpec(d, 1.0, theta)
    c, cp = PAPER_CONSTANTS[d]
    target = 2 * c * cp
    vals, extra = delta_limit(med, (1e-1, 1e-2, 1e-3), width=0.5, convention="raw")
    rel = abs(extra - target) / target
    assert record(f"4 (d={d}, theta={theta:g})", rel <= 1e-3,
                  f"limit {extra.real:.6f}{extra.imag:+.1e}i vs 2 C C' = {target:.6f} (rel err {rel:.2e}, tol 1e-3)")


@pytest.mark.parametrize("d,theta", [(2, 1.0), (3, 0.0)])
def test_boundary_delta_factor_normalized(d, theta):
    # companion to criterion 4: the same limit in the (Delta + k^2)G = -delta normalization,
    # and the raw limit against 2 C C' (2 pi)^{d-1}
    med = MediumSpec(d, 1.0, theta)
    c, cp = PAPER_CONSTANTS[d]
    _, norm = delta_limit(med, (1e-1, 1e-2, 1e-3), convention="normalized")
    _, raw = delta_limit(med, (1e-1, 1e-2, 1e-3), convention="raw")
    assert abs(norm + 1) <= 1e-3
    assert abs(raw - 2 * c * cp * (2 * np.pi) ** (d - 1)) <= 1e-3 * 2 * c * cp * (2 * np.pi) ** (d - 1)


def _bump_potential(k, n=64, absorb=0.0):
    f = lambda X: k * k + (1 + 1j * absorb) * np.exp(-(X[:, 0] ** 2 + (X[:, 1] - 1.5) ** 2) / 0.2)
    return PotentialGrid.from_function(f, [-1, 0.5], [1, 2.5], [n, n])


def test_criterion_05_born_scaling():
    med = MediumSpec(2, 1.0, 1.0)
    f = gaussian_data(BoundarySamples.uniform(2, 6, 0.1), 0.0, 0.5)
    rem = born_scaling(_bump_potential(1.0), med, f, amplitudes=(0.4, 0.2, 0.1))
    ratios = [a / b for a, b in zip(rem[:-1], rem[1:])]
    ok = all(abs(r / 4 - 1) <= 0.2 for r in ratios)
    assert record(5, ok, "remainder ratios per halving " + ", ".join(f"{r:.3f}" for r in ratios) + " (4 +- 20%)")


def test_criterion_06_homogeneous_problem():
    med = MediumSpec(2, 1.0, 1.0)
    pot = _bump_potential(1.0, n=32, absorb=0.5)
    assert np.all(pot.q.imag > 0)
    f = gaussian_data(BoundarySamples.uniform(2, 6, 0.1), 0.0, 0.5)
    ratio = homogeneous_ratio(pot, med, f)
    assert record(6, ratio <= 1e-6, f"||u(f=0)|| / ||u(f)|| = {ratio:.2e} (tol 1e-6)")


@pytest.fixture(scope="module")
def identity_report():
    return maps.check_identities(None, MediumSpec(2, 1.0, 0.0), basis=GaussianBasis(64, 0.25),
                                 theta1=0.0, theta2=1.0)


def test_criterion_07_operator_identities(identity_report):
    rep = identity_report
    names = ["LN-I", "NL-I", "R(L+t1)-(L+t2)", "S(L+t1)-cI"]
    ok = all(rep[n] <= 1e-3 for n in names)
    c = complex(*rep["c_fit"])
    detail = ", ".join(f"{n} {rep[n]:.1e}" for n in names)
    assert record(7, ok and rep["c_theta2_minus_theta1"],
                  f"{detail}; fitted c = {c.real:.6f}{c.imag:+.1e}i, equal to theta2 - theta1")


def test_criterion_08_rtr_to_dtn_reduction(identity_report):
    err = identity_report["reduced-direct"]
    assert record(8, err <= 1e-3, f"||Lambda(R) - Lambda|| = {err:.1e} (tol 1e-3)")


@pytest.fixture(scope="module")
def cgo_problem():
    return cgo_setup(lambda key, default: default)


def test_criterion_09_cgo_residual_and_contraction(cgo_problem):
    grid, center, q1, q2 = cgo_problem
    conf = cgo.CGOConfig(32.0, center)
    v1, _ = cgo.build_cgo_pair(q1, q2, conf, grid)
    ratios = v1.contraction_ratios
    res = cgo.pde_residual(q1, v1, conf, grid, 1)
    ok = bool(np.all(ratios[1:] < 1)) and res <= 1e-2
    assert record(9, ok, f"contraction ratios {np.array2string(ratios, precision=4)}, "
                         f"relative residual {res:.2e} (tol 1e-2)")


def test_criterion_10_stationary_phase(cgo_problem):
    grid, center, q1, q2 = cgo_problem
    rep = cgo.stationary_phase_scan(q1, q2, cgo.CGOConfig(8.0, center), [8.0, 16.0, 32.0, 64.0], grid)
    halves = np.all(np.abs(rep.leading_ratios / 0.5 - 1) <= 0.15)
    ok = rep.slope < -1 + 0.2 and halves
    assert record(10, ok, f"slope of D(tau) {rep.slope:.3f} (< -1 +- 0.2), leading ratios "
                          + ", ".join(f"{r:.4f}" for r in rep.leading_ratios))


def test_criterion_11_determinism(tmp_path):
    bad = []
    for key, text in sorted(CONFIGS.items()):
        outs = []
        for sub in ("a", "b"):
            base = tmp_path / "-".join(key) / sub
            base.mkdir(parents=True)
            outs.append(run(base, key, text, "--seed", "3", "--no-cache"))
        (c1, o1), (c2, o2) = outs
        files = sorted(p.name for p in o1.iterdir())
        same = c1 == c2 and files == sorted(p.name for p in o2.iterdir()) and all(
            (o1 / n).read_bytes() == (o2 / n).read_bytes() for n in files)
        if not same:
            bad.append(" ".join(key))
    assert record(11, not bad, f"{len(CONFIGS)} subcommands byte-identical on rerun"
                  + (f"; differing: {bad}" if bad else ""))
