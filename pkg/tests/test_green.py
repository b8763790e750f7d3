import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from robinscatter import green
from robinscatter.exceptions import PoleProximityError, PreconditionError, SingularityError
from robinscatter.green import (FarFieldFrame, MediumSpec, RAW_TO_NORMALIZED, correction_term, correction_values,
                                farfield_expansion, green_free, green_images, green_robin,
                                green_robin_gradient, radiation_residual_scan,
                                robin_boundary_residual, spectral_green_hat, surface_wave_term)

points2 = st.tuples(st.floats(-2, 2), st.floats(0.2, 2))


def test_free_kernel_values(frozen):
    assert green_free([0, 1], [1, 1], MediumSpec(2, 1.0)) == pytest.approx(
        complex(*frozen["green_free_2d_r1"]), rel=1e-14)
    assert green_free([0, 0, 1], [1, 0, 1], MediumSpec(3, 1.0)) == pytest.approx(
        complex(*frozen["green_free_3d_r1"]), rel=1e-14)


def test_free_kernel_coincident_points():
    with pytest.raises(SingularityError):
        green_free([0, 1], [0, 1], MediumSpec(2, 1.0))


def test_dirichlet_images(frozen):
    m = MediumSpec(2, 1.0)
    assert green_images([0, 1], [0, 2], m) == pytest.approx(complex(*frozen["dirichlet_2d_x01_y02"]), rel=1e-13)
    assert green_images([0.4, 0.0], [0, 2], m) == 0


def test_neumann_image_flux_vanishes():
    m = MediumSpec(2, 1.0)
    g = green.green_images_gradient([0.7, 0.0], [0.1, 0.8], m, kind="neumann")
    assert abs(g[-1]) < 1e-15
    with pytest.raises(PreconditionError):
        green_images([0, 1], [0, 2], MediumSpec(2, 1.0, 1.0), kind="neumann")


def test_spectral_hat(frozen):
    m = MediumSpec(3, 1.0, 0.0)
    v = spectral_green_hat(np.sqrt(2), 1.0, 1.0, m)
    assert v == pytest.approx(complex(*frozen["spectral_hat_3d"]), rel=1e-13)


def test_spectral_hat_pole():
    m = MediumSpec(2, 1.0, 1.0)
    with pytest.raises(PoleProximityError):
        spectral_green_hat(np.sqrt(2), 1.0, 1.0, m)


def test_correction_against_contour_oracle(frozen):
    for case in frozen["correction"]:
        m = MediumSpec(case["d"], 1.0, complex(*case["theta"]))
        v = complex(np.ravel(correction_values(m, case["rho"], case["s"]))[0])
        ref = complex(*case["value"])
        assert abs(v - ref) <= 1e-10 * abs(ref), case


@pytest.mark.parametrize("d,theta", [(2, 1.0), (2, 0.5 + 0.5j), (3, 1.0), (3, 0.3j)])
def test_split_and_spectral_routes_agree(d, theta):
    m = MediumSpec(d, 1.0, theta)
    x = np.r_[np.zeros(d - 2), 0.4, 0.9]
    y = np.r_[np.zeros(d - 2), -0.3, 0.5]
    a = green_robin(x, y, m)
    b = green_robin(x, y, m, method="spectral")
    assert abs(a - b) <= 1e-8 * abs(a)


def test_raw_to_normalized_from_images():
    # fit the scalar taking the raw spectral integral to the Neumann image kernel
    rng = np.random.default_rng(3)
    for d in (2, 3):
        m = MediumSpec(d, 1.0, 0.0)
        raw, img = [], []
        for _ in range(5):
            x = np.r_[rng.uniform(-1, 1, d - 1), rng.uniform(0.3, 1.5)]
            y = np.r_[rng.uniform(-1, 1, d - 1), rng.uniform(0.3, 1.5)]
            raw.append(green_robin(x, y, m, method="spectral") / RAW_TO_NORMALIZED[d])
            img.append(green_images(x, y, m, kind="neumann"))
        raw, img = np.array(raw), np.array(img)
        c = np.vdot(raw, img) / np.vdot(raw, raw)
        assert c == pytest.approx(RAW_TO_NORMALIZED[d], rel=1e-8)


@settings(max_examples=20, deadline=None)
@given(points2, points2, st.sampled_from([0.0, 1.0, 0.5 + 0.5j, 2j]))
def test_reciprocity(x, y, theta):
    x, y = np.array(x), np.array(y)
    if np.linalg.norm(x - y) < 0.1:
        return
    m = MediumSpec(2, 1.0, theta)
    a, b = green_robin(x, y, m), green_robin(y, x, m)
    assert abs(a - b) <= 1e-12 * max(1.0, abs(a))


@pytest.mark.parametrize("d,theta", [(2, 1.0), (2, 0.5 + 0.5j), (3, 1.0)])
def test_gradient_matches_finite_differences(d, theta):
    m = MediumSpec(d, 1.0, theta)
    x = np.r_[np.full(d - 1, 0.6), 0.8]
    y = np.r_[np.zeros(d - 1), 0.4]
    g = green_robin_gradient(x, y, m)
    h = 1e-5
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        fd = (green_robin(x + e, y, m) - green_robin(x - e, y, m)) / (2 * h)
        assert abs(fd - g[i]) < 1e-8


@pytest.mark.parametrize("theta", [0.0, 1.0, 0.5 + 0.5j])
def test_helmholtz_residual(theta):
    m = MediumSpec(2, 1.0, theta)
    y = np.array([0.0, 0.5])
    X = np.array([0.7, 1.1])
    h = 1e-3
    g = lambda p: green_robin(p, y, m)
    lap = (g(X + [h, 0]) + g(X - [h, 0]) + g(X + [0, h]) + g(X - [0, h]) - 4 * g(X)) / h ** 2
    assert abs(lap + g(X)) < 1e-5


@pytest.mark.parametrize("theta", [0.0, 1.0, 0.5 + 0.5j])
def test_robin_condition_on_boundary(theta):
    m = MediumSpec(2, 1.0, theta)
    y = np.array([0.2, 0.6])
    x = np.array([-0.5, 0.0])
    val = green_robin_gradient(x, y, m)[-1] + m.theta * green_robin(x, y, m)
    assert abs(val) < 1e-12


def test_large_imaginary_impedance_approaches_dirichlet():
    x, y = np.array([0.3, 0.7]), np.array([-0.2, 1.1])
    ref = green_images(x, y, MediumSpec(2, 1.0), "dirichlet")
    errs = [abs(green_robin(x, y, MediumSpec(2, 1.0, t)) - ref) for t in (10j, 100j, 1000j)]
    assert errs[2] < 1e-3
    assert errs[0] / errs[1] == pytest.approx(10, rel=0.2)


@pytest.mark.parametrize("d,theta", [(2, 1.0), (2, 0.5 + 0.5j), (3, 1.0)])
def test_boundary_residual_vanishes(d, theta):
    m = MediumSpec(d, 1.0, theta)
    y = np.r_[np.zeros(d - 1), 0.5]
    probe = lambda P: np.exp(-np.sum(P ** 2, axis=1))
    assert abs(robin_boundary_residual(y, m, probe=probe)) < 1e-5


def test_boundary_residual_rejects_boundary_source():
    with pytest.raises(PreconditionError):
        robin_boundary_residual([0.0, 0.0], MediumSpec(2, 1.0, 1.0), probe=lambda p: p[:, 0])


def test_correction_decays_in_absorbing_regime():
    m = MediumSpec(2, 1.0, 0.5j)
    v = np.abs(correction_values(m, np.array([10.0, 20.0, 40.0]), 0.5))
    assert v[2] < v[1] < v[0]


def test_farfield_volume_error_decays():
    m = MediumSpec(2, 1.0, 0.5j)
    y = np.array([0.0, 0.5])
    radii = np.array([20.0, 40.0, 80.0, 160.0])
    err = []
    for r in radii:
        x = y + r * np.array([np.cos(1.0), np.sin(1.0)])
        err.append(abs(green_robin(x, y, m) - farfield_expansion(x, y, m)))
    slope = np.polyfit(np.log(radii), np.log(err), 1)[0]
    assert slope < -1.3


def test_nonabsorbing_field_amplitude_along_diagonal():
    m = MediumSpec(2, 1.0, 1.0)
    y = np.array([0.0, 0.5])
    radii = np.array([20.0, 40.0, 80.0, 160.0])
    amp = [abs(green_robin(y + r * np.array([np.cos(np.pi / 4), np.sin(np.pi / 4)]), y, m)) for r in radii]
    assert np.polyfit(np.log(radii), np.log(amp), 1)[0] == pytest.approx(-0.5, abs=0.02)


def test_farfield_rejects_interface_points():
    m = MediumSpec(2, 1.0, 1.0)
    with pytest.raises(PreconditionError):
        farfield_expansion([100.0, 4.0], [0.0, 0.0], m)


def test_surface_wave_along_boundary():
    m = MediumSpec(2, 1.0, 1.0)
    y = np.array([0.0, 0.5])
    x = np.array([300.0, 0.0])
    g = green_robin(x, y, m)
    sw = surface_wave_term(x, y, m)
    assert abs(g - sw) < 0.01 * abs(sw)
    with pytest.raises(PreconditionError):
        surface_wave_term(x, y, MediumSpec(2, 1.0, 1j))


def test_free_field_sommerfeld_residual_3d():
    m = MediumSpec(3, 1.0, 0.0)
    y = np.array([0.0, 0.0, 0.5])
    f = lambda X: green.free_kernel(np.linalg.norm(X - y, axis=1), 3, 1.0)
    scan = radiation_residual_scan(f, m, [25, 50, 100, 200], center=y, n_angles=16)
    assert scan.slopes["sommerfeld"] <= -2 + 1e-3


def test_frame_and_medium_validation():
    f = FarFieldFrame.from_points([3.0, 4.0], [0.0, 0.0])
    assert f.r == 5.0
    with pytest.raises(SingularityError):
        FarFieldFrame.from_points([1.0, 1.0], [1.0, 1.0])
    assert MediumSpec(2, 1.0, 1.0).regime == "nonabsorbing"
    assert MediumSpec(2, 1.0, 1j).regime == "absorbing"
    assert MediumSpec(2, 1.0).regime == "rigid"
    with pytest.raises(PreconditionError):
        MediumSpec(4, 1.0)
    with pytest.raises(PreconditionError):
        MediumSpec(2, -1.0)


def test_spectral_hat_algebra_and_decay():
    m = MediumSpec(2, 1.0, 0.0)
    g = green.branch_sqrt(3.0, 1.0)
    refl, direct = green._hat_terms(3.0, g, 1.0, 0.5, 0.0)
    assert refl * g * np.exp(g * 1.5) == pytest.approx(-1.0)
    vals = [abs(spectral_green_hat(xi, 1.0, 0.5, m)) for xi in (5.0, 10.0, 20.0)]
    assert vals[2] < vals[1] < vals[0] < 1e-2


def test_free_kernel_symmetry():
    rng = np.random.default_rng(5)
    for d in (2, 3):
        m = MediumSpec(d, 1.0)
        for _ in range(50):
            x = np.r_[rng.uniform(-2, 2, d - 1), rng.uniform(0.1, 2)]
            y = np.r_[rng.uniform(-2, 2, d - 1), rng.uniform(0.1, 2)]
            assert green_free(x, y, m) == green_free(y, x, m)


@pytest.mark.parametrize("d", [2, 3])
def test_rigid_kernel_equals_neumann_images(d):
    rng = np.random.default_rng(d)
    m = MediumSpec(d, 1.0, 0.0)
    for _ in range(10):
        x = np.r_[rng.uniform(-1, 1, d - 1), rng.uniform(0.2, 2)]
        y = np.r_[rng.uniform(-1, 1, d - 1), rng.uniform(0.2, 2)]
        a, b = green_robin(x, y, m), green_images(x, y, m, "neumann")
        assert abs(a - b) <= 1e-6 * abs(b)
        assert abs(green_robin_gradient(np.r_[x[:-1], 0.0], y, m)[-1]) < 1e-7


def test_free_gradient_antisymmetry():
    m = MediumSpec(3, 1.0)
    x, y = np.array([0.1, 0.4, 1.2]), np.array([-0.3, 0.2, 0.7])
    assert np.allclose(green.green_free_gradient(x, y, m), -green.green_free_gradient(y, x, m), atol=1e-15)


def test_zero_probe_gives_zero_residual():
    assert robin_boundary_residual([0.0, 1.0], MediumSpec(2, 1.0, 1.0), probe=lambda p: 0 * p[:, 0]) == 0


def test_surface_wave_amplitude_and_wavenumber():
    m = MediumSpec(2, 1.0, 1.0)
    v = surface_wave_term([5.0, 0.0], [0.0, 0.0], m)
    assert abs(v) == pytest.approx(1 / np.sqrt(2))
    assert m.surface_wavenumber == pytest.approx(np.sqrt(2))


def test_surface_wave_dominates_boundary_trace():
    # the bulk far field has 1 - R = 0 at grazing, so G - surface wave is o(1/rho)
    m = MediumSpec(2, 1.0, 1.0)
    y = np.array([0.0, 0.5])
    scaled = [rho * abs(green_robin(np.array([rho, 0.5]), y, m) - surface_wave_term(np.array([rho, 0.5]), y, m))
              for rho in (100.0, 200.0, 400.0)]
    assert scaled[2] < scaled[1] < scaled[0] < 0.05


def test_boundary_trace_amplitude_is_constant():
    m = MediumSpec(2, 1.0, 1.0)
    y = np.array([0.0, 0.5])
    amp = [abs(green_robin(np.array([rho, 0.0]), y, m)) for rho in np.linspace(100, 400, 7)]
    assert max(amp) / min(amp) < 1.05


def test_farfield_reflection_limits():
    frame = FarFieldFrame.from_points([0.0, 0.0, 1.0], [0.0, 0.0, 0.0])
    assert green.reflection_coefficient(MediumSpec(3, 1.0, 0.0), frame) == -1
    grazing = FarFieldFrame.from_points([1.0, 0.0, 0.0], [0.0, 0.0, 0.0])
    assert green.reflection_coefficient(MediumSpec(3, 1.0, 0.7), grazing) == pytest.approx(1.0)
    # theta = 0: volume branch is the far field of the two-image sum
    m = MediumSpec(3, 1.0, 0.0)
    y = np.array([0.0, 0.0, 0.5])
    rel = []
    for r in (400.0, 800.0):
        x = y + r * np.array([0.6, 0.0, 0.8])
        ff = farfield_expansion(x, y, m)
        rel.append(abs(ff - green_images(x, y, m, "neumann")) / abs(ff))
    assert rel[1] < 1e-3 and rel[1] / rel[0] == pytest.approx(0.5, rel=0.05)


def test_farfield_error_rate_nonabsorbing():
    m = MediumSpec(2, 1.0, 1.0)
    y = np.array([0.0, 0.5])
    radii = np.array([100.0, 200.0, 400.0])
    err = [abs(green_robin(y + r * np.array([np.cos(np.pi / 3), np.sin(np.pi / 3)]), y, m)
               - farfield_expansion(y + r * np.array([np.cos(np.pi / 3), np.sin(np.pi / 3)]), y, m))
           for r in radii]
    assert np.polyfit(np.log(radii), np.log(err), 1)[0] <= -1.5 + 0.15


def test_zero_field_scan():
    scan = radiation_residual_scan(lambda X: np.zeros(len(X)), MediumSpec(2, 1.0, 1.0), [10, 20, 40])
    assert all(np.all(v == 0) for v in scan.residuals.values())


@pytest.mark.parametrize("d,expected", [(2, -0.5), (3, -1.0)])
def test_correction_decay_order(d, expected):
    # P_theta itself decays like the free kernel along the boundary; the stronger
    # rho^{-3/2} (2D) rate is a bound for P_theta minus its leading asymptotic term
    m = MediumSpec(d, 1.0, 1 + 1j)
    v = np.abs(correction_values(m, np.array([100.0, 200.0, 400.0]), 1.0))
    assert v[2] < v[0]
    assert np.polyfit(np.log([100, 200, 400]), np.log(v), 1)[0] == pytest.approx(expected, abs=0.2)


def test_correction_continuous_at_zero_impedance():
    r = [abs(np.ravel(correction_values(MediumSpec(2, 1.0, 1j * e), np.array([1.0]), 1.0))[0])
         for e in (1e-2, 1e-3)]
    assert r[1] <= 0.5 * r[0] and r[1] < 1e-3
    assert np.isfinite(correction_term([0.0, 2.0], [0.0, 1.0], MediumSpec(2, 1.0, 0.5j)))
