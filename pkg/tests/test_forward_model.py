import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sarfocus import (
    ConfigurationError,
    ObservationMatrix,
    PhaseErrorVector,
    RadarParams,
    SceneGrid,
    adjoint_image,
    apply_phase_error,
    build_observation_matrix,
    default_radar_params,
    make_scene_grid,
    sample_phase_errors,
    sigma_for_snr,
    simulate_phase_history,
    wrap_angle,
)
from sarfocus.forward_model import look_angles, radial_wavenumbers

from conftest import random_phase_matrix, single_pixel_grid, small_matrix


def test_table_parameters_give_square_unit_modulus_matrix(radar):
    grid = make_scene_grid(radar, 32, 32)
    C = build_observation_matrix(radar, grid)
    assert C.entries.shape == (1024, 1024)
    assert np.abs(np.abs(C.entries) - 1.0).max() < 1e-12


def test_single_pixel_at_origin_gives_all_ones_column(radar):
    C = build_observation_matrix(radar, single_pixel_grid())
    assert np.allclose(C.entries, 1.0, atol=0.0)


def test_first_pulse_row_matches_direct_kernel_evaluation(radar):
    grid = make_scene_grid(radar, 4, 4)
    C = build_observation_matrix(radar, grid)
    u0 = (2.0 / radar.light_speed_m_s) * radar.carrier_freq_rad_s  # U(t_0), t_0 = tau0
    theta0 = -radar.angular_range_rad / 2.0
    for i, (x, y) in enumerate(grid.pixel_coords):
        expected = np.exp(-1j * u0 * (x * np.cos(theta0) + y * np.sin(theta0)))
        assert abs(C.entries[0, i] - expected) < 1e-12


def test_wavenumber_samples_span_pulse(radar):
    u = radial_wavenumbers(radar, 5)
    lo = (2.0 / radar.light_speed_m_s) * radar.carrier_freq_rad_s
    hi = (2.0 / radar.light_speed_m_s) * (
        radar.carrier_freq_rad_s + 2.0 * radar.chirp_rate_rad_s2 * radar.pulse_duration_s
    )
    assert u[0] == pytest.approx(lo)
    assert u[-1] == pytest.approx(hi)
    assert np.all(np.diff(u) > 0)


def test_look_angles_symmetric(radar):
    theta = look_angles(radar, 9)
    assert theta[4] == 0.0
    assert np.allclose(theta, -theta[::-1])
    assert look_angles(radar, 1) == pytest.approx([0.0])


def test_apply_zero_phase_is_identity(C8):
    phi = PhaseErrorVector(angles=np.zeros(8))
    assert np.array_equal(apply_phase_error(C8, phi).entries, C8.entries)


def test_apply_half_turn_negates(C8):
    phi = PhaseErrorVector(angles=np.full(8, np.pi))
    out = apply_phase_error(C8, phi)
    assert np.abs(out.entries + C8.entries).max() < 1e-12


def test_apply_phase_error_matches_entrywise_oracle(rng):
    C = random_phase_matrix(8, 8, 8, seed=3)
    phi = PhaseErrorVector(angles=rng.uniform(-np.pi, np.pi, 8))
    out = apply_phase_error(C, phi)
    for m in range(8):
        for k in range(8):
            row = m * 8 + k
            expected = C.entries[row] * np.exp(1j * phi.angles[m])
            assert np.abs(out.entries[row] - expected).max() < 1e-15


def test_apply_phase_error_roundtrip(C8, rng):
    phi = PhaseErrorVector(angles=rng.uniform(-np.pi, np.pi, 8))
    back = apply_phase_error(apply_phase_error(C8, phi), PhaseErrorVector(angles=-phi.angles))
    assert np.abs(back.entries - C8.entries).max() < 1e-15


def test_apply_phase_error_length_mismatch(C8):
    with pytest.raises(ConfigurationError):
        apply_phase_error(C8, PhaseErrorVector(angles=np.zeros(5)))


def test_simulate_zero_scene_zero_noise(C8):
    phi = PhaseErrorVector(angles=np.zeros(8))
    g = simulate_phase_history(C8, np.zeros(64, complex), phi, 0.0, seed=0)
    assert np.all(g.samples == 0.0)


def test_simulate_noiseless_matches_naive_matvec(C4, rng):
    f = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    phi = PhaseErrorVector(angles=np.zeros(4))
    g = simulate_phase_history(C4, f, phi, 0.0, seed=0)
    naive = np.array([np.sum(C4.entries[r] * f) for r in range(16)])
    assert np.abs(g.samples - naive).max() < 1e-12


def test_simulate_same_seed_bit_identical(C4, rng):
    f = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    phi = PhaseErrorVector(angles=rng.uniform(-1, 1, 4))
    g1 = simulate_phase_history(C4, f, phi, 0.3, seed=77)
    g2 = simulate_phase_history(C4, f, phi, 0.3, seed=77)
    assert np.array_equal(g1.samples, g2.samples)


def test_simulate_rejects_negative_sigma(C4):
    phi = PhaseErrorVector(angles=np.zeros(4))
    with pytest.raises(ConfigurationError):
        simulate_phase_history(C4, np.zeros(16, complex), phi, -0.1, seed=0)


def test_adjoint_of_zero_is_zero(C8):
    assert np.all(adjoint_image(C8, np.zeros(64, complex)) == 0.0)


def test_adjoint_matches_conjugate_transpose_oracle(C4, rng):
    g = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    naive = np.array([np.sum(np.conj(C4.entries[:, i]) * g) for i in range(16)])
    assert np.abs(adjoint_image(C4, g) - naive).max() < 1e-13


def test_adjoint_single_unit_modulus_column(rng):
    column = np.exp(1j * rng.uniform(-np.pi, np.pi, 16))[:, None]
    C = ObservationMatrix(entries=column, num_apertures=4, samples_per_pulse=4)
    out = adjoint_image(C, column[:, 0])
    assert out.shape == (1,)
    assert abs(out[0] - 16.0) < 1e-12


def test_adjoint_identity_inner_products(C8, rng):
    for _ in range(5):
        f = rng.standard_normal(64) + 1j * rng.standard_normal(64)
        g = rng.standard_normal(64) + 1j * rng.standard_normal(64)
        lhs = np.vdot(g, C8.entries @ f)
        rhs = np.vdot(adjoint_image(C8, g), f)
        assert abs(lhs - rhs) < 1e-10 * np.linalg.norm(f) * np.linalg.norm(g)


def test_grid_spacing_keeps_pixels_inside_patch(radar):
    grid = make_scene_grid(radar, 16, 16)
    r = np.sqrt((grid.pixel_coords**2).sum(axis=1)).max()
    assert r <= radar.patch_radius_m


def test_grid_too_large_for_patch_rejected():
    params = RadarParams(patch_radius_m=1.0)
    with pytest.raises(ConfigurationError):
        make_scene_grid(params, 32, 32)


def test_radar_params_validation():
    with pytest.raises(ConfigurationError):
        RadarParams(pulse_duration_s=0.0)
    with pytest.raises(ConfigurationError):
        RadarParams(angular_range_rad=np.pi)


def test_scene_grid_validation():
    with pytest.raises(ConfigurationError):
        SceneGrid(rows=0, cols=1, pixel_coords=np.zeros((0, 2)))
    with pytest.raises(ConfigurationError):
        SceneGrid(rows=2, cols=2, pixel_coords=np.zeros((3, 2)))


def test_observation_matrix_is_immutable(C4):
    with pytest.raises(ValueError):
        C4.entries[0, 0] = 0.0


def test_phase_errors_wrap_to_principal_interval():
    phi = PhaseErrorVector(angles=[3 * np.pi / 2, -3 * np.pi / 2, 2 * np.pi])
    assert np.all(phi.angles >= -np.pi)
    assert np.all(phi.angles < np.pi)
    assert phi.angles[0] == pytest.approx(-np.pi / 2)
    assert phi.angles[1] == pytest.approx(np.pi / 2)


@settings(max_examples=200)
@given(st.floats(min_value=-50.0, max_value=50.0), st.integers(min_value=-5, max_value=5))
def test_wrap_angle_properties(angle, turns):
    wrapped = wrap_angle(angle)
    assert -np.pi <= wrapped < np.pi
    again = wrap_angle(angle + 2.0 * np.pi * turns)
    assert abs(wrapped - again) < 1e-9


def test_sample_phase_errors_uniform_bounds_and_determinism():
    a = sample_phase_errors(64, dist="uniform", seed=5, max_abs_rad=0.7)
    b = sample_phase_errors(64, dist="uniform", seed=5, max_abs_rad=0.7)
    assert np.array_equal(a.angles, b.angles)
    assert np.abs(a.angles).max() <= 0.7
    c = sample_phase_errors(64, dist="uniform", seed=6, max_abs_rad=0.7)
    assert not np.array_equal(a.angles, c.angles)


def test_sample_phase_errors_polynomial_smooth_and_scaled():
    phi = sample_phase_errors(64, dist="polynomial", seed=2, max_abs_rad=1.2, degree=3)
    assert np.abs(phi.angles).max() == pytest.approx(1.2)
    # low-order polynomial: consecutive differences stay far below the range
    assert np.abs(np.diff(phi.angles)).max() < 0.5


def test_sample_phase_errors_unknown_dist():
    with pytest.raises(ConfigurationError):
        sample_phase_errors(8, dist="lognormal", seed=0)


def test_sigma_for_snr_hits_target(C8, rng):
    f = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    phi = PhaseErrorVector(angles=rng.uniform(-1, 1, 8))
    sigma = sigma_for_snr(C8, f, phi, snr_db=20.0)
    g = C8.entries @ f
    expected_noise_power = 2 * len(g) * sigma**2
    snr = 10 * np.log10(np.linalg.norm(g) ** 2 / expected_noise_power)
    assert snr == pytest.approx(20.0, abs=1e-9)
