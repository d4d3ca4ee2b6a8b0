import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dtb import forward, inversion, mimo, models, siso
from dtb.errors import NonPositive, ShapeMismatch, ValidationError
from dtb.forward import DataSet, Medium2D

# ---------------------------------------------------------------- impedance


def test_reference_against_itself_is_one(small_1d):
    *_, ref_data = small_1d
    est = inversion.impedance_from_data(ref_data, ref_data)
    assert np.all(est.primary_values == 1.0) and np.all(est.dual_values == 1.0)


def test_single_layer_estimate_is_frame_ratio():
    data = DataSet(np.array([3.0, 1.0]), 1.0)
    ref = DataSet(np.array([2.0, 1.0]), 1.0)
    est = inversion.impedance_from_data(data, ref, 1)
    assert est.primary_values[0] == pytest.approx(3.0 / 2.0)
    assert est.primary_nodes[0] == 0.0


def test_nodes_advance_by_reference_coefficients(small_1d):
    *_, ref_data = small_1d
    f0 = siso.factor_from_data(ref_data)
    est = inversion.impedance_estimates(f0, f0)
    np.testing.assert_allclose(np.diff(est.primary_nodes), f0.gammas[:-1])
    np.testing.assert_allclose(est.dual_nodes, np.cumsum(f0.gamma_hats))


def test_impedance_rejects_bad_factors(small_1d):
    *_, ref_data = small_1d
    f0 = siso.factor_from_data(ref_data)
    bad = siso.SisoFactor(f0.l_tilde, -f0.gammas, f0.gamma_hats, f0.tau, f0.d0)
    with pytest.raises(NonPositive):
        inversion.impedance_estimates(bad, f0)
    with pytest.raises(ShapeMismatch):
        inversion.impedance_estimates(siso.factor_from_data(ref_data, 5), f0)


def test_piecewise_constant_layers_at_grid_scale():
    p = forward.Pulse(1.2, 0.9)
    prof = models.layered_profile([20.0, 45.0], [1.5, 0.8])
    med = forward.Medium1D.from_profile(prof, 100.0, 2000)
    ref = forward.Medium1D.homogeneous(100.0, 2000)
    n = 80
    d = forward.simulate_spectral(med, p, 1.0, 2 * n)
    d0 = forward.simulate_spectral(ref, p, 1.0, 2 * n)
    scale = forward.unit_grid_scale(p, 1.0, d0.scalar[0])
    est = inversion.impedance_from_data(d.scaled(scale), d0.scaled(scale), n)
    idx = np.arange(n)
    far = np.min(np.abs(est.primary_nodes[:, None] - np.array([20.0, 45.0])), axis=1) > 3
    keep = far & (idx >= 3) & (idx < n - 3)
    err = np.abs(est.primary_values / prof(est.primary_nodes) - 1)[keep]
    assert err.max() <= 0.05


def test_matrix_report_on_reference(small_2d):
    *_, ref_data = small_2d
    f0 = mimo.factor_from_data(ref_data)
    for row in inversion.matrix_impedance_report(f0, f0):
        np.testing.assert_allclose(row["primary"], 1.0, rtol=1e-10)
        np.testing.assert_allclose(row["dual"], 1.0, rtol=1e-10)


# ---------------------------------------------------------------- travel times


def test_fast_marching_constant_speed():
    c = np.ones((20, 30))
    med = Medium2D(1.0, c, c, [15])
    exact = inversion.travel_times(med, 15, "analytic")
    fmm = inversion.travel_times(med, 15, "fmm")
    # grid-aligned rays are exact for first-order marching
    np.testing.assert_allclose(fmm[0], exact[0], atol=1e-12)
    np.testing.assert_allclose(fmm[:, 15], exact[:, 15], atol=1e-12)
    far = exact >= 10
    assert np.max(np.abs(fmm[far] / exact[far] - 1)) <= 0.08


@given(st.floats(0.5, 3.0), st.floats(0.2, 2.0))
def test_fast_marching_scales_with_speed_and_spacing(speed, h):
    c = np.full((8, 9), speed)
    base = inversion.fast_marching(np.ones((8, 9)), 1.0, {(0, 4): 0.0})
    scaled = inversion.fast_marching(c, h, {(0, 4): 0.0})
    np.testing.assert_allclose(scaled, base * h / speed, rtol=1e-12)


def test_fast_marching_is_causal_in_slow_layer():
    c = np.ones((15, 15))
    c[8:] = 0.5
    t = inversion.fast_marching(c, 1.0, {(0, 7): 0.0})
    assert np.all(np.diff(t[:, 7]) > 0)
    np.testing.assert_allclose(np.diff(t[8:, 7]), 2.0)


def test_travel_time_method_selection():
    c = np.ones((6, 6))
    c[3:] = 2.0
    med = Medium2D(1.0, c, c, [2])
    with pytest.raises(ValidationError):
        inversion.travel_times(med, 2, "analytic")
    with pytest.raises(ValidationError):
        inversion.travel_times(med, 2, "guess")
    np.testing.assert_array_equal(inversion.travel_times(med, 2), inversion.fast_marching(c, 1.0, {(0, 2): 0.0}))
    with pytest.raises(ValidationError):
        inversion.fast_marching(np.zeros((3, 3)), 1.0, {(0, 0): 0.0})


# ---------------------------------------------------------------- imaging


@pytest.fixture(scope="module")
def point_reflector():
    ny, nx = 32, 48
    sigma = np.ones((ny, nx))
    sigma[12:14, 23:25] = 2.0
    sensors = [14, 19, 24, 29, 34]
    med = Medium2D(1.0, sigma, np.ones_like(sigma), sensors)
    ref = Medium2D(1.0, np.ones_like(sigma), np.ones_like(sigma), sensors)
    p = forward.Pulse(0.5, 0.25)
    scattered = forward.simulate_spectral(med, p, 3.0, 24) - forward.simulate_spectral(ref, p, 3.0, 24)
    support = np.zeros((ny, nx), dtype=bool)
    support[12:14, 23:25] = True
    return ref, scattered, support


def test_zero_data_zero_image(point_reflector):
    ref, scattered, _ = point_reflector
    img = inversion.rtm_image(DataSet(np.zeros_like(scattered.frames), scattered.tau), ref)
    assert np.all(img.values == 0)


def test_point_reflector_localized(point_reflector):
    ref, scattered, support = point_reflector
    img = inversion.rtm_image(scattered, ref)
    assert inversion.peak_distance(img, support, window=40) <= 2.0


def test_image_is_additive(point_reflector):
    ref, scattered, _ = point_reflector
    rng = np.random.default_rng(7)
    noise = rng.standard_normal(scattered.frames.shape)
    other = DataSet(noise + noise.transpose(0, 2, 1), scattered.tau)
    total = inversion.rtm_image(scattered + other, ref).values
    parts = inversion.rtm_image(scattered, ref).values + inversion.rtm_image(other, ref).values
    assert np.abs(total - parts).max() <= 1e-10 * np.abs(total).max()


def test_rtm_sensor_mismatch(point_reflector):
    ref, scattered, _ = point_reflector
    with pytest.raises(ShapeMismatch):
        inversion.rtm_image(DataSet(scattered.frames[:, :2, :2], scattered.tau), ref)


def test_off_support_fraction():
    img = inversion.Image(np.zeros((10, 10)), 1.0)
    assert inversion.off_support_fraction(img, []) == 0.0
    vals = np.zeros((10, 10))
    vals[2, 2] = 1.0
    vals[8, 8] = 1.0
    support = np.zeros((10, 10), dtype=bool)
    support[2, 2] = True
    assert inversion.off_support_fraction(inversion.Image(vals, 1.0), [support], dilation=1) == pytest.approx(0.5)
    assert inversion.off_support_fraction(inversion.Image(vals, 1.0), [support], dilation=12) == 0.0


def test_peak_distance():
    vals = np.zeros((20, 20))
    vals[5, 9] = -3.0
    support = np.zeros((20, 20), dtype=bool)
    support[5, 5] = True
    assert inversion.peak_distance(inversion.Image(vals, 1.0), support) == pytest.approx(4.0)


@given(st.lists(st.integers(10, 190), min_size=1, max_size=4, unique=True))
def test_envelope_peak_count(centres):
    centres = sorted(centres)
    if any(b - a < 30 for a, b in zip(centres, centres[1:])):
        return
    t = np.arange(200.0)
    trace = sum(np.cos(1.3 * (t - c)) * np.exp(-(((t - c) / 3.0) ** 2)) for c in centres)
    assert inversion.envelope_peak_count(trace) == len(centres)


def test_envelope_peak_count_empty():
    assert inversion.envelope_peak_count(np.zeros(10)) == 0
