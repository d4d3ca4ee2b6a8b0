import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dtb import checks, dtb, forward, mimo, siso
from dtb.dtb import FactorPair
from dtb.errors import ShapeMismatch, ValidationError
from dtb.forward import DataSet


def test_zero_perturbation_1d(small_1d):
    *_, ref_data = small_1d
    out = dtb.dtb_transform(ref_data, ref_data)
    assert checks.relative_max(out.frames.frames, ref_data.frames) <= 1e-10


def test_zero_perturbation_2d(small_2d):
    *_, ref_data = small_2d
    out = dtb.dtb_transform(ref_data, ref_data)
    assert out.mimo
    assert checks.relative_max(out.frames.frames, ref_data.frames) <= 1e-10


def test_identical_factors_give_zero_derivative(small_1d):
    *_, ref_data = small_1d
    f0 = siso.factor_from_data(ref_data)
    assert np.all(dtb.chebyshev_derivative(f0, f0, 1.0, 40) == 0)


def test_first_derivative_frame_is_zero(small_1d):
    _, _, data, ref_data = small_1d
    d = dtb.chebyshev_derivative(siso.factor_from_data(data), siso.factor_from_data(ref_data), 1.0, 40)
    assert np.all(d[0] == 0)


def test_frame_zero_passthrough(small_1d):
    _, _, data, ref_data = small_1d
    out = dtb.dtb_transform(data, ref_data)
    assert out.frames.frames[0, 0, 0] == ref_data.frames[0, 0, 0]
    # the first layer is deeper than the pulse, so measured and reference D_0 agree
    assert out.frames.frames[0, 0, 0] == pytest.approx(data.frames[0, 0, 0], rel=1e-6)


def test_finite_difference_oracle_1d(small_1d):
    _, _, data, ref_data = small_1d
    assert checks.fd_derivative_error(data, ref_data) <= 1e-5


def test_finite_difference_oracle_2d(small_2d):
    *_, data, ref_data = small_2d
    assert checks.fd_derivative_error(data, ref_data) <= 1e-5


@st.composite
def factor_pairs(draw):
    n = draw(st.integers(1, 6))
    m = draw(st.integers(1, 3))
    tau = draw(st.floats(0.3, 1.5))
    rng = np.random.default_rng(draw(st.integers(0, 2**32 - 1)))

    def spd(center):
        g = rng.standard_normal((m, m)) * 0.1
        return center * (np.eye(m) + 0.5 * (g + g.T))

    def pair():
        g = [spd(tau * rng.uniform(0.8, 1.2)) for _ in range(n)]
        gh = [spd(tau * rng.uniform(0.8, 1.2)) for _ in range(n)]
        return FactorPair(mimo.factor_from_gammas(g, gh).data, m, np.linalg.inv(gh[0]))

    return pair(), pair(), tau


@given(factor_pairs(), st.integers(2, 12))
def test_finite_difference_oracle_random_factors(pairs, two_n):
    lq, l0, tau = pairs
    exact = dtb.chebyshev_derivative(lq, l0, tau, two_n)
    h = 1e-6
    step = lq.l_tilde - l0.l_tilde
    plus = dtb.rom_measurements(l0.l_tilde + h * step, l0.m, tau, two_n, l0.d0)
    minus = dtb.rom_measurements(l0.l_tilde - h * step, l0.m, tau, two_n, l0.d0)
    fd = (plus - minus) / (2 * h)
    fd = 0.5 * (fd + fd.transpose(0, 2, 1))
    assert np.abs(exact - fd).max() <= 1e-5 * max(np.abs(fd).max(), 1e-3)


def test_printed_recurrence_variant_is_not_the_derivative(small_1d):
    _, _, data, ref_data = small_1d
    fq, f0 = siso.factor_from_data(data), siso.factor_from_data(ref_data)
    good = dtb.chebyshev_derivative(fq, f0, 1.0, 40)
    other = dtb.chebyshev_derivative(fq, f0, 1.0, 40, recurrence="xi")
    assert checks.relative_max(other, good) > 1.0
    with pytest.raises(ValidationError):
        dtb.chebyshev_derivative(fq, f0, 1.0, 40, recurrence="other")


def test_first_order_accuracy(pulse_1d, layered_profile):
    ref = forward.Medium1D.homogeneous(50.0, 1000)
    full = forward.Medium1D.from_profile(layered_profile, 50.0, 1000)
    syn = lambda med: forward.simulate_spectral(med, pulse_1d, 1.0, 40)  # noqa: E731
    d0 = syn(ref)
    born = forward.born_oracle(ref, full, syn).frames - d0.frames
    ratios = []
    for eps in (0.2, 0.1, 0.05):
        out = dtb.dtb_transform(syn(ref.blend(full, eps)), d0).frames.frames
        ratios.append(np.abs(out - d0.frames - eps * born).max() / np.abs(eps * born).max())
    assert ratios[0] > ratios[1] > ratios[2]
    # the remainder is second order: halving eps roughly halves the ratio
    assert ratios[1] / ratios[2] == pytest.approx(2.0, rel=0.2)


def test_block_output_symmetric(small_2d):
    *_, data, ref_data = small_2d
    frames = dtb.dtb_transform(data, ref_data).frames.frames
    assert np.abs(frames - frames.transpose(0, 2, 1)).max() <= 1e-10 * np.abs(frames).max()


def test_dtb_from_medium(small_1d, pulse_1d):
    _, ref, data, ref_data = small_1d
    a = dtb.dtb_from_medium(data, ref, pulse_1d).frames.frames
    b = dtb.dtb_transform(data, ref_data).frames.frames
    np.testing.assert_array_equal(a, b)


def test_acquisition_mismatches(small_1d, small_2d):
    _, _, data, ref_data = small_1d
    *_, data2, _ = small_2d
    with pytest.raises(ShapeMismatch):
        dtb.dtb_transform(data, data2)
    with pytest.raises(ShapeMismatch):
        dtb.dtb_transform(data, DataSet(ref_data.frames, 0.5))
    with pytest.raises(ShapeMismatch):
        dtb.dtb_transform(data, ref_data.truncated(20))
    with pytest.raises(ShapeMismatch):
        dtb.dtb_transform(data2, data2, use_mimo=False)


def test_reference_longer_than_measurement_is_truncated(small_1d):
    _, _, data, ref_data = small_1d
    out = dtb.dtb_transform(data.truncated(30), ref_data)
    assert out.frames.two_n == 30 and out.rom_order == 15
