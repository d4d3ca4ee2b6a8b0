import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dtb import experiments, io, models
from dtb.errors import ConfigError


def test_layered_profile_steps():
    prof = models.layered_profile([2.0, 5.0], [1.5, 0.5], background=1.0)
    np.testing.assert_array_equal(prof(np.array([0.0, 1.99, 2.0, 4.0, 5.0, 9.0])), [1, 1, 1.5, 1.5, 0.5, 0.5])
    with pytest.raises(ConfigError):
        models.layered_profile([5.0, 2.0], [1.0, 1.0])
    with pytest.raises(ConfigError):
        models.layered_profile([1.0], [1.0, 2.0])


def test_bump_profile():
    prof = models.bump_profile([(10.0, 2.0, 0.5)], background=2.0)
    assert prof(np.array([10.0]))[0] == pytest.approx(2.5)
    assert prof(np.array([100.0]))[0] == pytest.approx(2.0)
    with pytest.raises(ConfigError):
        models.bump_profile([(1.0, 0.0, 1.0)])


def test_sampled_profile_interpolates():
    prof = models.sampled_profile([1.0, 3.0], 10.0)
    assert prof(np.array([5.0]))[0] == pytest.approx(2.0)


@given(st.integers(1, 16), st.integers(1, 5))
def test_centred_sensors_are_symmetric(count, spacing):
    nx = spacing * count + 40
    cols = models.centred_sensors(nx, count, spacing)
    assert len(cols) == count
    assert all(b - a == spacing for a, b in zip(cols, cols[1:]))
    assert abs((cols[0] + cols[-1]) / 2 - nx / 2) <= 1


def test_constant_density_grid():
    spec = io.load_config(io.bundled_config_path("speed_demo_2d"))["medium"]
    grid = models.grid_from_spec(spec)
    med = grid.build()
    np.testing.assert_array_equal(med.sigma, med.c)
    assert med.c.max() == pytest.approx(1.3) and med.c.min() == pytest.approx(0.8)
    bg = grid.background()
    assert np.all(bg.c == 1.0) and np.all(bg.sigma == 1.0)
    assert len(grid.masks()) == 3


def test_inclusion_supports_match_medium():
    spec = io.load_config(io.bundled_config_path("two_inclusion_2d"))["medium"]
    med = models.medium_from_spec(spec)
    strong, weak = models.supports_from_spec(spec)
    assert np.all(med.sigma[strong] == 3.0) and np.all(med.sigma[weak] == 0.4)
    assert np.all(med.sigma[~(strong | weak)] == 1.0)
    assert med.N <= 10_000


def test_reference_is_homogeneous_background():
    spec = io.load_config(io.bundled_config_path("layered_1d"))["medium"]
    ref = models.reference_from_spec(spec)
    assert np.all(ref.sigma_primary == 1.0) and ref.N == spec["cells"]


def test_refined_config_scales_together():
    cfg = io.load_config(io.bundled_config_path("smooth_1d"))
    fine = experiments.refined_config(cfg, 2)
    assert fine["tau"] == cfg["tau"] / 2 and fine["n"] == 2 * cfg["n"]
    assert fine["pulse"]["omega0"] == 2 * cfg["pulse"]["omega0"]
    assert fine["medium"]["cells"] == 2 * cfg["medium"]["cells"]
    assert cfg["tau"] == 1.0  # the input is untouched


def test_interior_slice():
    assert experiments.interior(100) == slice(5, 95)
    assert experiments.interior(20) == slice(3, 17)
