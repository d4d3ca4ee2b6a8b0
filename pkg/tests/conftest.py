import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from dtb import forward

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def pulse_1d():
    return forward.Pulse(1.5, 0.7)


@pytest.fixture(scope="session")
def layered_profile():
    from dtb.models import layered_profile

    return layered_profile([8, 14, 20, 25, 30, 36], [1.3, 0.85, 1.4, 1.0, 0.75, 1.0])


@pytest.fixture(scope="session")
def small_1d(pulse_1d, layered_profile):
    """Layered and homogeneous media on a short grid with their data (tau=1, n=20)."""
    med = forward.Medium1D.from_profile(layered_profile, 50.0, 1000)
    ref = forward.Medium1D.homogeneous(50.0, 1000)
    data = forward.simulate_spectral(med, pulse_1d, 1.0, 40)
    ref_data = forward.simulate_spectral(ref, pulse_1d, 1.0, 40)
    return med, ref, data, ref_data


def small_2d_media(m=3, spacing=3, rows=24, columns=40, sigma_in=2.0):
    yy, xx = np.mgrid[0:rows, 0:columns]
    sigma = np.ones((rows, columns))
    sigma[((yy - 8) / 2.5) ** 2 + ((xx - columns / 2) / 6) ** 2 <= 1] = sigma_in
    c = np.ones((rows, columns))
    sensors = [int(columns / 2 - spacing * (m - 1) / 2 + spacing * k) for k in range(m)]
    return forward.Medium2D(1.0, sigma, c, sensors), forward.Medium2D(1.0, np.ones_like(sigma), c, sensors)


@pytest.fixture(scope="session")
def small_2d():
    """Three sensors above one inclusion on a 24 x 40 grid, tau=3, n=8."""
    med, ref = small_2d_media()
    pulse = forward.Pulse(0.5, 0.25)
    data = forward.simulate_spectral(med, pulse, 3.0, 16)
    ref_data = forward.simulate_spectral(ref, pulse, 3.0, 16)
    return med, ref, pulse, data, ref_data
