"""Media and run settings built from plain dictionaries (the JSON config ``medium`` blocks)."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .forward import Medium1D, Medium2D, Pulse

# --------------------------------------------------------------------------
# 1D impedance profiles in travel-time coordinates


def layered_profile(interfaces, values, background: float = 1.0):
    """Piecewise-constant ``sigma(T)``: ``values[i]`` holds from ``interfaces[i]`` to the next interface."""
    interfaces = [float(z) for z in interfaces]
    values = [float(v) for v in values]
    if len(interfaces) != len(values):
        raise ConfigError("layered profile needs one value per interface")
    if any(b <= a for a, b in zip(interfaces, interfaces[1:])):
        raise ConfigError("interfaces must be strictly increasing")

    def sigma(t):
        t = np.asarray(t, dtype=float)
        out = np.full_like(t, background)
        for z, v in zip(interfaces, values):
            out = np.where(t >= z, v, out)
        return out

    return sigma


def bump_profile(bumps, background: float = 1.0):
    """``background + sum a exp(-((T - c)/w)^2)`` over ``bumps = [(c, w, a), ...]``."""
    bumps = [(float(c), float(w), float(a)) for c, w, a in bumps]
    if any(w <= 0 for _, w, _ in bumps):
        raise ConfigError("bump widths must be positive")

    def sigma(t):
        t = np.asarray(t, dtype=float)
        out = np.full_like(t, background)
        for c, w, a in bumps:
            out = out + a * np.exp(-(((t - c) / w) ** 2))
        return out

    return sigma


def sampled_profile(values, length: float):
    """Linear interpolation of samples spread uniformly over ``[0, length]``."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size < 2:
        raise ConfigError("sampled profile needs at least two values")
    grid = np.linspace(0.0, length, values.size)
    return lambda t: np.interp(np.asarray(t, dtype=float), grid, values)


def profile_from_spec(spec: dict, length: float):
    kind = spec.get("kind", "homogeneous")
    background = float(spec.get("background", 1.0))
    if kind == "homogeneous":
        value = float(spec.get("value", background))
        return lambda t: np.full_like(np.asarray(t, dtype=float), value)
    if kind == "layered":
        return layered_profile(spec["interfaces"], spec["values"], background)
    if kind == "bumps":
        return bump_profile([(b["center"], b["width"], b["amplitude"]) for b in spec["bumps"]], background)
    if kind == "samples":
        return sampled_profile(spec["values"], length)
    raise ConfigError(f"unknown profile kind {kind!r}")


# --------------------------------------------------------------------------
# 2D grids with elliptical inclusions


@dataclass(frozen=True)
class Inclusion:
    depth: float       # centre row
    offset: float      # centre column relative to the grid centre
    half_width: float  # in columns
    half_height: float  # in rows
    sigma: float | None = None
    c: float | None = None

    def mask(self, ny: int, nx: int) -> np.ndarray:
        rows, cols = np.mgrid[0:ny, 0:nx]
        centre = nx / 2 + self.offset
        return ((rows - self.depth) / self.half_height) ** 2 + ((cols - centre) / self.half_width) ** 2 <= 1.0


def centred_sensors(nx: int, count: int, spacing: int) -> list[int]:
    """``count`` sensor columns ``spacing`` apart, centred on the grid."""
    if count < 1 or spacing < 1:
        raise ConfigError("sensor count and spacing must be positive")
    # round the first column only, so the spacing stays exact
    first = int(np.floor(nx / 2 - spacing * (count - 1) / 2 + 0.5))
    cols = first + spacing * np.arange(count)
    if cols[0] < 0 or cols[-1] >= nx:
        raise ConfigError("sensor array does not fit in the grid")
    return [int(c) for c in cols]


@dataclass
class Grid2DSpec:
    rows: int
    columns: int
    h: float
    sensors: list
    background_sigma: float = 1.0
    background_c: float = 1.0
    inclusions: list = field(default_factory=list)
    constant_density: bool = False

    def masks(self) -> list[np.ndarray]:
        return [inc.mask(self.rows, self.columns) for inc in self.inclusions]

    def build(self) -> Medium2D:
        sigma = np.full((self.rows, self.columns), self.background_sigma)
        c = np.full((self.rows, self.columns), self.background_c)
        for inc, mask in zip(self.inclusions, self.masks()):
            if inc.sigma is not None:
                sigma[mask] = inc.sigma
            if inc.c is not None:
                c[mask] = inc.c
        if self.constant_density:
            # rho = sigma / c = 1
            sigma = c.copy()
        return Medium2D(self.h, sigma, c, self.sensors)

    def background(self) -> Medium2D:
        shape = (self.rows, self.columns)
        sigma = self.background_c if self.constant_density else self.background_sigma
        return Medium2D(self.h, np.full(shape, sigma), np.full(shape, self.background_c), self.sensors)


def grid_from_spec(spec: dict) -> Grid2DSpec:
    rows, columns = int(spec["rows"]), int(spec["columns"])
    sens = spec["sensors"]
    if "columns" in sens:
        sensors = [int(s) for s in sens["columns"]]
    else:
        sensors = centred_sensors(columns, int(sens["count"]), int(sens["spacing"]))
    bg = spec.get("background", {})
    incs = [
        Inclusion(i["depth"], i.get("offset", 0.0), i["half_width"], i["half_height"], i.get("sigma"), i.get("c"))
        for i in spec.get("inclusions", [])
    ]
    return Grid2DSpec(rows, columns, float(spec.get("h", 1.0)), sensors, float(bg.get("sigma", 1.0)),
                      float(bg.get("c", 1.0)), incs, bool(spec.get("constant_density", False)))


# --------------------------------------------------------------------------
# whole-config helpers


def medium_from_spec(spec: dict):
    if spec["dimension"] == 1:
        length, cells = float(spec["length"]), int(spec["cells"])
        return Medium1D.from_profile(profile_from_spec(spec.get("profile", {}), length), length, cells)
    return grid_from_spec(spec).build()


def reference_from_spec(spec: dict):
    """Homogeneous background on the same grid (the default reference medium)."""
    if spec["dimension"] == 1:
        bg = float(spec.get("profile", {}).get("background", 1.0))
        return Medium1D.homogeneous(float(spec["length"]), int(spec["cells"]), bg)
    return grid_from_spec(spec).background()


def true_profile(spec: dict):
    """The continuous ``sigma(T)`` of a 1D medium block."""
    return profile_from_spec(spec.get("profile", {}), float(spec["length"]))


def supports_from_spec(spec: dict) -> list[np.ndarray]:
    if spec["dimension"] != 2:
        return []
    return grid_from_spec(spec).masks()


def pulse_from_spec(spec: dict) -> Pulse:
    return Pulse(float(spec["omega0"]), float(spec["bandwidth"]), float(spec.get("amplitude", 1.0)))
