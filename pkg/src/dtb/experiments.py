"""Reproducible experiment runs built on the bundled configs.

Each function returns a plain dict of metrics so the acceptance tests and the
scripts under ``scripts/`` report the same numbers.
"""
from __future__ import annotations

import copy
import time
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import checks, dtb, forward, inversion, io, mimo, models, siso
from .forward import DataSet


@dataclass
class Run:
    """A config with lazily synthesized measured, reference and Born frames."""

    config: dict
    timings: dict = field(default_factory=dict)

    @classmethod
    def bundled(cls, name: str, **overrides) -> "Run":
        cfg = io.load_config(io.bundled_config_path(name))
        cfg.update(overrides)
        return cls(io.validate_config(cfg))

    @property
    def tau(self) -> float:
        return float(self.config["tau"])

    @property
    def n(self) -> int:
        return int(self.config["n"])

    @cached_property
    def pulse(self) -> forward.Pulse:
        return models.pulse_from_spec(self.config["pulse"])

    @cached_property
    def medium(self):
        return models.medium_from_spec(self.config["medium"])

    @cached_property
    def reference_medium(self):
        if "reference" in self.config:
            return models.medium_from_spec(self.config["reference"])
        return models.reference_from_spec(self.config["medium"])

    def synthesize(self, medium) -> DataSet:
        return forward.simulate_spectral(medium, self.pulse, self.tau, 2 * self.n)

    def _timed(self, key, fn):
        t0 = time.perf_counter()
        out = fn()
        self.timings[key] = time.perf_counter() - t0
        return out

    @cached_property
    def measured(self) -> DataSet:
        return self._timed("measured", lambda: self.synthesize(self.medium))

    @cached_property
    def reference(self) -> DataSet:
        return self._timed("reference", lambda: self.synthesize(self.reference_medium))

    @cached_property
    def born(self) -> DataSet:
        return self._timed("born", lambda: forward.born_oracle(self.reference_medium, self.medium, self.synthesize))

    @cached_property
    def transformed(self) -> DataSet:
        return self._timed("dtb", lambda: dtb.dtb_transform(self.measured, self.reference, self.n).frames)

    @cached_property
    def unit_scale(self) -> float:
        return forward.unit_grid_scale(self.pulse, self.tau, self.reference.frames[0, 0, 0])


def refined_config(config: dict, factor: int, grid: bool = True) -> dict:
    """Divide tau by ``factor`` and scale the pulse and frame count to match; ``grid`` also refines a 1D mesh."""
    cfg = copy.deepcopy(config)
    cfg["tau"] = config["tau"] / factor
    cfg["n"] = config["n"] * factor
    cfg["pulse"]["omega0"] = config["pulse"]["omega0"] * factor
    cfg["pulse"]["bandwidth"] = config["pulse"]["bandwidth"] * factor
    if grid and cfg["medium"]["dimension"] == 1:
        cfg["medium"]["cells"] = config["medium"]["cells"] * factor
    return cfg


# --------------------------------------------------------------------------
# SISO and MIMO ROM accuracy


def rom_accuracy(run: Run) -> dict:
    t0 = time.perf_counter()
    data = run.measured
    match, band = checks.data_match_error(data, run.n)
    out = {"data_match": match, "off_band": band, "m": data.m, "n": run.n}
    if data.m > 1:
        out.update(checks.mimo_consistency(data, run.n))
    out["seconds"] = time.perf_counter() - t0
    return out


def siso_reduction(data: DataSet, n: int | None = None) -> float:
    """Largest relative gap between block (m = 1) and scalar gamma coefficients."""
    block = mimo.factor_from_data(data, n)
    scalar = siso.factor_from_data(data, n)
    g = np.array([x[0, 0] for x in block.gammas])
    gh = np.array([x[0, 0] for x in block.gamma_hats])
    return float(max(np.max(np.abs(g / scalar.gammas - 1)), np.max(np.abs(gh / scalar.gamma_hats - 1))))


# --------------------------------------------------------------------------
# Born comparison


def born_discrepancy(run: Run) -> dict:
    """DtB and raw data against the Born oracle.

    ``relative`` divides by the largest Born value; ``scattered`` divides by
    the largest scattered Born value ``Born - D0``, which excludes the direct
    arrival from the scale.
    """
    born = run.born.frames
    scat = np.max(np.abs(born - run.reference.frames))
    dtb_err = np.max(np.abs(run.transformed.frames - born))
    raw_err = np.max(np.abs(run.measured.frames - born))
    peak = np.max(np.abs(born))
    return {
        "relative": float(dtb_err / peak),
        "scattered": float(dtb_err / scat),
        "raw_relative": float(raw_err / peak),
        "raw_scattered": float(raw_err / scat),
    }


@dataclass
class TauSweep:
    """Smooth 1D model for the Born-discrepancy rate under tau refinement."""

    bumps: list = field(default_factory=lambda: [(15.0, 3.0, 0.4), (28.0, 4.0, -0.3)])
    length: float = 60.0
    cells: int = 1200
    omega0: float = 1.2
    bandwidth: float = 0.9
    tau: float = 1.0
    n: int = 40
    factors: tuple = (1, 2, 4)
    # the base mesh already resolves the finest pulse; refining it changes nothing
    refine_grid: bool = False

    def base_config(self) -> dict:
        return io.with_defaults({
            "schema_version": 1,
            "medium": {"dimension": 1, "length": self.length, "cells": self.cells,
                       "profile": {"kind": "bumps", "background": 1.0,
                                   "bumps": [{"center": c, "width": w, "amplitude": a} for c, w, a in self.bumps]}},
            "pulse": {"omega0": self.omega0, "bandwidth": self.bandwidth},
            "tau": self.tau,
            "n": self.n,
        })


def tau_sweep(sweep: TauSweep | None = None) -> dict:
    sweep = sweep or TauSweep()
    base = sweep.base_config()
    rows = []
    for f in sweep.factors:
        run = Run(refined_config(base, f, sweep.refine_grid))
        rows.append({"tau": run.tau, "n": run.n, **born_discrepancy(run)})
    ratios = {key: [a[key] / b[key] for a, b in zip(rows, rows[1:])] for key in ("relative", "scattered")}
    return {"rows": rows, "ratios": ratios}


# --------------------------------------------------------------------------
# impedance


def interior(n: int) -> slice:
    k = max(3, n // 20)
    return slice(k, n - k)


def impedance_recovery(run: Run) -> dict:
    """Interior relative errors of both impedance estimates against the true profile."""
    scale = run.unit_scale if run.config.get("normalize") == "unit_grid" else 1.0
    measured, reference = run.measured.scaled(scale), run.reference.scaled(scale)
    est = inversion.impedance_from_data(measured, reference, run.n)
    truth = models.true_profile(run.config["medium"])
    keep = interior(run.n)
    primary = np.abs(est.primary_values / truth(est.primary_nodes) - 1)[keep]
    dual = np.abs(est.dual_values / truth(est.dual_nodes) - 1)[keep]
    f0 = siso.factor_from_data(reference, run.n)
    return {
        "n": run.n,
        "tau": run.tau,
        "primary_error": float(primary.max()),
        "dual_error": float(dual.max()),
        "error": float(max(primary.max(), dual.max())),
        "gamma_over_tau": float(np.max(np.abs(f0.gammas[keep] / run.tau - 1))),
        "gamma_hat_over_tau": float(np.max(np.abs(f0.gamma_hats[keep] / run.tau - 1))),
    }


# --------------------------------------------------------------------------
# imaging


def imaging_comparison(run: Run, dilation: int = 3, window: int = 6) -> dict:
    supports = models.supports_from_spec(run.config["medium"])
    out = {}
    for label, frames in (("raw", run.measured), ("dtb", run.transformed)):
        img = inversion.rtm_image(frames - run.reference, run.reference_medium)
        out[label] = {
            "off_support_fraction": inversion.off_support_fraction(img, supports, dilation),
            "peak_distances": [inversion.peak_distance(img, s, window) for s in supports],
        }
    out["ratio"] = out["dtb"]["off_support_fraction"] / out["raw"]["off_support_fraction"]
    return out


def echo_counts(run: Run, source: int | None = None, threshold: float = 0.1) -> dict:
    """Envelope peaks per receiver for one source, raw scattered and DtB scattered."""
    m = run.measured.m
    source = m // 2 if source is None else source
    expected = len(run.config["medium"].get("inclusions", []))
    out = {"expected": expected, "source": source}
    for label, frames in (("raw", run.measured), ("dtb", run.transformed)):
        traces = frames.frames - run.reference.frames
        counts = [inversion.envelope_peak_count(traces[:, source, r], threshold) for r in range(m)]
        out[label] = {"counts": counts, "fraction": float(np.mean(np.array(counts) == expected))}
    return out
