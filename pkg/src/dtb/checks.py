"""Invariant checks shared by ``dtb verify`` and the test-suite.

Each check returns a :class:`CheckResult` holding the measured value and the
threshold it is held to; ``threshold=None`` marks a number that is reported
but not judged.
"""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np

from . import dtb, forward, gram, mimo, siso
from .forward import DataSet


@dataclass
class CheckResult:
    name: str
    value: float
    threshold: float | None
    seconds: float = 0.0
    detail: str = ""

    @property
    def passed(self) -> bool | None:
        if self.threshold is None:
            return None
        return bool(np.isfinite(self.value) and self.value <= self.threshold)

    def as_dict(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        return out


def relative_max(a, b) -> float:
    """``max |a - b| / max |b|``."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    scale = np.max(np.abs(b)) or 1.0
    return float(np.max(np.abs(a - b)) / scale)


# --------------------------------------------------------------------------
# individual checks


def gram_oracle_error(medium, pulse: forward.Pulse, tau: float, n: int) -> float:
    """Mass/stiffness from data against explicit snapshot inner products."""
    a = forward.schrodinger_operator(medium)
    funcs = forward.OperatorFunctions(a)
    b = forward.sensor_vectors(a, pulse, medium.sensor_nodes, medium.cell_measure, funcs)
    snaps = funcs.propagator_snapshots(b, tau, 2 * n + 1)
    frames = np.einsum("im,kin->kmn", b, snaps)
    data = DataSet(0.5 * (frames + frames.transpose(0, 2, 1)), tau)
    # P T_0 = T_1 and P T_k = (T_{k+1} + T_{k-1}) / 2
    prop = np.empty((n,) + snaps.shape[1:])
    prop[0] = snaps[1]
    for k in range(1, n):
        prop[k] = 0.5 * (snaps[k + 1] + snaps[k - 1])
    brute = gram.gram_from_snapshots(snaps[:n], prop)
    from_data = gram.gram_from_data(data.truncated(2 * n), n)
    return max(relative_max(from_data.mass.data, brute.mass.data), relative_max(from_data.stiff.data, brute.stiff.data))


def data_match_error(data: DataSet, n: int | None = None, use_mimo: bool = False) -> tuple[float, float]:
    """``(data residual relative to |D_0|, off-band magnitude)`` of the ROM built from ``data``."""
    n = data.two_n // 2 if n is None else n
    two_n = 2 * n
    if use_mimo or data.m > 1:
        rom = mimo.build_rom(data, n)
        fitted = mimo.rom_data(rom, two_n)
    else:
        rom = siso.build_rom(data, n)
        fitted = siso.rom_data(rom, two_n)
    d0 = np.max(np.abs(data.frames[0]))
    return float(np.max(np.abs(fitted.frames - data.frames[:two_n])) / d0), float(rom.off_band)


def fd_derivative_error(measured: DataSet, reference: DataSet, n: int | None = None, step: float = 1e-6) -> float:
    """Chebyshev-recursion derivative against a central difference of the ROM measurements."""
    n = measured.two_n // 2 if n is None else n
    use_mimo = measured.m > 1
    f_q = dtb.factorize(measured, n, use_mimo)
    f_0 = dtb.factorize(reference, n, use_mimo)
    pq, p0 = dtb._as_pair(f_q), dtb._as_pair(f_0)
    d0 = reference.frames[0]
    direction = pq.l_tilde - p0.l_tilde
    plus = dtb.rom_measurements(p0.l_tilde + step * direction, p0.m, measured.tau, measured.two_n, d0)
    minus = dtb.rom_measurements(p0.l_tilde - step * direction, p0.m, measured.tau, measured.two_n, d0)
    fd = (plus - minus) / (2 * step)
    fd = 0.5 * (fd + fd.transpose(0, 2, 1))
    exact = dtb.chebyshev_derivative(f_q, f_0, measured.tau, measured.two_n, d0=d0)
    return relative_max(exact, fd)


def zero_perturbation_error(reference: DataSet, n: int | None = None) -> float:
    out = dtb.dtb_transform(reference, reference, n)
    return relative_max(out.frames.frames, reference.frames)


def mimo_consistency(data: DataSet, n: int | None = None) -> dict:
    """Factor residual, worst orthogonality defect of ``Q_j`` and the smallest coefficient eigenvalue."""
    rom = mimo.build_rom(data, n)
    fac = mimo.consistent_factor(rom)
    eye = np.eye(fac.m)
    orth = max(float(np.max(np.abs(q @ q.T - eye))) for q in fac.q_blocks)
    min_eig = min(float(np.min(np.linalg.eigvalsh(g))) for g in list(fac.gammas) + list(fac.gamma_hats))
    return {"factor_residual": mimo.factor_residual(rom, fac), "orthogonality": orth, "min_coefficient_eig": min_eig}


# --------------------------------------------------------------------------
# suite


def _timed(name, threshold, fn, detail=""):
    t0 = time.perf_counter()
    value = float(fn())
    return CheckResult(name, value, threshold, time.perf_counter() - t0, detail)


def invariant_suite(medium, reference_medium, pulse: forward.Pulse, tau: float, n: int,
                    measured: DataSet | None = None, reference: DataSet | None = None,
                    born: bool = True) -> list[CheckResult]:
    """Gram oracle, data match, tridiagonality, zero-perturbation, FD derivative and Born comparison."""
    two_n = 2 * n
    synth = lambda med: forward.simulate_spectral(med, pulse, tau, two_n)  # noqa: E731
    measured = measured if measured is not None else synth(medium)
    reference = reference if reference is not None else synth(reference_medium)
    results = []
    gram_n = min(n, 10) if measured.m > 1 else n
    results.append(_timed("gram_oracle", 1e-10, lambda: gram_oracle_error(medium, pulse, tau, gram_n),
                          f"n={gram_n}"))
    holder = {}

    def match():
        holder["match"], holder["band"] = data_match_error(measured, n)
        return holder["match"]

    results.append(_timed("data_match", 1e-8 if measured.m == 1 else 1e-6, match))
    results.append(CheckResult("tridiagonality", holder["band"], 1e-9))
    if measured.m > 1:
        cons = mimo_consistency(measured, n)
        results.append(CheckResult("factor_consistency", cons["factor_residual"], 1e-9))
        results.append(CheckResult("q_orthogonality", cons["orthogonality"], 1e-11))
        results.append(CheckResult("coefficients_spd", -cons["min_coefficient_eig"], 0.0,
                                   detail="negated smallest eigenvalue of all gamma, gamma_hat"))
    results.append(_timed("zero_perturbation", 1e-10, lambda: zero_perturbation_error(reference, n)))
    results.append(_timed("fd_derivative", 1e-5, lambda: fd_derivative_error(measured, reference, n)))
    if born:
        def born_err():
            out = dtb.dtb_transform(measured, reference, n)
            oracle = forward.born_oracle(reference_medium, medium, synth)
            return relative_max(out.frames.frames, oracle.frames)

        # the 5% bound is a 1D statement; block data are reported only
        results.append(_timed("born_comparison", 0.05 if measured.m == 1 else None, born_err))
    return results
