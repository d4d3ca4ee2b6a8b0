"""Impedance estimates from ROM coefficients and reverse-time-migration imaging."""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np
import scipy.ndimage
import scipy.signal

from . import forward, linalg, mimo, siso
from .errors import CflViolation, NonPositive, ShapeMismatch, ValidationError
from .forward import DataSet, Medium2D


# --------------------------------------------------------------------------
# impedance


@dataclass(frozen=True)
class ImpedanceEstimate:
    primary_values: np.ndarray
    dual_values: np.ndarray
    primary_nodes: np.ndarray
    dual_nodes: np.ndarray

    @property
    def n(self) -> int:
        return len(self.primary_values)


def impedance_estimates(factor: siso.SisoFactor, reference: siso.SisoFactor) -> ImpedanceEstimate:
    """``sigma_j = gh0_j / gh_j`` at primary nodes and ``sigma^_j = g_j / g0_j`` at dual nodes.

    Primary nodes start at 0 and advance by the reference ``gamma``; dual
    nodes are cumulative sums of the reference ``gamma_hat``.
    """
    if factor.n != reference.n:
        raise ShapeMismatch(f"ROM orders differ: {factor.n} vs {reference.n}")
    g, gh = np.asarray(factor.gammas), np.asarray(factor.gamma_hats)
    g0, gh0 = np.asarray(reference.gammas), np.asarray(reference.gamma_hats)
    for name, arr in (("gamma", g), ("gamma_hat", gh), ("reference gamma", g0), ("reference gamma_hat", gh0)):
        if np.any(arr <= 0) or not np.all(np.isfinite(arr)):
            raise NonPositive(f"{name} coefficients must be positive")
    primary_nodes = np.concatenate([[0.0], np.cumsum(g0[:-1])])
    dual_nodes = np.cumsum(gh0)
    return ImpedanceEstimate(gh0 / gh, g / g0, primary_nodes, dual_nodes)


def impedance_from_data(measured: DataSet, reference: DataSet, n: int | None = None) -> ImpedanceEstimate:
    return impedance_estimates(siso.factor_from_data(measured, n), siso.factor_from_data(reference, n))


def matrix_impedance_report(factor: mimo.MimoFactor, reference: mimo.MimoFactor) -> list[dict]:
    """Experimental block analogue: eigenvalues of ``gh0_j gh_j^{-1}`` and ``g_j g0_j^{-1}`` per layer."""
    if factor.n != reference.n or factor.m != reference.m:
        raise ShapeMismatch("factors differ in shape")
    out = []
    for j in range(factor.n):
        p = np.linalg.eigvals(reference.gamma_hats[j] @ linalg.spd_inv(factor.gamma_hats[j]))
        d = np.linalg.eigvals(factor.gammas[j] @ linalg.spd_inv(reference.gammas[j]))
        out.append({"index": j, "primary": np.sort(p.real).tolist(), "dual": np.sort(d.real).tolist()})
    return out


# --------------------------------------------------------------------------
# travel times


def _node_coords(medium: Medium2D):
    rows, cols = np.mgrid[0:medium.ny, 0:medium.nx]
    # cell centres; the accessible boundary is the line z = 0
    return (rows + 0.5) * medium.h, cols * medium.h


def fast_marching(speed: np.ndarray, h: float, seeds: dict) -> np.ndarray:
    """First-order fast marching for ``|grad t| = 1/speed`` on a uniform grid.

    ``seeds`` maps ``(row, col)`` to a known arrival time.
    """
    speed = np.asarray(speed, dtype=float)
    if speed.ndim != 2 or np.any(speed <= 0):
        raise ValidationError("speed must be a positive 2D array")
    ny, nx = speed.shape
    t = np.full((ny, nx), np.inf)
    frozen = np.zeros((ny, nx), dtype=bool)
    heap = []
    for (r, c), val in seeds.items():
        t[r, c] = val
        heapq.heappush(heap, (val, r, c))
    slow = h / speed
    while heap:
        val, r, c = heapq.heappop(heap)
        if frozen[r, c] or val > t[r, c]:
            continue
        frozen[r, c] = True
        for rr, cc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
            if not (0 <= rr < ny and 0 <= cc < nx) or frozen[rr, cc]:
                continue
            a = min(t[rr - 1, cc] if rr > 0 else np.inf, t[rr + 1, cc] if rr + 1 < ny else np.inf)
            b = min(t[rr, cc - 1] if cc > 0 else np.inf, t[rr, cc + 1] if cc + 1 < nx else np.inf)
            f = slow[rr, cc]
            lo, hi = min(a, b), max(a, b)
            if hi - lo >= f:
                cand = lo + f
            else:
                cand = 0.5 * (lo + hi + math.sqrt(2 * f * f - (hi - lo) ** 2))
            if cand < t[rr, cc]:
                t[rr, cc] = cand
                heapq.heappush(heap, (cand, rr, cc))
    return t


def travel_times(medium: Medium2D, sensor: int, method: str = "auto") -> np.ndarray:
    """One-way travel time from a sensor (row 0, given column) to every node, shape ``(ny, nx)``."""
    z, x = _node_coords(medium)
    constant = np.ptp(medium.c) <= 1e-12 * np.max(medium.c)
    if method == "auto":
        method = "analytic" if constant else "fmm"
    if method == "analytic":
        if not constant:
            raise ValidationError("analytic travel times need a constant wave speed")
        x0, z0 = sensor * medium.h, 0.5 * medium.h
        return np.hypot(x - x0, z - z0) / medium.c.flat[0]
    if method == "fmm":
        return fast_marching(medium.c, medium.h, {(0, sensor): 0.0})
    raise ValidationError(f"unknown travel-time method {method!r}")


# --------------------------------------------------------------------------
# reverse time migration


@dataclass(frozen=True)
class Image:
    values: np.ndarray  # (ny, nx)
    h: float

    @property
    def shape(self):
        return self.values.shape


def _sinc_resample(frames: np.ndarray, tau: float, times: np.ndarray) -> np.ndarray:
    """Band-limited interpolation of causal samples ``frames[k]`` (time ``k tau``) at ``times``."""
    k = np.arange(frames.shape[0])
    kernel = np.sinc(times[:, None] / tau - k[None, :])
    return np.tensordot(kernel, frames, axes=(1, 0))


def rtm_image(scattered: DataSet, reference: Medium2D, substeps: int | None = None,
              travel_time_method: str = "auto") -> Image:
    """Backpropagate time-reversed scattered traces through ``reference`` and read out at travel time.

    ``scattered.frames[k][s, r]`` is the trace at receiver ``r`` for source
    ``s``. For every source the reversed traces drive a leapfrog run in the
    reference medium; the field at node ``x`` is taken at reversed time
    ``T_end - t_s(x)``, with ``t_s`` the one-way travel time from the source,
    and the contributions are summed over sources in index order.
    """
    nodes = reference.sensor_nodes
    m = len(nodes)
    if scattered.m != m:
        raise ShapeMismatch(f"data have {scattered.m} sensors, medium has {m}")
    a = forward.schrodinger_operator(reference)
    lam_max = forward.gershgorin_bound(a)
    tau = scattered.tau
    if substeps is None:
        substeps = max(1, int(math.ceil(tau * math.sqrt(lam_max) / 1.8)))
    dt = tau / substeps
    if dt * math.sqrt(lam_max) > 2.0:
        raise CflViolation(f"dt={dt:.3e} exceeds the leapfrog limit {2.0 / math.sqrt(lam_max):.3e}")
    t_end = (scattered.two_n - 1) * tau
    steps = (scattered.two_n - 1) * substeps
    times = np.arange(steps + 1) * dt
    # reversed traces, shape (steps+1, m_src, m_rec)
    forcing = _sinc_resample(scattered.frames, tau, t_end - times)
    inject = np.zeros((a.shape[0], m))
    N = a.shape[0]
    history = np.empty((steps + 1, N, m))
    w_prev = np.zeros((N, m))
    w_cur = np.zeros((N, m))
    history[0] = w_cur
    node_idx = np.asarray(nodes)
    for step in range(steps):
        inject[:] = 0.0
        inject[node_idx, :] = forcing[step].T / reference.cell_measure
        w_next = 2.0 * w_cur - w_prev + dt**2 * (inject - a @ w_cur)
        w_prev, w_cur = w_cur, w_next
        history[step + 1] = w_cur
    image = np.zeros(N)
    flat = np.arange(N)
    for s, node in enumerate(nodes):
        tt = travel_times(reference, node % reference.nx, travel_time_method).ravel()
        when = np.clip((t_end - tt) / dt, 0.0, steps)
        lo = np.floor(when).astype(int)
        hi = np.minimum(lo + 1, steps)
        frac = when - lo
        image += (1 - frac) * history[lo, flat, s] + frac * history[hi, flat, s]
    return Image(image.reshape(reference.ny, reference.nx), reference.h)


def off_support_fraction(image: Image, supports: list, dilation: int = 3, skip_rows: int = 0) -> float:
    """Share of image energy outside the union of the dilated true supports."""
    vals = np.asarray(image.values, dtype=float)
    mask = np.zeros(vals.shape, dtype=bool)
    for s in supports:
        mask |= scipy.ndimage.binary_dilation(np.asarray(s, dtype=bool), iterations=dilation)
    keep = np.ones(vals.shape, dtype=bool)
    keep[:skip_rows] = False
    total = float(np.sum(vals[keep] ** 2))
    if total == 0.0:
        return 0.0
    return float(np.sum(vals[keep & ~mask] ** 2)) / total


def peak_distance(image: Image, support: np.ndarray, window: int = 6) -> float:
    """Grid distance from the strongest |image| value near ``support`` to the support itself."""
    vals = np.abs(np.asarray(image.values, dtype=float))
    support = np.asarray(support, dtype=bool)
    near = scipy.ndimage.binary_dilation(support, iterations=window)
    r, c = np.unravel_index(np.argmax(np.where(near, vals, -1.0)), vals.shape)
    dist = scipy.ndimage.distance_transform_edt(~support)
    return float(dist[r, c])


def envelope_peak_count(trace: np.ndarray, threshold: float = 0.1, upsample: int = 8, min_separation: float | None = None) -> int:
    """Peaks of the analytic-signal envelope exceeding ``threshold`` times its maximum."""
    trace = np.asarray(trace, dtype=float)
    if trace.size < 3 or not np.any(trace):
        return 0
    fine = scipy.signal.resample(trace, trace.size * upsample)
    env = np.abs(scipy.signal.hilbert(fine))
    dist = None if min_separation is None else max(1, int(min_separation * upsample))
    peaks, _ = scipy.signal.find_peaks(env, height=threshold * env.max(), distance=dist)
    return int(len(peaks))
