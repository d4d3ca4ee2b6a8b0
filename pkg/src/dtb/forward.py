"""Fine-grid forward modelling: media, sensors, data synthesis and the Born oracle.

Everything is expressed through the symmetrized Schroedinger operator
``a = L_q L_q^T`` on a fine grid. In 1D the grid is in travel-time
coordinates with primary (pressure) nodes at ``(j - 1/2) dT`` and dual
(velocity) nodes at ``j dT``; in 2D it is a uniform cell-centred grid whose
top row touches the accessible (sound-hard) boundary.

Data frames are ``D_k = b^T T_k(P) b`` with ``P = cos(tau sqrt(a))`` and
sensor matrix ``b = [fhat(sqrt(a))]^{1/2} delta_s h^{d/2}``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from numpy.polynomial import chebyshev as npcheb

from . import linalg
from .errors import (
    CflViolation,
    DegenerateSensors,
    InvalidMedium,
    NonSymmetric,
    NotPositiveDefinite,
    ShapeMismatch,
    ValidationError,
)

DENSE_LIMIT = 2500


# --------------------------------------------------------------------------
# data containers


@dataclass(frozen=True)
class Pulse:
    """Modulated Gaussian pulse ``f(t) = amplitude B cos(w0 t) exp(-(B t)^2/2) / sqrt(2 pi)``.

    The prefactor makes ``fhat`` exactly the Fourier transform of ``f``.
    """

    omega0: float
    bandwidth: float
    amplitude: float = 1.0

    def __post_init__(self):
        if not self.bandwidth > 0:
            raise ValidationError("pulse bandwidth must be positive")
        if self.omega0 < 0 or self.amplitude < 0:
            raise ValidationError("pulse frequency and amplitude must be non-negative")

    def fhat(self, omega):
        w0, bw = self.omega0, self.bandwidth
        omega = np.asarray(omega, dtype=float)
        return 0.5 * self.amplitude * (
            np.exp(-((omega - w0) ** 2) / (2 * bw**2)) + np.exp(-((omega + w0) ** 2) / (2 * bw**2))
        )

    def f(self, t):
        t = np.asarray(t, dtype=float)
        bw = self.bandwidth
        return self.amplitude * bw * np.cos(self.omega0 * t) * np.exp(-((bw * t) ** 2) / 2) / math.sqrt(2 * math.pi)

    def df(self, t):
        """Time derivative of :meth:`f`."""
        t = np.asarray(t, dtype=float)
        w0, bw = self.omega0, self.bandwidth
        env = bw * np.exp(-((bw * t) ** 2) / 2) / math.sqrt(2 * math.pi)
        return self.amplitude * env * (-w0 * np.sin(w0 * t) - bw**2 * t * np.cos(w0 * t))

    @property
    def half_width(self) -> float:
        """Time beyond which ``|f|`` is below ~1e-14 of its peak."""
        return 8.0 / self.bandwidth

    @property
    def max_frequency(self) -> float:
        """Frequency above which ``fhat`` is below ~1e-9 of its peak."""
        return self.omega0 + 6.5 * self.bandwidth

    def nyquist_tau(self) -> float:
        return math.pi / (self.omega0 + 2.0 * self.bandwidth)


@dataclass
class DataSet:
    """Reflection data: ``two_n`` symmetric ``m x m`` frames sampled at interval ``tau``."""

    frames: np.ndarray
    tau: float

    def __post_init__(self):
        f = np.asarray(self.frames, dtype=float)
        if f.ndim == 1:
            f = f[:, None, None]
        if f.ndim != 3 or f.shape[1] != f.shape[2]:
            raise ShapeMismatch(f"frames must have shape (two_n, m, m), got {np.shape(self.frames)}")
        if not self.tau > 0:
            raise ValidationError("tau must be positive")
        self.frames = f

    @property
    def m(self) -> int:
        return self.frames.shape[1]

    @property
    def two_n(self) -> int:
        return self.frames.shape[0]

    @property
    def scalar(self) -> np.ndarray:
        """Frames of a single-sensor data set as a 1D array."""
        if self.m != 1:
            raise ShapeMismatch("data set has more than one sensor")
        return self.frames[:, 0, 0]

    def symmetry_defect(self) -> float:
        scale = np.max(np.abs(self.frames)) or 1.0
        return float(np.max(np.abs(self.frames - self.frames.transpose(0, 2, 1))) / scale)

    def check_symmetric(self, tol: float = 1e-10) -> None:
        defect = self.symmetry_defect()
        if defect > tol:
            raise NonSymmetric(f"data frames violate reciprocity: defect {defect:.3e}")

    def scaled(self, factor: float) -> "DataSet":
        return DataSet(self.frames * factor, self.tau)

    def truncated(self, two_n: int) -> "DataSet":
        if two_n > self.two_n:
            raise ValidationError(f"cannot truncate {self.two_n} frames to {two_n}")
        return DataSet(self.frames[:two_n].copy(), self.tau)

    def __sub__(self, other: "DataSet") -> "DataSet":
        return DataSet(self.frames - other.frames, self.tau)

    def __add__(self, other: "DataSet") -> "DataSet":
        return DataSet(self.frames + other.frames, self.tau)


# --------------------------------------------------------------------------
# media


@dataclass
class Medium1D:
    """Impedance sampled on the staggered travel-time grid.

    ``sigma_primary[j]`` sits at ``T = (j + 1/2) dT`` and ``sigma_dual[j]`` at
    ``T = (j + 1) dT`` (0-based ``j``).
    """

    dT: float
    sigma_primary: np.ndarray
    sigma_dual: np.ndarray

    def __post_init__(self):
        self.sigma_primary = np.asarray(self.sigma_primary, dtype=float)
        self.sigma_dual = np.asarray(self.sigma_dual, dtype=float)
        if self.sigma_primary.shape != self.sigma_dual.shape or self.sigma_primary.ndim != 1:
            raise InvalidMedium("primary and dual impedance samples must be 1D arrays of equal length")
        if not self.dT > 0:
            raise InvalidMedium("dT must be positive")
        for arr in (self.sigma_primary, self.sigma_dual):
            if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
                raise InvalidMedium("impedance must be positive and finite")

    @property
    def N(self) -> int:
        return len(self.sigma_primary)

    @property
    def T_ell(self) -> float:
        return self.N * self.dT

    @property
    def primary_nodes(self) -> np.ndarray:
        return (np.arange(self.N) + 0.5) * self.dT

    @property
    def dual_nodes(self) -> np.ndarray:
        return (np.arange(self.N) + 1.0) * self.dT

    @classmethod
    def from_profile(cls, sigma: Callable[[np.ndarray], np.ndarray], T_ell: float, N: int) -> "Medium1D":
        dT = T_ell / N
        tp = (np.arange(N) + 0.5) * dT
        td = (np.arange(N) + 1.0) * dT
        return cls(dT, np.broadcast_to(sigma(tp), (N,)).copy(), np.broadcast_to(sigma(td), (N,)).copy())

    @classmethod
    def homogeneous(cls, T_ell: float, N: int, sigma: float = 1.0) -> "Medium1D":
        return cls.from_profile(lambda t: np.full_like(t, sigma), T_ell, N)

    def blend(self, other: "Medium1D", eps: float) -> "Medium1D":
        """Medium with ``q = q_self + eps (q_other - q_self)``, ``q = ln sigma``."""
        if other.N != self.N or other.dT != self.dT:
            raise ShapeMismatch("media live on different grids")
        qp = np.log(self.sigma_primary) + eps * (np.log(other.sigma_primary) - np.log(self.sigma_primary))
        qd = np.log(self.sigma_dual) + eps * (np.log(other.sigma_dual) - np.log(self.sigma_dual))
        return Medium1D(self.dT, np.exp(qp), np.exp(qd))

    @property
    def sensor_nodes(self) -> list[int]:
        return [0]

    @property
    def cell_measure(self) -> float:
        return self.dT


@dataclass
class Medium2D:
    """Cell-centred 2D grid of ``ny`` rows (depth) by ``nx`` columns, spacing ``h``.

    Row 0 touches the accessible boundary; sensors are column indices in row 0.
    Node ``(row, col)`` has linear index ``row * nx + col``.
    """

    h: float
    sigma: np.ndarray
    c: np.ndarray
    sensors: Sequence[int] = field(default_factory=list)

    def __post_init__(self):
        self.sigma = np.asarray(self.sigma, dtype=float)
        self.c = np.asarray(self.c, dtype=float)
        if self.sigma.ndim != 2 or self.sigma.shape != self.c.shape:
            raise InvalidMedium("sigma and c must be 2D arrays of equal shape")
        if not self.h > 0:
            raise InvalidMedium("grid spacing must be positive")
        for arr in (self.sigma, self.c):
            if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
                raise InvalidMedium("sigma and c must be positive and finite")
        self.sensors = [int(s) for s in self.sensors]
        if len(set(self.sensors)) != len(self.sensors):
            raise DegenerateSensors(f"coincident sensors in {self.sensors}")
        if any(s < 0 or s >= self.nx for s in self.sensors):
            raise InvalidMedium("sensor column outside the grid")

    @property
    def ny(self) -> int:
        return self.sigma.shape[0]

    @property
    def nx(self) -> int:
        return self.sigma.shape[1]

    @property
    def N(self) -> int:
        return self.sigma.size

    @property
    def sensor_nodes(self) -> list[int]:
        return list(self.sensors)

    @property
    def cell_measure(self) -> float:
        return self.h**2

    def blend(self, other: "Medium2D", eps: float) -> "Medium2D":
        """Medium with ``q = q_self + eps (q_other - q_self)``; wave speed taken from ``self``."""
        if other.sigma.shape != self.sigma.shape or other.h != self.h:
            raise ShapeMismatch("media live on different grids")
        q = np.log(self.sigma) + eps * (np.log(other.sigma) - np.log(self.sigma))
        return Medium2D(self.h, np.exp(q), self.c, self.sensors)


# --------------------------------------------------------------------------
# operators


def build_lq_1d(medium: Medium1D) -> np.ndarray:
    """Lower bidiagonal two-point discretization of ``L_q = -d/dT + q'/2``."""
    sp_, sd = medium.sigma_primary, medium.sigma_dual
    N, dT = medium.N, medium.dT
    L = np.zeros((N, N))
    idx = np.arange(N)
    L[idx, idx] = -np.sqrt(sp_ / sd) / dT
    L[idx[1:], idx[:-1]] = np.sqrt(sp_[1:] / sd[:-1]) / dT
    return L


def schrodinger_1d(medium: Medium1D) -> sp.csr_matrix:
    """``L_q L_q^T`` for the 1D medium as a sparse tridiagonal matrix."""
    sp_, sd = medium.sigma_primary, medium.sigma_dual
    dT2 = medium.dT**2
    diag = sp_ / sd
    diag[1:] += sp_[1:] / sd[:-1]
    diag = diag / dT2
    off = -np.sqrt(sp_[:-1] * sp_[1:]) / sd[:-1] / dT2
    return sp.diags([off, diag, off], [-1, 0, 1], format="csr")


def schrodinger_2d(medium: Medium2D) -> sp.csr_matrix:
    """Symmetrized 5-point operator ``(sigma c)^{-1/2} A (sigma c)^{1/2}``.

    ``A = -sigma c div((c/sigma) grad)``. Edge coefficients ``c/sigma`` are
    arithmetic means of the two nodes; the top face is sound hard (no flux),
    the other three faces carry homogeneous Dirichlet conditions through a
    ghost node at zero.
    """
    ny, nx, h = medium.ny, medium.nx, medium.h
    s = (medium.sigma * medium.c).ravel()
    kappa = (medium.c / medium.sigma)
    idx = np.arange(ny * nx).reshape(ny, nx)
    diag = np.zeros(ny * nx)
    rows, cols, vals = [], [], []

    def couple(i_a, i_b, k):
        w = -np.sqrt(s[i_a] * s[i_b]) * k
        rows.extend([i_a, i_b])
        cols.extend([i_b, i_a])
        vals.extend([w, w])
        np.add.at(diag, i_a, s[i_a] * k)
        np.add.at(diag, i_b, s[i_b] * k)

    # horizontal and vertical interior edges
    couple(idx[:, :-1].ravel(), idx[:, 1:].ravel(), (0.5 * (kappa[:, :-1] + kappa[:, 1:])).ravel())
    couple(idx[:-1, :].ravel(), idx[1:, :].ravel(), (0.5 * (kappa[:-1, :] + kappa[1:, :])).ravel())
    # Dirichlet faces: left, right, bottom
    for face in (idx[:, 0], idx[:, -1], idx[-1, :]):
        np.add.at(diag, face, s[face] * kappa.ravel()[face])
    rows = np.concatenate([np.concatenate(rows), np.arange(ny * nx)])
    cols = np.concatenate([np.concatenate(cols), np.arange(ny * nx)])
    vals = np.concatenate([np.concatenate(vals), diag])
    return sp.csr_matrix((vals / h**2, (rows, cols)), shape=(ny * nx, ny * nx))


def schrodinger_operator(medium) -> sp.csr_matrix:
    if isinstance(medium, Medium1D):
        return schrodinger_1d(medium)
    if isinstance(medium, Medium2D):
        return schrodinger_2d(medium)
    raise InvalidMedium(f"unsupported medium type {type(medium).__name__}")


def build_lq_2d(medium: Medium2D) -> sp.csr_matrix:
    """Lower triangular Cholesky factor ``L_q`` with ``L_q L_q^T = schrodinger_2d(medium)``."""
    a = schrodinger_2d(medium)
    bw = medium.nx
    N = a.shape[0]
    ab = np.zeros((bw + 1, N))
    coo = a.tocoo()
    keep = coo.row >= coo.col
    ab[coo.row[keep] - coo.col[keep], coo.col[keep]] = coo.data[keep]
    try:
        cb = scipy.linalg.cholesky_banded(ab, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"2D operator is not positive definite: {exc}") from exc
    rows, cols, vals = [], [], []
    for k in range(bw + 1):
        j = np.arange(N - k)
        rows.append(j + k)
        cols.append(j)
        vals.append(cb[k, : N - k])
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(N, N)
    )


# --------------------------------------------------------------------------
# matrix functions of the fine-grid operator


def gershgorin_bound(a) -> float:
    a = sp.csr_matrix(a)
    return float(np.max(np.asarray(abs(a).sum(axis=1)).ravel()))


def chebyshev_coefficients(g, lo: float, hi: float, tol: float = 1e-13, max_degree: int = 8192):
    """Chebyshev interpolant coefficients of ``g`` on ``[lo, hi]``, degree chosen adaptively."""
    deg = 16
    while True:
        coef = npcheb.chebinterpolate(lambda y: g(0.5 * (hi - lo) * y + 0.5 * (hi + lo)), deg)
        scale = np.max(np.abs(coef))
        tail = np.max(np.abs(coef[-4:]))
        if tail <= tol * scale or scale == 0:
            cut = np.nonzero(np.abs(coef) > 0.1 * tol * scale)[0]
            return coef[: (cut[-1] + 1 if cut.size else 1)]
        if deg >= max_degree:
            return coef
        deg *= 2


def chebyshev_apply(a, coef, lo: float, hi: float, v: np.ndarray) -> np.ndarray:
    """Evaluate ``sum_k coef[k] T_k(y) v`` with ``y = (2a - (hi+lo)) / (hi-lo)``."""
    alpha, beta = 2.0 / (hi - lo), -(hi + lo) / (hi - lo)

    def y_mul(x):
        return alpha * (a @ x) + beta * x

    t_prev = v
    out = coef[0] * v
    if len(coef) == 1:
        return out
    t_cur = y_mul(v)
    out = out + coef[1] * t_cur
    for ck in coef[2:]:
        t_prev, t_cur = t_cur, 2.0 * y_mul(t_cur) - t_prev
        out = out + ck * t_cur
    return out


class OperatorFunctions:
    """Apply functions ``g(a)`` of a symmetric PSD fine-grid operator.

    Small operators use an eigendecomposition (tridiagonal solver in 1D);
    large ones a Chebyshev expansion in ``a`` on its Gershgorin interval.
    """

    def __init__(self, a, method: str = "auto"):
        self.a = sp.csr_matrix(a)
        self.N = self.a.shape[0]
        if method == "auto":
            method = "eig" if self.N <= DENSE_LIMIT or self._is_tridiagonal() else "chebyshev"
        if method not in ("eig", "chebyshev"):
            raise ValidationError(f"unknown matrix-function method {method!r}")
        self.method = method
        self._eig = None
        self.hi = gershgorin_bound(self.a) * (1 + 1e-12)

    def _is_tridiagonal(self) -> bool:
        coo = self.a.tocoo()
        return bool(np.all(np.abs(coo.row - coo.col) <= 1))

    @property
    def eig(self):
        if self._eig is None:
            if self._is_tridiagonal():
                d = self.a.diagonal()
                e = self.a.diagonal(1)
                lam, y = scipy.linalg.eigh_tridiagonal(d, e)
            else:
                lam, y = linalg.sym_eig(self.a.toarray())
            self._eig = (lam, y)
        return self._eig

    @property
    def spectrum(self) -> np.ndarray:
        return self.eig[0]

    def apply(self, g: Callable[[np.ndarray], np.ndarray], v: np.ndarray) -> np.ndarray:
        if self.method == "eig":
            return linalg.apply_spectral_fn(None, g, v, eig=self.eig)
        coef = chebyshev_coefficients(g, 0.0, self.hi)
        return chebyshev_apply(self.a, coef, 0.0, self.hi, v)

    def propagator_snapshots(self, b: np.ndarray, tau: float, count: int) -> np.ndarray:
        """``T_k(P) b`` for ``k = 0..count-1`` with ``P = cos(tau sqrt(a))``; shape ``(count,) + b.shape``."""
        out = np.empty((count,) + b.shape)
        if self.method == "eig":
            lam, y = self.eig
            root = np.sqrt(np.maximum(lam, 0.0))
            coef = y.T @ b
            for k in range(count):
                w = np.cos(k * tau * root)
                out[k] = y @ (w[:, None] * coef if coef.ndim > 1 else w * coef)
            return out
        pcoef = chebyshev_coefficients(lambda x: np.cos(tau * np.sqrt(np.maximum(x, 0.0))), 0.0, self.hi)
        out[0] = b
        if count > 1:
            out[1] = chebyshev_apply(self.a, pcoef, 0.0, self.hi, b)
        for k in range(2, count):
            out[k] = 2.0 * chebyshev_apply(self.a, pcoef, 0.0, self.hi, out[k - 1]) - out[k - 2]
        return out


# --------------------------------------------------------------------------
# sensors and data


def _grid_deltas(N: int, nodes: Sequence[int], cell_measure: float, dim: int) -> np.ndarray:
    nodes = list(nodes)
    if len(set(nodes)) != len(nodes):
        raise DegenerateSensors(f"coincident sensors {nodes}")
    e = np.zeros((N, len(nodes)))
    e[nodes, np.arange(len(nodes))] = 1.0
    # grid delta 1/h^d times h^{d/2}
    return e / math.sqrt(cell_measure)


def sensor_vectors(a, pulse: Pulse, nodes: Sequence[int], cell_measure: float, funcs: OperatorFunctions | None = None):
    """Sensor matrix ``b`` (``N x m``): ``[fhat(sqrt(a))]^{1/2}`` applied to scaled grid deltas."""
    funcs = funcs or OperatorFunctions(a)
    delta = _grid_deltas(funcs.N, nodes, cell_measure, dim=None)

    def root_fhat(x):
        # rounding can push fhat a hair below zero
        return np.sqrt(np.maximum(pulse.fhat(np.sqrt(np.maximum(x, 0.0))), 0.0))

    return funcs.apply(root_fhat, delta)


def synthesize_spectral(a, b: np.ndarray, tau: float, two_n: int, funcs: OperatorFunctions | None = None) -> DataSet:
    """``D_k = b^T cos(k tau sqrt(a)) b`` for ``k = 0..two_n-1``."""
    funcs = funcs or OperatorFunctions(a)
    b = np.asarray(b, dtype=float)
    if b.ndim == 1:
        b = b[:, None]
    snaps = funcs.propagator_snapshots(b, tau, two_n)
    frames = np.einsum("im,kin->kmn", b, snaps)
    frames = 0.5 * (frames + frames.transpose(0, 2, 1))
    return DataSet(frames, tau)


def simulate_spectral(medium, pulse: Pulse, tau: float, two_n: int, method: str = "auto") -> DataSet:
    """Convenience driver: operator, sensors and spectral data for a medium."""
    a = schrodinger_operator(medium)
    funcs = OperatorFunctions(a, method)
    b = sensor_vectors(a, pulse, medium.sensor_nodes, medium.cell_measure, funcs)
    return synthesize_spectral(a, b, tau, two_n, funcs)


def stable_substeps(a, tau: float, minimum: int = 16) -> int:
    """Smallest leapfrog substep count (at least ``minimum``) within the stability limit, with 10% slack."""
    lam_max = gershgorin_bound(a)
    return max(minimum, int(math.ceil(1.1 * tau * math.sqrt(lam_max) / 2.0)))


def synthesize_fdtd(medium, pulse: Pulse, tau: float, two_n: int, substeps: int | None = 16) -> DataSet:
    """Second-order leapfrog solution of ``(d_t^2 + a) p = f'(t) delta_s``, returning even-extension samples.

    All sensors fire in one vectorized run (one column per source).
    ``substeps=None`` picks the smallest stable count of at least 16.
    """
    a = schrodinger_operator(medium)
    if substeps is None:
        substeps = stable_substeps(a, tau)
    if substeps < 1:
        raise ValidationError("substeps must be positive")
    dt = tau / substeps
    lam_max = gershgorin_bound(a)
    if dt * math.sqrt(lam_max) > 2.0:
        raise CflViolation(f"dt={dt:.3e} exceeds the leapfrog limit {2.0 / math.sqrt(lam_max):.3e}")
    nodes = medium.sensor_nodes
    m = len(nodes)
    if len(set(nodes)) != m:
        raise DegenerateSensors(f"coincident sensors {nodes}")
    k0 = int(math.ceil(pulse.half_width / tau))
    forcing = np.zeros((a.shape[0], m))
    forcing[nodes, np.arange(m)] = 1.0 / medium.cell_measure
    p_prev = np.zeros((a.shape[0], m))
    p_cur = np.zeros((a.shape[0], m))
    samples = np.zeros((k0 + two_n, m, m))
    t0 = -k0 * tau
    total = (k0 + two_n - 1) * substeps
    # p_cur holds time t0 + step*dt; p_prev one step earlier (both zero: at rest)
    for step in range(total + 1):
        if step % substeps == 0:
            samples[step // substeps] = p_cur[nodes, :].T
        if step == total:
            break
        t = t0 + step * dt
        p_next = 2.0 * p_cur - p_prev + dt**2 * (pulse.df(t) * forcing - a @ p_cur)
        p_prev, p_cur = p_cur, p_next
    # samples[i] is p at t = (i - k0) tau, indexed [source, receiver]
    frames = np.zeros((two_n, m, m))
    for k in range(two_n):
        frames[k] = samples[k0 + k]
        if k <= k0:
            frames[k] += samples[k0 - k]
    frames = 0.5 * (frames + frames.transpose(0, 2, 1))
    return DataSet(frames, tau)


def simulate(medium, pulse: Pulse, tau: float, two_n: int, solver: str = "spectral", substeps: int | None = 16) -> DataSet:
    if solver == "spectral":
        return simulate_spectral(medium, pulse, tau, two_n)
    if solver == "fdtd":
        return synthesize_fdtd(medium, pulse, tau, two_n, substeps)
    raise ValidationError(f"unknown solver {solver!r}")


def folded_spectrum(pulse: Pulse, tau: float, theta) -> np.ndarray:
    """Pulse spectrum seen by the sampled data: ``fhat`` aliased onto ``theta = tau omega`` in ``[0, pi]``."""
    theta = np.asarray(theta, dtype=float)
    images = int(math.ceil(pulse.max_frequency * tau / (2 * math.pi))) + 1
    out = np.zeros_like(theta)
    for k in range(images):
        out += pulse.fhat((theta + 2 * math.pi * k) / tau) + pulse.fhat((2 * math.pi * (k + 1) - theta) / tau)
    return out


def unit_grid_scale(pulse: Pulse, tau: float, d0: float, samples: int = 4096) -> float:
    """Factor that puts homogeneous-medium data on the unit-step ROM grid.

    In a homogeneous medium the frames are cosine moments
    ``D_k = int_0^pi cos(k theta) w(theta) dtheta`` of a weight proportional
    to the folded pulse spectrum. Deep ROM coefficients depend only on
    ``w(0)``: they satisfy ``gamma_j = gamma_hat_j = tau`` exactly when
    ``w(0) = 2/(pi tau)``. Multiplying data whose first frame is ``d0`` by
    the returned factor enforces that.
    """
    if not d0 > 0:
        raise ValidationError("first data frame must be positive")
    theta = (np.arange(samples) + 0.5) * math.pi / samples
    weight = folded_spectrum(pulse, tau, theta)
    at_zero = float(folded_spectrum(pulse, tau, np.array([0.0]))[0])
    if not at_zero > 0:
        raise ValidationError("pulse has no zero-frequency content; unit-grid scaling undefined")
    # w = K * folded, K fixed by d0 = K * int folded
    k_scale = d0 / (math.pi * float(np.mean(weight)))
    return 2.0 / (math.pi * tau * k_scale * at_zero)


def born_oracle(reference, perturbed, synthesize: Callable[[object], DataSet], eps_h: float = 1e-3) -> DataSet:
    """Born data ``D0 + dD/deps`` at ``eps = 0`` along ``q0 + eps (q - q0)``, by central differences."""
    if not 0 < eps_h <= 0.1:
        raise ValidationError("eps_h must lie in (0, 0.1]")
    d0 = synthesize(reference)
    dp = synthesize(reference.blend(perturbed, eps_h))
    dm = synthesize(reference.blend(perturbed, -eps_h))
    return DataSet(d0.frames + (dp.frames - dm.frames) / (2 * eps_h), d0.tau)
