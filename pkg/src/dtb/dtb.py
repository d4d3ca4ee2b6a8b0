"""Data-to-Born transform.

The measured data define a ROM whose factor ``L~_q`` is compared with the
factor ``L~_0`` of a reference ROM. The Born-like data are the reference
frames plus the directional derivative of the ROM measurement functions
``D_0^{1/2} E_1^T T_j(I - tau^2/2 L L^T) E_1 D_0^{1/2}`` at ``L = L~_0`` in
the direction ``L~_q - L~_0`` (the linearization of ``L L^T`` gives the
matrix ``delta`` below).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import forward, linalg, mimo, siso
from .errors import ShapeMismatch, ValidationError
from .forward import DataSet

RECURRENCES = ("propagator", "xi")


@dataclass(frozen=True)
class DtbOutput:
    frames: DataSet
    reference: DataSet
    derivative: np.ndarray
    rom_order: int
    mimo: bool


@dataclass(frozen=True)
class FactorPair:
    """Bidiagonal factor as a dense array plus the first data frame used for the sandwich."""

    l_tilde: np.ndarray
    m: int
    d0: np.ndarray


def _as_pair(factor) -> FactorPair:
    if isinstance(factor, FactorPair):
        return factor
    if isinstance(factor, siso.SisoFactor):
        return FactorPair(factor.l_tilde, 1, np.array([[factor.d0]]))
    if isinstance(factor, mimo.MimoFactor):
        return FactorPair(factor.l_tilde.data, factor.m, factor.d0)
    raise ValidationError(f"unsupported factor type {type(factor).__name__}")


def _sandwich(d0: np.ndarray, inner: np.ndarray) -> np.ndarray:
    root = linalg.spd_sqrt(d0, tol=1e-8) if d0.shape[0] > 1 else np.sqrt(d0)
    return np.einsum("ab,kbc,cd->kad", root, inner, root)


def rom_measurements(l_tilde: np.ndarray, m: int, tau: float, two_n: int, d0: np.ndarray) -> np.ndarray:
    """``D_0^{1/2} E_1^T T_j(I - tau^2/2 L L^T) E_1 D_0^{1/2}`` for ``j < two_n``."""
    nm = l_tilde.shape[0]
    p = np.eye(nm) - 0.5 * tau**2 * (l_tilde @ l_tilde.T)
    e1 = np.eye(nm, m)
    t_prev, t_cur = None, e1
    inner = np.empty((two_n, m, m))
    for k in range(two_n):
        inner[k] = t_cur[:m]
        t_next = p @ t_cur if k == 0 else 2.0 * (p @ t_cur) - t_prev
        t_prev, t_cur = t_cur, t_next
    return _sandwich(np.atleast_2d(d0), inner)


def chebyshev_derivative(l_q, l_q0, tau: float, two_n: int, d0=None, recurrence: str = "propagator") -> np.ndarray:
    """Derivative frames of the ROM measurements along ``L~_0 -> L~_q``.

    ``l_q`` and ``l_q0`` are SISO/MIMO factors or :class:`FactorPair`.
    ``d0`` overrides the frame used to sandwich the result (defaults to the
    reference factor's). ``recurrence='xi'`` multiplies ``z_{j-1}`` by
    ``2 xi(P~0)`` instead of ``2 P~0``; it exists only to quantify how far
    that variant is from the true derivative.
    """
    if recurrence not in RECURRENCES:
        raise ValidationError(f"unknown recurrence {recurrence!r}")
    a, b = _as_pair(l_q), _as_pair(l_q0)
    if a.l_tilde.shape != b.l_tilde.shape or a.m != b.m:
        raise ShapeMismatch(f"factors differ in shape: {a.l_tilde.shape} vs {b.l_tilde.shape}")
    m = b.m
    nm = b.l_tilde.shape[0]
    lq, l0 = a.l_tilde, b.l_tilde
    delta = lq @ l0.T + l0 @ lq.T - 2.0 * (l0 @ l0.T)
    p0 = np.eye(nm) - 0.5 * tau**2 * (l0 @ l0.T)
    mult = p0 if recurrence == "propagator" else (2.0 / tau**2) * (np.eye(nm) - p0)
    e1 = np.eye(nm, m)
    inner = np.zeros((two_n, m, m))
    z_prev = np.zeros((nm, m))
    if two_n == 1:
        return inner
    z_cur = -0.5 * tau**2 * (delta @ e1)
    inner[1] = z_cur[:m]
    t_prev, t_cur = e1, p0 @ e1  # T_{j-2} e1, T_{j-1} e1 of the reference ROM
    for j in range(2, two_n):
        z_next = 2.0 * (mult @ z_cur) - z_prev - tau**2 * (delta @ t_cur)
        inner[j] = z_next[:m]
        z_prev, z_cur = z_cur, z_next
        t_prev, t_cur = t_cur, 2.0 * (p0 @ t_cur) - t_prev
    d0 = b.d0 if d0 is None else np.atleast_2d(np.asarray(d0, dtype=float))
    out = _sandwich(d0, inner)
    return 0.5 * (out + out.transpose(0, 2, 1))


def factorize(data: DataSet, n: int | None, use_mimo: bool):
    if use_mimo:
        return mimo.factor_from_data(data, n)
    return siso.factor_from_data(data, n)


def dtb_transform(measured: DataSet, reference: DataSet, n: int | None = None, use_mimo: bool | None = None) -> DtbOutput:
    """Map measured frames to Born-like frames given reference frames in the same acquisition.

    ``n`` defaults to ``two_n // 2``. ``use_mimo`` defaults to ``m > 1``.
    The returned frames are ``reference + derivative`` (unit step), and the
    sandwich uses the reference first frame, which is assumed unaffected by
    the unknown perturbation.
    """
    if measured.m != reference.m:
        raise ShapeMismatch(f"sensor counts differ: {measured.m} vs {reference.m}")
    if not np.isclose(measured.tau, reference.tau, rtol=1e-12):
        raise ShapeMismatch(f"sampling intervals differ: {measured.tau} vs {reference.tau}")
    if reference.two_n < measured.two_n:
        raise ShapeMismatch("reference has fewer frames than the measurement")
    reference = reference.truncated(measured.two_n)
    use_mimo = measured.m > 1 if use_mimo is None else use_mimo
    if measured.m > 1 and not use_mimo:
        raise ShapeMismatch("multi-sensor data require the block ROM")
    n = measured.two_n // 2 if n is None else n
    f_q = factorize(measured, n, use_mimo)
    f_0 = factorize(reference, n, use_mimo)
    deriv = chebyshev_derivative(f_q, f_0, measured.tau, measured.two_n, d0=reference.frames[0])
    frames = reference.frames + deriv
    frames = 0.5 * (frames + frames.transpose(0, 2, 1))
    return DtbOutput(DataSet(frames, measured.tau), reference, deriv, n, bool(use_mimo))


def dtb_from_medium(measured: DataSet, reference_medium, pulse: forward.Pulse, n: int | None = None,
                    use_mimo: bool | None = None, method: str = "auto") -> DtbOutput:
    """As :func:`dtb_transform`, synthesizing the reference frames from a fine-grid medium."""
    ref = forward.simulate_spectral(reference_medium, pulse, measured.tau, measured.two_n, method)
    return dtb_transform(measured, ref, n, use_mimo)
