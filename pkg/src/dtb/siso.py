"""Single-input single-output ROM of the propagator (one-dimensional media).

The ROM propagator is the tridiagonal projection ``R^{-T} (P^T P P) R^{-1}``
where ``R`` is the Cholesky factor of the mass matrix; its sensor vector is
``sqrt(D_0) e_1``. ``factorize`` splits ``(2/tau^2)(I - P~)`` into a lower
bidiagonal factor and reads off the coefficients gamma, gamma_hat.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import gram, linalg
from .errors import NonContractive, NotPositiveDefinite, ShapeMismatch
from .forward import DataSet

log = logging.getLogger(__name__)

BAND_TOL = 1e-10


@dataclass(frozen=True)
class SisoRom:
    tau: float
    p_tilde: np.ndarray
    b_norm: float
    off_band: float = 0.0  # relative off-tridiagonal magnitude before cleanup

    @property
    def n(self) -> int:
        return self.p_tilde.shape[0]

    @property
    def b_tilde(self) -> np.ndarray:
        e = np.zeros(self.n)
        e[0] = self.b_norm
        return e

    def xi(self) -> np.ndarray:
        return (2.0 / self.tau**2) * (np.eye(self.n) - self.p_tilde)


@dataclass(frozen=True)
class SisoFactor:
    l_tilde: np.ndarray
    gammas: np.ndarray
    gamma_hats: np.ndarray
    tau: float
    d0: float

    @property
    def n(self) -> int:
        return self.l_tilde.shape[0]


def _scalar_data(data: DataSet) -> np.ndarray:
    if data.m != 1:
        raise ShapeMismatch(f"SISO ROM needs single-sensor data, got m={data.m}")
    return data.scalar


def band_defect(x: np.ndarray, bandwidth: int = 1) -> float:
    """Largest entry outside the band, relative to the largest entry overall."""
    rows, cols = np.indices(x.shape)
    outside = np.abs(rows - cols) > bandwidth
    scale = np.max(np.abs(x)) or 1.0
    return float(np.max(np.abs(x[outside]), initial=0.0) / scale)


def project_propagator(mass: np.ndarray, stiff: np.ndarray):
    """Return ``(R, R^{-T} stiff R^{-1})`` with ``R`` the upper Cholesky factor of ``mass``."""
    r = linalg.cholesky_upper(mass)
    tmp = scipy.linalg.solve_triangular(r, stiff, trans="T", lower=False)
    p = scipy.linalg.solve_triangular(r, tmp.T, trans="T", lower=False).T
    return r, 0.5 * (p + p.T)


def build_rom(data: DataSet, n: int | None = None, check_contraction: bool = True) -> SisoRom:
    d = _scalar_data(data)
    if not d[0] > 0:
        raise NotPositiveDefinite("D_0 must be positive", index=0)
    pair = gram.gram_from_data(data, n)
    _, p = project_propagator(pair.mass.data, pair.stiff.data)
    defect = band_defect(p, 1)
    log.debug("SISO ROM off-tridiagonal magnitude %.3e", defect)
    p = np.triu(np.tril(p, 1), -1)
    if check_contraction:
        norm = np.max(np.abs(np.linalg.eigvalsh(p)))
        if norm >= 1.0:
            raise NonContractive(f"ROM propagator has spectral norm {norm:.6f} >= 1")
    return SisoRom(data.tau, p, float(np.sqrt(d[0])), defect)


def chebyshev_moments(p: np.ndarray, b: np.ndarray, two_n: int) -> np.ndarray:
    """``b^T T_k(p) b`` for ``k < two_n`` via the three-term recurrence (``b`` may be a block)."""
    b = np.asarray(b, dtype=float)
    out = []
    t_prev, t_cur = None, b
    for k in range(two_n):
        out.append(b.T @ t_cur)
        t_next = p @ t_cur if k == 0 else 2.0 * (p @ t_cur) - t_prev
        t_prev, t_cur = t_cur, t_next
    return np.array(out)


def rom_data(rom: SisoRom, two_n: int) -> DataSet:
    return DataSet(chebyshev_moments(rom.p_tilde, rom.b_tilde, two_n), rom.tau)


def bidiagonal_factor(xi: np.ndarray) -> np.ndarray:
    """Lower bidiagonal ``L`` with ``xi = L L^T``, negative diagonal and positive subdiagonal."""
    try:
        c = np.linalg.cholesky(linalg.symmetrize(xi))
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"I - P~ is not positive definite: {exc}") from exc
    # flipping column signs leaves L L^T unchanged
    c = -c
    c = np.triu(np.tril(c), -1)
    sub = np.diag(c, -1)
    if np.any(sub <= 0):
        raise NotPositiveDefinite("subdiagonal of the ROM factor has the wrong sign")
    return c


def gammas_from_factor(l_tilde: np.ndarray, d0: float):
    """Recover gamma_j, gamma_hat_j from the bidiagonal factor seeded by ``gamma_hat_1 = 1/D_0``."""
    n = l_tilde.shape[0]
    g = np.empty(n)
    gh = np.empty(n)
    gh[0] = 1.0 / d0
    for j in range(n):
        g[j] = 1.0 / (gh[j] * l_tilde[j, j] ** 2)
        if j + 1 < n:
            gh[j + 1] = 1.0 / (g[j] * l_tilde[j + 1, j] ** 2)
    return g, gh


def factor_from_gammas(gammas, gamma_hats) -> np.ndarray:
    g, gh = np.asarray(gammas), np.asarray(gamma_hats)
    n = len(g)
    L = np.diag(-1.0 / np.sqrt(g * gh))
    L[np.arange(1, n), np.arange(n - 1)] = 1.0 / np.sqrt(g[:-1] * gh[1:])
    return L


def factorize(rom: SisoRom) -> SisoFactor:
    l_tilde = bidiagonal_factor(rom.xi())
    d0 = rom.b_norm**2
    g, gh = gammas_from_factor(l_tilde, d0)
    return SisoFactor(l_tilde, g, gh, rom.tau, d0)


def factor_from_data(data: DataSet, n: int | None = None) -> SisoFactor:
    return factorize(build_rom(data, n))


@dataclass
class GalerkinPetrovReport:
    V: np.ndarray
    W: np.ndarray
    v_orthogonality: float
    w_orthogonality: float
    galerkin_residual: float
    tridiagonality: float


def diagnostics_vw(l_fine: np.ndarray, snapshots: np.ndarray, rom: SisoRom, factor: SisoFactor,
                   propagator: np.ndarray | None = None) -> GalerkinPetrovReport:
    """Orthonormal primary/dual snapshots and the Galerkin-Petrov identity on the fine grid.

    ``snapshots[k]`` is the primary snapshot ``P_k`` (length ``N``) for
    ``k < n``. The dual basis uses ``L_q`` in place of the exact time-step
    factor, so its orthogonality is limited by ``O(tau^2)`` effects.
    """
    n = rom.n
    big = np.asarray(snapshots[:n]).reshape(n, -1).T
    r = linalg.cholesky_upper(big.T @ big)
    V = scipy.linalg.solve_triangular(r, big.T, trans="T", lower=False).T
    W = scipy.linalg.solve_triangular(factor.l_tilde, (l_fine.T @ V).T, lower=True).T
    eye = np.eye(n)
    gp = np.linalg.norm(factor.l_tilde - V.T @ l_fine @ W) / np.linalg.norm(factor.l_tilde)
    tri = band_defect(V.T @ propagator @ V, 1) if propagator is not None else float("nan")
    return GalerkinPetrovReport(
        V, W, float(np.linalg.norm(V.T @ V - eye)), float(np.linalg.norm(W.T @ W - eye)), float(gp), tri
    )
